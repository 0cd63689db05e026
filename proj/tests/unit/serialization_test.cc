#include <cmath>
#include <filesystem>

#include <gtest/gtest.h>

#include "champagne/generators.h"
#include "champagne/serialization.h"

namespace champagne {
namespace {

TEST(HashTest, KnownFnv1aVectors) {
  EXPECT_EQ(fnv1a64(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(fnv1a64("a"), 0xaf63dc4c8601ec8cULL);
  EXPECT_EQ(fnv1a64("foobar"), 0x85944171f73967e8ULL);
  EXPECT_EQ(hash_hex(""), "cbf29ce484222325");
}

TEST(SerializationTest, ExplicitRoundTripIsExact) {
  std::vector<Disc> discs = {Disc::make({0.7, 0.1}, 0.013), Disc::from_log_radius({-0.9, 0.05}, -5000.0),
                             Disc::make({0.1, -0.8}, 1.0 / 3.0)};
  const Configuration c = Configuration::from_discs(discs, {{"generator", "test"}});
  const std::string text = dump_document(to_json(c));
  const Configuration back = configuration_from_json(nlohmann::json::parse(text));
  ASSERT_EQ(back.size(), c.size());
  for (std::size_t k = 0; k < c.size(); ++k) {
    EXPECT_EQ(back.discs[k].center, c.discs[k].center);
    EXPECT_EQ(back.discs[k].radius, c.discs[k].radius);
    EXPECT_EQ(back.discs[k].log_radius, c.discs[k].log_radius);
  }
  EXPECT_EQ(back.provenance, c.provenance);
  EXPECT_EQ(dump_document(to_json(back)), text);
}

TEST(SerializationTest, RingRoundTripIsExact) {
  GeneratorParams params;
  params.n_max = 6;
  params.drop_first = 17;
  const RingConfiguration c = generate_corollary(params);
  const std::string text = dump_document(to_json(c));
  const AnyConfiguration any = any_from_json(nlohmann::json::parse(text));
  ASSERT_TRUE(std::holds_alternative<RingConfiguration>(any));
  const RingConfiguration& back = std::get<RingConfiguration>(any);
  EXPECT_EQ(back.size(), c.size());
  EXPECT_EQ(back.dropped(), 17u);
  for (std::size_t k = 0; k < c.rings().size(); ++k) {
    EXPECT_EQ(back.rings()[k].delta, c.rings()[k].delta);
    EXPECT_EQ(back.rings()[k].log_radius, c.rings()[k].log_radius);
  }
  EXPECT_EQ(dump_document(to_json(back)), text);
}

TEST(SerializationTest, DumpIsCompactSortedAndNewlineTerminated) {
  const nlohmann::json j = {{"b", 1}, {"a", 0.1}};
  EXPECT_EQ(dump_document(j), "{\"a\":0.1,\"b\":1}\n");
}

TEST(SerializationTest, RejectsBadDocuments) {
  EXPECT_THROW(configuration_from_json(nlohmann::json::array()), std::invalid_argument);
  EXPECT_THROW(configuration_from_json({{"schema_version", 99}, {"kind", "explicit"}, {"discs", nlohmann::json::array()}}),
               std::invalid_argument);
  EXPECT_THROW(rings_from_json({{"schema_version", 1}, {"kind", "explicit"}}), std::invalid_argument);
}

TEST(SerializationTest, MissingFileIsAnIoError) {
  const auto blocker = std::filesystem::temp_directory_path() / "champagne_serialization_blocker";
  write_text_file(blocker, "x");
  EXPECT_THROW(read_text_file(blocker / "missing.json"), IoError);
  // The parent is a regular file, so the directory cannot be created.
  EXPECT_THROW(write_text_file(blocker / "sub" / "file.json", "x"), std::exception);
  std::filesystem::remove(blocker);
}

TEST(SerializationTest, FileRoundTrip) {
  const auto path = std::filesystem::temp_directory_path() / "champagne_serialization_test.json";
  write_text_file(path, "{\"a\":1}\n");
  EXPECT_EQ(read_text_file(path), "{\"a\":1}\n");
  EXPECT_EQ(read_json_file(path)["a"], 1);
  std::filesystem::remove(path);
}

}  // namespace
}  // namespace champagne
