#include "champagne/serialization.h"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace champagne {
namespace {

void check_schema(const nlohmann::json& j, std::string_view kind) {
  if (!j.is_object()) throw std::invalid_argument("configuration document must be a JSON object");
  const int version = j.value("schema_version", kSchemaVersion);
  if (version != kSchemaVersion) {
    throw std::invalid_argument("unsupported schema_version " + std::to_string(version));
  }
  const std::string k = j.value("kind", std::string(kind));
  if (k != kind) throw std::invalid_argument("expected a '" + std::string(kind) + "' document, got '" + k + "'");
}

}  // namespace

nlohmann::json to_json(const Configuration& c) {
  nlohmann::json discs = nlohmann::json::array();
  for (const Disc& d : c.discs) {
    discs.push_back({{"x", d.center.x}, {"y", d.center.y}, {"r", d.radius}, {"log_r", d.log_radius}});
  }
  return {{"schema_version", kSchemaVersion}, {"kind", "explicit"}, {"discs", std::move(discs)},
          {"n_max", c.n_max}, {"ratio_sup", c.ratio_sup}, {"provenance", c.provenance}};
}

Configuration configuration_from_json(const nlohmann::json& j) {
  check_schema(j, "explicit");
  Configuration c;
  for (const auto& d : j.at("discs")) {
    const Point center{d.at("x").get<double>(), d.at("y").get<double>()};
    Disc disc;
    disc.center = center;
    if (d.contains("log_r")) {
      disc.log_radius = d.at("log_r").get<double>();
      disc.radius = d.contains("r") ? d.at("r").get<double>() : std::exp(disc.log_radius);
    } else {
      disc.radius = d.at("r").get<double>();
      disc.log_radius = disc.radius > 0.0 ? std::log(disc.radius) : -kInf;
    }
    c.discs.push_back(disc);
  }
  if (j.contains("ratio_sup")) {
    c.ratio_sup = j.at("ratio_sup").get<double>();
  } else {
    for (const Disc& d : c.discs) {
      const double gap = d.boundary_gap();
      if (gap > 0.0) c.ratio_sup = std::max(c.ratio_sup, std::exp(d.log_radius - std::log(gap)));
    }
  }
  c.n_max = j.value("n_max", 0);
  c.provenance = j.value("provenance", nlohmann::json::object());
  return c;
}

nlohmann::json to_json(const RingConfiguration& c) {
  nlohmann::json rings = nlohmann::json::array();
  for (const Ring& r : c.rings()) {
    rings.push_back({{"n", r.generation}, {"row", r.row}, {"per_cell", r.per_cell}, {"phase", r.phase},
                     {"delta", r.delta}, {"log_r", r.log_radius}});
  }
  return {{"schema_version", kSchemaVersion}, {"kind", "rings"},        {"rings", std::move(rings)},
          {"dropped", c.dropped()},           {"n_max", c.n_max()},     {"ratio_sup", c.ratio_sup()},
          {"disc_count", c.size()},           {"provenance", c.provenance()}};
}

RingConfiguration rings_from_json(const nlohmann::json& j) {
  check_schema(j, "rings");
  std::vector<Ring> rings;
  for (const auto& r : j.at("rings")) {
    Ring ring;
    ring.generation = r.at("n").get<int>();
    ring.row = r.at("row").get<int>();
    ring.per_cell = r.at("per_cell").get<int>();
    if (ring.generation < 1 || ring.generation > kMaxGeneration) {
      throw std::invalid_argument("ring generation out of range");
    }
    ring.count = cells_in_generation(ring.generation) * ring.per_cell;
    ring.phase = r.value("phase", 0.5);
    ring.delta = r.at("delta").get<double>();
    ring.log_radius = r.at("log_r").get<double>();
    rings.push_back(ring);
  }
  return RingConfiguration(std::move(rings), j.value("dropped", std::uint64_t{0}),
                           j.value("provenance", nlohmann::json::object()));
}

AnyConfiguration any_from_json(const nlohmann::json& j) {
  if (j.is_object() && j.value("kind", std::string("explicit")) == "rings") return rings_from_json(j);
  return configuration_from_json(j);
}

std::string dump_document(const nlohmann::json& j) { return j.dump() + "\n"; }

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char ch : bytes) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string hash_hex(std::string_view bytes) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(bytes)));
  return buf;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  if (in.bad()) throw IoError("cannot read " + path.string());
  return os.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw IoError("write failed for " + path.string());
}

nlohmann::json read_json_file(const std::filesystem::path& path) {
  const std::string text = read_text_file(path);
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument(path.string() + ": " + e.what());
  }
}

}  // namespace champagne
