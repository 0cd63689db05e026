#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <variant>

#include <nlohmann/json.hpp>

#include "champagne/configuration.h"
#include "champagne/ring_configuration.h"

namespace champagne {

inline constexpr int kSchemaVersion = 1;

// Explicit document:
//   {"schema_version":1,"kind":"explicit","discs":[{"x","y","r","log_r"}...],
//    "n_max","ratio_sup","provenance"}
// "log_r" carries radii that underflow; loaders fall back to log(r).
nlohmann::json to_json(const Configuration& c);
Configuration configuration_from_json(const nlohmann::json& j);

// Ring document: {"schema_version":1,"kind":"rings","rings":[{"n","row",
// "per_cell","phase","delta","log_r"}...],"dropped","n_max","ratio_sup",
// "provenance"}.
nlohmann::json to_json(const RingConfiguration& c);
RingConfiguration rings_from_json(const nlohmann::json& j);

using AnyConfiguration = std::variant<Configuration, RingConfiguration>;
AnyConfiguration any_from_json(const nlohmann::json& j);

// Deterministic text form: compact JSON, shortest round-trip doubles,
// sorted keys, trailing newline.
std::string dump_document(const nlohmann::json& j);

// 64-bit FNV-1a, printed as 16 lowercase hex digits.
std::uint64_t fnv1a64(std::string_view bytes);
std::string hash_hex(std::string_view bytes);

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view text);
nlohmann::json read_json_file(const std::filesystem::path& path);

}  // namespace champagne
