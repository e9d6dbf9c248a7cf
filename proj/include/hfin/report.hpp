#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace hfin {

constexpr const char* kToolVersion = "0.1.0";

std::uint64_t fnv1a64(const std::string& bytes);
/// Hex FNV-1a of the canonical (sorted-key, compact) dump of `config`.
std::string config_hash(const nlohmann::json& config);

std::string provenance_exact();
std::string provenance_grid(double h);
std::string provenance_mc(std::size_t samples, std::uint64_t seed);

struct RunManifest {
  std::vector<std::string> command_line;
  std::string config_hash;
  std::uint64_t seed = 0;
  std::vector<double> resolutions;
  std::string tool_version = kToolVersion;
  std::optional<double> timing_seconds;  ///< only recorded on request, so reports stay byte-identical
};

nlohmann::json to_json(const RunManifest& m);

/// {"manifest": ..., "result": ..., "status": ...}
nlohmann::json make_report(const RunManifest& m, const nlohmann::json& result, bool ok,
                           const std::vector<std::string>& failed_invariants = {});

/// Scalar leaves as "path,value" lines, paths joined with '.'.
std::string to_csv(const nlohmann::json& j);

}  // namespace hfin
