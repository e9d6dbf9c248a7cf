#include "hfin/report.hpp"

#include <cstdio>
#include <sstream>

namespace hfin {

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string config_hash(const nlohmann::json& config) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(config.dump())));
  return buf;
}

std::string provenance_exact() { return "exact"; }

std::string provenance_grid(double h) {
  std::ostringstream os;
  os << "grid(" << h << ")";
  return os.str();
}

std::string provenance_mc(std::size_t samples, std::uint64_t seed) {
  return "mc(" + std::to_string(samples) + ", " + std::to_string(seed) + ")";
}

nlohmann::json to_json(const RunManifest& m) {
  nlohmann::json j;
  j["command_line"] = m.command_line;
  j["config_hash"] = m.config_hash;
  j["seed"] = m.seed;
  j["resolutions"] = m.resolutions;
  j["tool_version"] = m.tool_version;
  if (m.timing_seconds) j["timing_seconds"] = *m.timing_seconds;
  return j;
}

nlohmann::json make_report(const RunManifest& m, const nlohmann::json& result, bool ok,
                           const std::vector<std::string>& failed_invariants) {
  nlohmann::json j;
  j["manifest"] = to_json(m);
  j["result"] = result;
  j["status"] = ok ? "ok" : "assertion_failed";
  if (!failed_invariants.empty()) j["failed_invariants"] = failed_invariants;
  return j;
}

namespace {

void flatten(const nlohmann::json& j, const std::string& path, std::ostringstream& os) {
  if (j.is_object()) {
    for (auto it = j.begin(); it != j.end(); ++it) flatten(it.value(), path.empty() ? it.key() : path + "." + it.key(), os);
  } else if (j.is_array()) {
    for (std::size_t k = 0; k < j.size(); ++k) flatten(j[k], path + "." + std::to_string(k), os);
  } else {
    std::string v = j.is_string() ? j.get<std::string>() : j.dump();
    bool quote = v.find_first_of(",\"\n") != std::string::npos;
    if (quote) {
      std::string q = "\"";
      for (char c : v) q += c == '"' ? std::string("\"\"") : std::string(1, c);
      v = q + "\"";
    }
    os << path << "," << v << "\n";
  }
}

}  // namespace

std::string to_csv(const nlohmann::json& j) {
  std::ostringstream os;
  os << "path,value\n";
  flatten(j, "", os);
  return os.str();
}

}  // namespace hfin
