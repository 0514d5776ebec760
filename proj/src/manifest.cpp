#include "dispersim/manifest.hpp"

#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "dispersim/sha256.hpp"

namespace dispersim {

void RunManifest::add_config(const std::string& path) {
  config_hashes.push_back({path, sha256_file_hex(path)});
}

void RunManifest::write(const std::string& path) const {
  nlohmann::json j;
  j["command"] = command;
  j["version"] = kDispersimVersion;
  j["seed"] = seed;
  j["threads"] = threads;
  j["wall_seconds"] = wall_seconds;
  nlohmann::json cfg = nlohmann::json::object();
  for (const auto& [p, h] : config_hashes) cfg[p] = h;
  j["configs"] = cfg;
  j["outputs"] = outputs;
  for (const auto& [k, v] : extra) j[k] = v;
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write manifest: " + path);
  out << j.dump(2) << '\n';
}

}  // namespace dispersim
