#ifndef DISPERSIM_MANIFEST_HPP
#define DISPERSIM_MANIFEST_HPP

#include <cstdint>
#include <string>
#include <vector>

namespace dispersim {

inline constexpr const char* kDispersimVersion = "0.1.0";

// Written next to every run's outputs so any result can be reproduced
// from the manifest alone.
struct RunManifest {
  std::string command;
  std::vector<std::pair<std::string, std::string>> config_hashes;  // path, sha256
  std::uint64_t seed = 0;
  int threads = 0;
  double wall_seconds = 0.0;
  std::vector<std::string> outputs;
  std::vector<std::pair<std::string, std::string>> extra;

  void add_config(const std::string& path);
  void write(const std::string& path) const;
};

}  // namespace dispersim

#endif
