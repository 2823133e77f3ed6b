#pragma once
// Run manifests: the resolved configuration of a command plus SHA-256
// digests of everything it read and wrote. Manifests carry no timestamps, so
// identical runs produce identical manifests.

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

namespace matchrep::app {

// Lowercase hex SHA-256 of a file's bytes.
std::string sha256_file(const std::filesystem::path& path);
std::string sha256_bytes(const std::string& bytes);

struct Manifest {
  std::string command;
  nlohmann::json config;
  std::vector<std::filesystem::path> inputs;   // as given on the command line
  std::vector<std::filesystem::path> outputs;  // relative to the output directory

  // Hashes every listed file and writes <out_dir>/manifest.json.
  void write(const std::filesystem::path& out_dir) const;
};

// Reads a manifest's "config" section so a run can be repeated from it;
// plain config files are returned unchanged.
nlohmann::json config_from_file(const std::filesystem::path& path);

}  // namespace matchrep::app
