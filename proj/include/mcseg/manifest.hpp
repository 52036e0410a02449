#pragma once

#include "mcseg/config.hpp"

#include <filesystem>
#include <map>
#include <string>

namespace mcseg {

/// Hex SHA-256 of a file's bytes.
std::string file_sha256(const std::filesystem::path& path);

/// Record of one CLI run: enough to repeat it exactly.
struct Manifest {
  std::string command;
  std::map<std::string, std::string> inputs;   // role -> path
  std::map<std::string, std::string> digests;  // role -> sha256
  std::map<std::string, std::string> outputs;  // role -> path
  std::map<std::string, double> parameters;    // e.g. sigma values
  Config config;

  std::string to_json() const;
  static Manifest from_json(const std::string& text);

  void save(const std::filesystem::path& path) const;
  static Manifest load(const std::filesystem::path& path);
};

}  // namespace mcseg
