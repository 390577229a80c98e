#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace mgap {

// Reproducibility sidecar written next to every file-producing run.
// The embedded copy inside JSON reports carries only the replay inputs
// (subcommand, argv, seed, version, outputs); execution details that
// legitimately vary between equivalent runs (threads, duration,
// checksums) stay in the sidecar so report bytes are stable.
struct RunManifest {
  std::string artifact_version;
  std::string subcommand;
  std::vector<std::string> argv;  // original args, program name excluded
  std::uint64_t seed = 0;
  std::vector<std::string> outputs;
  int threads = 0;
  double duration_seconds = 0.0;
  std::map<std::string, std::string> checksums;  // output path -> fnv1a64 hex

  std::string to_json(bool embedded) const;
  static RunManifest from_json_text(const std::string& text);
  static RunManifest load(const std::string& path);

  void fill_checksums();  // hashes the files listed in outputs
  void save(const std::string& path) const;

  static std::string sidecar_path(const std::string& first_output);
};

// FNV-1a 64-bit over the file bytes, lowercase hex. Throws NotFound.
std::string file_checksum(const std::string& path);

}  // namespace mgap
