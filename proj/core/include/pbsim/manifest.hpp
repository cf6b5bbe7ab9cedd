#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace pbsim {

// Library version string, matching the CMake package version.
const char* version();

// FNV-1a 64-bit digest, used to fingerprint configs and data artifacts.
std::uint64_t fnv1a_bytes(const void* data, std::size_t size);
// Digest of a whole file. Throws config_error if the file cannot be read.
std::uint64_t fnv1a_file(const std::filesystem::path& path);
// Digest rendered as fixed-width hex, as written to manifests.
std::string digest_hex(std::uint64_t digest);

// One pipeline stage: what went in, what came out, how long it took.
struct StageRecord {
  std::string name;
  std::vector<std::pair<std::string, std::uint64_t>> inputs;   // path, digest
  std::vector<std::pair<std::string, std::uint64_t>> outputs;  // path, digest
  double wall_seconds = 0.0;

  // Records path plus the digest of its current on-disk bytes.
  void add_input(const std::filesystem::path& path);
  void add_output(const std::filesystem::path& path);
};

// Provenance record written next to run outputs: configuration fingerprint,
// RNG seed, code version, and per-stage artifact digests with timings.
struct RunManifest {
  std::string code_version = version();
  std::uint64_t config_hash = 0;
  std::uint64_t seed = 0;
  std::vector<StageRecord> stages;

  StageRecord& add_stage(const std::string& name);
  // Plain `key = value` text, one line per fact; stable ordering.
  void write(const std::filesystem::path& path) const;
};

}  // namespace pbsim
