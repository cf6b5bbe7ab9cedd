#include "pbsim/manifest.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "pbsim/errors.hpp"

namespace pbsim {

const char* version() { return "0.1.0"; }

std::uint64_t fnv1a_bytes(const void* data, std::size_t size) {
  const auto* p = static_cast<const unsigned char*>(data);
  std::uint64_t h = 14695981039346656037ULL;
  for (std::size_t i = 0; i < size; ++i) {
    h ^= p[i];
    h *= 1099511628211ULL;
  }
  return h;
}

std::uint64_t fnv1a_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw config_error("cannot read file for digest: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  const std::string bytes = buf.str();
  return fnv1a_bytes(bytes.data(), bytes.size());
}

std::string digest_hex(std::uint64_t digest) {
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(digest));
  return buf;
}

void StageRecord::add_input(const std::filesystem::path& path) {
  inputs.emplace_back(path.string(), fnv1a_file(path));
}

void StageRecord::add_output(const std::filesystem::path& path) {
  outputs.emplace_back(path.string(), fnv1a_file(path));
}

StageRecord& RunManifest::add_stage(const std::string& name) {
  stages.push_back(StageRecord{name, {}, {}, 0.0});
  return stages.back();
}

void RunManifest::write(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw config_error("cannot write manifest " + path.string());
  out << "format = pbsim-manifest-1\n";
  out << "code_version = " << code_version << "\n";
  out << "config_hash = " << digest_hex(config_hash) << "\n";
  out << "seed = " << seed << "\n";
  for (const auto& s : stages) {
    const std::string prefix = "stage." + s.name;
    char secs[32];
    std::snprintf(secs, sizeof(secs), "%.3f", s.wall_seconds);
    out << prefix << ".wall_seconds = " << secs << "\n";
    for (const auto& [p, d] : s.inputs)
      out << prefix << ".input = " << digest_hex(d) << "  " << p << "\n";
    for (const auto& [p, d] : s.outputs)
      out << prefix << ".output = " << digest_hex(d) << "  " << p << "\n";
  }
  if (!out) throw config_error("failed writing manifest " + path.string());
}

}  // namespace pbsim
