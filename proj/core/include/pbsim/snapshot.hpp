#pragma once

#include <filesystem>
#include <utility>

#include "pbsim/field.hpp"

namespace pbsim {

// On-disk field snapshot. One text header line
//   PBSIM1 <dims> <n...> <L...> <t>
// with lengths and time printed as %.17g, then point_count little-endian
// float64 (re, im) pairs in row-major order with axis 0 fastest. The
// header precision makes write/read round trips bit exact.
void write_snapshot(const std::filesystem::path& path, const ComplexField& f,
                    double time);

struct LoadedSnapshot {
  ComplexField field;
  double time;
};

// Throws config_error on bad magic, malformed header or truncated payload.
LoadedSnapshot read_snapshot(const std::filesystem::path& path);

}  // namespace pbsim
