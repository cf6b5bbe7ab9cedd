#include "pbsim/snapshot.hpp"

#include <bit>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include "pbsim/errors.hpp"

static_assert(std::endian::native == std::endian::little,
              "snapshot payload assumes a little-endian host");

namespace pbsim {

namespace {
std::string format_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}
}  // namespace

void write_snapshot(const std::filesystem::path& path, const ComplexField& f,
                    double time) {
  if (f.space() != Space::position)
    throw config_error("snapshots store position-space fields");
  std::ostringstream header;
  header << "PBSIM1 " << f.grid().dims();
  for (int axis = 0; axis < f.grid().dims(); ++axis)
    header << ' ' << f.grid().size(axis);
  for (int axis = 0; axis < f.grid().dims(); ++axis)
    header << ' ' << format_g17(f.grid().length(axis));
  header << ' ' << format_g17(time) << '\n';

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw config_error("cannot open " + path.string() + " for writing");
  const std::string h = header.str();
  out.write(h.data(), static_cast<std::streamsize>(h.size()));
  out.write(reinterpret_cast<const char*>(f.data()),
            static_cast<std::streamsize>(f.size() * sizeof(cplx)));
  if (!out) throw config_error("short write to " + path.string());
}

LoadedSnapshot read_snapshot(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw config_error("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line))
    throw config_error("missing snapshot header in " + path.string());
  std::istringstream header(line);
  std::string magic;
  int dims = 0;
  header >> magic >> dims;
  if (magic != "PBSIM1")
    throw config_error("bad snapshot magic in " + path.string());
  if (dims < 1 || dims > 3)
    throw config_error("bad snapshot dims in " + path.string());
  std::array<int, 3> n{1, 1, 1};
  std::array<double, 3> length{0.0, 0.0, 0.0};
  for (int axis = 0; axis < dims; ++axis) header >> n[axis];
  for (int axis = 0; axis < dims; ++axis) header >> length[axis];
  double time = 0.0;
  header >> time;
  if (!header)
    throw config_error("malformed snapshot header in " + path.string());

  auto grid = Grid::make(dims, n, length);
  LoadedSnapshot snap{ComplexField(grid, Space::position), time};
  in.read(reinterpret_cast<char*>(snap.field.data()),
          static_cast<std::streamsize>(snap.field.size() * sizeof(cplx)));
  if (in.gcount() !=
      static_cast<std::streamsize>(snap.field.size() * sizeof(cplx)))
    throw config_error("truncated snapshot payload in " + path.string());
  return snap;
}

}  // namespace pbsim
