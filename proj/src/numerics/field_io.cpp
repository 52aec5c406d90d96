#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "dlab/error.hpp"
#include "dlab/numerics.hpp"

namespace dlab {
namespace {

static_assert(std::endian::native == std::endian::little, "binary field format assumes little endian");

std::ofstream open_out(const std::string& path, std::ios::openmode mode) {
  std::ofstream os(path, mode);
  if (!os) throw ConfigError("numerics", "field_io", "cannot open " + path + " for writing");
  return os;
}

std::ifstream open_in(const std::string& path, std::ios::openmode mode) {
  std::ifstream is(path, mode);
  if (!is) throw ConfigError("numerics", "field_io", "cannot open " + path);
  return is;
}

TorusGrid grid_for_count(std::size_t count) {
  for (int n = 16; n <= (1 << 15); n *= 2) {
    if (static_cast<std::size_t>(n) == count) return TorusGrid(n, 1);
    if (static_cast<std::size_t>(n) * n == count) return TorusGrid(n, 2);
  }
  throw ConfigError("numerics", "read_field_csv", "row count " + std::to_string(count) + " is not N or N^2");
}

}  // namespace

void write_field_csv(const Field& f, const std::string& path) {
  auto os = open_out(path, std::ios::out);
  os << "index,real,imag\n" << std::setprecision(17);
  for (std::size_t i = 0; i < f.size(); ++i) os << i << ',' << f[i].real() << ',' << f[i].imag() << '\n';
}

Field read_field_csv(const std::string& path) {
  auto is = open_in(path, std::ios::in);
  std::string line;
  std::getline(is, line);
  std::vector<cplx> values;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::size_t index = 0;
    double re = 0, im = 0;
    char c1 = 0, c2 = 0;
    if (!(ls >> index >> c1 >> re >> c2 >> im) || c1 != ',' || c2 != ',' || index != values.size())
      throw ConfigError("numerics", "read_field_csv", "malformed row: " + line);
    values.emplace_back(re, im);
  }
  const TorusGrid grid = grid_for_count(values.size());
  return Field(grid, std::move(values));
}

void write_field_binary(const Field& f, const std::string& path) {
  auto os = open_out(path, std::ios::out | std::ios::binary);
  const std::uint32_t header[2] = {static_cast<std::uint32_t>(f.grid().n()),
                                   static_cast<std::uint32_t>(f.grid().dim())};
  os.write(reinterpret_cast<const char*>(header), sizeof header);
  os.write(reinterpret_cast<const char*>(f.values().data()),
           static_cast<std::streamsize>(f.size() * sizeof(cplx)));
}

Field read_field_binary(const std::string& path) {
  auto is = open_in(path, std::ios::in | std::ios::binary);
  std::uint32_t header[2] = {0, 0};
  if (!is.read(reinterpret_cast<char*>(header), sizeof header))
    throw ConfigError("numerics", "read_field_binary", "truncated header in " + path);
  Field f(TorusGrid(static_cast<int>(header[0]), static_cast<int>(header[1])));
  if (!is.read(reinterpret_cast<char*>(f.values().data()), static_cast<std::streamsize>(f.size() * sizeof(cplx))))
    throw ConfigError("numerics", "read_field_binary", "truncated payload in " + path);
  return f;
}

}  // namespace dlab
