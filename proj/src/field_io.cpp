#include "kslab/field_io.hpp"

#include "kslab/error.hpp"

#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace kslab {

namespace {

std::uint64_t to_little_endian(std::uint64_t x) {
  if constexpr (std::endian::native == std::endian::little) {
    return x;
  } else {
    return __builtin_bswap64(x);
  }
}

}  // namespace

void write_snapshot(std::ostream& os, const Field& f, const Grid& g, double t) {
  require_on_grid(f, g, "write_snapshot");
  char tbuf[64];
  std::snprintf(tbuf, sizeof tbuf, "%.17g", t);
  os << "KSFIELD v1 " << to_string(g.geometry()) << ' ' << g.nx() << ' ' << g.ny() << ' ' << tbuf
     << '\n';
  std::vector<std::uint64_t> words(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) words[i] = to_little_endian(std::bit_cast<std::uint64_t>(f[i]));
  os.write(reinterpret_cast<const char*>(words.data()),
           static_cast<std::streamsize>(words.size() * sizeof(std::uint64_t)));
  if (!os) throw Error("write_snapshot: stream write failed");
}

void write_snapshot(const std::filesystem::path& path, const Field& f, const Grid& g, double t) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw Error("cannot open snapshot for writing: " + path.string());
  write_snapshot(os, f, g, t);
}

Snapshot read_snapshot(std::istream& is) {
  std::string header;
  if (!std::getline(is, header)) throw Error("read_snapshot: missing header line");
  std::istringstream hs(header);
  std::string magic, version, geometry;
  Snapshot s;
  if (!(hs >> magic >> version >> geometry >> s.nx >> s.ny >> s.t) || magic != "KSFIELD" ||
      version != "v1")
    throw Error("read_snapshot: malformed header '" + header + "'");
  s.geometry = geometry_from_string(geometry);
  if (s.nx <= 0 || s.ny <= 0) throw Error("read_snapshot: bad dimensions in header");
  const auto n = static_cast<std::size_t>(s.nx) * static_cast<std::size_t>(s.ny);
  std::vector<std::uint64_t> words(n);
  is.read(reinterpret_cast<char*>(words.data()), static_cast<std::streamsize>(n * sizeof(std::uint64_t)));
  if (static_cast<std::size_t>(is.gcount()) != n * sizeof(std::uint64_t))
    throw Error("read_snapshot: truncated payload");
  s.values.resize(n);
  for (std::size_t i = 0; i < n; ++i) s.values[i] = std::bit_cast<double>(to_little_endian(words[i]));
  return s;
}

Snapshot read_snapshot(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("cannot open snapshot: " + path.string());
  return read_snapshot(is);
}

Field load_field(const std::filesystem::path& path, const Grid& g, double* t) {
  Snapshot s = read_snapshot(path);
  if (s.geometry != g.geometry() || s.nx != g.nx() || s.ny != g.ny())
    throw GridMismatch("snapshot shape does not match grid: " + path.string());
  if (t) *t = s.t;
  return Field(g, std::move(s.values));
}

}  // namespace kslab
