#pragma once

#include "kslab/grid.hpp"

#include <filesystem>
#include <iosfwd>
#include <vector>

namespace kslab {

/// Contents of a KSFIELD v1 snapshot: one text header line
/// "KSFIELD v1 <geometry> <nx> <ny> <t>\n" followed by nx*ny little-endian
/// binary64 values in row-major order (ny = 1 for the radial reduction).
struct Snapshot {
  Geometry geometry{Geometry::rectangle};
  int nx{0};
  int ny{0};
  double t{0.0};
  std::vector<double> values;
};

void write_snapshot(std::ostream& os, const Field& f, const Grid& g, double t);
void write_snapshot(const std::filesystem::path& path, const Field& f, const Grid& g, double t);

Snapshot read_snapshot(std::istream& is);
Snapshot read_snapshot(const std::filesystem::path& path);

/// Reads a snapshot and attaches it to `g`; throws GridMismatch on a shape disagreement.
Field load_field(const std::filesystem::path& path, const Grid& g, double* t = nullptr);

}  // namespace kslab
