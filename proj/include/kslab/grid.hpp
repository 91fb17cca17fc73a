#pragma once

#include "kslab/model.hpp"

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace kslab {

enum class Geometry { rectangle, radial_disk };

std::string to_string(Geometry geometry);
Geometry geometry_from_string(const std::string& name);

/// Run of faces whose left cells are consecutive and whose right cell is left + stride.
struct FaceRun {
  std::size_t first_face{0};
  std::size_t count{0};
  std::uint32_t first_left{0};
  std::uint32_t stride{1};
};

/// Cell faces shared by two cells. Boundary faces carry zero flux and are not stored.
struct FaceTable {
  std::vector<std::uint32_t> left;
  std::vector<std::uint32_t> right;
  std::vector<double> area;         ///< face measure (length in 2D, 2 pi r_f in the radial reduction)
  std::vector<double> distance;     ///< distance between the two cell centers
  std::vector<double> transmissivity;  ///< area / distance
  std::vector<double> dual_weight;  ///< measure attributed to the face in gradient quadratures
  std::vector<FaceRun> runs;        ///< the same faces grouped into strided runs
  std::size_t size() const noexcept { return left.size(); }
};

/**
 * Cell-centered mesh of a rectangle [0,Lx]x[0,Ly] or of a disk of radius R under
 * axisymmetry. Rectangle cells are indexed row-major, idx = j * nx + i.
 * Copies share the face table.
 */
class Grid {
public:
  static Grid rectangle(double lx, double ly, int nx, int ny);
  static Grid radial_disk(double radius, int nr);

  Geometry geometry() const noexcept { return geometry_; }
  int nx() const noexcept { return nx_; }
  int ny() const noexcept { return ny_; }
  std::size_t size() const noexcept { return volumes_->size(); }
  double lx() const noexcept { return lx_; }
  double ly() const noexcept { return ly_; }
  double hx() const noexcept { return lx_ / nx_; }
  double hy() const noexcept { return geometry_ == Geometry::rectangle ? ly_ / ny_ : 0.0; }
  double radius() const noexcept { return lx_; }

  /// Cell center. For the radial reduction x is the radius and y is 0.
  double x(std::size_t cell) const noexcept;
  double y(std::size_t cell) const noexcept;

  double volume(std::size_t cell) const noexcept { return (*volumes_)[cell]; }
  std::span<const double> volumes() const noexcept { return *volumes_; }
  /// Sum of the cell volumes (Lx*Ly or pi R^2 to rounding).
  double measure() const noexcept { return measure_; }
  const FaceTable& faces() const noexcept { return *faces_; }

  /// Structural identity; equal for grids built from identical parameters.
  std::uint64_t token() const noexcept { return token_; }

  friend bool operator==(const Grid& a, const Grid& b) noexcept { return a.token_ == b.token_; }

private:
  Grid() = default;
  void finalize();

  Geometry geometry_{Geometry::rectangle};
  int nx_{0};
  int ny_{0};
  double lx_{0.0};
  double ly_{0.0};
  double measure_{0.0};
  std::uint64_t token_{0};
  std::shared_ptr<const std::vector<double>> volumes_;
  std::shared_ptr<const FaceTable> faces_;
};

/// Per-cell values tied to a grid by its identity token.
class Field {
public:
  Field() = default;
  explicit Field(const Grid& grid, double value = 0.0);
  Field(const Grid& grid, std::vector<double> values);

  std::uint64_t grid_token() const noexcept { return token_; }
  std::size_t size() const noexcept { return values_.size(); }
  double& operator[](std::size_t i) noexcept { return values_[i]; }
  double operator[](std::size_t i) const noexcept { return values_[i]; }
  std::span<double> values() noexcept { return values_; }
  std::span<const double> values() const noexcept { return values_; }
  const std::vector<double>& data() const noexcept { return values_; }

  bool all_finite() const noexcept;
  double max() const noexcept;
  double min() const noexcept;

  friend bool operator==(const Field& a, const Field& b) noexcept {
    return a.token_ == b.token_ && a.values_ == b.values_;
  }

private:
  std::uint64_t token_{0};
  std::vector<double> values_;
};

/// Throws GridMismatch unless the field lives on the grid.
void require_on_grid(const Field& f, const Grid& g, const char* what);

enum class ChemotaxisScheme { upwind, central };
std::string to_string(ChemotaxisScheme scheme);
ChemotaxisScheme chemotaxis_scheme_from_string(const std::string& name);

/// Discrete integral: sum of cell values times cell volumes, in cell order.
double integrate(const Field& f, const Grid& g);

/// Conservative Neumann Laplacian (5-point, or (1/r)(r f_r)_r in the radial reduction).
Field laplacian_neumann(const Field& f, const Grid& g);

/// div(D(v) grad u) with face coefficients from `averaging`.
/// Throws InvalidCoefficient when a face coefficient is not positive.
Field diffusive_divergence(const Field& u, const Field& v, const CoefficientSpec& diffusion,
                           const Grid& g, FaceAveraging averaging = FaceAveraging::arithmetic);

/// div(u S(v) grad v). Face velocity w = S(v_face) (v_R - v_L) / h; face density by
/// arithmetic mean (central) or by the donor cell along w (upwind).
Field chemotactic_divergence(const Field& u, const Field& v, const CoefficientSpec& sensitivity,
                             const Grid& g, ChemotaxisScheme scheme = ChemotaxisScheme::upwind);

/// Adds the net outward chemotactic flux of each cell (not divided by its volume) to `acc`.
void accumulate_chemotactic_flux(const Field& u, const Field& v, const CoefficientSpec& sensitivity,
                                 const Grid& g, ChemotaxisScheme scheme, std::span<double> acc);

/// max over faces of |w_f| / h_f; 0 when v is flat.
double max_face_rate(const Field& v, const CoefficientSpec& sensitivity, const Grid& g);

/// Sum over interior faces of dual_weight * ((v_R - v_L) / h)^2.
double grad_sq_integral(const Field& v, const Grid& g);

/// Sum over interior faces of dual_weight * |(f_R - f_L) / h|^r.
double grad_power_integral(std::span<const double> f, const Grid& g, double r);

/// Per-face diffusion coefficients for the given concentration field.
std::vector<double> face_diffusion(const Field& v, const CoefficientSpec& diffusion, const Grid& g,
                                   FaceAveraging averaging);

/// Per-face chemotactic velocities w = S(v_face) (v_R - v_L) / h.
std::vector<double> face_velocity(const Field& v, const CoefficientSpec& sensitivity, const Grid& g);

}  // namespace kslab
