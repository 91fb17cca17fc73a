#pragma once

#include "kslab/config.hpp"
#include "kslab/grid.hpp"

#include <cstdint>
#include <utility>

namespace kslab {

/// Discretizes (u0, v0). Gaussian data is rescaled so the discrete integral equals the
/// requested mass; random perturbation coefficients come from `seed`.
/// Throws PreconditionError for data that is negative or identically zero.
std::pair<Field, Field> make_initial_data(const InitialDataSpec& spec, const Grid& g, std::uint64_t seed);

}  // namespace kslab
