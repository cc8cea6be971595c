#ifndef BNLS_INITIAL_CONDITIONS_HPP_
#define BNLS_INITIAL_CONDITIONS_HPP_

#include <memory>
#include <random>

#include "bnls/operators.hpp"

namespace bnls {

/// A exp(-|x|^2 / (2 w^2) + i chirp |x|^2 / 2)
Field gaussian_field(std::shared_ptr<const Grid> grid, Real amplitude,
                     Real width, Real chirp = 0.0);

/// A exp(-((r - r0)^2 + z^2) / (2 w^2)): a torus around the x_d axis.
Field ring_field(std::shared_ptr<const Grid> grid, Real amplitude, Real r0,
                 Real width);

/// Samples q(|x|) of a radial profile given by its values on `basis` nodes.
Field radial_profile_field(std::shared_ptr<const Grid> grid,
                           const RadialBasis &basis, const VectorX &profile,
                           Real scale = 1.0);

struct RandomFieldOptions {
  int bumps = 3;
  Real amplitude = 1.0;
  Real min_width = 0.6;
  Real max_width = 2.0;
  Real max_center_r = 3.0;
  Real max_center_z = 3.0;
  Real max_momentum = 1.5;
};

/*
 * Sum of smooth random bumps
 *   a exp(-(r^2 - c^2)^2 / (2 s^4) - (z - z0)^2 / (2 t^2) + i k z + i b r^2)
 * which are smooth functions of (r^2, z), so they are regular on the axis.
 */
Field random_field(std::shared_ptr<const Grid> grid, std::mt19937_64 &rng,
                   const RandomFieldOptions &options = {});

}  // namespace bnls

#endif  // BNLS_INITIAL_CONDITIONS_HPP_
