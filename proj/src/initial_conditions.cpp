#include "bnls/initial_conditions.hpp"

#include <cmath>
#include <numbers>

namespace bnls {

Field gaussian_field(std::shared_ptr<const Grid> grid, Real amplitude,
                     Real width, Real chirp) {
  require(width > 0.0, "gaussian_field: width must be positive");
  Field u(grid);
  const Grid &g = *grid;
  for (Index j = 0; j < g.n_r; ++j) {
    for (Index k = 0; k < g.n_z; ++k) {
      const Real x2 = g.r_nodes(j) * g.r_nodes(j) + g.z_nodes(k) * g.z_nodes(k);
      u.values(j, k) = amplitude * std::exp(Complex(-0.5 * x2 / (width * width),
                                                    0.5 * chirp * x2));
    }
  }
  return u;
}

Field ring_field(std::shared_ptr<const Grid> grid, Real amplitude, Real r0,
                 Real width) {
  require(width > 0.0, "ring_field: width must be positive");
  require(r0 >= 0.0, "ring_field: r0 must be non-negative");
  Field u(grid);
  const Grid &g = *grid;
  for (Index j = 0; j < g.n_r; ++j) {
    const Real dr = g.r_nodes(j) - r0;
    for (Index k = 0; k < g.n_z; ++k) {
      const Real z = g.z_nodes(k);
      u.values(j, k) = amplitude * std::exp(-0.5 * (dr * dr + z * z) / (width * width));
    }
  }
  return u;
}

Field radial_profile_field(std::shared_ptr<const Grid> grid,
                           const RadialBasis &basis, const VectorX &profile,
                           Real scale) {
  require(profile.size() == basis.size(),
          "radial_profile_field: profile does not match basis");
  Field u(grid);
  const Grid &g = *grid;
  for (Index j = 0; j < g.n_r; ++j) {
    for (Index k = 0; k < g.n_z; ++k) {
      const Real rho = std::hypot(g.r_nodes(j), g.z_nodes(k));
      u.values(j, k) = scale * basis.interpolate(profile, rho);
    }
  }
  return u;
}

Field random_field(std::shared_ptr<const Grid> grid, std::mt19937_64 &rng,
                   const RandomFieldOptions &options) {
  std::uniform_real_distribution<Real> unit(0.0, 1.0);
  std::uniform_real_distribution<Real> sym(-1.0, 1.0);
  Field u(grid);
  const Grid &g = *grid;
  const Real width_span = options.max_width - options.min_width;
  for (int b = 0; b < options.bumps; ++b) {
    const Complex a = options.amplitude * std::polar(0.3 + 0.7 * unit(rng),
                                                     2.0 * std::numbers::pi * unit(rng));
    const Real c = options.max_center_r * unit(rng);
    const Real s = options.min_width + width_span * unit(rng);
    const Real t = options.min_width + width_span * unit(rng);
    const Real z0 = options.max_center_z * sym(rng);
    // Quantized so the phase is periodic on the axial grid.
    const Real dk = std::numbers::pi / g.z_max;
    const Real kz = dk * std::round(options.max_momentum * sym(rng) / dk);
    const Real chirp = 0.5 * options.max_momentum * sym(rng) / (s * s);
    for (Index j = 0; j < g.n_r; ++j) {
      const Real r2 = g.r_nodes(j) * g.r_nodes(j);
      const Real radial = (r2 - c * c) * (r2 - c * c) / (2.0 * s * s * s * s);
      for (Index k = 0; k < g.n_z; ++k) {
        const Real dz = g.z_nodes(k) - z0;
        u.values(j, k) += a * std::exp(Complex(-radial - 0.5 * dz * dz / (t * t),
                                               kz * g.z_nodes(k) + chirp * r2));
      }
    }
  }
  return u;
}

}  // namespace bnls
