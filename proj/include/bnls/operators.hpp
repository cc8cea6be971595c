#ifndef BNLS_OPERATORS_HPP_
#define BNLS_OPERATORS_HPP_

#include <cstdint>
#include <memory>

#include "bnls/geometry.hpp"
#include "bnls/types.hpp"

namespace bnls {

/// Samples of a cylindrically symmetric field on a shared grid.
struct Field {
  std::shared_ptr<const Grid> grid;
  FieldArray values;
  std::uint64_t generation = 0;

  Field() = default;
  explicit Field(std::shared_ptr<const Grid> g)
      : grid(std::move(g)), values(FieldArray::Zero(grid->n_r, grid->n_z)) {}
  Field(std::shared_ptr<const Grid> g, FieldArray v)
      : grid(std::move(g)), values(std::move(v)) {
    require(values.rows() == grid->n_r && values.cols() == grid->n_z,
            "Field: value shape does not match grid");
  }
};

struct FunctionalSnapshot {
  Real time = 0.0;
  Real mass = 0.0;
  Real energy = 0.0;
  Real grad_sq = 0.0;
  Real grad_y_sq = 0.0;
  Real dz_sq = 0.0;
  Real lap_sq = 0.0;
  Real pot = 0.0;
};

/// op * u applied to every axial line (one real GEMM on the interleaved data).
FieldArray apply_radial(const MatrixX &op, const FieldArray &u);

/// In-place DFT along z for every radial node. axial_inverse includes 1/n_z.
void axial_forward(FieldArray &u);
void axial_inverse(FieldArray &u);

/// Spectral d^order/dz^order.
FieldArray axial_derivative(const Grid &grid, const FieldArray &u, int order);

FieldArray radial_derivative(const Grid &grid, const FieldArray &u);
FieldArray radial_second_derivative(const Grid &grid, const FieldArray &u);

FieldArray laplacian(const Grid &grid, const FieldArray &u);
Field laplacian(const Field &u);
Field bilaplacian(const Field &u);

/// int conj(u) v dx
Complex inner_product(const Field &u, const Field &v);
Real integrate(const Field &density_owner, const RealFieldArray &density);

/// `nonlinearity` multiplies the potential term of the energy.
FunctionalSnapshot functionals(const Field &u, Real mu, Real sigma,
                               Real nonlinearity = 1.0);

/// Same quantities evaluated from the radial eigenbasis and the axial DFT;
/// agrees with functionals() up to rounding.
FunctionalSnapshot spectral_functionals(const Grid &grid, const FieldArray &u,
                                        Real mu, Real sigma,
                                        Real nonlinearity = 1.0);

Real lp_norm(const Field &u, Real p);

/// sup_z int |u(y, z)|^2 dy
Real axial_trace_sup(const Field &u);

/// sum_j W_j |u_jk|^2 for every axial node k.
VectorX axial_mass_profile(const Grid &grid, const FieldArray &u);

}  // namespace bnls

#endif  // BNLS_OPERATORS_HPP_
