#ifndef BNLS_GEOMETRY_HPP_
#define BNLS_GEOMETRY_HPP_

#include <array>
#include <iosfwd>
#include <memory>

#include "bnls/radial_basis.hpp"
#include "bnls/types.hpp"

namespace bnls {

/*
 * Cylindrical grid on R^{d-1} x R: a spectral radial basis in r = |y| and a
 * uniform periodic grid in z = x_d.
 */
struct Grid {
  int d = 0;
  Index n_r = 0;
  Real r_max = 0.0;
  Index n_z = 0;
  Real z_max = 0.0;

  VectorX r_nodes;
  /// Radial weights including the factor |S^{d-2}| r^{d-2}.
  VectorX quad_weights;
  VectorX z_nodes;
  /// Axial wavenumbers in FFT order; index n_z/2 holds -pi n_z / (2 z_max).
  VectorX kz;
  Real dz = 0.0;

  std::shared_ptr<const RadialBasis> radial;

  Index size() const noexcept { return n_r * n_z; }

  /// sum_j sum_k W_j dz f(r_j, z_k)
  template <typename Derived>
  Real integrate(const Eigen::DenseBase<Derived> &density) const {
    return dz * (quad_weights.transpose() * density.derived().matrix().rowwise().sum())(0);
  }

  /// Integral over y only; one value per axial node.
  template <typename Derived>
  VectorX integrate_y(const Eigen::DenseBase<Derived> &density) const {
    return (quad_weights.transpose() * density.derived().matrix()).transpose();
  }
};

Grid build_grid(int d, Real r_max, Index n_r, Real z_max, Index n_z);

/// Jet of the base cutoff psi at r: psi^{(k)}, k = 0..6.
std::array<Real, 7> cutoff_jet(Real r);

/// Delta^m psi in R^n for m = 1, 2, 3, together with d/dr and d^2/dr^2 of
/// Delta psi.
struct CutoffLaplacians {
  Real lap = 0.0;
  Real lap_r = 0.0;
  Real lap_rr = 0.0;
  Real bilap = 0.0;
  Real trilap = 0.0;
};
CutoffLaplacians cutoff_laplacians(int n, Real r);

struct CutoffProfile {
  Real R = 0.0;
  int d = 0;
  VectorX psi;
  /// dpsi[k-1] = psi_R^{(k)}, k = 1..6.
  std::array<VectorX, 6> dpsi;
  VectorX phi_grad_r;
  VectorX phi_grad_z;
  VectorX lap_psi;
  /// d^2/dr^2 of Delta psi_R.
  VectorX lap_psi_rr;
  VectorX bilap_psi;
  VectorX trilap_psi;
  /// 10 R > r_max: the constant tail is cut off by the domain.
  bool truncated = false;
};

CutoffProfile build_cutoff(const Grid &grid, Real R);

struct CutoffCertificate {
  Real min_one_minus_psi_rr = 0.0;
  Real min_one_minus_psi_r_over_r = 0.0;
  Real min_dim_minus_lap = 0.0;
  Real max_psi_rr = 0.0;
  std::array<Real, 6> sup_dpsi{};
  bool truncated = false;
  bool passed = false;
};

CutoffCertificate certify_cutoff(const CutoffProfile &profile, const Grid &grid);

/// Same checks on a uniform sample of [0, r_end] (defaults to 12 R).
CutoffCertificate certify_cutoff_dense(int d, Real R, Index samples,
                                       Real r_end = 0.0);

/// Columns: r, psi, psi', psi'', lap, bilap, trilap.
void write_cutoff_csv(std::ostream &os, const CutoffProfile &profile,
                      const Grid &grid);

}  // namespace bnls

#endif  // BNLS_GEOMETRY_HPP_
