#ifndef BNLS_GROUNDSTATE_HPP_
#define BNLS_GROUNDSTATE_HPP_

#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "bnls/operators.hpp"
#include "bnls/radial_basis.hpp"

namespace bnls {

struct GroundStateOptions {
  Index n_r = 256;
  Real r_max = 40.0;
  Index max_iters = 2000;
  Real tol = 1e-10;
  /// Exponent of the renormalization factor; 0 selects (2 sigma + 1) / (2 sigma).
  Real exponent = 0.0;
};

struct GroundStateResult {
  int d = 0;
  Real sigma = 0.0;
  std::shared_ptr<const RadialBasis> basis;
  VectorX profile;
  Real residual = 0.0;
  Real mass_Q = 0.0;
  Real energy_Q = 0.0;
  Real lap_Q_sq = 0.0;
  Real pot_Q = 0.0;
  Real s_c = 0.0;
  /// Unset when s_c <= 0.
  std::optional<Real> threshold_EM;
  Real threshold_lap = 0.0;
  Index iterations = 0;
  std::vector<Real> change_history;
  /// (lap_sq + mass - pot) / pot
  Real pohozaev_defect = 0.0;
  /// -min(Q) / Q(0): size of the negative lobes of the tail.
  Real negativity = 0.0;
  /// Largest increase of Q between consecutive nodes, relative to Q(0).
  Real monotonicity_defect = 0.0;
};

/// Error from the fixed-point iteration, with its history.
class GroundStateError : public NumericalError {
 public:
  GroundStateError(const std::string &what, std::vector<Real> history)
      : NumericalError(what), history_(std::move(history)) {}
  const std::vector<Real> &history() const noexcept { return history_; }

 private:
  std::vector<Real> history_;
};

Real critical_index(int d, Real sigma);

/// Radial solution of Delta^2 Q + Q = |Q|^{2 sigma} Q in R^d by Petviashvili
/// iteration. `init` holds values on the basis nodes; empty means a Gaussian.
GroundStateResult solve_ground_state(int d, Real sigma,
                                     const GroundStateOptions &options = {},
                                     const VectorX &init = VectorX());

/// One renormalized iteration applied to q (for fixed-point checks).
VectorX petviashvili_step(const RadialBasis &basis, Real sigma,
                          const VectorX &q, Real exponent);

struct ThresholdSet {
  Real s_c = 0.0;
  Real threshold_EM = 0.0;
  Real threshold_lap = 0.0;
  Real energy_Q = 0.0;
  Real mass_Q = 0.0;
  Real lap_Q_sq = 0.0;
};

/// Rejects s_c <= 0.
ThresholdSet thresholds(const GroundStateResult &q);

struct InequalityCheck {
  std::string name;
  Real lhs = 0.0;
  Real rhs = 0.0;
  /// Positive when the inequality holds strictly.
  Real margin = 0.0;
  bool holds = false;
};

struct CriterionReport {
  /// "thm1_i", "thm1_ii", "thm2_i", "thm2_ii" or "none".
  std::string clause = "none";
  std::string description;
  bool satisfied = false;
  bool within_hypotheses = false;
  Real s_c = 0.0;
  std::vector<InequalityCheck> inequalities;
  std::vector<std::string> warnings;
};

CriterionReport check_blowup_criteria(const FunctionalSnapshot &u0, Real mu,
                                      Real sigma, int d,
                                      const std::optional<ThresholdSet> &thresholds,
                                      Real chi);

/// Columns r, Q.
void write_ground_state_csv(std::ostream &os, const GroundStateResult &q);

}  // namespace bnls

#endif  // BNLS_GROUNDSTATE_HPP_
