#ifndef BNLS_TYPES_HPP_
#define BNLS_TYPES_HPP_

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace bnls {

using Real = double;
using Complex = std::complex<Real>;
using Index = Eigen::Index;

using VectorX = Eigen::Matrix<Real, Eigen::Dynamic, 1>;
using MatrixX = Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic>;
using RowMatrixX =
    Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Samples u(r_j, z_k) of a cylindrically symmetric field. Row j is the axial
/// line at radius r_j, so memory order is r outer, z inner.
using FieldArray =
    Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RealFieldArray =
    Eigen::Array<Real, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Violated precondition on user-facing input (bad grid size, bad config, ...).
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A numerical procedure could not deliver its post-condition.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline void require(bool ok, const std::string &message) {
  if (!ok) throw InvalidArgument(message);
}

}  // namespace bnls

#endif  // BNLS_TYPES_HPP_
