#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace billiard {

template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

using Vec = VectorX<double>;
using Mat = MatrixX<double>;
using Complex = std::complex<double>;
using CVec = VectorX<Complex>;
using CMat = MatrixX<Complex>;

// Error taxonomy. Everything derives from std::runtime_error or
// std::domain_error so callers can catch broadly.
struct DomainError : std::domain_error {
  using std::domain_error::domain_error;
};
struct SolverError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
// Tangential hits, singular fronts.
struct DegenerateError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct StencilError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct VerificationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct IncompletenessError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct PoleProximityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline constexpr double kPi = 3.14159265358979323846;

/// Orthonormal basis (as columns) of the orthogonal complement of a nonzero
/// vector. Built from a Householder reflection, so it is deterministic and
/// exactly orthogonal up to rounding.
template <typename Derived>
MatrixX<typename Derived::Scalar> complement_basis(const Eigen::MatrixBase<Derived>& v) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Index n = v.size();
  VectorX<Scalar> u = v.normalized();
  // Reflect e_k onto u, where k is the largest |u_k| for stability.
  Eigen::Index k = 0;
  u.cwiseAbs().maxCoeff(&k);
  VectorX<Scalar> w = u;
  w(k) += (u(k) >= Scalar(0) ? Scalar(1) : Scalar(-1));
  w.normalize();
  MatrixX<Scalar> h = MatrixX<Scalar>::Identity(n, n) - Scalar(2) * w * w.transpose();
  MatrixX<Scalar> out(n, n - 1);
  Eigen::Index c = 0;
  for (Eigen::Index j = 0; j < n; ++j) {
    if (j == k) continue;
    out.col(c++) = h.col(j);
  }
  return out;
}

}  // namespace billiard
