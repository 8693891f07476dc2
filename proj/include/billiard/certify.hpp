#pragma once

#include <cstdint>
#include <vector>

#include <json.hpp>

#include "billiard/geometry.hpp"

namespace billiard::certify {

using geometry::Scene;
using geometry::SceneConstants;

struct ConditionCheck {
  bool holds = false;
  double lhs = 0.0;  // (1 + (d0+a) lambda0)^(d0+a), may overflow to inf
  double rhs = 0.0;  // (1 + d0 mu0)^(2 d0)
  double log_lhs = 0.0;
  double log_rhs = 0.0;
};

/// Compares (1+(d0+a)lambda0)^(d0+a) < (1+d0 mu0)^(2 d0) in log space.
ConditionCheck check_pinching_condition(const SceneConstants& c);

struct PinchingReport {
  double alpha0 = 0.0;  // ln(1 + d0 mu0) / (d0 + a)
  double beta0 = 0.0;   // ln(1 + (d0+a) lambda0) / d0
  double margin = 0.0;  // 2 alpha0 - beta0
  bool pinching_inequality = false;
  double lhs = 0.0;
  double rhs = 0.0;
  double log_lhs = 0.0;
  double log_rhs = 0.0;
};

PinchingReport pinching_exponents(const SceneConstants& c);

/// P = 2H + 2L + 2 lambda (HL + LH + L^2 + lambda LHL).
template <typename D1, typename D2>
MatrixX<typename D1::Scalar> nonintegrability_operator(const Eigen::MatrixBase<D1>& h,
                                              const Eigen::MatrixBase<D2>& l,
                                              typename D1::Scalar lambda) {
  using Scalar = typename D1::Scalar;
  const MatrixX<Scalar> H = h, L = l;
  MatrixX<Scalar> p = Scalar(2) * H + Scalar(2) * L +
                      Scalar(2) * lambda * (H * L + L * H + L * L + lambda * L * H * L);
  return Scalar(0.5) * (p + p.transpose());
}

/// Tangent-block differential of Phi at a perpendicular point at distance
/// lambda from the boundary with curvature hp:
/// [[I + 2 lambda H, 2 lambda I + 2 lambda^2 H], [-2H, -(I + 2 lambda H)]].
template <typename Derived>
MatrixX<typename Derived::Scalar> dphi_analytic(const Eigen::MatrixBase<Derived>& hp,
                                                typename Derived::Scalar lambda) {
  using Scalar = typename Derived::Scalar;
  const auto k = hp.rows();
  const MatrixX<Scalar> I = MatrixX<Scalar>::Identity(k, k);
  const MatrixX<Scalar> H = hp;
  MatrixX<Scalar> out(2 * k, 2 * k);
  out.topLeftCorner(k, k) = I + Scalar(2) * lambda * H;
  out.topRightCorner(k, k) = Scalar(2) * lambda * I + Scalar(2) * lambda * lambda * H;
  out.bottomLeftCorner(k, k) = Scalar(-2) * H;
  out.bottomRightCorner(k, k) = -(I + Scalar(2) * lambda * H);
  return out;
}

/// d alpha((u, u~), (p, p~)) = -<u, p~> + <u~, p> on stacked tangent pairs.
template <typename D1, typename D2>
typename D1::Scalar symplectic_form(const Eigen::MatrixBase<D1>& a, const Eigen::MatrixBase<D2>& b) {
  const auto k = a.size() / 2;
  return -a.head(k).dot(b.tail(k)) + a.tail(k).dot(b.head(k));
}

struct SymplecticReport {
  int pair_i = -1, pair_j = -1;  // 0-based
  double lambda_used = 0.0;
  Mat H;  // boundary curvature at the impact point
  Mat L;  // unstable front curvature at the sample point
  Mat P;
  Mat dphi_analytic;
  Mat dphi_fd;
  double min_eig_P = 0.0;
  double max_abs_error = 0.0;    // over unit sample pairs, all three routes
  double max_rel_error = 0.0;    // max_abs_error / |P|
  double max_block_error = 0.0;  // analytic vs FD, relative to |dPhi|
  double antisymmetry_error = 0.0;
  double dphi_norm = 0.0;
  double mu_bound = 0.0;     // min_eig(P) / (C (1 + C^2))
  double mu_measured = 0.0;  // min |d alpha(a, b)| over samples
  int samples = 0;
  bool agreement = false;          // all routes within 1e-5
  bool positive_definite = false;  // min_eig_P > 0
  bool verified() const { return agreement && positive_definite; }
};

/// Obstacle pair realizing the smallest gap.
std::pair<int, int> closest_pair(const Scene& scene);

/// Builds the perpendicular sample point between K_i and K_j at distance
/// lambda from K_i and compares the three evaluations of the symplectic
/// pairing over `samples` seeded random unit pairs.
SymplecticReport verify_nonintegrability(const Scene& scene, int i, int j, double lambda,
                                         int samples = 100, std::uint64_t seed = 1);

/// min_eig(P) along a list of lambda values (no finite differences).
std::vector<double> min_eig_scan(const Scene& scene, int i, int j,
                                 const std::vector<double>& lambdas);

nlohmann::json pinching_json(const SceneConstants& c, const PinchingReport& r);
nlohmann::json symplectic_json(const SymplecticReport& r);

}  // namespace billiard::certify
