#pragma once

#include <functional>
#include <vector>

#include "billiard/geometry.hpp"

namespace billiard::dynamics {

using geometry::BoundaryHit;
using geometry::Scene;

/// A point (q, v) of the unit sphere bundle over the exterior domain.
struct PhasePoint {
  Vec position;
  Vec direction;

  /// Checks |direction| = 1 to 1e-10 and renormalizes exactly.
  static PhasePoint make(const Vec& position, const Vec& direction);

  /// Stacked (q, v) in R^{2n}.
  Vec stacked() const;
  static PhasePoint from_stacked(const Vec& state);
};

struct FlowResult {
  PhasePoint endpoint;
  std::vector<BoundaryHit> hits;
  bool escaped = false;
};

/// Specular reflection xi - 2<xi,nu> nu.
template <typename D1, typename D2>
VectorX<typename D1::Scalar> reflect(const Eigen::MatrixBase<D1>& direction,
                                     const Eigen::MatrixBase<D2>& normal) {
  return direction - typename D1::Scalar(2) * direction.dot(normal) * normal;
}

/// Householder matrix of the reflection about the tangent plane with normal nu.
template <typename Derived>
MatrixX<typename Derived::Scalar> reflection_matrix(const Eigen::MatrixBase<Derived>& normal) {
  using Scalar = typename Derived::Scalar;
  const auto n = normal.size();
  return MatrixX<Scalar>::Identity(n, n) - Scalar(2) * normal * normal.transpose();
}

inline constexpr double kTangencyThreshold = 1e-9;

/// Billiard flow phi_t. A phase point sitting on a reflection carries the
/// post-reflection direction. Tangential hits throw DegenerateError.
FlowResult flow(const Scene& scene, const PhasePoint& start, double t);

/// Same flow on raw (x, xi) with xi of any nonzero length (straight segments
/// are x + s xi); used for phase-space differentials.
FlowResult flow_extended(const Scene& scene, const Vec& x, const Vec& xi, double t);

/// Phi = i o phi_{2 lambda}: (z + (2 lambda - t) eta, -eta). Throws DomainError
/// when no single reflection happens strictly before 2 lambda.
PhasePoint phi_map(const Scene& scene, const PhasePoint& sigma, double lambda);

/// Phi on stacked raw states (x, xi) in R^{2n}, xi not necessarily unit.
Vec phi_map_extended(const Scene& scene, const Vec& state, double lambda);

using PhaseMap = std::function<Vec(const Vec&)>;

inline constexpr double kDefaultFdStep = 1e-5;

/// Central-difference Jacobian of a smooth map R^k -> R^m.
Mat fd_jacobian(const PhaseMap& map, const Vec& point, double step = kDefaultFdStep);

/// Jacobian of (x, xi) -> flow_extended(x, xi, t) in R^{2n}. Throws
/// StencilError if any stencil trajectory changes itinerary or a reflection
/// falls within 10 step of either end of the time window.
Mat flow_jacobian(const Scene& scene, const Vec& state, double t, double step = kDefaultFdStep);

/// Jacobian of phi_map_extended with the same clearance checks.
Mat phi_map_jacobian(const Scene& scene, const Vec& state, double lambda,
                     double step = kDefaultFdStep);

}  // namespace billiard::dynamics
