#pragma once

#include <optional>
#include <vector>

#include <json.hpp>

#include "billiard/dynamics.hpp"
#include "billiard/orbits.hpp"

namespace billiard::curvature {

using geometry::BoundaryHit;
using geometry::Obstacle;
using geometry::Scene;
using orbits::PeriodicOrbit;

/// A wave front through `position` moving along `direction`: `matrix` is its
/// curvature operator in the orthonormal basis `frame` (n x (n-1)) of the
/// hyperplane orthogonal to `direction`.
struct CurvatureState {
  Mat matrix;
  Mat frame;
  Vec position;
  Vec direction;

  static CurvatureState flat(const Vec& position, const Vec& direction);
  static CurvatureState isotropic(const Vec& position, const Vec& direction, double k);
};

/// Fractional-linear free-flight map B -> B (I + d B)^{-1}.
template <typename Derived>
MatrixX<typename Derived::Scalar> propagate_curvature(const Eigen::MatrixBase<Derived>& b,
                                                       typename Derived::Scalar d) {
  using Scalar = typename Derived::Scalar;
  const auto k = b.rows();
  const MatrixX<Scalar> m = MatrixX<Scalar>::Identity(k, k) + d * b;
  Eigen::FullPivLU<MatrixX<Scalar>> lu(m);
  if (!lu.isInvertible()) throw DegenerateError("free flight: I + d B is singular");
  MatrixX<Scalar> out = b * lu.inverse();
  return Scalar(0.5) * (out + out.transpose());
}

/// Throws DegenerateError if I + d B is singular.
CurvatureState free_flight_update(const CurvatureState& state, double d);

/// Reflection update at a boundary hit. The state's direction must be the
/// incoming direction and its position the hit point.
CurvatureState collision_update(const CurvatureState& state, const BoundaryHit& hit,
                                const Obstacle& obstacle);

/// Unstable front curvature along a periodic orbit: fixed point of the
/// period map, evaluated just after reflection `at_index` and then carried
/// `flight_offset` along the following flight. Seed defaults to kappa_min I.
CurvatureState unstable_curvature(const Scene& scene, const PeriodicOrbit& orbit, int at_index,
                                  double flight_offset = 0.0,
                                  std::optional<double> seed = std::nullopt);

struct FlightFactor {
  double k = 0.0;      // <u, B u>
  double ell = 0.0;    // (1 + d ell)^2 = 1 + 2 d k + d^2 |B u|^2
  double delta = 1.0;  // 1 / (1 + d ell)
};

/// Contraction of a front's tangent vector u (unit) over a flight of length d.
FlightFactor flight_factor(const Mat& b, double d, const Vec& u);

struct BounceRecord {
  int obstacle = -1;
  double d = 0.0;    // flight following the reflection
  double phi = 0.0;  // reflection angle
  Vec eigenvalues;   // post-collision curvature eigenvalues, ascending
  double lower_bound = 0.0;  // 2 cos(phi) kappa_min
  double upper_bound = 0.0;  // 1/d0 + 2 kappa_max / cos(phi)
  FlightFactor factor;
};

struct ExpansionReport {
  std::vector<BounceRecord> bounces;
  double product = 1.0;
  bool complex_unstable = false;  // leading period-map eigenvalue not real
};

/// Per-bounce curvatures and contraction factors along `periods` traversals,
/// starting at reflection 0 with u the leading eigendirection of the
/// linearized period map of front positions.
ExpansionReport expansion_factors(const Scene& scene, const PeriodicOrbit& orbit, int periods = 1);

/// Finite-difference return-map Jacobian in R^{2n}, built as the product of
/// mid-flight to mid-flight segment Jacobians.
Mat fd_return_jacobian(const Scene& scene, const PeriodicOrbit& orbit, double step = 1e-6);

/// Largest eigenvalue modulus of fd_return_jacobian.
double fd_unstable_multiplier(const Scene& scene, const PeriodicOrbit& orbit, double step = 1e-6);

/// JSON report: word, per-bounce {obstacle, d, phi, eigenvalues, k, ell,
/// delta, bounds}, product, fd multiplier and product * multiplier.
nlohmann::json expansion_report_json(const Scene& scene, const PeriodicOrbit& orbit, int periods,
                                     bool with_fd = true);

}  // namespace billiard::curvature
