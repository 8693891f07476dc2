#include "billiard/curvature.hpp"

#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>

namespace billiard::curvature {

using dynamics::kTangencyThreshold;

CurvatureState CurvatureState::flat(const Vec& position, const Vec& direction) {
  return isotropic(position, direction, 0.0);
}

CurvatureState CurvatureState::isotropic(const Vec& position, const Vec& direction, double k) {
  const Vec u = direction.normalized();
  const auto m = u.size() - 1;
  return CurvatureState{k * Mat::Identity(m, m), complement_basis(u), position, u};
}

CurvatureState free_flight_update(const CurvatureState& state, double d) {
  if (!(d >= 0.0)) throw DomainError("free flight: length must be nonnegative");
  CurvatureState out = state;
  out.matrix = propagate_curvature(state.matrix, d);
  out.position = state.position + d * state.direction;
  return out;
}

CurvatureState collision_update(const CurvatureState& state, const BoundaryHit& hit,
                                const Obstacle& obstacle) {
  const Vec nu = obstacle.normal(hit.point);
  const double cos_phi = -state.direction.dot(nu);
  if (cos_phi < kTangencyThreshold)
    throw DegenerateError("collision: incidence at or beyond tangency");
  const Mat s = dynamics::reflection_matrix(nu);
  CurvatureState out;
  out.position = hit.point;
  out.direction = s * state.direction;
  out.frame = s * state.frame;
  const auto m = out.frame.cols();
  if ((out.frame.transpose() * out.frame - Mat::Identity(m, m)).cwiseAbs().maxCoeff() > 1e-12) {
    Eigen::HouseholderQR<Mat> qr(out.frame);
    out.frame = qr.householderQ() * Mat::Identity(out.frame.rows(), m);
  }
  // V: projection of the outgoing hyperplane onto the tangent space along
  // the outgoing direction.
  const double xn = out.direction.dot(nu);
  Mat ve = out.frame;
  for (Eigen::Index c = 0; c < m; ++c)
    ve.col(c) -= (ve.col(c).dot(nu) / xn) * out.direction;
  const Mat form = geometry::shape_form(obstacle, hit.point);
  // S B S expressed in the reflected frame has the same matrix.
  Mat b = state.matrix + 2.0 * cos_phi * (ve.transpose() * form * ve);
  out.matrix = 0.5 * (b + b.transpose());
  return out;
}

namespace {

BoundaryHit orbit_hit(const Scene& scene, const PeriodicOrbit& orbit, int j) {
  BoundaryHit h;
  h.obstacle = orbit.word[j];
  h.point = orbit.points[static_cast<std::size_t>(j)];
  h.normal = scene[h.obstacle].normal(h.point);
  h.time = 0.0;
  h.cos_phi = std::cos(orbit.angles[static_cast<std::size_t>(j)]);
  return h;
}

// Carries a state sitting just after reflection j to just after reflection j+1.
CurvatureState advance_bounce(const Scene& scene, const PeriodicOrbit& orbit,
                              const CurvatureState& st, int j) {
  const int m = orbit.period();
  const int next = (j + 1) % m;
  CurvatureState s = free_flight_update(st, orbit.flight_lengths[static_cast<std::size_t>(j)]);
  s.position = orbit.points[static_cast<std::size_t>(next)];
  return collision_update(s, orbit_hit(scene, orbit, next), scene[orbit.word[next]]);
}

double min_gap(const Scene& scene) {
  double d0 = std::numeric_limits<double>::infinity();
  for (int i = 0; i < scene.size(); ++i)
    for (int j = i + 1; j < scene.size(); ++j)
      d0 = std::min(d0, geometry::pairwise_gap(scene[i], scene[j]));
  return d0;
}

}  // namespace

CurvatureState unstable_curvature(const Scene& scene, const PeriodicOrbit& orbit, int at_index,
                                  double flight_offset, std::optional<double> seed) {
  const int m = orbit.period();
  if (at_index < 0 || at_index >= m) throw DomainError("unstable_curvature: index out of range");
  const double dj = orbit.flight_lengths[static_cast<std::size_t>(at_index)];
  if (!(flight_offset >= 0.0 && flight_offset < dj))
    throw DomainError("unstable_curvature: offset must lie in [0, flight length)");
  const double k0 = seed ? *seed : geometry::curvature_bounds(scene).kappa_min;
  const CurvatureState start = CurvatureState::isotropic(
      orbit.points[static_cast<std::size_t>(at_index)],
      orbit.directions[static_cast<std::size_t>(at_index)], k0);
  CurvatureState st = start;
  bool converged = false;
  for (int period = 0; period < 200; ++period) {
    CurvatureState s = st;
    for (int k = 0; k < m; ++k) s = advance_bounce(scene, orbit, s, (at_index + k) % m);
    // Re-express in the starting frame; in 3D the frame returns rotated.
    const Mat r = start.frame.transpose() * s.frame;
    Mat b = r * s.matrix * r.transpose();
    b = 0.5 * (b + b.transpose());
    const double change = (b - st.matrix).cwiseAbs().maxCoeff();
    st.matrix = b;
    if (change < 1e-12) {
      converged = true;
      break;
    }
  }
  if (!converged) throw SolverError("unstable_curvature: no convergence within 200 periods");
  if (flight_offset > 0.0) st = free_flight_update(st, flight_offset);
  return st;
}

FlightFactor flight_factor(const Mat& b, double d, const Vec& u) {
  if (!(d > 0.0)) throw DomainError("flight_factor: flight length must be positive");
  const Vec bu = b * u;
  FlightFactor f;
  f.k = u.dot(bu);
  const double stretch = std::sqrt(1.0 + 2.0 * d * f.k + d * d * bu.squaredNorm());
  f.ell = (stretch - 1.0) / d;
  f.delta = 1.0 / (1.0 + d * f.ell);
  return f;
}

ExpansionReport expansion_factors(const Scene& scene, const PeriodicOrbit& orbit, int periods) {
  if (periods < 1) throw DomainError("expansion_factors: periods must be positive");
  const int m = orbit.period();
  const auto kb = geometry::curvature_bounds(scene);
  const double d0 = min_gap(scene);
  const CurvatureState start = unstable_curvature(scene, orbit, 0, 0.0);

  // Linearized period map of front positions in the starting frame.
  CurvatureState s = start;
  const auto dim = start.matrix.rows();
  Mat map = Mat::Identity(dim, dim);
  for (int j = 0; j < m; ++j) {
    map = (Mat::Identity(dim, dim) + orbit.flight_lengths[static_cast<std::size_t>(j)] * s.matrix) * map;
    s = advance_bounce(scene, orbit, s, j);
  }
  map = (start.frame.transpose() * s.frame) * map;

  ExpansionReport rep;
  Vec u;
  Eigen::EigenSolver<Mat> es(map);
  Eigen::Index lead = 0;
  es.eigenvalues().cwiseAbs().maxCoeff(&lead);
  const Complex lam = es.eigenvalues()(lead);
  if (std::abs(lam.imag()) <= 1e-10 * std::abs(lam)) {
    u = es.eigenvectors().col(lead).real().normalized();
  } else {
    rep.complex_unstable = true;
    Eigen::JacobiSVD<Mat> svd(map, Eigen::ComputeThinV);
    u = svd.matrixV().col(0);
  }

  s = start;
  for (int p = 0; p < periods; ++p) {
    for (int j = 0; j < m; ++j) {
      BounceRecord r;
      r.obstacle = orbit.word[j];
      r.d = orbit.flight_lengths[static_cast<std::size_t>(j)];
      r.phi = orbit.angles[static_cast<std::size_t>(j)];
      Eigen::SelfAdjointEigenSolver<Mat> ev(s.matrix, Eigen::EigenvaluesOnly);
      r.eigenvalues = ev.eigenvalues();
      r.lower_bound = 2.0 * std::cos(r.phi) * kb.kappa_min;
      r.upper_bound = 1.0 / d0 + 2.0 * kb.kappa_max / std::cos(r.phi);
      r.factor = flight_factor(s.matrix, r.d, u);
      rep.product *= r.factor.delta;
      rep.bounces.push_back(r);
      u = ((Mat::Identity(dim, dim) + r.d * s.matrix) * u).normalized();
      s = advance_bounce(scene, orbit, s, j);
    }
  }
  return rep;
}

Mat fd_return_jacobian(const Scene& scene, const PeriodicOrbit& orbit, double step) {
  const int m = orbit.period();
  const int n = scene.dimension();
  Mat total = Mat::Identity(2 * n, 2 * n);
  for (int k = 0; k < m; ++k) {
    const auto kk = static_cast<std::size_t>(k);
    const auto next = static_cast<std::size_t>((k + 1) % m);
    Vec state(2 * n);
    state << 0.5 * (orbit.points[kk] + orbit.points[next]), orbit.directions[kk];
    const double t = 0.5 * (orbit.flight_lengths[kk] + orbit.flight_lengths[next]);
    total = dynamics::flow_jacobian(scene, state, t, step) * total;
  }
  return total;
}

double fd_unstable_multiplier(const Scene& scene, const PeriodicOrbit& orbit, double step) {
  Eigen::EigenSolver<Mat> es(fd_return_jacobian(scene, orbit, step), false);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

nlohmann::json expansion_report_json(const Scene& scene, const PeriodicOrbit& orbit, int periods,
                                     bool with_fd) {
  const ExpansionReport rep = expansion_factors(scene, orbit, periods);
  nlohmann::json j;
  j["word"] = orbit.word.str();
  j["periods"] = periods;
  j["length"] = orbit.length;
  j["bounces"] = nlohmann::json::array();
  for (const auto& b : rep.bounces) {
    j["bounces"].push_back({{"obstacle", b.obstacle + 1},
                            {"d", b.d},
                            {"phi", b.phi},
                            {"eigenvalues", std::vector<double>(b.eigenvalues.data(),
                                                                b.eigenvalues.data() + b.eigenvalues.size())},
                            {"lower_bound", b.lower_bound},
                            {"upper_bound", b.upper_bound},
                            {"k", b.factor.k},
                            {"ell", b.factor.ell},
                            {"delta", b.factor.delta}});
  }
  j["product"] = rep.product;
  j["complex_unstable"] = rep.complex_unstable;
  if (with_fd) {
    const double mult = fd_unstable_multiplier(scene, orbit);
    j["fd_multiplier"] = mult;
    j["fd_ratio"] = std::pow(rep.product, 1.0 / periods) * mult;
  }
  return j;
}

}  // namespace billiard::curvature
