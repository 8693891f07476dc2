#include "billiard/certify.hpp"

#include <cmath>
#include <limits>
#include <random>

#include "billiard/curvature.hpp"
#include "billiard/dynamics.hpp"
#include "billiard/orbits.hpp"

namespace billiard::certify {

ConditionCheck check_pinching_condition(const SceneConstants& c) {
  ConditionCheck out;
  const double span = c.d0 + c.a;
  out.log_lhs = span * std::log1p(span * c.lambda0);
  out.log_rhs = 2.0 * c.d0 * std::log1p(c.d0 * c.mu0);
  out.lhs = std::exp(out.log_lhs);
  out.rhs = std::exp(out.log_rhs);
  out.holds = out.log_lhs < out.log_rhs;
  return out;
}

PinchingReport pinching_exponents(const SceneConstants& c) {
  PinchingReport r;
  r.alpha0 = std::log1p(c.d0 * c.mu0) / (c.d0 + c.a);
  r.beta0 = std::log1p((c.d0 + c.a) * c.lambda0) / c.d0;
  r.margin = 2.0 * r.alpha0 - r.beta0;
  const ConditionCheck chk = check_pinching_condition(c);
  r.pinching_inequality = chk.holds;
  r.lhs = chk.lhs;
  r.rhs = chk.rhs;
  r.log_lhs = chk.log_lhs;
  r.log_rhs = chk.log_rhs;
  return r;
}

std::pair<int, int> closest_pair(const Scene& scene) {
  std::pair<int, int> best{0, 1};
  double gap = std::numeric_limits<double>::infinity();
  for (int i = 0; i < scene.size(); ++i)
    for (int j = i + 1; j < scene.size(); ++j) {
      const double g = geometry::pairwise_gap(scene[i], scene[j]);
      if (g < gap - 1e-12) {
        gap = g;
        best = {i, j};
      }
    }
  return best;
}

namespace {

struct SamplePoint {
  Vec x0, xi0;  // phase point at distance lambda before impact on K_i
  Mat frame;    // orthonormal basis of the common hyperplane
  Mat H, L;
};

SamplePoint sample_point(const Scene& scene, int i, int j, double lambda) {
  if (i == j || i < 0 || j < 0 || i >= scene.size() || j >= scene.size())
    throw DomainError("symplectic: invalid obstacle pair");
  symbolic::Word w;
  w.symbols = {i, j};
  w.cyclic = true;
  const orbits::PeriodicOrbit orbit = orbits::find_periodic_orbit(scene, w);
  const double gap = orbit.flight_lengths[0];
  if (!(lambda > 0.0 && lambda < 0.5 * gap))
    throw DomainError("symplectic: lambda must lie in (0, gap/2)");
  SamplePoint sp;
  const Vec& z0 = orbit.points[0];
  const Vec nu = scene[i].normal(z0);
  sp.x0 = z0 + lambda * nu;
  sp.xi0 = -nu;
  sp.frame = complement_basis(sp.xi0);
  sp.H = geometry::shape_operator(scene[i], z0, sp.frame);
  // The front reaching x0 left K_j and has travelled gap - lambda.
  const curvature::CurvatureState st =
      curvature::unstable_curvature(scene, orbit, 1, orbit.flight_lengths[1] - lambda);
  const Mat r = sp.frame.transpose() * st.frame;
  sp.L = r * st.matrix * r.transpose();
  sp.L = 0.5 * (sp.L + sp.L.transpose());
  return sp;
}

Vec unit_sample(std::mt19937_64& rng, int k) {
  std::normal_distribution<double> g(0.0, 1.0);
  Vec v(k);
  do {
    for (int c = 0; c < k; ++c) v(c) = g(rng);
  } while (v.norm() < 1e-8);
  return v.normalized();
}

Vec stack(const Vec& a, const Vec& b) {
  Vec s(a.size() + b.size());
  s << a, b;
  return s;
}

}  // namespace

SymplecticReport verify_nonintegrability(const Scene& scene, int i, int j, double lambda,
                                         int samples, std::uint64_t seed) {
  if (samples < 1) throw DomainError("symplectic: samples must be positive");
  const SamplePoint sp = sample_point(scene, i, j, lambda);
  const int n = scene.dimension();
  const int k = n - 1;
  SymplecticReport r;
  r.pair_i = i;
  r.pair_j = j;
  r.lambda_used = lambda;
  r.samples = samples;
  r.H = sp.H;
  r.L = sp.L;
  r.P = nonintegrability_operator(sp.H, sp.L, lambda);
  r.min_eig_P = Eigen::SelfAdjointEigenSolver<Mat>(r.P, Eigen::EigenvaluesOnly).eigenvalues()(0);
  r.positive_definite = r.min_eig_P > 0.0;
  r.dphi_analytic = dphi_analytic(sp.H, lambda);

  Vec state(2 * n);
  state << sp.x0, sp.xi0;
  const Mat full = dynamics::phi_map_jacobian(scene, state, lambda);
  Mat embed = Mat::Zero(2 * n, 2 * k);
  embed.topLeftCorner(n, k) = sp.frame;
  embed.bottomRightCorner(n, k) = sp.frame;
  r.dphi_fd = embed.transpose() * full * embed;
  r.dphi_norm = r.dphi_analytic.operatorNorm();
  r.max_block_error = (r.dphi_analytic - r.dphi_fd).cwiseAbs().maxCoeff() / r.dphi_norm;

  const double p_norm = r.P.operatorNorm();
  const double c = std::max(r.dphi_norm, sp.L.operatorNorm());
  r.mu_bound = r.min_eig_P / (c * (1.0 + c * c));
  r.mu_measured = std::numeric_limits<double>::infinity();

  std::mt19937_64 rng(seed);
  for (int s = 0; s < samples; ++s) {
    const Vec u = unit_sample(rng, k);
    const Vec u2 = unit_sample(rng, k);
    const Vec v = stack(u, sp.L * u);
    const Vec v2 = stack(u2, sp.L * u2);
    const double via_p = u.dot(r.P * u2);
    const double via_analytic = symplectic_form(v, r.dphi_analytic * v2);
    const double via_fd = symplectic_form(v, r.dphi_fd * v2);
    r.max_abs_error = std::max({r.max_abs_error, std::abs(via_p - via_fd),
                                std::abs(via_analytic - via_fd), std::abs(via_p - via_analytic)});
    r.antisymmetry_error =
        std::max({r.antisymmetry_error, std::abs(symplectic_form(v, v)),
                  std::abs(symplectic_form(v, v2) + symplectic_form(v2, v))});
    const Vec w = r.dphi_analytic * v;
    r.mu_measured = std::min(r.mu_measured,
                             std::abs(symplectic_form(w, v)) / (w.norm() * v.norm()));
  }
  r.max_rel_error = r.max_abs_error / p_norm;
  r.agreement = r.max_abs_error <= 1e-5 && r.max_block_error <= 1e-5;
  return r;
}

std::vector<double> min_eig_scan(const Scene& scene, int i, int j,
                                 const std::vector<double>& lambdas) {
  std::vector<double> out;
  for (double lam : lambdas) {
    const SamplePoint sp = sample_point(scene, i, j, lam);
    const Mat p = nonintegrability_operator(sp.H, sp.L, lam);
    out.push_back(Eigen::SelfAdjointEigenSolver<Mat>(p, Eigen::EigenvaluesOnly).eigenvalues()(0));
  }
  return out;
}

namespace {

nlohmann::json matrix_json(const Mat& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index a = 0; a < m.rows(); ++a) {
    std::vector<double> row;
    for (Eigen::Index b = 0; b < m.cols(); ++b) row.push_back(m(a, b));
    rows.push_back(row);
  }
  return rows;
}

}  // namespace

nlohmann::json pinching_json(const SceneConstants& c, const PinchingReport& r) {
  return {{"constants",
           {{"d0", c.d0},
            {"a", c.a},
            {"kappa_min", c.kappa_min},
            {"kappa_max", c.kappa_max},
            {"kappa_sampled", c.kappa_sampled},
            {"phi0", c.phi0},
            {"mu0", c.mu0},
            {"lambda0", c.lambda0}}},
          {"alpha0", r.alpha0},
          {"beta0", r.beta0},
          {"margin", r.margin},
          {"pinching_inequality", r.pinching_inequality},
          {"lhs", r.lhs},
          {"rhs", r.rhs},
          {"log_lhs", r.log_lhs},
          {"log_rhs", r.log_rhs}};
}

nlohmann::json symplectic_json(const SymplecticReport& r) {
  return {{"pair", {r.pair_i + 1, r.pair_j + 1}},
          {"lambda_used", r.lambda_used},
          {"H", matrix_json(r.H)},
          {"L", matrix_json(r.L)},
          {"P", matrix_json(r.P)},
          {"dphi_analytic", matrix_json(r.dphi_analytic)},
          {"dphi_fd", matrix_json(r.dphi_fd)},
          {"min_eig_P", r.min_eig_P},
          {"max_abs_error", r.max_abs_error},
          {"max_rel_error", r.max_rel_error},
          {"max_block_error", r.max_block_error},
          {"antisymmetry_error", r.antisymmetry_error},
          {"dphi_norm", r.dphi_norm},
          {"mu_bound", r.mu_bound},
          {"mu_measured", r.mu_measured},
          {"samples", r.samples},
          {"agreement", r.agreement},
          {"positive_definite", r.positive_definite},
          {"verified", r.verified()}};
}

}  // namespace billiard::certify
