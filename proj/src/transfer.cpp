#include "billiard/transfer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <random>

#include "billiard/curvature.hpp"
#include "billiard/orbits.hpp"
#include "billiard/parallel.hpp"

namespace billiard::transfer {

CylinderModel::CylinderModel(int k0, int depth, std::vector<double> tau, double theta)
    : k0_(k0), depth_(depth), theta_(theta), tau_(std::move(tau)) {
  if (k0 < 3) throw DomainError("cylinder model: k0 must be at least 3");
  if (depth < 1) throw DomainError("cylinder model: depth must be at least 1");
  if (!(theta > 0.0 && theta < 1.0)) throw DomainError("cylinder model: theta must lie in (0, 1)");
  words_ = symbolic::enumerate_words(k0, depth, false);
  if (tau_.size() != words_.size())
    throw DomainError("cylinder model: one return time per word is required");
  for (double t : tau_)
    if (!(t > 0.0) || !std::isfinite(t)) throw DomainError("cylinder model: return times must be positive");
  for (int i = 0; i < size(); ++i) index_[words_[static_cast<std::size_t>(i)].symbols] = i;
  preimages_.resize(words_.size());
  for (int i = 0; i < size(); ++i)
    for (const Word& u : symbolic::preimage_words(words_[static_cast<std::size_t>(i)], k0))
      preimages_[static_cast<std::size_t>(i)].push_back(index_of(u));
}

CylinderModel CylinderModel::constant(int k0, int depth, double c, double theta) {
  const auto count = symbolic::admissible_count(k0, depth, false);
  return CylinderModel(k0, depth, std::vector<double>(static_cast<std::size_t>(count), c), theta);
}

int CylinderModel::index_of(const Word& w) const {
  const auto it = index_.find(w.symbols);
  if (it == index_.end()) throw DomainError("cylinder model: unknown word " + w.str());
  return it->second;
}

double default_theta(const Scene& scene) {
  double theta = 0.0;
  for (int i = 0; i < scene.size(); ++i)
    for (int j = i + 1; j < scene.size(); ++j) {
      Word w;
      w.symbols = {i, j};
      w.cyclic = true;
      const auto orbit = orbits::find_periodic_orbit(scene, w);
      for (const auto& b : curvature::expansion_factors(scene, orbit, 1).bounces)
        theta = std::max(theta, b.factor.delta);
    }
  return theta;
}

CylinderModel build_cylinder_model(const Scene& scene, int depth, std::optional<double> theta) {
  if (depth < 1) throw DomainError("cylinder model: depth must be at least 1");
  const auto words = symbolic::enumerate_words(scene.size(), depth, false);
  std::vector<double> tau(words.size(), 0.0);
  parallel_for(static_cast<int>(words.size()), [&](int i) {
    const auto k = static_cast<std::size_t>(i);
    try {
      tau[k] = orbits::cylinder_shadow_time(scene, words[k]);
    } catch (const SolverError& e) {
      throw SolverError("cylinder " + words[k].str() + ": " + e.what());
    }
  });
  // Flight lengths lie between the smallest gap and the largest diameter.
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (int i = 0; i < scene.size(); ++i)
    for (int j = i + 1; j < scene.size(); ++j) {
      lo = std::min(lo, geometry::pairwise_gap(scene[i], scene[j]));
      hi = std::max(hi, geometry::max_pair_distance(scene[i], scene[j]));
    }
  for (std::size_t k = 0; k < tau.size(); ++k)
    if (tau[k] < lo - 1e-9 || tau[k] > hi + 1e-6)
      throw SolverError("cylinder " + words[k].str() + ": return time out of range");
  return CylinderModel(scene.size(), depth, std::move(tau), theta ? *theta : default_theta(scene));
}

CVec operator_weights(const CylinderModel& model, const Potential& g) {
  const int n = model.size();
  if (g.f.size() != n) throw DomainError("transfer: potential size mismatch");
  CVec w(n);
  for (int i = 0; i < n; ++i) {
    const double t = model.tau()[static_cast<std::size_t>(i)];
    w(i) = std::exp(Complex(g.f(i) - (g.shift + g.a) * t, -g.b * t));
  }
  return w;
}

namespace {

CVec apply_weighted(const CylinderModel& model, const CVec& weights, const CVec& h) {
  const int n = model.size();
  CVec out(n);
  auto row = [&](int i) {
    Complex s = 0.0;
    for (int u : model.preimages(i)) s += weights(u) * h(u);
    out(i) = s;
  };
  if (n >= 4096) {
    parallel_for(n, row);
  } else {
    for (int i = 0; i < n; ++i) row(i);
  }
  return out;
}

}  // namespace

CVec apply_operator(const CylinderModel& model, const Potential& g, const CVec& h) {
  if (h.size() != model.size()) throw DomainError("transfer: function size mismatch");
  return apply_weighted(model, operator_weights(model, g), h);
}

CMat operator_matrix(const CylinderModel& model, const Potential& g) {
  const CVec w = operator_weights(model, g);
  CMat m = CMat::Zero(model.size(), model.size());
  for (int i = 0; i < model.size(); ++i)
    for (int u : model.preimages(i)) m(i, u) += w(u);
  return m;
}

LeadingEigen leading_eigenvalue(const CylinderModel& model, const Vec& f, double shift, double a,
                                double tol, int max_iterations) {
  const int n = model.size();
  if (f.size() != n) throw DomainError("transfer: potential size mismatch");
  Vec w(n);
  for (int i = 0; i < n; ++i) w(i) = std::exp(f(i) - (shift + a) * model.tau()[static_cast<std::size_t>(i)]);
  LeadingEigen out;
  Vec x = Vec::Ones(n);
  Vec y(n);
  for (int it = 1; it <= max_iterations; ++it) {
    for (int i = 0; i < n; ++i) {
      double s = 0.0;
      for (int u : model.preimages(i)) s += w(u) * x(u);
      y(i) = s;
    }
    const Vec ratio = y.cwiseQuotient(x);
    out.lower = ratio.minCoeff();
    out.upper = ratio.maxCoeff();
    out.iterations = it;
    x = y / y.maxCoeff();
    if (out.upper - out.lower <= tol * out.upper) break;
  }
  out.value = 0.5 * (out.lower + out.upper);
  out.vector = x;
  return out;
}

double pressure_root(const CylinderModel& model, const Vec& f, double tol) {
  auto log_rho = [&](double p) { return std::log(leading_eigenvalue(model, f, p).value); };
  double tau_mean = 0.0;
  for (double t : model.tau()) tau_mean += t;
  tau_mean /= model.size();
  const double guess = log_rho(0.0) / tau_mean;
  double lo = guess - 1.0, hi = guess + 1.0;
  double width = 1.0;
  for (int k = 0; log_rho(lo) < 0.0; ++k, width *= 2.0) {
    if (k > 60) throw SolverError("pressure_root: cannot bracket from below");
    lo -= width;
  }
  width = 1.0;
  for (int k = 0; log_rho(hi) > 0.0; ++k, width *= 2.0) {
    if (k > 60) throw SolverError("pressure_root: cannot bracket from above");
    hi += width;
  }
  for (int k = 0; k < 200 && hi - lo > tol * std::max(1.0, std::abs(lo)); ++k) {
    const double mid = 0.5 * (lo + hi);
    const double v = log_rho(mid);
    if (v == 0.0) return mid;
    (v > 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

double entropy(const CylinderModel& model) { return pressure_root(model, Vec::Zero(model.size())); }

LipNorm lip_b_norm(const CylinderModel& model, const CVec& h, double b) {
  const int n = model.size();
  if (h.size() != n) throw DomainError("lip_b_norm: function size mismatch");
  LipNorm out;
  out.sup = h.cwiseAbs().maxCoeff();
  const auto& words = model.words();
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const double diff = std::abs(h(i) - h(j));
      if (diff == 0.0) continue;
      const auto& wi = words[static_cast<std::size_t>(i)].symbols;
      const auto& wj = words[static_cast<std::size_t>(j)].symbols;
      int s = 0;
      while (s < model.depth() && wi[static_cast<std::size_t>(s)] == wj[static_cast<std::size_t>(s)]) ++s;
      out.lip = std::max(out.lip, diff / std::pow(model.theta(), s));
    }
  if (b == 0.0) {
    out.flagged = true;
    out.norm = out.sup + out.lip;
  } else {
    out.norm = out.sup + out.lip / std::abs(b);
  }
  return out;
}

SpectralRadius spectral_radius(const CylinderModel& model, const Potential& g, int max_iterations,
                               double tol) {
  const int n = model.size();
  const CVec w = operator_weights(model, g);
  std::mt19937_64 rng(0x7a11ce5eedULL);
  std::uniform_real_distribution<double> uni(0.5, 1.5), phase(0.0, 2.0 * kPi);
  CVec x(n);
  for (int i = 0; i < n; ++i) x(i) = uni(rng) * std::exp(Complex(0.0, phase(rng)));
  x.normalize();
  SpectralRadius out;
  std::vector<double> log_growth;
  log_growth.reserve(static_cast<std::size_t>(max_iterations));
  for (int it = 1; it <= max_iterations; ++it) {
    const CVec y = apply_weighted(model, w, x);
    const double norm = y.norm();
    out.iterations = it;
    if (norm == 0.0) {
      out.rho = 0.0;
      out.converged = true;
      return out;
    }
    const Complex rq = x.dot(y);
    log_growth.push_back(std::log(norm));
    if ((y - rq * x).norm() <= tol * std::max(norm, 1e-300)) {
      out.rho = std::abs(rq);
      out.converged = true;
      return out;
    }
    x = y / norm;
  }
  // No simple dominant eigenvalue resolved: average growth over the second half.
  const std::size_t half = log_growth.size() / 2;
  double s = 0.0;
  for (std::size_t k = half; k < log_growth.size(); ++k) s += log_growth[k];
  out.rho = std::exp(s / static_cast<double>(log_growth.size() - half));
  return out;
}

std::vector<ContractionPoint> contraction_curve(const CylinderModel& model, const Vec& f,
                                                double shift, double a,
                                                const std::vector<double>& b_list, int m,
                                                int trials, std::uint64_t seed) {
  if (m < 1) throw DomainError("contraction_curve: m must be positive");
  const int n = model.size();
  std::vector<CVec> seeds;
  seeds.push_back(CVec::Ones(n));
  for (int s = 0; s < model.k0() && static_cast<int>(seeds.size()) < trials; ++s) {
    CVec h = CVec::Zero(n);
    for (int i = 0; i < n; ++i)
      if (model.words()[static_cast<std::size_t>(i)][0] == s) h(i) = 1.0;
    seeds.push_back(h);
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  while (static_cast<int>(seeds.size()) < trials) {
    CVec h(n);
    for (int i = 0; i < n; ++i) h(i) = Complex(g(rng), g(rng));
    seeds.push_back(h);
  }
  std::vector<ContractionPoint> out(b_list.size());
  parallel_for(static_cast<int>(b_list.size()), [&](int k) {
    const double b = b_list[static_cast<std::size_t>(k)];
    const Potential pot{f, shift, a, b};
    const CVec w = operator_weights(model, pot);
    ContractionPoint pt;
    pt.b = b;
    for (const CVec& h : seeds) {
      const double n0 = lip_b_norm(model, h, b).norm;
      if (n0 == 0.0) continue;
      CVec hm = h;
      for (int r = 0; r < m; ++r) hm = apply_weighted(model, w, hm);
      pt.rho_seed_max = std::max(pt.rho_seed_max, std::pow(lip_b_norm(model, hm, b).norm / n0, 1.0 / m));
    }
    pt.rho_spectral = spectral_radius(model, pot).rho;
    out[static_cast<std::size_t>(k)] = pt;
  });
  return out;
}

nlohmann::json spectral_json(const SpectralReport& r) {
  nlohmann::json curve = nlohmann::json::array();
  for (const auto& p : r.contraction)
    curve.push_back({{"b", p.b}, {"rho_seed_max", p.rho_seed_max}, {"rho_spectral", p.rho_spectral}});
  return {{"pressure", r.pressure},
          {"entropy", r.entropy},
          {"leading_eigenvalue", r.leading_eigenvalue},
          {"theta", r.theta},
          {"contraction", curve},
          {"depths_used", r.depths_used},
          {"entropy_by_depth", r.entropy_by_depth}};
}

std::string contraction_csv(const std::vector<ContractionPoint>& curve) {
  std::string out = "b,rho_seed_max,rho_spectral\n";
  char buf[128];
  for (const auto& p : curve) {
    std::snprintf(buf, sizeof buf, "%.15g,%.15g,%.15g\n", p.b, p.rho_seed_max, p.rho_spectral);
    out += buf;
  }
  return out;
}

}  // namespace billiard::transfer
