#include "billiard/orbits.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "billiard/dynamics.hpp"
#include "billiard/parallel.hpp"

namespace billiard::orbits {

namespace {

double angle_between(const Vec& u, const Vec& nu) {
  const double c = u.dot(nu);
  return std::atan2((u - c * nu).norm(), c);
}

struct Chain {
  std::vector<Vec> w;  // unit-sphere coordinates
  std::vector<Vec> p;  // boundary points
};

Chain make_chain(const Scene& scene, const Word& word, std::vector<Vec> w) {
  Chain ch;
  ch.w = std::move(w);
  ch.p.reserve(ch.w.size());
  for (int j = 0; j < word.size(); ++j) ch.p.push_back(scene[word[j]].boundary_point(ch.w[j]));
  return ch;
}

struct Model {
  double length = 0.0;
  Vec grad;  // in tangent-chart coordinates
  Mat hess;
  std::vector<Mat> charts;  // T_j
};

Model evaluate(const Scene& scene, const Word& word, const Chain& ch) {
  const int m = word.size();
  const int n = scene.dimension();
  const int k = n - 1;
  Model md;
  md.grad = Vec::Zero(m * k);
  md.hess = Mat::Zero(m * k, m * k);
  std::vector<Mat> jac(static_cast<std::size_t>(m));
  std::vector<Vec> g(static_cast<std::size_t>(m), Vec::Zero(n));
  for (int j = 0; j < m; ++j) {
    md.charts.push_back(complement_basis(ch.w[j]));
    jac[j] = scene[word[j]].affine() * md.charts[j];
  }
  const Mat eye = Mat::Identity(n, n);
  for (int a = 0; a < m; ++a) {
    const int b = (a + 1) % m;
    const Vec diff = ch.p[b] - ch.p[a];
    const double d = diff.norm();
    const Vec e = diff / d;
    md.length += d;
    g[a] -= e;
    g[b] += e;
    const Mat q = (eye - e * e.transpose()) / d;
    md.hess.block(a * k, a * k, k, k) += jac[a].transpose() * q * jac[a];
    md.hess.block(b * k, b * k, k, k) += jac[b].transpose() * q * jac[b];
    md.hess.block(a * k, b * k, k, k) -= jac[a].transpose() * q * jac[b];
    md.hess.block(b * k, a * k, k, k) -= jac[b].transpose() * q * jac[a];
  }
  for (int j = 0; j < m; ++j) {
    md.grad.segment(j * k, k) = jac[j].transpose() * g[j];
    // Curvature of the chart: d^2 p[alpha, alpha] = -M w |alpha|^2.
    const double c = g[j].dot(scene[word[j]].affine() * ch.w[j]);
    md.hess.block(j * k, j * k, k, k) -= c * Mat::Identity(k, k);
  }
  return md;
}

Chain step_chain(const Scene& scene, const Word& word, const Chain& ch, const Model& md,
                 const Vec& delta, double t) {
  const int k = scene.dimension() - 1;
  std::vector<Vec> w;
  w.reserve(ch.w.size());
  for (int j = 0; j < word.size(); ++j)
    w.push_back((ch.w[j] + md.charts[j] * (t * delta.segment(j * k, k))).normalized());
  return make_chain(scene, word, std::move(w));
}

std::vector<Vec> initial_coordinates(const Scene& scene, const Word& word) {
  const int m = word.size();
  std::vector<Vec> w;
  for (int j = 0; j < m; ++j) {
    const auto& kj = scene[word[j]];
    const Vec& prev = scene[word[(j + m - 1) % m]].center();
    const Vec& next = scene[word[(j + 1) % m]].center();
    Vec target = 0.5 * (prev + next) - kj.center();
    if (target.norm() < 1e-9) target = next - kj.center();
    const Vec v = kj.affine().colPivHouseholderQr().solve(target);
    w.push_back(v.normalized());
  }
  return w;
}

void check_word(const Scene& scene, const Word& word) {
  if (word.size() < 2) throw DomainError("orbit: period must be at least 2");
  for (int s : word.symbols)
    if (s < 0 || s >= scene.size())
      throw DomainError("orbit: symbol " + std::to_string(s + 1) + " out of range");
  Word cyc = word;
  cyc.cyclic = true;
  if (!symbolic::is_admissible(cyc))
    throw DomainError("orbit: word " + word.str() + " is not cyclically admissible");
}

}  // namespace

double PeriodicOrbit::min_angle() const { return *std::min_element(angles.begin(), angles.end()); }
double PeriodicOrbit::max_angle() const { return *std::max_element(angles.begin(), angles.end()); }

double polygon_length(const std::vector<Vec>& points) {
  double total = 0.0;
  const std::size_t m = points.size();
  for (std::size_t j = 0; j < m; ++j) total += (points[(j + 1) % m] - points[j]).norm();
  return total;
}

double reflection_residual(const PeriodicOrbit& orbit) {
  const int m = orbit.period();
  double worst = 0.0;
  for (int j = 0; j < m; ++j) {
    const Vec& in = orbit.directions[static_cast<std::size_t>((j + m - 1) % m)];
    const Vec out = dynamics::reflect(in, orbit.normals[j]);
    worst = std::max(worst, (out - orbit.directions[j]).norm());
  }
  return worst;
}

PeriodicOrbit find_periodic_orbit(const Scene& scene, const Word& word, const OrbitOptions& opt) {
  check_word(scene, word);
  const int m = word.size();
  Chain ch = make_chain(scene, word, initial_coordinates(scene, word));
  Model md = evaluate(scene, word, ch);
  int it = 0;
  for (; it < opt.max_iterations; ++it) {
    const double gnorm = md.grad.lpNorm<Eigen::Infinity>();
    if (gnorm < opt.tol) break;
    const int dim = static_cast<int>(md.grad.size());
    Vec delta;
    double mu = 0.0;
    for (int attempt = 0; attempt < 60; ++attempt) {
      Eigen::LLT<Mat> llt(md.hess + mu * Mat::Identity(dim, dim));
      if (llt.info() == Eigen::Success) {
        delta = llt.solve(-md.grad);
        break;
      }
      mu = mu == 0.0 ? 1e-8 * std::max(1.0, md.hess.diagonal().cwiseAbs().maxCoeff()) : 4.0 * mu;
    }
    if (delta.size() == 0) delta = -md.grad;
    double slope = md.grad.dot(delta);
    if (!(slope < 0.0)) {
      delta = -md.grad;
      slope = -md.grad.squaredNorm();
    }
    // Armijo backtracking; the slack absorbs rounding once the decrease
    // drops below machine resolution of the length.
    const double slack = 1e-14 * std::max(1.0, md.length);
    double t = 1.0;
    bool accepted = false;
    for (int ls = 0; ls < 40; ++ls, t *= 0.5) {
      Chain trial = step_chain(scene, word, ch, md, delta, t);
      const double len = polygon_length(trial.p);
      if (len <= md.length + 1e-4 * t * slope + slack) {
        ch = std::move(trial);
        accepted = true;
        break;
      }
    }
    if (!accepted)
      throw SolverError("orbit " + word.str() + ": line search failed at iteration " +
                        std::to_string(it) + ", gradient " + std::to_string(gnorm));
    md = evaluate(scene, word, ch);
  }
  const double gnorm = md.grad.lpNorm<Eigen::Infinity>();
  if (gnorm >= opt.tol) {
    std::ostringstream os;
    os << "orbit " << word.str() << ": no convergence after " << it << " iterations, gradient "
       << gnorm << ", length " << md.length;
    throw SolverError(os.str());
  }

  PeriodicOrbit orbit;
  orbit.word = word;
  orbit.word.cyclic = true;
  orbit.primitive = symbolic::is_primitive(word);
  orbit.iterations = it;
  orbit.gradient_norm = gnorm;
  orbit.points = ch.p;
  for (int j = 0; j < m; ++j) {
    const Vec diff = ch.p[static_cast<std::size_t>((j + 1) % m)] - ch.p[j];
    const double d = diff.norm();
    orbit.flight_lengths.push_back(d);
    orbit.directions.push_back(diff / d);
    orbit.normals.push_back(scene[word[j]].normal(ch.p[j]));
    orbit.length += d;
  }
  for (int j = 0; j < m; ++j)
    orbit.angles.push_back(angle_between(orbit.directions[j], orbit.normals[j]));
  orbit.max_reflection_residual = reflection_residual(orbit);
  if (orbit.max_reflection_residual > 1e-9)
    throw SolverError("orbit " + word.str() + ": reflection residual " +
                      std::to_string(orbit.max_reflection_residual));
  for (int j = 0; j < m; ++j) {
    const auto hit = geometry::ray_cast(scene, orbit.points[j], orbit.directions[j]);
    const int expect = word[(j + 1) % m];
    if (!hit || hit->obstacle != expect || std::abs(hit->time - orbit.flight_lengths[j]) > 1e-8)
      throw SolverError("orbit " + word.str() + ": flight " + std::to_string(j + 1) +
                        " leaves the itinerary");
  }
  return orbit;
}

Word closure_word(const Word& word, int k0) {
  if (word.size() == 0) throw DomainError("closure: empty word");
  Word lin = word;
  lin.cyclic = false;
  if (!symbolic::is_admissible(lin)) throw DomainError("closure: word " + word.str() + " is not admissible");
  Word cyc = lin;
  cyc.cyclic = true;
  if (word.size() >= 2 && symbolic::is_admissible(cyc)) return cyc;
  const int first = word[0], last = word[word.size() - 1];
  int fallback = -1;
  for (int s = 0; s < k0; ++s) {
    if (s == first || s == last) continue;
    Word c = cyc;
    c.symbols.push_back(s);
    if (fallback < 0) fallback = s;
    if (symbolic::is_primitive(c)) return c;
  }
  if (fallback < 0) throw DomainError("closure: no admissible symbol to append");
  cyc.symbols.push_back(fallback);
  return cyc;
}

double cylinder_shadow_time(const Scene& scene, const Word& word, ShadowAnchor anchor) {
  const PeriodicOrbit orbit = find_periodic_orbit(scene, closure_word(word, scene.size()));
  const int at = anchor == ShadowAnchor::Middle ? (word.size() - 1) / 2 : 0;
  return orbit.flight_lengths[static_cast<std::size_t>(at)];
}

double max_angle_estimate(const Scene& scene, int max_period) {
  if (max_period < 2) throw DomainError("max_angle_estimate: max_period must be at least 2");
  std::vector<Word> words;
  for (int p = 2; p <= max_period; ++p)
    for (const auto& nk : symbolic::primitive_necklaces(scene.size(), p))
      words.push_back(nk.representative);
  std::vector<double> best(words.size(), 0.0);
  parallel_for(static_cast<int>(words.size()), [&](int i) {
    best[static_cast<std::size_t>(i)] = find_periodic_orbit(scene, words[i]).max_angle();
  });
  return best.empty() ? 0.0 : *std::max_element(best.begin(), best.end());
}

std::string orbits_csv(const std::vector<PeriodicOrbit>& orbits) {
  std::string out = "word,period,length,min_angle,max_angle,primitive\n";
  char buf[256];
  for (const auto& o : orbits) {
    std::snprintf(buf, sizeof buf, "%s,%d,%.15g,%.15g,%.15g,%s\n", o.word.str().c_str(),
                  o.period(), o.length, o.min_angle(), o.max_angle(),
                  o.primitive ? "true" : "false");
    out += buf;
  }
  return out;
}

}  // namespace billiard::orbits
