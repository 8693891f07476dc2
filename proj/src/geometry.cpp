#include "billiard/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <random>
#include <string>

namespace billiard::geometry {

namespace {

constexpr double kAheadTime = 1e-12;
constexpr double kGolden = 0.6180339887498949;

double minimize_convex_1d(const std::function<double(double)>& f, double lo, double hi,
                          double tol) {
  double a = lo, b = hi;
  double x1 = b - kGolden * (b - a), x2 = a + kGolden * (b - a);
  double f1 = f(x1), f2 = f(x2);
  while (b - a > tol) {
    if (f1 <= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - kGolden * (b - a);
      f1 = f(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + kGolden * (b - a);
      f2 = f(x2);
    }
  }
  return std::min({f1, f2, f(lo), f(hi)});
}

// Weighted Minkowski combination sum_k w_k K_k on one side, a single body on
// the other. F(d) = min_{y in B} <d,y> - max_{x in A} <d,x> is the signed gap
// along d; its maximum over unit d is the distance when the sets are disjoint.
struct SeparationProblem {
  std::vector<std::pair<double, const Obstacle*>> side_a;
  const Obstacle* side_b = nullptr;

  double value(const Vec& d) const {
    double v = -side_b->support(-d);
    for (const auto& [w, k] : side_a) v -= w * k->support(d);
    return v;
  }
  Vec gradient(const Vec& d) const {
    Vec g = side_b->support_point(-d);
    for (const auto& [w, k] : side_a) g -= w * k->support_point(d);
    return g;
  }
};

// Riemannian gradient ascent on the unit sphere with an adaptive step.
std::pair<double, Vec> ascend(const SeparationProblem& prob, Vec d) {
  d.normalize();
  double val = prob.value(d);
  Vec g = prob.gradient(d);
  Vec gt = g - g.dot(d) * d;
  double eta = 0.5 / std::max(g.norm(), 1e-300);
  for (int it = 0; it < 20000; ++it) {
    const double gn = gt.norm();
    if (gn <= 1e-14 * (1.0 + g.norm()) || eta * gn < 1e-17) break;
    Vec trial = (d + eta * gt).normalized();
    const double tv = prob.value(trial);
    if (tv > val) {
      d = trial;
      val = tv;
      g = prob.gradient(d);
      gt = g - g.dot(d) * d;
      eta *= 1.5;
    } else {
      eta *= 0.5;
    }
  }
  return {val, d};
}

std::vector<Vec> start_directions(int n, const Vec& preferred, int random_count) {
  std::vector<Vec> starts;
  if (preferred.norm() > 0) starts.push_back(preferred.normalized());
  for (int k = 0; k < n; ++k) {
    starts.push_back(Vec::Unit(n, k));
    starts.push_back(-Vec::Unit(n, k));
  }
  std::mt19937_64 rng(0x5eed5eedULL);
  std::normal_distribution<double> normal;
  for (int r = 0; r < random_count; ++r) {
    Vec v(n);
    for (int k = 0; k < n; ++k) v(k) = normal(rng);
    starts.push_back(v.normalized());
  }
  return starts;
}

std::pair<double, Vec> max_separation(const SeparationProblem& prob, const Vec& preferred,
                                      int random_count = 64) {
  const int n = static_cast<int>(prob.side_b->center().size());
  std::pair<double, Vec> best{-std::numeric_limits<double>::infinity(), Vec()};
  for (const Vec& s : start_directions(n, preferred, random_count)) {
    auto r = ascend(prob, s);
    if (r.first > best.first) best = r;
  }
  return best;
}

Vec principal_curvatures(const Obstacle& k, const Vec& w) {
  const Vec x = k.boundary_point(w.normalized());
  const Mat frame = complement_basis(k.normal(x));
  Eigen::SelfAdjointEigenSolver<Mat> es(shape_operator(k, x, frame));
  return es.eigenvalues();
}

std::vector<Vec> sphere_samples(int n, int count) {
  std::vector<Vec> out;
  out.reserve(static_cast<std::size_t>(count));
  if (n == 2) {
    for (int i = 0; i < count; ++i) {
      const double th = 2.0 * kPi * i / count;
      out.push_back((Vec(2) << std::cos(th), std::sin(th)).finished());
    }
  } else if (n == 3) {
    const double ga = kPi * (3.0 - std::sqrt(5.0));
    for (int i = 0; i < count; ++i) {
      const double z = 1.0 - 2.0 * (i + 0.5) / count;
      const double r = std::sqrt(1.0 - z * z);
      out.push_back((Vec(3) << r * std::cos(ga * i), r * std::sin(ga * i), z).finished());
    }
  } else {
    std::mt19937_64 rng(0xc0ffeeULL);
    std::normal_distribution<double> normal;
    for (int i = 0; i < count; ++i) {
      Vec v(n);
      for (int k = 0; k < n; ++k) v(k) = normal(rng);
      out.push_back(v.normalized());
    }
  }
  return out;
}

// Compass search over the tangent chart of the unit sphere; sign = +1
// maximizes the largest principal curvature, -1 minimizes the smallest.
double polish_curvature(const Obstacle& k, Vec w, double sign) {
  auto score = [&](const Vec& v) {
    const Vec ev = principal_curvatures(k, v);
    return sign > 0 ? ev.maxCoeff() : -ev.minCoeff();
  };
  double best = score(w);
  double step = 1e-2;
  while (step > 1e-12) {
    bool improved = false;
    const Mat t = complement_basis(w);
    for (Eigen::Index c = 0; c < t.cols() && !improved; ++c) {
      for (double s : {step, -step}) {
        Vec trial = (w + s * t.col(c)).normalized();
        const double v = score(trial);
        if (v > best) {
          best = v;
          w = trial;
          improved = true;
          break;
        }
      }
    }
    if (!improved) step *= 0.5;
  }
  return sign * best;
}

}  // namespace

Obstacle::Obstacle(Vec center, Vec semi_axes, Mat rotation, bool is_sphere)
    : center_(std::move(center)),
      semi_axes_(std::move(semi_axes)),
      rotation_(std::move(rotation)),
      is_sphere_(is_sphere) {
  const auto n = center_.size();
  if (n < 2) throw DomainError("obstacle dimension must be at least 2");
  if (semi_axes_.size() != n || rotation_.rows() != n || rotation_.cols() != n)
    throw DomainError("obstacle center, semi-axes and rotation sizes disagree");
  if ((semi_axes_.array() <= 0.0).any() || !semi_axes_.allFinite())
    throw DomainError("obstacle semi-axes must be positive and finite");
  if ((rotation_.transpose() * rotation_ - Mat::Identity(n, n)).cwiseAbs().maxCoeff() > 1e-10)
    throw DomainError("obstacle rotation is not orthogonal");
  affine_ = rotation_ * semi_axes_.asDiagonal();
  shape_ = rotation_ * semi_axes_.array().square().inverse().matrix().asDiagonal() *
           rotation_.transpose();
  shape_ = 0.5 * (shape_ + shape_.transpose());
  inverse_shape_ = affine_ * affine_.transpose();
}

Obstacle Obstacle::sphere(const Vec& center, double radius) {
  const auto n = center.size();
  return Obstacle(center, Vec::Constant(n, radius), Mat::Identity(n, n), true);
}

Obstacle Obstacle::ellipsoid(const Vec& center, const Vec& semi_axes,
                             const std::optional<Mat>& rotation) {
  const auto n = center.size();
  const bool round = semi_axes.size() == n && n > 0 &&
                     (semi_axes.array() == semi_axes(0)).all();
  return Obstacle(center, semi_axes, rotation.value_or(Mat::Identity(n, n)), round);
}

double Obstacle::level(const Vec& x) const {
  const Vec y = x - center_;
  return y.dot(shape_ * y) - 1.0;
}

Vec Obstacle::gradient(const Vec& x) const { return 2.0 * shape_ * (x - center_); }

Vec Obstacle::normal(const Vec& x) const { return gradient(x).normalized(); }

Vec Obstacle::sphere_coordinates(const Vec& x) const {
  return semi_axes_.cwiseInverse().asDiagonal() * (rotation_.transpose() * (x - center_));
}

Vec Obstacle::support_point(const Vec& d) const {
  const Vec md = inverse_shape_ * d;
  const double q = d.dot(md);
  if (q <= 0.0) return center_;
  return center_ + md / std::sqrt(q);
}

Obstacle Obstacle::scaled(double s) const {
  return Obstacle(s * center_, s * semi_axes_, rotation_, is_sphere_);
}

Scene::Scene(int dimension, std::vector<Obstacle> obstacles)
    : dimension_(dimension), obstacles_(std::move(obstacles)) {
  if (dimension_ < 2) throw DomainError("scene dimension must be at least 2");
  if (obstacles_.size() < 3) throw DomainError("scene needs at least 3 obstacles");
  for (const auto& k : obstacles_)
    if (k.dimension() != dimension_) throw DomainError("obstacle dimension differs from scene");
  for (int i = 0; i < size(); ++i)
    for (int j = i + 1; j < size(); ++j)
      if (!(pairwise_gap((*this)[i], (*this)[j]) > 0.0))
        throw DomainError("obstacles " + std::to_string(i + 1) + " and " +
                          std::to_string(j + 1) + " are not disjoint");
}

Scene Scene::scaled(double s) const {
  std::vector<Obstacle> out;
  for (const auto& k : obstacles_) out.push_back(k.scaled(s));
  return Scene(dimension_, std::move(out));
}

Scene standard_scene(double scale) {
  const double h = 3.0 * std::sqrt(3.0);
  std::vector<Obstacle> ks{
      Obstacle::sphere((Vec(2) << 0.0, 0.0).finished(), 1.0),
      Obstacle::sphere((Vec(2) << 6.0, 0.0).finished(), 1.0),
      Obstacle::sphere((Vec(2) << 3.0, h).finished(), 1.0),
  };
  return Scene(2, std::move(ks)).scaled(scale);
}

Scene standard_scene_3d(double scale) {
  const double h = 3.0 * std::sqrt(3.0);
  std::vector<Obstacle> ks{
      Obstacle::sphere((Vec(3) << 0.0, 0.0, 0.0).finished(), 1.0),
      Obstacle::sphere((Vec(3) << 6.0, 0.0, 0.0).finished(), 1.0),
      Obstacle::sphere((Vec(3) << 3.0, h, 0.0).finished(), 1.0),
  };
  return Scene(3, std::move(ks)).scaled(scale);
}

std::optional<BoundaryHit> ray_cast(const Scene& scene, const Vec& start, const Vec& direction) {
  std::optional<BoundaryHit> best;
  for (int i = 0; i < scene.size(); ++i) {
    const Obstacle& k = scene[i];
    const Vec y = start - k.center();
    const Vec ad = k.shape() * direction;
    const double qa = direction.dot(ad);
    const double qb = 2.0 * y.dot(ad);
    const double qc = y.dot(k.shape() * y) - 1.0;
    if (qc < -1e-9) throw DomainError("ray start lies inside obstacle " + std::to_string(i + 1));
    const double disc = qb * qb - 4.0 * qa * qc;
    if (disc < 0.0 || qa <= 0.0) continue;
    const double sq = std::sqrt(disc);
    const double q = -0.5 * (qb + (qb >= 0.0 ? sq : -sq));
    double r1 = q / qa;
    double r2 = q != 0.0 ? qc / q : r1;
    if (r1 > r2) std::swap(r1, r2);
    // Entry root only; a start on the boundary gives r1 ~ 0 and is skipped.
    if (!(r1 > kAheadTime)) continue;
    double t = r1;
    // One Newton polish of the level function along the ray.
    const Vec p0 = start + t * direction;
    const double dl = k.gradient(p0).dot(direction);
    if (dl != 0.0) t -= k.level(p0) / dl;
    if (best && t >= best->time) continue;
    BoundaryHit hit;
    hit.obstacle = i;
    hit.time = t;
    hit.point = start + t * direction;
    hit.normal = k.normal(hit.point);
    hit.cos_phi = -direction.dot(hit.normal) / direction.norm();
    best = hit;
  }
  return best;
}

Mat shape_form(const Obstacle& obstacle, const Vec& point) {
  return 2.0 * obstacle.shape() / obstacle.gradient(point).norm();
}

Mat shape_operator(const Obstacle& obstacle, const Vec& point, const Mat& frame) {
  if (std::abs(obstacle.level(point)) > 1e-10)
    throw DomainError("shape_operator: point is not on the obstacle boundary");
  const Vec nu = obstacle.normal(point);
  const auto m = frame.cols();
  if ((frame.transpose() * frame - Mat::Identity(m, m)).cwiseAbs().maxCoeff() > 1e-10 ||
      (frame.transpose() * nu).cwiseAbs().maxCoeff() > 1e-10)
    throw DomainError("shape_operator: frame is not an orthonormal tangent frame");
  Mat s = frame.transpose() * shape_form(obstacle, point) * frame;
  return 0.5 * (s + s.transpose());
}

double pairwise_gap(const Obstacle& a, const Obstacle& b) {
  if (a.is_sphere() && b.is_sphere())
    return (a.center() - b.center()).norm() - a.radius() - b.radius();
  SeparationProblem prob{{{1.0, &a}}, &b};
  return max_separation(prob, b.center() - a.center()).first;
}

double max_pair_distance(const Obstacle& a, const Obstacle& b) {
  return (a.center() - b.center()).norm() + a.max_semi_axis() + b.max_semi_axis();
}

double hull_margin(const Obstacle& ki, const Obstacle& kj, const Obstacle& kl) {
  if (!(ki.is_sphere() && kj.is_sphere() && kl.is_sphere()))
    return hull_margin_support(ki, kj, kl);
  // hull(B_i u B_j) is the union of the balls B((1-t)c_i + t c_j, (1-t)r_i + t r_j).
  auto f = [&](double t) {
    const Vec c = (1.0 - t) * ki.center() + t * kj.center();
    const double r = (1.0 - t) * ki.radius() + t * kj.radius();
    return (kl.center() - c).norm() - r - kl.radius();
  };
  return minimize_convex_1d(f, 0.0, 1.0, 1e-13);
}

double hull_margin_support(const Obstacle& ki, const Obstacle& kj, const Obstacle& kl) {
  // G(t) = max_d F_t(d) is a pointwise max of functions affine in t, hence convex.
  Vec warm = kl.center() - 0.5 * (ki.center() + kj.center());
  auto g = [&](double t) {
    SeparationProblem prob{{{1.0 - t, &ki}, {t, &kj}}, &kl};
    auto local = ascend(prob, warm);
    if (local.first <= 0.0) local = max_separation(prob, warm, 16);
    warm = local.second;
    return local.first;
  };
  // Seed the warm start with a full multi-start at the midpoint.
  SeparationProblem mid{{{0.5, &ki}, {0.5, &kj}}, &kl};
  warm = max_separation(mid, warm).second;
  return minimize_convex_1d(g, 0.0, 1.0, 1e-11);
}

NoEclipseCertificate check_no_eclipse(const Scene& scene) {
  NoEclipseCertificate cert;
  cert.min_margin = std::numeric_limits<double>::infinity();
  for (int i = 0; i < scene.size(); ++i)
    for (int j = i + 1; j < scene.size(); ++j)
      for (int l = 0; l < scene.size(); ++l) {
        if (l == i || l == j) continue;
        const double m = hull_margin(scene[i], scene[j], scene[l]);
        if (m < cert.min_margin) {
          cert.min_margin = m;
          if (m <= 0.0) cert.witness = EclipseWitness{i, j, l};
        }
      }
  cert.holds = cert.min_margin > 0.0;
  if (cert.holds) cert.witness.reset();
  return cert;
}

CurvatureBounds curvature_bounds(const Scene& scene) {
  CurvatureBounds b;
  b.kappa_min = std::numeric_limits<double>::infinity();
  b.kappa_max = 0.0;
  for (const auto& k : scene.obstacles()) {
    if (k.is_sphere()) {
      b.kappa_min = std::min(b.kappa_min, 1.0 / k.radius());
      b.kappa_max = std::max(b.kappa_max, 1.0 / k.radius());
      continue;
    }
    b.sampled = true;
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    Vec wlo, whi;
    for (const Vec& w : sphere_samples(k.dimension(), 10000)) {
      const Vec ev = principal_curvatures(k, w);
      if (ev.minCoeff() < lo) {
        lo = ev.minCoeff();
        wlo = w;
      }
      if (ev.maxCoeff() > hi) {
        hi = ev.maxCoeff();
        whi = w;
      }
    }
    lo = std::min(lo, polish_curvature(k, wlo, -1.0));
    hi = std::max(hi, polish_curvature(k, whi, +1.0));
    b.kappa_min = std::min(b.kappa_min, lo);
    b.kappa_max = std::max(b.kappa_max, hi);
  }
  return b;
}

SceneConstants scene_constants(const Scene& scene, double phi0) {
  if (!(phi0 >= 0.0 && phi0 < kPi / 2.0))
    throw DomainError("scene_constants: phi0 must lie in [0, pi/2)");
  SceneConstants c;
  c.d0 = std::numeric_limits<double>::infinity();
  double dmax = 0.0;
  for (int i = 0; i < scene.size(); ++i)
    for (int j = i + 1; j < scene.size(); ++j) {
      const double g = pairwise_gap(scene[i], scene[j]);
      c.d0 = std::min(c.d0, g);
      dmax = std::max(dmax, g);
    }
  c.a = dmax - c.d0;
  const CurvatureBounds kb = curvature_bounds(scene);
  c.kappa_min = kb.kappa_min;
  c.kappa_max = kb.kappa_max;
  c.kappa_sampled = kb.sampled;
  c.phi0 = phi0;
  c.mu0 = 2.0 * std::cos(phi0) * c.kappa_min;
  c.lambda0 = 1.0 / c.d0 + 2.0 * c.kappa_max / std::cos(phi0);
  return c;
}

}  // namespace billiard::geometry
