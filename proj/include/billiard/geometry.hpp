#pragma once

#include <optional>
#include <vector>

#include "billiard/types.hpp"

namespace billiard::geometry {

/// A strictly convex quadric obstacle {x : (x-c)^T A (x-c) <= 1} with
/// A = R diag(1/s^2) R^T. The boundary is the affine image c + M w of the
/// unit sphere, M = R diag(s).
class Obstacle {
 public:
  static Obstacle sphere(const Vec& center, double radius);
  static Obstacle ellipsoid(const Vec& center, const Vec& semi_axes,
                            const std::optional<Mat>& rotation = std::nullopt);

  int dimension() const { return static_cast<int>(center_.size()); }
  const Vec& center() const { return center_; }
  const Mat& shape() const { return shape_; }
  const Vec& semi_axes() const { return semi_axes_; }
  const Mat& rotation() const { return rotation_; }
  /// Affine map of the unit sphere onto the boundary.
  const Mat& affine() const { return affine_; }
  bool is_sphere() const { return is_sphere_; }
  double radius() const { return semi_axes_(0); }  // meaningful for spheres
  double max_semi_axis() const { return semi_axes_.maxCoeff(); }
  double min_semi_axis() const { return semi_axes_.minCoeff(); }

  /// (x-c)^T A (x-c) - 1: negative inside, zero on the boundary.
  double level(const Vec& x) const;
  Vec gradient(const Vec& x) const;
  Vec normal(const Vec& x) const;
  /// Boundary point c + M w for a unit vector w.
  Vec boundary_point(const Vec& w) const { return center_ + affine_ * w; }
  /// Inverse of boundary_point for points on the boundary.
  Vec sphere_coordinates(const Vec& x) const;

  /// Support point argmax_{y in K} <d, y> and support value h(d).
  Vec support_point(const Vec& d) const;
  double support(const Vec& d) const { return d.dot(support_point(d)); }

  /// Similarity transform x -> s x (centers and semi-axes scale together).
  Obstacle scaled(double s) const;

 private:
  Obstacle(Vec center, Vec semi_axes, Mat rotation, bool is_sphere);

  Vec center_;
  Vec semi_axes_;
  Mat rotation_;
  Mat shape_;
  Mat affine_;
  Mat inverse_shape_;  // A^{-1} = M M^T
  bool is_sphere_ = false;
};

/// Ordered set of k0 >= 3 pairwise disjoint obstacles in R^n, n >= 2.
class Scene {
 public:
  Scene(int dimension, std::vector<Obstacle> obstacles);

  int dimension() const { return dimension_; }
  int size() const { return static_cast<int>(obstacles_.size()); }
  const Obstacle& operator[](int i) const { return obstacles_[static_cast<std::size_t>(i)]; }
  const std::vector<Obstacle>& obstacles() const { return obstacles_; }

  Scene scaled(double s) const;

 private:
  int dimension_;
  std::vector<Obstacle> obstacles_;
};

/// Three unit disks centred at (0,0), (6,0), (3, 3 sqrt 3), optionally scaled.
Scene standard_scene(double scale = 1.0);
/// The same configuration embedded in the plane z = 0 of R^3 (unit spheres).
Scene standard_scene_3d(double scale = 1.0);

struct BoundaryHit {
  int obstacle = -1;  // 0-based
  Vec point;
  double time = 0.0;
  Vec normal;
  double cos_phi = 0.0;
};

/// First boundary intersection strictly ahead of `start` (time > 1e-12).
/// nullopt means the ray escapes. `direction` need not be unit for the
/// extended phase-space maps; time is then the ray parameter.
std::optional<BoundaryHit> ray_cast(const Scene& scene, const Vec& start, const Vec& direction);

/// Matrix of the shape operator (outward normal) in the tangent frame given
/// by the columns of `frame`.
Mat shape_operator(const Obstacle& obstacle, const Vec& point, const Mat& frame);

/// Shape operator as a symmetric bilinear form on ambient vectors, valid for
/// tangent arguments: y^T (Hess F / |grad F|) y'.
Mat shape_form(const Obstacle& obstacle, const Vec& point);

/// Signed gap between two obstacles: distance when disjoint, <= 0 otherwise.
double pairwise_gap(const Obstacle& a, const Obstacle& b);

/// Largest point-to-point distance between two obstacles.
double max_pair_distance(const Obstacle& a, const Obstacle& b);

/// Signed separation of K_l from hull(K_i u K_j): the distance when positive.
double hull_margin(const Obstacle& ki, const Obstacle& kj, const Obstacle& kl);

/// Dual support-function route for hull_margin, usable for any quadrics.
/// Exposed separately so the sphere closed form can be cross-checked.
double hull_margin_support(const Obstacle& ki, const Obstacle& kj, const Obstacle& kl);

struct EclipseWitness {
  int i = -1, j = -1;  // hull pair
  int blocker = -1;    // obstacle meeting the hull
};

struct NoEclipseCertificate {
  bool holds = false;
  double min_margin = 0.0;
  std::optional<EclipseWitness> witness;
};

NoEclipseCertificate check_no_eclipse(const Scene& scene);

struct CurvatureBounds {
  double kappa_min = 0.0;
  double kappa_max = 0.0;
  bool sampled = false;  // true when an ellipsoid required sampling (+-1e-6 slack)
};

CurvatureBounds curvature_bounds(const Scene& scene);

struct SceneConstants {
  double d0 = 0.0;
  double a = 0.0;
  double kappa_min = 0.0;
  double kappa_max = 0.0;
  double phi0 = 0.0;
  double mu0 = 0.0;
  double lambda0 = 0.0;
  bool kappa_sampled = false;
};

SceneConstants scene_constants(const Scene& scene, double phi0);

}  // namespace billiard::geometry
