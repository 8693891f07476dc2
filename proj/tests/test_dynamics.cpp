#include <cmath>
#include <random>

#include <doctest.h>

#include "billiard/certify.hpp"
#include "billiard/dynamics.hpp"

using namespace billiard;
using namespace billiard::dynamics;
using geometry::Obstacle;
using geometry::standard_scene;

namespace {

Vec v2(double x, double y) {
  Vec v(2);
  v << x, y;
  return v;
}

// A lone unit disk at the origin, with two companions far enough away that
// they never enter the short windows used here.
Scene lone_disk() {
  return Scene(2, {Obstacle::sphere(v2(0, 0), 1.0), Obstacle::sphere(v2(0, 40), 1.0),
                   Obstacle::sphere(v2(40, 0), 1.0)});
}

}  // namespace

TEST_CASE("reflect: normal, grazing and oblique incidence") {
  CHECK((reflect(v2(-1, 0), v2(1, 0)) - v2(1, 0)).norm() < 1e-15);
  CHECK((reflect(v2(0, 1), v2(1, 0)) - v2(0, 1)).norm() < 1e-15);
  const double r = std::sqrt(0.5);
  CHECK((reflect(v2(-r, -r), v2(0, 1)) - v2(-r, r)).norm() < 1e-15);
}

TEST_CASE("reflect is an isometric involution") {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> N;
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = 2 + trial % 3;
    Vec xi(n), nu(n);
    for (int k = 0; k < n; ++k) {
      xi(k) = N(rng);
      nu(k) = N(rng);
    }
    xi.normalize();
    nu.normalize();
    const Vec once = reflect(xi, nu);
    CHECK(std::abs(once.norm() - 1.0) < 1e-14);
    CHECK((reflect(once, nu) - xi).norm() < 1e-14);
    CHECK((reflection_matrix(nu) * xi - once).norm() < 1e-14);
  }
}

TEST_CASE("flow: one bounce off a disk") {
  const auto r = flow(standard_scene(), PhasePoint::make(v2(3, 0), v2(-1, 0)), 3.0);
  CHECK_FALSE(r.escaped);
  REQUIRE(r.hits.size() == 1);
  CHECK(r.hits[0].obstacle == 0);
  CHECK((r.hits[0].point - v2(1, 0)).norm() < 1e-14);
  CHECK((r.endpoint.position - v2(2, 0)).norm() < 1e-14);
  CHECK((r.endpoint.direction - v2(1, 0)).norm() < 1e-14);
}

TEST_CASE("flow: the period-2 orbit closes after length 8") {
  const auto r = flow(standard_scene(), PhasePoint::make(v2(1, 0), v2(1, 0)), 8.0);
  CHECK_FALSE(r.escaped);
  REQUIRE(r.hits.size() == 2);
  CHECK(r.hits[0].obstacle == 1);
  CHECK(r.hits[1].obstacle == 0);
  CHECK((r.endpoint.position - v2(1, 0)).norm() < 1e-12);
  CHECK((r.endpoint.direction - v2(1, 0)).norm() < 1e-12);
}

TEST_CASE("flow: escaping ray continues in a straight line") {
  // (3, 5) lies inside the third disk, so start just above it instead.
  const auto r = flow(standard_scene(), PhasePoint::make(v2(3, 7), v2(0, 1)), 10.0);
  CHECK(r.escaped);
  CHECK(r.hits.empty());
  CHECK((r.endpoint.position - v2(3, 17)).norm() < 1e-13);
  CHECK_THROWS_AS(flow(standard_scene(), PhasePoint::make(v2(3, 5), v2(0, 1)), 1.0), DomainError);
}

TEST_CASE("flow: tangential hits are degenerate") {
  CHECK_THROWS_AS(flow(standard_scene(), PhasePoint::make(v2(-3, 1), v2(1, 0)), 5.0),
                  DegenerateError);
}

TEST_CASE("flow: semigroup law, unit directions and increasing hit times") {
  const Scene s = standard_scene();
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  int checked = 0;
  for (int trial = 0; trial < 300; ++trial) {
    // Start on the boundary of a random disk, heading outwards.
    const int k = trial % 3;
    const double a = 2 * kPi * U(rng);
    const Vec nrm = v2(std::cos(a), std::sin(a));
    const Vec p = s[k].center() + 1.0001 * nrm;
    const double b = (U(rng) - 0.5) * 2.8;
    const Vec d = v2(std::cos(a + b), std::sin(a + b));
    const double t1 = 20 * U(rng), t2 = 10 * U(rng);
    FlowResult whole, first, second;
    try {
      whole = flow(s, PhasePoint::make(p, d), t1 + t2);
      first = flow(s, PhasePoint::make(p, d), t1);
      second = flow(s, first.endpoint, t2);
    } catch (const DegenerateError&) {
      continue;
    }
    // Hit times are flight lengths; their running sums are the hit instants.
    bool near = false;
    double acc = 0.0;
    for (const auto& h : whole.hits) {
      CHECK(h.time > 0.0);
      acc += h.time;
      near |= std::abs(acc - t1) < 1e-6;
    }
    CHECK(acc <= t1 + t2 + 1e-12);
    if (near) continue;
    ++checked;
    CHECK(std::abs(whole.endpoint.direction.norm() - 1.0) < 1e-14);
    CHECK((whole.endpoint.position - second.endpoint.position).norm() < 1e-10);
    CHECK((whole.endpoint.direction - second.endpoint.direction).norm() < 1e-10);
  }
  CHECK(checked > 200);
}

TEST_CASE("phi map fixes the perpendicular point") {
  const Scene s = lone_disk();
  const auto out = phi_map(s, PhasePoint::make(v2(2, 0), v2(-1, 0)), 1.0);
  CHECK((out.position - v2(2, 0)).norm() < 1e-14);
  CHECK((out.direction - v2(-1, 0)).norm() < 1e-14);
}

TEST_CASE("phi map is an involution") {
  const Scene s = lone_disk();
  const auto once = phi_map(s, PhasePoint::make(v2(2, 0.1), v2(-1, 0)), 1.0);
  CHECK(std::abs(once.direction.norm() - 1.0) < 1e-14);
  const auto twice = phi_map(s, once, 1.0);
  CHECK((twice.position - v2(2, 0.1)).norm() < 1e-10);
  CHECK((twice.direction - v2(-1, 0)).norm() < 1e-10);

  const Scene std3 = standard_scene();
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const Vec p = v2(2.0 + 0.3 * U(rng), 0.4 * U(rng));
    const double a = kPi + 0.4 * U(rng);
    const Vec d = v2(std::cos(a), std::sin(a));
    const double lam = 1.0 + 0.3 * U(rng);
    PhasePoint once2;
    try {
      once2 = phi_map(std3, PhasePoint::make(p, d), lam);
    } catch (const DomainError&) {
      continue;
    }
    const auto back = phi_map(std3, once2, lam);
    CHECK((back.position - p).norm() < 1e-10);
    CHECK((back.direction - d).norm() < 1e-10);
  }
}

TEST_CASE("phi map outside its domain") {
  const Scene s = lone_disk();
  CHECK_THROWS_AS(phi_map(s, PhasePoint::make(v2(3, 0), v2(-1, 0)), 0.5), DomainError);
  CHECK_THROWS_AS(phi_map(s, PhasePoint::make(v2(3, 0), v2(1, 0)), 1.0), DomainError);
}

TEST_CASE("finite-difference Jacobian calibration") {
  const Mat j = fd_jacobian([](const Vec& x) { return Vec::Constant(1, x(0) * x(0)); },
                            Vec::Constant(1, 3.0), 1e-5);
  CHECK(j(0, 0) == doctest::Approx(6.0).epsilon(1e-9));

  const double t = 2.5;
  const Mat free_flight = fd_jacobian(
      [t](const Vec& s) {
        Vec out(4);
        out << s.head(2) + t * s.tail(2), s.tail(2);
        return out;
      },
      (Vec(4) << 1, 2, 0.6, 0.8).finished());
  Mat expected = Mat::Identity(4, 4);
  expected.topRightCorner(2, 2) = t * Mat::Identity(2, 2);
  CHECK((free_flight - expected).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("flow Jacobian of a free flight is the shear block") {
  Vec state(4);
  state << 3, -2, 0.6, -0.8;
  const Mat j = flow_jacobian(standard_scene(), state, 4.0);
  Mat expected = Mat::Identity(4, 4);
  expected.topRightCorner(2, 2) = 4.0 * Mat::Identity(2, 2);
  CHECK((j - expected).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("flow Jacobian refuses stencils that straddle a reflection") {
  Vec state(4);
  state << 3, 0, -1, 0;
  CHECK_THROWS_AS(flow_jacobian(standard_scene(), state, 2.0, 1e-5), StencilError);
}

TEST_CASE("finite-difference dPhi matches the analytic blocks at a perpendicular point") {
  const Scene s = lone_disk();
  Vec state(4);
  state << 2, 0, -1, 0;
  const Mat full = phi_map_jacobian(s, state, 1.0);
  Mat embed = Mat::Zero(4, 2);
  embed(1, 0) = 1.0;
  embed(3, 1) = 1.0;
  const Mat reduced = embed.transpose() * full * embed;
  const Mat analytic = certify::dphi_analytic(Mat::Identity(1, 1), 1.0);
  CHECK((reduced - analytic).cwiseAbs().maxCoeff() / analytic.norm() < 1e-6);

  const auto rep = certify::verify_nonintegrability(standard_scene(), 0, 1, 1.0, 10);
  CHECK(rep.max_block_error < 1e-6);
}
