#include <cmath>
#include <string>

#include <doctest.h>

#include "billiard/dynamics.hpp"
#include "billiard/orbits.hpp"
#include "billiard/symbolic.hpp"

using namespace billiard;
using namespace billiard::orbits;
using geometry::Obstacle;
using geometry::standard_scene;
using symbolic::Word;

namespace {

Vec v2(double x, double y) {
  Vec v(2);
  v << x, y;
  return v;
}

Word cyc(const std::string& s) { return Word::parse(s, true); }

std::vector<Word> words_up_to(int k0, int max_period) {
  std::vector<Word> out;
  for (int p = 2; p <= max_period; ++p)
    for (const auto& nk : symbolic::primitive_necklaces(k0, p)) out.push_back(nk.representative);
  return out;
}

// Flows from the first reflection for one orbit length and compares the
// obstacle sequence with the word.
void check_itinerary(const Scene& scene, const PeriodicOrbit& o) {
  const auto r = dynamics::flow(scene, dynamics::PhasePoint::make(o.points[0], o.directions[0]),
                                o.length - 1e-7);
  REQUIRE(r.hits.size() == o.points.size() - 1);
  for (std::size_t j = 0; j < r.hits.size(); ++j) CHECK(r.hits[j].obstacle == o.word[int(j) + 1]);
}

void check_invariants(const Scene& scene, const PeriodicOrbit& o) {
  double d0 = INFINITY;
  for (int i = 0; i < scene.size(); ++i)
    for (int j = i + 1; j < scene.size(); ++j)
      d0 = std::min(d0, geometry::pairwise_gap(scene[i], scene[j]));
  CHECK(reflection_residual(o) < 1e-9);
  CHECK(o.length == doctest::Approx(polygon_length(o.points)).epsilon(1e-14));
  for (int j = 0; j < o.period(); ++j) {
    CHECK(std::abs(scene[o.word[j]].level(o.points[j])) < 1e-10);
    CHECK(o.flight_lengths[j] >= d0 - 1e-9);
    CHECK(o.angles[j] < kPi / 2);
    CHECK(std::abs(o.directions[j].norm() - 1.0) < 1e-14);
  }
  check_itinerary(scene, o);
}

}  // namespace

TEST_CASE("period-2 orbit is the shortest segment") {
  const auto o = find_periodic_orbit(standard_scene(), cyc("12"));
  CHECK(o.length == doctest::Approx(8.0).epsilon(1e-14));
  CHECK((o.points[0] - v2(1, 0)).norm() < 1e-12);
  CHECK((o.points[1] - v2(5, 0)).norm() < 1e-12);
  CHECK(o.max_angle() < 1e-9);
  CHECK(o.primitive);
}

TEST_CASE("period-3 triangle orbit matches the symmetry closed form") {
  const Scene s = standard_scene();
  const auto o = find_periodic_orbit(s, cyc("123"));
  CHECK(std::abs(o.length - (18 - 3 * std::sqrt(3.0))) < 1e-9);
  const Vec centroid = v2(3, std::sqrt(3.0));
  for (int j = 0; j < 3; ++j) {
    CHECK(o.angles[j] == doctest::Approx(kPi / 6).epsilon(1e-10));
    const Vec c = s[j].center();
    CHECK((o.points[j] - (c + (centroid - c).normalized())).norm() < 1e-10);
    CHECK(o.flight_lengths[j] == doctest::Approx(6 - std::sqrt(3.0)).epsilon(1e-12));
  }
  check_invariants(s, o);
}

TEST_CASE("period-4 orbit satisfies the orbit invariants") {
  const Scene s = standard_scene();
  const auto o = find_periodic_orbit(s, cyc("1213"));
  check_invariants(s, o);
  CHECK(o.length >= 16.0);
  CHECK(o.gradient_norm < 1e-12);
}

TEST_CASE("all orbits up to period 6 satisfy the invariants") {
  const Scene s = standard_scene();
  for (const auto& w : words_up_to(3, 6)) {
    CAPTURE(w.str());
    check_invariants(s, find_periodic_orbit(s, w));
  }
}

TEST_CASE("orbits are strict local minimizers of length") {
  const Scene s = standard_scene();
  for (const auto& w : words_up_to(3, 4)) {
    const auto o = find_periodic_orbit(s, w);
    for (int j = 0; j < o.period(); ++j)
      for (double eps : {1e-4, -1e-4}) {
        auto pts = o.points;
        const Vec c = s[o.word[j]].center();
        const double a = std::atan2(pts[j](1) - c(1), pts[j](0) - c(0)) + eps;
        pts[j] = c + v2(std::cos(a), std::sin(a));
        CHECK(polygon_length(pts) > o.length);
      }
  }
}

TEST_CASE("rotated and reversed words give relabeled orbits of equal length") {
  const Scene s = standard_scene();
  for (const auto& w : words_up_to(3, 5)) {
    const auto o = find_periodic_orbit(s, w);
    for (int r = 1; r < w.size(); ++r) {
      const auto rot = find_periodic_orbit(s, symbolic::rotate(w, r));
      CHECK(std::abs(rot.length - o.length) < 1e-10);
      for (int j = 0; j < w.size(); ++j)
        CHECK((rot.points[j] - o.points[(j + r) % w.size()]).norm() < 1e-7);
    }
    CHECK(std::abs(find_periodic_orbit(s, symbolic::reversed(w)).length - o.length) < 1e-10);
  }
}

TEST_CASE("orbits among ellipses and in three dimensions") {
  const Scene e(2, {Obstacle::ellipsoid(v2(0, 0), v2(1.4, 0.7), Eigen::Rotation2Dd(0.4).toRotationMatrix()),
                    Obstacle::ellipsoid(v2(7, 0.5), v2(0.8, 1.3)),
                    Obstacle::sphere(v2(3, 6), 1.1)});
  for (const auto& w : words_up_to(3, 5)) {
    CAPTURE(w.str());
    check_invariants(e, find_periodic_orbit(e, w));
  }

  const Scene s3 = geometry::standard_scene_3d();
  const auto t = find_periodic_orbit(s3, cyc("123"));
  CHECK(std::abs(t.length - (18 - 3 * std::sqrt(3.0))) < 1e-9);
  for (const auto& p : t.points) CHECK(std::abs(p(2)) < 1e-10);
  check_invariants(s3, find_periodic_orbit(s3, cyc("121323")));
}

TEST_CASE("non-primitive and inadmissible words") {
  const auto twice = find_periodic_orbit(standard_scene(), cyc("1212"));
  CHECK_FALSE(twice.primitive);
  CHECK(twice.length == doctest::Approx(16.0).epsilon(1e-13));
  CHECK_THROWS_AS(find_periodic_orbit(standard_scene(), cyc("121")), DomainError);
  CHECK_THROWS_AS(find_periodic_orbit(standard_scene(), cyc("11")), DomainError);
  CHECK_THROWS_AS(find_periodic_orbit(standard_scene(), cyc("14")), DomainError);
}

TEST_CASE("iteration cap surfaces as a solver error") {
  OrbitOptions opt;
  opt.max_iterations = 1;
  CHECK_THROWS_AS(find_periodic_orbit(standard_scene(), cyc("121323"), opt), SolverError);
}

TEST_CASE("closure rule") {
  CHECK(closure_word(Word::parse("1"), 3).str() == "12");
  CHECK(closure_word(Word::parse("121"), 3).str() == "1213");
  CHECK(closure_word(Word::parse("123"), 3).str() == "123");
  CHECK(closure_word(Word::parse("1212"), 3).str() == "1212");
  CHECK(closure_word(Word::parse("12121"), 3).str() == "121213");
  for (int n = 1; n <= 6; ++n)
    for (const auto& w : symbolic::enumerate_words(3, n, false)) {
      const Word c = closure_word(w, 3);
      CHECK(c.cyclic);
      CHECK(symbolic::is_admissible(c));
      CHECK(std::equal(w.symbols.begin(), w.symbols.end(), c.symbols.begin()));
      if (!symbolic::is_admissible(Word{w.symbols, true})) CHECK(symbolic::is_primitive(c));
    }
}

TEST_CASE("cylinder shadow times") {
  const Scene s = standard_scene();
  CHECK(cylinder_shadow_time(s, Word::parse("12")) == doctest::Approx(4.0).epsilon(1e-13));
  CHECK(cylinder_shadow_time(s, Word::parse("123")) ==
        doctest::Approx(6 - std::sqrt(3.0)).epsilon(1e-12));
  CHECK(cylinder_shadow_time(s, Word::parse("123"), ShadowAnchor::First) ==
        doctest::Approx(6 - std::sqrt(3.0)).epsilon(1e-12));
  const auto o = find_periodic_orbit(s, cyc("1213"));
  CHECK(cylinder_shadow_time(s, Word::parse("121"), ShadowAnchor::First) ==
        doctest::Approx(o.flight_lengths[0]).epsilon(1e-13));
  CHECK(cylinder_shadow_time(s, Word::parse("121")) ==
        doctest::Approx(o.flight_lengths[1]).epsilon(1e-13));
}

TEST_CASE("empirical maximal angle") {
  const Scene s = standard_scene();
  CHECK(max_angle_estimate(s, 2) < 1e-9);
  CHECK(max_angle_estimate(s, 3) == doctest::Approx(kPi / 6).epsilon(1e-10));
  double prev = 0.0;
  for (int p = 2; p <= 6; ++p) {
    const double m = max_angle_estimate(s, p);
    CHECK(m >= prev);
    prev = m;
  }
  CHECK(prev >= kPi / 6);
  CHECK_THROWS_AS(max_angle_estimate(s, 1), DomainError);
}

TEST_CASE("orbit CSV") {
  const Scene s = standard_scene();
  const std::string csv =
      orbits_csv({find_periodic_orbit(s, cyc("12")), find_periodic_orbit(s, cyc("123"))});
  CHECK(csv.rfind("word,period,length,min_angle,max_angle,primitive\n", 0) == 0);
  CHECK(csv.find("\n12,2,8,") != std::string::npos);
  CHECK(csv.find("\n123,3,12.8038475772934,") != std::string::npos);
}
