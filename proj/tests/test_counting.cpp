#include <algorithm>
#include <cmath>

#include <doctest.h>

#include "billiard/counting.hpp"
#include "billiard/transfer.hpp"

using namespace billiard;
using namespace billiard::counting;
using geometry::standard_scene;

namespace {

const OrbitTable& std3_table(int max_period) {
  static std::map<int, OrbitTable> cache;
  auto it = cache.find(max_period);
  if (it == cache.end()) it = cache.emplace(max_period, orbit_table(standard_scene(), max_period)).first;
  return it->second;
}

double std3_entropy() {
  static const double h = transfer::entropy(transfer::build_cylinder_model(standard_scene(), 6));
  return h;
}

// Only the three period-2 orbits.
OrbitTable two_orbit_table() {
  OrbitTable t;
  t.max_period = 2;
  t.d0 = 4.0;
  t.complete = true;
  for (const char* w : {"12", "13", "23"})
    t.entries.push_back({symbolic::Word::parse(w, true), 2, 8.0});
  return t;
}

}  // namespace

TEST_CASE("orbit tables of small period") {
  const auto& t2 = std3_table(2);
  REQUIRE(t2.entries.size() == 3);
  for (const auto& e : t2.entries) CHECK(e.length == doctest::Approx(8.0).epsilon(1e-14));

  const auto& t3 = std3_table(3);
  REQUIRE(t3.entries.size() == 5);
  for (int k = 0; k < 3; ++k) CHECK(t3.entries[std::size_t(k)].length == doctest::Approx(8.0));
  for (int k = 3; k < 5; ++k)
    CHECK(std::abs(t3.entries[std::size_t(k)].length - (18 - 3 * std::sqrt(3.0))) < 1e-9);

  CHECK(std3_table(4).entries.size() == 8);
  CHECK(std3_table(4).complete);
  CHECK(std3_table(4).horizon() == doctest::Approx(20.0));
  CHECK_THROWS_AS(orbit_table(standard_scene(), 1), DomainError);
}

TEST_CASE("orbit table invariants up to period 12") {
  const auto& t = std3_table(12);
  CHECK(t.complete);
  CHECK(t.failures.empty());
  long long expected = 0;
  for (int p = 2; p <= 12; ++p) expected += static_cast<long long>(symbolic::primitive_necklaces(3, p).size());
  CHECK(static_cast<long long>(t.entries.size()) == expected);
  for (std::size_t k = 0; k < t.entries.size(); ++k) {
    const auto& e = t.entries[k];
    CHECK(e.length >= e.period * t.d0 - 1e-9);
    CHECK(e.period == e.necklace.size());
    if (k > 0) CHECK(t.entries[k - 1].length <= e.length);
  }
}

TEST_CASE("prime orbit counting") {
  const auto& t = std3_table(3);
  CHECK(pi_counting(t, 10) == 3);
  CHECK(pi_counting(t, 13) == 5);
  CHECK(pi_counting(t, 7) == 0);
  CHECK(pi_counting(t, 8) == 3);
  CHECK(pi_counting(t, 16) == 5);
  CHECK_THROWS_AS(pi_counting(t, 16.5), IncompletenessError);

  OrbitTable broken = t;
  broken.complete = false;
  CHECK_THROWS_AS(pi_counting(broken, 10), IncompletenessError);
}

TEST_CASE("prime orbit counting is a nondecreasing right-continuous step function") {
  const auto& t = std3_table(8);
  long long prev = 0;
  for (double lam = 0; lam <= t.horizon(); lam += 0.01) {
    const long long n = pi_counting(t, lam);
    CHECK(n >= prev);
    prev = n;
  }
  for (const auto& e : t.entries) {
    CHECK(pi_counting(t, e.length) > pi_counting(t, e.length - 1e-6));
    CHECK(pi_counting(t, e.length) == pi_counting(t, e.length + 1e-12));
  }
}

TEST_CASE("logarithmic integral") {
  CHECK(li(2.0) == 0.0);
  CHECK(li(10.0) == doctest::Approx(5.12044).epsilon(1e-6));
  CHECK_THROWS_AS(li(1.5), DomainError);
  // Independent oracle: li(x) - li(2) = Ei(ln x) - Ei(ln 2).
  for (double x : {2.5, 10.0, 100.0, 1e4, 1e8, 1e15}) {
    const double ref = std::expint(std::log(x)) - std::expint(std::log(2.0));
    CHECK(std::abs(li(x) - ref) < 1e-10 * std::max(1.0, ref));
  }
  double prev = 0.0;
  for (double lam = 5; lam <= 50; lam += 0.5) {
    const double v = li(std::exp(0.167 * lam));
    CHECK(v > prev);
    prev = v;
  }
}

TEST_CASE("truncated zeta product") {
  const auto t = two_orbit_table();
  const Complex z = zeta_partial(t, 0.2, 8.0);
  CHECK(z.real() == doctest::Approx(std::pow(1 - std::exp(-1.6), -3)).epsilon(1e-14));
  CHECK(z.real() == doctest::Approx(1.967082).epsilon(1e-6));
  CHECK(z.imag() == 0.0);
  CHECK(std::abs(zeta_partial(t, 50.0, 8.0) - 1.0) < 1e-15);
  CHECK(std::abs(zeta_partial(t, 0.2, 7.0) - 1.0) == 0.0);
  for (double s : {0.05, 0.3, 1.0}) CHECK(zeta_partial(t, s, 8.0).real() > 1.0);
  CHECK(std::log(z.real()) == doctest::Approx(log_zeta_partial(t, 0.2, 8.0)).epsilon(1e-14));

  const Complex pole(0.0, 2 * kPi / 8.0);
  CHECK_THROWS_AS(zeta_partial(t, pole, 8.0), PoleProximityError);
  CHECK_THROWS_AS(zeta_partial(t, 0.2, 13.0), IncompletenessError);
  CHECK_THROWS_AS(log_zeta_partial(t, -0.1, 8.0), DomainError);
}

TEST_CASE("log zeta growth changes character at the entropy") {
  const auto& t = std3_table(12);
  const double h = std3_entropy();
  auto increment = [&](double s, double a, double b) {
    return log_zeta_partial(t, s, b) - log_zeta_partial(t, s, a);
  };
  const double below = h - 0.05, above = h + 0.05;
  CHECK(increment(below, 40, 50) > increment(below, 30, 40));
  CHECK(increment(above, 40, 50) < increment(above, 30, 40));
  CHECK(std::abs(zeta_crossover(t) - h) < 0.02);
}

TEST_CASE("zeta crossover needs enough layers") {
  CHECK_THROWS_AS(zeta_crossover(std3_table(4)), DomainError);
  OrbitTable broken = std3_table(8);
  broken.complete = false;
  CHECK_THROWS_AS(zeta_crossover(broken), IncompletenessError);
}

TEST_CASE("counting ratio on the standard scene") {
  const auto& t = std3_table(12);
  const double h = std3_entropy();
  const auto rows = counting_rows(t, h, {8, 15, 30, 50});
  REQUIRE(rows.size() == 4);
  for (const auto& r : rows) {
    CHECK(r.pi == pi_counting(t, r.lambda));
    CHECK(r.li_value == doctest::Approx(li(std::exp(h * r.lambda))));
    CHECK(r.ratio == doctest::Approx(double(r.pi) / r.li_value));
  }
  const auto range = ratio_range(t, h, 8, 50);
  CHECK(range.min_ratio >= 0.5);
  CHECK(range.max_ratio <= 2.0);
  CHECK(std::abs(rows[3].ratio - 1) < std::abs(rows[1].ratio - 1));

  // The range brackets the ratio at every grid point in the window.
  for (double lam = 8; lam <= 50; lam += 0.25) {
    const double r = double(pi_counting(t, lam)) / li(std::exp(h * lam));
    CHECK(r >= range.min_ratio - 1e-12);
    CHECK(r <= range.max_ratio + 1e-12);
  }
  CHECK_THROWS_AS(ratio_range(t, h, 8, 60), IncompletenessError);
}

TEST_CASE("counting outputs") {
  const auto& t = std3_table(3);
  const std::string csv = table_csv(t);
  CHECK(csv.rfind("word,period,length\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 6);
  const auto j = counting_json(counting_rows(t, 0.17, {10, 13}));
  REQUIRE(j.size() == 2);
  CHECK(j[0].at("pi") == 3);
  CHECK(j[1].at("pi") == 5);
}
