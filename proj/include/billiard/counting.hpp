#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "billiard/geometry.hpp"
#include "billiard/symbolic.hpp"

namespace billiard::counting {

using geometry::Scene;
using symbolic::Word;

struct OrbitEntry {
  Word necklace;
  int period = 0;
  double length = 0.0;
};

/// Primitive closed orbits up to a period, sorted by length (ties by word).
struct OrbitTable {
  std::vector<OrbitEntry> entries;
  int max_period = 0;
  double d0 = 0.0;
  bool complete = false;
  std::vector<std::string> failures;  // "word: message" per failed solve

  /// Lengths up to this value are guaranteed to be listed: a period-m
  /// orbit is at least m d0 long.
  double horizon() const { return (max_period + 1) * d0; }
};

OrbitTable orbit_table(const Scene& scene, int max_period);

/// Absolute slack when comparing orbit lengths with a cutoff; closed-form
/// lengths such as 8 come out of the solver within a few ulps.
inline constexpr double kLengthSlack = 1e-9;

/// Number of primitive orbits with length <= lam. Throws
/// IncompletenessError when the table is incomplete or lam exceeds the
/// completeness horizon.
long long pi_counting(const OrbitTable& table, double lam);

/// Logarithmic integral from 2 to x (adaptive Gauss-Kronrod). x >= 2.
double li(double x);

/// Product over orbits with length <= cutoff of (1 - e^{-s l})^{-1}.
/// Throws PoleProximityError if a factor's denominator is below 1e-14.
Complex zeta_partial(const OrbitTable& table, Complex s, double length_cutoff);

/// Sum over orbits with length <= cutoff of -log(1 - e^{-s l}), real s > 0.
double log_zeta_partial(const OrbitTable& table, double s, double length_cutoff);

/// The s at which the period-layer sums Z_m(s) = sum_{period m} m e^{-s l}
/// stop growing with m (zero least-squares slope of log Z_m over
/// m_min..max_period). Estimates the entropy from the orbit table alone.
double zeta_crossover(const OrbitTable& table, int m_min = 4);

struct CountingRow {
  double lambda = 0.0;
  long long pi = 0;
  double li_value = 0.0;
  double ratio = 0.0;
};

/// pi(lambda) / li(e^{h lambda}) on a grid.
std::vector<CountingRow> counting_rows(const OrbitTable& table, double entropy,
                                       const std::vector<double>& lambdas);

/// Largest and smallest ratio over [lo, hi], evaluated at both sides of every
/// jump of pi and at the interval ends.
struct RatioRange {
  double min_ratio = 0.0;
  double max_ratio = 0.0;
};
RatioRange ratio_range(const OrbitTable& table, double entropy, double lo, double hi);

std::string table_csv(const OrbitTable& table);
nlohmann::json counting_json(const std::vector<CountingRow>& rows);

}  // namespace billiard::counting
