#include "billiard/counting.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <queue>

#include "billiard/orbits.hpp"
#include "billiard/parallel.hpp"

namespace billiard::counting {

OrbitTable orbit_table(const Scene& scene, int max_period) {
  if (max_period < 2) throw DomainError("orbit_table: max_period must be at least 2");
  OrbitTable table;
  table.max_period = max_period;
  table.d0 = std::numeric_limits<double>::infinity();
  for (int i = 0; i < scene.size(); ++i)
    for (int j = i + 1; j < scene.size(); ++j)
      table.d0 = std::min(table.d0, geometry::pairwise_gap(scene[i], scene[j]));

  std::vector<Word> words;
  for (int p = 2; p <= max_period; ++p)
    for (const auto& nk : symbolic::primitive_necklaces(scene.size(), p))
      words.push_back(nk.representative);
  std::vector<double> lengths(words.size(), 0.0);
  std::vector<std::string> errors(words.size());
  parallel_for(static_cast<int>(words.size()), [&](int i) {
    const auto k = static_cast<std::size_t>(i);
    try {
      lengths[k] = orbits::find_periodic_orbit(scene, words[k]).length;
    } catch (const std::exception& e) {
      errors[k] = words[k].str() + ": " + e.what();
    }
  });
  for (std::size_t k = 0; k < words.size(); ++k) {
    if (!errors[k].empty()) {
      table.failures.push_back(errors[k]);
      continue;
    }
    table.entries.push_back(OrbitEntry{words[k], words[k].size(), lengths[k]});
  }
  std::stable_sort(table.entries.begin(), table.entries.end(),
                   [](const OrbitEntry& a, const OrbitEntry& b) { return a.length < b.length; });
  table.complete = table.failures.empty();
  return table;
}

namespace {

void require_within_horizon(const OrbitTable& table, double lam) {
  if (!table.complete)
    throw IncompletenessError("orbit table is incomplete (" +
                              std::to_string(table.failures.size()) + " failed solves)");
  if (lam > table.horizon())
    throw IncompletenessError("length " + std::to_string(lam) +
                              " exceeds the completeness horizon " +
                              std::to_string(table.horizon()));
}

// Entries with length <= lam (with slack), relying on the sorted order.
std::size_t count_upto(const OrbitTable& table, double lam) {
  const auto it = std::upper_bound(
      table.entries.begin(), table.entries.end(), lam + kLengthSlack,
      [](double v, const OrbitEntry& e) { return v < e.length; });
  return static_cast<std::size_t>(it - table.entries.begin());
}

// 15-point Kronrod rule with embedded 7-point Gauss rule.
constexpr double kXgk[8] = {0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
                            0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
                            0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
                            0.207784955007898467600689403773245, 0.0};
constexpr double kWgk[8] = {0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
                            0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
                            0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
                            0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr double kWg[4] = {0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
                           0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Piece {
  double a, b, value, error;
  bool operator<(const Piece& o) const { return error < o.error; }
};

template <typename F>
Piece kronrod(F&& f, double a, double b) {
  const double c = 0.5 * (a + b), h = 0.5 * (b - a);
  const double fc = f(c);
  double k = fc * kWgk[7];
  double g = fc * kWg[3];
  for (int i = 0; i < 7; ++i) {
    const double x = h * kXgk[i];
    const double s = f(c - x) + f(c + x);
    k += kWgk[i] * s;
    if (i % 2 == 1) g += kWg[i / 2] * s;
  }
  return Piece{a, b, k * h, std::abs((k - g) * h)};
}

template <typename F>
double integrate(F&& f, double a, double b, double abs_tol) {
  std::priority_queue<Piece> heap;
  heap.push(kronrod(f, a, b));
  double total = heap.top().value, err = heap.top().error;
  for (int it = 0; it < 20000; ++it) {
    if (err <= std::max(abs_tol, 1e-15 * std::abs(total))) break;
    const Piece p = heap.top();
    heap.pop();
    const double m = 0.5 * (p.a + p.b);
    const Piece l = kronrod(f, p.a, m), r = kronrod(f, m, p.b);
    total += l.value + r.value - p.value;
    err += l.error + r.error - p.error;
    heap.push(l);
    heap.push(r);
  }
  // Re-sum to shed the drift of incremental updates.
  double sum = 0.0;
  while (!heap.empty()) {
    sum += heap.top().value;
    heap.pop();
  }
  return sum;
}

}  // namespace

long long pi_counting(const OrbitTable& table, double lam) {
  require_within_horizon(table, lam);
  return static_cast<long long>(count_upto(table, lam));
}

double li(double x) {
  if (!(x >= 2.0)) throw DomainError("li: argument must be at least 2");
  if (x == 2.0) return 0.0;
  // u = e^t turns du / ln u into e^t / t dt.
  return integrate([](double t) { return std::exp(t) / t; }, std::log(2.0), std::log(x), 1e-11);
}

Complex zeta_partial(const OrbitTable& table, Complex s, double length_cutoff) {
  require_within_horizon(table, length_cutoff);
  Complex prod = 1.0;
  for (std::size_t k = 0, n = count_upto(table, length_cutoff); k < n; ++k) {
    const Complex denom = 1.0 - std::exp(-s * table.entries[k].length);
    if (std::abs(denom) < 1e-14)
      throw PoleProximityError("zeta_partial: factor of orbit " + table.entries[k].necklace.str() +
                               " is at a pole");
    prod /= denom;
  }
  return prod;
}

double log_zeta_partial(const OrbitTable& table, double s, double length_cutoff) {
  require_within_horizon(table, length_cutoff);
  if (!(s > 0.0)) throw DomainError("log_zeta_partial: s must be positive");
  double sum = 0.0;
  for (std::size_t k = 0, n = count_upto(table, length_cutoff); k < n; ++k)
    sum -= std::log1p(-std::exp(-s * table.entries[k].length));
  return sum;
}

double zeta_crossover(const OrbitTable& table, int m_min) {
  if (!table.complete) throw IncompletenessError("zeta_crossover: orbit table is incomplete");
  const int m_max = table.max_period;
  if (m_min < 2 || m_max - m_min < 2) throw DomainError("zeta_crossover: need at least 3 layers");
  // Periodic-point traces: every primitive orbit of period d | m contributes
  // d e^{-s (m/d) l}.
  auto slope = [&](double s) {
    std::vector<double> xs, ys;
    for (int m = m_min; m <= m_max; ++m) {
      double z = 0.0;
      for (const auto& e : table.entries)
        if (m % e.period == 0) z += e.period * std::exp(-s * (m / e.period) * e.length);
      xs.push_back(m);
      ys.push_back(std::log(z));
    }
    const double n = static_cast<double>(xs.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t k = 0; k < xs.size(); ++k) {
      sx += xs[k];
      sy += ys[k];
      sxx += xs[k] * xs[k];
      sxy += xs[k] * ys[k];
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
  };
  double lo = 0.0, hi = 1.0;
  if (slope(lo) <= 0.0) throw SolverError("zeta_crossover: layer sums do not grow at s = 0");
  while (slope(hi) > 0.0) {
    hi *= 2.0;
    if (hi > 1e6) throw SolverError("zeta_crossover: cannot bracket");
  }
  for (int k = 0; k < 100 && hi - lo > 1e-13; ++k) {
    const double mid = 0.5 * (lo + hi);
    (slope(mid) > 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

std::vector<CountingRow> counting_rows(const OrbitTable& table, double entropy,
                                       const std::vector<double>& lambdas) {
  std::vector<CountingRow> rows;
  for (double lam : lambdas) {
    CountingRow r;
    r.lambda = lam;
    r.pi = pi_counting(table, lam);
    r.li_value = li(std::exp(entropy * lam));
    r.ratio = r.li_value > 0.0 ? static_cast<double>(r.pi) / r.li_value
                               : std::numeric_limits<double>::infinity();
    rows.push_back(r);
  }
  return rows;
}

RatioRange ratio_range(const OrbitTable& table, double entropy, double lo, double hi) {
  require_within_horizon(table, hi);
  RatioRange out{std::numeric_limits<double>::infinity(), 0.0};
  auto ratio = [&](double lam, std::size_t count) {
    return static_cast<double>(count) / li(std::exp(entropy * lam));
  };
  auto visit = [&](double r) {
    out.min_ratio = std::min(out.min_ratio, r);
    out.max_ratio = std::max(out.max_ratio, r);
  };
  visit(ratio(lo, count_upto(table, lo)));
  visit(ratio(hi, count_upto(table, hi)));
  for (std::size_t k = 0; k < table.entries.size(); ++k) {
    const double l = table.entries[k].length;
    if (l <= lo || l > hi) continue;
    // Just before the jump: only strictly shorter orbits are counted.
    std::size_t before = k;
    while (before > 0 && table.entries[before - 1].length >= l - kLengthSlack) --before;
    visit(ratio(l, before));
    visit(ratio(l, count_upto(table, l)));
  }
  return out;
}

std::string table_csv(const OrbitTable& table) {
  std::string out = "word,period,length\n";
  char buf[128];
  for (const auto& e : table.entries) {
    std::snprintf(buf, sizeof buf, "%s,%d,%.15g\n", e.necklace.str().c_str(), e.period, e.length);
    out += buf;
  }
  return out;
}

nlohmann::json counting_json(const std::vector<CountingRow>& rows) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& r : rows)
    out.push_back({{"lambda", r.lambda}, {"pi", r.pi}, {"li_value", r.li_value}, {"ratio", r.ratio}});
  return out;
}

}  // namespace billiard::counting
