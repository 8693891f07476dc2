#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include <json.hpp>

#include "billiard/geometry.hpp"
#include "billiard/symbolic.hpp"

namespace billiard::transfer {

using geometry::Scene;
using symbolic::Word;

/// Depth-N cylinder discretization of the symbolic flow: states are the
/// admissible words of length N, each carrying a return time.
class CylinderModel {
 public:
  CylinderModel(int k0, int depth, std::vector<double> tau, double theta);

  /// Every cylinder gets the same return time c.
  static CylinderModel constant(int k0, int depth, double c, double theta = 0.5);

  int k0() const { return k0_; }
  int depth() const { return depth_; }
  int size() const { return static_cast<int>(words_.size()); }
  double theta() const { return theta_; }
  const std::vector<Word>& words() const { return words_; }
  const std::vector<double>& tau() const { return tau_; }
  /// Indices of the preimage cylinders of word i, in lexicographic order.
  const std::vector<int>& preimages(int i) const { return preimages_[static_cast<std::size_t>(i)]; }
  int index_of(const Word& w) const;

 private:
  int k0_;
  int depth_;
  double theta_;
  std::vector<Word> words_;
  std::vector<double> tau_;
  std::vector<std::vector<int>> preimages_;
  std::map<std::vector<int>, int> index_;
};

/// Return times from the shadowing periodic orbits. theta defaults to the
/// largest single-bounce contraction factor over the period-2 orbits.
CylinderModel build_cylinder_model(const Scene& scene, int depth,
                                   std::optional<double> theta = std::nullopt);

/// Largest single-bounce contraction over the period-2 orbits.
double default_theta(const Scene& scene);

struct Potential {
  Vec f;             // real potential on cylinders
  double shift = 0;  // pressure shift P
  double a = 0;
  double b = 0;
};

/// Per-cylinder weights exp(f - (P + a) tau - i b tau).
CVec operator_weights(const CylinderModel& model, const Potential& g);

/// (L h)(w) = sum over preimages u of w of weight(u) h(u).
CVec apply_operator(const CylinderModel& model, const Potential& g, const CVec& h);

/// Dense matrix of the same operator (for small models and cross-checks).
CMat operator_matrix(const CylinderModel& model, const Potential& g);

struct LeadingEigen {
  double value = 0.0;
  double lower = 0.0;  // Collatz-Wielandt bounds
  double upper = 0.0;
  Vec vector;          // positive, unit max norm
  int iterations = 0;
};

/// Perron eigenvalue of the positive operator with b = 0.
LeadingEigen leading_eigenvalue(const CylinderModel& model, const Vec& f, double shift,
                                double a = 0.0, double tol = 1e-13, int max_iterations = 2000);

/// The P with leading eigenvalue 1 (bisection on log of the eigenvalue).
double pressure_root(const CylinderModel& model, const Vec& f, double tol = 1e-12);

/// Pressure root of f = 0.
double entropy(const CylinderModel& model);

struct LipNorm {
  double norm = 0.0;
  double sup = 0.0;
  double lip = 0.0;
  bool flagged = false;  // b = 0: norm is sup + raw Lipschitz constant
};

/// sup |h| + Lip(h) / |b| in the symbolic metric theta^(common prefix).
LipNorm lip_b_norm(const CylinderModel& model, const CVec& h, double b);

struct SpectralRadius {
  double rho = 0.0;
  int iterations = 0;
  bool converged = false;  // true when a simple dominant eigenvalue was resolved
};

/// Spectral radius of the twisted operator by normalized power iteration;
/// falls back to windowed growth rates when no simple dominant eigenvalue
/// emerges within the iteration cap.
SpectralRadius spectral_radius(const CylinderModel& model, const Potential& g,
                               int max_iterations = 2000, double tol = 1e-12);

struct ContractionPoint {
  double b = 0.0;
  double rho_seed_max = 0.0;
  double rho_spectral = 0.0;
};

/// For each b: max over seed functions of (|L^m h|_{Lip,b} / |h|_{Lip,b})^(1/m)
/// together with the spectral-radius estimate.
std::vector<ContractionPoint> contraction_curve(const CylinderModel& model, const Vec& f,
                                                double shift, double a,
                                                const std::vector<double>& b_list, int m,
                                                int trials, std::uint64_t seed = 1);

struct SpectralReport {
  double pressure = 0.0;
  double entropy = 0.0;
  double leading_eigenvalue = 0.0;
  double theta = 0.0;
  std::vector<ContractionPoint> contraction;
  std::vector<int> depths_used;
  std::vector<double> entropy_by_depth;
};

nlohmann::json spectral_json(const SpectralReport& r);
std::string contraction_csv(const std::vector<ContractionPoint>& curve);

}  // namespace billiard::transfer
