#pragma once

#include <string>
#include <vector>

#include "billiard/geometry.hpp"
#include "billiard/symbolic.hpp"

namespace billiard::orbits {

using geometry::Scene;
using symbolic::Word;

/// Closed billiard trajectory with a prescribed cyclic itinerary. Index j
/// refers to the reflection at points[j]; flight j runs from points[j] to
/// points[j+1] (cyclically) along directions[j].
struct PeriodicOrbit {
  Word word;
  std::vector<Vec> points;
  std::vector<Vec> normals;
  std::vector<Vec> directions;  // outgoing unit direction after reflection j
  std::vector<double> flight_lengths;
  std::vector<double> angles;  // angle between outgoing direction and normal
  double length = 0.0;
  bool primitive = true;
  int iterations = 0;
  double gradient_norm = 0.0;
  double max_reflection_residual = 0.0;

  int period() const { return word.size(); }
  double min_angle() const;
  double max_angle() const;
};

struct OrbitOptions {
  double tol = 1e-12;
  int max_iterations = 500;
};

/// Minimizes total cyclic length over boundary points (damped Newton in
/// tangent charts of the unit-sphere parametrization). Throws DomainError
/// for inadmissible words and SolverError on non-convergence or when the
/// result violates the reflection law or leaves its itinerary.
PeriodicOrbit find_periodic_orbit(const Scene& scene, const Word& word,
                                  const OrbitOptions& opt = {});

/// Reflection-law residual max_j |out_j - reflect(in_j, nu_j)|.
double reflection_residual(const PeriodicOrbit& orbit);

/// Total length of the closed polygon through the given boundary points.
double polygon_length(const std::vector<Vec>& points);

/// The cyclic word used to close a linear word: the word itself when it is
/// cyclically admissible, otherwise the word plus the smallest symbol that
/// differs from its last and first symbols and keeps the closure primitive.
Word closure_word(const Word& word, int k0);

/// Which flight of the closure orbit represents the cylinder. The middle
/// flight has correct symbols on both sides; the first flight sits next to
/// the wrap-around of the closure.
enum class ShadowAnchor { Middle, First };

/// Flight length of the periodic orbit of closure_word(word) at the anchor:
/// flight (N-1)/2 for Middle, flight 0 for First.
double cylinder_shadow_time(const Scene& scene, const Word& word,
                            ShadowAnchor anchor = ShadowAnchor::Middle);

/// Largest reflection angle over all primitive necklaces of period
/// 2..max_period.
double max_angle_estimate(const Scene& scene, int max_period);

/// CSV with header word,period,length,min_angle,max_angle,primitive.
std::string orbits_csv(const std::vector<PeriodicOrbit>& orbits);

}  // namespace billiard::orbits
