#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "billiard/geometry.hpp"
#include "billiard/orbits.hpp"

namespace billiard::harness {

struct RenderError : DomainError {
  using DomainError::DomainError;
};

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitVerification = 2;

/// Everything a command needs. Obstacle numbers (pair) and words are 1-based.
struct RunConfig {
  std::string scene = "std3";  // file path, or builtin "std3" / "std3-3d"
  std::string command;         // e.g. "geometry check", "orbit find"
  std::string output_dir = ".";
  std::uint64_t seed = 1;

  std::string word;
  std::vector<std::string> words;
  int max_period = 6;
  int periods = 1;
  std::string phi0 = "auto";  // "auto" or a number in radians
  std::optional<std::pair<int, int>> pair;
  double lambda = 1.0;
  int samples = 100;
  int depth = 5;
  std::vector<double> b_list = {0.0, 10.0, 50.0, 200.0};
  std::optional<double> theta;
  int power = 8;  // m in the contraction ratio
  int trials = 8;
  double lambda_max = 50.0;
  int entropy_depth = 6;
  double tol = 1e-12;

  /// Throws DomainError on inconsistent settings.
  void validate() const;
};

/// Known commands, in "group sub" form.
const std::vector<std::string>& command_names();

/// Overlays the keys of a JSON object onto `base`. Unknown keys and wrong
/// types throw DomainError.
RunConfig apply_json(RunConfig base, const nlohmann::json& j);
RunConfig load_config(const std::string& path, RunConfig base = {});
nlohmann::json config_to_json(const RunConfig& c);

/// Builtin names or a scene file.
geometry::Scene resolve_scene(const std::string& name);

/// Executes one command, writing reports into output_dir and a summary to
/// `out`. Diagnostics go to `err`. Returns 0, 1 (usage/config) or 2
/// (verification failure).
int run(const RunConfig& config, std::ostream& out, std::ostream& err);

/// SVG of a planar scene with orbit polylines and normals at reflections.
std::string render_svg(const geometry::Scene& scene,
                       const std::vector<orbits::PeriodicOrbit>& orbits);
void write_svg(const geometry::Scene& scene, const std::vector<orbits::PeriodicOrbit>& orbits,
               const std::string& path);

}  // namespace billiard::harness
