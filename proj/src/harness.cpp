#include "billiard/harness.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <limits>

#include "billiard/certify.hpp"
#include "billiard/counting.hpp"
#include "billiard/curvature.hpp"
#include "billiard/parallel.hpp"
#include "billiard/scene_io.hpp"
#include "billiard/transfer.hpp"

namespace billiard::harness {

using nlohmann::json;

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names = {
      "geometry check",   "orbit find",         "orbit table",       "curvature verify",
      "certify pinching", "certify symplectic", "transfer spectrum", "count pi",
      "render"};
  return names;
}

void RunConfig::validate() const {
  const auto& names = command_names();
  if (std::find(names.begin(), names.end(), command) == names.end())
    throw DomainError("unknown command '" + command + "'");
  if (output_dir.empty()) throw DomainError("output_dir must not be empty");
  if (max_period < 2) throw DomainError("max_period must be at least 2");
  if (periods < 1) throw DomainError("periods must be positive");
  if (!(lambda > 0.0)) throw DomainError("lambda must be positive");
  if (samples < 1) throw DomainError("samples must be positive");
  if (depth < 1) throw DomainError("depth must be positive");
  if (power < 1) throw DomainError("power must be positive");
  if (trials < 1) throw DomainError("trials must be positive");
  if (!(lambda_max > 0.0)) throw DomainError("lambda_max must be positive");
  if (entropy_depth < 1) throw DomainError("entropy_depth must be positive");
  if (!(tol > 0.0)) throw DomainError("tol must be positive");
  if (theta && !(*theta > 0.0 && *theta < 1.0)) throw DomainError("theta must lie in (0, 1)");
  if (phi0 != "auto") {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(phi0, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != phi0.size() || !(v >= 0.0 && v < kPi / 2.0))
      throw DomainError("phi0 must be 'auto' or a number in [0, pi/2)");
  }
  if (command == "orbit find" && word.empty()) throw DomainError("orbit find needs a word");
  if (command == "curvature verify" && word.empty())
    throw DomainError("curvature verify needs --word");
}

RunConfig apply_json(RunConfig c, const json& j) {
  if (!j.is_object()) throw DomainError("config: top level must be an object");
  auto num = [](const json& v, const std::string& key) {
    if (!v.is_number()) throw DomainError("config: '" + key + "' must be a number");
    return v.get<double>();
  };
  auto integer = [](const json& v, const std::string& key) {
    if (!v.is_number_integer()) throw DomainError("config: '" + key + "' must be an integer");
    return v.get<long long>();
  };
  auto str = [](const json& v, const std::string& key) {
    if (!v.is_string()) throw DomainError("config: '" + key + "' must be a string");
    return v.get<std::string>();
  };
  for (const auto& [key, v] : j.items()) {
    if (key == "scene") c.scene = str(v, key);
    else if (key == "command") c.command = str(v, key);
    else if (key == "output_dir") c.output_dir = str(v, key);
    else if (key == "seed") c.seed = static_cast<std::uint64_t>(integer(v, key));
    else if (key == "word") c.word = str(v, key);
    else if (key == "words") {
      if (!v.is_array()) throw DomainError("config: 'words' must be an array");
      c.words.clear();
      for (const auto& w : v) c.words.push_back(str(w, key));
    } else if (key == "max_period") c.max_period = static_cast<int>(integer(v, key));
    else if (key == "periods") c.periods = static_cast<int>(integer(v, key));
    else if (key == "phi0") c.phi0 = v.is_string() ? v.get<std::string>() : std::to_string(num(v, key));
    else if (key == "pair") {
      if (v.is_null()) {
        c.pair.reset();
        continue;
      }
      if (!v.is_array() || v.size() != 2) throw DomainError("config: 'pair' must be [i, j]");
      c.pair = std::make_pair(static_cast<int>(integer(v[0], key)), static_cast<int>(integer(v[1], key)));
    } else if (key == "lambda") c.lambda = num(v, key);
    else if (key == "samples") c.samples = static_cast<int>(integer(v, key));
    else if (key == "depth") c.depth = static_cast<int>(integer(v, key));
    else if (key == "b") {
      if (!v.is_array()) throw DomainError("config: 'b' must be an array");
      c.b_list.clear();
      for (const auto& b : v) c.b_list.push_back(num(b, key));
    } else if (key == "theta") {
      if (v.is_null()) c.theta.reset();
      else c.theta = num(v, key);
    }
    else if (key == "power") c.power = static_cast<int>(integer(v, key));
    else if (key == "trials") c.trials = static_cast<int>(integer(v, key));
    else if (key == "lambda_max") c.lambda_max = num(v, key);
    else if (key == "entropy_depth") c.entropy_depth = static_cast<int>(integer(v, key));
    else if (key == "tol") c.tol = num(v, key);
    else throw DomainError("config: unknown key '" + key + "'");
  }
  return c;
}

RunConfig load_config(const std::string& path, RunConfig base) {
  std::ifstream in(path);
  if (!in) throw DomainError("config: cannot open '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw DomainError(std::string("config: parse error: ") + e.what());
  }
  return apply_json(std::move(base), j);
}

json config_to_json(const RunConfig& c) {
  json j = {{"scene", c.scene},
            {"command", c.command},
            {"output_dir", c.output_dir},
            {"seed", c.seed},
            {"word", c.word},
            {"words", c.words},
            {"max_period", c.max_period},
            {"periods", c.periods},
            {"phi0", c.phi0},
            {"lambda", c.lambda},
            {"samples", c.samples},
            {"depth", c.depth},
            {"b", c.b_list},
            {"power", c.power},
            {"trials", c.trials},
            {"lambda_max", c.lambda_max},
            {"entropy_depth", c.entropy_depth},
            {"tol", c.tol}};
  j["pair"] = c.pair ? json{c.pair->first, c.pair->second} : json(nullptr);
  j["theta"] = c.theta ? json(*c.theta) : json(nullptr);
  return j;
}

geometry::Scene resolve_scene(const std::string& name) {
  if (name == "std3") return geometry::standard_scene();
  if (name == "std3-3d") return geometry::standard_scene_3d();
  return geometry::load_scene(name);
}

namespace {

json vec_json(const Vec& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

symbolic::Word parse_word(const std::string& text, const geometry::Scene& scene) {
  symbolic::Word w = symbolic::Word::parse(text, true);
  for (int s : w.symbols)
    if (s >= scene.size())
      throw DomainError("word " + text + ": symbol exceeds obstacle count " +
                        std::to_string(scene.size()));
  return w;
}

json orbit_json(const orbits::PeriodicOrbit& o) {
  json pts = json::array(), dirs = json::array(), nrm = json::array();
  for (std::size_t j = 0; j < o.points.size(); ++j) {
    pts.push_back(vec_json(o.points[j]));
    dirs.push_back(vec_json(o.directions[j]));
    nrm.push_back(vec_json(o.normals[j]));
  }
  return {{"word", o.word.str()},
          {"period", o.period()},
          {"length", o.length},
          {"primitive", o.primitive},
          {"points", pts},
          {"directions", dirs},
          {"normals", nrm},
          {"flight_lengths", o.flight_lengths},
          {"angles", o.angles},
          {"reflection_residual", o.max_reflection_residual},
          {"gradient_norm", o.gradient_norm},
          {"iterations", o.iterations}};
}

struct Outcome {
  json report;
  bool verified = true;
  std::vector<std::pair<std::string, std::string>> files;  // name, contents
};

double smallest_gap(const geometry::Scene& scene) {
  double d0 = std::numeric_limits<double>::infinity();
  for (int i = 0; i < scene.size(); ++i)
    for (int j = i + 1; j < scene.size(); ++j)
      d0 = std::min(d0, geometry::pairwise_gap(scene[i], scene[j]));
  return d0;
}

Outcome geometry_check(const geometry::Scene& scene) {
  Outcome out;
  const auto cert = geometry::check_no_eclipse(scene);
  const auto kb = geometry::curvature_bounds(scene);
  json gaps = json::array();
  double d0 = std::numeric_limits<double>::infinity(), dmax = 0.0;
  for (int i = 0; i < scene.size(); ++i)
    for (int j = i + 1; j < scene.size(); ++j) {
      const double g = geometry::pairwise_gap(scene[i], scene[j]);
      gaps.push_back({{"pair", {i + 1, j + 1}}, {"gap", g}});
      d0 = std::min(d0, g);
      dmax = std::max(dmax, g);
    }
  out.report = {{"holds", cert.holds},
                {"margin", cert.min_margin},
                {"d0", d0},
                {"a", dmax - d0},
                {"kappa_min", kb.kappa_min},
                {"kappa_max", kb.kappa_max},
                {"kappa_sampled", kb.sampled},
                {"gaps", gaps}};
  out.report["witness"] =
      cert.witness ? json{{"pair", {cert.witness->i + 1, cert.witness->j + 1}},
                          {"blocker", cert.witness->blocker + 1}}
                   : json(nullptr);
  out.verified = cert.holds;
  return out;
}

std::vector<orbits::PeriodicOrbit> solve_necklaces(const geometry::Scene& scene, int max_period,
                                                   std::vector<std::string>& failures) {
  std::vector<symbolic::Word> words;
  for (int p = 2; p <= max_period; ++p)
    for (const auto& nk : symbolic::primitive_necklaces(scene.size(), p))
      words.push_back(nk.representative);
  std::vector<std::optional<orbits::PeriodicOrbit>> solved(words.size());
  std::vector<std::string> errors(words.size());
  parallel_for(static_cast<int>(words.size()), [&](int i) {
    const auto k = static_cast<std::size_t>(i);
    try {
      solved[k] = orbits::find_periodic_orbit(scene, words[k]);
    } catch (const std::exception& e) {
      errors[k] = words[k].str() + ": " + e.what();
    }
  });
  std::vector<orbits::PeriodicOrbit> out;
  for (std::size_t k = 0; k < words.size(); ++k) {
    if (solved[k]) out.push_back(std::move(*solved[k]));
    else failures.push_back(errors[k]);
  }
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.length < b.length; });
  return out;
}

Outcome orbit_table_cmd(const geometry::Scene& scene, const RunConfig& c) {
  Outcome out;
  std::vector<std::string> failures;
  const auto orbits = solve_necklaces(scene, c.max_period, failures);
  out.report = {{"max_period", c.max_period},
                {"count", orbits.size()},
                {"complete", failures.empty()},
                {"failures", failures}};
  if (!orbits.empty()) {
    out.report["shortest"] = orbits.front().length;
    out.report["longest"] = orbits.back().length;
  }
  out.files.emplace_back("orbit_table.csv", orbits::orbits_csv(orbits));
  out.verified = failures.empty();
  return out;
}

Outcome curvature_verify(const geometry::Scene& scene, const RunConfig& c) {
  Outcome out;
  orbits::OrbitOptions opt;
  opt.tol = c.tol;
  const auto orbit = orbits::find_periodic_orbit(scene, parse_word(c.word, scene), opt);
  out.report = curvature::expansion_report_json(scene, orbit, c.periods, true);
  bool bounds = true;
  for (const auto& b : out.report["bounces"]) {
    for (const auto& e : b["eigenvalues"]) {
      const double v = e.get<double>();
      if (v < b["lower_bound"].get<double>() - 1e-9 || v > b["upper_bound"].get<double>() + 1e-9)
        bounds = false;
    }
  }
  const bool fd_ok = std::abs(out.report["fd_ratio"].get<double>() - 1.0) <= 1e-4;
  out.report["bounds_hold"] = bounds;
  out.report["fd_agrees"] = fd_ok;
  out.verified = bounds && fd_ok;
  return out;
}

Outcome certify_pinching(const geometry::Scene& scene, const RunConfig& c) {
  Outcome out;
  double phi0 = 0.0;
  if (c.phi0 == "auto") phi0 = orbits::max_angle_estimate(scene, c.max_period);
  else phi0 = std::stod(c.phi0);
  const auto constants = geometry::scene_constants(scene, phi0);
  const auto rep = certify::pinching_exponents(constants);
  out.report = certify::pinching_json(constants, rep);
  out.report["phi0_source"] = c.phi0 == "auto" ? "max reflection angle over primitive orbits"
                                               : "user";
  out.report["phi0_max_period"] = c.max_period;
  const bool no_eclipse = geometry::check_no_eclipse(scene).holds;
  out.report["no_eclipse"] = no_eclipse;
  out.verified = rep.margin > 0.0 && rep.pinching_inequality && no_eclipse;
  return out;
}

Outcome certify_symplectic(const geometry::Scene& scene, const RunConfig& c) {
  Outcome out;
  std::pair<int, int> pr = certify::closest_pair(scene);
  if (c.pair) {
    pr = {c.pair->first - 1, c.pair->second - 1};
    if (pr.first < 0 || pr.second < 0 || pr.first >= scene.size() || pr.second >= scene.size() ||
        pr.first == pr.second)
      throw DomainError("pair must name two distinct obstacles in 1.." + std::to_string(scene.size()));
  }
  const auto rep =
      certify::verify_nonintegrability(scene, pr.first, pr.second, c.lambda, c.samples, c.seed);
  out.report = certify::symplectic_json(rep);
  const double gap = geometry::pairwise_gap(scene[pr.first], scene[pr.second]);
  std::vector<double> lams;
  for (int k = 1; k <= 9; ++k) lams.push_back(0.05 * k * gap);
  const auto eigs = certify::min_eig_scan(scene, pr.first, pr.second, lams);
  json scan = json::array();
  for (std::size_t k = 0; k < lams.size(); ++k)
    scan.push_back({{"lambda", lams[k]}, {"min_eig_P", eigs[k]}});
  out.report["lambda_scan"] = scan;
  out.verified = rep.verified();
  return out;
}

Outcome transfer_spectrum(const geometry::Scene& scene, const RunConfig& c) {
  Outcome out;
  const double theta = c.theta ? *c.theta : transfer::default_theta(scene);
  transfer::SpectralReport rep;
  rep.theta = theta;
  for (int n = 1; n <= c.depth; ++n) {
    const auto m = transfer::build_cylinder_model(scene, n, theta);
    rep.depths_used.push_back(n);
    rep.entropy_by_depth.push_back(transfer::entropy(m));
  }
  const auto model = transfer::build_cylinder_model(scene, c.depth, theta);
  const Vec f = Vec::Zero(model.size());
  rep.entropy = rep.entropy_by_depth.back();
  rep.pressure = transfer::pressure_root(model, f);
  rep.leading_eigenvalue = transfer::leading_eigenvalue(model, f, rep.pressure).value;
  rep.contraction =
      transfer::contraction_curve(model, f, rep.pressure, 0.0, c.b_list, c.power, c.trials, c.seed);
  out.report = transfer::spectral_json(rep);
  out.report["depth"] = c.depth;
  out.report["words"] = model.size();
  out.files.emplace_back("transfer_contraction.csv", transfer::contraction_csv(rep.contraction));
  out.verified = std::abs(rep.leading_eigenvalue - 1.0) <= 1e-8;
  return out;
}

Outcome count_pi(const geometry::Scene& scene, const RunConfig& c) {
  Outcome out;
  const double d0 = smallest_gap(scene);
  const int needed = static_cast<int>(std::ceil(c.lambda_max / d0 - 1.0 - 1e-12));
  const int max_period = std::max(c.max_period, needed);
  if (symbolic::admissible_count(scene.size(), std::min(max_period, 40), true) / max_period > 2000000)
    throw DomainError("count pi: lambda_max needs period " + std::to_string(max_period) +
                      ", too many orbits");
  const auto table = counting::orbit_table(scene, max_period);
  if (!table.complete) {
    out.report = {{"complete", false}, {"failures", table.failures}};
    out.verified = false;
    return out;
  }
  const double h = transfer::entropy(transfer::build_cylinder_model(scene, c.entropy_depth, c.theta));
  const double lo = std::max(2.0 * d0, std::log(2.0) / h);
  std::vector<double> grid;
  for (double lam = lo; lam <= c.lambda_max + 1e-12; lam += 1.0) grid.push_back(lam);
  const auto rows = counting::counting_rows(table, h, grid);
  const auto range = counting::ratio_range(table, h, lo, c.lambda_max);
  out.report = {{"max_period", max_period},
                {"horizon", table.horizon()},
                {"orbits", table.entries.size()},
                {"entropy", h},
                {"entropy_depth", c.entropy_depth},
                {"zeta_crossover", counting::zeta_crossover(table)},
                {"ratio_min", range.min_ratio},
                {"ratio_max", range.max_ratio},
                {"rows", counting::counting_json(rows)}};
  out.files.emplace_back("count_table.csv", counting::table_csv(table));
  return out;
}

Outcome render_cmd(const geometry::Scene& scene, const RunConfig& c) {
  Outcome out;
  std::vector<orbits::PeriodicOrbit> list;
  for (const auto& w : c.words) list.push_back(orbits::find_periodic_orbit(scene, parse_word(w, scene)));
  out.files.emplace_back("render.svg", render_svg(scene, list));
  json words = json::array();
  for (const auto& o : list) words.push_back({{"word", o.word.str()}, {"length", o.length}});
  out.report = {{"orbits", words}, {"file", "render.svg"}};
  return out;
}

Outcome dispatch(const geometry::Scene& scene, const RunConfig& c) {
  if (c.command == "geometry check") return geometry_check(scene);
  if (c.command == "orbit find") {
    orbits::OrbitOptions opt;
    opt.tol = c.tol;
    Outcome out;
    out.report = orbit_json(orbits::find_periodic_orbit(scene, parse_word(c.word, scene), opt));
    return out;
  }
  if (c.command == "orbit table") return orbit_table_cmd(scene, c);
  if (c.command == "curvature verify") return curvature_verify(scene, c);
  if (c.command == "certify pinching") return certify_pinching(scene, c);
  if (c.command == "certify symplectic") return certify_symplectic(scene, c);
  if (c.command == "transfer spectrum") return transfer_spectrum(scene, c);
  if (c.command == "count pi") return count_pi(scene, c);
  if (c.command == "render") return render_cmd(scene, c);
  throw DomainError("unknown command '" + c.command + "'");
}

std::string file_stem(const std::string& command) {
  std::string s = command;
  std::replace(s.begin(), s.end(), ' ', '_');
  return s;
}

void write_file(const std::filesystem::path& path, const std::string& contents) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw DomainError("cannot write '" + path.string() + "'");
  f << contents;
}

}  // namespace

int run(const RunConfig& config, std::ostream& out, std::ostream& err) {
  try {
    config.validate();
    const geometry::Scene scene = resolve_scene(config.scene);
    const Outcome res = dispatch(scene, config);
    json params = config_to_json(config);
    params.erase("output_dir");  // location only, not part of the computation
    const json doc = {{"command", config.command},
                      {"scene_hash", geometry::scene_hash(scene)},
                      {"scene", geometry::scene_to_json(scene)},
                      {"parameters", params},
                      {"status", res.verified ? "ok" : "verification_failed"},
                      {"report", res.report}};
    const std::filesystem::path dir(config.output_dir);
    std::filesystem::create_directories(dir);
    write_file(dir / (file_stem(config.command) + ".json"), doc.dump(2) + "\n");
    for (const auto& [name, contents] : res.files) write_file(dir / name, contents);
    out << doc.dump(2) << "\n";
    if (!res.verified) {
      err << "verification failed: " << config.command << "\n";
      return kExitVerification;
    }
    return kExitOk;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const IncompletenessError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const json::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "verification failed: " << e.what() << "\n";
    return kExitVerification;
  }
}

}  // namespace billiard::harness
