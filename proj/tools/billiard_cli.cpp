// Command-line front end: parses flags into a RunConfig and hands it to
// harness::run. A --config JSON file supplies defaults; explicit flags win.

#include <iostream>

#include <CLI11.hpp>

#include "billiard/harness.hpp"

using billiard::harness::RunConfig;

int main(int argc, char** argv) {
  CLI::App app{"Open billiard toolkit: orbits, curvature, certificates, transfer operators"};
  app.require_subcommand(1);
  app.fallthrough();

  RunConfig cli;
  std::string config_path;
  auto* o_scene = app.add_option("--scene", cli.scene, "Scene file, or builtin std3 / std3-3d");
  auto* o_out = app.add_option("--output-dir", cli.output_dir, "Directory for reports");
  auto* o_seed = app.add_option("--seed", cli.seed, "Seed for randomized sampling");
  app.add_option("--config", config_path, "JSON file with defaults for any flag");

  auto* geometry = app.add_subcommand("geometry", "Scene checks")->require_subcommand(1);
  geometry->add_subcommand("check", "No-eclipse certificate and scene constants");

  auto* orbit = app.add_subcommand("orbit", "Periodic orbits")->require_subcommand(1);
  auto* find = orbit->add_subcommand("find", "Periodic orbit for a cyclic word");
  auto* o_word_find = find->add_option("word", cli.word, "Cyclic word, 1-based, e.g. 1213");
  auto* o_tol_find = find->add_option("--tol", cli.tol, "Gradient tolerance");
  auto* table = orbit->add_subcommand("table", "All primitive orbits up to a period (CSV)");
  auto* o_mp_table = table->add_option("--max-period", cli.max_period);

  auto* curvature = app.add_subcommand("curvature", "Front curvature")->require_subcommand(1);
  auto* verify = curvature->add_subcommand("verify", "Contraction product against finite differences");
  auto* o_word_verify = verify->add_option("--word", cli.word);
  auto* o_periods = verify->add_option("--periods", cli.periods);

  auto* certify = app.add_subcommand("certify", "Certificates")->require_subcommand(1);
  auto* pinching = certify->add_subcommand("pinching", "Pinching exponents");
  auto* o_phi0 = pinching->add_option("--phi0", cli.phi0, "'auto' or angle in radians");
  auto* o_mp_pinch = pinching->add_option("--max-period", cli.max_period);
  auto* symplectic = certify->add_subcommand("symplectic", "Symplectic non-integrability check");
  std::vector<int> pair;
  auto* o_pair = symplectic->add_option("--pair", pair, "Two obstacle numbers")->expected(2);
  auto* o_lambda = symplectic->add_option("--lambda", cli.lambda);
  auto* o_samples = symplectic->add_option("--samples", cli.samples);

  auto* transfer = app.add_subcommand("transfer", "Transfer operators")->require_subcommand(1);
  auto* spectrum = transfer->add_subcommand("spectrum", "Entropy, pressure and contraction curve");
  auto* o_depth = spectrum->add_option("--depth", cli.depth);
  std::vector<double> b_list;
  auto* o_b = spectrum->add_option("--b", b_list, "Imaginary parts for the twisted operator");
  double theta = 0.0;
  auto* o_theta = spectrum->add_option("--theta", theta, "Symbolic metric base");
  auto* o_power = spectrum->add_option("--power", cli.power, "Iterate count m");
  auto* o_trials = spectrum->add_option("--trials", cli.trials, "Seed functions");

  auto* count = app.add_subcommand("count", "Orbit counting")->require_subcommand(1);
  auto* pi = count->add_subcommand("pi", "pi(lambda) against li(exp(h lambda))");
  auto* o_lmax = pi->add_option("--lambda-max", cli.lambda_max);
  auto* o_mp_pi = pi->add_option("--max-period", cli.max_period);
  auto* o_edepth = pi->add_option("--entropy-depth", cli.entropy_depth);

  auto* render = app.add_subcommand("render", "SVG of the scene and orbits");
  auto* o_words = render->add_option("--words", cli.words, "Cyclic words to draw");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : billiard::harness::kExitUsage;
  }

  RunConfig cfg;
  try {
    if (!config_path.empty()) cfg = billiard::harness::load_config(config_path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return billiard::harness::kExitUsage;
  }
  auto take = [](CLI::Option* opt, auto& dst, const auto& src) {
    if (opt->count() > 0) dst = src;
  };
  take(o_scene, cfg.scene, cli.scene);
  take(o_out, cfg.output_dir, cli.output_dir);
  take(o_seed, cfg.seed, cli.seed);
  take(o_word_find, cfg.word, cli.word);
  take(o_word_verify, cfg.word, cli.word);
  take(o_tol_find, cfg.tol, cli.tol);
  take(o_mp_table, cfg.max_period, cli.max_period);
  take(o_mp_pinch, cfg.max_period, cli.max_period);
  take(o_mp_pi, cfg.max_period, cli.max_period);
  take(o_periods, cfg.periods, cli.periods);
  take(o_phi0, cfg.phi0, cli.phi0);
  if (o_pair->count() > 0) cfg.pair = std::make_pair(pair[0], pair[1]);
  take(o_lambda, cfg.lambda, cli.lambda);
  take(o_samples, cfg.samples, cli.samples);
  take(o_depth, cfg.depth, cli.depth);
  take(o_b, cfg.b_list, b_list);
  if (o_theta->count() > 0) cfg.theta = theta;
  take(o_power, cfg.power, cli.power);
  take(o_trials, cfg.trials, cli.trials);
  take(o_lmax, cfg.lambda_max, cli.lambda_max);
  take(o_edepth, cfg.entropy_depth, cli.entropy_depth);
  take(o_words, cfg.words, cli.words);

  for (auto* group : app.get_subcommands()) {
    const auto subs = group->get_subcommands();
    cfg.command = subs.empty() ? group->get_name()
                               : group->get_name() + " " + subs.front()->get_name();
  }
  return billiard::harness::run(cfg, std::cout, std::cerr);
}
