#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>

#include <doctest.h>

#include "billiard/harness.hpp"
#include "billiard/orbits.hpp"

using namespace billiard;
using namespace billiard::harness;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("billiard_harness_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

json read_json(const fs::path& p) { return json::parse(slurp(p)); }

struct Result {
  int code;
  std::string out, err;
};

Result run_config(const RunConfig& c) {
  std::ostringstream out, err;
  const int code = run(c, out, err);
  return {code, out.str(), err.str()};
}

RunConfig config(const std::string& command, const fs::path& dir) {
  RunConfig c;
  c.command = command;
  c.output_dir = dir.string();
  return c;
}

int cli(const std::string& args) {
  const std::string cmd = std::string(BILLIARD_CLI) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::size_t count(const std::string& text, const std::string& needle) {
  std::size_t n = 0;
  for (auto pos = text.find(needle); pos != std::string::npos; pos = text.find(needle, pos + 1)) ++n;
  return n;
}

// A small, fast configuration for each command.
std::vector<RunConfig> quick_configs(const fs::path& dir) {
  std::vector<RunConfig> out;
  out.push_back(config("geometry check", dir));
  auto find = config("orbit find", dir);
  find.word = "1213";
  out.push_back(find);
  auto table = config("orbit table", dir);
  table.max_period = 5;
  out.push_back(table);
  auto curv = config("curvature verify", dir);
  curv.word = "123";
  out.push_back(curv);
  auto pinch = config("certify pinching", dir);
  pinch.max_period = 4;
  out.push_back(pinch);
  auto sym = config("certify symplectic", dir);
  sym.samples = 20;
  out.push_back(sym);
  auto spec = config("transfer spectrum", dir);
  spec.depth = 4;
  out.push_back(spec);
  auto pi = config("count pi", dir);
  pi.lambda_max = 30;
  pi.entropy_depth = 4;
  out.push_back(pi);
  auto render = config("render", dir);
  render.words = {"12", "123"};
  out.push_back(render);
  return out;
}

}  // namespace

TEST_CASE("geometry check report") {
  const auto dir = scratch("geometry");
  const auto r = run_config(config("geometry check", dir));
  CHECK(r.code == kExitOk);
  const json j = read_json(dir / "geometry_check.json");
  CHECK(j.at("status") == "ok");
  CHECK(j.at("report").at("holds").get<bool>());
  CHECK(j.at("report").at("margin").get<double>() == doctest::Approx(3 * std::sqrt(3.0) - 2));
  CHECK(j.at("scene_hash").get<std::string>().size() == 16);
  CHECK(j.at("parameters").at("seed") == 1);
  CHECK_FALSE(j.at("parameters").contains("output_dir"));
  CHECK(json::parse(r.out) == j);
}

TEST_CASE("pinching certificate with an empirical angle bound") {
  const auto dir = scratch("pinching");
  auto c = config("certify pinching", dir);
  c.phi0 = "auto";
  c.max_period = 6;
  CHECK(run_config(c).code == kExitOk);
  const json rep = read_json(dir / "certify_pinching.json").at("report");
  CHECK(rep.at("margin").get<double>() > 0);
  CHECK(rep.at("constants").at("phi0").get<double>() >= kPi / 6);

  c.phi0 = "1.2";
  const auto bad = run_config(c);
  CHECK(bad.code == kExitVerification);
  CHECK(read_json(dir / "certify_pinching.json").at("status") == "verification_failed");

  c.phi0 = "two";
  CHECK(run_config(c).code == kExitUsage);
  c.phi0 = "1.6";
  CHECK(run_config(c).code == kExitUsage);
}

TEST_CASE("every command succeeds on the standard scene and writes its artifacts") {
  const auto dir = scratch("all");
  for (const auto& c : quick_configs(dir)) {
    CAPTURE(c.command);
    const auto r = run_config(c);
    CHECK(r.code == kExitOk);
    std::string stem = c.command;
    std::replace(stem.begin(), stem.end(), ' ', '_');
    const json j = read_json(dir / (stem + ".json"));
    CHECK(j.at("command") == c.command);
    CHECK(j.contains("scene_hash"));
    CHECK(j.contains("scene"));
    CHECK(j.contains("parameters"));
    CHECK(j.at("status") == "ok");
  }
  CHECK(fs::exists(dir / "orbit_table.csv"));
  CHECK(fs::exists(dir / "transfer_contraction.csv"));
  CHECK(fs::exists(dir / "count_table.csv"));
  CHECK(fs::exists(dir / "render.svg"));
}

TEST_CASE("reports are byte-identical across runs") {
  const auto a = scratch("det_a");
  const auto b = scratch("det_b");
  for (const auto& c : quick_configs(a)) REQUIRE(run_config(c).code == kExitOk);
  // Second pass single-threaded, so scheduling cannot leak into the output.
  setenv("BILLIARD_THREADS", "1", 1);
  for (const auto& c : quick_configs(b)) REQUIRE(run_config(c).code == kExitOk);
  unsetenv("BILLIARD_THREADS");
  std::size_t files = 0;
  for (const auto& entry : fs::directory_iterator(a)) {
    CAPTURE(entry.path().filename().string());
    const fs::path twin = b / entry.path().filename();
    REQUIRE(fs::exists(twin));
    CHECK(slurp(entry.path()) == slurp(twin));
    ++files;
  }
  CHECK(files == 13);
}

TEST_CASE("different seeds change sampled reports only") {
  const auto a = scratch("seed_a");
  const auto b = scratch("seed_b");
  // Tangent vectors in the planar scene are +-1, so only the 3D scene exercises the sampler.
  auto c = config("certify symplectic", a);
  c.scene = "std3-3d";
  c.samples = 10;
  REQUIRE(run_config(c).code == kExitOk);
  c.output_dir = b.string();
  c.seed = 2;
  REQUIRE(run_config(c).code == kExitOk);
  const json ja = read_json(a / "certify_symplectic.json").at("report");
  const json jb = read_json(b / "certify_symplectic.json").at("report");
  CHECK(ja.at("P") == jb.at("P"));
  CHECK(ja.at("mu_measured") != jb.at("mu_measured"));
}

TEST_CASE("usage and configuration errors exit with 1") {
  const auto dir = scratch("errors");
  const fs::path bad = dir / "bad.json";
  std::ofstream(bad) << "{\"dimension\": 2, \"obstacles\": [";
  auto c = config("geometry check", dir);
  c.scene = bad.string();
  const auto r = run_config(c);
  CHECK(r.code == kExitUsage);
  CHECK(r.err.find("parse") != std::string::npos);

  c.scene = (dir / "missing.json").string();
  CHECK(run_config(c).code == kExitUsage);

  auto find = config("orbit find", dir);
  find.word = "11";
  CHECK(run_config(find).code == kExitUsage);
  find.word = "14";
  CHECK(run_config(find).code == kExitUsage);

  CHECK(run_config(config("orbit dance", dir)).code == kExitUsage);

  auto sym = config("certify symplectic", dir);
  sym.pair = std::make_pair(1, 1);
  CHECK(run_config(sym).code == kExitUsage);
  sym.pair = std::make_pair(1, 2);
  sym.lambda = 3.0;
  CHECK(run_config(sym).code == kExitUsage);

  auto pi = config("count pi", dir);
  pi.lambda_max = 1.0;
  CHECK(run_config(pi).code == kExitUsage);

  auto t = config("transfer spectrum", dir);
  t.tol = -1;
  CHECK(run_config(t).code == kExitUsage);

  auto render3 = config("render", dir);
  render3.scene = "std3-3d";
  CHECK(run_config(render3).code == kExitUsage);
}

TEST_CASE("config files overlay defaults") {
  const json j = {{"depth", 3}, {"b", {1.0, 2.0}}, {"scene", "std3"}, {"pair", {1, 3}}};
  const RunConfig c = apply_json(RunConfig{}, j);
  CHECK(c.depth == 3);
  CHECK(c.b_list == std::vector<double>{1.0, 2.0});
  REQUIRE(c.pair);
  CHECK(c.pair->second == 3);
  CHECK(c.max_period == RunConfig{}.max_period);
  CHECK_THROWS_AS(apply_json(RunConfig{}, json{{"depht", 3}}), DomainError);
  CHECK_THROWS_AS(apply_json(RunConfig{}, json{{"depth", "three"}}), DomainError);
  CHECK_THROWS_AS(apply_json(RunConfig{}, json::array()), DomainError);

  const RunConfig back = apply_json(RunConfig{}, config_to_json(c));
  CHECK(config_to_json(back) == config_to_json(c));
  for (const auto& name : command_names()) {
    const bool grouped = name.find(' ') != std::string::npos;
    CHECK((grouped || name == "render"));
  }
}

TEST_CASE("SVG rendering") {
  const auto scene = geometry::standard_scene();
  const auto two = orbits::find_periodic_orbit(scene, symbolic::Word::parse("12", true));
  const std::string svg = render_svg(scene, {two});
  CHECK(count(svg, "<circle") == 3);
  CHECK(count(svg, "<polyline") == 1);
  CHECK(count(svg, "<line") == 2);
  CHECK(svg.rfind("<svg", 0) == 0);
  CHECK(svg.find("</svg>") != std::string::npos);
  // The polyline is closed: first and last points coincide.
  const std::regex pts("points=\"([^\"]*)\"");
  std::smatch m;
  REQUIRE(std::regex_search(svg, m, pts));
  const std::string list = m[1];
  CHECK(list.substr(0, list.find(' ')) == list.substr(list.rfind(' ') + 1));

  const std::string empty = render_svg(scene, {});
  CHECK(count(empty, "<circle") == 3);
  CHECK(count(empty, "<polyline") == 0);
  CHECK(render_svg(scene, {two}) == svg);

  const geometry::Scene ell(2, {geometry::Obstacle::ellipsoid(Eigen::Vector2d(0, 0), Eigen::Vector2d(1.5, 0.7)),
                                geometry::Obstacle::sphere(Eigen::Vector2d(6, 0), 1.0),
                                geometry::Obstacle::sphere(Eigen::Vector2d(3, 5), 1.0)});
  const std::string e = render_svg(ell, {});
  CHECK(count(e, "<ellipse") == 1);
  CHECK(count(e, "<circle") == 2);

  CHECK_THROWS_AS(render_svg(geometry::standard_scene_3d(), {}), RenderError);
  const auto dir = scratch("svg");
  write_svg(scene, {two}, (dir / "a.svg").string());
  CHECK(slurp(dir / "a.svg") == svg);
}

TEST_CASE("command line front end") {
  const auto dir = scratch("cli");
  const std::string out = " --output-dir " + dir.string();
  CHECK(cli("geometry check" + out) == 0);
  CHECK(read_json(dir / "geometry_check.json").at("report").at("holds").get<bool>());
  CHECK(cli("orbit find 123" + out) == 0);
  CHECK(read_json(dir / "orbit_find.json").at("report").at("length").get<double>() ==
        doctest::Approx(18 - 3 * std::sqrt(3.0)));
  CHECK(cli("certify pinching --phi0 auto --max-period 6" + out) == 0);
  CHECK(cli("certify pinching --phi0 1.2" + out) == 2);
  CHECK(cli("certify symplectic --pair 1 2 --lambda 1 --samples 10" + out) == 0);
  CHECK(cli("render --words 12 123" + out) == 0);
  CHECK(count(slurp(dir / "render.svg"), "<polyline") == 2);

  const fs::path bad = dir / "bad.json";
  std::ofstream(bad) << "{ not json";
  CHECK(cli("--scene " + bad.string() + " geometry check" + out) == 1);
  CHECK(cli("orbit find 11" + out) == 1);
  CHECK(cli("orbit" + out) == 1);
  CHECK(cli("frobnicate") == 1);
  CHECK(cli("--help") == 0);

  const fs::path cfg = dir / "cfg.json";
  std::ofstream(cfg) << R"({"depth": 3, "b": [5], "trials": 2})";
  CHECK(cli("transfer spectrum --config " + cfg.string() + out) == 0);
  json params = read_json(dir / "transfer_spectrum.json").at("parameters");
  CHECK(params.at("depth") == 3);
  CHECK(params.at("b") == json{5.0});
  CHECK(cli("transfer spectrum --depth 4 --config " + cfg.string() + out) == 0);
  params = read_json(dir / "transfer_spectrum.json").at("parameters");
  CHECK(params.at("depth") == 4);
  CHECK(params.at("trials") == 2);

  const fs::path badcfg = dir / "badcfg.json";
  std::ofstream(badcfg) << R"({"colour": "blue"})";
  CHECK(cli("geometry check --config " + badcfg.string() + out) == 1);
}
