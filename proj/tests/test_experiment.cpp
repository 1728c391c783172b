#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "phmc/errors.hpp"
#include "phmc/experiment.hpp"

using namespace phmc;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(const std::string& command, const Settings& flags, const Settings& file = {}) {
  std::ostringstream out, err;
  const int code = run_command(command, file, flags, out, err);
  return {code, out.str(), err.str()};
}

std::string field_of(const Settings& flags) {
  try {
    (void)resolve_config({}, flags);
  } catch (const ConfigError& e) {
    return e.field();
  }
  return "";
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("config text parsing") {
  const Settings s = parse_config_text("# comment\npotential = quartic-norm  # trailing\n\n  dim=128\nrepr = grid\n");
  CHECK(s.at("potential") == "quartic-norm");
  CHECK(s.at("dim") == "128");
  CHECK(s.at("repr") == "grid");
  CHECK_THROWS_AS(parse_config_text("dim 128\n"), ConfigError);
  try {
    (void)parse_config_text("colour = red\n");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(e.field() == "colour");
  }
  CHECK_THROWS_AS(read_config_file("/nonexistent/phmc.cfg"), ConfigError);
}

TEST_CASE("bad values name the offending key") {
  CHECK(field_of({{"dim", "abc"}}) == "dim");
  CHECK(field_of({{"dim", "0"}}) == "dim");
  CHECK(field_of({{"dim", "-4"}}) == "dim");
  CHECK(field_of({{"h", "-0.1"}}) == "h");
  CHECK(field_of({{"h", "nan"}}) == "h");
  CHECK(field_of({{"gamma", "0"}}) == "gamma");
  CHECK(field_of({{"repr", "wavelet"}}) == "repr");
  CHECK(field_of({{"mode", "sometimes"}}) == "mode");
  CHECK(field_of({{"flip", "maybe"}}) == "flip");
  CHECK(field_of({{"potential", "cubic"}}) == "potential");
  CHECK(field_of({{"preset", "nope"}}) == "preset");
  CHECK(field_of({{"init", "random"}}) == "init");
  CHECK(field_of({{"pairs", "10"}}) == "pairs");
  CHECK(field_of({{"mode", "exact"}, {"potential", "double-well"}}) == "mode");
  CHECK(field_of({{"mode", "exact"}, {"potential", "double-well"}, {"exact_surrogate", "true"}}).empty());
  CHECK(field_of({{"mode", "exact"}, {"potential", "linear"}}).empty());
}

TEST_CASE("resolution order: defaults, preset, file, flags") {
  const ExperimentConfig d = resolve_config({}, {});
  CHECK(d.potential == "linear");
  CHECK(d.h == 0.2);
  CHECK(d.steps == 12);
  CHECK(d.dim == 5000);

  const ExperimentConfig p = resolve_config({}, {{"preset", "doublewell"}});
  CHECK(p.potential == "double-well");
  CHECK(p.iters == 2000);
  CHECK(p.init == "doublewell-pair");

  const ExperimentConfig f = resolve_config({{"preset", "doublewell"}, {"gamma", "60"}, {"dim", "100"}}, {{"dim", "50"}});
  CHECK(f.gamma == 60.0);
  CHECK(f.dim == 50);
  CHECK(f.potential == "double-well");
  // a flag preset still sits below file values
  const ExperimentConfig g = resolve_config({{"iters", "7"}}, {{"preset", "zero-smoke"}});
  CHECK(g.iters == 7);
  CHECK(g.potential == "zero");
}

TEST_CASE("describe lists every key in order") {
  const auto kv = describe(resolve_config({}, {{"preset", "zero-smoke"}}));
  REQUIRE(kv.size() == config_keys().size());
  for (std::size_t i = 0; i < kv.size(); ++i) CHECK(kv[i].first == config_keys()[i]);
  // round trip through the flags
  Settings back;
  for (const auto& [k, v] : kv) back[k] = v;
  const auto again = describe(resolve_config({}, back));
  CHECK(again == kv);
  CHECK(preset_names().size() == 4);
}

TEST_CASE("run-coupling output") {
  const Run r = run("run-coupling", {{"preset", "zero-smoke"}, {"seed", "3"}});
  REQUIRE(r.code == kExitOk);
  std::istringstream in(r.out);
  std::string line;
  std::getline(in, line);
  CHECK(line == "# command = run-coupling");
  std::size_t header = 1;
  while (std::getline(in, line) && line.starts_with("#")) ++header;
  CHECK(header == config_keys().size() + 1);
  CHECK(line == "iter,distance_l2,accepted_x,accepted_y,delta_h_x,delta_h_y");
  // zero potential: every row is |cos 2.4| times the previous one
  double prev = -1.0;
  std::size_t rows = 0;
  while (std::getline(in, line) && !line.starts_with("#")) {
    const double d = std::stod(line.substr(line.find(',') + 1));
    if (prev > 0) CHECK(d / prev == doctest::Approx(std::abs(std::cos(2.4))).epsilon(1e-8));
    prev = d;
    ++rows;
  }
  CHECK(rows == 41);
  CHECK(line.starts_with("# coalescence: none, contraction_rate: 0.7373"));
}

TEST_CASE("same seed, same bytes; different seed, different bytes") {
  const Settings flags{{"potential", "quartic-norm"}, {"dim", "128"}, {"iters", "30"}, {"seed", "11"}};
  const Run a = run("run-coupling", flags);
  const Run b = run("run-coupling", flags);
  CHECK(a.code == 0);
  CHECK(a.out == b.out);
  Settings other = flags;
  other["seed"] = "12";
  CHECK(run("run-coupling", other).out != a.out);
}

TEST_CASE("Sobolev column") {
  const Run r = run("run-coupling", {{"preset", "zero-smoke"}, {"sobolev", "0.5"}});
  CHECK(r.out.find("iter,distance_l2,accepted_x,accepted_y,delta_h_x,delta_h_y,distance_s\n") != std::string::npos);
}

TEST_CASE("exit codes") {
  const Run bad = run("run-coupling", {{"dim", "0"}});
  CHECK(bad.code == kExitConfig);
  CHECK(bad.err.find("dim") != std::string::npos);
  CHECK(run("frobnicate", {}).code == kExitConfig);
  CHECK(run("average", {{"preset", "zero-smoke"}}).code == kExitConfig);
  const Run div = run("run-coupling", {{"potential", "double-well"},
                                       {"gamma", "1e200"},
                                       {"mode", "exact"},
                                       {"exact_surrogate", "true"},
                                       {"dim", "16"},
                                       {"iters", "5"},
                                       {"h", "1"},
                                       {"steps", "3"}});
  CHECK(div.code == kExitDivergence);
  CHECK(div.out.empty());
}

TEST_CASE("output file") {
  const auto dir = std::filesystem::temp_directory_path() / "phmc_test_experiment";
  std::filesystem::create_directories(dir);
  const auto path = dir / "trace.csv";
  const Run r = run("run-coupling", {{"preset", "zero-smoke"}, {"out", path.string()}});
  CHECK(r.code == 0);
  CHECK(r.out.empty());
  const std::string text = slurp(path);
  CHECK(text.starts_with("# command = run-coupling\n"));
  CHECK(text.find("# out = " + path.string()) != std::string::npos);
}

TEST_CASE("average over runs") {
  const Run r = run("average", {{"preset", "zero-smoke"}, {"runs", "3"}, {"derive_seeds", "false"}});
  REQUIRE(r.code == 0);
  std::istringstream in(r.out);
  std::string line;
  while (std::getline(in, line) && line.starts_with("#")) {}
  CHECK(line == "iter,mean_distance,min,max,n_alive");
  // identical seeds: min = mean = max
  std::getline(in, line);
  std::istringstream row(line);
  std::string it, mean, lo, hi;
  std::getline(row, it, ',');
  std::getline(row, mean, ',');
  std::getline(row, lo, ',');
  std::getline(row, hi, ',');
  CHECK(mean == lo);
  CHECK(mean == hi);
  CHECK(r.out.find("# coalesced_runs: 0 of 3") != std::string::npos);
}

TEST_CASE("audit command") {
  const Run r = run("audit", {{"potential", "linear"}, {"dim", "64"}, {"pairs", "100"}, {"r_draws", "1000"}});
  REQUIRE(r.code == 0);
  CHECK(r.out.find("\nL_hat=0\n") != std::string::npos);
  CHECK(r.out.find("\nzeta_hat=1\n") != std::string::npos);
  CHECK(r.out.find("analytic.L=0") != std::string::npos);
  CHECK(r.out.find("check.convexity=PASS") != std::string::npos);
  // T = 2.4 breaks the step conditions
  CHECK(r.out.find("check.step_condition=FAIL") != std::string::npos);
  const Run s = run("audit", {{"potential", "linear"}, {"dim", "64"}, {"pairs", "100"}, {"r_draws", "1000"},
                              {"h", "0.05"}, {"steps", "10"}});
  CHECK(s.out.find("check.step_convex_condition=PASS") != std::string::npos);
  const Run dw = run("audit", {{"potential", "double-well"}, {"gamma", "60"}, {"dim", "64"}, {"pairs", "100"},
                               {"r_draws", "1000"}});
  CHECK(dw.out.find("check.convexity=FAIL") != std::string::npos);
}

TEST_CASE("compare-representations") {
  const auto dir = std::filesystem::temp_directory_path() / "phmc_test_experiment";
  std::filesystem::create_directories(dir);
  const std::string prefix = (dir / "cmp").string();
  CHECK(run("compare-representations", {{"dim", "64"}}).code == kExitConfig);
  const Run r = run("compare-representations", {{"dim", "256"}, {"iters", "120"}, {"out", prefix}});
  REQUIRE(r.code == 0);
  CHECK(std::filesystem::exists(prefix + ".spectral.csv"));
  CHECK(std::filesystem::exists(prefix + ".grid.csv"));
  CHECK(slurp(prefix + ".grid.csv").find("# repr = grid") != std::string::npos);
  const auto pos = r.out.find("# relative_difference: ");
  REQUIRE(pos != std::string::npos);
  CHECK(std::stod(r.out.substr(pos + 23)) < 0.1);

  const ExperimentConfig cfg = resolve_config({}, {{"dim", "64"}, {"iters", "60"}});
  const RepresentationComparison same = compare_representations(cfg, Representation::Spectral, Representation::Spectral);
  CHECK(same.relative_difference == 0.0);
}

TEST_CASE("initial pairs") {
  const ExperimentConfig cfg = resolve_config({}, {{"preset", "doublewell"}, {"dim", "16"}});
  const RunStart s = initial_pair(cfg, 0, Representation::Grid);
  for (double v : s.x.data) CHECK(v == doctest::Approx(0.5));
  for (double v : s.y.data) CHECK(v == doctest::Approx(-0.5));
  const ExperimentConfig fig = resolve_config({}, {{"dim", "32"}});
  const RunStart a = initial_pair(fig, 0, Representation::Spectral);
  const RunStart b = initial_pair(fig, 0, Representation::Grid);
  CHECK(l2_distance(to_grid(a.x), b.x) < 1e-13);
  CHECK_FALSE(initial_pair(fig, 1, Representation::Spectral).x == a.x);
}

TEST_CASE("number formatting round-trips") {
  const double x = 0.1 + 0.2;
  CHECK(std::stod(format_double(x)) == x);
}
