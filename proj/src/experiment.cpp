#include "phmc/experiment.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <functional>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "phmc/errors.hpp"

namespace phmc {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& v) {
  const std::string t = trim(v);
  char* end = nullptr;
  errno = 0;
  const double x = std::strtod(t.c_str(), &end);
  if (t.empty() || end != t.c_str() + t.size() || errno == ERANGE || !std::isfinite(x)) {
    throw ConfigError(key, "expected a finite real number, got '" + v + "'");
  }
  return x;
}

std::uint64_t parse_u64(const std::string& key, const std::string& v) {
  const std::string t = trim(v);
  if (t.empty() || t.find_first_not_of("0123456789") != std::string::npos) {
    throw ConfigError(key, "expected a non-negative integer, got '" + v + "'");
  }
  errno = 0;
  char* end = nullptr;
  const unsigned long long x = std::strtoull(t.c_str(), &end, 10);
  if (errno == ERANGE) throw ConfigError(key, "integer out of range: '" + v + "'");
  return static_cast<std::uint64_t>(x);
}

bool parse_bool(const std::string& key, const std::string& v) {
  const std::string t = trim(v);
  if (t == "true" || t == "1" || t == "yes") return true;
  if (t == "false" || t == "0" || t == "no") return false;
  throw ConfigError(key, "expected true or false, got '" + v + "'");
}

const Settings& preset_settings(const std::string& name) {
  static const std::map<std::string, Settings> presets{
      {"linear-fig",
       {{"potential", "linear"}, {"repr", "spectral"}, {"dim", "5000"}, {"iters", "300"}, {"init", "fig1-pair"}}},
      {"quartic-fig",
       {{"potential", "quartic-norm"}, {"repr", "spectral"}, {"dim", "5000"}, {"iters", "300"}, {"init", "fig1-pair"}}},
      {"doublewell",
       {{"potential", "double-well"},
        {"gamma", "20"},
        {"repr", "spectral"},
        {"dim", "5000"},
        {"iters", "2000"},
        {"init", "doublewell-pair"}}},
      {"zero-smoke",
       {{"potential", "zero"}, {"repr", "spectral"}, {"dim", "64"}, {"iters", "40"}, {"init", "fig1-pair"}}},
  };
  const auto it = presets.find(name);
  if (it == presets.end()) throw ConfigError("preset", "unknown preset '" + name + "'");
  return it->second;
}

std::string mode_name(HmcMode m) { return m == HmcMode::Exact ? "exact" : "adjusted"; }

template <class Body>
void for_each_run(std::size_t runs, Body body) {
  std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic)
  for (std::size_t r = 0; r < runs; ++r) {
    try {
      body(r);
    } catch (...) {
#pragma omp critical(phmc_run_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
}

std::string rate_text(const CouplingTrace& trace, double* rate_out = nullptr) {
  try {
    const double rate = estimate_contraction_rate(trace);
    if (rate_out) *rate_out = rate;
    return format_double(rate);
  } catch (const std::invalid_argument&) {
    if (rate_out) *rate_out = std::numeric_limits<double>::quiet_NaN();
    return "n/a";
  }
}

std::string coalescence_text(const CouplingTrace& trace) {
  return trace.coalescence_iter ? std::to_string(*trace.coalescence_iter) : "none";
}

void write_summary(std::ostream& os, const CouplingTrace& trace) {
  os << "# coalescence: " << coalescence_text(trace) << ", contraction_rate: " << rate_text(trace) << '\n';
}

}  // namespace

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys{
      "preset", "potential", "gamma",   "quadratic_scale", "repr",         "dim",             "h",
      "steps",  "iters",     "runs",    "seed",            "init",         "mode",            "flip",
      "sobolev", "coalesce_eps", "exact_surrogate", "derive_seeds", "pairs", "r_draws",       "out"};
  return keys;
}

const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names{"linear-fig", "quartic-fig", "doublewell", "zero-smoke"};
  return names;
}

void apply_setting(ExperimentConfig& cfg, const std::string& key, const std::string& raw) {
  const std::string v = trim(raw);
  if (key == "preset") {
    if (!v.empty()) preset_settings(v);
    cfg.preset = v;
  } else if (key == "potential") {
    cfg.potential = v;
  } else if (key == "gamma") {
    cfg.gamma = parse_double(key, v);
  } else if (key == "quadratic_scale") {
    cfg.quadratic_scale = parse_double(key, v);
  } else if (key == "repr") {
    if (v == "spectral") cfg.repr = Representation::Spectral;
    else if (v == "grid") cfg.repr = Representation::Grid;
    else throw ConfigError(key, "expected spectral or grid, got '" + v + "'");
  } else if (key == "dim") {
    cfg.dim = parse_u64(key, v);
  } else if (key == "h") {
    cfg.h = parse_double(key, v);
  } else if (key == "steps") {
    cfg.steps = parse_u64(key, v);
  } else if (key == "iters") {
    cfg.iters = parse_u64(key, v);
  } else if (key == "runs") {
    cfg.runs = parse_u64(key, v);
  } else if (key == "seed") {
    cfg.seed = parse_u64(key, v);
  } else if (key == "init") {
    cfg.init = v;
  } else if (key == "mode") {
    if (v == "exact") cfg.mode = HmcMode::Exact;
    else if (v == "adjusted") cfg.mode = HmcMode::Adjusted;
    else throw ConfigError(key, "expected exact or adjusted, got '" + v + "'");
  } else if (key == "flip") {
    cfg.flip = parse_bool(key, v);
  } else if (key == "sobolev") {
    cfg.sobolev = parse_double(key, v);
  } else if (key == "coalesce_eps") {
    cfg.coalesce_eps = parse_double(key, v);
  } else if (key == "exact_surrogate") {
    cfg.exact_surrogate = parse_bool(key, v);
  } else if (key == "derive_seeds") {
    cfg.derive_seeds = parse_bool(key, v);
  } else if (key == "pairs") {
    cfg.pairs = parse_u64(key, v);
  } else if (key == "r_draws") {
    cfg.r_draws = parse_u64(key, v);
  } else if (key == "out") {
    cfg.out = v;
  } else {
    throw ConfigError(key, "unknown config key");
  }
}

Settings parse_config_text(const std::string& text) {
  Settings out;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config", "line " + std::to_string(lineno) + ": expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    if (std::find(config_keys().begin(), config_keys().end(), key) == config_keys().end()) {
      throw ConfigError(key, "unknown config key (line " + std::to_string(lineno) + ")");
    }
    out[key] = trim(line.substr(eq + 1));
  }
  return out;
}

Settings read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config", "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

ExperimentConfig resolve_config(const Settings& file, const Settings& flags) {
  ExperimentConfig cfg;
  std::string preset;
  if (auto it = file.find("preset"); it != file.end()) preset = trim(it->second);
  if (auto it = flags.find("preset"); it != flags.end()) preset = trim(it->second);
  if (!preset.empty()) {
    for (const auto& [k, v] : preset_settings(preset)) apply_setting(cfg, k, v);
  }
  for (const auto& [k, v] : file) apply_setting(cfg, k, v);
  for (const auto& [k, v] : flags) apply_setting(cfg, k, v);
  validate_config(cfg);
  return cfg;
}

void validate_config(const ExperimentConfig& cfg) {
  const auto& names = potential_names();
  if (std::find(names.begin(), names.end(), cfg.potential) == names.end()) {
    throw ConfigError("potential", "unknown potential '" + cfg.potential + "'");
  }
  if (!(cfg.gamma > 0.0)) throw ConfigError("gamma", "must be > 0");
  if (!(cfg.quadratic_scale >= 0.0)) throw ConfigError("quadratic_scale", "must be >= 0");
  if (cfg.dim == 0) throw ConfigError("dim", "must be > 0");
  if (!(cfg.h > 0.0)) throw ConfigError("h", "must be > 0");
  if (cfg.steps == 0) throw ConfigError("steps", "must be > 0");
  if (cfg.iters == 0) throw ConfigError("iters", "must be > 0");
  if (cfg.runs == 0) throw ConfigError("runs", "must be > 0");
  if (cfg.init != "fig1-pair" && cfg.init != "doublewell-pair") {
    throw ConfigError("init", "expected fig1-pair or doublewell-pair, got '" + cfg.init + "'");
  }
  if (cfg.sobolev < 0.0) throw ConfigError("sobolev", "must be >= 0");
  if (cfg.coalesce_eps < 0.0) throw ConfigError("coalesce_eps", "must be >= 0");
  if (cfg.pairs < 100) throw ConfigError("pairs", "must be >= 100");
  if (cfg.mode == HmcMode::Exact && !cfg.exact_surrogate) {
    const PotentialPtr phi = make_potential(cfg.potential, {cfg.gamma, {cfg.quadratic_scale}});
    if (!phi->constant_gradient(cfg.repr, cfg.dim)) {
      throw ConfigError("mode", "exact mode for potential '" + cfg.potential +
                                    "' has no closed-form flow; set exact_surrogate = true");
    }
  }
}

std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::vector<std::pair<std::string, std::string>> describe(const ExperimentConfig& cfg) {
  auto b = [](bool x) { return std::string(x ? "true" : "false"); };
  return {{"preset", cfg.preset},
          {"potential", cfg.potential},
          {"gamma", format_double(cfg.gamma)},
          {"quadratic_scale", format_double(cfg.quadratic_scale)},
          {"repr", to_string(cfg.repr)},
          {"dim", std::to_string(cfg.dim)},
          {"h", format_double(cfg.h)},
          {"steps", std::to_string(cfg.steps)},
          {"iters", std::to_string(cfg.iters)},
          {"runs", std::to_string(cfg.runs)},
          {"seed", std::to_string(cfg.seed)},
          {"init", cfg.init},
          {"mode", mode_name(cfg.mode)},
          {"flip", b(cfg.flip)},
          {"sobolev", format_double(cfg.sobolev)},
          {"coalesce_eps", format_double(cfg.coalesce_eps)},
          {"exact_surrogate", b(cfg.exact_surrogate)},
          {"derive_seeds", b(cfg.derive_seeds)},
          {"pairs", std::to_string(cfg.pairs)},
          {"r_draws", std::to_string(cfg.r_draws)},
          {"out", cfg.out}};
}

std::shared_ptr<const CovarianceModel> make_covariance(const ExperimentConfig& cfg, Representation repr) {
  return std::make_shared<const CovarianceModel>(repr == Representation::Spectral
                                                     ? CovarianceModel::bridge_spectral(cfg.dim)
                                                     : CovarianceModel::bridge_grid(cfg.dim));
}

HmcConfig make_hmc_config(const ExperimentConfig& cfg, Representation repr) {
  HmcConfig hc;
  hc.integrator = IntegratorParams(cfg.h, cfg.steps);
  hc.mode = cfg.mode;
  hc.flip_on_reject = cfg.flip;
  hc.potential = make_potential(cfg.potential, {cfg.gamma, {cfg.quadratic_scale}});
  hc.covariance = make_covariance(cfg, repr);
  hc.exact_surrogate = cfg.exact_surrogate;
  return hc;
}

RunStart initial_pair(const ExperimentConfig& cfg, std::size_t run, Representation repr) {
  RunStart s{{}, {}, Rng(cfg.derive_seeds ? derive_seed(cfg.seed, run) : cfg.seed)};
  if (cfg.init == "doublewell-pair") {
    s.x = Field::constant(repr, cfg.dim, 0.5);
    s.y = Field::constant(repr, cfg.dim, -0.5);
  } else {
    const CovarianceModel kl = CovarianceModel::bridge_spectral(cfg.dim);
    s.x = to_representation(sample_prior(kl, s.rng), repr);
    s.y = to_representation(sample_prior(kl, s.rng), repr);
  }
  return s;
}

CouplingTrace run_single(const ExperimentConfig& cfg, std::size_t run, Representation repr) {
  const HmcConfig hc = make_hmc_config(cfg, repr);
  RunStart start = initial_pair(cfg, run, repr);
  return run_coupling(start.x, start.y, cfg.iters, start.rng, hc, {cfg.sobolev, cfg.coalesce_eps});
}

RepresentationComparison compare_representations(const ExperimentConfig& cfg, Representation a, Representation b) {
  RepresentationComparison cmp;
  cmp.first = run_single(cfg, 0, a);
  cmp.second = run_single(cfg, 0, b);
  rate_text(cmp.first, &cmp.rate_first);
  rate_text(cmp.second, &cmp.rate_second);
  cmp.relative_difference =
      std::abs(cmp.rate_first - cmp.rate_second) / std::max(std::abs(cmp.rate_first), std::abs(cmp.rate_second));
  return cmp;
}

void write_header(std::ostream& os, const std::string& command, const ExperimentConfig& cfg) {
  os << "# command = " << command << '\n';
  for (const auto& [k, v] : describe(cfg)) os << "# " << k << " = " << v << '\n';
}

void write_trace(std::ostream& os, const CouplingTrace& trace) {
  const bool extra = trace.sobolev_index != 0.0;
  os << "iter,distance_l2,accepted_x,accepted_y,delta_h_x,delta_h_y";
  if (extra) os << ",distance_s";
  os << '\n';
  for (const CouplingRecord& r : trace.records) {
    os << r.iter << ',' << format_double(r.distance_l2) << ',' << (r.accepted_x ? 1 : 0) << ','
       << (r.accepted_y ? 1 : 0) << ',' << format_double(r.delta_h_x) << ',' << format_double(r.delta_h_y);
    if (extra) os << ',' << format_double(r.distance_s);
    os << '\n';
  }
}

void cmd_run_coupling(const ExperimentConfig& cfg, std::ostream& os) {
  const CouplingTrace trace = run_single(cfg, 0, cfg.repr);
  write_header(os, "run-coupling", cfg);
  write_trace(os, trace);
  write_summary(os, trace);
}

void cmd_average(const ExperimentConfig& cfg, std::ostream& os) {
  if (cfg.runs < 2) throw ConfigError("runs", "average needs runs >= 2");
  std::vector<CouplingTrace> traces(cfg.runs);
  for_each_run(cfg.runs, [&](std::size_t r) { traces[r] = run_single(cfg, r, cfg.repr); });

  std::size_t last = 0;
  std::size_t coalesced = 0;
  for (const CouplingTrace& t : traces) {
    last = std::max(last, t.records.back().iter);
    if (t.coalesced()) ++coalesced;
  }

  write_header(os, "average", cfg);
  os << "iter,mean_distance,min,max,n_alive\n";
  for (std::size_t n = 0; n <= last; ++n) {
    double sum = 0.0;
    double lo = std::numeric_limits<double>::infinity();
    double hi = 0.0;
    std::size_t alive = 0;
    for (const CouplingTrace& t : traces) {
      double d = 0.0;
      if (n < t.records.size() && !(t.coalescence_iter && n >= *t.coalescence_iter)) {
        d = t.records[n].distance_l2;
        ++alive;
      }
      sum += d;
      lo = std::min(lo, d);
      hi = std::max(hi, d);
    }
    os << n << ',' << format_double(sum / static_cast<double>(traces.size())) << ',' << format_double(lo) << ','
       << format_double(hi) << ',' << alive << '\n';
  }
  os << "# coalesced_runs: " << coalesced << " of " << traces.size() << '\n';
}

void cmd_audit(const ExperimentConfig& cfg, std::ostream& os) {
  const HmcConfig hc = make_hmc_config(cfg, cfg.repr);
  Rng rng(derive_seed(cfg.seed, 0));
  AuditOptions opts;
  opts.sobolev_index = cfg.sobolev;
  opts.r_draws = cfg.r_draws;
  const AssumptionReport rep = audit_assumptions(*hc.potential, *hc.covariance, hc.integrator, cfg.pairs, rng, opts);
  auto verdict = [](bool ok) { return ok ? "PASS" : "FAIL"; };

  write_header(os, "audit", cfg);
  os << "# L_hat, Lprime_hat, M_hat: sup over samples (lower bounds); zeta_hat: inf over samples (upper bound)\n";
  os << "L_hat=" << format_double(rep.L_hat) << '\n';
  os << "Lprime_hat=" << format_double(rep.Lprime_hat) << '\n';
  os << "zeta_hat=" << format_double(rep.zeta_hat) << '\n';
  os << "M_hat=" << format_double(rep.M_hat) << '\n';
  os << "R_hat=" << format_double(rep.R_hat) << '\n';
  os << "pairs_used=" << rep.pairs_used << '\n';
  os << "condition_value=" << format_double(rep.step_condition) << '\n';
  os << "convex_condition_threshold=" << format_double(rep.convex_step_threshold) << '\n';
  os << "theorem_rate=" << format_double(rep.theorem_rate) << '\n';
  if (cfg.sobolev == 0.0) {
    if (const auto known = hc.potential->known_constants(*hc.covariance)) {
      os << "analytic.L=" << format_double(known->L) << '\n';
      os << "analytic.Lprime=" << format_double(known->L_prime) << '\n';
      os << "analytic.zeta=" << format_double(known->zeta) << '\n';
    }
  }
  os << "check.lipschitz=" << verdict(rep.lipschitz_ok) << '\n';
  os << "check.convexity=" << verdict(rep.convexity_ok) << '\n';
  os << "check.derivative_bound=" << verdict(rep.derivative_bound_ok) << '\n';
  os << "check.step_condition=" << verdict(rep.step_condition_ok) << '\n';
  os << "check.step_convex_condition=" << verdict(rep.convex_step_condition_ok) << '\n';
}

void cmd_compare_representations(const ExperimentConfig& cfg, std::ostream& os) {
  if (cfg.out.empty()) throw ConfigError("out", "compare-representations needs an output prefix");
  const RepresentationComparison cmp = compare_representations(cfg, Representation::Spectral, Representation::Grid);
  const std::pair<const char*, const CouplingTrace*> files[] = {{"spectral", &cmp.first}, {"grid", &cmp.second}};
  for (const auto& [name, trace] : files) {
    const std::string path = cfg.out + "." + name + ".csv";
    std::ofstream f(path, std::ios::binary);
    if (!f) throw ConfigError("out", "cannot write '" + path + "'");
    ExperimentConfig c = cfg;
    c.repr = std::string(name) == "spectral" ? Representation::Spectral : Representation::Grid;
    write_header(f, "compare-representations", c);
    write_trace(f, *trace);
    write_summary(f, *trace);
  }
  write_header(os, "compare-representations", cfg);
  os << "representation,contraction_rate,coalescence\n";
  os << "spectral," << format_double(cmp.rate_first) << ',' << coalescence_text(cmp.first) << '\n';
  os << "grid," << format_double(cmp.rate_second) << ',' << coalescence_text(cmp.second) << '\n';
  os << "# relative_difference: " << format_double(cmp.relative_difference) << '\n';
}

int run_command(const std::string& command, const Settings& file, const Settings& flags, std::ostream& out,
                std::ostream& err) {
  static const std::map<std::string, std::function<void(const ExperimentConfig&, std::ostream&)>> commands{
      {"run-coupling", cmd_run_coupling},
      {"average", cmd_average},
      {"audit", cmd_audit},
      {"compare-representations", cmd_compare_representations}};
  try {
    const auto it = commands.find(command);
    if (it == commands.end()) throw ConfigError("command", "unknown command '" + command + "'");
    const ExperimentConfig cfg = resolve_config(file, flags);

    // Buffer first so a failed run leaves no partial output file.
    std::ostringstream buffer;
    it->second(cfg, buffer);
    if (cfg.out.empty() || command == "compare-representations") {
      out << buffer.str();
    } else {
      std::ofstream f(cfg.out, std::ios::binary);
      if (!f) throw ConfigError("out", "cannot write '" + cfg.out + "'");
      f << buffer.str();
    }
    return kExitOk;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const ChainError& e) {
    if (e.is_divergence()) {
      err << "divergence at iteration " << e.iteration() << ": " << e.what() << '\n';
      return kExitDivergence;
    }
    err << "error at iteration " << e.iteration() << ": " << e.what() << '\n';
    return kExitFailure;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
}

}  // namespace phmc
