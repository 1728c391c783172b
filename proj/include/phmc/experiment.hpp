#pragma once

// Config-driven experiment runner behind the command-line tool.
//
// Config resolution, later entries winning: built-in defaults, the named
// preset, the config file, command-line flags. Files are flat "key = value"
// text; '#' starts a comment.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "phmc/coupling.hpp"
#include "phmc/function_space.hpp"
#include "phmc/sampler.hpp"

namespace phmc {

struct ExperimentConfig {
  std::string preset;  // empty: none
  std::string potential = "linear";
  double gamma = 20.0;
  double quadratic_scale = 1.0;
  Representation repr = Representation::Spectral;
  std::size_t dim = 5000;
  double h = 0.2;
  std::size_t steps = 12;
  std::size_t iters = 300;
  std::size_t runs = 1;
  std::uint64_t seed = 1;
  std::string init = "fig1-pair";  // or "doublewell-pair"
  HmcMode mode = HmcMode::Adjusted;
  bool flip = false;
  double sobolev = 0.0;
  double coalesce_eps = 0.0;
  bool exact_surrogate = false;
  bool derive_seeds = true;      // false: every run uses the master seed as is
  std::size_t pairs = 1000;      // audit: random prior pairs
  std::size_t r_draws = 100000;  // audit: draws for the velocity-radius quantile
  std::string out;               // empty: stdout
};

using Settings = std::map<std::string, std::string>;

// Every key accepted in config files and as --key flags, in output order.
const std::vector<std::string>& config_keys();
const std::vector<std::string>& preset_names();

// Throws ConfigError naming the offending key.
void apply_setting(ExperimentConfig& cfg, const std::string& key, const std::string& value);
Settings parse_config_text(const std::string& text);
Settings read_config_file(const std::string& path);
ExperimentConfig resolve_config(const Settings& file, const Settings& flags);
void validate_config(const ExperimentConfig& cfg);

// Resolved key/value pairs in config_keys() order.
std::vector<std::pair<std::string, std::string>> describe(const ExperimentConfig& cfg);

HmcConfig make_hmc_config(const ExperimentConfig& cfg, Representation repr);
std::shared_ptr<const CovarianceModel> make_covariance(const ExperimentConfig& cfg, Representation repr);

// Initial pair for run `run` in representation `repr`. "fig1-pair" draws two
// independent prior samples from the run's stream; "doublewell-pair" is the
// constant functions +1/2 and -1/2. The returned generator continues that
// stream and drives the coupling.
struct RunStart {
  Field x;
  Field y;
  Rng rng;
};
RunStart initial_pair(const ExperimentConfig& cfg, std::size_t run, Representation repr);

CouplingTrace run_single(const ExperimentConfig& cfg, std::size_t run, Representation repr);

struct RepresentationComparison {
  CouplingTrace first;
  CouplingTrace second;
  double rate_first = 0.0;
  double rate_second = 0.0;
  double relative_difference = 0.0;
};
// Both runs start from the same spectral prior pair, mapped into each
// representation, and use the same master seed.
RepresentationComparison compare_representations(const ExperimentConfig& cfg, Representation a, Representation b);

// Table writers; every output starts with "#" lines holding the resolved config.
void write_header(std::ostream& os, const std::string& command, const ExperimentConfig& cfg);
void write_trace(std::ostream& os, const CouplingTrace& trace);
std::string format_double(double x);

// Commands. They throw ConfigError / ChainError; run_command maps those to
// exit codes 2 / 3 (1 for anything else) and prints a diagnostic to `err`.
void cmd_run_coupling(const ExperimentConfig& cfg, std::ostream& os);
void cmd_average(const ExperimentConfig& cfg, std::ostream& os);
void cmd_audit(const ExperimentConfig& cfg, std::ostream& os);
// Writes <out>.spectral.csv and <out>.grid.csv and the summary to `os`.
void cmd_compare_representations(const ExperimentConfig& cfg, std::ostream& os);

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitDivergence = 3;

// Resolves the config, runs `command` and writes to cfg.out (stdout if empty).
int run_command(const std::string& command, const Settings& file, const Settings& flags, std::ostream& out,
                std::ostream& err);

}  // namespace phmc
