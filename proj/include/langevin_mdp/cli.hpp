#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "langevin_mdp/coefficients.hpp"
#include "langevin_mdp/mc_harness.hpp"
#include "langevin_mdp/sde_sim.hpp"
#include "langevin_mdp/skeleton_rate.hpp"

namespace lmdp {

using Json = nlohmann::json;

inline constexpr const char* kVersion = "0.1.0";
inline constexpr const char* kOutputDirEnv = "LMDP_OUTPUT_DIR";

enum ExitCode : int { kExitOk = 0, kExitUnexpected = 1, kExitConfig = 2, kExitNumerical = 3 };

// Raised for malformed config files, unknown keys and bad overrides.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Every accepted key with its default. Keys outside this tree are rejected,
// except under model.params, which the model registry checks.
const Json& default_config();

// `assignment` is "dotted.key=value"; value is parsed as JSON when possible and
// taken as a string otherwise.
void apply_override(Json& config, const std::string& assignment);

Json load_config_file(const std::string& path);

struct RunConfig {
  Json resolved;  // defaults merged with the file and overrides
  CoefficientModel model;
  SimConfig sim;
  std::vector<double> eps_list;

  std::optional<double> delta;
  long n_samples = 1000;
  std::uint32_t sample = 0;
  std::optional<RowMatrix> control_segments;
  std::optional<Vec> terminal;
  std::string target;
  Box box;
  int hypothesis_samples = 2000;
  double tolerance = 1e-6;
  int directions = 0;
  bool refine = false;

  std::string output_dir;
  int threads = 0;

  Control control() const;  // zero control when none is configured
};

// Validates keys and ranges; range errors surface as ConfigError.
RunConfig parse_run_config(const Json& user);

Json to_json(const HypothesisReport& report);
Json to_json(const RateResult& result, const std::string& kind);
Json to_json(const RemainderReport& report, const SimConfig& config);
Json to_json(const SweepResult& result, double delta);
Json to_json(const DecayTable& table, const std::string& quantity);

void write_sweep_csv(const SweepResult& result, std::ostream& out);
void write_decay_csv(const DecayTable& table, std::ostream& out);

// Entry point of the lmdp executable. Returns the process exit status.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace lmdp
