#include "langevin_mdp/cli.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <sstream>

#include "langevin_mdp/errors.hpp"
#include "langevin_mdp/limit_flow.hpp"
#include "langevin_mdp/models.hpp"
#include "langevin_mdp/time_grid.hpp"

namespace lmdp {

namespace fs = std::filesystem;

namespace {

[[noreturn]] void config_fail(const std::string& msg) { throw ConfigError(msg); }

// Unknown keys are errors; model.params is free-form and checked by the registry.
void check_keys(const Json& user, const Json& defaults, const std::string& prefix) {
  if (!user.is_object()) config_fail("'" + (prefix.empty() ? std::string("<root>") : prefix) + "' must be a table");
  for (const auto& [key, value] : user.items()) {
    const std::string path = prefix.empty() ? key : prefix + "." + key;
    if (!defaults.contains(key)) config_fail("unknown config key '" + path + "'");
    if (path == "model.params") {
      if (!value.is_object()) config_fail("'model.params' must be a table of numbers");
      continue;
    }
    const Json& def = defaults.at(key);
    if (def.is_object()) check_keys(value, def, path);
  }
}

const Json& at_path(const Json& root, const std::string& path) {
  const Json* node = &root;
  std::stringstream ss(path);
  std::string part;
  static const Json null_value;
  while (std::getline(ss, part, '.')) {
    if (!node->is_object() || !node->contains(part)) return null_value;
    node = &node->at(part);
  }
  return *node;
}

double get_number(const Json& root, const std::string& path) {
  const Json& v = at_path(root, path);
  if (!v.is_number()) config_fail("'" + path + "' must be a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) config_fail("'" + path + "' must be finite");
  return x;
}

long get_integer(const Json& root, const std::string& path, long min_value) {
  const Json& v = at_path(root, path);
  if (!v.is_number_integer() && !(v.is_number_float() && std::floor(v.get<double>()) == v.get<double>())) {
    config_fail("'" + path + "' must be an integer");
  }
  const long x = v.is_number_integer() ? v.get<long>() : static_cast<long>(v.get<double>());
  if (x < min_value) config_fail("'" + path + "' must be >= " + std::to_string(min_value));
  return x;
}

std::optional<double> get_optional_positive(const Json& root, const std::string& path) {
  if (at_path(root, path).is_null()) return std::nullopt;
  const double x = get_number(root, path);
  if (!(x > 0.0)) config_fail("'" + path + "' must be positive");
  return x;
}

Vec get_vector(const Json& root, const std::string& path, int dim) {
  const Json& v = at_path(root, path);
  Vec out(dim);
  if (v.is_number() && dim == 1) {
    out[0] = v.get<double>();
    return out;
  }
  if (!v.is_array() || static_cast<int>(v.size()) != dim) {
    config_fail("'" + path + "' must be an array of " + std::to_string(dim) + " numbers");
  }
  for (int i = 0; i < dim; ++i) {
    if (!v[static_cast<std::size_t>(i)].is_number()) config_fail("'" + path + "' must contain numbers");
    out[i] = v[static_cast<std::size_t>(i)].get<double>();
  }
  return out;
}

RowMatrix get_segments(const Json& root, const std::string& path, int dim) {
  const Json& v = at_path(root, path);
  if (!v.is_array() || v.empty()) config_fail("'" + path + "' must be a non-empty array of control rates");
  RowMatrix seg(static_cast<Eigen::Index>(v.size()), dim);
  for (std::size_t k = 0; k < v.size(); ++k) {
    const Json& row = v[k];
    if (row.is_number() && dim == 1) {
      seg(static_cast<Eigen::Index>(k), 0) = row.get<double>();
      continue;
    }
    if (!row.is_array() || static_cast<int>(row.size()) != dim) {
      config_fail("each entry of '" + path + "' must hold " + std::to_string(dim) + " numbers");
    }
    for (int j = 0; j < dim; ++j) {
      if (!row[static_cast<std::size_t>(j)].is_number()) config_fail("'" + path + "' must contain numbers");
      seg(static_cast<Eigen::Index>(k), j) = row[static_cast<std::size_t>(j)].get<double>();
    }
  }
  return seg;
}

Json vec_json(const Vec& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

Json matrix_json(const RowMatrix& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json r = Json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) r.push_back(m(i, j));
    rows.push_back(std::move(r));
  }
  return rows;
}

// NaN and infinities become null.
Json number_or_null(double x) { return std::isfinite(x) ? Json(x) : Json(nullptr); }

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

class OutputDir {
 public:
  explicit OutputDir(std::string dir) : dir_(std::move(dir)) { fs::create_directories(dir_); }

  void json(const std::string& name, const Json& value) {
    std::ofstream f = open(name);
    f << value.dump(2) << '\n';
  }

  template <class Writer>
  void text(const std::string& name, Writer&& writer) {
    std::ofstream f = open(name);
    writer(f);
  }

  void path_csv(const std::string& name, const Path& p) {
    text(name, [&](std::ostream& os) { write_path_csv(p, os); });
  }

  const std::vector<std::string>& files() const { return files_; }
  const std::string& dir() const { return dir_; }

 private:
  std::ofstream open(const std::string& name) {
    std::ofstream f(fs::path(dir_) / name, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot write " + (fs::path(dir_) / name).string());
    files_.push_back(name);
    return f;
  }

  std::string dir_;
  std::vector<std::string> files_;
};

std::vector<double> parse_number_list(const std::string& text) {
  std::string s = text;
  if (!s.empty() && s.front() == '[') {
    const Json j = Json::parse(s, nullptr, false);
    if (j.is_discarded() || !j.is_array()) config_fail("cannot parse number list '" + text + "'");
    std::vector<double> out;
    for (const auto& x : j) {
      if (!x.is_number()) config_fail("cannot parse number list '" + text + "'");
      out.push_back(x.get<double>());
    }
    return out;
  }
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      config_fail("cannot parse number '" + item + "'");
    }
    if (used != item.size()) config_fail("cannot parse number '" + item + "'");
    out.push_back(v);
  }
  if (out.empty()) config_fail("empty number list");
  return out;
}

struct Invocation {
  std::string subcommand;
  RunConfig rc;
};

std::vector<std::string> run_validate(const RunConfig& rc, OutputDir& out, std::ostream& log, bool& passed) {
  const HypothesisReport rep = validate_hypothesis(rc.model, rc.box, rc.hypothesis_samples, rc.tolerance, rc.sim.seed);
  out.json("hypothesis.json", to_json(rep));
  passed = rep.all_passed();
  for (const auto& c : rep.clauses) {
    log << (c.passed ? "pass " : "FAIL ") << c.id << ": empirical " << c.empirical << " declared " << c.declared
        << '\n';
  }
  return out.files();
}

void run_limit(const RunConfig& rc, OutputDir& out) {
  out.path_csv("limit.csv", solve_limit_ode(rc.model, rc.sim.q, rc.sim.grid));
}

void run_simulate(const RunConfig& rc, OutputDir& out) {
  const SimConfig& cfg = rc.sim;
  const Path q0path = solve_limit_ode(rc.model, cfg.q, cfg.grid);
  const NoisePath noise = sample_noise(cfg, rc.sample, 0);
  RemainderReport rep;
  LangevinState state;
  if (rc.control_segments) {
    const Control u = rc.control();
    state = simulate_langevin(rc.model, cfg, noise, u, Recording::Fine);
    rep = remainder_decomposition(rc.model, state, noise, cfg, u);
  } else {
    state = simulate_langevin(rc.model, cfg, noise, Recording::Fine);
    rep = remainder_decomposition(rc.model, state, noise, cfg);
  }
  out.path_csv("q.csv", state.q);
  out.path_csv("p.csv", state.p);
  out.path_csv("x.csv", fluctuation_path(state.q, q0path, cfg));
  Json j = to_json(rep, cfg);
  j["sample"] = rc.sample;
  out.json("remainder.json", j);
}

void run_rate(const RunConfig& rc, OutputDir& out, std::ostream& log) {
  RateResult r;
  std::string kind;
  if (rc.terminal) {
    const Path q0path = solve_limit_ode(rc.model, rc.sim.q, rc.sim.grid);
    r = terminal_rate(rc.model, q0path, transition_family(rc.model, q0path), *rc.terminal);
    kind = "terminal";
  } else if (!rc.target.empty()) {
    const Path psi = read_path_csv(rc.target);
    require_same_grid(rc.sim.grid, psi.grid, "target path");
    const Path q0path = solve_limit_ode(rc.model, rc.sim.q, psi.grid);
    r = rate_of_path(rc.model, q0path, psi);
    kind = "path";
  } else {
    config_fail("rate needs --terminal or experiment.target");
  }
  out.json("rate.json", to_json(r, kind));
  log << "rate " << format_double(r.rate) << '\n';
}

void run_exit_rate(const RunConfig& rc, OutputDir& out, std::ostream& log) {
  if (!rc.delta) config_fail("exit-rate needs experiment.delta");
  ExitRateOptions opts;
  opts.directions = rc.directions;
  Json j;
  if (rc.refine) {
    const ExitRateRefinement ref = exit_rate_refined(rc.model, rc.sim.q, rc.sim.grid, *rc.delta, opts);
    j = to_json(ref.coarse, "exit");
    j["refined_rate"] = ref.refined_rate;
    j["refinement_delta"] = ref.refinement_delta;
    log << "exit rate " << format_double(ref.coarse.rate) << " (refined " << format_double(ref.refined_rate) << ")\n";
  } else {
    const Path q0path = solve_limit_ode(rc.model, rc.sim.q, rc.sim.grid);
    const RateResult r = exit_rate(rc.model, q0path, transition_family(rc.model, q0path), *rc.delta, opts);
    j = to_json(r, "exit");
    log << "exit rate " << format_double(r.rate) << '\n';
  }
  j["delta"] = *rc.delta;
  out.json("exit_rate.json", j);
}

void require_eps_list(const RunConfig& rc, const char* sub) {
  if (rc.eps_list.empty()) config_fail(std::string(sub) + " needs sim.eps_list");
}

void run_mdp_sweep(const RunConfig& rc, OutputDir& out, std::ostream& log) {
  require_eps_list(rc, "mdp-sweep");
  if (!rc.delta) config_fail("mdp-sweep needs experiment.delta");
  const SweepResult r = mdp_slope_sweep(rc.model, rc.sim, *rc.delta, rc.eps_list, rc.n_samples, {rc.threads});
  out.text("mdp_sweep.csv", [&](std::ostream& os) { write_sweep_csv(r, os); });
  out.json("mdp_sweep.json", to_json(r, *rc.delta));
  log << "slope " << format_double(r.fit.slope) << " reference " << format_double(r.reference_rate) << " gap "
      << format_double(r.relative_gap) << '\n';
}

void run_remainder_sweep(const RunConfig& rc, OutputDir& out, std::ostream& log) {
  require_eps_list(rc, "remainder-sweep");
  const DecayTable t = remainder_sweep(rc.model, rc.sim, rc.eps_list, rc.n_samples, {rc.threads});
  out.text("remainder_sweep.csv", [&](std::ostream& os) { write_decay_csv(t, os); });
  out.json("remainder_sweep.json", to_json(t, "normalized_remainder"));
  log << "monotone " << t.monotone << " last/first " << format_double(t.last_to_first) << '\n';
}

void run_weak_conv(const RunConfig& rc, OutputDir& out, std::ostream& log) {
  require_eps_list(rc, "weak-conv");
  if (!rc.control_segments) config_fail("weak-conv needs experiment.control");
  const DecayTable t = weak_convergence_check(rc.model, rc.sim, rc.control(), rc.eps_list, rc.n_samples, {rc.threads});
  out.text("weak_conv.csv", [&](std::ostream& os) { write_decay_csv(t, os); });
  out.json("weak_conv.json", to_json(t, "controlled_distance"));
  log << "monotone " << t.monotone << " last/first " << format_double(t.last_to_first) << '\n';
}

int classify(const Error& e) { return is_input_error(e.kind()) ? kExitConfig : kExitNumerical; }

}  // namespace

const Json& default_config() {
  static const Json defaults = Json::parse(R"({
    "model": {"name": "linear", "params": {}},
    "grid": {"horizon": 1.0, "steps": 64},
    "sim": {
      "epsilon": 0.1, "eps_list": null, "kappa": 0.25, "stiffness_cap": 0.2,
      "min_substeps": 1, "seed": 0, "q": null, "p": null
    },
    "experiment": {
      "delta": null, "n_samples": 1000, "sample": 0, "control": null, "terminal": null,
      "target": null, "box": {"lower": null, "upper": null}, "hypothesis_samples": 2000,
      "tolerance": 1e-6, "directions": 0, "refine": false
    },
    "output": {"dir": "lmdp_out", "threads": 0}
  })");
  return defaults;
}

void apply_override(Json& config, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) config_fail("override '" + assignment + "' is not of the form key=value");
  const std::string key = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  Json value = Json::parse(text, nullptr, false);
  if (value.is_discarded()) value = text;

  Json* node = &config;
  std::stringstream ss(key);
  std::string part;
  std::vector<std::string> parts;
  while (std::getline(ss, part, '.')) {
    if (part.empty()) config_fail("override key '" + key + "' has an empty component");
    parts.push_back(part);
  }
  for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
    if (!node->is_object()) config_fail("override key '" + key + "' descends into a non-table");
    node = &(*node)[parts[i]];
    if (node->is_null()) *node = Json::object();
  }
  if (!node->is_object()) config_fail("override key '" + key + "' descends into a non-table");
  (*node)[parts.back()] = std::move(value);
}

Json load_config_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) config_fail("cannot open config file '" + path + "'");
  try {
    return Json::parse(f, nullptr, true, true);
  } catch (const Json::parse_error& e) {
    config_fail("cannot parse '" + path + "': " + e.what());
  }
}

Control RunConfig::control() const {
  if (!control_segments) return Control::zero(sim.grid, model.dim);
  return Control::piecewise(sim.grid, *control_segments);
}

RunConfig parse_run_config(const Json& user) {
  check_keys(user, default_config(), "");
  Json cfg = default_config();
  cfg.merge_patch(user);
  // merge_patch drops keys set to null; restore them so the resolved
  // config always lists every key.
  for (const auto& [section, table] : default_config().items()) {
    for (const auto& [key, value] : table.items()) {
      if (!cfg[section].contains(key)) cfg[section][key] = value;
    }
  }

  RunConfig rc;
  try {
    const Json& model = cfg["model"];
    if (!model["name"].is_string()) config_fail("'model.name' must be a string");
    ModelParams params;
    for (const auto& [key, value] : model["params"].items()) {
      if (!value.is_number()) config_fail("'model.params." + key + "' must be a number");
      params[key] = value.get<double>();
    }
    rc.model = make_builtin_model(model["name"].get<std::string>(), params);
    const int dim = rc.model.dim;

    const double horizon = get_number(cfg, "grid.horizon");
    if (!(horizon > 0.0)) config_fail("'grid.horizon' must be positive");
    const TimeGrid grid(horizon, static_cast<int>(get_integer(cfg, "grid.steps", 1)));

    const Vec q = cfg["sim"]["q"].is_null() ? Vec(Vec::Zero(dim)) : get_vector(cfg, "sim.q", dim);
    const Vec p = cfg["sim"]["p"].is_null() ? Vec(Vec::Zero(dim)) : get_vector(cfg, "sim.p", dim);
    const double kappa = get_number(cfg, "sim.kappa");
    const double cap = get_number(cfg, "sim.stiffness_cap");
    const long min_sub = get_integer(cfg, "sim.min_substeps", 1);
    const Json& seed = cfg["sim"]["seed"];
    if (!seed.is_number_unsigned() && !(seed.is_number_integer() && seed.get<long>() >= 0)) {
      config_fail("'sim.seed' must be a non-negative integer");
    }
    const auto seed_value = seed.get<std::uint64_t>();
    auto make = [&](double eps) {
      return SimConfig::make(eps, kappa, grid, q, p, seed_value, cap, static_cast<int>(min_sub));
    };
    rc.sim = make(get_number(cfg, "sim.epsilon"));

    const Json& eps = cfg["sim"]["eps_list"];
    if (!eps.is_null()) {
      if (!eps.is_array()) config_fail("'sim.eps_list' must be an array");
      for (const auto& e : eps) {
        if (!e.is_number()) config_fail("'sim.eps_list' must contain numbers");
        rc.eps_list.push_back(e.get<double>());
        make(rc.eps_list.back());
      }
      check_eps_list(rc.eps_list, 1);
    }

    rc.delta = get_optional_positive(cfg, "experiment.delta");
    rc.n_samples = get_integer(cfg, "experiment.n_samples", 1);
    rc.sample = static_cast<std::uint32_t>(get_integer(cfg, "experiment.sample", 0));
    if (!cfg["experiment"]["control"].is_null()) rc.control_segments = get_segments(cfg, "experiment.control", dim);
    if (!cfg["experiment"]["terminal"].is_null()) rc.terminal = get_vector(cfg, "experiment.terminal", dim);
    const Json& target = cfg["experiment"]["target"];
    if (!target.is_null()) {
      if (!target.is_string()) config_fail("'experiment.target' must be a file path");
      rc.target = target.get<std::string>();
    }
    const Json& box = cfg["experiment"]["box"];
    rc.box.lower = box["lower"].is_null() ? Vec(q.array() - 2.0) : get_vector(cfg, "experiment.box.lower", dim);
    rc.box.upper = box["upper"].is_null() ? Vec(q.array() + 2.0) : get_vector(cfg, "experiment.box.upper", dim);
    if ((rc.box.upper.array() <= rc.box.lower.array()).any()) config_fail("experiment.box must have lower < upper");
    rc.hypothesis_samples = static_cast<int>(get_integer(cfg, "experiment.hypothesis_samples", 1));
    rc.tolerance = get_number(cfg, "experiment.tolerance");
    if (!(rc.tolerance >= 0.0)) config_fail("'experiment.tolerance' must be >= 0");
    rc.directions = static_cast<int>(get_integer(cfg, "experiment.directions", 0));
    if (!cfg["experiment"]["refine"].is_boolean()) config_fail("'experiment.refine' must be true or false");
    rc.refine = cfg["experiment"]["refine"].get<bool>();

    if (!cfg["output"]["dir"].is_string()) config_fail("'output.dir' must be a string");
    rc.output_dir = cfg["output"]["dir"].get<std::string>();
    rc.threads = static_cast<int>(get_integer(cfg, "output.threads", 0));
  } catch (const Error& e) {
    throw ConfigError(e.what());
  } catch (const Json::exception& e) {
    throw ConfigError(e.what());
  }
  rc.resolved = std::move(cfg);
  return rc;
}

Json to_json(const HypothesisReport& r) {
  Json clauses = Json::array();
  for (const auto& c : r.clauses) {
    clauses.push_back({{"id", c.id},
                       {"description", c.description},
                       {"empirical", number_or_null(c.empirical)},
                       {"declared", number_or_null(c.declared)},
                       {"passed", c.passed}});
  }
  return {{"passed", r.all_passed()},
          {"samples", r.samples},
          {"lipschitz_drift", r.lipschitz_drift},
          {"lipschitz_diffusion", r.lipschitz_diffusion},
          {"lipschitz_drift_ratio", r.lipschitz_drift_ratio},
          {"lipschitz_diffusion_ratio", r.lipschitz_diffusion_ratio},
          {"sup_diffusion_hs", r.sup_diffusion_hs},
          {"sup_damping_gradient", r.sup_damping_gradient},
          {"damping_min", r.damping_min},
          {"damping_max", r.damping_max},
          {"min_singular_diffusion", r.min_singular_diffusion},
          {"clauses", clauses}};
}

Json to_json(const RateResult& r, const std::string& kind) {
  return {{"kind", kind},
          {"rate", number_or_null(r.rate)},
          {"control_energy", number_or_null(r.optimal_control.energy())},
          {"gramian_condition", number_or_null(r.gramian_condition)},
          {"residual", number_or_null(r.residual)},
          {"t_star", r.t_star},
          {"direction", vec_json(r.direction)},
          {"skipped_times", r.skipped_times},
          {"horizon", r.optimal_control.grid.horizon()},
          {"steps", r.optimal_control.grid.steps()},
          {"optimal_control", matrix_json(r.optimal_control.rates)}};
}

Json to_json(const RemainderReport& r, const SimConfig& c) {
  Json terms = Json::array();
  for (double t : r.term_sup) terms.push_back(t);
  return {{"controlled", r.controlled},
          {"epsilon", c.epsilon},
          {"kappa", c.kappa},
          {"substeps", c.substeps},
          {"seed", c.seed},
          {"term_sup", terms},
          {"total_sup", r.total_sup},
          {"normalized_sup", r.normalized_sup},
          {"h1_sup", r.h1_sup},
          {"h2_sup", r.h2_sup},
          {"representation_residual", r.representation_residual}};
}

Json to_json(const SweepResult& r, double delta) {
  Json rows = Json::array();
  for (const SweepRow& row : r.rows) {
    rows.push_back({{"epsilon", row.epsilon},
                    {"h", row.deviation_scale},
                    {"h2", row.speed},
                    {"p_hat", row.estimate.probability},
                    {"ci_lower", row.estimate.lower},
                    {"ci_upper", row.estimate.upper},
                    {"hits", row.estimate.hits},
                    {"samples", row.estimate.samples},
                    {"zero_hits", row.estimate.zero_hits},
                    {"scaled_log", number_or_null(row.scaled_log)},
                    {"valid", row.valid}});
  }
  return {{"delta", delta},
          {"slope", r.fit.slope},
          {"intercept", r.fit.intercept},
          {"rows_used", r.fit.rows_used},
          {"reference_rate", r.reference_rate},
          {"relative_gap", r.relative_gap},
          {"rows", rows}};
}

Json to_json(const DecayTable& t, const std::string& quantity) {
  Json rows = Json::array();
  for (const DecayRow& row : t.rows) {
    rows.push_back(
        {{"epsilon", row.epsilon}, {"mean", row.mean}, {"std_error", row.std_error}, {"samples", row.samples}});
  }
  return {{"quantity", quantity},
          {"monotone", t.monotone},
          {"significant", t.significant},
          {"loglog_exponent", number_or_null(t.loglog_exponent)},
          {"last_to_first", number_or_null(t.last_to_first)},
          {"rows", rows}};
}

void write_sweep_csv(const SweepResult& r, std::ostream& out) {
  out << "epsilon,h,h2,p_hat,ci_lower,ci_upper,hits,samples,scaled_log,valid\n";
  for (const SweepRow& row : r.rows) {
    out << format_double(row.epsilon) << ',' << format_double(row.deviation_scale) << ','
        << format_double(row.speed) << ',' << format_double(row.estimate.probability) << ','
        << format_double(row.estimate.lower) << ',' << format_double(row.estimate.upper) << ','
        << row.estimate.hits << ',' << row.estimate.samples << ','
        << (row.valid ? format_double(row.scaled_log) : std::string("nan")) << ',' << (row.valid ? 1 : 0) << '\n';
  }
}

void write_decay_csv(const DecayTable& t, std::ostream& out) {
  out << "epsilon,mean,std_error,samples\n";
  for (const DecayRow& row : t.rows) {
    out << format_double(row.epsilon) << ',' << format_double(row.mean) << ',' << format_double(row.std_error)
        << ',' << row.samples << '\n';
  }
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  return run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Moderate deviations for strongly damped Langevin dynamics"};
  app.require_subcommand(1, 1);
  app.fallthrough();
  app.set_version_flag("--version", kVersion);

  std::string config_path;
  std::vector<std::string> overrides;
  std::optional<int> threads;
  std::string out_dir;
  std::string terminal;
  std::string target;
  app.add_option("-c,--config", config_path, "JSON config file")->check(CLI::ExistingFile);
  app.add_option("--set", overrides, "Override a config key, e.g. --set sim.epsilon=0.05")->take_all();
  app.add_option("--threads", threads, "Worker threads (0 = all cores)");
  app.add_option("--out", out_dir, "Output directory (overrides " + std::string(kOutputDirEnv) + ")");

  struct Sub {
    const char* name;
    const char* help;
  };
  const Sub subs[] = {
      {"validate", "Audit the model against the standing assumptions"},
      {"limit", "Solve the limit ODE"},
      {"simulate", "Simulate one Langevin path and its remainder decomposition"},
      {"rate", "Rate of a target path (experiment.target) or terminal point (--terminal)"},
      {"exit-rate", "Minimum rate over paths that reach |x| = delta"},
      {"mdp-sweep", "Exceedance probabilities and MDP slope fit"},
      {"remainder-sweep", "Monte Carlo decay of the normalized remainder"},
      {"weak-conv", "Distance between controlled fluctuations and the skeleton"},
  };
  for (const Sub& s : subs) {
    CLI::App* sub = app.add_subcommand(s.name, s.help);
    if (std::string(s.name) == "rate") {
      sub->add_option("--terminal", terminal, "Terminal point, comma separated");
      sub->add_option("--target", target, "Target fluctuation path CSV");
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << kVersion << '\n';
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "lmdp: " << e.what() << '\n';
    return kExitConfig;
  }
  const std::string subcommand = app.get_subcommands().front()->get_name();

  RunConfig rc;
  try {
    Json user = config_path.empty() ? Json::object() : load_config_file(config_path);
    for (const auto& o : overrides) apply_override(user, o);
    if (threads) apply_override(user, "output.threads=" + std::to_string(*threads));
    if (!terminal.empty()) user["experiment"]["terminal"] = parse_number_list(terminal);
    if (!target.empty()) user["experiment"]["target"] = target;
    if (!out_dir.empty()) {
      user["output"]["dir"] = out_dir;
    } else if (const char* env = std::getenv(kOutputDirEnv); env && *env) {
      user["output"]["dir"] = std::string(env);
    }
    rc = parse_run_config(user);
  } catch (const ConfigError& e) {
    err << "lmdp: config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const Json::exception& e) {
    err << "lmdp: config error: " << e.what() << '\n';
    return kExitConfig;
  }

  try {
    OutputDir dir(rc.output_dir);
    int status = kExitOk;
    if (subcommand == "validate") {
      bool passed = true;
      run_validate(rc, dir, out, passed);
      if (!passed) {
        err << "lmdp: model violates a standing assumption, see hypothesis.json\n";
        status = kExitNumerical;
      }
    } else if (subcommand == "limit") {
      run_limit(rc, dir);
    } else if (subcommand == "simulate") {
      run_simulate(rc, dir);
    } else if (subcommand == "rate") {
      run_rate(rc, dir, out);
    } else if (subcommand == "exit-rate") {
      run_exit_rate(rc, dir, out);
    } else if (subcommand == "mdp-sweep") {
      run_mdp_sweep(rc, dir, out);
    } else if (subcommand == "remainder-sweep") {
      run_remainder_sweep(rc, dir, out);
    } else if (subcommand == "weak-conv") {
      run_weak_conv(rc, dir, out);
    }
    Json manifest = {{"tool", "lmdp"},
                     {"version", kVersion},
                     {"subcommand", subcommand},
                     {"created_utc", utc_timestamp()},
                     {"threads", resolve_threads({rc.threads})},
                     {"files", dir.files()},
                     {"config", rc.resolved}};
    dir.json("manifest.json", manifest);
    return status;
  } catch (const ConfigError& e) {
    err << "lmdp: config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const Error& e) {
    err << "lmdp: " << e.what() << '\n';
    return classify(e);
  } catch (const std::exception& e) {
    err << "lmdp: " << e.what() << '\n';
    return kExitUnexpected;
  }
}

}  // namespace lmdp
