#include "langevin_mdp/mc_harness.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>

#include "langevin_mdp/errors.hpp"
#include "langevin_mdp/limit_flow.hpp"

namespace lmdp {

namespace {

constexpr double kWilsonZ = 1.959963984540054;

Path limit_path(const CoefficientModel& model, const SimConfig& config) {
  return solve_limit_ode(model, config.q, config.grid);
}

double sup_distance(const RowMatrix& a, const RowMatrix& b) {
  double best = 0.0;
  for (Eigen::Index i = 0; i < a.rows(); ++i) best = std::max(best, (a.row(i) - b.row(i)).norm());
  return best;
}

template <class F>
std::vector<double> sample_values(long n, const ParallelOptions& options, F&& f) {
  std::vector<double> out(static_cast<std::size_t>(n));
  parallel_for(n, options, [&](long i) { out[static_cast<std::size_t>(i)] = f(i); });
  return out;
}

}  // namespace

int resolve_threads(const ParallelOptions& options) {
  if (options.threads < 0) throw Error(ErrorKind::InvalidArgument, "threads must be >= 0");
  if (options.threads > 0) return options.threads;
  return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(long count, const ParallelOptions& options, const std::function<void(long)>& body) {
  if (count <= 0) return;
  const long workers = std::min<long>(resolve_threads(options), count);
  if (workers == 1) {
    for (long i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<long> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto work = [&] {
    while (!failed.load(std::memory_order_relaxed)) {
      const long i = next.fetch_add(1, std::memory_order_relaxed);
      if (i >= count) return;
      try {
        body(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        failed = true;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers - 1));
  for (long t = 1; t < workers; ++t) pool.emplace_back(work);
  work();
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

double pairwise_sum(const double* values, std::size_t count) {
  if (count <= 8) {
    double s = 0.0;
    for (std::size_t i = 0; i < count; ++i) s += values[i];
    return s;
  }
  const std::size_t half = count / 2;
  return pairwise_sum(values, half) + pairwise_sum(values + half, count - half);
}

double pairwise_sum(const std::vector<double>& values) { return pairwise_sum(values.data(), values.size()); }

SampleMean sample_mean(const std::vector<double>& values) {
  SampleMean out;
  out.samples = static_cast<long>(values.size());
  if (values.empty()) return out;
  out.mean = pairwise_sum(values) / static_cast<double>(values.size());
  if (values.size() > 1) {
    std::vector<double> sq(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) sq[i] = (values[i] - out.mean) * (values[i] - out.mean);
    const double var = pairwise_sum(sq) / static_cast<double>(values.size() - 1);
    out.std_error = std::sqrt(var / static_cast<double>(values.size()));
  }
  return out;
}

McEstimate wilson_interval(long hits, long samples) {
  if (samples <= 0 || hits < 0 || hits > samples) {
    throw Error(ErrorKind::InvalidArgument, "need 0 <= hits <= samples and samples > 0");
  }
  McEstimate e;
  e.samples = samples;
  e.hits = hits;
  const double n = static_cast<double>(samples);
  const double p = static_cast<double>(hits) / n;
  e.probability = p;
  e.zero_hits = hits == 0;
  const double z2 = kWilsonZ * kWilsonZ;
  const double denom = 1.0 + z2 / n;
  const double centre = (p + z2 / (2.0 * n)) / denom;
  const double half = kWilsonZ * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
  e.lower = std::clamp(centre - half, 0.0, p);
  e.upper = std::clamp(centre + half, p, 1.0);
  return e;
}

double fluctuation_sup(const CoefficientModel& model, const SimConfig& config, const Path& q0path,
                       std::uint32_t sample, std::uint32_t stream) {
  const NoisePath noise = sample_noise(config, sample, stream);
  const LangevinState state = simulate_langevin(model, config, noise);
  return sup_distance(state.q.values, q0path.values) / config.fluctuation_scale();
}

McEstimate estimate_exceedance(const CoefficientModel& model, const SimConfig& config, double delta, long n,
                               const ParallelOptions& options, std::uint32_t stream) {
  if (n < 100) throw Error(ErrorKind::InvalidArgument, "estimate_exceedance needs n >= 100");
  if (!(delta >= 0.0)) throw Error(ErrorKind::InvalidArgument, "delta must be >= 0");
  config.validate();
  const Path q0path = limit_path(model, config);
  std::vector<unsigned char> hit(static_cast<std::size_t>(n), 0);
  parallel_for(n, options, [&](long i) {
    const double s = fluctuation_sup(model, config, q0path, static_cast<std::uint32_t>(i), stream);
    hit[static_cast<std::size_t>(i)] = s >= delta ? 1 : 0;
  });
  long hits = 0;
  for (unsigned char h : hit) hits += h;
  return wilson_interval(hits, n);
}

SlopeFit fit_mdp_slope(const std::vector<SweepRow>& rows) {
  double sw = 0.0, sx = 0.0, sy = 0.0;
  int used = 0;
  std::vector<std::array<double, 3>> pts;
  for (const SweepRow& r : rows) {
    const double p = r.estimate.probability;
    if (!(p > 0.0 && p < 1.0)) continue;
    const double w = static_cast<double>(r.estimate.samples) * p / (1.0 - p);
    pts.push_back({r.speed, -std::log(p), w});
    sw += w;
    sx += w * r.speed;
    sy += w * -std::log(p);
    ++used;
  }
  if (used < 3) {
    throw Error(ErrorKind::InsufficientData,
                "slope fit needs 3 rows with 0 < p < 1, got " + std::to_string(used));
  }
  const double xbar = sx / sw;
  const double ybar = sy / sw;
  double sxx = 0.0, sxy = 0.0;
  for (const auto& pt : pts) {
    sxx += pt[2] * (pt[0] - xbar) * (pt[0] - xbar);
    sxy += pt[2] * (pt[0] - xbar) * (pt[1] - ybar);
  }
  if (!(sxx > 0.0)) throw Error(ErrorKind::InsufficientData, "all rows share the same h^2");
  SlopeFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = ybar - fit.slope * xbar;
  fit.rows_used = used;
  return fit;
}

void check_eps_list(const std::vector<double>& eps_list, std::size_t min_length) {
  if (eps_list.size() < min_length) {
    throw Error(ErrorKind::InvalidArgument, "epsilon list needs at least " + std::to_string(min_length) + " entries");
  }
  for (std::size_t k = 0; k < eps_list.size(); ++k) {
    if (!(eps_list[k] > 0.0)) throw Error(ErrorKind::InvalidArgument, "epsilon values must be positive");
    if (k > 0 && !(eps_list[k] < eps_list[k - 1])) {
      throw Error(ErrorKind::InvalidArgument, "epsilon list must be strictly decreasing");
    }
  }
}

SweepResult mdp_slope_sweep(const CoefficientModel& model, const SimConfig& base, double delta,
                            const std::vector<double>& eps_list, long n_per_eps, const ParallelOptions& options) {
  check_eps_list(eps_list, 3);
  if (!(delta > 0.0)) throw Error(ErrorKind::InvalidArgument, "delta must be positive");
  SweepResult result;
  for (std::size_t k = 0; k < eps_list.size(); ++k) {
    const SimConfig cfg = base.with_epsilon(eps_list[k]);
    SweepRow row;
    row.epsilon = cfg.epsilon;
    row.deviation_scale = cfg.deviation_scale();
    row.speed = row.deviation_scale * row.deviation_scale;
    row.estimate = estimate_exceedance(model, cfg, delta, n_per_eps, options, static_cast<std::uint32_t>(k));
    const double p = row.estimate.probability;
    row.valid = p > 0.0 && p < 1.0;
    row.scaled_log = row.valid ? -std::log(p) / row.speed : std::numeric_limits<double>::quiet_NaN();
    result.rows.push_back(row);
  }
  result.fit = fit_mdp_slope(result.rows);
  const Path q0path = limit_path(model, base);
  const TransitionFamily phis = transition_family(model, q0path);
  result.reference_rate = exit_rate(model, q0path, phis, delta).rate;
  result.relative_gap = std::abs(result.fit.slope - result.reference_rate) / result.reference_rate;
  return result;
}

DecayTable make_decay_table(std::vector<DecayRow> rows) {
  DecayTable t;
  t.rows = std::move(rows);
  if (t.rows.empty()) return t;
  t.monotone = true;
  t.significant = true;
  for (std::size_t k = 1; k < t.rows.size(); ++k) {
    const DecayRow& a = t.rows[k - 1];
    const DecayRow& b = t.rows[k];
    if (!(b.mean < a.mean)) t.monotone = false;
    const double se = std::sqrt(a.std_error * a.std_error + b.std_error * b.std_error);
    if (!(a.mean - b.mean > 2.0 * se)) t.significant = false;
  }
  t.significant = t.significant && t.monotone;
  const double first = t.rows.front().mean;
  t.last_to_first = first > 0.0 ? t.rows.back().mean / first : std::numeric_limits<double>::quiet_NaN();

  double sx = 0.0, sy = 0.0;
  int m = 0;
  for (const DecayRow& r : t.rows) {
    if (r.mean > 0.0) {
      sx += std::log(r.epsilon);
      sy += std::log(r.mean);
      ++m;
    }
  }
  if (m >= 2) {
    const double xbar = sx / m, ybar = sy / m;
    double sxx = 0.0, sxy = 0.0;
    for (const DecayRow& r : t.rows) {
      if (r.mean > 0.0) {
        const double dx = std::log(r.epsilon) - xbar;
        sxx += dx * dx;
        sxy += dx * (std::log(r.mean) - ybar);
      }
    }
    t.loglog_exponent = sxx > 0.0 ? sxy / sxx : 0.0;
  }
  return t;
}

DecayTable remainder_sweep(const CoefficientModel& model, const SimConfig& base,
                           const std::vector<double>& eps_list, long n_per_eps, const ParallelOptions& options) {
  check_eps_list(eps_list, 1);
  if (n_per_eps < 2) throw Error(ErrorKind::InvalidArgument, "n_per_eps must be >= 2");
  std::vector<DecayRow> rows;
  for (std::size_t k = 0; k < eps_list.size(); ++k) {
    const SimConfig cfg = base.with_epsilon(eps_list[k]);
    const auto stream = static_cast<std::uint32_t>(k);
    const auto values = sample_values(n_per_eps, options, [&](long i) {
      const NoisePath noise = sample_noise(cfg, static_cast<std::uint32_t>(i), stream);
      const LangevinState state = simulate_langevin(model, cfg, noise, Recording::Fine);
      return remainder_decomposition(model, state, noise, cfg).normalized_sup;
    });
    const SampleMean m = sample_mean(values);
    rows.push_back({cfg.epsilon, m.mean, m.std_error, m.samples});
  }
  return make_decay_table(std::move(rows));
}

DecayTable weak_convergence_check(const CoefficientModel& model, const SimConfig& base, const Control& u,
                                  const std::vector<double>& eps_list, long n_per_eps,
                                  const ParallelOptions& options) {
  check_eps_list(eps_list, 1);
  if (n_per_eps < 2) throw Error(ErrorKind::InvalidArgument, "n_per_eps must be >= 2");
  const Path q0path = limit_path(model, base);
  const Path target = skeleton_map(model, q0path, u);
  std::vector<DecayRow> rows;
  for (std::size_t k = 0; k < eps_list.size(); ++k) {
    const SimConfig cfg = base.with_epsilon(eps_list[k]);
    const auto stream = static_cast<std::uint32_t>(k);
    const auto values = sample_values(n_per_eps, options, [&](long i) {
      const NoisePath noise = sample_noise(cfg, static_cast<std::uint32_t>(i), stream);
      const LangevinState state = simulate_langevin(model, cfg, noise, u);
      return sup_distance(fluctuation_path(state.q, q0path, cfg).values, target.values);
    });
    const SampleMean m = sample_mean(values);
    rows.push_back({cfg.epsilon, m.mean, m.std_error, m.samples});
  }
  return make_decay_table(std::move(rows));
}

}  // namespace lmdp
