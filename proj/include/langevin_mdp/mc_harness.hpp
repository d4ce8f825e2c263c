#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "langevin_mdp/coefficients.hpp"
#include "langevin_mdp/sde_sim.hpp"
#include "langevin_mdp/skeleton_rate.hpp"

namespace lmdp {

struct ParallelOptions {
  int threads = 0;  // 0 uses std::thread::hardware_concurrency()
};

int resolve_threads(const ParallelOptions& options);

// Calls body(i) for i in [0, count) on a pool of worker threads. The first
// exception thrown by any call is rethrown after all workers stop.
void parallel_for(long count, const ParallelOptions& options, const std::function<void(long)>& body);

// Pairwise summation in index order; the result depends only on the values.
double pairwise_sum(const double* values, std::size_t count);
double pairwise_sum(const std::vector<double>& values);

struct SampleMean {
  double mean = 0.0;
  double std_error = 0.0;
  long samples = 0;
};

SampleMean sample_mean(const std::vector<double>& values);

struct McEstimate {
  double probability = 0.0;
  long samples = 0;
  long hits = 0;
  double lower = 0.0;  // Wilson 95% interval
  double upper = 0.0;
  bool zero_hits = false;
};

McEstimate wilson_interval(long hits, long samples);

// Sup-norm of the fluctuation (q_eps - q0)/(sqrt(eps) h) over the coarse grid
// for sample `sample` of stream `stream`.
double fluctuation_sup(const CoefficientModel& model, const SimConfig& config, const Path& q0path,
                       std::uint32_t sample, std::uint32_t stream);

// Fraction of n paths with sup_t |X_eps(t)| >= delta. Requires n >= 100.
McEstimate estimate_exceedance(const CoefficientModel& model, const SimConfig& config, double delta, long n,
                               const ParallelOptions& options = {}, std::uint32_t stream = 0);

struct SweepRow {
  double epsilon = 0.0;
  double deviation_scale = 0.0;  // h(eps)
  double speed = 0.0;            // h(eps)^2
  McEstimate estimate;
  double scaled_log = 0.0;  // -log p / h^2, NaN when p is 0 or 1
  bool valid = false;       // 0 < p < 1
};

struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;
  int rows_used = 0;
};

// Weighted least squares of -log p against h^2 with intercept. Row weights
// are the inverse delta-method variances n p / (1 - p). Rows with p in
// {0, 1} are skipped; fewer than 3 usable rows throws InsufficientData.
SlopeFit fit_mdp_slope(const std::vector<SweepRow>& rows);

struct SweepResult {
  std::vector<SweepRow> rows;  // epsilon descending
  SlopeFit fit;
  double reference_rate = 0.0;  // exit rate at delta
  double relative_gap = 0.0;    // |slope - reference| / reference
};

// Row k uses noise stream k, so rows are independent and individually replayable.
SweepResult mdp_slope_sweep(const CoefficientModel& model, const SimConfig& base, double delta,
                            const std::vector<double>& eps_list, long n_per_eps,
                            const ParallelOptions& options = {});

struct DecayRow {
  double epsilon = 0.0;
  double mean = 0.0;
  double std_error = 0.0;
  long samples = 0;
};

struct DecayTable {
  std::vector<DecayRow> rows;
  bool monotone = false;     // means strictly decrease along the rows
  bool significant = false;  // every decrease exceeds 2 combined standard errors
  double loglog_exponent = 0.0;  // least-squares slope of log mean against log eps
  double last_to_first = 0.0;    // mean(last) / mean(first)
};

DecayTable make_decay_table(std::vector<DecayRow> rows);

// Mean of sup_t |R_eps(t)| / (sqrt(eps) h(eps)) per epsilon.
DecayTable remainder_sweep(const CoefficientModel& model, const SimConfig& base,
                           const std::vector<double>& eps_list, long n_per_eps,
                           const ParallelOptions& options = {});

// Mean of sup_t |X^u_eps(t) - X^u(t)| per epsilon, where X^u_eps is the
// fluctuation of the controlled simulation and X^u = skeleton_map(u).
DecayTable weak_convergence_check(const CoefficientModel& model, const SimConfig& base, const Control& u,
                                  const std::vector<double>& eps_list, long n_per_eps,
                                  const ParallelOptions& options = {});

// Throws InvalidArgument unless the list is strictly decreasing, positive and
// has at least `min_length` entries.
void check_eps_list(const std::vector<double>& eps_list, std::size_t min_length);

}  // namespace lmdp
