#pragma once

#include <cstdint>
#include <vector>

#include "langevin_mdp/coefficients.hpp"
#include "langevin_mdp/skeleton_rate.hpp"
#include "langevin_mdp/time_grid.hpp"

namespace lmdp {

// Simulation parameters for one value of epsilon. The deviation scale is
// h(eps) = eps^-kappa with kappa in (0, 1/2), so h -> inf and sqrt(eps) h -> 0.
struct SimConfig {
  double epsilon = 0.1;
  double kappa = 0.25;
  TimeGrid grid;
  int substeps = 1;  // m, substeps per coarse step
  double stiffness_cap = 0.2;
  std::uint64_t seed = 0;
  Vec q;  // initial position
  Vec p;  // initial momentum parameter; the velocity starts at p / eps

  // Validates ranges and raises `substeps` until dt/m <= cap * eps^2.
  static SimConfig make(double epsilon, double kappa, TimeGrid grid, Vec q, Vec p, std::uint64_t seed,
                        double stiffness_cap = 0.2, int min_substeps = 1);

  // Same configuration at another epsilon; substeps are re-derived from the cap.
  SimConfig with_epsilon(double eps) const;

  int dim() const { return static_cast<int>(q.size()); }
  double deviation_scale() const;    // h(eps)
  double fluctuation_scale() const;  // sqrt(eps) h(eps)
  double dt_sub() const { return grid.dt() / substeps; }
  static int required_substeps(double dt, double epsilon, double cap);

  // Throws InvalidArgument for range errors and StiffnessViolation when the
  // substep exceeds the cap.
  void validate() const;
};

// Brownian increments on the substep lattice of a grid. Each substep
// increment is N(0, dt_sub I); coarse increments are sums of their substeps.
class NoisePath {
 public:
  NoisePath(TimeGrid grid, int substeps, RowMatrix increments, std::uint64_t seed = 0,
            std::uint32_t sample = 0, std::uint32_t stream = 0);

  const TimeGrid& grid() const noexcept { return grid_; }
  int substeps() const noexcept { return substeps_; }
  int dim() const noexcept { return static_cast<int>(increments_.cols()); }
  long total_substeps() const noexcept { return static_cast<long>(increments_.rows()); }
  double dt_sub() const noexcept { return grid_.dt() / substeps_; }
  std::uint64_t seed() const noexcept { return seed_; }
  std::uint32_t sample() const noexcept { return sample_; }
  std::uint32_t stream() const noexcept { return stream_; }

  const RowMatrix& increments() const noexcept { return increments_; }
  Vec substep(long k) const { return increments_.row(k).transpose(); }
  Vec coarse(int i) const;

  // Increments of w + scale * int u' ds, i.e. scale * u'_i * dt_sub added to
  // every substep of coarse interval i.
  NoisePath shifted(const Control& u, double scale) const;

 private:
  TimeGrid grid_;
  int substeps_;
  RowMatrix increments_;
  std::uint64_t seed_;
  std::uint32_t sample_;
  std::uint32_t stream_;
};

// Reproducible increments addressed by (config.seed, sample, stream).
NoisePath sample_noise(const SimConfig& config, std::uint32_t sample = 0, std::uint32_t stream = 0);

enum class Recording { Coarse, Fine };

struct LangevinState {
  Path q;  // position on the coarse grid
  Path p;  // velocity dq/dt on the coarse grid
  Vec q_final;
  Vec p_final;
  RowMatrix fine_q;  // substep lattice, filled with Recording::Fine
  RowMatrix fine_p;

  bool has_fine() const { return fine_q.rows() > 0; }
};

// Second-order system dq = p dt, eps^2 dp = (b - alpha p) dt + sqrt(eps) sigma dw,
// with velocity p(0) = p/eps. Each substep freezes the coefficients, applies
// the exact exponential decay to the velocity with a colored noise kick, then
// advances the position with the updated velocity.
LangevinState simulate_langevin(const CoefficientModel& model, const SimConfig& config,
                                const NoisePath& noise, Recording recording = Recording::Coarse);

// Controlled variant: the forcing sqrt(eps) h(eps) sigma u' is applied by
// shifting the noise increments, so this equals the uncontrolled run on
// noise.shifted(u, h(eps)).
LangevinState simulate_langevin(const CoefficientModel& model, const SimConfig& config,
                                const NoisePath& noise, const Control& control,
                                Recording recording = Recording::Coarse);

// Euler-Maruyama for dg = b/alpha dt + sqrt(eps) sigma/alpha dw on the coarse grid.
Path simulate_first_order(const CoefficientModel& model, const SimConfig& config, const NoisePath& noise);

// (q_eps - q0) / (sqrt(eps) h(eps))
Path fluctuation_path(const Path& qpath, const Path& q0path, const SimConfig& config);

struct RemainderReport {
  bool controlled = false;
  std::vector<double> term_sup;  // sup-norm of each term, 5 (uncontrolled) or 7 (controlled)
  double total_sup = 0.0;
  double normalized_sup = 0.0;  // total_sup / (sqrt(eps) h(eps))
  double h1_sup = 0.0;
  double h2_sup = 0.0;
  double representation_residual = 0.0;
  Path remainder;  // R on the coarse grid
};

// Splits q_eps - [q + int b/alpha ds + sqrt(eps) int sigma/alpha dw] into the
// boundary-layer and stochastic-convolution terms. Needs a state recorded
// with Recording::Fine on the same noise and config.
RemainderReport remainder_decomposition(const CoefficientModel& model, const LangevinState& state,
                                        const NoisePath& noise, const SimConfig& config);
RemainderReport remainder_decomposition(const CoefficientModel& model, const LangevinState& state,
                                        const NoisePath& noise, const SimConfig& config,
                                        const Control& control);

}  // namespace lmdp
