#pragma once

#include <vector>

#include "langevin_mdp/coefficients.hpp"
#include "langevin_mdp/limit_flow.hpp"
#include "langevin_mdp/time_grid.hpp"

namespace lmdp {

// Element h of the Cameron-Martin space represented by its derivative,
// piecewise constant on the grid: rates.row(i) = h'(t) for t in [t_i, t_{i+1}).
// h(0) = 0 by construction.
struct Control {
  TimeGrid grid;
  RowMatrix rates;  // n x d

  Control() : Control(TimeGrid(), RowMatrix::Zero(1, 1)) {}
  Control(TimeGrid g, RowMatrix r);
  static Control zero(TimeGrid g, int dim);
  static Control constant(TimeGrid g, const Vec& value);
  // `segments` rows split [0, T] into equal pieces; interval i takes the
  // segment containing its midpoint.
  static Control piecewise(TimeGrid g, const RowMatrix& segments);

  int dim() const noexcept { return static_cast<int>(rates.cols()); }
  Vec rate(int i) const { return rates.row(i).transpose(); }

  // 1/2 int |h'|^2 dt
  double energy() const;
  // h(t_i) = int_0^{t_i} h'(s) ds
  Path integral() const;
};

struct RateResult {
  double rate = 0.0;
  Control optimal_control;
  double gramian_condition = 0.0;
  double residual = 0.0;
  double t_star = 0.0;
  Vec direction;          // unit exit direction; empty for path rates
  int skipped_times = 0;  // exit scan only: horizons with a singular Gramian
};

// Solves g(t) = int_0^t A g ds + int_0^t B h' ds with g(0) = 0 (RK4).
// Throws GridMismatch if the control and limit path grids differ.
Path skeleton_map(const CoefficientModel& model, const Path& q0path, const Control& h);
Path skeleton_map(const Linearization& lin, const Control& h);

// Rate of a target fluctuation path. With sigma invertible the control that
// reproduces psi is unique on each interval, h'_i = S_i^{-1}(psi_{i+1} - M_i psi_i),
// and the rate is its energy. gramian_condition reports the worst condition
// number among the one-step input maps S_i.
// Throws NonzeroStart, SingularDiffusion, GridMismatch.
RateResult rate_of_path(const CoefficientModel& model, const Path& q0path, const Path& psi);

// Q(T) for controls that are constant on each grid interval:
// Q = sum_i G_i G_i^T / dt, G_i = Phi(T, t_{i+1}) S_i, where S_i is the
// one-step response to a unit input. Agrees with int Phi B B^T Phi^T ds to O(dt^2).
Mat controllability_gramian(const CoefficientModel& model, const Path& q0path,
                            const TransitionFamily& phis);

// Q(t_k) for k = 0..n by the forward recursion Q_{k+1} = M_k Q_k M_k^T + S_k S_k^T / dt.
std::vector<Mat> gramian_sequence(const Linearization& lin);

struct GramianInverse {
  Mat inverse;
  double condition = 0.0;
};

// Symmetric eigendecomposition; eigenvalues at or below 1e-14 * max are
// treated as zero and raise SingularGramian.
GramianInverse invert_gramian(const Mat& q);

// Minimum energy to reach x at T: rate = x^T Q^{-1} x / 2.
RateResult terminal_rate(const CoefficientModel& model, const Path& q0path,
                         const TransitionFamily& phis, const Vec& x);

struct ExitRateOptions {
  int directions = 0;  // 0 selects the default for the dimension
};

// inf of the rate over paths with sup_t |psi(t)| >= delta, scanned over
// grid exit times t* and a direction grid on the sphere |x| = delta.
// Directions: d = 1 uses +-1; d = 2 defaults to 64 angles; d = 3 defaults to
// a 256-point Fibonacci lattice; d > 3 throws NotSupported.
RateResult exit_rate(const CoefficientModel& model, const Path& q0path, const TransitionFamily& phis,
                     double delta, const ExitRateOptions& options = {});

struct ExitRateRefinement {
  RateResult coarse;
  double refined_rate = 0.0;   // same scan on the grid with 2n steps
  double refinement_delta = 0.0;  // refined_rate - coarse.rate
};

ExitRateRefinement exit_rate_refined(const CoefficientModel& model, const Vec& q0, const TimeGrid& grid,
                                     double delta, const ExitRateOptions& options = {});

// Unit vectors scanned by exit_rate.
std::vector<Vec> sphere_directions(int dim, int count);

}  // namespace lmdp
