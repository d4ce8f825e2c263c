#pragma once

#include <vector>

#include "langevin_mdp/coefficients.hpp"
#include "langevin_mdp/time_grid.hpp"

namespace lmdp {

// Classical RK4 for dq/dt = b(q)/alpha(q), q(0) = q0.
// Throws NonPositiveDamping or NonFinite.
Path solve_limit_ode(const CoefficientModel& model, const Vec& q0, const TimeGrid& grid);

// Coefficients of the linearized flow along a limit path, evaluated at the
// grid nodes and interval midpoints, plus the one-step maps of the RK4
// scheme for g' = A(t) g + B(t) c with c constant on each interval:
//
//   g_{i+1} = step[i] g_i + input_step[i] c_i.
//
// A = D(b/alpha)(q0(t)), B = sigma(q0(t))/alpha(q0(t)).
struct Linearization {
  TimeGrid grid;
  std::vector<Mat> drift_node;  // A(t_i), i = 0..n
  std::vector<Mat> drift_mid;   // A(t_i + dt/2), i = 0..n-1
  std::vector<Mat> input_node;  // B(t_i)
  std::vector<Mat> input_mid;   // B(t_i + dt/2)
  std::vector<Mat> step;        // RK4 propagator over [t_i, t_{i+1}]
  std::vector<Mat> input_step;  // RK4 response to a unit constant input

  int dim() const { return static_cast<int>(drift_node.front().rows()); }
};

// Midpoint states come from cubic Hermite interpolation of the path using
// the vector field at both ends, which keeps the scheme fourth order.
Linearization linearize(const CoefficientModel& model, const Path& q0path);

// Phi_i = Phi(T, t_i), the state transition of y' = A(t) y from t_i to T.
struct TransitionFamily {
  TimeGrid grid;
  std::vector<Mat> phis;

  const Mat& operator[](int i) const { return phis[static_cast<std::size_t>(i)]; }
};

TransitionFamily transition_family(const CoefficientModel& model, const Path& q0path);
TransitionFamily transition_family(const Linearization& lin);

}  // namespace lmdp
