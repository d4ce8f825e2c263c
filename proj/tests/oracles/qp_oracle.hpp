#pragma once

#include <vector>

#include <Eigen/Dense>

#include "langevin_mdp/coefficients.hpp"

// Reference solutions built only from the raw coefficient callables: the
// limit path and its linearization are integrated with many Heun substeps,
// and the rates come from the KKT system of the discretized least-norm problem.
namespace oracle {

struct OneStepMaps {
  double dt = 0.0;
  std::vector<Eigen::MatrixXd> step;   // g_{i+1} = step[i] g_i + input[i] c_i
  std::vector<Eigen::MatrixXd> input;
};

OneStepMaps fine_heun_maps(const lmdp::CoefficientModel& model, const Eigen::VectorXd& q0, double horizon,
                           int steps, int substeps = 200);

// min 1/2 sum |c_i|^2 dt subject to g(t_k) = psi.row(k) for k = 1..n.
double path_rate_qp(const OneStepMaps& maps, const Eigen::MatrixXd& psi);

// min 1/2 sum |c_i|^2 dt subject to g(T) = x.
double terminal_rate_qp(const OneStepMaps& maps, const Eigen::VectorXd& x);

}  // namespace oracle
