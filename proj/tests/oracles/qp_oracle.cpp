#include "qp_oracle.hpp"

#include <cmath>

namespace oracle {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

VectorXd field(const lmdp::CoefficientModel& m, const VectorXd& x) {
  const lmdp::Vec v = x;
  return m.drift(v) / m.damping(v);
}

MatrixXd jacobian(const lmdp::CoefficientModel& m, const VectorXd& x) {
  const int d = static_cast<int>(x.size());
  MatrixXd j(d, d);
  for (int k = 0; k < d; ++k) {
    const double h = 1e-5 * std::max(1.0, std::abs(x[k]));
    VectorXd up = x, dn = x;
    up[k] += h;
    dn[k] -= h;
    j.col(k) = (field(m, up) - field(m, dn)) / (2.0 * h);
  }
  return j;
}

MatrixXd input_gain(const lmdp::CoefficientModel& m, const VectorXd& x) {
  const lmdp::Vec v = x;
  return MatrixXd(m.diffusion(v)) / m.damping(v);
}

struct State {
  VectorXd q;
  MatrixXd y;  // propagator
  MatrixXd z;  // response to unit constant input
};

State rhs(const lmdp::CoefficientModel& m, const State& s) {
  const MatrixXd a = jacobian(m, s.q);
  return {field(m, s.q), a * s.y, a * s.z + input_gain(m, s.q)};
}

State axpy(const State& s, double h, const State& k) { return {s.q + h * k.q, s.y + h * k.y, s.z + h * k.z}; }

}  // namespace

OneStepMaps fine_heun_maps(const lmdp::CoefficientModel& model, const VectorXd& q0, double horizon, int steps,
                           int substeps) {
  const int d = static_cast<int>(q0.size());
  OneStepMaps maps;
  maps.dt = horizon / steps;
  const double h = maps.dt / substeps;
  VectorXd q = q0;
  for (int i = 0; i < steps; ++i) {
    State s{q, MatrixXd::Identity(d, d), MatrixXd::Zero(d, d)};
    for (int k = 0; k < substeps; ++k) {
      const State k1 = rhs(model, s);
      const State k2 = rhs(model, axpy(s, h, k1));
      s = {s.q + 0.5 * h * (k1.q + k2.q), s.y + 0.5 * h * (k1.y + k2.y), s.z + 0.5 * h * (k1.z + k2.z)};
    }
    maps.step.push_back(s.y);
    maps.input.push_back(s.z);
    q = s.q;
  }
  return maps;
}

namespace {

// Rows k*d..(k+1)*d-1 of the returned matrix map the stacked controls to g(t_{k+1}).
MatrixXd response_matrix(const OneStepMaps& maps) {
  const int n = static_cast<int>(maps.step.size());
  const int d = static_cast<int>(maps.step.front().rows());
  MatrixXd c = MatrixXd::Zero(n * d, n * d);
  for (int i = 0; i < n; ++i) {
    MatrixXd block = maps.input[static_cast<std::size_t>(i)];
    for (int k = i; k < n; ++k) {
      if (k > i) block = maps.step[static_cast<std::size_t>(k)] * block;
      c.block(k * d, i * d, d, d) = block;
    }
  }
  return c;
}

double least_norm(const MatrixXd& c, const VectorXd& rhs, double dt) {
  const auto m = c.rows();
  const auto n = c.cols();
  MatrixXd kkt = MatrixXd::Zero(n + m, n + m);
  kkt.topLeftCorner(n, n) = dt * MatrixXd::Identity(n, n);
  kkt.topRightCorner(n, m) = c.transpose();
  kkt.bottomLeftCorner(m, n) = c;
  VectorXd b = VectorXd::Zero(n + m);
  b.tail(m) = rhs;
  const VectorXd sol = kkt.fullPivLu().solve(b);
  return 0.5 * dt * sol.head(n).squaredNorm();
}

}  // namespace

double path_rate_qp(const OneStepMaps& maps, const MatrixXd& psi) {
  const int n = static_cast<int>(maps.step.size());
  const int d = static_cast<int>(psi.cols());
  VectorXd target(n * d);
  for (int k = 0; k < n; ++k) target.segment(k * d, d) = psi.row(k + 1).transpose();
  return least_norm(response_matrix(maps), target, maps.dt);
}

double terminal_rate_qp(const OneStepMaps& maps, const VectorXd& x) {
  const int n = static_cast<int>(maps.step.size());
  const int d = static_cast<int>(x.size());
  const MatrixXd c = response_matrix(maps).bottomRows(d);
  (void)n;
  return least_norm(c, x, maps.dt);
}

}  // namespace oracle
