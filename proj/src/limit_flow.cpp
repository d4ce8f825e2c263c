#include "langevin_mdp/limit_flow.hpp"

#include <sstream>

#include "langevin_mdp/errors.hpp"

namespace lmdp {

namespace {

void require_finite(const Vec& v, double t, const char* what) {
  if (!v.allFinite()) {
    std::ostringstream msg;
    msg << what << " became non-finite at t = " << t;
    throw Error(ErrorKind::NonFinite, msg.str());
  }
}

}  // namespace

Path solve_limit_ode(const CoefficientModel& model, const Vec& q0, const TimeGrid& grid) {
  check_model(model);
  if (q0.size() != model.dim) throw Error(ErrorKind::InvalidArgument, "initial state has wrong dimension");
  require_finite(q0, 0.0, "limit ODE initial state");

  Path path = Path::zeros(grid, model.dim);
  const double dt = grid.dt();
  Vec q = q0;
  path.set(0, q);
  for (int i = 0; i < grid.steps(); ++i) {
    const Vec k1 = drift_ratio(model, q);
    const Vec k2 = drift_ratio(model, q + 0.5 * dt * k1);
    const Vec k3 = drift_ratio(model, q + 0.5 * dt * k2);
    const Vec k4 = drift_ratio(model, q + dt * k3);
    q += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    require_finite(q, grid.time(i + 1), "limit ODE state");
    path.set(i + 1, q);
  }
  return path;
}

Linearization linearize(const CoefficientModel& model, const Path& q0path) {
  check_model(model);
  if (q0path.dim() != model.dim) throw Error(ErrorKind::InvalidArgument, "path dimension does not match model");
  if (!q0path.values.allFinite()) throw Error(ErrorKind::NonFinite, "limit path has non-finite entries");

  const TimeGrid& grid = q0path.grid;
  const int n = grid.steps();
  const int d = model.dim;
  const double dt = grid.dt();

  Linearization lin{grid, {}, {}, {}, {}, {}, {}};
  lin.drift_node.reserve(n + 1);
  lin.input_node.reserve(n + 1);
  std::vector<Vec> field;
  field.reserve(n + 1);
  for (int i = 0; i <= n; ++i) {
    const Vec q = q0path.at(i);
    field.push_back(drift_ratio(model, q));
    lin.drift_node.push_back(drift_ratio_jacobian(model, q));
    lin.input_node.push_back(diffusion_ratio(model, q));
  }

  const Mat eye = Mat::Identity(d, d);
  for (int i = 0; i < n; ++i) {
    const Vec mid = 0.5 * (q0path.at(i) + q0path.at(i + 1)) + dt / 8.0 * (field[i] - field[i + 1]);
    const Mat a_mid = drift_ratio_jacobian(model, mid);
    const Mat b_mid = diffusion_ratio(model, mid);
    lin.drift_mid.push_back(a_mid);
    lin.input_mid.push_back(b_mid);

    const Mat& a0 = lin.drift_node[i];
    const Mat& a1 = lin.drift_node[i + 1];
    const Mat m1 = a0;
    const Mat m2 = a_mid * (eye + 0.5 * dt * m1);
    const Mat m3 = a_mid * (eye + 0.5 * dt * m2);
    const Mat m4 = a1 * (eye + dt * m3);
    lin.step.push_back(eye + dt / 6.0 * (m1 + 2.0 * m2 + 2.0 * m3 + m4));

    const Mat s1 = lin.input_node[i];
    const Mat s2 = a_mid * (0.5 * dt * s1) + b_mid;
    const Mat s3 = a_mid * (0.5 * dt * s2) + b_mid;
    const Mat s4 = a1 * (dt * s3) + lin.input_node[i + 1];
    lin.input_step.push_back(dt / 6.0 * (s1 + 2.0 * s2 + 2.0 * s3 + s4));
  }
  return lin;
}

TransitionFamily transition_family(const Linearization& lin) {
  const int n = lin.grid.steps();
  const int d = lin.dim();
  TransitionFamily fam{lin.grid, std::vector<Mat>(static_cast<std::size_t>(n + 1))};
  fam.phis[n] = Mat::Identity(d, d);
  // Phi(T, t_i) = Phi(T, t_{i+1}) Phi(t_{i+1}, t_i)
  for (int i = n - 1; i >= 0; --i) {
    fam.phis[i] = fam.phis[i + 1] * lin.step[i];
    if (!fam.phis[i].allFinite()) {
      throw Error(ErrorKind::NonFinite, "transition matrix overflow at step " + std::to_string(i));
    }
  }
  return fam;
}

TransitionFamily transition_family(const CoefficientModel& model, const Path& q0path) {
  return transition_family(linearize(model, q0path));
}

}  // namespace lmdp
