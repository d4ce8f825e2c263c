#include "langevin_mdp/skeleton_rate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "langevin_mdp/errors.hpp"

namespace lmdp {

namespace {

constexpr double kMaxDiffusionCondition = 1e12;
constexpr double kEigenFloor = 1e-14;

double condition_number(const Mat& m) {
  const Eigen::JacobiSVD<Mat> svd(m);
  const auto& s = svd.singularValues();
  const double lo = s.minCoeff();
  return lo > 0.0 ? s.maxCoeff() / lo : std::numeric_limits<double>::infinity();
}

Mat symmetrized(const Mat& q) { return 0.5 * (q + q.transpose()); }

// Control steering g(0) = 0 to x at t_k with minimum energy, zero afterwards.
// Adjoint sweep: a_k = lambda, a_i = M_i^T a_{i+1}, h'_i = S_i^T a_{i+1} / dt.
Control subhorizon_control(const Linearization& lin, int k, const Vec& lambda) {
  const double dt = lin.grid.dt();
  Control u = Control::zero(lin.grid, lin.dim());
  Vec adjoint = lambda;
  for (int i = k - 1; i >= 0; --i) {
    u.rates.row(i) = (lin.input_step[i].transpose() * adjoint / dt).transpose();
    adjoint = lin.step[i].transpose() * adjoint;
  }
  return u;
}

}  // namespace

Control::Control(TimeGrid g, RowMatrix r) : grid(g), rates(std::move(r)) {
  if (rates.rows() != grid.steps()) {
    throw Error(ErrorKind::GridMismatch, "control has " + std::to_string(rates.rows()) +
                                             " intervals for a grid with " +
                                             std::to_string(grid.steps()) + " steps");
  }
}

Control Control::zero(TimeGrid g, int dim) { return Control(g, RowMatrix::Zero(g.steps(), dim)); }

Control Control::constant(TimeGrid g, const Vec& value) {
  RowMatrix r(g.steps(), value.size());
  r.rowwise() = value.transpose();
  return Control(g, std::move(r));
}

Control Control::piecewise(TimeGrid g, const RowMatrix& segments) {
  if (segments.rows() < 1) throw Error(ErrorKind::InvalidArgument, "control needs at least one segment");
  const auto pieces = segments.rows();
  RowMatrix r(g.steps(), segments.cols());
  for (int i = 0; i < g.steps(); ++i) {
    const double mid = (i + 0.5) / g.steps();
    const auto seg = std::min<Eigen::Index>(static_cast<Eigen::Index>(mid * pieces), pieces - 1);
    r.row(i) = segments.row(seg);
  }
  return Control(g, std::move(r));
}

double Control::energy() const { return 0.5 * rates.squaredNorm() * grid.dt(); }

Path Control::integral() const {
  Path h = Path::zeros(grid, dim());
  for (int i = 0; i < grid.steps(); ++i) h.values.row(i + 1) = h.values.row(i) + grid.dt() * rates.row(i);
  return h;
}

Path skeleton_map(const Linearization& lin, const Control& h) {
  require_same_grid(lin.grid, h.grid, "skeleton_map");
  if (h.dim() != lin.dim()) throw Error(ErrorKind::InvalidArgument, "control dimension does not match model");
  Path g = Path::zeros(lin.grid, lin.dim());
  Vec state = Vec::Zero(lin.dim());
  for (int i = 0; i < lin.grid.steps(); ++i) {
    state = lin.step[i] * state + lin.input_step[i] * h.rate(i);
    g.set(i + 1, state);
  }
  return g;
}

Path skeleton_map(const CoefficientModel& model, const Path& q0path, const Control& h) {
  require_same_grid(q0path.grid, h.grid, "skeleton_map");
  return skeleton_map(linearize(model, q0path), h);
}

RateResult rate_of_path(const CoefficientModel& model, const Path& q0path, const Path& psi) {
  require_same_grid(q0path.grid, psi.grid, "rate_of_path");
  if (psi.dim() != model.dim) throw Error(ErrorKind::InvalidArgument, "target path dimension does not match model");
  const double scale = std::max(1.0, psi.sup_norm());
  if (psi.at(0).norm() > 1e-14 * scale) {
    throw Error(ErrorKind::NonzeroStart, "fluctuation paths must start at 0");
  }

  const Linearization lin = linearize(model, q0path);
  const int n = lin.grid.steps();
  double worst = 0.0;
  for (int i = 0; i <= n; ++i) {
    if (condition_number(lin.input_node[i]) > kMaxDiffusionCondition) {
      throw Error(ErrorKind::SingularDiffusion,
                  "sigma/alpha is numerically singular at t = " + std::to_string(lin.grid.time(i)));
    }
  }

  Control u = Control::zero(lin.grid, lin.dim());
  for (int i = 0; i < n; ++i) {
    const double cond = condition_number(lin.input_step[i]);
    if (cond > kMaxDiffusionCondition) {
      throw Error(ErrorKind::SingularDiffusion,
                  "one-step input map is singular on interval " + std::to_string(i));
    }
    worst = std::max(worst, cond);
    const Vec rhs = psi.at(i + 1) - lin.step[i] * psi.at(i);
    u.rates.row(i) = lin.input_step[i].partialPivLu().solve(rhs).transpose();
  }

  const Path reproduced = skeleton_map(lin, u);
  RateResult result;
  result.rate = u.energy();
  result.residual = (reproduced.values - psi.values).rowwise().norm().maxCoeff();
  result.gramian_condition = worst;
  result.t_star = lin.grid.horizon();
  result.optimal_control = std::move(u);
  return result;
}

std::vector<Mat> gramian_sequence(const Linearization& lin) {
  const int n = lin.grid.steps();
  const int d = lin.dim();
  const double dt = lin.grid.dt();
  std::vector<Mat> seq;
  seq.reserve(n + 1);
  seq.push_back(Mat::Zero(d, d));
  for (int k = 0; k < n; ++k) {
    const Mat next = lin.step[k] * seq.back() * lin.step[k].transpose() +
                     lin.input_step[k] * lin.input_step[k].transpose() / dt;
    seq.push_back(symmetrized(next));
  }
  return seq;
}

Mat controllability_gramian(const CoefficientModel& model, const Path& q0path,
                            const TransitionFamily& phis) {
  require_same_grid(q0path.grid, phis.grid, "controllability_gramian");
  const Linearization lin = linearize(model, q0path);
  const double dt = lin.grid.dt();
  Mat q = Mat::Zero(lin.dim(), lin.dim());
  for (int i = 0; i < lin.grid.steps(); ++i) {
    const Mat g = phis[i + 1] * lin.input_step[i];
    q += g * g.transpose() / dt;
  }
  return symmetrized(q);
}

GramianInverse invert_gramian(const Mat& q) {
  const Eigen::SelfAdjointEigenSolver<Mat> eig(symmetrized(q));
  const Vec lambda = eig.eigenvalues();
  const double top = lambda.maxCoeff();
  const double bottom = lambda.minCoeff();
  if (!(top > 0.0) || bottom <= kEigenFloor * top) {
    throw Error(ErrorKind::SingularGramian, "Gramian eigenvalues [" + std::to_string(bottom) + ", " +
                                                std::to_string(top) + "] are below the floor");
  }
  const Vec inv = lambda.cwiseInverse();
  return {eig.eigenvectors() * inv.asDiagonal() * eig.eigenvectors().transpose(), top / bottom};
}

RateResult terminal_rate(const CoefficientModel& model, const Path& q0path, const TransitionFamily& phis,
                         const Vec& x) {
  require_same_grid(q0path.grid, phis.grid, "terminal_rate");
  if (x.size() != model.dim) throw Error(ErrorKind::InvalidArgument, "terminal point has wrong dimension");
  const Linearization lin = linearize(model, q0path);
  const double dt = lin.grid.dt();
  const int n = lin.grid.steps();

  Mat q = Mat::Zero(lin.dim(), lin.dim());
  for (int i = 0; i < n; ++i) {
    const Mat g = phis[i + 1] * lin.input_step[i];
    q += g * g.transpose() / dt;
  }

  RateResult result;
  result.t_star = lin.grid.horizon();
  result.direction = x.norm() > 0.0 ? Vec(x / x.norm()) : Vec::Zero(x.size());
  if (x.norm() == 0.0) {
    result.optimal_control = Control::zero(lin.grid, lin.dim());
    const Eigen::SelfAdjointEigenSolver<Mat> eig(symmetrized(q));
    const double lo = eig.eigenvalues().minCoeff();
    result.gramian_condition =
        lo > 0.0 ? eig.eigenvalues().maxCoeff() / lo : std::numeric_limits<double>::infinity();
    return result;
  }

  const GramianInverse qi = invert_gramian(q);
  const Vec lambda = qi.inverse * x;
  Control u = Control::zero(lin.grid, lin.dim());
  for (int i = 0; i < n; ++i) {
    u.rates.row(i) = (lin.input_step[i].transpose() * phis[i + 1].transpose() * lambda / dt).transpose();
  }
  const Path g = skeleton_map(lin, u);
  result.rate = 0.5 * x.dot(lambda);
  result.gramian_condition = qi.condition;
  result.residual = (g.at(n) - x).norm();
  result.optimal_control = std::move(u);
  return result;
}

std::vector<Vec> sphere_directions(int dim, int count) {
  std::vector<Vec> dirs;
  if (dim == 1) {
    dirs.push_back(Vec::Constant(1, 1.0));
    dirs.push_back(Vec::Constant(1, -1.0));
    return dirs;
  }
  if (dim == 2) {
    const int m = count > 0 ? count : 64;
    for (int k = 0; k < m; ++k) {
      const double theta = 2.0 * std::numbers::pi * k / m;
      Vec v(2);
      v << std::cos(theta), std::sin(theta);
      dirs.push_back(v);
    }
    return dirs;
  }
  if (dim == 3) {
    const int m = count > 0 ? count : 256;
    const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
    for (int k = 0; k < m; ++k) {
      const double z = 1.0 - 2.0 * (k + 0.5) / m;
      const double r = std::sqrt(1.0 - z * z);
      Vec v(3);
      v << r * std::cos(golden * k), r * std::sin(golden * k), z;
      dirs.push_back(v);
    }
    return dirs;
  }
  throw Error(ErrorKind::NotSupported, "exit-rate sphere scan supports d <= 3, got d = " + std::to_string(dim));
}

RateResult exit_rate(const CoefficientModel& model, const Path& q0path, const TransitionFamily& phis,
                     double delta, const ExitRateOptions& options) {
  require_same_grid(q0path.grid, phis.grid, "exit_rate");
  if (!(delta > 0.0)) throw Error(ErrorKind::InvalidArgument, "exit radius delta must be positive");
  const auto dirs = sphere_directions(model.dim, options.directions);
  const Linearization lin = linearize(model, q0path);
  const auto grams = gramian_sequence(lin);

  double best = std::numeric_limits<double>::infinity();
  int best_k = -1;
  std::size_t best_dir = 0;
  GramianInverse best_inverse;
  int skipped = 0;
  for (int k = 1; k <= lin.grid.steps(); ++k) {
    GramianInverse qi;
    try {
      qi = invert_gramian(grams[k]);
    } catch (const Error&) {
      ++skipped;
      continue;
    }
    for (std::size_t j = 0; j < dirs.size(); ++j) {
      const double value = 0.5 * delta * delta * dirs[j].dot(qi.inverse * dirs[j]);
      if (value < best) {
        best = value;
        best_k = k;
        best_dir = j;
        best_inverse = qi;
      }
    }
  }
  if (best_k < 0) throw Error(ErrorKind::SingularGramian, "every exit time has a singular Gramian");

  const Vec x = delta * dirs[best_dir];
  const Vec lambda = best_inverse.inverse * x;
  RateResult result;
  result.optimal_control = subhorizon_control(lin, best_k, lambda);
  const Path g = skeleton_map(lin, result.optimal_control);
  result.rate = best;
  result.t_star = lin.grid.time(best_k);
  result.direction = dirs[best_dir];
  result.gramian_condition = best_inverse.condition;
  result.residual = (g.at(best_k) - x).norm();
  result.skipped_times = skipped;
  return result;
}

ExitRateRefinement exit_rate_refined(const CoefficientModel& model, const Vec& q0, const TimeGrid& grid,
                                     double delta, const ExitRateOptions& options) {
  const Path coarse_path = solve_limit_ode(model, q0, grid);
  ExitRateRefinement out;
  out.coarse = exit_rate(model, coarse_path, transition_family(model, coarse_path), delta, options);
  const TimeGrid fine(grid.horizon(), 2 * grid.steps());
  const Path fine_path = solve_limit_ode(model, q0, fine);
  out.refined_rate = exit_rate(model, fine_path, transition_family(model, fine_path), delta, options).rate;
  out.refinement_delta = out.refined_rate - out.coarse.rate;
  return out;
}

}  // namespace lmdp
