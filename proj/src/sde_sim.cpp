#include "langevin_mdp/sde_sim.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

#include "langevin_mdp/errors.hpp"
#include "langevin_mdp/philox.hpp"

namespace lmdp {

namespace {

// Shared by NoisePath::shifted and the controlled simulation so that both
// produce bit-identical increments.
inline Vec shifted_increment(const Vec& dw, const Vec& rate, double gain) { return dw + gain * rate; }

// (1 - e^-c) / c
double phi1(double c) { return c < 1e-10 ? 1.0 - 0.5 * c : -std::expm1(-c) / c; }

// int_0^1 u e^{-c u} du = (1 - e^-c (1 + c)) / c^2
double phi2(double c) {
  if (c < 1e-3) return 0.5 - c / 3.0 + c * c / 8.0 - c * c * c / 30.0;
  return (1.0 - std::exp(-c) * (1.0 + c)) / (c * c);
}

double positive_damping(const CoefficientModel& model, const Vec& x) {
  const double a = model.damping(x);
  if (!(a > 0.0)) {
    std::ostringstream msg;
    msg << "alpha(q) = " << a << " at q = [" << x.transpose() << "]";
    throw Error(ErrorKind::NonPositiveDamping, msg.str());
  }
  return a;
}

void check_inputs(const CoefficientModel& model, const SimConfig& config, const NoisePath& noise,
                  const Control* control) {
  check_model(model);
  config.validate();
  if (config.dim() != model.dim || config.p.size() != model.dim) {
    throw Error(ErrorKind::InvalidArgument, "initial state dimension does not match model");
  }
  require_same_grid(config.grid, noise.grid(), "noise path");
  if (noise.substeps() != config.substeps || noise.dim() != model.dim) {
    throw Error(ErrorKind::InvalidArgument, "noise path substeps or dimension do not match the config");
  }
  if (control) {
    require_same_grid(config.grid, control->grid, "control");
    if (control->dim() != model.dim) throw Error(ErrorKind::InvalidArgument, "control dimension mismatch");
  }
}

LangevinState run_langevin(const CoefficientModel& model, const SimConfig& config, const NoisePath& noise,
                           const Control* control, Recording recording) {
  check_inputs(model, config, noise, control);
  const int n = config.grid.steps();
  const int m = config.substeps;
  const int d = model.dim;
  const double eps = config.epsilon;
  const double dt_sub = noise.dt_sub();
  const double inv_eps2 = 1.0 / (eps * eps);
  const double noise_gain = std::pow(eps, -1.5);
  const double control_gain = config.deviation_scale() * dt_sub;

  Vec q = config.q;
  Vec v = config.p / eps;
  LangevinState state{Path::zeros(config.grid, d), Path::zeros(config.grid, d), q, v, RowMatrix(), RowMatrix()};
  state.q.set(0, q);
  state.p.set(0, v);
  const bool fine = recording == Recording::Fine;
  if (fine) {
    state.fine_q.resize(static_cast<Eigen::Index>(n) * m + 1, d);
    state.fine_p.resize(static_cast<Eigen::Index>(n) * m + 1, d);
    state.fine_q.row(0) = q.transpose();
    state.fine_p.row(0) = v.transpose();
  }

  const RowMatrix& inc = noise.increments();
  Vec rate;
  for (int i = 0; i < n; ++i) {
    if (control) rate = control->rate(i);
    for (int s = 0; s < m; ++s) {
      const long k = static_cast<long>(i) * m + s;
      const double a = positive_damping(model, q);
      const double lambda = a * dt_sub * inv_eps2;
      const double decay = std::exp(-lambda);
      const double relax = -std::expm1(-lambda);
      const double color = lambda < 1e-12 ? 1.0 - 0.5 * lambda : relax / lambda;
      Vec dw = inc.row(k).transpose();
      if (control) dw = shifted_increment(dw, rate, control_gain);
      v = decay * v + (relax / a) * model.drift(q) + (noise_gain * color) * (model.diffusion(q) * dw);
      q += dt_sub * v;
      if (fine) {
        state.fine_q.row(k + 1) = q.transpose();
        state.fine_p.row(k + 1) = v.transpose();
      }
    }
    if (!q.allFinite() || !v.allFinite()) {
      throw Error(ErrorKind::NonFinite, "Langevin state diverged at t = " + std::to_string(config.grid.time(i + 1)));
    }
    state.q.set(i + 1, q);
    state.p.set(i + 1, v);
  }
  state.q_final = q;
  state.p_final = v;
  return state;
}

RemainderReport run_remainder(const CoefficientModel& model, const LangevinState& state, const NoisePath& noise,
                              const SimConfig& config, const Control* control) {
  check_inputs(model, config, noise, control);
  if (!state.has_fine()) {
    throw Error(ErrorKind::InvalidArgument, "remainder_decomposition needs a state recorded with Recording::Fine");
  }
  const int n = config.grid.steps();
  const int m = config.substeps;
  const int d = model.dim;
  const long total = static_cast<long>(n) * m;
  if (state.fine_q.rows() != total + 1) {
    throw Error(ErrorKind::GridMismatch, "state substep lattice does not match the config");
  }
  const double eps = config.epsilon;
  const double dt = noise.dt_sub();
  const double inv_eps2 = 1.0 / (eps * eps);
  const double sqrt_eps = std::sqrt(eps);
  const double h = config.deviation_scale();
  const int terms = control ? 7 : 5;

  // Running quantities at fine node k.
  double a_cum = 0.0;               // A(t_k)
  double decay_integral = 0.0;      // int_0^t e^{-A(s)} ds
  Vec drift_conv = Vec::Zero(d);    // J(t) = int_0^t e^{-A(t,s)} b(q(s)) ds
  Vec h1 = Vec::Zero(d);
  Vec h2 = Vec::Zero(d);
  Vec i3 = Vec::Zero(d), i5 = Vec::Zero(d), i7 = Vec::Zero(d);
  Vec drift_integral = Vec::Zero(d);  // int b/alpha ds
  Vec noise_integral = Vec::Zero(d);  // sqrt(eps) int sigma/alpha dw
  Vec control_integral = Vec::Zero(d);

  RemainderReport report;
  report.controlled = control != nullptr;
  report.term_sup.assign(static_cast<std::size_t>(terms), 0.0);
  report.remainder = Path::zeros(config.grid, d);

  const Vec p_over_eps = config.p / eps;
  auto eval = [&](long k, Vec& x, double& a, Vec& b, Mat& s, double& w) {
    x = state.fine_q.row(k).transpose();
    a = positive_damping(model, x);
    b = model.drift(x);
    s = model.diffusion(x);
    const Vec vel = state.fine_p.row(k).transpose();
    // d/dt (1/alpha(q(t))) = -<grad alpha, q'> / alpha^2
    w = damping_gradient(model, x).dot(vel) / (a * a);
  };

  Vec x0, b0, x1, b1;
  Mat s0, s1;
  double a0 = 0.0, a1 = 0.0, w0 = 0.0, w1 = 0.0;
  eval(0, x0, a0, b0, s0, w0);

  auto record = [&](long k, double a_now) {
    std::array<Vec, 7> parts;
    parts[0] = decay_integral * p_over_eps;
    parts[1] = -drift_conv / a_now;
    parts[2] = i3;
    parts[3] = -h1 / a_now;
    parts[4] = i5;
    parts[5] = -h2 / a_now;
    parts[6] = i7;
    Vec r = Vec::Zero(d);
    for (int t = 0; t < terms; ++t) {
      r += parts[t];
      report.term_sup[t] = std::max(report.term_sup[t], parts[t].norm());
    }
    report.total_sup = std::max(report.total_sup, r.norm());
    report.h1_sup = std::max(report.h1_sup, h1.norm());
    report.h2_sup = std::max(report.h2_sup, h2.norm());
    const Vec q_now = state.fine_q.row(k).transpose();
    const Vec rep = config.q + drift_integral + noise_integral + control_integral + r;
    report.representation_residual = std::max(report.representation_residual, (q_now - rep).norm());
    if (k % m == 0) report.remainder.set(static_cast<int>(k / m), r);
  };
  record(0, a0);

  for (long k = 0; k < total; ++k) {
    eval(k + 1, x1, a1, b1, s1, w1);
    const double c = 0.5 * (a0 + a1) * dt * inv_eps2;
    const double e = std::exp(-c);
    const double f1 = phi1(c);
    const double f2 = phi2(c);

    // Exponential weights are exact for A linear on the substep; only
    // e^{-(A(t)-A(s))} with t >= s is ever formed.
    decay_integral += std::exp(-a_cum) * f1 * dt;
    const Vec j_next = e * drift_conv + dt * (f2 * b0 + (f1 - f2) * b1);
    const Vec dw = noise.substep(k);
    const Vec h1_next = e * (h1 + sqrt_eps * (s0 * dw));
    Vec h2_next = h2;
    if (control) {
      const Vec rate = control->rate(static_cast<int>(k / m));
      h2_next = e * h2 + (sqrt_eps * h * dt * f1) * (s0 * rate);
      control_integral += (sqrt_eps * h * dt / a0) * (s0 * rate);
    }

    // Integration by parts of d(1/alpha(q)) gives a minus sign on these terms.
    i3 -= 0.5 * dt * (w0 * drift_conv + w1 * j_next);
    i5 -= 0.5 * dt * (w0 * h1 + w1 * h1_next);
    if (control) i7 -= 0.5 * dt * (w0 * h2 + w1 * h2_next);

    drift_integral += 0.5 * dt * (b0 / a0 + b1 / a1);
    noise_integral += (sqrt_eps / a0) * (s0 * dw);

    a_cum += c;
    drift_conv = j_next;
    h1 = h1_next;
    h2 = h2_next;
    x0 = x1;
    a0 = a1;
    b0 = b1;
    s0 = s1;
    w0 = w1;
    record(k + 1, a0);
  }
  report.normalized_sup = report.total_sup / config.fluctuation_scale();
  return report;
}

}  // namespace

int SimConfig::required_substeps(double dt, double epsilon, double cap) {
  const double ratio = dt / (cap * epsilon * epsilon);
  return std::max(1, static_cast<int>(std::ceil(ratio * (1.0 - 1e-12))));
}

SimConfig SimConfig::make(double epsilon, double kappa, TimeGrid grid, Vec q, Vec p, std::uint64_t seed,
                          double stiffness_cap, int min_substeps) {
  SimConfig c;
  c.epsilon = epsilon;
  c.kappa = kappa;
  c.grid = grid;
  c.stiffness_cap = stiffness_cap;
  c.seed = seed;
  c.q = std::move(q);
  c.p = std::move(p);
  if (!(epsilon > 0.0) || !(stiffness_cap > 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "epsilon and stiffness_cap must be positive");
  }
  c.substeps = std::max(min_substeps, required_substeps(grid.dt(), epsilon, stiffness_cap));
  c.validate();
  return c;
}

SimConfig SimConfig::with_epsilon(double eps) const {
  return make(eps, kappa, grid, q, p, seed, stiffness_cap, 1);
}

double SimConfig::deviation_scale() const { return std::pow(epsilon, -kappa); }

double SimConfig::fluctuation_scale() const { return std::sqrt(epsilon) * deviation_scale(); }

void SimConfig::validate() const {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
    throw Error(ErrorKind::InvalidArgument, "epsilon must be positive");
  }
  if (!(kappa > 0.0 && kappa < 0.5)) {
    throw Error(ErrorKind::InvalidArgument, "kappa must lie in (0, 1/2) so that h -> inf and sqrt(eps) h -> 0");
  }
  if (!(stiffness_cap > 0.0)) throw Error(ErrorKind::InvalidArgument, "stiffness_cap must be positive");
  if (substeps < 1) throw Error(ErrorKind::InvalidArgument, "substeps must be >= 1");
  if (q.size() < 1 || q.size() != p.size()) {
    throw Error(ErrorKind::InvalidArgument, "initial q and p must be non-empty and of equal dimension");
  }
  if (dt_sub() > stiffness_cap * epsilon * epsilon * (1.0 + 1e-12)) {
    std::ostringstream msg;
    msg << "dt_sub = " << dt_sub() << " exceeds cap * eps^2 = " << stiffness_cap * epsilon * epsilon;
    throw Error(ErrorKind::StiffnessViolation, msg.str());
  }
}

NoisePath::NoisePath(TimeGrid grid, int substeps, RowMatrix increments, std::uint64_t seed, std::uint32_t sample,
                     std::uint32_t stream)
    : grid_(grid), substeps_(substeps), increments_(std::move(increments)), seed_(seed), sample_(sample),
      stream_(stream) {
  if (substeps_ < 1 || increments_.rows() != static_cast<Eigen::Index>(grid_.steps()) * substeps_) {
    throw Error(ErrorKind::GridMismatch, "noise increments do not cover the substep lattice");
  }
}

Vec NoisePath::coarse(int i) const {
  Vec sum = Vec::Zero(dim());
  for (int s = 0; s < substeps_; ++s) sum += substep(static_cast<long>(i) * substeps_ + s);
  return sum;
}

NoisePath NoisePath::shifted(const Control& u, double scale) const {
  require_same_grid(grid_, u.grid, "shifted noise");
  RowMatrix out = increments_;
  const double gain = scale * dt_sub();
  for (int i = 0; i < grid_.steps(); ++i) {
    const Vec rate = u.rate(i);
    for (int s = 0; s < substeps_; ++s) {
      const long k = static_cast<long>(i) * substeps_ + s;
      out.row(k) = shifted_increment(substep(k), rate, gain).transpose();
    }
  }
  return NoisePath(grid_, substeps_, std::move(out), seed_, sample_, stream_);
}

NoisePath sample_noise(const SimConfig& config, std::uint32_t sample, std::uint32_t stream) {
  config.validate();
  const int d = config.dim();
  const long rows = static_cast<long>(config.grid.steps()) * config.substeps;
  RowMatrix inc(rows, d);
  const double scale = std::sqrt(config.dt_sub());
  const NormalStream normals(config.seed, sample, stream);
  double* data = inc.data();
  const std::uint64_t count = static_cast<std::uint64_t>(rows) * static_cast<std::uint64_t>(d);
  for (std::uint64_t j = 0; j < count; j += 2) {
    const auto z = normals.pair(j / 2);
    data[j] = scale * z[0];
    if (j + 1 < count) data[j + 1] = scale * z[1];
  }
  return NoisePath(config.grid, config.substeps, std::move(inc), config.seed, sample, stream);
}

LangevinState simulate_langevin(const CoefficientModel& model, const SimConfig& config, const NoisePath& noise,
                                Recording recording) {
  return run_langevin(model, config, noise, nullptr, recording);
}

LangevinState simulate_langevin(const CoefficientModel& model, const SimConfig& config, const NoisePath& noise,
                                const Control& control, Recording recording) {
  return run_langevin(model, config, noise, &control, recording);
}

Path simulate_first_order(const CoefficientModel& model, const SimConfig& config, const NoisePath& noise) {
  check_inputs(model, config, noise, nullptr);
  const double dt = config.grid.dt();
  const double sqrt_eps = std::sqrt(config.epsilon);
  Path g = Path::zeros(config.grid, model.dim);
  Vec x = config.q;
  g.set(0, x);
  for (int i = 0; i < config.grid.steps(); ++i) {
    const double a = positive_damping(model, x);
    x = x + (dt / a) * model.drift(x) + (sqrt_eps / a) * (model.diffusion(x) * noise.coarse(i));
    if (!x.allFinite()) {
      throw Error(ErrorKind::NonFinite, "first-order state diverged at t = " + std::to_string(config.grid.time(i + 1)));
    }
    g.set(i + 1, x);
  }
  return g;
}

Path fluctuation_path(const Path& qpath, const Path& q0path, const SimConfig& config) {
  require_same_grid(qpath.grid, q0path.grid, "fluctuation_path");
  if (qpath.dim() != q0path.dim()) throw Error(ErrorKind::InvalidArgument, "path dimensions differ");
  return Path(qpath.grid, (qpath.values - q0path.values) / config.fluctuation_scale());
}

RemainderReport remainder_decomposition(const CoefficientModel& model, const LangevinState& state,
                                        const NoisePath& noise, const SimConfig& config) {
  return run_remainder(model, state, noise, config, nullptr);
}

RemainderReport remainder_decomposition(const CoefficientModel& model, const LangevinState& state,
                                        const NoisePath& noise, const SimConfig& config, const Control& control) {
  return run_remainder(model, state, noise, config, &control);
}

}  // namespace lmdp
