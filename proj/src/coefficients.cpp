#include "langevin_mdp/coefficients.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "langevin_mdp/errors.hpp"
#include "langevin_mdp/philox.hpp"

namespace lmdp {

namespace {

double checked_damping(const CoefficientModel& model, const Vec& x) {
  const double a = model.damping(x);
  if (!(a > 0.0)) {
    std::ostringstream msg;
    msg << "damping alpha(x) = " << a << " at x = [" << x.transpose() << "] is not positive";
    throw Error(ErrorKind::NonPositiveDamping, msg.str());
  }
  return a;
}

}  // namespace

CoefficientModel CoefficientModel::with_drift(std::function<Vec(const Vec&)> b,
                                              std::function<Mat(const Vec&)> db,
                                              double lipschitz_bound) const {
  CoefficientModel out = *this;
  out.drift = std::move(b);
  out.drift_jacobian = std::move(db);
  out.lipschitz = std::max(lipschitz, lipschitz_bound);
  return out;
}

CoefficientModel CoefficientModel::with_diffusion(std::function<Mat(const Vec&)> sigma,
                                                  double bound) const {
  CoefficientModel out = *this;
  out.diffusion = std::move(sigma);
  out.lipschitz = std::max(lipschitz, bound);
  return out;
}

CoefficientModel CoefficientModel::with_damping(std::function<double(const Vec&)> alpha,
                                                std::function<Vec(const Vec&)> grad_alpha,
                                                double lo, double hi, double gradient_bound) const {
  CoefficientModel out = *this;
  out.damping = std::move(alpha);
  out.damping_gradient = std::move(grad_alpha);
  out.alpha_min = lo;
  out.alpha_max = hi;
  out.lipschitz = std::max(lipschitz, gradient_bound);
  return out;
}

CoefficientModel compose(const CoefficientModel& drift_from, const CoefficientModel& diffusion_from,
                         const CoefficientModel& damping_from) {
  if (drift_from.dim != diffusion_from.dim || drift_from.dim != damping_from.dim) {
    throw Error(ErrorKind::InvalidArgument, "composed models must share one dimension");
  }
  CoefficientModel out;
  out.name = drift_from.name + "+" + diffusion_from.name + "+" + damping_from.name;
  out.dim = drift_from.dim;
  out.drift = drift_from.drift;
  out.drift_jacobian = drift_from.drift_jacobian;
  out.diffusion = diffusion_from.diffusion;
  out.damping = damping_from.damping;
  out.damping_gradient = damping_from.damping_gradient;
  out.lipschitz = std::max({drift_from.lipschitz, diffusion_from.lipschitz, damping_from.lipschitz});
  out.alpha_min = damping_from.alpha_min;
  out.alpha_max = damping_from.alpha_max;
  return out;
}

void check_model(const CoefficientModel& model) {
  if (model.dim < 1 || model.dim > kMaxDim) {
    throw Error(ErrorKind::InvalidArgument,
                "model dimension " + std::to_string(model.dim) + " outside [1, " +
                    std::to_string(kMaxDim) + "]");
  }
  if (!model.drift || !model.diffusion || !model.damping) {
    throw Error(ErrorKind::InvalidArgument, "model '" + model.name + "' is missing a coefficient");
  }
}

double fd_step(double v) {
  static const double base = std::cbrt(std::numeric_limits<double>::epsilon());
  return base * std::max(1.0, std::abs(v));
}

Vec drift_ratio(const CoefficientModel& model, const Vec& x) {
  const double a = checked_damping(model, x);
  return model.drift(x) / a;
}

Mat diffusion_ratio(const CoefficientModel& model, const Vec& x) {
  const double a = checked_damping(model, x);
  return model.diffusion(x) / a;
}

Vec damping_gradient(const CoefficientModel& model, const Vec& x) {
  if (model.damping_gradient) return model.damping_gradient(x);
  Vec grad(x.size());
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    const double eta = fd_step(x[j]);
    Vec xp = x;
    Vec xm = x;
    xp[j] += eta;
    xm[j] -= eta;
    grad[j] = (model.damping(xp) - model.damping(xm)) / (2.0 * eta);
  }
  return grad;
}

Mat drift_ratio_jacobian_fd(const CoefficientModel& model, const Vec& x) {
  checked_damping(model, x);
  const auto d = x.size();
  Mat jac(d, d);
  for (Eigen::Index j = 0; j < d; ++j) {
    const double eta = fd_step(x[j]);
    Vec xp = x;
    Vec xm = x;
    xp[j] += eta;
    xm[j] -= eta;
    jac.col(j) = (drift_ratio(model, xp) - drift_ratio(model, xm)) / (2.0 * eta);
  }
  return jac;
}

Mat drift_ratio_jacobian(const CoefficientModel& model, const Vec& x) {
  if (!model.has_analytic_jacobians()) return drift_ratio_jacobian_fd(model, x);
  const double a = checked_damping(model, x);
  const Vec b = model.drift(x);
  const Vec grad = model.damping_gradient(x);
  return model.drift_jacobian(x) / a - b * grad.transpose() / (a * a);
}

bool HypothesisReport::all_passed() const {
  return std::all_of(clauses.begin(), clauses.end(), [](const ClauseCheck& c) { return c.passed; });
}

HypothesisReport validate_hypothesis(const CoefficientModel& model, const Box& box, int samples,
                                     double tol, std::uint64_t seed) {
  check_model(model);
  const int d = model.dim;
  if (samples < 2) throw Error(ErrorKind::InvalidArgument, "validate_hypothesis needs samples >= 2");
  if (box.lower.size() != d || box.upper.size() != d) {
    throw Error(ErrorKind::InvalidArgument, "box dimension does not match model");
  }
  for (int j = 0; j < d; ++j) {
    if (!(box.upper[j] > box.lower[j])) {
      throw Error(ErrorKind::InvalidArgument, "box is degenerate in coordinate " + std::to_string(j));
    }
  }

  const NormalStream rng(seed, 0, 0x484f5250u);
  std::uint64_t draw = 0;
  const Vec width = box.upper - box.lower;
  auto random_point = [&] {
    Vec x(d);
    for (int j = 0; j < d; ++j) x[j] = box.lower[j] + width[j] * rng.uniform(draw++);
    return x;
  };

  HypothesisReport report;
  report.damping_min = std::numeric_limits<double>::infinity();
  report.damping_max = -std::numeric_limits<double>::infinity();
  report.min_singular_diffusion = std::numeric_limits<double>::infinity();

  auto visit_point = [&](const Vec& x) {
    const double a = model.damping(x);
    report.damping_min = std::min(report.damping_min, a);
    report.damping_max = std::max(report.damping_max, a);
    const Mat s = model.diffusion(x);
    report.sup_diffusion_hs = std::max(report.sup_diffusion_hs, s.norm());
    const Eigen::JacobiSVD<Mat> svd(s);
    report.min_singular_diffusion =
        std::min(report.min_singular_diffusion, svd.singularValues().minCoeff());
    report.sup_damping_gradient = std::max(report.sup_damping_gradient, damping_gradient(model, x).norm());
  };

  auto visit_pair = [&](const Vec& x, const Vec& y) {
    const double dist = (x - y).norm();
    if (!(dist > 0.0)) return;
    const Vec bx = model.drift(x);
    const Vec by = model.drift(y);
    const Mat sx = model.diffusion(x);
    const Mat sy = model.diffusion(y);
    const double ax = model.damping(x);
    const double ay = model.damping(y);
    report.lipschitz_drift = std::max(report.lipschitz_drift, (bx - by).norm() / dist);
    report.lipschitz_diffusion = std::max(report.lipschitz_diffusion, (sx - sy).norm() / dist);
    if (ax > 0.0 && ay > 0.0) {
      report.lipschitz_drift_ratio =
          std::max(report.lipschitz_drift_ratio, (bx / ax - by / ay).norm() / dist);
      report.lipschitz_diffusion_ratio =
          std::max(report.lipschitz_diffusion_ratio, (sx / ax - sy / ay).norm() / dist);
    }
  };

  // Deterministic anchors: the centre and every corner of the box.
  visit_point((box.lower + box.upper) / 2.0);
  for (unsigned mask = 0; mask < (1u << d); ++mask) {
    Vec corner(d);
    for (int j = 0; j < d; ++j) corner[j] = (mask >> j) & 1u ? box.upper[j] : box.lower[j];
    visit_point(corner);
  }

  // Half of the pairs are local (small separation) to resolve the slope of
  // nonlinear coefficients, half are independent.
  for (int s = 0; s < samples; ++s) {
    const Vec x = random_point();
    Vec y(d);
    if (s % 2 == 0) {
      for (int j = 0; j < d; ++j) {
        const double step = 1e-3 * width[j] * (2.0 * rng.uniform(draw++) - 1.0);
        y[j] = std::clamp(x[j] + step, box.lower[j], box.upper[j]);
      }
    } else {
      y = random_point();
    }
    visit_point(x);
    visit_point(y);
    visit_pair(x, y);
  }
  report.samples = samples;

  const double K = model.lipschitz;
  auto clause = [&](std::string id, std::string description, double empirical, double declared,
                    bool passed) {
    report.clauses.push_back({std::move(id), std::move(description), empirical, declared, passed});
  };
  clause("a.drift_lipschitz", "|b(x)-b(y)| <= K|x-y|", report.lipschitz_drift, K,
         report.lipschitz_drift <= K + tol);
  clause("a.diffusion_lipschitz", "||sigma(x)-sigma(y)||_HS <= K|x-y|", report.lipschitz_diffusion, K,
         report.lipschitz_diffusion <= K + tol);
  clause("a.diffusion_bound", "||sigma(x)||_HS <= K", report.sup_diffusion_hs, K,
         report.sup_diffusion_hs <= K + tol);
  clause("a.diffusion_invertible", "sigma(x) invertible with bounded inverse (min singular value > tol)",
         report.min_singular_diffusion, tol, report.min_singular_diffusion > tol);
  clause("b.damping_bounds", "0 < alpha_0 <= alpha(x) <= alpha_1", report.damping_min, model.alpha_min,
         model.alpha_min > 0.0 && report.damping_min >= model.alpha_min - tol &&
             report.damping_max <= model.alpha_max + tol);
  clause("b.damping_gradient", "|grad alpha(x)| <= K", report.sup_damping_gradient, K,
         report.sup_damping_gradient <= K + tol);
  return report;
}

}  // namespace lmdp
