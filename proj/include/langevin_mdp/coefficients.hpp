#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "langevin_mdp/types.hpp"

namespace lmdp {

// Coefficients (b, sigma, alpha) of the damped Langevin system together with
// the constants the model declares about itself. Jacobians are optional; when
// absent, derivatives fall back to central finite differences.
//
// All callables must be pure: models are evaluated concurrently.
struct CoefficientModel {
  std::string name;
  int dim = 1;

  std::function<Vec(const Vec&)> drift;
  std::function<Mat(const Vec&)> diffusion;
  std::function<double(const Vec&)> damping;

  std::function<Mat(const Vec&)> drift_jacobian;    // Db, optional
  std::function<Vec(const Vec&)> damping_gradient;  // grad alpha, optional

  double lipschitz = 1.0;  // K
  double alpha_min = 1.0;  // alpha_0
  double alpha_max = 1.0;  // alpha_1

  bool has_analytic_jacobians() const { return drift_jacobian && damping_gradient; }

  // Composition: replace one coefficient, keep the rest. The declared K is
  // raised to cover the new component when `lipschitz` exceeds it.
  CoefficientModel with_drift(std::function<Vec(const Vec&)> b, std::function<Mat(const Vec&)> db,
                              double lipschitz_bound) const;
  CoefficientModel with_diffusion(std::function<Mat(const Vec&)> sigma, double bound) const;
  CoefficientModel with_damping(std::function<double(const Vec&)> alpha,
                                std::function<Vec(const Vec&)> grad_alpha, double lo, double hi,
                                double gradient_bound) const;
};

// Model with drift, diffusion and damping taken from three (possibly
// different) models of the same dimension.
CoefficientModel compose(const CoefficientModel& drift_from, const CoefficientModel& diffusion_from,
                         const CoefficientModel& damping_from);

// Throws InvalidArgument if the model is missing a coefficient or has an
// unsupported dimension.
void check_model(const CoefficientModel& model);

// b(x)/alpha(x). Throws NonPositiveDamping when alpha(x) <= 0.
Vec drift_ratio(const CoefficientModel& model, const Vec& x);

// D(b/alpha)(x) = Db/alpha - b (grad alpha)^T / alpha^2, analytic when both
// jacobians are supplied, otherwise central differences of drift_ratio.
Mat drift_ratio_jacobian(const CoefficientModel& model, const Vec& x);

// Central-difference jacobian of drift_ratio regardless of analytic data.
Mat drift_ratio_jacobian_fd(const CoefficientModel& model, const Vec& x);

Vec damping_gradient(const CoefficientModel& model, const Vec& x);

// sigma(x)/alpha(x).
Mat diffusion_ratio(const CoefficientModel& model, const Vec& x);

// Default central-difference step for coordinate value v.
double fd_step(double v);

struct Box {
  Vec lower;
  Vec upper;
};

struct ClauseCheck {
  std::string id;
  std::string description;
  double empirical = 0.0;
  double declared = 0.0;
  bool passed = true;
};

struct HypothesisReport {
  double lipschitz_drift = 0.0;
  double lipschitz_diffusion = 0.0;
  double lipschitz_drift_ratio = 0.0;
  double lipschitz_diffusion_ratio = 0.0;
  double sup_diffusion_hs = 0.0;
  double sup_damping_gradient = 0.0;
  double damping_min = 0.0;
  double damping_max = 0.0;
  double min_singular_diffusion = 0.0;
  int samples = 0;
  std::vector<ClauseCheck> clauses;

  bool all_passed() const;
};

// Empirical audit of the standing assumptions on a box. Random pairs plus
// the box centre and corners are evaluated; a clause fails when its
// empirical constant exceeds the declared one by more than tol.
HypothesisReport validate_hypothesis(const CoefficientModel& model, const Box& box, int samples,
                                     double tol, std::uint64_t seed = 0);

}  // namespace lmdp
