#pragma once

#include <map>
#include <string>
#include <vector>

#include "langevin_mdp/coefficients.hpp"

namespace lmdp {

// b(x) = -a x, alpha = const, sigma = s I.
CoefficientModel linear_model(int dim, double a, double alpha, double sigma);

// Per-coordinate double-well gradient -(x^3 - x) saturated smoothly at
// +-cutoff, so b stays bounded and globally Lipschitz.
CoefficientModel double_well_model(int dim, double cutoff, double alpha, double sigma);

struct TrigParams {
  double rotation = 1.0;    // omega, couples coordinate pairs (x1,x2), (x3,x4), ...
  double decay = 0.0;       // gamma
  double alpha_mean = 2.0;  // alpha(x) = alpha_mean + alpha_amp sin(x1)
  double alpha_amp = 1.0;
  double sigma = 1.0;       // sigma(x) = sigma diag(1 + sigma_mod cos(x_i))
  double sigma_mod = 0.0;
};

// Linear rotation/decay drift with state-dependent trigonometric damping.
// With the default parameters in d = 2: b(x) = (x2, -x1), alpha = 2 + sin(x1).
CoefficientModel trig_damping_model(int dim, const TrigParams& params = {});

using ModelParams = std::map<std::string, double>;

struct BuiltinModelInfo {
  std::string name;
  std::string summary;
  ModelParams defaults;
};

const std::vector<BuiltinModelInfo>& builtin_models();

// Registry lookup by name. Unknown names or parameters throw InvalidArgument.
CoefficientModel make_builtin_model(const std::string& name, const ModelParams& params);

}  // namespace lmdp
