#include "langevin_mdp/models.hpp"

#include <algorithm>
#include <cmath>

#include "langevin_mdp/errors.hpp"

namespace lmdp {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw Error(ErrorKind::InvalidArgument, what);
}

void require_dim(int dim) {
  require(dim >= 1 && dim <= kMaxDim,
          "dim must lie in [1, " + std::to_string(kMaxDim) + "], got " + std::to_string(dim));
}

// Constant damping and identity-multiple diffusion shared by the simple models.
void set_constant_noise_and_damping(CoefficientModel& m, double alpha, double sigma) {
  const int d = m.dim;
  m.diffusion = [d, sigma](const Vec&) -> Mat { return sigma * Mat::Identity(d, d); };
  m.damping = [alpha](const Vec&) { return alpha; };
  m.damping_gradient = [d](const Vec&) -> Vec { return Vec::Zero(d); };
  m.alpha_min = alpha;
  m.alpha_max = alpha;
}

}  // namespace

CoefficientModel linear_model(int dim, double a, double alpha, double sigma) {
  require_dim(dim);
  require(alpha > 0.0, "linear model needs alpha > 0");
  CoefficientModel m;
  m.name = "linear";
  m.dim = dim;
  m.drift = [a](const Vec& x) -> Vec { return -a * x; };
  m.drift_jacobian = [a, dim](const Vec&) -> Mat { return -a * Mat::Identity(dim, dim); };
  set_constant_noise_and_damping(m, alpha, sigma);
  m.lipschitz = std::max({std::abs(a), std::abs(sigma) * std::sqrt(double(dim)), 1e-12});
  return m;
}

CoefficientModel double_well_model(int dim, double cutoff, double alpha, double sigma) {
  require_dim(dim);
  require(cutoff > 0.0, "double_well needs cutoff > 0");
  require(alpha > 0.0, "double_well needs alpha > 0");
  CoefficientModel m;
  m.name = "double_well";
  m.dim = dim;
  m.drift = [cutoff](const Vec& x) -> Vec {
    Vec out(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      out[i] = -cutoff * std::tanh((x[i] * x[i] * x[i] - x[i]) / cutoff);
    }
    return out;
  };
  auto slope = [cutoff](double v) {
    const double s = 1.0 / std::cosh((v * v * v - v) / cutoff);
    return -s * s * (3.0 * v * v - 1.0);
  };
  m.drift_jacobian = [slope](const Vec& x) -> Mat {
    Mat out = Mat::Zero(x.size(), x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) out(i, i) = slope(x[i]);
    return out;
  };
  set_constant_noise_and_damping(m, alpha, sigma);

  // sup |g'| of the scalar profile; beyond |x| = 1 + 2 cutoff the sech^2
  // factor is negligible, so a dense scan of that window is exhaustive.
  double sup_slope = 0.0;
  const double reach = 1.0 + 2.0 * cutoff;
  for (double v = -reach; v <= reach; v += 1e-4) sup_slope = std::max(sup_slope, std::abs(slope(v)));
  m.lipschitz = std::max(1.01 * sup_slope, std::abs(sigma) * std::sqrt(double(dim)));
  return m;
}

CoefficientModel trig_damping_model(int dim, const TrigParams& p) {
  require_dim(dim);
  require(p.alpha_mean > std::abs(p.alpha_amp), "trig model needs alpha_mean > |alpha_amp|");
  require(std::abs(p.sigma_mod) < 1.0, "trig model needs |sigma_mod| < 1");
  CoefficientModel m;
  m.name = "trig";
  m.dim = dim;

  Mat drift_matrix = -p.decay * Mat::Identity(dim, dim);
  for (int i = 0; i + 1 < dim; i += 2) {
    drift_matrix(i, i + 1) = p.rotation;
    drift_matrix(i + 1, i) = -p.rotation;
  }
  m.drift = [drift_matrix](const Vec& x) -> Vec { return drift_matrix * x; };
  m.drift_jacobian = [drift_matrix](const Vec&) -> Mat { return drift_matrix; };

  m.damping = [p](const Vec& x) { return p.alpha_mean + p.alpha_amp * std::sin(x[0]); };
  m.damping_gradient = [p](const Vec& x) -> Vec {
    Vec g = Vec::Zero(x.size());
    g[0] = p.alpha_amp * std::cos(x[0]);
    return g;
  };
  m.diffusion = [p](const Vec& x) -> Mat {
    Mat s = Mat::Zero(x.size(), x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) s(i, i) = p.sigma * (1.0 + p.sigma_mod * std::cos(x[i]));
    return s;
  };
  m.alpha_min = p.alpha_mean - std::abs(p.alpha_amp);
  m.alpha_max = p.alpha_mean + std::abs(p.alpha_amp);

  const double drift_norm = Eigen::JacobiSVD<Mat>(drift_matrix).singularValues().maxCoeff();
  const double sigma_lip = std::abs(p.sigma * p.sigma_mod);
  const double sigma_hs = std::abs(p.sigma) * (1.0 + std::abs(p.sigma_mod)) * std::sqrt(double(dim));
  m.lipschitz = std::max({drift_norm, sigma_lip, sigma_hs, std::abs(p.alpha_amp), 1e-12});
  return m;
}

const std::vector<BuiltinModelInfo>& builtin_models() {
  static const std::vector<BuiltinModelInfo> infos = {
      {"linear", "b(x) = -a x, constant alpha, sigma = s I",
       {{"dim", 1}, {"a", 1.0}, {"alpha", 1.0}, {"sigma", 1.0}}},
      {"double_well", "saturated double-well gradient, constant alpha, sigma = s I",
       {{"dim", 1}, {"cutoff", 2.0}, {"alpha", 1.0}, {"sigma", 1.0}}},
      {"trig", "rotation/decay drift, alpha = alpha_mean + alpha_amp sin(x1)",
       {{"dim", 2},
        {"rotation", 1.0},
        {"decay", 0.0},
        {"alpha_mean", 2.0},
        {"alpha_amp", 1.0},
        {"sigma", 1.0},
        {"sigma_mod", 0.0}}},
  };
  return infos;
}

CoefficientModel make_builtin_model(const std::string& name, const ModelParams& params) {
  const auto& infos = builtin_models();
  const auto it = std::find_if(infos.begin(), infos.end(),
                               [&](const BuiltinModelInfo& info) { return info.name == name; });
  if (it == infos.end()) throw Error(ErrorKind::InvalidArgument, "unknown model '" + name + "'");

  ModelParams merged = it->defaults;
  for (const auto& [key, value] : params) {
    if (!merged.count(key)) {
      throw Error(ErrorKind::InvalidArgument, "model '" + name + "' has no parameter '" + key + "'");
    }
    merged[key] = value;
  }
  const double dim_value = merged.at("dim");
  require(dim_value == std::floor(dim_value), "model parameter 'dim' must be an integer");
  const int dim = static_cast<int>(dim_value);

  if (name == "linear") {
    return linear_model(dim, merged.at("a"), merged.at("alpha"), merged.at("sigma"));
  }
  if (name == "double_well") {
    return double_well_model(dim, merged.at("cutoff"), merged.at("alpha"), merged.at("sigma"));
  }
  TrigParams p;
  p.rotation = merged.at("rotation");
  p.decay = merged.at("decay");
  p.alpha_mean = merged.at("alpha_mean");
  p.alpha_amp = merged.at("alpha_amp");
  p.sigma = merged.at("sigma");
  p.sigma_mod = merged.at("sigma_mod");
  return trig_damping_model(dim, p);
}

}  // namespace lmdp
