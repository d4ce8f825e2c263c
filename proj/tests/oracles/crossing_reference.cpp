// Reference exceedance probabilities for the linear model b = -a x with
// constant alpha and sigma. (q, v) is a Gaussian process whose transition over
// a step is sampled exactly (Van Loan), ten times per coarse step, with an
// independent generator. Prints the hit count for each delta on the command line.
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <random>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

int main(int argc, char** argv) {
  const double a = 1.0, alpha = 1.0, sigma = 1.0;
  const double eps = 0.1, kappa = 0.25, horizon = 1.0;
  const int steps = 64, refine = 10;
  const long samples = 1000000;
  std::vector<double> deltas;
  for (int i = 1; i < argc; ++i) deltas.push_back(std::atof(argv[i]));
  if (deltas.empty()) deltas = {0.8};

  const double dt = horizon / steps / refine;
  Eigen::Matrix2d f;
  f << 0.0, 1.0, -a / (eps * eps), -alpha / (eps * eps);
  Eigen::Vector2d g(0.0, std::sqrt(eps) * sigma / (eps * eps));
  Eigen::Matrix4d vl = Eigen::Matrix4d::Zero();
  vl.topLeftCorner<2, 2>() = -f * dt;
  vl.topRightCorner<2, 2>() = g * g.transpose() * dt;
  vl.bottomRightCorner<2, 2>() = f.transpose() * dt;
  const Eigen::Matrix4d e = vl.exp();
  const Eigen::Matrix2d phi = e.bottomRightCorner<2, 2>().transpose();
  const Eigen::Matrix2d cov = phi * e.topRightCorner<2, 2>();
  const Eigen::Matrix2d chol = Eigen::LLT<Eigen::Matrix2d>(0.5 * (cov + cov.transpose())).matrixL();

  const double scale = std::sqrt(eps) * std::pow(eps, -kappa);
  std::mt19937_64 rng(20240611);
  std::normal_distribution<double> normal;
  std::vector<long> hits(deltas.size(), 0);
  for (long s = 0; s < samples; ++s) {
    Eigen::Vector2d z = Eigen::Vector2d::Zero();
    double sup = 0.0;
    for (int i = 0; i < steps; ++i) {
      for (int r = 0; r < refine; ++r) {
        const Eigen::Vector2d w(normal(rng), normal(rng));
        z = phi * z + chol * w;
      }
      sup = std::max(sup, std::abs(z[0]) / scale);
    }
    for (std::size_t k = 0; k < deltas.size(); ++k) hits[k] += sup >= deltas[k] ? 1 : 0;
  }
  for (std::size_t k = 0; k < deltas.size(); ++k) {
    std::printf("delta %.6g hits %ld of %ld p %.6g\n", deltas[k], hits[k], samples,
                static_cast<double>(hits[k]) / samples);
  }
  return 0;
}
