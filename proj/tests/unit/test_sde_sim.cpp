#include <doctest.h>

#include <cmath>
#include <numeric>

#include "langevin_mdp/errors.hpp"
#include "langevin_mdp/limit_flow.hpp"
#include "langevin_mdp/mc_harness.hpp"
#include "langevin_mdp/models.hpp"
#include "langevin_mdp/sde_sim.hpp"

using namespace lmdp;

namespace {

CoefficientModel silent(const CoefficientModel& m) {
  return m.with_diffusion([d = m.dim](const Vec&) { return Mat(Mat::Zero(d, d)); }, 0.0);
}

SimConfig config1(double eps, double q = 0.0, double p = 0.0, std::uint64_t seed = 1) {
  return SimConfig::make(eps, 0.25, TimeGrid(1.0, 64), Vec::Constant(1, q), Vec::Constant(1, p), seed);
}

}  // namespace

TEST_SUITE("sde_sim") {
  TEST_CASE("config derives substeps from the stiffness cap") {
    const SimConfig c = config1(0.1);
    CHECK(c.dt_sub() <= 0.2 * 0.01);
    CHECK(c.substeps == 8);
    CHECK(SimConfig::required_substeps(1.0 / 64, 0.05, 0.2) == 32);
    SimConfig bad = c;
    bad.substeps = 2;
    try {
      bad.validate();
      FAIL("expected StiffnessViolation");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::StiffnessViolation);
    }
    CHECK_THROWS_AS(SimConfig::make(0.1, 0.5, TimeGrid(1.0, 4), Vec::Zero(1), Vec::Zero(1), 0), Error);
    CHECK_THROWS_AS(SimConfig::make(-0.1, 0.25, TimeGrid(1.0, 4), Vec::Zero(1), Vec::Zero(1), 0), Error);
    CHECK(config1(0.01).fluctuation_scale() == doctest::Approx(std::pow(0.01, 0.25)));
  }

  TEST_CASE("noise is reproducible and additive") {
    const SimConfig c = config1(0.1);
    const NoisePath a = sample_noise(c, 3, 1);
    const NoisePath b = sample_noise(c, 3, 1);
    CHECK(a.increments() == b.increments());
    CHECK(a.increments() != sample_noise(c, 4, 1).increments());
    for (int i = 0; i < 64; ++i) {
      Vec sum = Vec::Zero(1);
      for (int s = 0; s < c.substeps; ++s) sum += a.substep(static_cast<long>(i) * c.substeps + s);
      CHECK(std::abs(sum[0] - a.coarse(i)[0]) <= 1e-15);
    }
  }

  TEST_CASE("substep increments have variance dt_sub") {
    const SimConfig c = SimConfig::make(0.02, 0.25, TimeGrid(10.0, 100), Vec::Zero(1), Vec::Zero(1), 9);
    const NoisePath w = sample_noise(c, 0, 0);
    const long n = w.total_substeps();
    REQUIRE(n >= 100000);
    const double var = w.increments().squaredNorm() / static_cast<double>(n);
    // chi-square with n degrees of freedom: sd of var/dt_sub is sqrt(2/n)
    CHECK(std::abs(var / c.dt_sub() - 1.0) < 3.0 * std::sqrt(2.0 / static_cast<double>(n)));
  }

  TEST_CASE("no forcing keeps the position fixed") {
    const CoefficientModel m = silent(linear_model(1, 0.0, 1.0, 1.0));
    const SimConfig c = config1(0.1, 0.7, 0.0);
    const LangevinState s = simulate_langevin(m, c, sample_noise(c));
    CHECK((s.q.values.array() - 0.7).abs().maxCoeff() == 0.0);
    CHECK(s.p.sup_norm() == 0.0);
  }

  TEST_CASE("deterministic relaxation stays within the frozen bound") {
    const CoefficientModel m = silent(linear_model(1, 1.0, 1.0, 1.0));
    const SimConfig c = config1(0.05, 1.0, 0.0);
    const Path q0 = solve_limit_ode(m, c.q, c.grid);
    const LangevinState s = simulate_langevin(m, c, sample_noise(c));
    const double err = (s.q.values - q0.values).cwiseAbs().maxCoeff();
    // measured 2.20e-3 once (C = 0.044); frozen with a 20% margin
    CHECK(err <= 0.05 * 0.053);
  }

  TEST_CASE("relaxation error is first order in epsilon with initial momentum") {
    const CoefficientModel m = silent(linear_model(1, 1.0, 1.0, 1.0));
    auto err = [&](double eps) {
      const SimConfig c = config1(eps, 1.0, 0.5);
      const Path q0 = solve_limit_ode(m, c.q, c.grid);
      const LangevinState s = simulate_langevin(m, c, sample_noise(c));
      double e = 0.0;
      for (int i = 0; i <= 64; ++i) {
        if (c.grid.time(i) >= 5.0 * eps * eps) e = std::max(e, std::abs(s.q.values(i, 0) - q0.values(i, 0)));
      }
      return e;
    };
    const double e1 = err(0.2), e2 = err(0.1), e3 = err(0.05);
    CHECK(e1 / e2 >= 1.8);
    CHECK(e2 / e3 >= 1.8);
  }

  TEST_CASE("controlled run equals the run on shifted noise") {
    const CoefficientModel m = trig_damping_model(2, TrigParams{1.0, 0.2, 2.0, 1.0, 1.0, 0.3});
    Vec q(2), p(2);
    q << 0.3, -0.2;
    p << 0.1, 0.0;
    const SimConfig c = SimConfig::make(0.1, 0.25, TimeGrid(1.0, 32), q, p, 5);
    RowMatrix seg(2, 2);
    seg << 1.0, -0.5, 0.2, 0.8;
    const Control u = Control::piecewise(c.grid, seg);
    const NoisePath w = sample_noise(c, 2, 0);
    const LangevinState a = simulate_langevin(m, c, w, u);
    const LangevinState b = simulate_langevin(m, c, w.shifted(u, c.deviation_scale()));
    CHECK((a.q.values - b.q.values).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK((a.p.values - b.p.values).cwiseAbs().maxCoeff() <= 1e-12);
  }

  TEST_CASE("first order scheme") {
    const SimConfig c = config1(0.1, 0.4, 0.0);
    const CoefficientModel m = linear_model(1, 0.0, 1.0, 1.0);
    const NoisePath w = sample_noise(c, 1, 0);
    const Path g = simulate_first_order(m, c, w);
    double wt = 0.0;
    for (int i = 0; i < 64; ++i) wt += w.coarse(i)[0];
    CHECK(g.at(64)[0] == doctest::Approx(0.4 + std::sqrt(0.1) * wt).epsilon(1e-13));

    const CoefficientModel det = silent(linear_model(1, 1.0, 1.0, 1.0));
    const Path ge = simulate_first_order(det, c, w);
    const Path q0 = solve_limit_ode(det, c.q, c.grid);
    CHECK((ge.values - q0.values).cwiseAbs().maxCoeff() < 0.4 / 64);
  }

  TEST_CASE("first order mean matches the limit path") {
    const CoefficientModel m = linear_model(1, 1.0, 1.0, 1.0);
    const SimConfig c = config1(0.1, 1.0, 0.0, 4);
    const Path q0 = solve_limit_ode(m, c.q, c.grid);
    std::vector<double> v(10000);
    parallel_for(10000, {}, [&](long i) {
      v[static_cast<std::size_t>(i)] =
          simulate_first_order(m, c, sample_noise(c, static_cast<std::uint32_t>(i), 0)).at(64)[0];
    });
    const SampleMean s = sample_mean(v);
    CHECK(std::abs(s.mean - q0.at(64)[0]) < 3.0 * s.std_error + 2e-3);
  }

  TEST_CASE("OU benchmark variance") {
    // b = 0, alpha = sigma = 1: Var[sqrt(eps) p(T)] = (1 - e^{-2T/eps^2}) / 2
    const CoefficientModel m = linear_model(1, 0.0, 1.0, 1.0);
    const SimConfig c = SimConfig::make(0.1, 0.25, TimeGrid(1.0, 16), Vec::Zero(1), Vec::Zero(1), 8);
    std::vector<double> v(20000), sq(20000);
    parallel_for(20000, {}, [&](long i) {
      const double x = std::sqrt(0.1) *
                       simulate_langevin(m, c, sample_noise(c, static_cast<std::uint32_t>(i), 0)).p_final[0];
      v[static_cast<std::size_t>(i)] = x;
      sq[static_cast<std::size_t>(i)] = x * x;
    });
    const double mean = sample_mean(v).mean;
    const double var = sample_mean(sq).mean - mean * mean;
    CHECK(std::abs(var - 0.5) < 0.05);
  }

  TEST_CASE("fluctuation path scaling") {
    const SimConfig c = config1(0.01);
    const TimeGrid g = c.grid;
    Path a = Path::zeros(g, 1), b = Path::zeros(g, 1);
    b.values.setConstant(0.3);
    CHECK(fluctuation_path(b, b, c).sup_norm() == 0.0);
    const Path x = fluctuation_path(b, a, c);
    CHECK(x.at(5)[0] == doctest::Approx(0.3 * 3.16227766016838).epsilon(1e-12));
    const Path b2(g, 2.0 * b.values);
    CHECK(fluctuation_path(b2, a, c).at(5)[0] == doctest::Approx(2.0 * x.at(5)[0]).epsilon(1e-15));
    CHECK_THROWS_AS(fluctuation_path(b, Path::zeros(TimeGrid(1.0, 8), 1), c), Error);
  }

  TEST_CASE("remainder vanishes without forcing") {
    const CoefficientModel m = silent(linear_model(1, 0.0, 1.0, 1.0));
    const SimConfig c = config1(0.1, 0.5, 0.0);
    const NoisePath w = sample_noise(c);
    const RemainderReport r = remainder_decomposition(m, simulate_langevin(m, c, w, Recording::Fine), w, c);
    CHECK(r.total_sup == 0.0);
    for (double t : r.term_sup) CHECK(t == 0.0);
    CHECK(r.term_sup.size() == 5);
  }

  TEST_CASE("boundary layer term has its closed form") {
    const double alpha = 1.5, eps = 0.1, p = 0.8;
    const CoefficientModel m = silent(linear_model(1, 0.0, alpha, 1.0));
    const SimConfig c = SimConfig::make(eps, 0.25, TimeGrid(1.0, 64), Vec::Zero(1), Vec::Constant(1, p), 1);
    const NoisePath w = sample_noise(c);
    const RemainderReport r = remainder_decomposition(m, simulate_langevin(m, c, w, Recording::Fine), w, c);
    const double expected = p * eps / alpha * -std::expm1(-alpha / (eps * eps));
    CHECK(std::abs(r.term_sup[0] - expected) < 1e-8);
    CHECK(std::abs(r.remainder.at(64)[0] - expected) < 1e-8);
  }

  TEST_CASE("representation residual converges with the substep") {
    const CoefficientModel m = trig_damping_model(2, TrigParams{1.0, 0.2, 2.0, 1.0, 1.0, 0.3});
    Vec q(2), p(2);
    q << 0.5, -0.3;
    p << 0.2, 0.1;
    const SimConfig base = SimConfig::make(0.1, 0.25, TimeGrid(1.0, 64), q, p, 7);
    double prev = 1e300;
    double i5 = 0.0;
    for (int mult : {1, 4, 16}) {
      const SimConfig c = SimConfig::make(0.1, 0.25, base.grid, q, p, 7, 0.2, base.substeps * mult);
      const NoisePath w = sample_noise(c);
      const RemainderReport r = remainder_decomposition(m, simulate_langevin(m, c, w, Recording::Fine), w, c);
      CHECK(r.representation_residual < 0.5 * prev);
      CHECK(r.total_sup <= std::accumulate(r.term_sup.begin(), r.term_sup.end(), 0.0) + 1e-12);
      prev = r.representation_residual;
      i5 = r.term_sup[4];
    }
    // a sign error on the correction integrals would leave a residual of order |I5|
    CHECK(prev < 0.2 * i5);
  }

  TEST_CASE("representation residual on the linear Gaussian model") {
    const CoefficientModel m = linear_model(1, 1.0, 1.0, 1.0);
    const SimConfig c = config1(0.1, 1.0, 0.3, 21);
    const NoisePath w = sample_noise(c, 0, 0);
    const LangevinState s = simulate_langevin(m, c, w, Recording::Fine);
    const RemainderReport r = remainder_decomposition(m, s, w, c);
    const double scale = std::max(1.0, s.q.sup_norm());
    CHECK(r.representation_residual <= 5.0 * (c.dt_sub() + std::sqrt(c.grid.dt())) * scale);
  }

  TEST_CASE("controlled remainder has seven terms and the pathwise H2 bound") {
    const CoefficientModel m = trig_damping_model(2, TrigParams{1.0, 0.0, 2.0, 1.0, 1.0, 0.3});
    const SimConfig c = SimConfig::make(0.1, 0.25, TimeGrid(1.0, 32), Vec::Zero(2), Vec::Zero(2), 3);
    const Control u = Control::constant(c.grid, Vec::Constant(2, std::sqrt(0.5)));
    const NoisePath w = sample_noise(c, 0, 0);
    const RemainderReport r = remainder_decomposition(m, simulate_langevin(m, c, w, u, Recording::Fine), w, c, u);
    CHECK(r.controlled);
    CHECK(r.term_sup.size() == 7);
    const double N = 2.0 * u.energy();
    const double bound =
        m.lipschitz * std::sqrt(N) * std::pow(0.1, 1.5) * c.deviation_scale() / std::sqrt(2.0 * m.alpha_min);
    CHECK(r.h2_sup <= bound);
    CHECK(r.h2_sup > 0.0);
  }

  TEST_CASE("stochastic convolution shrinks faster than epsilon") {
    const CoefficientModel m = trig_damping_model(2, TrigParams{1.0, 0.2, 2.0, 1.0, 1.0, 0.3});
    std::vector<DecayRow> rows;
    for (double eps : {0.2, 0.1, 0.05, 0.025}) {
      const SimConfig c = SimConfig::make(eps, 0.25, TimeGrid(1.0, 32), Vec::Constant(2, 0.3), Vec::Zero(2), 8);
      std::vector<double> sups;
      for (std::uint32_t i = 0; i < 100; ++i) {
        const NoisePath w = sample_noise(c, i, 0);
        sups.push_back(remainder_decomposition(m, simulate_langevin(m, c, w, Recording::Fine), w, c).h1_sup);
      }
      const SampleMean s = sample_mean(sups);
      rows.push_back({eps, s.mean, s.std_error, s.samples});
    }
    // sqrt(eps) times an OU convolution of size eps
    CHECK(make_decay_table(rows).loglog_exponent >= 1.2);
  }

  TEST_CASE("mismatched inputs are rejected") {
    const CoefficientModel m = linear_model(1, 1.0, 1.0, 1.0);
    const SimConfig c = config1(0.1);
    const SimConfig other = SimConfig::make(0.1, 0.25, TimeGrid(1.0, 32), Vec::Zero(1), Vec::Zero(1), 1);
    CHECK_THROWS_AS(simulate_langevin(m, c, sample_noise(other)), Error);
    CHECK_THROWS_AS(remainder_decomposition(m, simulate_langevin(m, c, sample_noise(c)), sample_noise(c), c), Error);
    CHECK_THROWS_AS(simulate_langevin(linear_model(2, 1.0, 1.0, 1.0), c, sample_noise(c)), Error);
  }
}
