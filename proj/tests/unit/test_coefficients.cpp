#include <doctest.h>

#include <cmath>

#include "langevin_mdp/coefficients.hpp"
#include "langevin_mdp/errors.hpp"
#include "langevin_mdp/models.hpp"

using namespace lmdp;

namespace {

Vec vec(std::initializer_list<double> xs) {
  Vec v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

Box box_around(int dim, double half) { return {Vec::Constant(dim, -half), Vec::Constant(dim, half)}; }

}  // namespace

TEST_SUITE("coefficients") {
  TEST_CASE("drift ratio and its jacobian") {
    const CoefficientModel m = trig_damping_model(2);
    const Vec x = vec({0.4, -0.7});
    const double a = 2.0 + std::sin(0.4);
    const Vec r = drift_ratio(m, x);
    CHECK(r[0] == doctest::Approx(-0.7 / a).epsilon(1e-14));
    CHECK(r[1] == doctest::Approx(-0.4 / a).epsilon(1e-14));

    const Mat analytic = drift_ratio_jacobian(m, x);
    const Mat fd = drift_ratio_jacobian_fd(m, x);
    CHECK((analytic - fd).norm() < 1e-8);

    const Mat s = diffusion_ratio(m, x);
    CHECK((s - Mat::Identity(2, 2) / a).norm() < 1e-15);
  }

  TEST_CASE("finite differences are used when jacobians are absent") {
    CoefficientModel m = double_well_model(1, 2.0, 1.5, 1.0);
    m.drift_jacobian = nullptr;
    CHECK_FALSE(m.has_analytic_jacobians());
    const Vec x = vec({0.3});
    const CoefficientModel full = double_well_model(1, 2.0, 1.5, 1.0);
    CHECK(drift_ratio_jacobian(m, x)(0, 0) == doctest::Approx(drift_ratio_jacobian(full, x)(0, 0)).epsilon(1e-8));
  }

  TEST_CASE("non-positive damping is rejected") {
    const CoefficientModel m = linear_model(1, 1.0, 1.0, 1.0).with_damping(
        [](const Vec& x) { return x[0]; }, [](const Vec&) { return Vec(Vec::Ones(1)); }, 1.0, 1.0, 1.0);
    const Vec x = vec({-0.5});
    CHECK_THROWS_AS(drift_ratio(m, x), Error);
    try {
      drift_ratio(m, x);
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::NonPositiveDamping);
    }
  }

  TEST_CASE("builtin models pass their own hypothesis audit") {
    for (const auto& info : builtin_models()) {
      const CoefficientModel m = make_builtin_model(info.name, {});
      const HypothesisReport rep = validate_hypothesis(m, box_around(m.dim, 3.0), 500, 1e-6, 5);
      INFO(info.name);
      CHECK(rep.all_passed());
      CHECK(rep.clauses.size() == 6);
      CHECK(rep.damping_min >= m.alpha_min - 1e-12);
      CHECK(rep.damping_max <= m.alpha_max + 1e-12);
    }
  }

  TEST_CASE("understated Lipschitz constant fails clause (a)") {
    CoefficientModel m = linear_model(1, 3.0, 1.0, 1.0);
    m.lipschitz = 1.0;
    const HypothesisReport rep = validate_hypothesis(m, box_around(1, 1.0), 200, 1e-6);
    CHECK_FALSE(rep.all_passed());
    bool drift_failed = false;
    for (const auto& c : rep.clauses) {
      if (c.id == "a.drift_lipschitz") drift_failed = !c.passed;
    }
    CHECK(drift_failed);
    CHECK(rep.lipschitz_drift == doctest::Approx(3.0).epsilon(1e-9));
  }

  TEST_CASE("vanishing diffusion fails invertibility") {
    const CoefficientModel m = linear_model(1, 1.0, 1.0, 0.0);
    const HypothesisReport rep = validate_hypothesis(m, box_around(1, 1.0), 100, 1e-6);
    CHECK_FALSE(rep.all_passed());
    CHECK(rep.min_singular_diffusion == 0.0);
  }

  TEST_CASE("composition keeps each coefficient's source") {
    const CoefficientModel a = linear_model(2, 1.0, 1.0, 1.0);
    const CoefficientModel b = trig_damping_model(2);
    const CoefficientModel c = compose(a, b, b);
    const Vec x = vec({0.2, 0.1});
    CHECK((c.drift(x) - a.drift(x)).norm() == 0.0);
    CHECK(c.damping(x) == b.damping(x));
    CHECK(c.lipschitz >= std::max(a.lipschitz, b.lipschitz));
    CHECK_THROWS_AS(compose(a, linear_model(1, 1.0, 1.0, 1.0), b), Error);
  }

  TEST_CASE("registry rejects unknown names and parameters") {
    CHECK_THROWS_AS(make_builtin_model("nope", {}), Error);
    CHECK_THROWS_AS(make_builtin_model("linear", {{"beta", 1.0}}), Error);
    CHECK_THROWS_AS(make_builtin_model("linear", {{"dim", 1.5}}), Error);
    CHECK(make_builtin_model("linear", {{"dim", 3}}).dim == 3);
  }

  TEST_CASE("error kinds are named and classified") {
    CHECK(std::string(to_string(ErrorKind::SingularGramian)) == "SingularGramian");
    CHECK(is_input_error(ErrorKind::GridMismatch));
    CHECK_FALSE(is_input_error(ErrorKind::NonFinite));
    const Error e(ErrorKind::NonFinite, "boom");
    CHECK(std::string(e.what()).find("NonFinite") != std::string::npos);
  }
}
