#include <doctest.h>

#include <sstream>

#include "langevin_mdp/errors.hpp"
#include "langevin_mdp/time_grid.hpp"

using namespace lmdp;

TEST_SUITE("time_grid") {
  TEST_CASE("nodes and spacing") {
    const TimeGrid g(0.7, 3);
    CHECK(g.nodes() == 4);
    CHECK(g.time(0) == 0.0);
    CHECK(g.time(3) == 0.7);
    CHECK(g.dt() == doctest::Approx(0.7 / 3));
    CHECK_THROWS_AS(TimeGrid(1.0, 0), Error);
    CHECK_THROWS_AS(TimeGrid(-1.0, 4), Error);
  }

  TEST_CASE("csv round trip is exact") {
    const TimeGrid g(1.0, 5);
    Path p = Path::zeros(g, 2);
    for (int i = 0; i <= 5; ++i) {
      Vec x(2);
      x << 0.1 * i + 1e-17 * i, -1.0 / (i + 3.0);
      p.set(i, x);
    }
    std::stringstream ss;
    write_path_csv(p, ss);
    CHECK(ss.str().rfind("t,x1,x2\n", 0) == 0);
    const Path back = read_path_csv(ss);
    CHECK(back.grid == g);
    CHECK(back.values == p.values);
  }

  TEST_CASE("shortest round-trip formatting") {
    CHECK(format_double(0.1) == "0.1");
    CHECK(format_double(1.0) == "1");
    CHECK(std::stod(format_double(1.0 / 3.0)) == 1.0 / 3.0);
  }

  TEST_CASE("malformed csv is rejected") {
    std::stringstream bad("t,x1\n0,0\n0.5,abc\n1,2\n");
    CHECK_THROWS_AS(read_path_csv(bad), Error);
    std::stringstream uneven("t,x1\n0,0\n0.3,1\n1,2\n");
    CHECK_THROWS_AS(read_path_csv(uneven), Error);
  }

  TEST_CASE("grid mismatch") {
    CHECK_THROWS_AS(require_same_grid(TimeGrid(1.0, 4), TimeGrid(1.0, 5), "test"), Error);
    CHECK_NOTHROW(require_same_grid(TimeGrid(1.0, 4), TimeGrid(1.0, 4), "test"));
    CHECK(Path::zeros(TimeGrid(1.0, 4), 3).sup_norm() == 0.0);
  }
}
