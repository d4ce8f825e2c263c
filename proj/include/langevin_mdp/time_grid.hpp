#pragma once

#include <iosfwd>
#include <string>

#include "langevin_mdp/types.hpp"

namespace lmdp {

// Uniform partition of [0, T] into n steps.
class TimeGrid {
 public:
  TimeGrid() : TimeGrid(1.0, 1) {}
  TimeGrid(double horizon, int steps);

  double horizon() const noexcept { return horizon_; }
  int steps() const noexcept { return steps_; }
  int nodes() const noexcept { return steps_ + 1; }
  double dt() const noexcept { return horizon_ / steps_; }
  // t_n is exactly T.
  double time(int i) const noexcept { return i == steps_ ? horizon_ : i * dt(); }

  bool operator==(const TimeGrid& other) const noexcept {
    return horizon_ == other.horizon_ && steps_ == other.steps_;
  }

 private:
  double horizon_;
  int steps_;
};

// Trajectory sampled on a grid: values.row(i) is the state at t_i.
struct Path {
  TimeGrid grid;
  RowMatrix values;

  Path() : Path(TimeGrid(), RowMatrix::Zero(2, 1)) {}
  Path(TimeGrid g, RowMatrix v);
  static Path zeros(TimeGrid g, int dim);

  int dim() const noexcept { return static_cast<int>(values.cols()); }
  Vec at(int i) const { return values.row(i).transpose(); }
  void set(int i, const Vec& x) { values.row(i) = x.transpose(); }

  // max_i |x(t_i)|
  double sup_norm() const;
};

// Throws GridMismatch when the grids differ.
void require_same_grid(const TimeGrid& a, const TimeGrid& b, const char* what);

// CSV with header t,x1..xd and one row per node, shortest round-trip floats.
void write_path_csv(const Path& path, std::ostream& out);
void write_path_csv(const Path& path, const std::string& file);
Path read_path_csv(std::istream& in);
Path read_path_csv(const std::string& file);

// Shortest decimal string that parses back to the same double.
std::string format_double(double v);

}  // namespace lmdp
