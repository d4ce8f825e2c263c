#include "langevin_mdp/time_grid.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <vector>

#include "langevin_mdp/errors.hpp"

namespace lmdp {

TimeGrid::TimeGrid(double horizon, int steps) : horizon_(horizon), steps_(steps) {
  if (!(horizon > 0.0) || !std::isfinite(horizon)) {
    throw Error(ErrorKind::InvalidArgument, "time horizon must be positive and finite");
  }
  if (steps < 1) throw Error(ErrorKind::InvalidArgument, "grid needs at least one step");
}

Path::Path(TimeGrid g, RowMatrix v) : grid(g), values(std::move(v)) {
  if (values.rows() != grid.nodes()) {
    throw Error(ErrorKind::GridMismatch, "path has " + std::to_string(values.rows()) +
                                             " rows for a grid with " + std::to_string(grid.nodes()) +
                                             " nodes");
  }
}

Path Path::zeros(TimeGrid g, int dim) { return Path(g, RowMatrix::Zero(g.nodes(), dim)); }

double Path::sup_norm() const { return values.rowwise().norm().maxCoeff(); }

void require_same_grid(const TimeGrid& a, const TimeGrid& b, const char* what) {
  if (!(a == b)) {
    std::ostringstream msg;
    msg << what << ": grid (T=" << a.horizon() << ", n=" << a.steps() << ") vs (T=" << b.horizon()
        << ", n=" << b.steps() << ")";
    throw Error(ErrorKind::GridMismatch, msg.str());
  }
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

void write_path_csv(const Path& path, std::ostream& out) {
  out << "t";
  for (int j = 0; j < path.dim(); ++j) out << ",x" << (j + 1);
  out << "\n";
  for (int i = 0; i < path.grid.nodes(); ++i) {
    out << format_double(path.grid.time(i));
    for (int j = 0; j < path.dim(); ++j) out << ',' << format_double(path.values(i, j));
    out << "\n";
  }
}

void write_path_csv(const Path& path, const std::string& file) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw Error(ErrorKind::InvalidArgument, "cannot open '" + file + "' for writing");
  write_path_csv(path, out);
}

namespace {

double parse_double(const std::string& field) {
  double v = 0.0;
  const auto* first = field.data();
  const auto* last = field.data() + field.size();
  const auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc() || res.ptr != last) {
    throw Error(ErrorKind::InvalidArgument, "malformed number '" + field + "' in path CSV");
  }
  return v;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(field);
  return out;
}

}  // namespace

Path read_path_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorKind::InvalidArgument, "empty path CSV");
  const auto header = split(line);
  if (header.size() < 2 || header[0] != "t") {
    throw Error(ErrorKind::InvalidArgument, "path CSV header must be t,x1..xd");
  }
  const auto dim = static_cast<int>(header.size() - 1);
  std::vector<double> times;
  std::vector<double> flat;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    if (line.back() == '\r') line.pop_back();
    const auto fields = split(line);
    if (static_cast<int>(fields.size()) != dim + 1) {
      throw Error(ErrorKind::InvalidArgument, "path CSV row has wrong field count");
    }
    times.push_back(parse_double(fields[0]));
    for (int j = 0; j < dim; ++j) flat.push_back(parse_double(fields[j + 1]));
  }
  if (times.size() < 2 || times.front() != 0.0) {
    throw Error(ErrorKind::InvalidArgument, "path CSV must start at t=0 and have >= 2 rows");
  }
  const int steps = static_cast<int>(times.size()) - 1;
  const TimeGrid grid(times.back(), steps);
  for (int i = 0; i <= steps; ++i) {
    if (std::abs(times[i] - grid.time(i)) > 1e-9 * grid.horizon()) {
      throw Error(ErrorKind::GridMismatch, "path CSV times are not a uniform grid");
    }
  }
  RowMatrix values(steps + 1, dim);
  for (int i = 0; i <= steps; ++i) {
    for (int j = 0; j < dim; ++j) values(i, j) = flat[static_cast<std::size_t>(i * dim + j)];
  }
  return Path(grid, std::move(values));
}

Path read_path_csv(const std::string& file) {
  std::ifstream in(file);
  if (!in) throw Error(ErrorKind::InvalidArgument, "cannot open path CSV '" + file + "'");
  return read_path_csv(in);
}

}  // namespace lmdp
