#include "graphpinn/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>
#include <string>

namespace graphpinn {

namespace {

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// i-th node of a uniform grid with `intervals` intervals on [0, length].
double grid_point(double length, int intervals, int i) {
  return i == intervals ? length : i * (length / intervals);
}

}  // namespace

SampleCounts default_sample_counts(ProblemKind kind) {
  SampleCounts c;
  if (is_time_dependent(kind)) c.n_space_train = 100;
  return c;
}

int grid_intervals(double length, int per_unit) {
  if (per_unit <= 0) throw std::invalid_argument("samples per unit length must be positive");
  const double n = std::round(per_unit * length);
  if (n < 2.0)
    throw std::invalid_argument("edge of length " + fmt(length) + " is too coarse for " + std::to_string(per_unit) +
                                " samples per unit length");
  return static_cast<int>(n);
}

std::vector<double> time_grid(double horizon, int n) {
  if (n < 2) throw std::invalid_argument("time grid needs at least two points");
  std::vector<double> t(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) t[static_cast<std::size_t>(k)] = k * horizon / (n - 1);
  return t;
}

void validate_counts(const SampleCounts& c, const Problem& p) {
  if (c.n_space_train <= 0) throw std::invalid_argument("n_space_train must be positive");
  if (c.n_space_validate <= 0) throw std::invalid_argument("n_space_validate must be positive");
  if (is_time_dependent(p.kind)) {
    if (c.n_time_train < 2) throw std::invalid_argument("n_time_train must be at least 2");
    if (c.n_time_validate < 2) throw std::invalid_argument("n_time_validate must be at least 2");
    if (!(p.horizon > 0.0)) throw std::invalid_argument("time horizon must be positive");
  }
}

TrainingSet build_training_set(const MetricGraph& g, const Problem& p, const SampleCounts& counts) {
  validate_counts(counts, p);
  const bool timed = is_time_dependent(p.kind);
  TrainingSet set;
  set.time_grid = timed ? time_grid(p.horizon, counts.n_time_train) : std::vector<double>{0.0};
  const std::size_t first_tau = timed ? 1 : 0;

  for (const Edge& e : g.edges()) {
    const int m = grid_intervals(e.length, counts.n_space_train);
    for (std::size_t tau = first_tau; tau < set.time_grid.size(); ++tau) {
      const double t = set.time_grid[tau];
      for (int i = 1; i < m; ++i) {
        const double x = grid_point(e.length, m, i);
        set.collocation.push_back({e.id, x, t, forcing(p, e.length, x, t)});
      }
    }
    if (timed)
      for (int i = 0; i <= m; ++i) {
        const double x = grid_point(e.length, m, i);
        set.initial.push_back({e.id, x, initial_condition(p, e.length, x)});
      }
  }

  for (NodeId v : g.boundary()) {
    const EdgeEnd& end = g.incident_edge_ends(v).front();
    for (std::size_t tau = first_tau; tau < set.time_grid.size(); ++tau)
      set.boundary.push_back({end.edge, end.end, set.time_grid[tau], 0.0});
  }
  std::stable_sort(set.boundary.begin(), set.boundary.end(),
                   [](const BoundarySample& a, const BoundarySample& b) { return a.edge < b.edge; });
  return set;
}

std::vector<ValidationSample> build_validation_set(const MetricGraph& g, const Problem& p,
                                                   const SampleCounts& counts) {
  validate_counts(counts, p);
  const bool timed = is_time_dependent(p.kind);
  const std::vector<double> times = timed ? time_grid(p.horizon, counts.n_time_validate) : std::vector<double>{0.0};
  std::vector<ValidationSample> out;
  for (const Edge& e : g.edges()) {
    const int m = grid_intervals(e.length, counts.n_space_validate);
    for (double t : times)
      for (int i = 1; i < m; ++i) {
        const double x = grid_point(e.length, m, i);
        out.push_back({e.id, x, t, exact_u(p, e.length, x, t)});
      }
  }
  return out;
}

void write_collocation_csv(std::ostream& out, const TrainingSet& set) {
  out << "edge,x,t,f\n";
  for (const auto& c : set.collocation) out << c.edge << ',' << fmt(c.x) << ',' << fmt(c.t) << ',' << fmt(c.f) << '\n';
}

void write_initial_csv(std::ostream& out, const TrainingSet& set) {
  out << "edge,x,g\n";
  for (const auto& s : set.initial) out << s.edge << ',' << fmt(s.x) << ',' << fmt(s.value) << '\n';
}

void write_boundary_csv(std::ostream& out, const TrainingSet& set) {
  out << "edge,end,t,target\n";
  for (const auto& b : set.boundary)
    out << b.edge << ',' << (b.end == EndKind::AtZero ? "0" : "l") << ',' << fmt(b.t) << ',' << fmt(b.target) << '\n';
}

void write_validation_csv(std::ostream& out, const std::vector<ValidationSample>& set) {
  out << "edge,x,t,u_exact\n";
  for (const auto& v : set) out << v.edge << ',' << fmt(v.x) << ',' << fmt(v.t) << ',' << fmt(v.u_exact) << '\n';
}

}  // namespace graphpinn
