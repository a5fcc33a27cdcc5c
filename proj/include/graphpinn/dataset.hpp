#pragma once

#include <iosfwd>
#include <vector>

#include "graphpinn/metric_graph.hpp"
#include "graphpinn/problem.hpp"

namespace graphpinn {

// Space counts are per unit length; time counts span [0, T] and are ignored
// for elliptic problems.
struct SampleCounts {
  int n_space_train = 2000;
  int n_time_train = 20;
  int n_space_validate = 500;
  int n_time_validate = 500;
};

// 2000 space samples per unit length for elliptic; 100 space x 20 time otherwise.
SampleCounts default_sample_counts(ProblemKind kind);

struct CollocationPoint {
  int edge = 0;
  double x = 0.0;
  double t = 0.0;  // 0 for elliptic
  double f = 0.0;
};

// Homogeneous Dirichlet sample at a boundary node; the target is always 0.
struct BoundarySample {
  int edge = 0;
  EndKind end = EndKind::AtZero;
  double t = 0.0;
  double target = 0.0;
};

struct InitialSample {
  int edge = 0;
  double x = 0.0;
  double value = 0.0;
};

struct ValidationSample {
  int edge = 0;
  double x = 0.0;
  double t = 0.0;
  double u_exact = 0.0;
};

// All vectors are ordered by edge id, then time, then x.
struct TrainingSet {
  std::vector<CollocationPoint> collocation;
  std::vector<BoundarySample> boundary;
  std::vector<InitialSample> initial;
  std::vector<double> time_grid;  // t_tau, tau = 0..n_time_train-1; {0} for elliptic
};

// Uniform grid with n points per unit length: number of intervals on an edge.
// Throws std::invalid_argument when fewer than two intervals fit.
int grid_intervals(double length, int per_unit);

// Time grid t_tau = tau T / (n - 1).
std::vector<double> time_grid(double horizon, int n);

TrainingSet build_training_set(const MetricGraph& g, const Problem& p, const SampleCounts& counts);
std::vector<ValidationSample> build_validation_set(const MetricGraph& g, const Problem& p, const SampleCounts& counts);

void validate_counts(const SampleCounts& counts, const Problem& p);

// CSV dumps: header row, ',' separator. The t column is written for every kind.
void write_collocation_csv(std::ostream& out, const TrainingSet& set);
void write_initial_csv(std::ostream& out, const TrainingSet& set);
void write_boundary_csv(std::ostream& out, const TrainingSet& set);
void write_validation_csv(std::ostream& out, const std::vector<ValidationSample>& set);

}  // namespace graphpinn
