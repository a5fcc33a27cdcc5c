#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "graphpinn/dataset.hpp"
#include "graphpinn/loss.hpp"
#include "graphpinn/metric_graph.hpp"
#include "graphpinn/neural.hpp"
#include "graphpinn/problem.hpp"

namespace graphpinn {

struct TrainerConfig {
  double lr_w = 1e-3;
  double lr_lambda = 1000.0;
  double lambda0 = 1.0;
  int iterations = 20000;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  std::uint64_t seed = 0;
  int report_every = 100;
  int validate_every = 1000;  // 0: validate only at the final row
  NodeCountMode node_count_mode = NodeCountMode::Once;
  double divergence_factor = 1e6;
};

// Defaults; only the iteration count depends on the kind.
TrainerConfig default_trainer_config(ProblemKind kind);

void validate(const TrainerConfig& cfg);

struct NetworkSpec {
  std::vector<int> dims;
  Activation activation = Activation::SinSq;
};

// [1,25,25,1] for elliptic, [2,50,50,1] otherwise.
NetworkSpec default_network_spec(ProblemKind kind, Activation activation = Activation::SinSq);

// Everything derived from (graph, problem, counts) that training reads.
struct TrainingData {
  Problem problem;
  TrainingSet set;
  std::vector<EdgeData> edges;
  Normalizers norm;
  std::vector<ValidationSample> validation;
};

TrainingData prepare_training_data(const MetricGraph& g, const Problem& p, const SampleCounts& counts);

// One network per edge; edge j draws its weights from a seed derived from (seed, j).
std::vector<Mlp> init_networks(const MetricGraph& g, const NetworkSpec& spec, std::uint64_t seed);

struct HistoryRow {
  int iter = 0;
  double edge_total = 0.0;
  double node_total = 0.0;
  double lambda = 0.0;
  double global = 0.0;
  std::optional<double> val_err;
};

struct TrainState {
  std::vector<Mlp> nets;
  double lambda = 1.0;
  std::vector<std::vector<double>> adam_m;
  std::vector<std::vector<double>> adam_v;
  int iteration = 0;
  std::vector<HistoryRow> history;
};

TrainState init_state(std::vector<Mlp> nets, const TrainerConfig& cfg);

// Loss and gradients at the current (w, lambda), then an Adam step on every
// network and lambda += lr_lambda * node_total. Returns the pre-update report.
// Throws DivergenceError on a non-finite loss or gradient.
LossReport bdmm_step(TrainState& state, const MetricGraph& g, const TrainingData& data, const TrainerConfig& cfg,
                     JetRecorder& rec);

// Loss report without updating anything.
LossReport evaluate_loss(const TrainState& state, const MetricGraph& g, const TrainingData& data,
                         const TrainerConfig& cfg);

// Mean |u_exact - u_pred| over all samples.
double validation_error(std::span<const Mlp> nets, std::span<const ValidationSample> samples);
// Same mean restricted to each edge; indexed by edge id.
std::vector<double> edge_validation_errors(std::span<const Mlp> nets, std::span<const ValidationSample> samples);
// Network predictions at every validation sample, in sample order.
std::vector<double> predict(std::span<const Mlp> nets, std::span<const ValidationSample> samples);

struct TrainedSystem {
  MetricGraph graph;
  Problem problem;
  std::vector<Mlp> nets;
  double lambda = 0.0;
  double validation_error = 0.0;
  std::vector<double> edge_errors;
  std::vector<HistoryRow> history;
};

// Called after every step with (iteration, pre-update report, lambda after the update).
using StepObserver = std::function<void(int, const LossReport&, double)>;

// History gets a row every report_every iterations plus a final row at
// iter == iterations holding the loss of the returned networks.
TrainedSystem train(const MetricGraph& g, const TrainingData& data, const NetworkSpec& spec, const TrainerConfig& cfg,
                    const StepObserver& observer = {});

void write_history_csv(std::ostream& out, std::span<const HistoryRow> rows);

}  // namespace graphpinn
