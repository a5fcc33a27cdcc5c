#pragma once

#include <array>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "graphpinn/dataset.hpp"
#include "graphpinn/metric_graph.hpp"
#include "graphpinn/problem.hpp"
#include "graphpinn/trainer.hpp"

namespace graphpinn {

struct ExperimentConfig {
  std::string graph_path;  // empty: built-in single unit edge
  Problem problem;
  NetworkSpec network;
  SampleCounts samples;
  TrainerConfig trainer;
  std::string output_dir = "runs";
};

ExperimentConfig preset_config(ProblemKind kind);

// JSON config. Keys not given keep the preset's values; the preset is the
// `preset` key, else `preset_override`, else elliptic. Unknown keys, wrong
// types and invalid values raise ConfigError naming the dotted key path.
// Relative graph paths resolve against `base_dir`.
ExperimentConfig parse_config(std::string_view json_text, std::string_view preset_override = {},
                              const std::string& base_dir = {});
ExperimentConfig load_config_file(const std::string& path, std::string_view preset_override = {});

// Full config as JSON, with every default written out.
std::string config_to_json(const ExperimentConfig& cfg);

// Cross-field checks (dims vs problem kind, counts, trainer ranges).
void check_config(const ExperimentConfig& cfg);

// Graph named by the config; ConfigError("graph", ...) when it cannot be loaded.
MetricGraph load_config_graph(const ExperimentConfig& cfg);

using LogSink = std::function<void(const std::string&)>;

struct RunSummary {
  double validation_error = 0.0;
  double lambda = 0.0;
  double wall_seconds = 0.0;
  std::vector<double> edge_errors;
  std::size_t collocation_points = 0;
  std::size_t validation_points = 0;
};

// Trains and writes into out_dir: history.csv, checkpoint.txt,
// pred_edge_<j>.csv and summary.json.
RunSummary run_experiment(const ExperimentConfig& cfg, const std::string& out_dir, const LogSink& log = {});

inline constexpr std::array<double, 3> kSweepLengths{1.0, 5.0, 10.0};
inline constexpr std::array<Activation, 4> kSweepActivations{Activation::Relu, Activation::Sigmoid, Activation::SinSq,
                                                            Activation::SinSqPlusX};

// errors[row][col]: rows follow kSweepLengths, columns kSweepActivations; NaN for failed cells.
struct SweepTable {
  std::array<std::array<double, 4>, 3> errors{};
};

// Base config must use a single-edge graph; its length is replaced per row.
// Each cell writes its run into out_dir/l<length>_<activation>/, and the table
// goes to out_dir/sweep.csv. Up to `jobs` cells run at once.
SweepTable sweep_activations(const ExperimentConfig& base, const std::string& out_dir, int jobs = 1,
                             const LogSink& log = {});

void write_sweep_csv(std::ostream& out, const SweepTable& table);

// collocation.csv, boundary.csv, validation.csv and, for timed kinds, initial.csv.
void dump_dataset(const ExperimentConfig& cfg, const std::string& out_dir);

struct Checkpoint {
  MetricGraph graph;
  Problem problem;
  SampleCounts samples;
  double lambda = 0.0;
  std::vector<Mlp> nets;
};

void write_checkpoint(std::ostream& out, const Checkpoint& c);
Checkpoint read_checkpoint(std::istream& in);
Checkpoint read_checkpoint_file(const std::string& path);

// Validation error of the checkpointed networks on the stored validation grid.
double checkpoint_validation_error(const Checkpoint& c);

}  // namespace graphpinn
