#pragma once

#include <functional>
#include <span>
#include <vector>

#include "graphpinn/dataset.hpp"
#include "graphpinn/metric_graph.hpp"
#include "graphpinn/neural.hpp"
#include "graphpinn/problem.hpp"

namespace graphpinn {

// How node terms enter the global loss: each node once, or once per incident
// edge end (re-counting a node deg(v) times).
enum class NodeCountMode { Once, PerEdge };

struct Normalizers {
  double m_f = 1.0;  // max f^2 over all collocation points
  double m_u = 1.0;  // max g^2 over all initial samples (time-dependent kinds)
};

Normalizers compute_normalizers(const TrainingSet& set, ProblemKind kind);

struct NodeLossBreakdown {
  NodeId node = 0;
  double continuity = 0.0;
  double flux = 0.0;
  double dirichlet = 0.0;

  double total() const noexcept { return continuity + flux + dirichlet; }
};

struct LossReport {
  std::vector<double> edge_loss;  // indexed by edge id
  std::vector<NodeLossBreakdown> nodes;
  double edge_total = 0.0;
  double node_total = 0.0;  // includes the node count multiplicity
  double lambda = 0.0;
  double global = 0.0;
};

// Training samples of one edge, laid out as network input batches.
struct EdgeData {
  int edge = 0;
  InputBatch collocation;
  std::vector<double> forcing;
  InputBatch initial;  // empty for elliptic
  std::vector<double> initial_value;
};

std::vector<EdgeData> split_by_edge(const MetricGraph& g, const TrainingSet& set);

// Derivative at the node end of an edge, pointing into the edge:
// +du/dx at AtZero, -du/dx at AtLength.
double outward_derivative(const Mlp& net, const MetricGraph& g, const EdgeEnd& end, double t = 0.0);

// Tape-recorded versions; the plain versions below wrap these.
struct NodeTerms {
  Var continuity;
  Var flux;
  Var dirichlet;
};

NodeTerms record_node_loss(JetRecorder& rec, const MetricGraph& g, NodeId v, std::span<const Mlp> nets,
                           const Normalizers& norm, std::span<const double> times);

Var record_edge_loss(JetRecorder& rec, const EdgeData& data, const Mlp& net, const Normalizers& norm,
                     ProblemKind kind, const Coefficients& coeffs = default_coefficients());

struct RecordedLoss {
  LossReport report;
  Var global;
};

RecordedLoss record_global_loss(JetRecorder& rec, const MetricGraph& g, std::span<const Mlp> nets, double lambda,
                                std::span<const EdgeData> data, std::span<const double> times,
                                const Normalizers& norm, ProblemKind kind,
                                NodeCountMode mode = NodeCountMode::Once,
                                const Coefficients& coeffs = default_coefficients());

NodeLossBreakdown node_loss(const MetricGraph& g, NodeId v, std::span<const Mlp> nets, const Normalizers& norm,
                            std::span<const double> times);

// Node terms for arbitrary jets at the incident ends, e.g. an analytic solution.
using EndJetFn = std::function<Jet(const EdgeEnd& end, double x, double t)>;
NodeLossBreakdown node_loss(const MetricGraph& g, NodeId v, const EndJetFn& jet, const Normalizers& norm,
                            std::span<const double> times);

double edge_loss(const EdgeData& data, const Mlp& net, const Normalizers& norm, ProblemKind kind,
                 const Coefficients& coeffs = default_coefficients());

LossReport global_loss(const MetricGraph& g, std::span<const Mlp> nets, double lambda, std::span<const EdgeData> data,
                       std::span<const double> times, const Normalizers& norm, ProblemKind kind,
                       NodeCountMode mode = NodeCountMode::Once);

}  // namespace graphpinn
