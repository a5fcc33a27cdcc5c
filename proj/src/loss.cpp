#include "graphpinn/loss.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace graphpinn {

namespace {

Var sum_of(const std::vector<Var>& v) { return sum(v); }

double sum_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s;
}

}  // namespace

Normalizers compute_normalizers(const TrainingSet& set, ProblemKind kind) {
  if (set.collocation.empty()) throw std::invalid_argument("cannot normalize: no collocation points");
  Normalizers n;
  n.m_f = 0.0;
  for (const auto& c : set.collocation) n.m_f = std::max(n.m_f, c.f * c.f);
  if (!(n.m_f > 0.0)) throw std::domain_error("forcing vanishes on every collocation point; M_f would be zero");
  if (is_time_dependent(kind)) {
    if (set.initial.empty()) throw std::invalid_argument("cannot normalize: no initial samples");
    n.m_u = 0.0;
    for (const auto& s : set.initial) n.m_u = std::max(n.m_u, s.value * s.value);
    if (!(n.m_u > 0.0)) throw std::domain_error("initial condition vanishes everywhere; M_u would be zero");
  }
  return n;
}

std::vector<EdgeData> split_by_edge(const MetricGraph& g, const TrainingSet& set) {
  std::vector<EdgeData> out(static_cast<std::size_t>(g.num_edges()));
  for (int j = 0; j < g.num_edges(); ++j) out[static_cast<std::size_t>(j)].edge = j;
  for (const auto& c : set.collocation) {
    EdgeData& d = out.at(static_cast<std::size_t>(c.edge));
    d.collocation.x.push_back(c.x);
    d.collocation.t.push_back(c.t);
    d.forcing.push_back(c.f);
  }
  for (const auto& s : set.initial) {
    EdgeData& d = out.at(static_cast<std::size_t>(s.edge));
    d.initial.x.push_back(s.x);
    d.initial.t.push_back(0.0);
    d.initial_value.push_back(s.value);
  }
  return out;
}

double outward_derivative(const Mlp& net, const MetricGraph& g, const EdgeEnd& end, double t) {
  const double x = g.coordinate(end);
  Jet j = net.input_arity() == 1 ? net.forward_jet(std::vector<double>{x}) : net.forward_jet(std::vector<double>{x, t});
  return end.end == EndKind::AtZero ? j.du_dx : -j.du_dx;
}

namespace {

template <class T>
struct Terms {
  T continuity{}, flux{}, dirichlet{};
};

// jets[k][tau]: incident end k at time index tau.
template <class T>
Terms<T> node_terms(const std::vector<EdgeEnd>& ends, const std::vector<std::vector<BasicJet<T>>>& jets,
                    const Normalizers& norm) {
  const double inv_mf = 1.0 / norm.m_f;
  Terms<T> out;
  const std::size_t steps = jets.empty() ? 0 : jets[0].size();
  if (ends.size() == 1) {
    std::vector<T> sq;
    for (const auto& j : jets[0]) sq.push_back(square(j.u));
    out.dirichlet = sum_of(sq) * inv_mf;
    return out;
  }
  std::vector<T> cont, flux;
  for (std::size_t tau = 0; tau < steps; ++tau) {
    for (std::size_t a = 0; a < ends.size(); ++a)
      for (std::size_t b = a + 1; b < ends.size(); ++b) cont.push_back(square(jets[a][tau].u - jets[b][tau].u));
    std::vector<T> outward;
    for (std::size_t k = 0; k < ends.size(); ++k)
      outward.push_back(ends[k].end == EndKind::AtZero ? jets[k][tau].du_dx : -jets[k][tau].du_dx);
    flux.push_back(square(sum_of(outward)));
  }
  out.continuity = sum_of(cont) * inv_mf;
  out.flux = sum_of(flux) * inv_mf;
  return out;
}

}  // namespace

NodeTerms record_node_loss(JetRecorder& rec, const MetricGraph& g, NodeId v, std::span<const Mlp> nets,
                           const Normalizers& norm, std::span<const double> times) {
  const auto& ends = g.incident_edge_ends(v);
  for (const EdgeEnd& e : ends)
    if (static_cast<std::size_t>(e.edge) >= nets.size())
      throw std::invalid_argument("no network supplied for edge " + std::to_string(e.edge) + " at node " +
                                  std::to_string(v));
  std::vector<std::vector<BasicJet<Var>>> jets;
  jets.reserve(ends.size());
  for (const EdgeEnd& e : ends) {
    InputBatch in;
    in.x.assign(times.size(), g.coordinate(e));
    in.t.assign(times.begin(), times.end());
    jets.push_back(rec.evaluate(nets[static_cast<std::size_t>(e.edge)], in));
  }
  const Terms<Var> t = node_terms(ends, jets, norm);
  return {t.continuity, t.flux, t.dirichlet};
}

NodeLossBreakdown node_loss(const MetricGraph& g, NodeId v, const EndJetFn& jet, const Normalizers& norm,
                            std::span<const double> times) {
  const auto& ends = g.incident_edge_ends(v);
  std::vector<std::vector<Jet>> jets;
  for (const EdgeEnd& e : ends) {
    std::vector<Jet> row;
    for (double t : times) row.push_back(jet(e, g.coordinate(e), t));
    jets.push_back(std::move(row));
  }
  const Terms<double> t = node_terms(ends, jets, norm);
  return {v, t.continuity, t.flux, t.dirichlet};
}

Var record_edge_loss(JetRecorder& rec, const EdgeData& data, const Mlp& net, const Normalizers& norm,
                     ProblemKind kind, const Coefficients& coeffs) {
  const std::size_t n = data.collocation.size();
  if (n == 0) throw std::invalid_argument("edge " + std::to_string(data.edge) + " has no collocation points");
  if (data.forcing.size() != n) throw std::invalid_argument("forcing/sample count mismatch on edge " +
                                                            std::to_string(data.edge));
  const bool timed = is_time_dependent(kind);
  if (timed != (net.input_arity() == 2))
    throw std::invalid_argument("network input arity does not match the problem kind");

  auto jets = rec.evaluate(net, data.collocation);
  std::vector<Var> sq(n);
  for (std::size_t s = 0; s < n; ++s) {
    const double x = data.collocation.x[s];
    const double t = timed ? data.collocation.t[s] : 0.0;
    sq[s] = square(data.forcing[s] - apply_operator(kind, coeffs, jets[s], x, t));
  }
  Var loss = sum(sq) * (1.0 / (norm.m_f * static_cast<double>(n)));

  if (timed) {
    const std::size_t m = data.initial.size();
    if (m == 0) throw std::invalid_argument("edge " + std::to_string(data.edge) + " has no initial samples");
    auto init = rec.evaluate(net, data.initial);
    std::vector<Var> isq(m);
    for (std::size_t s = 0; s < m; ++s) isq[s] = square(data.initial_value[s] - init[s].u);
    loss = loss + sum(isq) * (1.0 / (norm.m_u * static_cast<double>(m)));
  }
  return loss;
}

RecordedLoss record_global_loss(JetRecorder& rec, const MetricGraph& g, std::span<const Mlp> nets, double lambda,
                                std::span<const EdgeData> data, std::span<const double> times,
                                const Normalizers& norm, ProblemKind kind, NodeCountMode mode,
                                const Coefficients& coeffs) {
  if (nets.size() != static_cast<std::size_t>(g.num_edges()) || data.size() != nets.size())
    throw std::invalid_argument("need exactly one network and one data block per edge");
  RecordedLoss out;
  out.report.lambda = lambda;

  std::vector<Var> edge_terms;
  for (int j = 0; j < g.num_edges(); ++j) {
    const auto k = static_cast<std::size_t>(j);
    Var e = record_edge_loss(rec, data[k], nets[k], norm, kind, coeffs);
    out.report.edge_loss.push_back(e.value());
    edge_terms.push_back(e);
  }
  Var edge_total = sum(edge_terms);

  std::vector<Var> node_terms;
  for (NodeId v = 0; v < g.num_nodes(); ++v) {
    NodeTerms t = record_node_loss(rec, g, v, nets, norm, times);
    out.report.nodes.push_back({v, t.continuity.value(), t.flux.value(), t.dirichlet.value()});
    const double mult = mode == NodeCountMode::PerEdge ? static_cast<double>(g.degree(v)) : 1.0;
    node_terms.push_back((t.continuity + t.flux + t.dirichlet) * mult);
  }
  Var node_total = sum(node_terms);

  out.global = edge_total + lambda * node_total;
  out.report.edge_total = edge_total.value();
  out.report.node_total = node_total.value();
  out.report.global = out.global.value();
  return out;
}

NodeLossBreakdown node_loss(const MetricGraph& g, NodeId v, std::span<const Mlp> nets, const Normalizers& norm,
                            std::span<const double> times) {
  JetRecorder rec;
  NodeTerms t = record_node_loss(rec, g, v, nets, norm, times);
  return {v, t.continuity.value(), t.flux.value(), t.dirichlet.value()};
}

double edge_loss(const EdgeData& data, const Mlp& net, const Normalizers& norm, ProblemKind kind,
                 const Coefficients& coeffs) {
  JetRecorder rec;
  return record_edge_loss(rec, data, net, norm, kind, coeffs).value();
}

LossReport global_loss(const MetricGraph& g, std::span<const Mlp> nets, double lambda, std::span<const EdgeData> data,
                       std::span<const double> times, const Normalizers& norm, ProblemKind kind, NodeCountMode mode) {
  JetRecorder rec;
  return record_global_loss(rec, g, nets, lambda, data, times, norm, kind, mode).report;
}

}  // namespace graphpinn
