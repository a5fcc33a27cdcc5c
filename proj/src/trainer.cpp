#include "graphpinn/trainer.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <random>
#include <stdexcept>
#include <string>

#include "graphpinn/error.hpp"

namespace graphpinn {

namespace {

std::uint64_t edge_seed(std::uint64_t seed, int edge) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(edge)};
  std::uint32_t out[2];
  seq.generate(out, out + 2);
  return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void check_finite(const LossReport& r) {
  for (std::size_t j = 0; j < r.edge_loss.size(); ++j)
    if (!std::isfinite(r.edge_loss[j]))
      throw DivergenceError("non-finite loss on edge " + std::to_string(j));
  for (const auto& n : r.nodes)
    if (!std::isfinite(n.total())) throw DivergenceError("non-finite loss at node " + std::to_string(n.node));
  if (!std::isfinite(r.global)) throw DivergenceError("non-finite global loss");
}

std::vector<std::vector<double>> group_by_edge(std::span<const Mlp> nets, std::span<const ValidationSample> samples,
                                               std::vector<std::vector<std::size_t>>& index) {
  std::vector<InputBatch> batches(nets.size());
  index.assign(nets.size(), {});
  for (std::size_t s = 0; s < samples.size(); ++s) {
    const auto e = static_cast<std::size_t>(samples[s].edge);
    if (e >= nets.size()) throw std::invalid_argument("validation sample references unknown edge " +
                                                      std::to_string(samples[s].edge));
    batches[e].x.push_back(samples[s].x);
    batches[e].t.push_back(samples[s].t);
    index[e].push_back(s);
  }
  std::vector<std::vector<double>> out(nets.size());
  for (std::size_t e = 0; e < nets.size(); ++e)
    if (batches[e].size() > 0) out[e] = forward_batch(nets[e], batches[e]);
  return out;
}

}  // namespace

TrainerConfig default_trainer_config(ProblemKind kind) {
  TrainerConfig c;
  c.iterations = is_time_dependent(kind) ? 40000 : 20000;
  return c;
}

void validate(const TrainerConfig& c) {
  if (!(c.lr_w > 0.0)) throw ConfigError("trainer.lr_w", "must be positive");
  if (!(c.lr_lambda > 0.0)) throw ConfigError("trainer.lr_lambda", "must be positive");
  if (!(c.lambda0 >= 0.0)) throw ConfigError("trainer.lambda0", "must be non-negative");
  if (c.iterations < 0) throw ConfigError("trainer.iterations", "must be non-negative");
  if (!(c.adam_beta1 >= 0.0 && c.adam_beta1 < 1.0)) throw ConfigError("trainer.adam_beta1", "must lie in [0, 1)");
  if (!(c.adam_beta2 >= 0.0 && c.adam_beta2 < 1.0)) throw ConfigError("trainer.adam_beta2", "must lie in [0, 1)");
  if (!(c.adam_eps > 0.0)) throw ConfigError("trainer.adam_eps", "must be positive");
  if (c.report_every <= 0) throw ConfigError("trainer.report_every", "must be positive");
  if (c.validate_every < 0) throw ConfigError("trainer.validate_every", "must be non-negative");
  if (!(c.divergence_factor > 1.0)) throw ConfigError("trainer.divergence_factor", "must exceed 1");
}

NetworkSpec default_network_spec(ProblemKind kind, Activation activation) {
  if (is_time_dependent(kind)) return {{2, 50, 50, 1}, activation};
  return {{1, 25, 25, 1}, activation};
}

TrainingData prepare_training_data(const MetricGraph& g, const Problem& p, const SampleCounts& counts) {
  TrainingData d;
  d.problem = p;
  d.set = build_training_set(g, p, counts);
  d.edges = split_by_edge(g, d.set);
  d.norm = compute_normalizers(d.set, p.kind);
  d.validation = build_validation_set(g, p, counts);
  return d;
}

std::vector<Mlp> init_networks(const MetricGraph& g, const NetworkSpec& spec, std::uint64_t seed) {
  std::vector<Mlp> nets;
  nets.reserve(static_cast<std::size_t>(g.num_edges()));
  for (int j = 0; j < g.num_edges(); ++j) nets.push_back(Mlp::init(spec.dims, spec.activation, edge_seed(seed, j)));
  return nets;
}

TrainState init_state(std::vector<Mlp> nets, const TrainerConfig& cfg) {
  TrainState s;
  s.lambda = cfg.lambda0;
  for (const Mlp& n : nets) {
    s.adam_m.emplace_back(n.parameter_count(), 0.0);
    s.adam_v.emplace_back(n.parameter_count(), 0.0);
  }
  s.nets = std::move(nets);
  return s;
}

LossReport bdmm_step(TrainState& state, const MetricGraph& g, const TrainingData& data, const TrainerConfig& cfg,
                     JetRecorder& rec) {
  if (state.adam_m.size() != state.nets.size() || state.adam_v.size() != state.nets.size())
    throw std::invalid_argument("optimizer state does not match the networks");
  rec.clear();
  RecordedLoss loss = record_global_loss(rec, g, state.nets, state.lambda, data.edges, data.set.time_grid, data.norm,
                                         data.problem.kind, cfg.node_count_mode);
  check_finite(loss.report);

  std::vector<const Mlp*> ptrs;
  for (const Mlp& n : state.nets) ptrs.push_back(&n);
  std::vector<WeightGradient> grads = rec.gradients(loss.global, ptrs);

  for (std::size_t j = 0; j < grads.size(); ++j)
    for (double gk : grads[j])
      if (!std::isfinite(gk)) throw DivergenceError("non-finite gradient on edge " + std::to_string(j));

  const int q = state.iteration + 1;
  const double c1 = 1.0 - std::pow(cfg.adam_beta1, q);
  const double c2 = 1.0 - std::pow(cfg.adam_beta2, q);
  for (std::size_t j = 0; j < grads.size(); ++j) {
    std::span<double> w = state.nets[j].parameters();
    std::vector<double>& m = state.adam_m[j];
    std::vector<double>& v = state.adam_v[j];
    if (m.size() != w.size() || v.size() != w.size())
      throw std::invalid_argument("optimizer moments do not match network " + std::to_string(j));
    for (std::size_t k = 0; k < w.size(); ++k) {
      const double gk = grads[j][k];
      m[k] = cfg.adam_beta1 * m[k] + (1.0 - cfg.adam_beta1) * gk;
      v[k] = cfg.adam_beta2 * v[k] + (1.0 - cfg.adam_beta2) * gk * gk;
      w[k] -= cfg.lr_w * (m[k] / c1) / (std::sqrt(v[k] / c2) + cfg.adam_eps);
    }
  }
  state.lambda += cfg.lr_lambda * loss.report.node_total;
  state.iteration = q;
  return loss.report;
}

LossReport evaluate_loss(const TrainState& state, const MetricGraph& g, const TrainingData& data,
                         const TrainerConfig& cfg) {
  return global_loss(g, state.nets, state.lambda, data.edges, data.set.time_grid, data.norm, data.problem.kind,
                     cfg.node_count_mode);
}

std::vector<double> predict(std::span<const Mlp> nets, std::span<const ValidationSample> samples) {
  std::vector<std::vector<std::size_t>> index;
  auto per_edge = group_by_edge(nets, samples, index);
  std::vector<double> out(samples.size());
  for (std::size_t e = 0; e < nets.size(); ++e)
    for (std::size_t k = 0; k < index[e].size(); ++k) out[index[e][k]] = per_edge[e][k];
  return out;
}

double validation_error(std::span<const Mlp> nets, std::span<const ValidationSample> samples) {
  if (samples.empty()) throw std::invalid_argument("empty validation set");
  const std::vector<double> u = predict(nets, samples);
  double acc = 0.0;
  for (std::size_t s = 0; s < samples.size(); ++s) acc += std::abs(samples[s].u_exact - u[s]);
  return acc / static_cast<double>(samples.size());
}

std::vector<double> edge_validation_errors(std::span<const Mlp> nets, std::span<const ValidationSample> samples) {
  const std::vector<double> u = predict(nets, samples);
  std::vector<double> sum(nets.size(), 0.0);
  std::vector<std::size_t> count(nets.size(), 0);
  for (std::size_t s = 0; s < samples.size(); ++s) {
    const auto e = static_cast<std::size_t>(samples[s].edge);
    sum[e] += std::abs(samples[s].u_exact - u[s]);
    ++count[e];
  }
  for (std::size_t e = 0; e < sum.size(); ++e) sum[e] = count[e] ? sum[e] / static_cast<double>(count[e]) : NAN;
  return sum;
}

TrainedSystem train(const MetricGraph& g, const TrainingData& data, const NetworkSpec& spec, const TrainerConfig& cfg,
                    const StepObserver& observer) {
  validate(cfg);
  if (spec.dims.empty() || spec.dims.front() != input_arity(data.problem.kind))
    throw ConfigError("network.dims", "first layer width must equal the problem's input arity (" +
                                  std::to_string(input_arity(data.problem.kind)) + ")");

  TrainState state = init_state(init_networks(g, spec, cfg.seed), cfg);
  JetRecorder rec;
  double initial_global = 0.0;

  auto add_row = [&](int iter, const LossReport& r, bool with_val) {
    HistoryRow row{iter, r.edge_total, r.node_total, r.lambda, r.global, std::nullopt};
    if (with_val) row.val_err = validation_error(state.nets, data.validation);
    state.history.push_back(row);
  };

  for (int q = 0; q < cfg.iterations; ++q) {
    const bool report = q % cfg.report_every == 0;
    const bool val = report && cfg.validate_every > 0 && q % cfg.validate_every == 0;
    // Validation must see the pre-update weights, matching the loss columns.
    std::optional<double> val_err;
    if (val) val_err = validation_error(state.nets, data.validation);

    const LossReport r = bdmm_step(state, g, data, cfg, rec);
    if (q == 0) initial_global = r.global;
    else if (initial_global > 0.0 && r.global > cfg.divergence_factor * initial_global)
      throw DivergenceError("global loss " + fmt(r.global) + " exceeds " + fmt(cfg.divergence_factor) +
                            " times its initial value at iteration " + std::to_string(q));

    if (report) state.history.push_back({q, r.edge_total, r.node_total, r.lambda, r.global, val_err});
    if (observer) observer(q, r, state.lambda);
  }

  const LossReport last = evaluate_loss(state, g, data, cfg);
  check_finite(last);
  add_row(cfg.iterations, last, true);

  TrainedSystem out{g, data.problem, std::move(state.nets), state.lambda, *state.history.back().val_err, {}, {}};
  out.edge_errors = edge_validation_errors(out.nets, data.validation);
  out.history = std::move(state.history);
  return out;
}

void write_history_csv(std::ostream& out, std::span<const HistoryRow> rows) {
  out << "iter,edge_total,node_total,lambda,global,val_err\n";
  for (const auto& r : rows) {
    out << r.iter << ',' << fmt(r.edge_total) << ',' << fmt(r.node_total) << ',' << fmt(r.lambda) << ','
        << fmt(r.global) << ',';
    if (r.val_err) out << fmt(*r.val_err);
    out << '\n';
  }
}

}  // namespace graphpinn
