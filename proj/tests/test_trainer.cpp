#include <catch_amalgamated.hpp>

#include <cmath>
#include <limits>
#include <sstream>
#include <string>

#include "graphpinn/error.hpp"
#include "graphpinn/trainer.hpp"

using namespace graphpinn;
using Catch::Approx;

namespace {

MetricGraph unit_edge() { return MetricGraph(2, {{0, 0, 1, 1.0}}); }

MetricGraph star3() { return MetricGraph(4, {{0, 0, 1, 1.0}, {1, 0, 2, 1.0}, {2, 0, 3, 1.0}}); }

Mlp zero_net(std::vector<int> dims) {
  return Mlp(dims, Activation::SinSq, 0, std::vector<double>(parameter_count(dims), 0.0));
}

TrainingData small_data(const MetricGraph& g, ProblemKind k, int n_space = 50) {
  SampleCounts c{n_space, 5, 50, 5};
  return prepare_training_data(g, {k, 1.0}, c);
}

TrainerConfig quick(int iterations) {
  TrainerConfig c;
  c.iterations = iterations;
  c.report_every = 5;
  c.validate_every = 10;
  return c;
}

}  // namespace

TEST_CASE("default trainer settings") {
  const TrainerConfig e = default_trainer_config(ProblemKind::Elliptic);
  CHECK(e.lr_w == 1e-3);
  CHECK(e.lr_lambda == 1000.0);
  CHECK(e.lambda0 == 1.0);
  CHECK(e.iterations == 20000);
  CHECK(e.adam_beta1 == 0.9);
  CHECK(e.adam_beta2 == 0.999);
  CHECK(e.adam_eps == 1e-8);
  CHECK(e.report_every == 100);
  CHECK(default_trainer_config(ProblemKind::Parabolic).iterations == 40000);
  CHECK(default_network_spec(ProblemKind::Elliptic).dims == std::vector<int>{1, 25, 25, 1});
  CHECK(default_network_spec(ProblemKind::Hyperbolic).dims == std::vector<int>{2, 50, 50, 1});
}

TEST_CASE("trainer config validation names the key") {
  TrainerConfig c;
  c.adam_beta1 = 1.0;
  try {
    validate(c);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(e.key() == "trainer.adam_beta1");
  }
  c = TrainerConfig{};
  c.lr_lambda = 0.0;
  CHECK_THROWS_AS(validate(c), ConfigError);
}

TEST_CASE("lambda ascent uses the pre-update node total") {
  const MetricGraph g = star3();
  const TrainingData d = small_data(g, ProblemKind::Elliptic);
  TrainerConfig cfg = quick(1);
  TrainState s = init_state(init_networks(g, {{1, 6, 1}, Activation::SinSq}, 4), cfg);
  JetRecorder rec;
  for (int q = 0; q < 5; ++q) {
    const double before = s.lambda;
    const LossReport r = bdmm_step(s, g, d, cfg, rec);
    CHECK(r.lambda == before);
    CHECK(s.lambda == before + cfg.lr_lambda * r.node_total);
    CHECK(s.iteration == q + 1);
  }
}

TEST_CASE("lambda arithmetic example") {
  // lambda=1, lr=1000, node_total=0.05 -> 51
  CHECK(1.0 + 1000.0 * 0.05 == Approx(51.0));
}

TEST_CASE("zero node loss keeps lambda; zero gradient keeps weights") {
  const MetricGraph g = star3();
  TrainingData d = small_data(g, ProblemKind::Elliptic);
  for (auto& e : d.edges)
    for (double& f : e.forcing) f = 0.0;
  TrainerConfig cfg = quick(1);
  std::vector<Mlp> nets(3, zero_net({1, 4, 1}));
  TrainState s = init_state(nets, cfg);
  JetRecorder rec;
  const LossReport r = bdmm_step(s, g, d, cfg, rec);
  CHECK(r.node_total == 0.0);
  CHECK(r.global == 0.0);
  CHECK(s.lambda == cfg.lambda0);
  for (std::size_t j = 0; j < nets.size(); ++j) CHECK(s.nets[j] == nets[j]);
}

TEST_CASE("first Adam step moves each weight by lr * g / (|g| + eps)") {
  const MetricGraph g = unit_edge();
  const TrainingData d = small_data(g, ProblemKind::Elliptic);
  TrainerConfig cfg = quick(1);
  auto nets = init_networks(g, {{1, 5, 5, 1}, Activation::SinSq}, 9);
  const Mlp before = nets[0];

  JetRecorder probe;
  const auto loss = record_global_loss(probe, g, nets, cfg.lambda0, d.edges, d.set.time_grid, d.norm,
                                       ProblemKind::Elliptic);
  const Mlp* ptr[] = {&nets[0]};
  const auto grad = probe.gradients(loss.global, ptr)[0];

  TrainState s = init_state(nets, cfg);
  JetRecorder rec;
  bdmm_step(s, g, d, cfg, rec);
  for (std::size_t k = 0; k < grad.size(); ++k) {
    const double want = before.parameters()[k] - cfg.lr_w * grad[k] / (std::abs(grad[k]) + cfg.adam_eps);
    CHECK(s.nets[0].parameters()[k] == Approx(want).epsilon(1e-12).margin(1e-15));
  }
}

TEST_CASE("a small step decreases the global loss") {
  const MetricGraph g = unit_edge();
  const TrainingData d = prepare_training_data(g, {ProblemKind::Elliptic, 1.0}, SampleCounts{});
  TrainerConfig cfg = quick(1);
  cfg.lr_w = 1e-7;
  TrainState s = init_state(init_networks(g, default_network_spec(ProblemKind::Elliptic), 0), cfg);
  JetRecorder rec;
  const LossReport r = bdmm_step(s, g, d, cfg, rec);
  const auto after = global_loss(g, s.nets, r.lambda, d.edges, d.set.time_grid, d.norm, ProblemKind::Elliptic);
  CHECK(after.global < r.global);
}

TEST_CASE("unconstrained single-edge training reduces the residual tenfold early") {
  const MetricGraph g = unit_edge();
  const TrainingData d = prepare_training_data(g, {ProblemKind::Elliptic, 1.0}, SampleCounts{});
  TrainerConfig cfg = default_trainer_config(ProblemKind::Elliptic);
  cfg.lambda0 = 0.0;
  TrainState s = init_state(init_networks(g, default_network_spec(ProblemKind::Elliptic), 0), cfg);
  JetRecorder rec;
  double first = 0.0, last = 0.0;
  const int steps = cfg.iterations / 5;
  for (int q = 0; q < steps; ++q) {
    s.lambda = 0.0;
    const LossReport r = bdmm_step(s, g, d, cfg, rec);
    if (q == 0) first = r.edge_total;
    last = r.edge_total;
  }
  INFO("first " << first << " last " << last);
  CHECK(last * 10.0 <= first);
}

TEST_CASE("zero iterations return the initial system") {
  const MetricGraph g = unit_edge();
  const TrainingData d = small_data(g, ProblemKind::Hyperbolic);
  TrainerConfig cfg = quick(0);
  cfg.lambda0 = 2.5;
  const NetworkSpec spec{{2, 6, 1}, Activation::Sigmoid};
  const TrainedSystem sys = train(g, d, spec, cfg);
  CHECK(sys.lambda == 2.5);
  REQUIRE(sys.history.size() == 1);
  CHECK(sys.history[0].iter == 0);
  CHECK(sys.history[0].val_err.has_value());
  CHECK(sys.nets == init_networks(g, spec, cfg.seed));
  CHECK(sys.validation_error == validation_error(sys.nets, d.validation));
}

TEST_CASE("training is deterministic for a seed") {
  const MetricGraph g = star3();
  const TrainingData d = small_data(g, ProblemKind::Parabolic);
  const NetworkSpec spec{{2, 6, 6, 1}, Activation::SinSq};
  TrainerConfig cfg = quick(30);
  cfg.seed = 21;
  const TrainedSystem a = train(g, d, spec, cfg);
  const TrainedSystem b = train(g, d, spec, cfg);
  std::ostringstream ha, hb;
  write_history_csv(ha, a.history);
  write_history_csv(hb, b.history);
  CHECK(ha.str() == hb.str());
  CHECK(a.nets == b.nets);
  cfg.seed = 22;
  CHECK_FALSE(train(g, d, spec, cfg).nets == a.nets);
}

TEST_CASE("lambda never decreases during training") {
  const MetricGraph g = star3();
  const TrainingData d = small_data(g, ProblemKind::Elliptic);
  TrainerConfig cfg = quick(60);
  double prev = cfg.lambda0;
  int count = 0;
  train(g, d, {{1, 8, 1}, Activation::SinSq}, cfg, [&](int, const LossReport& r, double after) {
    CHECK(r.lambda == prev);
    CHECK(after >= r.lambda);
    if (r.node_total > 0.0) CHECK(after > r.lambda);
    prev = after;
    ++count;
  });
  CHECK(count == 60);
}

TEST_CASE("history rows and csv layout") {
  const MetricGraph g = unit_edge();
  const TrainingData d = small_data(g, ProblemKind::Elliptic);
  const TrainedSystem sys = train(g, d, {{1, 4, 1}, Activation::SinSq}, quick(20));
  std::vector<int> iters;
  for (const auto& r : sys.history) iters.push_back(r.iter);
  CHECK(iters == std::vector<int>{0, 5, 10, 15, 20});
  CHECK(sys.history[0].val_err.has_value());
  CHECK_FALSE(sys.history[1].val_err.has_value());
  CHECK(sys.history[2].val_err.has_value());
  CHECK(sys.history.back().val_err.has_value());

  std::ostringstream out;
  write_history_csv(out, sys.history);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  CHECK(line == "iter,edge_total,node_total,lambda,global,val_err");
  std::getline(in, line);
  std::getline(in, line);
  CHECK(line.back() == ',');  // blank val_err
  CHECK(line.rfind("5,", 0) == 0);
}

TEST_CASE("validation error examples") {
  const MetricGraph g = unit_edge();
  const auto val = build_validation_set(g, {ProblemKind::Elliptic, 1.0}, SampleCounts{});
  std::vector<Mlp> zero{zero_net({1, 3, 1})};
  // mean of 1 - cos(2 pi i / 500), i = 1..499, is 500 / 499
  CHECK(validation_error(zero, val) == Approx(500.0 / 499.0).epsilon(1e-12));

  std::vector<ValidationSample> flat{{0, 0.2, 0, 0.0}, {0, 0.7, 0, 0.0}};
  Mlp c = zero_net({1, 3, 1});
  c.parameters()[c.bias_offset(1)] = -0.375;
  std::vector<Mlp> nets{c};
  CHECK(validation_error(nets, flat) == 0.375);
  std::vector<ValidationSample> exact{{0, 0.2, 0, -0.375}, {0, 0.7, 0, -0.375}};
  CHECK(validation_error(nets, exact) == 0.0);
  CHECK_THROWS(validation_error(nets, std::vector<ValidationSample>{}));
}

TEST_CASE("non-finite losses abort with a diagnostic") {
  const MetricGraph g = star3();
  TrainingData d = small_data(g, ProblemKind::Elliptic);
  d.edges[1].forcing[3] = std::numeric_limits<double>::quiet_NaN();
  TrainerConfig cfg = quick(3);
  TrainState s = init_state(init_networks(g, {{1, 4, 1}, Activation::SinSq}, 0), cfg);
  JetRecorder rec;
  try {
    bdmm_step(s, g, d, cfg, rec);
    FAIL("expected DivergenceError");
  } catch (const DivergenceError& e) {
    CHECK(std::string(e.what()).find("edge 1") != std::string::npos);
  }
}

TEST_CASE("runaway loss trips the divergence guard") {
  const MetricGraph g = unit_edge();
  const TrainingData d = small_data(g, ProblemKind::Elliptic);
  TrainerConfig cfg = quick(200);
  cfg.lr_w = 50.0;
  cfg.divergence_factor = 1.5;
  CHECK_THROWS_AS(train(g, d, {{1, 8, 1}, Activation::SinSqPlusX}, cfg), DivergenceError);
}

TEST_CASE("architecture must match the problem") {
  const MetricGraph g = unit_edge();
  const TrainingData d = small_data(g, ProblemKind::Parabolic);
  CHECK_THROWS_AS(train(g, d, {{1, 4, 1}, Activation::SinSq}, quick(1)), ConfigError);
}
