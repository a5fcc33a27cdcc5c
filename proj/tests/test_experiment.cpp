#include <catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "graphpinn/error.hpp"
#include "graphpinn/experiment.hpp"

using namespace graphpinn;
namespace fs = std::filesystem;

namespace {

std::string fixture(const std::string& name) { return std::string(GRAPHPINN_FIXTURES) + "/" + name + ".graph"; }

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

std::size_t lines(const std::string& s) {
  std::size_t n = 0;
  for (char c : s) n += c == '\n';
  return n;
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("graphpinn_test_" + name);
  fs::remove_all(p);
  return p;
}

std::string key_of(const std::string& json) {
  try {
    parse_config(json);
  } catch (const ConfigError& e) {
    return e.key();
  }
  return "<none>";
}

ExperimentConfig tiny(ProblemKind k, const std::string& graph) {
  ExperimentConfig c = preset_config(k);
  c.graph_path = fixture(graph);
  c.samples = {40, 4, 20, 4};
  c.network.dims = {input_arity(k), 6, 1};
  c.trainer.iterations = 12;
  c.trainer.report_every = 4;
  c.trainer.validate_every = 8;
  return c;
}

}  // namespace

TEST_CASE("presets carry the documented defaults") {
  const ExperimentConfig e = preset_config(ProblemKind::Elliptic);
  CHECK(e.samples.n_space_train == 2000);
  CHECK(e.network.dims == std::vector<int>{1, 25, 25, 1});
  CHECK(e.network.activation == Activation::SinSq);
  CHECK(e.trainer.iterations == 20000);
  const ExperimentConfig p = preset_config(ProblemKind::Parabolic);
  CHECK(p.samples.n_space_train == 100);
  CHECK(p.samples.n_time_train == 20);
  CHECK(p.network.dims == std::vector<int>{2, 50, 50, 1});
  CHECK(p.problem.horizon == 1.0);
}

TEST_CASE("config overrides and preset selection") {
  const ExperimentConfig c = parse_config(R"({"preset": "hyperbolic", "trainer": {"seed": 9, "iterations": 7},
                                              "network": {"activation": "relu"}, "output": "x"})");
  CHECK(c.problem.kind == ProblemKind::Hyperbolic);
  CHECK(c.trainer.seed == 9);
  CHECK(c.trainer.iterations == 7);
  CHECK(c.trainer.lr_w == 1e-3);
  CHECK(c.network.activation == Activation::Relu);
  CHECK(c.network.dims == std::vector<int>{2, 50, 50, 1});
  CHECK(c.output_dir == "x");

  CHECK(parse_config("{}", "parabolic").problem.kind == ProblemKind::Parabolic);
  CHECK(parse_config(R"({"preset": "hyperbolic"})", "parabolic").problem.kind == ProblemKind::Parabolic);
  CHECK(parse_config(R"({"problem": {"kind": "parabolic"}})").samples.n_space_train == 100);
  CHECK(parse_config(R"({"trainer": {"node_count_mode": "per_edge"}})").trainer.node_count_mode ==
        NodeCountMode::PerEdge);
}

TEST_CASE("config errors name the offending key") {
  CHECK(key_of(R"({"trainer": {"lr_w": "fast"}})") == "trainer.lr_w");
  CHECK(key_of(R"({"trainer": {"lr_w": -1}})") == "trainer.lr_w");
  CHECK(key_of(R"({"trainer": {"learning_rate": 1}})") == "trainer.learning_rate");
  CHECK(key_of(R"({"colour": 1})") == "colour");
  CHECK(key_of(R"({"network": {"dims": [2, 25, 1]}})") == "network.dims");
  CHECK(key_of(R"({"network": {"dims": [1, 25, 3]}})") == "network.dims");
  CHECK(key_of(R"({"network": {"activation": "tanh"}})") == "network.activation");
  CHECK(key_of(R"({"samples": {"n_space_train": 0}})") == "samples");
  CHECK(key_of(R"({"samples": 5})") == "samples");
  CHECK(key_of(R"({"problem": {"kind": "wave"}})") == "problem.kind");
  CHECK(key_of(R"({"preset": "wave"})") == "preset");
  CHECK(key_of(R"({"trainer": {"iterations": 1.5}})") == "trainer.iterations");
  CHECK(key_of(R"({"trainer": {"seed": -3}})") == "trainer.seed");
  CHECK(key_of(R"({"trainer": {"node_count_mode": "twice"}})") == "trainer.node_count_mode");
  CHECK(key_of(R"({"trainer": )") == "config");
  CHECK(key_of("[1, 2]") == "config");
}

TEST_CASE("config json echo round-trips") {
  ExperimentConfig c = parse_config(R"({"preset": "parabolic", "trainer": {"seed": 5, "lr_lambda": 250.5}})");
  const ExperimentConfig back = parse_config(config_to_json(c));
  CHECK(config_to_json(back) == config_to_json(c));
  CHECK(back.trainer.lr_lambda == 250.5);
}

TEST_CASE("relative graph paths resolve against the config file") {
  const fs::path dir = scratch("cfgdir");
  fs::create_directories(dir / "sub");
  fs::copy_file(fixture("star3"), dir / "sub" / "g.graph");
  std::ofstream(dir / "c.json") << R"({"graph": "sub/g.graph"})";
  const ExperimentConfig c = load_config_file((dir / "c.json").string());
  CHECK(load_config_graph(c).num_edges() == 3);
  CHECK_THROWS_AS(load_config_file((dir / "missing.json").string()), ConfigError);
}

TEST_CASE("unloadable graphs are config errors on the graph key") {
  const fs::path dir = scratch("emptygraph");
  fs::create_directories(dir);
  std::ofstream(dir / "empty.graph").flush();
  ExperimentConfig c = preset_config(ProblemKind::Elliptic);
  c.graph_path = (dir / "empty.graph").string();
  try {
    load_config_graph(c);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(e.key() == "graph");
  }
  c.graph_path.clear();
  CHECK(load_config_graph(c).num_edges() == 1);
}

TEST_CASE("run writes every artifact and reproduces byte for byte") {
  const ExperimentConfig cfg = tiny(ProblemKind::Elliptic, "star3");
  const fs::path a = scratch("run_a"), b = scratch("run_b");
  const RunSummary s = run_experiment(cfg, a.string());
  run_experiment(cfg, b.string());
  for (const char* f : {"history.csv", "checkpoint.txt", "pred_edge_0.csv", "pred_edge_2.csv", "summary.json"})
    CHECK(fs::exists(a / f));
  CHECK(slurp(a / "history.csv") == slurp(b / "history.csv"));
  CHECK(slurp(a / "checkpoint.txt") == slurp(b / "checkpoint.txt"));

  const std::string pred = slurp(a / "pred_edge_1.csv");
  CHECK(pred.rfind("edge,x,u_exact,u_pred\n", 0) == 0);
  CHECK(lines(pred) == 20u);  // 19 interior validation points + header

  const Checkpoint ck = read_checkpoint_file((a / "checkpoint.txt").string());
  CHECK(ck.nets.size() == 3);
  CHECK(ck.lambda == s.lambda);
  CHECK(checkpoint_validation_error(ck) == s.validation_error);
  CHECK(s.edge_errors.size() == 3);

  const std::string summary = slurp(a / "summary.json");
  for (const char* k : {"\"config\"", "\"final_lambda\"", "\"validation_error\"", "\"wall_seconds\"", "\"edge_errors\""})
    CHECK(summary.find(k) != std::string::npos);
}

TEST_CASE("time-dependent predictions carry a t column") {
  const ExperimentConfig cfg = tiny(ProblemKind::Hyperbolic, "single_edge");
  const fs::path dir = scratch("run_hyp");
  run_experiment(cfg, dir.string());
  const std::string pred = slurp(dir / "pred_edge_0.csv");
  CHECK(pred.rfind("edge,x,t,u_exact,u_pred\n", 0) == 0);
  CHECK(lines(pred) == 19u * 4u + 1u);
}

TEST_CASE("zero-iteration run leaves an O(1) error") {
  ExperimentConfig cfg = tiny(ProblemKind::Elliptic, "single_edge");
  cfg.trainer.iterations = 0;
  const RunSummary s = run_experiment(cfg, scratch("run_zero").string());
  CHECK(s.validation_error > 0.1);
  CHECK(s.validation_error < 10.0);
}

TEST_CASE("checkpoint round trip and malformed input") {
  const ExperimentConfig cfg = tiny(ProblemKind::Parabolic, "lasso");
  const fs::path dir = scratch("ck");
  run_experiment(cfg, dir.string());
  const Checkpoint a = read_checkpoint_file((dir / "checkpoint.txt").string());
  std::stringstream again;
  write_checkpoint(again, a);
  CHECK(again.str() == slurp(dir / "checkpoint.txt"));
  CHECK(a.graph == load_graph_file(fixture("lasso")));
  CHECK(a.problem.kind == ProblemKind::Parabolic);

  std::istringstream bad("graphpinn-checkpoint 2\n");
  CHECK_THROWS_AS(read_checkpoint(bad), ParseError);
  std::string text = slurp(dir / "checkpoint.txt");
  std::istringstream cut(text.substr(0, text.size() / 2));
  CHECK_THROWS(read_checkpoint(cut));
  CHECK_THROWS(read_checkpoint_file((dir / "nope.txt").string()));
}

TEST_CASE("dataset dump row counts") {
  ExperimentConfig cfg = preset_config(ProblemKind::Elliptic);
  const fs::path e = scratch("dump_e");
  dump_dataset(cfg, e.string());
  CHECK(lines(slurp(e / "collocation.csv")) == 2000u);
  CHECK_FALSE(fs::exists(e / "initial.csv"));

  cfg = preset_config(ProblemKind::Parabolic);
  const fs::path p = scratch("dump_p");
  dump_dataset(cfg, p.string());
  CHECK(lines(slurp(p / "initial.csv")) == 102u);
  CHECK(lines(slurp(p / "collocation.csv")) == 99u * 19u + 1u);
}

TEST_CASE("sweep table shape and failed cells") {
  ExperimentConfig cfg = tiny(ProblemKind::Elliptic, "single_edge");
  cfg.trainer.iterations = 0;
  cfg.samples.n_space_train = 1;  // too coarse for the unit edge only
  std::vector<std::string> log;
  const fs::path dir = scratch("sweep");
  const SweepTable t = sweep_activations(cfg, dir.string(), 2, [&](const std::string& l) { log.push_back(l); });
  for (int c = 0; c < 4; ++c) {
    CHECK(std::isnan(t.errors[0][c]));
    CHECK(t.errors[1][c] > 0.1);
    CHECK(t.errors[2][c] < 100.0);
  }
  CHECK(log.size() == 12);
  int failures = 0;
  for (const auto& l : log) failures += l.find("failed") != std::string::npos;
  CHECK(failures == 4);
  const std::string csv = slurp(dir / "sweep.csv");
  CHECK(csv.rfind("length,relu,sigmoid,sin2,sin2_plus_x\n", 0) == 0);
  CHECK(lines(csv) == 4u);
  CHECK(csv.find("\n1,nan,nan,nan,nan\n") != std::string::npos);

  ExperimentConfig star = tiny(ProblemKind::Elliptic, "star3");
  CHECK_THROWS_AS(sweep_activations(star, dir.string()), ConfigError);
}
