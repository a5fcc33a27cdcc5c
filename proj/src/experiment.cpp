#include "graphpinn/experiment.hpp"

#include <json.hpp>

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>
#include <type_traits>

#include "graphpinn/error.hpp"

namespace graphpinn {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kSingleEdge = "nodes 2\nedges\n  0, 0, 1, 1\n";

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string hex(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%a", v);
  return buf;
}

std::string kind_name(const json& j) {
  switch (j.type()) {
    case json::value_t::object: return "an object";
    case json::value_t::array: return "an array";
    case json::value_t::string: return "a string";
    case json::value_t::boolean: return "a boolean";
    case json::value_t::null: return "null";
    default: return "a number";
  }
}

// Reads one JSON object, remembering which keys were consumed.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_.empty() ? "config" : path_, "expected an object, got " + kind_name(j_));
  }

  std::string key(const std::string& name) const { return path_.empty() ? name : path_ + "." + name; }

  const json* find(const std::string& name) {
    seen_.insert(name);
    auto it = j_.find(name);
    return it == j_.end() ? nullptr : &*it;
  }

  void number(const std::string& name, double& out) {
    if (const json* v = find(name)) {
      if (!v->is_number()) throw ConfigError(key(name), "expected a number, got " + kind_name(*v));
      out = v->get<double>();
    }
  }

  template <class Int>
  void integer(const std::string& name, Int& out) {
    if (const json* v = find(name)) {
      if (!v->is_number_integer()) throw ConfigError(key(name), "expected an integer, got " + kind_name(*v));
      if constexpr (std::is_unsigned_v<Int>) {
        if (v->is_number_unsigned() || v->get<long long>() >= 0) out = v->get<Int>();
        else throw ConfigError(key(name), "must be non-negative");
      } else {
        const long long x = v->get<long long>();
        if (x < std::numeric_limits<Int>::min() || x > std::numeric_limits<Int>::max())
          throw ConfigError(key(name), "out of range");
        out = static_cast<Int>(x);
      }
    }
  }

  bool string(const std::string& name, std::string& out) {
    if (const json* v = find(name)) {
      if (!v->is_string()) throw ConfigError(key(name), "expected a string, got " + kind_name(*v));
      out = v->get<std::string>();
      return true;
    }
    return false;
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!seen_.count(it.key())) throw ConfigError(key(it.key()), "unknown key");
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

template <class F>
auto as_config_error(const std::string& key, F&& f) {
  try {
    return f();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(key, e.what());
  }
}

void parse_network(Section s, NetworkSpec& net) {
  std::string act;
  if (s.string("activation", act)) net.activation = as_config_error(s.key("activation"), [&] { return parse_activation(act); });
  if (const json* d = s.find("dims")) {
    if (!d->is_array()) throw ConfigError(s.key("dims"), "expected an array of layer widths");
    net.dims.clear();
    for (const json& w : *d) {
      if (!w.is_number_integer() || w.get<long long>() <= 0 || w.get<long long>() > 100000)
        throw ConfigError(s.key("dims"), "layer widths must be positive integers");
      net.dims.push_back(w.get<int>());
    }
  }
  s.finish();
}

void parse_samples(Section s, SampleCounts& c) {
  s.integer("n_space_train", c.n_space_train);
  s.integer("n_time_train", c.n_time_train);
  s.integer("n_space_validate", c.n_space_validate);
  s.integer("n_time_validate", c.n_time_validate);
  s.finish();
}

void parse_trainer(Section s, TrainerConfig& t) {
  s.number("lr_w", t.lr_w);
  s.number("lr_lambda", t.lr_lambda);
  s.number("lambda0", t.lambda0);
  s.integer("iterations", t.iterations);
  s.number("adam_beta1", t.adam_beta1);
  s.number("adam_beta2", t.adam_beta2);
  s.number("adam_eps", t.adam_eps);
  s.integer("seed", t.seed);
  s.integer("report_every", t.report_every);
  s.integer("validate_every", t.validate_every);
  s.number("divergence_factor", t.divergence_factor);
  std::string mode;
  if (s.string("node_count_mode", mode)) {
    if (mode == "once") t.node_count_mode = NodeCountMode::Once;
    else if (mode == "per_edge") t.node_count_mode = NodeCountMode::PerEdge;
    else throw ConfigError(s.key("node_count_mode"), "expected 'once' or 'per_edge', got '" + mode + "'");
  }
  s.finish();
}

std::string_view mode_name(NodeCountMode m) { return m == NodeCountMode::Once ? "once" : "per_edge"; }

json config_json(const ExperimentConfig& c) {
  const TrainerConfig& t = c.trainer;
  return json{
      {"graph", c.graph_path},
      {"problem", {{"kind", to_string(c.problem.kind)}, {"horizon", c.problem.horizon}}},
      {"network", {{"activation", to_string(c.network.activation)}, {"dims", c.network.dims}}},
      {"samples",
       {{"n_space_train", c.samples.n_space_train},
        {"n_time_train", c.samples.n_time_train},
        {"n_space_validate", c.samples.n_space_validate},
        {"n_time_validate", c.samples.n_time_validate}}},
      {"trainer",
       {{"lr_w", t.lr_w},
        {"lr_lambda", t.lr_lambda},
        {"lambda0", t.lambda0},
        {"iterations", t.iterations},
        {"adam_beta1", t.adam_beta1},
        {"adam_beta2", t.adam_beta2},
        {"adam_eps", t.adam_eps},
        {"seed", t.seed},
        {"report_every", t.report_every},
        {"validate_every", t.validate_every},
        {"divergence_factor", t.divergence_factor},
        {"node_count_mode", mode_name(t.node_count_mode)}}},
      {"output", c.output_dir},
  };
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + p.string() + "'");
  out << text;
  if (!out) throw std::runtime_error("write failed for '" + p.string() + "'");
}

template <class F>
void write_with(const fs::path& p, F&& f) {
  std::ostringstream s;
  f(s);
  write_file(p, s.str());
}

void make_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create output directory '" + dir + "': " + ec.message());
}

std::string next_line(std::istream& in, const char* what) {
  std::string line;
  while (std::getline(in, line))
    if (!line.empty() && line.find_first_not_of(" \t\r") != std::string::npos) return line;
  throw ParseError(std::string("checkpoint ended before ") + what);
}

std::string expect(std::istream& in, const std::string& key) {
  std::string line = next_line(in, key.c_str());
  if (line.compare(0, key.size(), key) != 0 || (line.size() > key.size() && line[key.size()] != ' '))
    throw ParseError("checkpoint: expected '" + key + "', got '" + line + "'");
  return line.size() > key.size() ? line.substr(key.size() + 1) : std::string();
}

double parse_real(const std::string& s, const char* what) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0') throw ParseError(std::string("checkpoint: bad ") + what + " '" + s + "'");
  return v;
}

}  // namespace

ExperimentConfig preset_config(ProblemKind kind) {
  ExperimentConfig c;
  c.problem = {kind, 1.0};
  c.network = default_network_spec(kind);
  c.samples = default_sample_counts(kind);
  c.trainer = default_trainer_config(kind);
  c.output_dir = "runs/" + std::string(to_string(kind));
  return c;
}

ExperimentConfig parse_config(std::string_view text, std::string_view preset_override, const std::string& base_dir) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("config", std::string("malformed JSON: ") + e.what());
  }
  Section top(root, "");

  std::string preset(preset_override.empty() ? "elliptic" : preset_override);
  if (top.string("preset", preset) && !preset_override.empty()) preset = std::string(preset_override);
  ExperimentConfig cfg =
      preset_config(as_config_error("preset", [&] { return parse_problem_kind(preset); }));

  if (const json* p = top.find("problem")) {
    Section s(*p, "problem");
    std::string kind;
    if (s.string("kind", kind)) {
      const ProblemKind k = as_config_error("problem.kind", [&] { return parse_problem_kind(kind); });
      if (k != cfg.problem.kind) {
        // A kind that differs from the preset pulls in that kind's defaults.
        cfg = preset_config(k);
      }
    }
    s.number("horizon", cfg.problem.horizon);
    s.finish();
  }
  if (const json* p = top.find("network")) parse_network(Section(*p, "network"), cfg.network);
  if (const json* p = top.find("samples")) parse_samples(Section(*p, "samples"), cfg.samples);
  if (const json* p = top.find("trainer")) parse_trainer(Section(*p, "trainer"), cfg.trainer);
  if (top.string("graph", cfg.graph_path) && !cfg.graph_path.empty()) {
    fs::path g(cfg.graph_path);
    if (g.is_relative() && !base_dir.empty()) cfg.graph_path = (fs::path(base_dir) / g).lexically_normal().string();
  }
  top.string("output", cfg.output_dir);
  top.finish();
  check_config(cfg);
  return cfg;
}

ExperimentConfig load_config_file(const std::string& path, std::string_view preset_override) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config", "cannot open '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), preset_override, fs::path(path).parent_path().string());
}

std::string config_to_json(const ExperimentConfig& cfg) { return config_json(cfg).dump(2) + "\n"; }

void check_config(const ExperimentConfig& c) {
  if (is_time_dependent(c.problem.kind) && !(c.problem.horizon > 0.0))
    throw ConfigError("problem.horizon", "must be positive");
  const auto& d = c.network.dims;
  if (d.size() < 2) throw ConfigError("network.dims", "needs at least an input and an output width");
  if (d.front() != input_arity(c.problem.kind))
    throw ConfigError("network.dims", "first width must be " + std::to_string(input_arity(c.problem.kind)) + " for " +
                                          std::string(to_string(c.problem.kind)) + " problems");
  if (d.back() != 1) throw ConfigError("network.dims", "last width must be 1");
  as_config_error("samples", [&] {
    validate_counts(c.samples, c.problem);
    return 0;
  });
  validate(c.trainer);
  if (c.output_dir.empty()) throw ConfigError("output", "must not be empty");
}

MetricGraph load_config_graph(const ExperimentConfig& cfg) {
  return as_config_error("graph", [&] {
    return cfg.graph_path.empty() ? load_graph(kSingleEdge) : load_graph_file(cfg.graph_path);
  });
}

RunSummary run_experiment(const ExperimentConfig& cfg, const std::string& out_dir, const LogSink& log) {
  check_config(cfg);
  const MetricGraph g = load_config_graph(cfg);
  const TrainingData data = as_config_error("samples", [&] { return prepare_training_data(g, cfg.problem, cfg.samples); });
  make_dir(out_dir);

  const auto t0 = std::chrono::steady_clock::now();
  const int every = std::max(cfg.trainer.validate_every, cfg.trainer.report_every);
  TrainedSystem sys = train(g, data, cfg.network, cfg.trainer, [&](int q, const LossReport& r, double lambda) {
    if (log && q % every == 0)
      log("iter " + std::to_string(q) + " edge " + fmt(r.edge_total) + " node " + fmt(r.node_total) + " lambda " +
          fmt(lambda));
  });
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  RunSummary s;
  s.validation_error = sys.validation_error;
  s.lambda = sys.lambda;
  s.wall_seconds = seconds;
  s.edge_errors = sys.edge_errors;
  s.collocation_points = data.set.collocation.size();
  s.validation_points = data.validation.size();

  const fs::path dir(out_dir);
  write_with(dir / "history.csv", [&](std::ostream& o) { write_history_csv(o, sys.history); });
  write_with(dir / "checkpoint.txt", [&](std::ostream& o) {
    write_checkpoint(o, {g, cfg.problem, cfg.samples, sys.lambda, sys.nets});
  });

  const bool timed = is_time_dependent(cfg.problem.kind);
  const std::vector<double> pred = predict(sys.nets, data.validation);
  std::vector<std::ostringstream> files(static_cast<std::size_t>(g.num_edges()));
  for (auto& f : files) f << (timed ? "edge,x,t,u_exact,u_pred\n" : "edge,x,u_exact,u_pred\n");
  for (std::size_t k = 0; k < data.validation.size(); ++k) {
    const ValidationSample& v = data.validation[k];
    auto& f = files[static_cast<std::size_t>(v.edge)];
    f << v.edge << ',' << fmt(v.x) << ',';
    if (timed) f << fmt(v.t) << ',';
    f << fmt(v.u_exact) << ',' << fmt(pred[k]) << '\n';
  }
  for (std::size_t j = 0; j < files.size(); ++j)
    write_file(dir / ("pred_edge_" + std::to_string(j) + ".csv"), files[j].str());

  json summary{{"config", config_json(cfg)},
               {"final_lambda", s.lambda},
               {"validation_error", s.validation_error},
               {"wall_seconds", s.wall_seconds},
               {"edge_errors", s.edge_errors},
               {"collocation_points", s.collocation_points},
               {"initial_points", data.set.initial.size()},
               {"validation_points", s.validation_points},
               {"num_edges", g.num_edges()}};
  write_file(dir / "summary.json", summary.dump(2) + "\n");
  if (log) log("done: validation error " + fmt(s.validation_error) + ", lambda " + fmt(s.lambda));
  return s;
}

SweepTable sweep_activations(const ExperimentConfig& base, const std::string& out_dir, int jobs, const LogSink& log) {
  check_config(base);
  const MetricGraph g0 = load_config_graph(base);
  if (g0.num_edges() != 1) throw ConfigError("graph", "the activation sweep needs a single-edge graph");
  if (jobs < 1) throw ConfigError("jobs", "must be at least 1");
  make_dir(out_dir);

  struct Cell {
    std::size_t row, col;
  };
  std::vector<Cell> cells;
  for (std::size_t r = 0; r < kSweepLengths.size(); ++r)
    for (std::size_t c = 0; c < kSweepActivations.size(); ++c) cells.push_back({r, c});

  SweepTable table;
  std::mutex log_mu;
  auto say = [&](const std::string& line) {
    if (!log) return;
    std::lock_guard lock(log_mu);
    log(line);
  };
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k; (k = next++) < cells.size();) {
      const Cell cell = cells[k];
      const double length = kSweepLengths[cell.row];
      const Activation act = kSweepActivations[cell.col];
      const std::string name = "l" + std::to_string(static_cast<int>(length)) + "_" + std::string(to_string(act));
      const fs::path dir = fs::path(out_dir) / name;
      double err = NAN;
      try {
        make_dir(dir.string());
        Edge e = g0.edges().front();
        e.length = length;
        const MetricGraph g(g0.num_nodes(), {e}, g0.names());
        write_file(dir / "graph.txt", g.serialize());
        ExperimentConfig cfg = base;
        cfg.graph_path = (dir / "graph.txt").string();
        cfg.network.activation = act;
        cfg.output_dir = dir.string();
        err = run_experiment(cfg, dir.string()).validation_error;
        say("sweep " + name + ": validation error " + fmt(err));
      } catch (const std::exception& ex) {
        say("sweep " + name + " failed: " + ex.what());
      }
      table.errors[cell.row][cell.col] = err;
    }
  };
  const int n = std::min<int>(jobs, static_cast<int>(cells.size()));
  if (n == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < n; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  write_with(fs::path(out_dir) / "sweep.csv", [&](std::ostream& o) { write_sweep_csv(o, table); });
  return table;
}

void write_sweep_csv(std::ostream& out, const SweepTable& t) {
  out << "length";
  for (Activation a : kSweepActivations) out << ',' << to_string(a);
  out << '\n';
  for (std::size_t r = 0; r < kSweepLengths.size(); ++r) {
    out << fmt(kSweepLengths[r]);
    for (double e : t.errors[r]) out << ',' << (std::isnan(e) ? std::string("nan") : fmt(e));
    out << '\n';
  }
}

void dump_dataset(const ExperimentConfig& cfg, const std::string& out_dir) {
  check_config(cfg);
  const MetricGraph g = load_config_graph(cfg);
  TrainingSet set;
  std::vector<ValidationSample> val;
  as_config_error("samples", [&] {
    set = build_training_set(g, cfg.problem, cfg.samples);
    val = build_validation_set(g, cfg.problem, cfg.samples);
    return 0;
  });
  make_dir(out_dir);
  const fs::path dir(out_dir);
  write_with(dir / "collocation.csv", [&](std::ostream& o) { write_collocation_csv(o, set); });
  write_with(dir / "boundary.csv", [&](std::ostream& o) { write_boundary_csv(o, set); });
  write_with(dir / "validation.csv", [&](std::ostream& o) { write_validation_csv(o, val); });
  if (is_time_dependent(cfg.problem.kind))
    write_with(dir / "initial.csv", [&](std::ostream& o) { write_initial_csv(o, set); });
}

void write_checkpoint(std::ostream& out, const Checkpoint& c) {
  out << "graphpinn-checkpoint 1\n";
  out << "kind " << to_string(c.problem.kind) << "\n";
  out << "horizon " << hex(c.problem.horizon) << "\n";
  out << "validate " << c.samples.n_space_validate << ' ' << c.samples.n_time_validate << "\n";
  out << "lambda " << hex(c.lambda) << "\n";
  out << "graph\n" << c.graph.serialize() << "end-graph\n";
  out << "networks " << c.nets.size() << "\n";
  for (const Mlp& m : c.nets) write_mlp(out, m);
}

Checkpoint read_checkpoint(std::istream& in) {
  if (expect(in, "graphpinn-checkpoint") != "1") throw ParseError("unsupported checkpoint version");
  const ProblemKind kind = parse_problem_kind(expect(in, "kind"));
  const double horizon = parse_real(expect(in, "horizon"), "horizon");
  SampleCounts counts = default_sample_counts(kind);
  {
    std::istringstream v(expect(in, "validate"));
    if (!(v >> counts.n_space_validate >> counts.n_time_validate)) throw ParseError("checkpoint: bad 'validate' line");
  }
  const double lambda = parse_real(expect(in, "lambda"), "lambda");
  expect(in, "graph");
  std::string text;
  for (std::string line;;) {
    line = next_line(in, "end-graph");
    if (line == "end-graph") break;
    text += line + "\n";
  }
  MetricGraph g = load_graph(text);
  const std::string count = expect(in, "networks");
  char* end = nullptr;
  const unsigned long n = std::strtoul(count.c_str(), &end, 10);
  if (end == count.c_str() || *end != '\0') throw ParseError("checkpoint: bad network count");
  if (n != static_cast<unsigned long>(g.num_edges()))
    throw ValidationError("checkpoint holds " + count + " networks for " + std::to_string(g.num_edges()) + " edges");
  std::vector<Mlp> nets;
  for (unsigned long k = 0; k < n; ++k) {
    nets.push_back(read_mlp(in));
    if (nets.back().input_arity() != input_arity(kind))
      throw ValidationError("checkpoint network " + std::to_string(k) + " has the wrong input width");
  }
  return {std::move(g), {kind, horizon}, counts, lambda, std::move(nets)};
}

Checkpoint read_checkpoint_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open checkpoint '" + path + "'");
  return read_checkpoint(in);
}

double checkpoint_validation_error(const Checkpoint& c) {
  const auto val = build_validation_set(c.graph, c.problem, c.samples);
  return validation_error(c.nets, val);
}

}  // namespace graphpinn
