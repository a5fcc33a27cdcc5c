#include "graphpinn/graphpinn.h"

#include <cmath>
#include <exception>
#include <mutex>
#include <new>
#include <string>

#include "graphpinn/error.hpp"
#include "graphpinn/experiment.hpp"

struct gp_config {
  graphpinn::ExperimentConfig cfg;
  std::string json;
};

struct gp_graph {
  graphpinn::MetricGraph g;
};

struct gp_checkpoint {
  graphpinn::Checkpoint c;
};

namespace {

thread_local std::string last_error;
thread_local std::string last_key;

std::mutex log_mu;
gp_log_fn log_fn = nullptr;
void* log_user = nullptr;

void log_line(const std::string& line) {
  std::lock_guard lock(log_mu);
  if (log_fn) log_fn(line.c_str(), log_user);
}

graphpinn::LogSink sink() {
  std::lock_guard lock(log_mu);
  if (!log_fn) return {};
  return log_line;
}

gp_status fail(gp_status s, const std::string& what, const std::string& key = {}) {
  last_error = what;
  last_key = key;
  return s;
}

// Runs f, mapping exceptions to status codes.
template <class F>
gp_status guard(F&& f) {
  last_error.clear();
  last_key.clear();
  try {
    f();
    return GP_OK;
  } catch (const graphpinn::ConfigError& e) {
    return fail(GP_ERR_CONFIG, e.what(), e.key());
  } catch (const graphpinn::ParseError& e) {
    return fail(GP_ERR_PARSE, e.what());
  } catch (const graphpinn::ValidationError& e) {
    return fail(GP_ERR_VALIDATION, e.what());
  } catch (const graphpinn::DivergenceError& e) {
    return fail(GP_ERR_DIVERGENCE, e.what());
  } catch (const std::bad_alloc&) {
    return fail(GP_ERR_INTERNAL, "out of memory");
  } catch (const std::invalid_argument& e) {
    return fail(GP_ERR_ARGUMENT, e.what());
  } catch (const std::domain_error& e) {
    return fail(GP_ERR_ARGUMENT, e.what());
  } catch (const std::runtime_error& e) {
    return fail(GP_ERR_IO, e.what());
  } catch (const std::exception& e) {
    return fail(GP_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(GP_ERR_INTERNAL, "unknown error");
  }
}

#define GP_REQUIRE(cond, msg) \
  if (!(cond)) return fail(GP_ERR_ARGUMENT, msg)

}  // namespace

extern "C" {

const char* gp_version(void) { return "0.1.0"; }

const char* gp_status_name(gp_status s) {
  switch (s) {
    case GP_OK: return "ok";
    case GP_ERR_CONFIG: return "config";
    case GP_ERR_PARSE: return "parse";
    case GP_ERR_VALIDATION: return "validation";
    case GP_ERR_IO: return "io";
    case GP_ERR_DIVERGENCE: return "divergence";
    case GP_ERR_ARGUMENT: return "argument";
    case GP_ERR_INTERNAL: return "internal";
  }
  return "unknown";
}

const char* gp_last_error(void) { return last_error.c_str(); }
const char* gp_last_error_key(void) { return last_key.c_str(); }

void gp_set_log(gp_log_fn fn, void* user) {
  std::lock_guard lock(log_mu);
  log_fn = fn;
  log_user = user;
}

gp_status gp_config_preset(const char* kind, gp_config** out) {
  GP_REQUIRE(kind && out, "null argument");
  *out = nullptr;
  return guard([&] {
    graphpinn::ProblemKind k;
    try {
      k = graphpinn::parse_problem_kind(kind);
    } catch (const std::exception& e) {
      throw graphpinn::ConfigError("preset", e.what());
    }
    *out = new gp_config{graphpinn::preset_config(k), {}};
  });
}

gp_status gp_config_load(const char* path, const char* preset, gp_config** out) {
  GP_REQUIRE(path && out, "null argument");
  *out = nullptr;
  return guard([&] { *out = new gp_config{graphpinn::load_config_file(path, preset ? preset : ""), {}}; });
}

gp_status gp_config_parse(const char* text, const char* preset, gp_config** out) {
  GP_REQUIRE(text && out, "null argument");
  *out = nullptr;
  return guard([&] { *out = new gp_config{graphpinn::parse_config(text, preset ? preset : ""), {}}; });
}

void gp_config_free(gp_config* c) { delete c; }

gp_status gp_config_set_seed(gp_config* c, uint64_t seed) {
  GP_REQUIRE(c, "null config");
  c->cfg.trainer.seed = seed;
  return GP_OK;
}

gp_status gp_config_set_iterations(gp_config* c, int iterations) {
  GP_REQUIRE(c, "null config");
  if (iterations < 0) return fail(GP_ERR_CONFIG, "trainer.iterations: must be non-negative", "trainer.iterations");
  c->cfg.trainer.iterations = iterations;
  return GP_OK;
}

gp_status gp_config_set_output(gp_config* c, const char* dir) {
  GP_REQUIRE(c && dir, "null argument");
  if (!*dir) return fail(GP_ERR_CONFIG, "output: must not be empty", "output");
  c->cfg.output_dir = dir;
  return GP_OK;
}

const char* gp_config_output(const gp_config* c) { return c ? c->cfg.output_dir.c_str() : ""; }

const char* gp_config_json(gp_config* c) {
  if (!c) return "";
  c->json = graphpinn::config_to_json(c->cfg);
  return c->json.c_str();
}

gp_status gp_run(const gp_config* c, const char* out_dir, gp_run_summary* summary) {
  GP_REQUIRE(c, "null config");
  return guard([&] {
    const auto s = graphpinn::run_experiment(c->cfg, out_dir ? out_dir : c->cfg.output_dir, sink());
    if (summary)
      *summary = {s.validation_error, s.lambda, s.wall_seconds, static_cast<int>(s.edge_errors.size())};
  });
}

gp_status gp_sweep_activations(const gp_config* c, const char* out_dir, int jobs, double table[12]) {
  GP_REQUIRE(c, "null config");
  return guard([&] {
    const auto t = graphpinn::sweep_activations(c->cfg, out_dir ? out_dir : c->cfg.output_dir, jobs, sink());
    if (table)
      for (std::size_t r = 0; r < 3; ++r)
        for (std::size_t k = 0; k < 4; ++k) table[r * 4 + k] = t.errors[r][k];
  });
}

gp_status gp_dump_dataset(const gp_config* c, const char* out_dir) {
  GP_REQUIRE(c, "null config");
  return guard([&] { graphpinn::dump_dataset(c->cfg, out_dir ? out_dir : c->cfg.output_dir); });
}

gp_status gp_checkpoint_load(const char* path, gp_checkpoint** out) {
  GP_REQUIRE(path && out, "null argument");
  *out = nullptr;
  return guard([&] { *out = new gp_checkpoint{graphpinn::read_checkpoint_file(path)}; });
}

void gp_checkpoint_free(gp_checkpoint* c) { delete c; }

gp_status gp_checkpoint_validation_error(const gp_checkpoint* c, double* err) {
  GP_REQUIRE(c && err, "null argument");
  return guard([&] { *err = graphpinn::checkpoint_validation_error(c->c); });
}

gp_status gp_checkpoint_lambda(const gp_checkpoint* c, double* lambda) {
  GP_REQUIRE(c && lambda, "null argument");
  *lambda = c->c.lambda;
  return GP_OK;
}

gp_status gp_checkpoint_num_edges(const gp_checkpoint* c, int* n) {
  GP_REQUIRE(c && n, "null argument");
  *n = c->c.graph.num_edges();
  return GP_OK;
}

gp_status gp_graph_parse(const char* text, gp_graph** out) {
  GP_REQUIRE(text && out, "null argument");
  *out = nullptr;
  return guard([&] { *out = new gp_graph{graphpinn::load_graph(text)}; });
}

gp_status gp_graph_load(const char* path, gp_graph** out) {
  GP_REQUIRE(path && out, "null argument");
  *out = nullptr;
  return guard([&] { *out = new gp_graph{graphpinn::load_graph_file(path)}; });
}

void gp_graph_free(gp_graph* g) { delete g; }

int gp_graph_num_nodes(const gp_graph* g) { return g ? g->g.num_nodes() : -1; }
int gp_graph_num_edges(const gp_graph* g) { return g ? g->g.num_edges() : -1; }

int gp_graph_boundary(const gp_graph* g, int* nodes, int cap) {
  if (!g) return -1;
  const auto& b = g->g.boundary();
  for (int k = 0; k < cap && k < static_cast<int>(b.size()); ++k) nodes[k] = b[static_cast<std::size_t>(k)];
  return static_cast<int>(b.size());
}

gp_status gp_graph_degree(const gp_graph* g, int node, int* degree) {
  GP_REQUIRE(g && degree, "null argument");
  if (node < 0 || node >= g->g.num_nodes()) return fail(GP_ERR_ARGUMENT, "unknown node " + std::to_string(node));
  *degree = g->g.degree(node);
  return GP_OK;
}

}  // extern "C"
