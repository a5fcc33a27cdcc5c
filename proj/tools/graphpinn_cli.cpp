// graphpinn command-line front end. Talks to the solver through the C API only.
#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <string>

#include "graphpinn/graphpinn.h"

namespace {

enum Exit { kOk = 0, kFailure = 1, kConfig = 2, kDivergence = 3, kIo = 4 };

int exit_code(gp_status s) {
  switch (s) {
    case GP_OK: return kOk;
    case GP_ERR_CONFIG:
    case GP_ERR_PARSE:
    case GP_ERR_VALIDATION:
    case GP_ERR_ARGUMENT: return kConfig;
    case GP_ERR_DIVERGENCE: return kDivergence;
    case GP_ERR_IO: return kIo;
    default: return kFailure;
  }
}

// One line on stderr: error code=<name> [key=<key>]: <message>
int report(gp_status s) {
  std::string line = std::string("error code=") + gp_status_name(s);
  const std::string key = gp_last_error_key();
  if (!key.empty()) line += " key=" + key;
  std::string msg = gp_last_error();
  for (char& c : msg)
    if (c == '\n' || c == '\r') c = ' ';
  std::fprintf(stderr, "%s: %s\n", line.c_str(), msg.c_str());
  return exit_code(s);
}

void log_to_stderr(const char* line, void*) { std::fprintf(stderr, "%s\n", line); }

struct Options {
  std::string config;
  std::string preset;
  std::string out;
  std::string checkpoint;
  std::uint64_t seed = 0;
  bool has_seed = false;
  int jobs = 1;
};

gp_status load(const Options& o, gp_config** cfg) {
  gp_status s = o.config.empty() ? gp_config_preset(o.preset.empty() ? "elliptic" : o.preset.c_str(), cfg)
                                 : gp_config_load(o.config.c_str(), o.preset.c_str(), cfg);
  if (s != GP_OK) return s;
  if (o.has_seed && (s = gp_config_set_seed(*cfg, o.seed)) != GP_OK) return s;
  // --out beats GRAPHPINN_OUT, which beats the config's own output entry.
  const char* env = std::getenv("GRAPHPINN_OUT");
  if (!o.out.empty()) s = gp_config_set_output(*cfg, o.out.c_str());
  else if (env && *env) s = gp_config_set_output(*cfg, env);
  return s;
}

int cmd_run(const Options& o) {
  gp_config* cfg = nullptr;
  gp_status s = load(o, &cfg);
  if (s != GP_OK) return report(s);
  gp_run_summary sum{};
  s = gp_run(cfg, nullptr, &sum);
  if (s == GP_OK)
    std::printf("validation_error=%.6e final_lambda=%.6g edges=%d seconds=%.1f out=%s\n", sum.validation_error,
                sum.final_lambda, sum.num_edges, sum.wall_seconds, gp_config_output(cfg));
  gp_config_free(cfg);
  return s == GP_OK ? kOk : report(s);
}

int cmd_sweep(const Options& o) {
  gp_config* cfg = nullptr;
  gp_status s = load(o, &cfg);
  if (s != GP_OK) return report(s);
  double table[12];
  s = gp_sweep_activations(cfg, nullptr, o.jobs, table);
  if (s == GP_OK) {
    static const char* lengths[] = {"1", "5", "10"};
    std::printf("length,relu,sigmoid,sin2,sin2_plus_x\n");
    for (int r = 0; r < 3; ++r) {
      std::printf("%s", lengths[r]);
      for (int c = 0; c < 4; ++c) std::printf(",%.4e", table[r * 4 + c]);
      std::printf("\n");
    }
  }
  gp_config_free(cfg);
  return s == GP_OK ? kOk : report(s);
}

int cmd_dump(const Options& o) {
  gp_config* cfg = nullptr;
  gp_status s = load(o, &cfg);
  if (s != GP_OK) return report(s);
  s = gp_dump_dataset(cfg, nullptr);
  if (s == GP_OK) std::printf("dataset written to %s\n", gp_config_output(cfg));
  gp_config_free(cfg);
  return s == GP_OK ? kOk : report(s);
}

int cmd_validate(const Options& o) {
  gp_checkpoint* ck = nullptr;
  gp_status s = gp_checkpoint_load(o.checkpoint.c_str(), &ck);
  if (s != GP_OK) return report(s);
  double err = NAN, lambda = NAN;
  int edges = 0;
  s = gp_checkpoint_validation_error(ck, &err);
  if (s == GP_OK) {
    gp_checkpoint_lambda(ck, &lambda);
    gp_checkpoint_num_edges(ck, &edges);
    std::printf("validation_error=%.17g lambda=%.17g edges=%d\n", err, lambda, edges);
  }
  gp_checkpoint_free(ck);
  return s == GP_OK ? kOk : report(s);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Per-edge PINN solver for differential problems on metric graphs"};
  app.require_subcommand(1);
  app.fallthrough();

  Options o;
  app.add_option("--config", o.config, "JSON experiment config");
  app.add_option("--preset", o.preset, "Default set to start from")
      ->check(CLI::IsMember({"elliptic", "parabolic", "hyperbolic"}));
  app.add_option("--seed", o.seed, "Override trainer.seed")->each([&](const std::string&) { o.has_seed = true; });
  app.add_option("--out", o.out, "Output directory (beats GRAPHPINN_OUT and the config)");
  app.add_option("--jobs", o.jobs, "Parallel sweep cells")->check(CLI::PositiveNumber);

  auto* run = app.add_subcommand("run", "Train and write history, checkpoint, predictions and summary");
  auto* sweep = app.add_subcommand("sweep-activations", "3x4 error table over edge lengths and activations");
  auto* dump = app.add_subcommand("dump-dataset", "Write the training and validation samples as CSV");
  auto* val = app.add_subcommand("validate", "Recompute the validation error of a checkpoint");
  val->add_option("checkpoint", o.checkpoint, "Checkpoint file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kConfig;
  }

  gp_set_log(log_to_stderr, nullptr);
  if (run->parsed()) return cmd_run(o);
  if (sweep->parsed()) return cmd_sweep(o);
  if (dump->parsed()) return cmd_dump(o);
  if (val->parsed()) return cmd_validate(o);
  return kFailure;
}
