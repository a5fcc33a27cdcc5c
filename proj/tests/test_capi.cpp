#include <catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

#include "graphpinn/graphpinn.h"

namespace fs = std::filesystem;

namespace {

const char* kTiny = R"({"preset": "elliptic",
  "samples": {"n_space_train": 40, "n_space_validate": 20},
  "network": {"dims": [1, 6, 1]},
  "trainer": {"iterations": 10, "report_every": 5, "validate_every": 5}})";

std::string fixture(const std::string& name) { return std::string(GRAPHPINN_FIXTURES) + "/" + name + ".graph"; }

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("graphpinn_capi_" + name);
  fs::remove_all(p);
  return p;
}

}  // namespace

TEST_CASE("status names and version") {
  CHECK(std::string(gp_status_name(GP_OK)) == "ok");
  CHECK(std::string(gp_status_name(GP_ERR_CONFIG)) == "config");
  CHECK(std::string(gp_status_name(static_cast<gp_status>(99))) == "unknown");
  CHECK(std::string(gp_version()).size() > 0);
}

TEST_CASE("config errors report their key") {
  gp_config* c = nullptr;
  CHECK(gp_config_parse(R"({"trainer": {"lr_w": "x"}})", nullptr, &c) == GP_ERR_CONFIG);
  CHECK(c == nullptr);
  CHECK(std::string(gp_last_error_key()) == "trainer.lr_w");
  CHECK(std::string(gp_last_error()).find("lr_w") != std::string::npos);

  CHECK(gp_config_preset("wave", &c) == GP_ERR_CONFIG);
  CHECK(gp_config_load("/nonexistent/x.json", nullptr, &c) == GP_ERR_CONFIG);

  // success clears the key
  REQUIRE(gp_config_preset("parabolic", &c) == GP_OK);
  CHECK(std::string(gp_last_error_key()).empty());
  CHECK(gp_config_set_iterations(c, -1) == GP_ERR_CONFIG);
  CHECK(std::string(gp_last_error_key()) == "trainer.iterations");
  CHECK(gp_config_set_output(c, "somewhere") == GP_OK);
  CHECK(std::string(gp_config_output(c)) == "somewhere");
  CHECK(std::string(gp_config_json(c)).find("\"parabolic\"") != std::string::npos);
  gp_config_free(c);
}

TEST_CASE("null arguments are rejected") {
  gp_config* c = nullptr;
  CHECK(gp_config_preset("elliptic", nullptr) == GP_ERR_ARGUMENT);
  CHECK(gp_config_parse(nullptr, nullptr, &c) == GP_ERR_ARGUMENT);
  CHECK(gp_config_set_seed(nullptr, 1) == GP_ERR_ARGUMENT);
  CHECK(gp_run(nullptr, nullptr, nullptr) == GP_ERR_ARGUMENT);
  CHECK(gp_graph_num_edges(nullptr) == -1);
  CHECK(gp_graph_boundary(nullptr, nullptr, 0) == -1);
  double v = 0;
  CHECK(gp_checkpoint_lambda(nullptr, &v) == GP_ERR_ARGUMENT);
  gp_config_free(nullptr);
  gp_graph_free(nullptr);
  gp_checkpoint_free(nullptr);
}

TEST_CASE("graph queries") {
  gp_graph* g = nullptr;
  REQUIRE(gp_graph_load(fixture("star5").c_str(), &g) == GP_OK);
  CHECK(gp_graph_num_nodes(g) == 6);
  CHECK(gp_graph_num_edges(g) == 5);
  int deg = 0;
  CHECK(gp_graph_degree(g, 0, &deg) == GP_OK);
  CHECK(deg == 5);
  CHECK(gp_graph_degree(g, 6, &deg) == GP_ERR_ARGUMENT);
  std::vector<int> b(2);
  CHECK(gp_graph_boundary(g, b.data(), 2) == 5);
  CHECK(b == std::vector<int>{1, 2});
  gp_graph_free(g);

  CHECK(gp_graph_parse("", &g) == GP_ERR_PARSE);
  CHECK(gp_graph_parse("nodes 2\nedges\n0, 0, 1, -1\n", &g) == GP_ERR_VALIDATION);
  CHECK(gp_graph_load("/nonexistent.graph", &g) == GP_ERR_IO);
  REQUIRE(gp_graph_parse("nodes 2\nedges\n0, 0, 1, 2.5\n", &g) == GP_OK);
  CHECK(gp_graph_num_edges(g) == 1);
  gp_graph_free(g);
}

TEST_CASE("run, checkpoint and dump through the C surface") {
  gp_config* c = nullptr;
  REQUIRE(gp_config_parse(kTiny, nullptr, &c) == GP_OK);
  std::vector<std::string> lines;
  gp_set_log([](const char* l, void* u) { static_cast<std::vector<std::string>*>(u)->push_back(l); }, &lines);
  const fs::path dir = scratch("run");
  gp_run_summary s{};
  REQUIRE(gp_run(c, dir.string().c_str(), &s) == GP_OK);
  gp_set_log(nullptr, nullptr);
  CHECK(s.num_edges == 1);
  CHECK(std::isfinite(s.validation_error));
  CHECK(s.final_lambda >= 1.0);
  CHECK_FALSE(lines.empty());

  gp_checkpoint* ck = nullptr;
  REQUIRE(gp_checkpoint_load((dir / "checkpoint.txt").string().c_str(), &ck) == GP_OK);
  double err = 0, lam = 0;
  int n = 0;
  CHECK(gp_checkpoint_validation_error(ck, &err) == GP_OK);
  CHECK(gp_checkpoint_lambda(ck, &lam) == GP_OK);
  CHECK(gp_checkpoint_num_edges(ck, &n) == GP_OK);
  CHECK(err == s.validation_error);
  CHECK(lam == s.final_lambda);
  CHECK(n == 1);
  gp_checkpoint_free(ck);
  CHECK(gp_checkpoint_load((dir / "history.csv").string().c_str(), &ck) == GP_ERR_PARSE);

  const fs::path d = scratch("dump");
  CHECK(gp_dump_dataset(c, d.string().c_str()) == GP_OK);
  CHECK(fs::exists(d / "collocation.csv"));
  gp_config_free(c);
}

TEST_CASE("divergence maps to its own status") {
  gp_config* c = nullptr;
  REQUIRE(gp_config_parse(R"({"samples": {"n_space_train": 40, "n_space_validate": 20},
    "network": {"dims": [1, 6, 1], "activation": "sin2_plus_x"},
    "trainer": {"iterations": 200, "lr_w": 50, "divergence_factor": 1.5}})",
                          nullptr, &c) == GP_OK);
  CHECK(gp_run(c, scratch("div").string().c_str(), nullptr) == GP_ERR_DIVERGENCE);
  gp_config_free(c);
}

TEST_CASE("sweep fills the table") {
  gp_config* c = nullptr;
  REQUIRE(gp_config_parse(kTiny, nullptr, &c) == GP_OK);
  REQUIRE(gp_config_set_iterations(c, 0) == GP_OK);
  double t[12];
  REQUIRE(gp_sweep_activations(c, scratch("sweep").string().c_str(), 1, t) == GP_OK);
  for (double v : t) CHECK(std::isfinite(v));
  CHECK(gp_sweep_activations(c, scratch("sweep").string().c_str(), 0, t) == GP_ERR_CONFIG);
  gp_config_free(c);
}
