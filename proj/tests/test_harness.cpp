#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"

#include "celab/errors.hpp"
#include "celab/harness.hpp"
#include "celab/predictor.hpp"

using namespace celab;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

ExperimentConfig small(Suite kind) {
  ExperimentConfig cfg;
  cfg.kind = kind;
  cfg.seed = 17;
  switch (kind) {
    case Suite::predictor_bound: cfg.trials = 8; cfg.n = 6; break;
    case Suite::condenser: cfg.trials = 4; cfg.n = 8; cfg.q = 1.0; break;
    case Suite::decoder: cfg.trials = 20; cfg.n = 10; cfg.margins = {0.3, 0.6}; break;
    case Suite::threshold: cfg.trials = 50; cfg.n = 5; cfg.samples = 2000; break;
    case Suite::optimizer_oracle: cfg.trials = 10; cfg.n = 3; break;
    case Suite::g_properties: break;
  }
  return cfg;
}

}  // namespace

TEST_CASE("suite names round trip") {
  for (auto s : {Suite::predictor_bound, Suite::condenser, Suite::decoder, Suite::threshold, Suite::optimizer_oracle,
                 Suite::g_properties})
    CHECK(parse_suite(suite_name(s)) == s);
  CHECK(suite_name(Suite::optimizer_oracle) == "optimizer-oracle");
  CHECK_THROWS_AS(parse_suite("nope"), usage_error);
  CHECK_FALSE(suite_is_randomized(Suite::g_properties));
  CHECK(suite_is_randomized(Suite::decoder));
}

TEST_CASE("config documents") {
  const auto cfg = config_from_text(R"({"kind": "threshold", "n": 5, "seed": 9, "delta": 0.1, "format": "plot"})");
  CHECK(cfg.kind == Suite::threshold);
  CHECK(cfg.n == 5);
  CHECK(cfg.seed == 9u);
  CHECK(cfg.delta == 0.1);
  CHECK(cfg.format == ReportFormat::plot);
  CHECK_THROWS_AS(config_from_text(R"({"kind": "threshold", "colour": 1})"), usage_error);
  CHECK_THROWS_AS(config_from_text(R"({"n": 5})"), usage_error);
  CHECK_THROWS_AS(config_from_text("[1, 2]"), usage_error);
  CHECK_THROWS_AS(config_from_text(R"({"kind": "decoder", "format": "pdf"})"), usage_error);
  CHECK_THROWS_AS(load_config("/nonexistent/config.json"), io_error);
}

TEST_CASE("configs outside the caps are refused") {
  auto cfg = small(Suite::decoder);
  cfg.seed.reset();
  CHECK_THROWS_AS(run_experiment(cfg), usage_error);
  cfg = small(Suite::optimizer_oracle);
  cfg.n = 20;
  cfg.m = 5;
  CHECK_THROWS_AS(run_experiment(cfg), usage_error);
  cfg = small(Suite::condenser);
  cfg.k = 9;
  CHECK_THROWS_AS(run_experiment(cfg), usage_error);
  cfg = small(Suite::threshold);
  cfg.trials = 0;
  CHECK_THROWS_AS(run_experiment(cfg), usage_error);
  ExperimentConfig g;
  g.kind = Suite::g_properties;
  CHECK_NOTHROW(run_experiment(g));
}

TEST_CASE("predictor-bound suite produces one passing row per instance") {
  ExperimentConfig cfg;
  cfg.kind = Suite::predictor_bound;
  cfg.seed = 4;
  cfg.trials = 20;
  const auto rows = run_experiment(cfg);
  REQUIRE(rows.size() == 20);
  for (const auto& r : rows) {
    CHECK(r.pass);
    CHECK(r.bound == attack_bound(r.n, r.k, r.epsilon));
    CHECK(r.ell_or_l == attack_round_budget(r.n, r.k, r.epsilon));
    CHECK(r.n - r.k >= 1);
    CHECK(r.n - r.k <= 4);
  }
}

TEST_CASE("condenser suite reports the target bound") {
  const auto rows = run_experiment(small(Suite::condenser));
  bool found = false;
  for (const auto& r : rows)
    if (r.metric == "recovery_ci_low") {
      found = true;
      CHECK(r.bound == std::exp2(3.0 - 5.0 - 3.0));
    }
  CHECK(found);
}

TEST_CASE("every suite is deterministic under a fixed seed") {
  for (auto s : {Suite::predictor_bound, Suite::condenser, Suite::decoder, Suite::threshold, Suite::optimizer_oracle,
                 Suite::g_properties}) {
    auto cfg = small(s);
    const auto a = format_csv(run_experiment(cfg));
    cfg.workers = 3;
    const auto b = format_csv(run_experiment(cfg));
    CHECK_MESSAGE(a == b, suite_name(s));
    CHECK(!a.empty());
  }
}

TEST_CASE("csv emission and parsing") {
  const ReportRow row{"decoder/0", 5, 16, 0, 0.0, 0.2, 13, "x_in_list_rate", 0.955, 0.8, true};
  const auto text = format_csv({row});
  std::istringstream in(text);
  std::string header;
  std::string line;
  std::string extra;
  std::getline(in, header);
  std::getline(in, line);
  CHECK(header == csv_header());
  CHECK_FALSE(static_cast<bool>(std::getline(in, extra)));
  CHECK(parse_csv(text) == std::vector<ReportRow>{row});

  const auto rows = run_experiment(small(Suite::optimizer_oracle));
  CHECK(parse_csv(format_csv(rows)) == rows);

  const auto path = temp_path("celab_report_test.csv");
  emit_report(rows, path, ReportFormat::csv);
  CHECK(slurp(path) == format_csv(rows));
  CHECK(read_report(path) == rows);
  CHECK(std::filesystem::exists(path + ".meta.json"));
  std::filesystem::remove(path);
  std::filesystem::remove(path + ".meta.json");

  CHECK_THROWS_AS(emit_report(rows, "/nonexistent/dir/out.csv", ReportFormat::csv), io_error);
  CHECK_THROWS_AS(emit_report({}, temp_path("celab_empty.csv"), ReportFormat::csv), usage_error);
  CHECK_THROWS_AS(parse_csv("bad,header\n"), usage_error);
}

TEST_CASE("plot emission") {
  const auto rows = run_experiment(small(Suite::decoder));
  const auto path = temp_path("celab_report_test.svg");
  emit_report(rows, path, ReportFormat::plot, plot_axis(Suite::decoder));
  const auto svg = slurp(path);
  CHECK(svg.find("<svg") != std::string::npos);
  CHECK(svg.find("x_in_list_rate") != std::string::npos);
  std::filesystem::remove(path);
  CHECK(plot_axis(Suite::predictor_bound) == "ell_or_l");
}
