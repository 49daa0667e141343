#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "celab/errors.hpp"
#include "celab/harness.hpp"
#include "celab/metricopt.hpp"

namespace {

struct Overrides {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> trials;
  std::optional<int> n;
  std::optional<int> m;
  std::optional<double> k;
  std::optional<std::string> out;
  std::optional<std::string> format;
  std::optional<unsigned> workers;
  // suite specific
  std::optional<double> epsilon;
  std::optional<std::uint64_t> mc_trials;
  std::optional<int> delta_gap;
  std::optional<double> q;
  std::optional<double> delta;
  std::optional<std::uint64_t> samples;
  std::vector<double> margins;
  std::optional<double> answer_rate;
};

void add_common(CLI::App* app, Overrides& o) {
  app->add_option("--config", o.config, "JSON config file; flags override its values");
  app->add_option("--seed", o.seed, "master seed (required for randomized suites)");
  app->add_option("--trials", o.trials, "instances or trials");
  app->add_option("--n", o.n, "bits of X");
  app->add_option("--m", o.m, "bits of Z");
  app->add_option("--k", o.k, "target entropy or key length");
  app->add_option("--out", o.out, "report path (default: CSV on stdout)");
  app->add_option("--format", o.format, "csv or plot")->check(CLI::IsMember({"csv", "plot"}));
  app->add_option("--workers", o.workers, "worker threads");
}

celab::ExperimentConfig build_config(celab::Suite kind, const Overrides& o) {
  celab::ExperimentConfig cfg;
  if (!o.config.empty()) {
    cfg = celab::load_config(o.config);
    if (cfg.kind != kind)
      throw celab::usage_error("config describes '" + celab::suite_name(cfg.kind) + "', not '" +
                               celab::suite_name(kind) + "'");
  }
  cfg.kind = kind;
  if (o.seed) cfg.seed = o.seed;
  if (o.trials) cfg.trials = *o.trials;
  if (o.n) cfg.n = *o.n;
  if (o.m) cfg.m = *o.m;
  if (o.k) cfg.k = o.k;
  if (o.out) cfg.output = *o.out;
  if (o.format) cfg.format = *o.format == "plot" ? celab::ReportFormat::plot : celab::ReportFormat::csv;
  if (o.workers) cfg.workers = *o.workers;
  if (o.epsilon) cfg.epsilon = o.epsilon;
  if (o.mc_trials) cfg.mc_trials = *o.mc_trials;
  if (o.delta_gap) cfg.delta_gap = *o.delta_gap;
  if (o.q) cfg.q = o.q;
  if (o.delta) cfg.delta = *o.delta;
  if (o.samples) cfg.samples = *o.samples;
  if (!o.margins.empty()) cfg.margins = o.margins;
  if (o.answer_rate) cfg.answer_rate = *o.answer_rate;
  return cfg;
}

int run_and_report(const celab::ExperimentConfig& cfg) {
  const auto rows = celab::run_experiment(cfg);
  if (cfg.output.empty()) {
    if (cfg.format == celab::ReportFormat::plot) throw celab::usage_error("plot output needs --out");
    std::cout << celab::format_csv(rows);
  } else {
    celab::emit_report(rows, cfg.output, cfg.format, celab::plot_axis(cfg.kind));
  }
  std::size_t failed = 0;
  for (const auto& r : rows) failed += r.pass ? 0 : 1;
  std::fprintf(stderr, "%s: %zu rows, %zu failed\n", celab::suite_name(cfg.kind).c_str(), rows.size(), failed);
  return failed == 0 ? 0 : 1;
}

int solve_files(const std::string& table_path, const std::string& dist_path, double k) {
  const auto table = celab::load_table(table_path);
  const auto d = celab::load_distinguisher(dist_path);
  const auto opt = celab::optimal_distribution(d, table, k);
  nlohmann::json out{{"k", k},
                     {"objective", opt.objective},
                     {"advantage", d.expectation(table) - opt.objective},
                     {"lambda_norm", opt.profile.lambda_norm},
                     {"thresholds", opt.profile.t},
                     {"y_max", opt.y_max},
                     {"entropy", celab::avg_min_entropy(opt.y)},
                     {"y_conditionals", opt.y.conditionals()}};
  std::cout << out.dump(1) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Computational entropy laboratory: reductions, optimizers and decoders on explicit distributions"};
  app.require_subcommand(1);

  Overrides predict_o, condense_o, decode_o, threshold_o, optimize_o, gprops_o;

  auto* predict = app.add_subcommand("predict", "exact and sampled success of the distinguisher-to-predictor attack");
  add_common(predict, predict_o);
  predict->add_option("--epsilon", predict_o.epsilon, "force the advantage used for the round budget");
  predict->add_option("--mc-trials", predict_o.mc_trials, "Monte Carlo trials per instance (0 = exact only)");

  auto* condense = app.add_subcommand("condense", "recover X from a planted key predictor");
  add_common(condense, condense_o);
  condense->add_option("--delta-gap", condense_o.delta_gap, "entropy gap (>= 3)");
  condense->add_option("--q", condense_o.q, "planted adversary strength (default: at the hypothesis threshold)");

  auto* decode = app.add_subcommand("decode", "Hadamard list decoding over a margin grid");
  add_common(decode, decode_o);
  decode->add_option("--margins", decode_o.margins, "values of c - e");
  decode->add_option("--answer-rate", decode_o.answer_rate, "c + e");

  auto* threshold = app.add_subcommand("threshold", "sampled threshold bisection against the exact threshold");
  add_common(threshold, threshold_o);
  threshold->add_option("--delta", threshold_o.delta, "accuracy window");
  threshold->add_option("--samples", threshold_o.samples, "samples per bisection round");

  auto* optimize = app.add_subcommand("optimize", "entropy-constrained optimizer: solve files or run the oracle suite");
  add_common(optimize, optimize_o);
  std::string table_path, dist_path;
  optimize->add_option("--table", table_path, "joint table file");
  optimize->add_option("--distinguisher", dist_path, "distinguisher file");

  auto* gprops = app.add_subcommand("gprops", "analytic properties of g and h on fixed grids");
  add_common(gprops, gprops_o);

  auto* experiment = app.add_subcommand("experiment", "run an experiment described by a config file");
  auto* run = experiment->add_subcommand("run", "run a config file");
  experiment->require_subcommand(1);
  std::string run_file;
  std::optional<std::uint64_t> run_seed;
  std::optional<std::string> run_out, run_format;
  run->add_option("file", run_file, "config file")->required();
  run->add_option("--seed", run_seed, "override the master seed");
  run->add_option("--out", run_out, "override the output path");
  run->add_option("--format", run_format, "csv or plot")->check(CLI::IsMember({"csv", "plot"}));

  CLI11_PARSE(app, argc, argv);

  try {
    if (*predict) return run_and_report(build_config(celab::Suite::predictor_bound, predict_o));
    if (*condense) return run_and_report(build_config(celab::Suite::condenser, condense_o));
    if (*decode) return run_and_report(build_config(celab::Suite::decoder, decode_o));
    if (*threshold) return run_and_report(build_config(celab::Suite::threshold, threshold_o));
    if (*optimize) {
      if (!table_path.empty() || !dist_path.empty()) {
        if (table_path.empty() || dist_path.empty() || !optimize_o.k)
          throw celab::usage_error("solving needs --table, --distinguisher and --k");
        return solve_files(table_path, dist_path, *optimize_o.k);
      }
      auto cfg = build_config(celab::Suite::optimizer_oracle, optimize_o);
      if (!optimize_o.n && optimize_o.config.empty()) cfg.n = 3;
      return run_and_report(cfg);
    }
    if (*gprops) return run_and_report(build_config(celab::Suite::g_properties, gprops_o));
    if (*run) {
      auto cfg = celab::load_config(run_file);
      if (run_seed) cfg.seed = run_seed;
      if (run_out) cfg.output = *run_out;
      if (run_format) cfg.format = *run_format == "plot" ? celab::ReportFormat::plot : celab::ReportFormat::csv;
      return run_and_report(cfg);
    }
  } catch (const celab::usage_error& e) {
    std::fprintf(stderr, "usage error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
  return 2;
}
