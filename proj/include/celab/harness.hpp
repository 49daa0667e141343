#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace celab {

enum class Suite {
  predictor_bound,
  condenser,
  decoder,
  threshold,
  optimizer_oracle,
  g_properties,
};

std::string suite_name(Suite s);
Suite parse_suite(const std::string& name);
bool suite_is_randomized(Suite s);

enum class ReportFormat { csv, plot };

struct ExperimentConfig {
  Suite kind = Suite::predictor_bound;
  int n = 8;
  int m = 2;
  std::optional<double> k;              // suite default when absent
  std::optional<double> epsilon;        // forced advantage (predictor-bound)
  double delta = 0.05;                  // FindThreshold accuracy
  std::uint64_t samples = 10000;        // FindThreshold samples per round
  std::uint64_t trials = 20;
  std::optional<std::uint64_t> seed;
  std::string output;
  ReportFormat format = ReportFormat::csv;
  int delta_gap = 3;                    // condenser entropy gap
  std::optional<double> q;              // condenser planted strength
  std::uint64_t mc_trials = 0;          // predictor-bound Monte Carlo cross-check
  std::vector<double> margins;          // decoder c - e grid
  double answer_rate = 1.0;             // decoder c + e
  unsigned workers = 1;

  void validate() const;
};

// Reads a JSON config document; unknown keys are rejected.
ExperimentConfig load_config(const std::string& path);
ExperimentConfig config_from_text(const std::string& text);

struct ReportRow {
  std::string experiment_id;
  std::uint64_t seed = 0;
  int n = 0;
  int m = 0;
  double k = 0.0;
  double epsilon = 0.0;
  std::uint64_t ell_or_l = 0;
  std::string metric;
  double measured = 0.0;
  double bound = 0.0;
  bool pass = false;

  bool operator==(const ReportRow&) const = default;
};

std::vector<ReportRow> run_experiment(const ExperimentConfig& cfg);
bool all_pass(const std::vector<ReportRow>& rows);

std::string csv_header();
std::string format_csv(const std::vector<ReportRow>& rows);
std::vector<ReportRow> parse_csv(const std::string& text);
std::vector<ReportRow> read_report(const std::string& path);

// Writes the CSV (plus a .meta.json sidecar with timestamps), or an SVG
// chart of measured and bound against `x_column` ("epsilon" or "ell_or_l").
void emit_report(const std::vector<ReportRow>& rows, const std::string& path, ReportFormat format,
                 const std::string& x_column = "epsilon");

// Horizontal axis used for a suite's chart.
std::string plot_axis(Suite s);

}  // namespace celab
