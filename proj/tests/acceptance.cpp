// One PASS/FAIL line per acceptance criterion. Exit status 0 iff all pass.

#include <algorithm>
#include <chrono>
#include <exception>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <thread>

#include "celab/condenser.hpp"
#include "celab/fixtures.hpp"
#include "celab/harness.hpp"
#include "celab/predictor.hpp"

using namespace celab;

namespace {

constexpr std::uint64_t kSeed = 20240601;

int failures = 0;

void report(const char* id, bool pass, const std::string& detail) {
  std::printf("%s %s %s\n", pass ? "PASS" : "FAIL", id, detail.c_str());
  std::fflush(stdout);
  failures += pass ? 0 : 1;
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

unsigned workers() { return std::max(1u, std::thread::hardware_concurrency()); }

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void predictor_law() {
  int within = 0;
  double worst = 0.0;
  double slowest = 0.0;
  const int instances = 20;
  const std::uint64_t trials = 100000;
  for (int i = 0; i < instances; ++i) {
    const auto ti = std::chrono::steady_clock::now();
    Rng rng(derive_seed(kSeed, 100 + static_cast<std::uint64_t>(i)));
    const int n = 2 + static_cast<int>(rng.below(7));
    const int m = static_cast<int>(rng.below(5));
    const double k = 0.5 + (n - 1.0) * rng.uniform01();
    const auto table = random_table(n, m, rng, i % 3 == 0);
    const auto d = random_distinguisher(n, m, rng, i % 2 == 0);
    const auto opt = optimal_distribution(d, table, k);
    const auto dp = modified_distinguisher(d, opt.profile);
    const std::uint64_t ell = 1 + rng.below(64);
    const double p = exact_success_prob(table, dp, ell);
    std::uint64_t hits = 0;
    for (std::uint64_t t = 0; t < trials; ++t) {
      const auto [x, z] = table.sample(rng);
      const auto out = predictor_sample(z, dp, {ell}, rng);
      hits += out && out->word() == x ? 1 : 0;
    }
    const double freq = static_cast<double>(hits) / static_cast<double>(trials);
    const double sigma = std::sqrt(p * (1.0 - p) / static_cast<double>(trials));
    const double z_score = sigma > 0 ? std::abs(freq - p) / sigma : (freq == p ? 0.0 : 1e9);
    worst = std::max(worst, z_score);
    within += z_score <= 3.0 ? 1 : 0;
    slowest = std::max(slowest, seconds_since(ti));
  }
  report("1-predictor-law", within == instances && slowest < 60.0,
         fmt("%d/%d instances within 3 sigma, worst |z| = %.3f, slowest instance %.2fs", within, instances, worst,
             slowest));
}

void predictor_bound() {
  const auto t0 = std::chrono::steady_clock::now();
  ExperimentConfig cfg;
  cfg.kind = Suite::predictor_bound;
  cfg.n = 8;
  cfg.m = 2;
  cfg.trials = 40;
  cfg.seed = kSeed;
  const auto rows = run_experiment(cfg);
  int pass = 0;
  int positive = 0;
  int gaps[5] = {0, 0, 0, 0, 0};
  double min_ratio = 1e300;
  for (const auto& r : rows) {
    pass += r.pass ? 1 : 0;
    positive += r.epsilon > 0 ? 1 : 0;
    const int gap = static_cast<int>(std::lround(r.n - r.k));
    if (gap >= 1 && gap <= 4) ++gaps[gap];
    min_ratio = std::min(min_ratio, r.measured / r.bound);
  }
  const bool all_gaps = gaps[1] > 0 && gaps[2] > 0 && gaps[3] > 0 && gaps[4] > 0;
  report("2-predictor-bound", pass == static_cast<int>(rows.size()) && positive == pass && rows.size() >= 20 && all_gaps,
         fmt("%d/%zu instances meet 2^-k(1+2^(k-n) eps), gaps 1..4 counts %d/%d/%d/%d, min success/bound %.4f, %.2fs",
             pass, rows.size(), gaps[1], gaps[2], gaps[3], gaps[4], min_ratio, seconds_since(t0)));
}

void optimizer() {
  const auto t0 = std::chrono::steady_clock::now();
  ExperimentConfig cfg;
  cfg.kind = Suite::optimizer_oracle;
  cfg.n = 3;
  cfg.m = 2;
  cfg.trials = 50;
  cfg.seed = kSeed;
  const auto rows = run_experiment(cfg);
  double worst_gap = 0.0;
  bool gaps_ok = true;
  for (const auto& r : rows)
    if (r.metric == "objective_gap") {
      worst_gap = std::max(worst_gap, r.measured);
      gaps_ok = gaps_ok && r.pass;
    }

  double worst_kkt = 0.0;
  int instances = 0;
  for (int n = 1; n <= 10; ++n)
    for (int m = 0; m <= 4; ++m)
      for (int rep = 0; rep < 4; ++rep) {
        Rng rng(derive_seed(kSeed, 1000 + static_cast<std::uint64_t>(n * 100 + m * 10 + rep)));
        if (n == 1 && rep > 0) continue;
        const double k = n == 1 ? 0.5 : 0.05 + (n - 0.1) * rng.uniform01();
        const auto t = random_table(n, m, rng, rep % 2 == 1);
        const auto d = random_distinguisher(n, m, rng, rep % 2 == 0);
        const auto opt = optimal_distribution(d, t, k);
        worst_kkt = std::max(worst_kkt, kkt_residual(d, opt, k).worst());
        ++instances;
      }
  const double elapsed = seconds_since(t0);
  report("3-optimizer", gaps_ok && worst_gap <= 1e-6 && worst_kkt <= 1e-9 && elapsed < 300.0,
         fmt("50 oracle instances: worst |opt - brute force| = %.3g; %d instances up to n=10, m=4: worst KKT "
             "residual = %.3g; %.2fs",
             worst_gap, instances, worst_kkt, elapsed));
}

void claims() {
  double replace_slack = 1e300;
  double level_spread = 0.0;
  double cond_err = 0.0;
  double total_err = 0.0;
  const int instances = 100;
  for (int i = 0; i < instances; ++i) {
    Rng rng(derive_seed(kSeed, 5000 + static_cast<std::uint64_t>(i)));
    const int n = 2 + static_cast<int>(rng.below(7));
    const int m = static_cast<int>(rng.below(5));
    const double k = 0.2 + (n - 0.4) * rng.uniform01();
    const auto table = random_table(n, m, rng, i % 3 == 0);
    const auto d = random_distinguisher(n, m, rng, i % 2 == 0);
    const auto opt = optimal_distribution(d, table, k);
    const auto dp = modified_distinguisher(d, opt.profile);
    const auto ytab = opt.y.joint();
    const double lhs = dp.expectation(table) - dp.expectation(ytab);
    const double rhs = d.expectation(table) - d.expectation(ytab);
    replace_slack = std::min(replace_slack, lhs - rhs);
    const double lambda = opt.profile.lambda_norm;
    const double scale = std::exp2(n);
    for (std::uint64_t z = 0; z < dp.z_count(); ++z) {
      level_spread = std::max(level_spread, std::abs(dp.uniform_mean(z) - lambda));
      if (opt.y.pz(z) <= 0.0) continue;
      double cond = 0.0;
      for (std::uint64_t x = 0; x < dp.x_count(); ++x) cond += opt.y.at(x, z) * dp.at(x, z);
      cond_err = std::max(cond_err, std::abs(cond - dp.uniform_mean(z) * scale * opt.y_max[z]));
    }
    total_err = std::max(total_err, std::abs(dp.expectation(ytab) - std::exp2(n - k) * lambda));
  }
  report("4-claims", replace_slack >= -1e-12 && level_spread <= 1e-9 && cond_err <= 1e-9 && total_err <= 1e-9,
         fmt("100 instances: min [E D'(X)-E D'(Y*)] - [E D(X)-E D(Y*)] = %.3g; max |E D'(U,z) - lambda'| = %.3g; "
             "max conditional identity error = %.3g; max |E D'(Y*) - 2^(n-k) lambda'| = %.3g",
             replace_slack, level_spread, cond_err, total_err));
}

void g_properties() {
  const auto t0 = std::chrono::steady_clock::now();
  ExperimentConfig cfg;
  cfg.kind = Suite::g_properties;
  const auto rows = run_experiment(cfg);
  std::string detail;
  for (const auto& r : rows) detail += fmt("%s=%g ", r.metric.c_str(), r.measured);
  report("5-g-properties", all_pass(rows), detail + fmt("(%.2fs)", seconds_since(t0)));
}

void find_threshold() {
  const auto t0 = std::chrono::steady_clock::now();
  ExperimentConfig cfg;
  cfg.kind = Suite::threshold;
  cfg.n = 8;
  cfg.delta = 0.05;
  cfg.samples = 10000;
  cfg.trials = 1000;
  cfg.seed = kSeed;
  const auto rows = run_experiment(cfg);
  const double elapsed = seconds_since(t0);
  report("6-find-threshold", all_pass(rows) && elapsed < 120.0,
         fmt("window fraction %.4f vs bound %.4f; runs with t' above the exact threshold: %g; %.2fs", rows[0].measured,
             rows[0].bound, rows[1].measured, elapsed));
}

void decoder() {
  const auto t0 = std::chrono::steady_clock::now();
  struct Setting {
    const char* name;
    int n;
    double rate;
    double margin;
  };
  const Setting settings[] = {{"noiseless n=32", 32, 1.0, 1.0},
                              {"errors c-e=0.2 n=16", 16, 1.0, 0.2},
                              {"erasures c+e=0.1 c-e=0.1 n=16", 16, 0.1, 0.1}};
  bool ok = true;
  std::string detail;
  for (const auto& s : settings) {
    ExperimentConfig cfg;
    cfg.kind = Suite::decoder;
    cfg.n = s.n;
    cfg.m = 0;
    cfg.trials = 200;
    cfg.answer_rate = s.rate;
    cfg.margins = {s.margin};
    cfg.seed = kSeed;
    cfg.workers = workers();
    const auto rows = run_experiment(cfg);
    ok = ok && all_pass(rows) && rows.size() == 1;
    detail += fmt("[%s: l=%llu rate %.3f] ", s.name, static_cast<unsigned long long>(rows[0].ell_or_l),
                  rows[0].measured);
  }
  const double elapsed = seconds_since(t0);
  report("7-hadamard-decoding", ok && elapsed < 300.0, detail + fmt("(%.2fs)", elapsed));
}

void condenser() {
  const auto t0 = std::chrono::steady_clock::now();
  CondenserConfig cfg;
  cfg.n = 10;
  cfg.k = 5;
  cfg.m = 4;
  cfg.delta_gap = 3;
  cfg.trials = 2000;
  cfg.seed = kSeed;
  cfg.workers = workers();
  const auto rep = condenser_experiment(cfg);
  const double elapsed = seconds_since(t0);
  report("8-condenser", rep.pass && elapsed < 1800.0,
         fmt("advantage %.4f, %llu/%llu recovered (rate %.4f, 95%% lower bound %.4f vs target %.5f), unsound %llu, "
             "max calls/trial %llu <= ceiling %llu, %.0fs",
             rep.adversary_advantage, static_cast<unsigned long long>(rep.successes),
             static_cast<unsigned long long>(cfg.trials), rep.rate, rep.ci_low, rep.target,
             static_cast<unsigned long long>(rep.unsound), static_cast<unsigned long long>(rep.max_calls_per_trial),
             static_cast<unsigned long long>(rep.call_ceiling_per_trial), elapsed));
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void determinism() {
  const auto dir = std::filesystem::temp_directory_path() / "celab_acceptance";
  std::filesystem::create_directories(dir);
  bool ok = true;
  std::string detail;
  for (auto s : {Suite::predictor_bound, Suite::condenser, Suite::decoder, Suite::threshold, Suite::optimizer_oracle,
                 Suite::g_properties}) {
    ExperimentConfig cfg;
    cfg.kind = s;
    cfg.seed = kSeed + 7;
    cfg.trials = 10;
    if (s == Suite::condenser) {
      cfg.n = 8;
      cfg.trials = 3;
      cfg.q = 1.0;
    }
    if (s == Suite::optimizer_oracle) cfg.n = 3;
    if (s == Suite::decoder) {
      cfg.n = 12;
      cfg.margins = {0.3};
    }
    const auto a = (dir / (suite_name(s) + "_a.csv")).string();
    const auto b = (dir / (suite_name(s) + "_b.csv")).string();
    emit_report(run_experiment(cfg), a, ReportFormat::csv);
    cfg.workers = workers() + 2;
    emit_report(run_experiment(cfg), b, ReportFormat::csv);
    const bool same = slurp(a) == slurp(b) && !slurp(a).empty();
    ok = ok && same;
    detail += suite_name(s) + (same ? "=identical " : "=DIFFERENT ");
  }
  std::filesystem::remove_all(dir);
  report("9-determinism", ok, detail);
}

}  // namespace

void guarded(const char* id, void (*criterion)()) {
  try {
    criterion();
  } catch (const std::exception& e) {
    report(id, false, std::string("threw: ") + e.what());
  }
}

int main() {
  guarded("1-predictor-law", predictor_law);
  guarded("2-predictor-bound", predictor_bound);
  guarded("3-optimizer", optimizer);
  guarded("4-claims", claims);
  guarded("5-g-properties", g_properties);
  guarded("6-find-threshold", find_threshold);
  guarded("7-hadamard-decoding", decoder);
  guarded("9-determinism", determinism);
  guarded("8-condenser", condenser);
  std::printf("%s: %d criteria failed\n", failures == 0 ? "ALL PASS" : "FAILURES", failures);
  return failures == 0 ? 0 : 1;
}
