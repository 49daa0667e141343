#include "celab/harness.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "celab/condenser.hpp"
#include "celab/errors.hpp"
#include "celab/fixtures.hpp"
#include "celab/hadamard.hpp"
#include "celab/metricopt.hpp"
#include "celab/parallel.hpp"
#include "celab/predictor.hpp"

namespace celab {

namespace {

struct SuiteInfo {
  Suite suite;
  const char* name;
  bool randomized;
};

constexpr SuiteInfo kSuites[] = {
    {Suite::predictor_bound, "predictor-bound", true}, {Suite::condenser, "condenser", true},
    {Suite::decoder, "decoder", true},                 {Suite::threshold, "threshold", true},
    {Suite::optimizer_oracle, "optimizer-oracle", true}, {Suite::g_properties, "g-properties", false},
};

std::string row_id(Suite s, std::uint64_t index) { return suite_name(s) + "/" + std::to_string(index); }

std::vector<ReportRow> run_predictor_bound(const ExperimentConfig& cfg) {
  const std::uint64_t master = *cfg.seed;
  std::vector<std::vector<ReportRow>> per(cfg.trials);
  parallel_for(cfg.trials, cfg.workers, [&](std::uint64_t i) {
    const std::uint64_t seed = derive_seed(master, i);
    Rng rng(seed);
    const int gap = 1 + static_cast<int>(i % 4);
    const int k = cfg.k ? static_cast<int>(std::lround(*cfg.k)) : std::max(1, cfg.n - gap);
    // Resample until the distinguisher really separates X from entropy k.
    std::optional<AttackReport> rep;
    PlantedAttack inst;
    for (int attempt = 0; attempt < 64 && !rep; ++attempt) {
      inst = planted_attack_instance(cfg.n, cfg.m, k, rng);
      try {
        rep = theorem2_attack(inst.table, inst.d, inst.k, cfg.epsilon);
      } catch (const hypothesis_error&) {
      }
    }
    if (!rep) throw hypothesis_error("no planted instance with positive advantage after 64 draws");
    auto& rows = per[i];
    rows.push_back({row_id(cfg.kind, i), seed, cfg.n, cfg.m, rep->k, rep->epsilon, rep->ell, "success_exact",
                    rep->success_exact, rep->bound, rep->pass});
    if (cfg.mc_trials > 0) {
      const auto opt = optimal_distribution(inst.d, inst.table, inst.k);
      const auto dp = modified_distinguisher(inst.d, opt.profile);
      std::uint64_t hits = 0;
      for (std::uint64_t t = 0; t < cfg.mc_trials; ++t) {
        const auto [x, z] = inst.table.sample(rng);
        const auto guess = predictor_sample(z, dp, {rep->ell}, rng);
        if (guess && guess->word() == x) ++hits;
      }
      const double freq = static_cast<double>(hits) / static_cast<double>(cfg.mc_trials);
      const double p = rep->success_exact;
      const double sigma = std::sqrt(p * (1.0 - p) / static_cast<double>(cfg.mc_trials));
      rows.push_back({row_id(cfg.kind, i), seed, cfg.n, cfg.m, rep->k, rep->epsilon, rep->ell, "success_mc", freq, p,
                      std::abs(freq - p) <= 3.0 * sigma});
    }
  });
  std::vector<ReportRow> out;
  for (auto& rows : per) out.insert(out.end(), rows.begin(), rows.end());
  return out;
}

std::vector<ReportRow> run_condenser(const ExperimentConfig& cfg) {
  CondenserConfig cc;
  cc.n = cfg.n;
  cc.m = cfg.m;
  cc.k = cfg.k ? static_cast<int>(std::lround(*cfg.k)) : 5;
  cc.delta_gap = cfg.delta_gap;
  cc.q = cfg.q;
  cc.trials = cfg.trials;
  cc.seed = *cfg.seed;
  cc.workers = cfg.workers;
  const auto rep = condenser_experiment(cc);
  const ReductionParams params{cc.k, cc.delta_gap};
  const auto l = static_cast<std::uint64_t>(params.list_size(cc.k, cc.n));
  const std::string id = row_id(cfg.kind, 0);
  const double k = cc.k;
  const double adv = rep.adversary_advantage;
  return {
      {id, cc.seed, cc.n, cc.m, k, adv, l, "recovery_rate", rep.rate, rep.target, rep.rate > rep.target},
      {id, cc.seed, cc.n, cc.m, k, adv, l, "recovery_ci_low", rep.ci_low, rep.target, rep.ci_low > rep.target},
      {id, cc.seed, cc.n, cc.m, k, adv, l, "adversary_calls_max", static_cast<double>(rep.max_calls_per_trial),
       static_cast<double>(rep.call_ceiling_per_trial), rep.budget_ok},
      {id, cc.seed, cc.n, cc.m, k, adv, l, "unsound_outputs", static_cast<double>(rep.unsound), 0.0,
       rep.unsound == 0},
  };
}

std::vector<ReportRow> run_decoder(const ExperimentConfig& cfg) {
  std::vector<double> margins = cfg.margins;
  if (margins.empty()) margins = {0.1, 0.2, 0.4, 0.6, 0.8, 1.0};
  std::vector<ReportRow> out;
  const std::uint64_t master = *cfg.seed;
  for (std::size_t j = 0; j < margins.size(); ++j) {
    const double margin = margins[j];
    const double rate = cfg.answer_rate;
    if (!(margin > 0.0 && margin <= rate + 1e-12)) throw usage_error("decoder margins must lie in (0, c + e]");
    const double c = 0.5 * (rate + margin);
    const double e = std::max(0.0, 0.5 * (rate - margin));
    const int l = list_size_param(cfg.n, e, c);
    const std::uint64_t seed = derive_seed(master, j);
    std::vector<char> hit(cfg.trials, 0);
    parallel_for(cfg.trials, cfg.workers, [&](std::uint64_t t) {
      Rng rng(derive_seed(seed, t));
      const auto x = BitVec::random(cfg.n, rng);
      const auto oracle =
          cfg.n <= 20 ? corrupted_codeword_oracle(x, e, 1.0 - rate, rng) : noisy_oracle(x, e, 1.0 - rate);
      const auto list = ld_decode(oracle, cfg.n, l, rng);
      hit[t] = std::find(list.candidates.begin(), list.candidates.end(), x) != list.candidates.end();
    });
    const double measured =
        static_cast<double>(std::count(hit.begin(), hit.end(), 1)) / static_cast<double>(cfg.trials);
    out.push_back({row_id(cfg.kind, j), seed, cfg.n, 0, 0.0, margin, static_cast<std::uint64_t>(l), "x_in_list_rate",
                   measured, 0.8, measured >= 0.8 - 0.05});
  }
  return out;
}

std::vector<ReportRow> run_threshold(const ExperimentConfig& cfg) {
  const std::uint64_t master = *cfg.seed;
  struct Run {
    bool in_window = false;
    bool above_exact = false;
  };
  std::vector<Run> runs(cfg.trials);
  parallel_for(cfg.trials, cfg.workers, [&](std::uint64_t i) {
    Rng rng(derive_seed(master, i));
    const auto d = random_distinguisher(cfg.n, 0, rng);
    const auto v = d.slice(0);
    const double mean = d.uniform_mean(0);
    const double lambda = (0.05 + 0.9 * rng.uniform01()) * mean;
    const double exact = exact_threshold(v, lambda);
    const double t = find_threshold_sampled(v, lambda, cfg.delta, cfg.samples, rng);
    const double h = excess_mean(v, t);
    runs[i].in_window = h >= lambda && h <= lambda + cfg.delta;
    runs[i].above_exact = runs[i].in_window && t > exact + kTieTolerance;
  });
  const auto wins = static_cast<double>(std::count_if(runs.begin(), runs.end(), [](const Run& r) { return r.in_window; }));
  const auto above =
      static_cast<double>(std::count_if(runs.begin(), runs.end(), [](const Run& r) { return r.above_exact; }));
  const double fraction = wins / static_cast<double>(cfg.trials);
  const double bound = find_threshold_success_bound(cfg.delta, cfg.samples);
  const std::string id = row_id(cfg.kind, 0);
  return {
      {id, master, cfg.n, 0, 0.0, cfg.delta, cfg.samples, "window_success_fraction", fraction, bound, fraction >= bound},
      {id, master, cfg.n, 0, 0.0, cfg.delta, cfg.samples, "t_above_exact_count", above, 0.0, above == 0.0},
  };
}

std::vector<ReportRow> run_optimizer_oracle(const ExperimentConfig& cfg) {
  if (cfg.n > 3 || cfg.m > 2) throw usage_error("optimizer-oracle instances are limited to n <= 3, m <= 2");
  const std::uint64_t master = *cfg.seed;
  std::vector<std::vector<ReportRow>> per(cfg.trials);
  parallel_for(cfg.trials, cfg.workers, [&](std::uint64_t i) {
    const std::uint64_t seed = derive_seed(master, i);
    Rng rng(seed);
    const int n = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(cfg.n)));
    const int m = static_cast<int>(rng.below(static_cast<std::uint64_t>(cfg.m) + 1));
    const double k = cfg.k ? *cfg.k : 0.05 + (n - 0.1) * rng.uniform01();
    const auto table = random_table(n, m, rng, i % 3 == 1);
    const auto d = random_distinguisher(n, m, rng, i % 2 == 1);
    const auto opt = optimal_distribution(d, table, k);
    const double gap = std::abs(opt.objective - brute_force_opt(d, table, k));
    const double kkt = kkt_residual(d, opt, k).worst();
    per[i] = {
        {row_id(cfg.kind, i), seed, n, m, k, 0.0, 0, "objective_gap", gap, 1e-6, gap <= 1e-6},
        {row_id(cfg.kind, i), seed, n, m, k, 0.0, 0, "kkt_residual", kkt, 1e-9, kkt <= 1e-9},
    };
  });
  std::vector<ReportRow> out;
  for (auto& rows : per) out.insert(out.end(), rows.begin(), rows.end());
  return out;
}

std::vector<double> g_grid() {
  std::vector<double> d;
  for (int i = 0; i <= 240; ++i) d.push_back(std::pow(10.0, -6.0 + 6.0 * i / 240.0));
  d.back() = 1.0;
  return d;
}

std::vector<ReportRow> run_g_properties(const ExperimentConfig& cfg) {
  constexpr double slack = 1e-10;
  const auto grid = g_grid();
  double decreasing = 0;
  double convex = 0;
  double ratio = 0;
  for (std::uint64_t ell = 2; ell <= 64; ell += 2) {
    std::vector<double> g;
    for (double d : grid) g.push_back(g_eval(d, ell));
    for (std::size_t j = 0; j + 1 < grid.size(); ++j)
      if (!(g[j + 1] < g[j])) ++decreasing;
    for (std::size_t j = 0; j + 2 < grid.size(); ++j) {
      // second difference in value units: how far the middle point sits above the chord
      const double w = (grid[j + 1] - grid[j]) / (grid[j + 2] - grid[j]);
      const double chord = g[j] + w * (g[j + 2] - g[j]);
      if (chord - g[j + 1] < -slack) ++convex;
    }
    const double half = static_cast<double>(ell) / 2.0;
    for (std::size_t a = 0; a < grid.size(); ++a)
      for (std::size_t b = a + 1; b < grid.size(); ++b)
        if (!(g[b] - g[a] * (1.0 - half * (grid[b] - grid[a])) > -slack)) ++ratio;
  }
  double h_floor = 0;
  for (int ai = 0; ai <= 99; ++ai) {
    const double a = 0.01 * (ai + 1);
    const auto ell_min = static_cast<std::uint64_t>(std::ceil(1.0 + 1.0 / a));
    for (std::uint64_t ell : {ell_min, ell_min + 1, 2 * ell_min, 10 * ell_min})
      for (int si = 1; si <= 1000; ++si) {
        const double s = si / 1000.0;
        if (h_eval(s, a, ell) < 1.0 + a - slack) ++h_floor;
      }
  }
  const std::string id = row_id(cfg.kind, 0);
  const std::uint64_t seed = cfg.seed.value_or(0);
  return {
      {id, seed, 0, 0, 0.0, 0.0, 64, "g_decreasing_violations", decreasing, 0.0, decreasing == 0},
      {id, seed, 0, 0, 0.0, 0.0, 64, "g_convexity_violations", convex, 0.0, convex == 0},
      {id, seed, 0, 0, 0.0, 0.0, 64, "g_ratio_violations", ratio, 0.0, ratio == 0},
      {id, seed, 0, 0, 0.0, 0.0, 0, "h_floor_violations", h_floor, 0.0, h_floor == 0},
  };
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(line);
  while (std::getline(in, cur, sep)) out.push_back(cur);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

template <class T>
void read_key(const nlohmann::json& j, const char* key, T& dst) {
  if (j.contains(key)) dst = j.at(key).get<T>();
}

template <class T>
void read_key(const nlohmann::json& j, const char* key, std::optional<T>& dst) {
  if (j.contains(key) && !j.at(key).is_null()) dst = j.at(key).get<T>();
}

}  // namespace

std::string suite_name(Suite s) {
  for (const auto& info : kSuites)
    if (info.suite == s) return info.name;
  throw usage_error("unknown suite");
}

Suite parse_suite(const std::string& name) {
  for (const auto& info : kSuites)
    if (name == info.name) return info.suite;
  throw usage_error("unknown experiment kind '" + name + "'");
}

bool suite_is_randomized(Suite s) {
  for (const auto& info : kSuites)
    if (info.suite == s) return info.randomized;
  return true;
}

std::string plot_axis(Suite s) {
  return s == Suite::predictor_bound ? "ell_or_l" : "epsilon";
}

void ExperimentConfig::validate() const {
  if (kind == Suite::decoder) {
    // The decoder works on a codeword oracle, never on an explicit table.
    if (n < 1 || n > kMaxBits) throw usage_error("decoder needs 1 <= n <= 64");
  } else if (n < 1 || m < 0 || n + m > kMaxTableBits) {
    throw usage_error("sizes must satisfy n >= 1, m >= 0, n + m <= 24");
  }
  if (trials < 1) throw usage_error("trials must be at least 1");
  if (suite_is_randomized(kind) && !seed) throw usage_error(suite_name(kind) + " is randomized and needs a seed");
  if (kind == Suite::condenser) {
    const double kk = k.value_or(5.0);
    if (kk < 1 || kk > 8 || n > 14 || kk > n) throw usage_error("condenser runs need 1 <= k <= 8 and k <= n <= 14");
  }
  if (kind == Suite::predictor_bound && n < 2) throw usage_error("predictor-bound needs n >= 2");
  if (kind == Suite::threshold && !(delta > 0.0 && delta <= 0.25)) throw usage_error("delta must lie in (0, 1/4]");
  if (kind == Suite::decoder && !(answer_rate > 0.0 && answer_rate <= 1.0))
    throw usage_error("decoder answer rate must lie in (0, 1]");
}

ExperimentConfig config_from_text(const std::string& text) {
  static const char* known[] = {"kind",   "n",       "m",     "k",          "epsilon", "delta",       "samples",
                                "trials", "seed",    "output", "format",    "delta_gap", "q",         "mc_trials",
                                "margins", "answer_rate", "workers"};
  ExperimentConfig cfg;
  try {
    const auto j = nlohmann::json::parse(text);
    if (!j.is_object()) throw usage_error("config must be a JSON object");
    for (const auto& [key, value] : j.items()) {
      (void)value;
      if (std::find_if(std::begin(known), std::end(known), [&](const char* k) { return key == k; }) ==
          std::end(known))
        throw usage_error("unknown config key '" + key + "'");
    }
    cfg.kind = parse_suite(j.at("kind").get<std::string>());
    read_key(j, "n", cfg.n);
    read_key(j, "m", cfg.m);
    read_key(j, "k", cfg.k);
    read_key(j, "epsilon", cfg.epsilon);
    read_key(j, "delta", cfg.delta);
    read_key(j, "samples", cfg.samples);
    read_key(j, "trials", cfg.trials);
    read_key(j, "seed", cfg.seed);
    read_key(j, "output", cfg.output);
    if (j.contains("format")) {
      const auto f = j.at("format").get<std::string>();
      if (f != "csv" && f != "plot") throw usage_error("format must be csv or plot");
      cfg.format = f == "csv" ? ReportFormat::csv : ReportFormat::plot;
    }
    read_key(j, "delta_gap", cfg.delta_gap);
    read_key(j, "q", cfg.q);
    read_key(j, "mc_trials", cfg.mc_trials);
    read_key(j, "margins", cfg.margins);
    read_key(j, "answer_rate", cfg.answer_rate);
    read_key(j, "workers", cfg.workers);
  } catch (const nlohmann::json::exception& e) {
    throw usage_error(std::string("malformed config: ") + e.what());
  }
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return config_from_text(buf.str());
}

std::vector<ReportRow> run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  switch (cfg.kind) {
    case Suite::predictor_bound: return run_predictor_bound(cfg);
    case Suite::condenser: return run_condenser(cfg);
    case Suite::decoder: return run_decoder(cfg);
    case Suite::threshold: return run_threshold(cfg);
    case Suite::optimizer_oracle: return run_optimizer_oracle(cfg);
    case Suite::g_properties: return run_g_properties(cfg);
  }
  throw usage_error("unknown suite");
}

bool all_pass(const std::vector<ReportRow>& rows) {
  return std::all_of(rows.begin(), rows.end(), [](const ReportRow& r) { return r.pass; });
}

std::string csv_header() { return "experiment_id,seed,n,m,k,epsilon,ell_or_l,metric,measured,bound,pass"; }

std::string format_csv(const std::vector<ReportRow>& rows) {
  std::string out = csv_header() + "\n";
  for (const auto& r : rows) {
    if (r.experiment_id.find(',') != std::string::npos || r.metric.find(',') != std::string::npos)
      throw usage_error("report identifiers may not contain commas");
    out += r.experiment_id + "," + std::to_string(r.seed) + "," + std::to_string(r.n) + "," + std::to_string(r.m) +
           "," + format_double(r.k) + "," + format_double(r.epsilon) + "," + std::to_string(r.ell_or_l) + "," +
           r.metric + "," + format_double(r.measured) + "," + format_double(r.bound) + "," +
           (r.pass ? "true" : "false") + "\n";
  }
  return out;
}

std::vector<ReportRow> parse_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != csv_header()) throw usage_error("report does not start with the CSV header");
  std::vector<ReportRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split(line, ',');
    if (f.size() != 11) throw usage_error("report line has " + std::to_string(f.size()) + " fields");
    try {
      ReportRow r;
      r.experiment_id = f[0];
      r.seed = std::stoull(f[1]);
      r.n = std::stoi(f[2]);
      r.m = std::stoi(f[3]);
      r.k = std::stod(f[4]);
      r.epsilon = std::stod(f[5]);
      r.ell_or_l = std::stoull(f[6]);
      r.metric = f[7];
      r.measured = std::stod(f[8]);
      r.bound = std::stod(f[9]);
      if (f[10] != "true" && f[10] != "false") throw usage_error("pass flag must be true or false");
      r.pass = f[10] == "true";
      rows.push_back(std::move(r));
    } catch (const std::logic_error& e) {
      throw usage_error("malformed report line '" + line + "': " + e.what());
    }
  }
  return rows;
}

std::vector<ReportRow> read_report(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_csv(buf.str());
}

}  // namespace celab
