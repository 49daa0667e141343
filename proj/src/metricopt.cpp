#include "celab/metricopt.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "json.hpp"

#include "celab/errors.hpp"

namespace celab {

namespace {

// The values of one slice D(., z), sorted in decreasing order, with prefix sums.
// excess_mean is piecewise linear in t with breaks at the values; inverting it
// is a search over prefix sums.
class SortedSlice {
 public:
  explicit SortedSlice(std::span<const double> values) : v_(values.begin(), values.end()) {
    std::stable_sort(v_.begin(), v_.end(), std::greater<>());
    s_.assign(v_.size() + 1, 0.0);
    for (std::size_t i = 0; i < v_.size(); ++i) s_[i + 1] = s_[i] + v_[i];
  }

  std::size_t size() const { return v_.size(); }
  double max() const { return v_.front(); }
  double mean() const { return s_.back() / static_cast<double>(v_.size()); }

  // Excess mean attained at t = -1.
  double lambda_cap() const { return mean() + 1.0; }

  double threshold(double lambda) const {
    const auto n = static_cast<double>(v_.size());
    if (!(lambda > 0.0) || lambda > lambda_cap() + kTieTolerance)
      throw domain_error("threshold level " + std::to_string(lambda) + " outside (0, " +
                         std::to_string(lambda_cap()) + "]");
    // Smallest j with (S_j - j * v_{j+1}) / N >= lambda, taking v_{N+1} = -1.
    std::size_t lo = 1;
    std::size_t hi = v_.size();
    while (lo < hi) {
      const std::size_t j = (lo + hi) / 2;
      if (level_below(j) >= lambda * n)
        hi = j;
      else
        lo = j + 1;
    }
    const std::size_t j = lo;
    double t = (s_[j] - n * lambda) / static_cast<double>(j);
    const double above = v_[j - 1];
    const double below = j < v_.size() ? v_[j] : -1.0;
    if (std::abs(t - above) <= kTieTolerance) t = above;
    if (std::abs(t - below) <= kTieTolerance) t = below;
    return std::clamp(t, -1.0, above);
  }

  std::size_t count_above(double t) const {
    return static_cast<std::size_t>(
        std::partition_point(v_.begin(), v_.end(), [&](double x) { return x > t + kTieTolerance; }) -
        v_.begin());
  }

  std::size_t count_at_least(double t) const {
    return static_cast<std::size_t>(
        std::partition_point(v_.begin(), v_.end(), [&](double x) { return x >= t - kTieTolerance; }) -
        v_.begin());
  }

  // Excess means at which the threshold crosses one of the distinct values.
  void append_breakpoints(std::vector<double>& out) const {
    const auto n = static_cast<double>(v_.size());
    out.push_back(0.0);
    for (std::size_t c = 1; c <= v_.size(); ++c) {
      const bool group_end = c == v_.size() || v_[c] < v_[c - 1];
      if (!group_end || v_[c - 1] == v_.front()) continue;
      out.push_back((s_[c] - static_cast<double>(c) * v_[c - 1]) / n);
    }
  }

 private:
  // N * excess_mean at the value just below the j-th largest.
  double level_below(std::size_t j) const {
    const double next = j < v_.size() ? v_[j] : -1.0;
    return s_[j] - static_cast<double>(j) * next;
  }

  std::vector<double> v_;
  std::vector<double> s_;
};

std::vector<SortedSlice> slices_of(const Distinguisher& d) {
  std::vector<SortedSlice> out;
  out.reserve(d.z_count());
  for (std::uint64_t z = 0; z < d.z_count(); ++z) out.emplace_back(d.slice(z));
  return out;
}

void check_same_shape(const Distinguisher& d, const JointTable& t) {
  if (d.n() != t.n() || d.m() != t.m())
    throw usage_error("distinguisher and table shapes differ");
}

void check_entropy_target(int n, double k) {
  if (!(k > 0.0) || !(k < static_cast<double>(n)))
    throw domain_error("target entropy " + std::to_string(k) + " outside (0, " + std::to_string(n) + ")");
}

}  // namespace

Distinguisher::Distinguisher(int n, int m, std::vector<double> values, double range_max)
    : n_(n), m_(m), range_max_(range_max), values_(std::move(values)) {
  if (n < 0 || m < 0 || n + m > kMaxTableBits) throw usage_error("distinguisher shape outside the n+m <= 24 cap");
  if (!(range_max >= 1.0 && range_max <= 2.0)) throw usage_error("distinguisher range must be [0,1] or [0,2]");
  if (values_.size() != (std::size_t{1} << (n + m)))
    throw usage_error("distinguisher has " + std::to_string(values_.size()) + " values, expected " +
                      std::to_string(std::size_t{1} << (n + m)));
  for (double v : values_)
    if (!(v >= 0.0 && v <= range_max_)) throw usage_error("distinguisher value outside its range");
}

Distinguisher Distinguisher::from_function(int n, int m,
                                           const std::function<double(std::uint64_t, std::uint64_t)>& f,
                                           double range_max) {
  if (n < 0 || m < 0 || n + m > kMaxTableBits) throw usage_error("distinguisher shape outside the n+m <= 24 cap");
  std::vector<double> v(std::size_t{1} << (n + m));
  for (std::uint64_t x = 0; x < (std::uint64_t{1} << n); ++x)
    for (std::uint64_t z = 0; z < (std::uint64_t{1} << m); ++z) v[(x << m) | z] = f(x, z);
  return Distinguisher(n, m, std::move(v), range_max);
}

std::vector<double> Distinguisher::slice(std::uint64_t z) const {
  std::vector<double> out(x_count());
  for (std::uint64_t x = 0; x < x_count(); ++x) out[x] = at(x, z);
  return out;
}

double Distinguisher::uniform_mean(std::uint64_t z) const {
  double s = 0.0;
  for (std::uint64_t x = 0; x < x_count(); ++x) s += at(x, z);
  return s / static_cast<double>(x_count());
}

double Distinguisher::expectation(const JointTable& t) const {
  if (t.n() != n_ || t.m() != m_) throw usage_error("distinguisher and table shapes differ");
  double s = 0.0;
  for (std::size_t i = 0; i < values_.size(); ++i) s += values_[i] * t.probs()[i];
  return s;
}

double Distinguisher::expectation(const ConditionalTable& t) const {
  if (t.n() != n_ || t.m() != m_) throw usage_error("distinguisher and table shapes differ");
  double s = 0.0;
  for (std::uint64_t z = 0; z < z_count(); ++z) {
    if (t.pz(z) == 0.0) continue;
    double inner = 0.0;
    for (std::uint64_t x = 0; x < x_count(); ++x) inner += at(x, z) * t.at(x, z);
    s += t.pz(z) * inner;
  }
  return s;
}

double excess_mean(std::span<const double> values, double t) {
  double s = 0.0;
  for (double v : values) s += std::max(v - t, 0.0);
  return s / static_cast<double>(values.size());
}

double exact_threshold(std::span<const double> values, double lambda_norm) {
  if (values.empty()) throw usage_error("threshold of an empty slice");
  return SortedSlice(values).threshold(lambda_norm);
}

double exact_threshold(const Distinguisher& d, std::uint64_t z, double lambda_norm) {
  if (z >= d.z_count()) throw usage_error("z out of range");
  return exact_threshold(d.slice(z), lambda_norm);
}

ThresholdProfile threshold_profile(const Distinguisher& d, double lambda_norm) {
  ThresholdProfile p;
  p.lambda_norm = lambda_norm;
  for (std::uint64_t z = 0; z < d.z_count(); ++z) p.t.push_back(exact_threshold(d, z, lambda_norm));
  return p;
}

double entropy_curve(const Distinguisher& d, std::span<const double> z_marginal, double lambda_norm) {
  if (z_marginal.size() != d.z_count()) throw usage_error("Z marginal length mismatch");
  double s = 0.0;
  for (std::uint64_t z = 0; z < d.z_count(); ++z) {
    if (z_marginal[z] == 0.0) continue;
    const SortedSlice slice(d.slice(z));
    const double t = lambda_norm == 0.0 ? slice.max() : slice.threshold(lambda_norm);
    s += z_marginal[z] / static_cast<double>(slice.count_at_least(t));
  }
  return -std::log2(s);
}

OptimalDistribution optimal_distribution(const Distinguisher& d, const JointTable& table, double k) {
  check_same_shape(d, table);
  check_entropy_target(d.n(), k);
  const auto pz = table.z_marginal();
  const auto slices = slices_of(d);
  const std::uint64_t nz = d.z_count();
  const double budget = std::exp2(-k);

  struct Level {
    std::vector<double> t;
    std::vector<std::size_t> gt, ge;
    double a_min = 0.0;
    double a_max = 0.0;
  };
  auto evaluate = [&](double lambda) {
    Level lv;
    for (std::uint64_t z = 0; z < nz; ++z) {
      const auto& s = slices[z];
      const double t = lambda == 0.0 ? s.max() : s.threshold(lambda);
      const std::size_t gt = s.count_above(t);
      const std::size_t ge = s.count_at_least(t);
      lv.t.push_back(t);
      lv.gt.push_back(gt);
      lv.ge.push_back(ge);
      lv.a_min += pz[z] / static_cast<double>(ge);
      lv.a_max += gt == 0 ? pz[z] : pz[z] / static_cast<double>(gt);
    }
    return lv;
  };

  // The mass profile only changes where some threshold crosses a value of D,
  // so the entropy target is met at the first such level whose minimal
  // conditional peaks fit within the budget.
  std::vector<double> levels;
  for (const auto& s : slices) s.append_breakpoints(levels);
  std::sort(levels.begin(), levels.end());
  levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
  std::size_t lo = 0;
  std::size_t hi = levels.size() - 1;
  while (lo < hi) {
    const std::size_t mid = (lo + hi) / 2;
    if (evaluate(levels[mid]).a_min <= budget * (1.0 + kTieTolerance))
      hi = mid;
    else
      lo = mid + 1;
  }
  const double lambda = levels[lo];
  const Level lv = evaluate(lambda);

  const double span = lv.a_max - lv.a_min;
  const double theta = span > 0.0 ? std::clamp((budget - lv.a_min) / span, 0.0, 1.0) : 0.0;

  OptimalDistribution out;
  out.profile.t = lv.t;
  out.profile.lambda_norm = lambda;
  out.y_max.resize(nz);
  std::vector<double> cond(std::size_t{1} << (d.n() + d.m()), 0.0);
  for (std::uint64_t z = 0; z < nz; ++z) {
    const double gt = static_cast<double>(lv.gt[z]);
    const double ge = static_cast<double>(lv.ge[z]);
    const double a_lo = 1.0 / ge;
    const double a_hi = lv.gt[z] == 0 ? 1.0 : 1.0 / gt;
    const double a = pz[z] > 0.0 ? a_lo + theta * (a_hi - a_lo) : a_lo;
    out.y_max[z] = a;
    const double t = lv.t[z];
    // With nothing strictly above the threshold the boundary itself must
    // carry the peak, so it is filled greedily at height a in x order.
    const double share = lv.gt[z] == 0 ? 0.0 : (1.0 - gt * a) / (ge - gt);
    double left = 1.0;
    for (std::uint64_t x = 0; x < d.x_count(); ++x) {
      const double v = d.at(x, z);
      double p = 0.0;
      if (v > t + kTieTolerance) {
        p = a;
      } else if (v >= t - kTieTolerance) {
        p = lv.gt[z] == 0 ? std::min(a, left) : share;
        left -= p;
      }
      cond[(x << d.m()) | z] = std::max(p, 0.0);
    }
  }
  out.y = ConditionalTable(d.n(), d.m(), pz, std::move(cond));
  out.objective = d.expectation(out.y);
  return out;
}

double KktResidual::worst() const {
  return std::max({zero_below, peak_above, over_peak, level, entropy});
}

KktResidual kkt_residual(const Distinguisher& d, const OptimalDistribution& opt, double k) {
  KktResidual r;
  const auto& y = opt.y;
  for (std::uint64_t z = 0; z < d.z_count(); ++z) {
    if (y.pz(z) == 0.0) continue;
    const double t = opt.profile.t[z];
    const double peak = opt.y_max[z];
    for (std::uint64_t x = 0; x < d.x_count(); ++x) {
      const double v = d.at(x, z);
      const double p = y.at(x, z);
      if (v < t - kTieTolerance) r.zero_below = std::max(r.zero_below, p);
      if (v > t + kTieTolerance) r.peak_above = std::max(r.peak_above, std::abs(p - peak));
      r.over_peak = std::max(r.over_peak, p - peak);
    }
    r.level = std::max(r.level, std::abs(excess_mean(d.slice(z), t) - opt.profile.lambda_norm));
  }
  r.entropy = std::abs(avg_min_entropy(y) - k);
  return r;
}

double brute_force_opt(const Distinguisher& d, const JointTable& table, double k) {
  check_same_shape(d, table);
  if (d.n() > 3 || d.m() > 2) throw usage_error("brute_force_opt is limited to n <= 3, m <= 2");
  if (k < 0.0 || k > static_cast<double>(d.n())) throw domain_error("target entropy outside [0, n]");
  const auto pz = table.z_marginal();
  const std::size_t nx = d.x_count();
  const double budget = std::exp2(-k);

  // For a fixed peak a, the best conditional law for one z puts a on the
  // top floor(1/a) values and the rest on the next one; that value is
  // concave and piecewise linear in a with slope S_j - j * v_{j+1} on
  // [1/(j+1), 1/j]. The program then is a fractional knapsack over these
  // segments, starting from the uniform law for every z.
  struct Segment {
    double slope;
    double cost;
  };
  std::vector<Segment> segments;
  double value = 0.0;
  double spent = 0.0;
  for (std::uint64_t z = 0; z < d.z_count(); ++z) {
    if (pz[z] == 0.0) continue;
    auto v = d.slice(z);
    std::sort(v.begin(), v.end(), std::greater<>());
    double prefix = 0.0;
    for (double x : v) prefix += x;
    value += pz[z] * prefix / static_cast<double>(nx);
    spent += pz[z] / static_cast<double>(nx);
    prefix = 0.0;
    for (std::size_t j = 1; j < nx; ++j) {
      prefix += v[j - 1];
      const double len = 1.0 / static_cast<double>(j) - 1.0 / static_cast<double>(j + 1);
      segments.push_back({prefix - static_cast<double>(j) * v[j], pz[z] * len});
    }
  }
  std::stable_sort(segments.begin(), segments.end(),
                   [](const Segment& a, const Segment& b) { return a.slope > b.slope; });
  double left = budget - spent;
  for (const auto& s : segments) {
    if (left <= 0.0 || s.slope <= 0.0) break;
    const double take = std::min(left, s.cost);
    value += take * s.slope;
    left -= take;
  }
  return value;
}

Distinguisher modified_distinguisher(const Distinguisher& d, const ThresholdProfile& profile) {
  if (profile.t.size() != d.z_count()) throw usage_error("threshold profile does not cover every z");
  std::vector<double> v(d.values().size());
  for (std::uint64_t x = 0; x < d.x_count(); ++x)
    for (std::uint64_t z = 0; z < d.z_count(); ++z) {
      const double raw = std::max(d.at(x, z) - profile.t[z], 0.0);
      if (raw > 2.0 + kTieTolerance) throw usage_error("threshold below -1");
      v[(x << d.m()) | z] = std::min(raw, 2.0);
    }
  return Distinguisher(d.n(), d.m(), std::move(v), 2.0);
}

double advantage(const Distinguisher& d, const JointTable& t, double k) {
  return d.expectation(t) - optimal_distribution(d, t, k).objective;
}

double find_threshold_sampled(std::span<const double> values, double lambda_norm, double delta,
                              std::uint64_t samples, Rng& rng) {
  if (values.empty()) throw usage_error("threshold of an empty slice");
  if (!(lambda_norm > 0.0 && lambda_norm < 1.0)) throw usage_error("lambda must lie in (0, 1)");
  if (!(delta > 0.0 && delta <= 0.25)) throw usage_error("delta must lie in (0, 1/4]");
  if (samples == 0) throw usage_error("need at least one sample per round");
  const std::uint64_t size = values.size();
  double lo = -1.0;
  double hi = 1.0;
  double t = 0.0;
  do {
    t = 0.5 * (lo + hi);
    double sum = 0.0;
    for (std::uint64_t j = 0; j < samples; ++j) sum += std::max(values[rng.below(size)] - t, 0.0);
    const double estimate = sum / static_cast<double>(samples);
    if (estimate > lambda_norm + 2.0 * delta / 3.0)
      lo = t;
    else if (estimate < lambda_norm + delta / 3.0)
      hi = t;
    else
      return t;
  } while (hi - lo > delta / 12.0);
  if (t < -1.0 + delta / 12.0) t = -1.0;
  return t;
}

double find_threshold_success_bound(double delta, std::uint64_t samples) {
  return 1.0 - 2.0 * std::log2(12.0 / delta) * std::exp(-static_cast<double>(samples) * delta * delta / 3.0);
}

void to_json(nlohmann::json& j, const Distinguisher& d) {
  j = nlohmann::json{{"n", d.n()}, {"m", d.m()}, {"range_max", d.range_max()}, {"values", d.values()}};
}

void from_json(const nlohmann::json& j, Distinguisher& d) {
  try {
    d = Distinguisher(j.at("n").get<int>(), j.at("m").get<int>(), j.at("values").get<std::vector<double>>(),
                      j.value("range_max", 1.0));
  } catch (const nlohmann::json::exception& e) {
    throw usage_error(std::string("malformed distinguisher document: ") + e.what());
  }
}

std::string distinguisher_to_text(const Distinguisher& v) { return nlohmann::json(v).dump(1); }

Distinguisher distinguisher_from_text(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw usage_error(std::string("cannot parse distinguisher document: ") + e.what());
  }
  return j.get<Distinguisher>();
}

void save_distinguisher(const Distinguisher& d, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw io_error("cannot open " + path + " for writing");
  out << distinguisher_to_text(d) << '\n';
  if (!out) throw io_error("write to " + path + " failed");
}

Distinguisher load_distinguisher(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw usage_error("cannot parse " + path + ": " + e.what());
  }
  return j.get<Distinguisher>();
}

}  // namespace celab
