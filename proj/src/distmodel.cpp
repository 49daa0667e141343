#include "celab/distmodel.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "json.hpp"

#include "celab/errors.hpp"

namespace celab {

namespace {

void check_shape(int n, int m) {
  if (n < 0 || m < 0 || n + m > kMaxTableBits)
    throw usage_error("table shape n=" + std::to_string(n) + ", m=" + std::to_string(m) +
                      " outside the n+m <= 24 cap");
}

std::size_t cells(int n, int m) { return std::size_t{1} << (n + m); }

double total(std::span<const double> v) {
  return std::accumulate(v.begin(), v.end(), 0.0);
}

}  // namespace

JointTable::JointTable(int n, int m, std::vector<double> probs)
    : n_(n), m_(m), probs_(std::move(probs)) {
  check_shape(n, m);
  if (probs_.size() != cells(n, m))
    throw usage_error("table has " + std::to_string(probs_.size()) + " entries, expected " +
                      std::to_string(cells(n, m)));
  for (double p : probs_)
    if (!(p >= 0.0) || p > 1.0 + kMassTolerance) throw usage_error("table entry outside [0, 1]");
  const double s = total(probs_);
  if (std::abs(s - 1.0) > kMassTolerance)
    throw usage_error("table mass " + std::to_string(s) + " differs from 1");
  cdf_.resize(probs_.size());
  std::partial_sum(probs_.begin(), probs_.end(), cdf_.begin());
}

JointTable JointTable::normalized(int n, int m, std::vector<double> weights) {
  const double s = total(weights);
  if (!(s > 0.0)) throw usage_error("cannot normalize weights with non-positive total");
  for (double& w : weights) w /= s;
  return JointTable(n, m, std::move(weights));
}

JointTable JointTable::product(std::span<const double> px, std::span<const double> pz) {
  const int n = std::countr_zero(px.size());
  const int m = std::countr_zero(pz.size());
  if ((std::size_t{1} << n) != px.size() || (std::size_t{1} << m) != pz.size())
    throw usage_error("marginal lengths must be powers of two");
  std::vector<double> p(px.size() * pz.size());
  for (std::size_t x = 0; x < px.size(); ++x)
    for (std::size_t z = 0; z < pz.size(); ++z) p[(x << m) | z] = px[x] * pz[z];
  return JointTable(n, m, std::move(p));
}

std::vector<double> JointTable::z_marginal() const {
  std::vector<double> pz(z_count(), 0.0);
  for (std::uint64_t x = 0; x < x_count(); ++x)
    for (std::uint64_t z = 0; z < z_count(); ++z) pz[z] += at(x, z);
  return pz;
}

std::vector<double> JointTable::x_marginal() const {
  std::vector<double> px(x_count(), 0.0);
  for (std::uint64_t x = 0; x < x_count(); ++x)
    for (std::uint64_t z = 0; z < z_count(); ++z) px[x] += at(x, z);
  return px;
}

std::pair<std::uint64_t, std::uint64_t> JointTable::sample(Rng& rng) const {
  const double u = rng.uniform01() * cdf_.back();
  // The first cell whose cumulative mass exceeds u always has positive mass.
  auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
  if (it == cdf_.end()) it = std::prev(cdf_.end());
  const auto idx = static_cast<std::uint64_t>(it - cdf_.begin());
  return {idx >> m_, idx & (z_count() - 1)};
}

ConditionalTable::ConditionalTable(int n, int m, std::vector<double> pz, std::vector<double> cond)
    : n_(n), m_(m), pz_(std::move(pz)), cond_(std::move(cond)) {
  check_shape(n, m);
  if (pz_.size() != (std::size_t{1} << m) || cond_.size() != cells(n, m))
    throw usage_error("conditional table has the wrong shape");
  if (std::abs(total(pz_) - 1.0) > kMassTolerance) throw usage_error("Z marginal does not sum to 1");
  const std::uint64_t nx = std::uint64_t{1} << n;
  for (std::uint64_t z = 0; z < pz_.size(); ++z) {
    if (pz_[z] < 0.0) throw usage_error("negative Z probability");
    if (pz_[z] == 0.0) continue;
    double s = 0.0;
    for (std::uint64_t x = 0; x < nx; ++x) {
      const double p = at(x, z);
      if (p < 0.0) throw usage_error("negative conditional probability");
      s += p;
    }
    if (std::abs(s - 1.0) > kMassTolerance)
      throw usage_error("conditional law for z=" + std::to_string(z) + " does not sum to 1");
  }
}

double ConditionalTable::max_prob(std::uint64_t z) const {
  double best = 0.0;
  for (std::uint64_t x = 0; x < (std::uint64_t{1} << n_); ++x) best = std::max(best, at(x, z));
  return best;
}

JointTable ConditionalTable::joint() const {
  std::vector<double> p(cond_.size());
  const std::uint64_t nz = std::uint64_t{1} << m_;
  for (std::size_t i = 0; i < p.size(); ++i) p[i] = cond_[i] * pz_[i & (nz - 1)];
  return JointTable(n_, m_, std::move(p));
}

double min_entropy(std::span<const double> p) {
  if (p.empty()) throw usage_error("min-entropy of an empty distribution");
  const double best = *std::max_element(p.begin(), p.end());
  if (!(best > 0.0)) throw usage_error("min-entropy of a distribution with no mass");
  return -std::log2(best);
}

double unbounded_guess_prob(const JointTable& t) {
  // sum_z P(z) max_x P(x|z) = sum_z max_x P(x, z); zero-mass z contribute nothing.
  double s = 0.0;
  for (std::uint64_t z = 0; z < t.z_count(); ++z) {
    double best = 0.0;
    for (std::uint64_t x = 0; x < t.x_count(); ++x) best = std::max(best, t.at(x, z));
    s += best;
  }
  return s;
}

double unbounded_guess_prob(const ConditionalTable& t) {
  double s = 0.0;
  for (std::uint64_t z = 0; z < t.z_marginal().size(); ++z)
    if (t.pz(z) > 0.0) s += t.pz(z) * t.max_prob(z);
  return s;
}

double avg_min_entropy(const JointTable& t) { return -std::log2(unbounded_guess_prob(t)); }
double avg_min_entropy(const ConditionalTable& t) { return -std::log2(unbounded_guess_prob(t)); }

double stat_distance(const JointTable& a, const JointTable& b) {
  if (a.n() != b.n() || a.m() != b.m()) throw usage_error("stat_distance: shape mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.probs().size(); ++i) s += std::abs(a.probs()[i] - b.probs()[i]);
  return 0.5 * s;
}

std::pair<BitVec, std::uint64_t> PlantedSource::sample(Rng& rng) const {
  const auto z = rng.below(table.z_count());
  const auto& sup = supports[static_cast<std::size_t>(z)];
  const auto x = sup[static_cast<std::size_t>(rng.below(sup.size()))];
  return {BitVec(table.n(), x), z};
}

PlantedSource planted_source(int n, int k, int m, Rng& rng) {
  check_shape(n, m);
  if (k < 0 || k > n) throw usage_error("planted source needs 0 <= k <= n");
  const std::uint64_t nx = std::uint64_t{1} << n;
  const std::uint64_t nz = std::uint64_t{1} << m;
  const std::uint64_t size = std::uint64_t{1} << k;
  PlantedSource src;
  src.k = k;
  src.supports.resize(nz);
  std::vector<double> p(nx * nz, 0.0);
  std::vector<std::uint64_t> perm(nx);
  const double mass = 1.0 / static_cast<double>(size * nz);
  for (std::uint64_t z = 0; z < nz; ++z) {
    std::iota(perm.begin(), perm.end(), std::uint64_t{0});
    // Partial Fisher-Yates: the first `size` slots are a uniform subset.
    for (std::uint64_t i = 0; i < size; ++i) std::swap(perm[i], perm[i + rng.below(nx - i)]);
    auto& sup = src.supports[z];
    sup.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(size));
    std::sort(sup.begin(), sup.end());
    for (auto x : sup) p[(x << m) | z] = mass;
  }
  src.table = JointTable(n, m, std::move(p));
  return src;
}

void to_json(nlohmann::json& j, const JointTable& t) {
  j = nlohmann::json{{"n", t.n()}, {"m", t.m()}, {"probs", t.probs()}};
}

void from_json(const nlohmann::json& j, JointTable& t) {
  try {
    t = JointTable(j.at("n").get<int>(), j.at("m").get<int>(), j.at("probs").get<std::vector<double>>());
  } catch (const nlohmann::json::exception& e) {
    throw usage_error(std::string("malformed table document: ") + e.what());
  }
}

std::string table_to_text(const JointTable& v) { return nlohmann::json(v).dump(1); }

JointTable table_from_text(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw usage_error(std::string("cannot parse table document: ") + e.what());
  }
  return j.get<JointTable>();
}

void save_table(const JointTable& t, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw io_error("cannot open " + path + " for writing");
  out << table_to_text(t) << '\n';
  if (!out) throw io_error("write to " + path + " failed");
}

JointTable load_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw usage_error("cannot parse " + path + ": " + e.what());
  }
  return j.get<JointTable>();
}

}  // namespace celab
