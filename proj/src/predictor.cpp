#include "celab/predictor.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "celab/errors.hpp"

namespace celab {

namespace {

void check_dp(const Distinguisher& dp) {
  if (dp.range_max() > 2.0) throw usage_error("predictor needs a distinguisher with range within [0, 2]");
}

void check_same_shape(const JointTable& t, const Distinguisher& d) {
  if (t.n() != d.n() || t.m() != d.m()) throw usage_error("distinguisher and table shapes differ");
}

}  // namespace

double g_eval(double d, std::uint64_t ell) {
  if (!(d >= 0.0 && d <= 1.0)) throw usage_error("g is defined on [0, 1]");
  if (ell == 0) throw usage_error("round budget must be at least 1");
  const auto l = static_cast<double>(ell);
  if (d == 0.0) return l;
  if (d == 1.0) return 1.0;
  return -std::expm1(l * std::log1p(-d)) / d;
}

double h_eval(double s, double a, std::uint64_t ell) {
  if (!(s > 0.0 && s <= 1.0)) throw usage_error("h is defined on (0, 1]");
  const double reach = s == 1.0 ? 1.0 : -std::expm1(static_cast<double>(ell) * std::log1p(-s));
  return reach * (1.0 + a / s);
}

PredictOutcome predictor_sample(std::uint64_t z, const Distinguisher& dp, const PredictorParams& params,
                                Rng& rng) {
  check_dp(dp);
  if (params.ell == 0) throw usage_error("round budget must be at least 1");
  if (z >= dp.z_count()) throw usage_error("z out of range");
  for (std::uint64_t round = 0; round < params.ell; ++round) {
    const std::uint64_t x = rng.below(dp.x_count());
    if (rng.uniform01() < dp.at(x, z) / 2.0) return BitVec(dp.n(), x);
  }
  return std::nullopt;
}

double exact_success_prob(const JointTable& t, const Distinguisher& dp, std::uint64_t ell) {
  check_dp(dp);
  check_same_shape(t, dp);
  const double scale = std::exp2(-dp.n() - 1);
  double total = 0.0;
  for (std::uint64_t z = 0; z < dp.z_count(); ++z) {
    double hit = 0.0;
    for (std::uint64_t x = 0; x < dp.x_count(); ++x) hit += t.at(x, z) * dp.at(x, z);
    if (hit == 0.0) continue;
    total += scale * g_eval(std::min(dp.uniform_mean(z) / 2.0, 1.0), ell) * hit;
  }
  return total;
}

double abort_probability(const Distinguisher& dp, std::uint64_t z, std::uint64_t ell) {
  check_dp(dp);
  if (z >= dp.z_count()) throw usage_error("z out of range");
  const double accept = std::min(dp.uniform_mean(z) / 2.0, 1.0);
  return std::pow(1.0 - accept, static_cast<double>(ell));
}

std::uint64_t attack_round_budget(int n, double k, double epsilon) {
  if (!(epsilon > 0.0)) throw hypothesis_error("round budget needs a positive advantage");
  const double ell = std::ceil(2.0 * std::exp2(static_cast<double>(n) - k) / epsilon);
  if (!(ell < 0x1.0p63)) throw usage_error("round budget overflows");
  return static_cast<std::uint64_t>(ell);
}

double attack_bound(int n, double k, double epsilon) {
  return std::exp2(-k) * (1.0 + std::exp2(k - static_cast<double>(n)) * epsilon);
}

AttackReport theorem2_attack(const JointTable& t, const Distinguisher& d, double k,
                             std::optional<double> forced_epsilon) {
  check_same_shape(t, d);
  const auto opt = optimal_distribution(d, t, k);
  AttackReport r;
  r.k = k;
  r.epsilon = forced_epsilon ? *forced_epsilon : d.expectation(t) - opt.objective;
  if (!(r.epsilon > 0.0))
    throw hypothesis_error("distinguisher has no positive advantage (" + std::to_string(r.epsilon) +
                           ") over entropy-" + std::to_string(k) + " distributions");
  r.lambda_norm = opt.profile.lambda_norm;
  r.ell = attack_round_budget(d.n(), k, r.epsilon);
  const auto dp = modified_distinguisher(d, opt.profile);
  r.success_exact = exact_success_prob(t, dp, r.ell);
  r.bound = attack_bound(d.n(), k, r.epsilon);
  r.pass = r.success_exact >= r.bound;
  return r;
}

DegradationReport approx_distinguisher_degradation(const JointTable& t, const Distinguisher& d1,
                                                   const Distinguisher& d2, std::uint64_t ell) {
  check_same_shape(t, d1);
  check_same_shape(t, d2);
  DegradationReport r;
  for (std::size_t i = 0; i < d1.values().size(); ++i)
    if (d2.values()[i] < d1.values()[i] - kTieTolerance)
      throw usage_error("second distinguisher must dominate the first pointwise");
  for (std::uint64_t z = 0; z < d1.z_count(); ++z)
    r.delta = std::max(r.delta, d2.uniform_mean(z) - d1.uniform_mean(z));
  r.s1 = exact_success_prob(t, d1, ell);
  r.s2 = exact_success_prob(t, d2, ell);
  const double factor = 1.0 - static_cast<double>(ell) * r.delta / 2.0;
  r.ok = r.s2 >= factor * r.s1 * (1.0 - 1e-12);
  return r;
}

}  // namespace celab
