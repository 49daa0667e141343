#pragma once

#include <cstdint>
#include <optional>

#include "celab/bitlin.hpp"
#include "celab/distmodel.hpp"
#include "celab/metricopt.hpp"
#include "celab/rng.hpp"

namespace celab {

struct PredictorParams {
  std::uint64_t ell = 1;  // round budget, at least 1
};

// A guess of length n, or nullopt when every round rejected.
using PredictOutcome = std::optional<BitVec>;

// g(d) = (1 - (1 - d)^ell) / d, extended by g(0) = ell.
double g_eval(double d, std::uint64_t ell);

// h(s) = (1 - (1 - s)^ell) (1 + a / s).
double h_eval(double s, double a, std::uint64_t ell);

// Rejection sampler: up to ell rounds of x <- U, accepted with probability Dp(x, z) / 2.
PredictOutcome predictor_sample(std::uint64_t z, const Distinguisher& dp, const PredictorParams& params,
                                Rng& rng);

// Pr[predictor_sample(Z) = X] computed in closed form over the table.
double exact_success_prob(const JointTable& t, const Distinguisher& dp, std::uint64_t ell);

// Pr[predictor_sample(z) aborts] = (1 - E Dp(U, z) / 2)^ell.
double abort_probability(const Distinguisher& dp, std::uint64_t z, std::uint64_t ell);

struct AttackReport {
  double k = 0.0;
  double epsilon = 0.0;
  double lambda_norm = 0.0;
  std::uint64_t ell = 0;
  double success_exact = 0.0;
  double bound = 0.0;
  bool pass = false;
};

// Round budget ceil(2 * 2^(n-k) / epsilon).
std::uint64_t attack_round_budget(int n, double k, double epsilon);

// Success target 2^-k (1 + 2^(k-n) epsilon).
double attack_bound(int n, double k, double epsilon);

// Turns a distinguisher with advantage epsilon against every Y of entropy k
// into a predictor for X and reports its exact success against the target.
// `forced_epsilon` replaces the measured advantage for boundary experiments.
AttackReport theorem2_attack(const JointTable& t, const Distinguisher& d, double k,
                             std::optional<double> forced_epsilon = std::nullopt);

struct DegradationReport {
  double s1 = 0.0;
  double s2 = 0.0;
  double delta = 0.0;  // max_z E (D2 - D1)(U, z)
  bool ok = false;
};

// Compares the predictor built from d1 with one built from a pointwise larger d2.
DegradationReport approx_distinguisher_degradation(const JointTable& t, const Distinguisher& d1,
                                                   const Distinguisher& d2, std::uint64_t ell);

}  // namespace celab
