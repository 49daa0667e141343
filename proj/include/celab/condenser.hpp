#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "celab/bitlin.hpp"
#include "celab/distmodel.hpp"
#include "celab/hadamard.hpp"
#include "celab/rng.hpp"

namespace celab {

// K = R x for a k x n matrix R.
BitVec gl_condense(const BitVec& x, const BitMatrix& r);

// Predictor of the key R x from (z, R). Counts its own invocations; a single
// instance must not be shared between threads.
class KeyAdversary {
 public:
  explicit KeyAdversary(int k);
  virtual ~KeyAdversary() = default;

  int key_bits() const { return k_; }
  BitVec guess(std::uint64_t z, const BitMatrix& r, Rng& rng) const;
  // Same call on the packed rows of a k x n matrix; returns the packed key.
  std::uint64_t guess_word(std::uint64_t z, const std::uint64_t* rows, int n, Rng& rng) const {
    ++calls_;
    return do_guess(z, rows, n, rng);
  }
  std::uint64_t invocations() const { return calls_; }

 protected:
  virtual std::uint64_t do_guess(std::uint64_t z, const std::uint64_t* rows, int n, Rng& rng) const = 0;

 private:
  int k_;
  mutable std::uint64_t calls_ = 0;
};

using AdversaryPtr = std::shared_ptr<const KeyAdversary>;

// With probability q answers R x for the x recorded under z (if any), else a
// uniform k-bit string. Advantage on recorded pairs: q + (1 - q) 2^-k.
AdversaryPtr planted_key_adversary(int k, std::vector<std::optional<BitVec>> secret_by_z, double q);

// q giving a planted adversary the overall advantage `target`.
double planted_q_for_advantage(int k, double target);

// Flips a fair coin per call: defers to `inner` or answers uniformly.
AdversaryPtr dummy_coin_wrap(AdversaryPtr inner);

// Empirical Pr_R[A(z, R) = R x] over `samples` fresh matrices.
double estimate_key_success(const KeyAdversary& a, std::uint64_t z, const BitVec& x, std::uint64_t samples,
                            Rng& rng);

// Oracle for bit i (1-based) of the key given the first i-1 rows and key
// bits: each query r completes R with fresh random rows after row i, runs
// the adversary, and answers its bit i when its first i-1 bits agree with
// the prefix, else erases.
ErasureOracle prefix_predictor(AdversaryPtr a, std::uint64_t z, int i, const BitMatrix& r_prefix,
                               const BitVec& a_prefix, int n, double delta);

struct ReductionParams {
  int k = 1;
  int delta_gap = 3;

  void validate() const;
  // Per-bit advantage of a good prefix: (gap - 2) ln 2 / (2k).
  double delta() const;
  // Iteration budget ceil(2k / delta).
  std::uint64_t iterations() const;
  // List parameter for bit i from (e + c) / (c - e)^2 <= 2^i / delta^2.
  int list_size(int i, int n) const;
};

struct ReductionOutcome {
  std::optional<BitVec> x;
  std::uint64_t iterations = 0;
  std::uint64_t decodes = 0;
  std::uint64_t oracle_queries = 0;
};

ReductionOutcome reduction_B(const AdversaryPtr& a, std::uint64_t z, const std::function<bool(const BitVec&)>& eq,
                             const ReductionParams& params, int n, Rng& rng);

// Worst-case adversary invocations of one reduction_B run.
std::uint64_t reduction_call_ceiling(const ReductionParams& params, int n);

struct CondenserConfig {
  int n = 10;
  int k = 5;
  int m = 4;
  int delta_gap = 3;
  std::optional<double> q;  // default: planted at advantage 2^(gap - k)
  std::uint64_t trials = 2000;
  std::uint64_t seed = 1;
  bool wrap = true;
  unsigned workers = 1;
};

struct CondenserReport {
  CondenserConfig config;
  double q = 0.0;
  double adversary_advantage = 0.0;
  double delta = 0.0;
  std::uint64_t successes = 0;
  double rate = 0.0;
  double ci_low = 0.0;  // one-sided 95% Wilson lower bound
  double target = 0.0;  // 2^(gap - k - 3)
  std::uint64_t adversary_calls = 0;
  std::uint64_t max_calls_per_trial = 0;
  std::uint64_t call_ceiling_per_trial = 0;
  std::uint64_t decodes = 0;
  std::uint64_t unsound = 0;  // returned x rejected by Eq; must stay 0
  bool budget_ok = true;
  bool pass = false;
};

CondenserReport condenser_experiment(const CondenserConfig& cfg);

double wilson_lower(std::uint64_t successes, std::uint64_t trials, double z_score = 1.6448536269514722);

}  // namespace celab
