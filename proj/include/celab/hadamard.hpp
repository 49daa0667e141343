#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "celab/bitlin.hpp"
#include "celab/rng.hpp"

namespace celab {

// An oracle answer: a bit, or nullopt for an erasure.
using Answer = std::optional<bool>;

struct OracleStats {
  double rate = 1.0;    // c + e, probability of answering at all
  double margin = 1.0;  // c - e
};

// Noisy access to the Hadamard codeword r -> <r, x>. Answers may be
// randomized; each query draws from the caller's stream.
class ErasureOracle {
 public:
  using Query = std::function<Answer(const BitVec&, Rng&)>;

  ErasureOracle(int n, Query query, OracleStats declared = {});

  int n() const { return n_; }
  Answer query(const BitVec& r, Rng& rng) const { return query_(r, rng); }
  const OracleStats& declared() const { return declared_; }

 private:
  int n_;
  Query query_;
  OracleStats declared_;
};

ErasureOracle noiseless_oracle(const BitVec& x);
// Independent per query: erase w.p. erasure_rate, else flip w.p. error_rate.
ErasureOracle noisy_oracle(const BitVec& x, double error_rate, double erasure_rate);
// Fixed corrupted codeword for n <= 20: exactly round(error_frac 2^n) points
// flipped and round(erasure_frac 2^n) points erased, at random positions.
ErasureOracle corrupted_codeword_oracle(const BitVec& x, double error_frac, double erasure_frac, Rng& rng);

// Smallest l with 2^l >= 20 n ratio + 1, where ratio = (e + c) / (c - e)^2.
int list_size_from_ratio(int n, double ratio);
int list_size_param(int n, double e, double c);

enum class DecodeMode {
  full,       // one candidate per sigma in {0,1}^l
  projected,  // only the sigma = S y consistent with some y in {0,1}^n
  automatic,  // projected when l > n, otherwise full
};

struct DecodeList {
  std::vector<BitVec> candidates;
  std::uint64_t queries = 0;
  std::uint64_t vote_ops = 0;
};

constexpr int kMaxListBits = 24;

// Pairwise-independent list decoding with errors and erasures.
DecodeList ld_decode(const ErasureOracle& oracle, int n, int l, Rng& rng,
                     DecodeMode mode = DecodeMode::full);

struct Recovery {
  std::optional<BitVec> x;
  std::uint64_t queries = 0;
  int decodes = 0;
};

Recovery recover_with_eq(const ErasureOracle& oracle, const std::function<bool(const BitVec&)>& eq, int n,
                         int l, int retries, Rng& rng, DecodeMode mode = DecodeMode::automatic);

// In-place unnormalized Walsh-Hadamard transform; size must be a power of two.
void walsh_hadamard(std::vector<std::int32_t>& v);

}  // namespace celab
