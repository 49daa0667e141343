#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "celab/bitlin.hpp"
#include "celab/rng.hpp"

namespace celab {

constexpr int kMaxTableBits = 24;
constexpr double kMassTolerance = 1e-9;

// Joint law of (X, Z) on {0,1}^n x {0,1}^m, dense, index x * 2^m + z.
class JointTable {
 public:
  JointTable() = default;
  // Validates shape, non-negativity and total mass (within 1e-9).
  JointTable(int n, int m, std::vector<double> probs);
  // Divides by the total; the only way to build a table from unnormalized weights.
  static JointTable normalized(int n, int m, std::vector<double> weights);
  static JointTable product(std::span<const double> px, std::span<const double> pz);

  int n() const { return n_; }
  int m() const { return m_; }
  std::uint64_t x_count() const { return std::uint64_t{1} << n_; }
  std::uint64_t z_count() const { return std::uint64_t{1} << m_; }
  std::size_t index(std::uint64_t x, std::uint64_t z) const {
    return static_cast<std::size_t>((x << m_) | z);
  }
  double at(std::uint64_t x, std::uint64_t z) const { return probs_[index(x, z)]; }
  const std::vector<double>& probs() const { return probs_; }

  std::vector<double> z_marginal() const;
  std::vector<double> x_marginal() const;

  // Draws (x, z) by inverse CDF.
  std::pair<std::uint64_t, std::uint64_t> sample(Rng& rng) const;

 private:
  int n_ = 0;
  int m_ = 0;
  std::vector<double> probs_;
  std::vector<double> cdf_;
};

// Per-z conditional laws of X plus the marginal of Z.
class ConditionalTable {
 public:
  ConditionalTable() = default;
  ConditionalTable(int n, int m, std::vector<double> pz, std::vector<double> cond);

  int n() const { return n_; }
  int m() const { return m_; }
  double pz(std::uint64_t z) const { return pz_[static_cast<std::size_t>(z)]; }
  double at(std::uint64_t x, std::uint64_t z) const {
    return cond_[static_cast<std::size_t>((x << m_) | z)];
  }
  const std::vector<double>& z_marginal() const { return pz_; }
  const std::vector<double>& conditionals() const { return cond_; }
  // max_x P[X = x | Z = z]
  double max_prob(std::uint64_t z) const;

  JointTable joint() const;

 private:
  int n_ = 0;
  int m_ = 0;
  std::vector<double> pz_;
  std::vector<double> cond_;
};

double min_entropy(std::span<const double> p);
double avg_min_entropy(const JointTable& t);
double avg_min_entropy(const ConditionalTable& t);
double stat_distance(const JointTable& a, const JointTable& b);
double unbounded_guess_prob(const JointTable& t);
double unbounded_guess_prob(const ConditionalTable& t);

// Verification oracle [x' == x] for one hidden value; counts its queries.
class EqOracle {
 public:
  explicit EqOracle(BitVec secret) : secret_(secret) {}
  bool operator()(const BitVec& guess) const {
    ++queries_;
    return guess == secret_;
  }
  std::uint64_t queries() const { return queries_; }

 private:
  BitVec secret_;
  mutable std::uint64_t queries_ = 0;
};

// X | Z=z uniform on a random 2^k-subset of {0,1}^n, Z uniform.
struct PlantedSource {
  JointTable table;
  int k = 0;
  // supports[z] lists the 2^k values of X given z, ascending.
  std::vector<std::vector<std::uint64_t>> supports;

  std::pair<BitVec, std::uint64_t> sample(Rng& rng) const;
  EqOracle eq(const BitVec& x) const { return EqOracle(x); }
};

PlantedSource planted_source(int n, int k, int m, Rng& rng);

// JSON document {"n", "m", ...} with doubles printed to round-trip exactly.
std::string table_to_text(const JointTable& v);
JointTable table_from_text(const std::string& text);
void save_table(const JointTable& t, const std::string& path);
JointTable load_table(const std::string& path);

}  // namespace celab
