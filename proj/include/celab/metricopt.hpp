#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "celab/distmodel.hpp"
#include "celab/rng.hpp"

namespace celab {

// Values closer than this to a threshold are treated as lying on it.
constexpr double kTieTolerance = 1e-12;

// Real-valued test D(x, z) over {0,1}^n x {0,1}^m, dense, index x * 2^m + z.
// An ordinary distinguisher has range [0, 1]; the thresholded form has
// range [0, 2] and reports modified() == true.
class Distinguisher {
 public:
  Distinguisher() = default;
  Distinguisher(int n, int m, std::vector<double> values, double range_max = 1.0);
  static Distinguisher from_function(int n, int m,
                                     const std::function<double(std::uint64_t, std::uint64_t)>& f,
                                     double range_max = 1.0);

  int n() const { return n_; }
  int m() const { return m_; }
  std::uint64_t x_count() const { return std::uint64_t{1} << n_; }
  std::uint64_t z_count() const { return std::uint64_t{1} << m_; }
  double range_max() const { return range_max_; }
  bool modified() const { return range_max_ > 1.0; }

  double at(std::uint64_t x, std::uint64_t z) const {
    return values_[static_cast<std::size_t>((x << m_) | z)];
  }
  double operator()(std::uint64_t x, std::uint64_t z) const { return at(x, z); }
  const std::vector<double>& values() const { return values_; }

  std::vector<double> slice(std::uint64_t z) const;
  // E D(U, z) for uniform U.
  double uniform_mean(std::uint64_t z) const;
  double expectation(const JointTable& t) const;
  double expectation(const ConditionalTable& t) const;

 private:
  int n_ = 0;
  int m_ = 0;
  double range_max_ = 1.0;
  std::vector<double> values_;
};

struct ThresholdProfile {
  std::vector<double> t;       // one threshold per z
  double lambda_norm = 0.0;    // common value of E_U max(D(U,z) - t(z), 0)
};

// E_U max(v(U) - t, 0) over the listed values.
double excess_mean(std::span<const double> values, double t);

// The t with excess_mean(values, t) == lambda_norm, t in [-1, max value].
double exact_threshold(std::span<const double> values, double lambda_norm);
double exact_threshold(const Distinguisher& d, std::uint64_t z, double lambda_norm);
ThresholdProfile threshold_profile(const Distinguisher& d, double lambda_norm);

// k(lambda') = -log2 sum_z P(z) / #{x : D(x,z) >= t(z)}.
double entropy_curve(const Distinguisher& d, std::span<const double> z_marginal, double lambda_norm);

struct OptimalDistribution {
  ConditionalTable y;          // maximizer Y* | Z
  ThresholdProfile profile;
  std::vector<double> y_max;   // max_x P[Y* = x | Z = z]
  double objective = 0.0;      // E D(Y*, Z)
};

// Maximizes E D(Y, Z) over Y with average min-entropy given Z at least k,
// where Z keeps the marginal of `t`. The optimum has entropy exactly k.
OptimalDistribution optimal_distribution(const Distinguisher& d, const JointTable& t, double k);

// Largest violation of each optimality condition, for z with P(z) > 0.
struct KktResidual {
  double zero_below = 0.0;  // mass where D < t
  double peak_above = 0.0;  // |P - y_max| where D > t
  double over_peak = 0.0;   // mass above y_max anywhere
  double level = 0.0;       // |E_U max(D - t, 0) - lambda'|
  double entropy = 0.0;     // |H(Y* | Z) - k|
  double worst() const;
};
KktResidual kkt_residual(const Distinguisher& d, const OptimalDistribution& opt, double k);

// Independent reference optimum for n <= 3, m <= 2.
double brute_force_opt(const Distinguisher& d, const JointTable& t, double k);

Distinguisher modified_distinguisher(const Distinguisher& d, const ThresholdProfile& profile);

// E D(X, Z) - max over admissible Y of E D(Y, Z). May be negative.
double advantage(const Distinguisher& d, const JointTable& t, double k);

// Sampling bisection for the threshold of a single-z distinguisher.
double find_threshold_sampled(std::span<const double> values, double lambda_norm, double delta,
                              std::uint64_t samples, Rng& rng);
// Lower bound on the probability that the bisection lands in [lambda', lambda' + delta].
double find_threshold_success_bound(double delta, std::uint64_t samples);

// JSON document {"n", "m", ...} with doubles printed to round-trip exactly.
std::string distinguisher_to_text(const Distinguisher& v);
Distinguisher distinguisher_from_text(const std::string& text);
void save_distinguisher(const Distinguisher& d, const std::string& path);
Distinguisher load_distinguisher(const std::string& path);

}  // namespace celab
