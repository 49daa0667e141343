#include "celab/hadamard.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <memory>
#include <numeric>
#include <string>
#include <utility>

#include "celab/errors.hpp"

namespace celab {

namespace {

std::int32_t signed_answer(const Answer& a) {
  if (!a) return 0;
  return *a ? -1 : 1;
}

void check_rates(double error_rate, double erasure_rate) {
  if (!(error_rate >= 0.0 && erasure_rate >= 0.0 && error_rate + erasure_rate <= 1.0))
    throw usage_error("error and erasure rates must be non-negative with sum at most 1");
}

std::vector<std::uint64_t> subset_sums(const std::vector<std::uint64_t>& s) {
  std::vector<std::uint64_t> r(std::size_t{1} << s.size(), 0);
  for (std::size_t j = 1; j < r.size(); ++j)
    r[j] = r[j & (j - 1)] ^ s[static_cast<std::size_t>(std::countr_zero(j))];
  return r;
}

}  // namespace

ErasureOracle::ErasureOracle(int n, Query query, OracleStats declared)
    : n_(n), query_(std::move(query)), declared_(declared) {
  if (n < 1 || n > kMaxBits) throw usage_error("oracle dimension outside [1, 64]");
  if (!query_) throw usage_error("oracle needs a query function");
}

ErasureOracle noiseless_oracle(const BitVec& x) {
  return ErasureOracle(x.size(), [x](const BitVec& r, Rng&) -> Answer { return inner_product(r, x); },
                       {1.0, 1.0});
}

ErasureOracle noisy_oracle(const BitVec& x, double error_rate, double erasure_rate) {
  check_rates(error_rate, erasure_rate);
  const double c = 1.0 - error_rate - erasure_rate;
  return ErasureOracle(
      x.size(),
      [x, error_rate, erasure_rate](const BitVec& r, Rng& rng) -> Answer {
        const double u = rng.uniform01();
        if (u < erasure_rate) return std::nullopt;
        const bool truth = inner_product(r, x);
        return u < erasure_rate + error_rate ? !truth : truth;
      },
      {c + error_rate, c - error_rate});
}

ErasureOracle corrupted_codeword_oracle(const BitVec& x, double error_frac, double erasure_frac, Rng& rng) {
  check_rates(error_frac, erasure_frac);
  const int n = x.size();
  if (n < 1 || n > 20) throw usage_error("materialized codewords are limited to n <= 20");
  const std::uint64_t size = std::uint64_t{1} << n;
  const auto errors = static_cast<std::uint64_t>(std::llround(error_frac * static_cast<double>(size)));
  const auto erasures = static_cast<std::uint64_t>(std::llround(erasure_frac * static_cast<double>(size)));
  if (errors + erasures > size) throw usage_error("corruption exceeds the codeword");
  std::vector<std::uint64_t> order(size);
  std::iota(order.begin(), order.end(), std::uint64_t{0});
  for (std::uint64_t i = 0; i < errors + erasures; ++i) std::swap(order[i], order[i + rng.below(size - i)]);
  // 0/1 = answer, 2 = erased
  auto word = std::make_shared<std::vector<std::uint8_t>>(size);
  for (std::uint64_t r = 0; r < size; ++r) (*word)[r] = static_cast<std::uint8_t>(parity(r & x.word()));
  for (std::uint64_t i = 0; i < errors; ++i) (*word)[order[i]] ^= 1;
  for (std::uint64_t i = errors; i < errors + erasures; ++i) (*word)[order[i]] = 2;
  const double e = static_cast<double>(errors) / static_cast<double>(size);
  const double c = static_cast<double>(size - errors - erasures) / static_cast<double>(size);
  return ErasureOracle(
      n,
      [word](const BitVec& r, Rng&) -> Answer {
        const std::uint8_t a = (*word)[r.word()];
        if (a == 2) return std::nullopt;
        return a == 1;
      },
      {c + e, c - e});
}

int list_size_from_ratio(int n, double ratio) {
  if (n < 1) throw usage_error("list size needs n >= 1");
  if (!(ratio > 0.0) || !std::isfinite(ratio)) throw domain_error("list size ratio must be positive and finite");
  const double target = 20.0 * static_cast<double>(n) * ratio + 1.0;
  int l = 0;
  while (std::exp2(l) < target * (1.0 - 1e-12)) ++l;
  return l;
}

int list_size_param(int n, double e, double c) {
  if (!(e >= 0.0) || !(c + e <= 1.0 + 1e-12)) throw usage_error("need e >= 0 and c + e <= 1");
  if (!(c > e)) throw domain_error("no decoding guarantee when c <= e");
  return list_size_from_ratio(n, (e + c) / ((c - e) * (c - e)));
}

void walsh_hadamard(std::vector<std::int32_t>& v) {
  const std::size_t size = v.size();
  if (size == 0 || (size & (size - 1)) != 0) throw usage_error("transform length must be a power of two");
  for (std::size_t h = 1; h < size; h <<= 1)
    for (std::size_t i = 0; i < size; i += h << 1)
      for (std::size_t j = i; j < i + h; ++j) {
        const std::int32_t a = v[j];
        const std::int32_t b = v[j + h];
        v[j] = a + b;
        v[j + h] = a - b;
      }
}

DecodeList ld_decode(const ErasureOracle& oracle, int n, int l, Rng& rng, DecodeMode mode) {
  if (n < 1 || n > kMaxBits || oracle.n() != n) throw usage_error("decoder dimension mismatch");
  if (l < 1 || l > kMaxListBits) throw usage_error("list parameter l outside [1, 24]");
  if (mode == DecodeMode::automatic) mode = l > n ? DecodeMode::projected : DecodeMode::full;
  if (mode == DecodeMode::projected && n > 16) throw usage_error("projected decoding is limited to n <= 16");

  std::vector<std::uint64_t> s(static_cast<std::size_t>(l));
  for (auto& sj : s) sj = rng.bits(n);
  const auto r = subset_sums(s);
  const std::size_t subsets = r.size();

  DecodeList out;
  if (mode == DecodeMode::full) {
    // Signed answers y_i[J] in {-1, 0, +1} for the query r^J + e_i; the
    // number of zero votes minus one votes for bit i under sigma is then
    // sum_J y_i[J] (-1)^{sigma . J}, the Walsh-Hadamard transform of y_i.
    std::vector<std::int8_t> answers(static_cast<std::size_t>(n) * subsets, 0);
    for (std::size_t j = 1; j < subsets; ++j)
      for (int i = 0; i < n; ++i) {
        const BitVec q(n, r[j] ^ (std::uint64_t{1} << i));
        answers[static_cast<std::size_t>(i) * subsets + j] =
            static_cast<std::int8_t>(signed_answer(oracle.query(q, rng)));
        ++out.queries;
      }
    std::vector<std::uint64_t> words(subsets, 0);
    std::vector<std::int32_t> w(subsets);
    for (int i = 0; i < n; ++i) {
      const auto* row = &answers[static_cast<std::size_t>(i) * subsets];
      std::copy(row, row + subsets, w.begin());
      walsh_hadamard(w);
      for (std::size_t sigma = 0; sigma < subsets; ++sigma)
        if (w[sigma] < 0) words[sigma] |= std::uint64_t{1} << i;
    }
    out.vote_ops = static_cast<std::uint64_t>(n) * static_cast<std::uint64_t>(l) * subsets;
    out.candidates.reserve(subsets);
    for (auto word : words) out.candidates.emplace_back(n, word);
    return out;
  }

  // Projected: for sigma = S y the vote sum equals
  // sum_r (-1)^{r . y} u_i[r] with u_i[r] = sum over J with r^J = r of y_i[J],
  // a transform over {0,1}^n instead of {0,1}^l.
  const std::size_t points = std::size_t{1} << n;
  std::vector<std::int32_t> u(static_cast<std::size_t>(n) * points, 0);
  for (std::size_t j = 1; j < subsets; ++j)
    for (int i = 0; i < n; ++i) {
      const BitVec q(n, r[j] ^ (std::uint64_t{1} << i));
      u[static_cast<std::size_t>(i) * points + r[j]] += signed_answer(oracle.query(q, rng));
      ++out.queries;
    }
  std::vector<std::uint64_t> words(points, 0);
  std::vector<std::int32_t> w(points);
  for (int i = 0; i < n; ++i) {
    const auto* row = &u[static_cast<std::size_t>(i) * points];
    std::copy(row, row + points, w.begin());
    walsh_hadamard(w);
    for (std::size_t y = 0; y < points; ++y)
      if (w[y] < 0) words[y] |= std::uint64_t{1} << i;
  }
  out.vote_ops = static_cast<std::uint64_t>(n) * (subsets + static_cast<std::uint64_t>(n) * points);
  out.candidates.reserve(points);
  for (auto word : words) out.candidates.emplace_back(n, word);
  return out;
}

Recovery recover_with_eq(const ErasureOracle& oracle, const std::function<bool(const BitVec&)>& eq, int n,
                         int l, int retries, Rng& rng, DecodeMode mode) {
  if (retries < 1) throw usage_error("need at least one decoding attempt");
  Recovery out;
  for (int attempt = 0; attempt < retries; ++attempt) {
    const auto list = ld_decode(oracle, n, l, rng, mode);
    out.queries += list.queries;
    ++out.decodes;
    for (const auto& c : list.candidates)
      if (eq(c)) {
        out.x = c;
        return out;
      }
  }
  return out;
}

}  // namespace celab
