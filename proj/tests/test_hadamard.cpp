#include <cmath>
#include <set>

#include "doctest.h"

#include "celab/errors.hpp"
#include "celab/hadamard.hpp"
#include "oracles.hpp"

using namespace celab;

namespace {

bool contains(const DecodeList& list, const BitVec& x) {
  for (const auto& c : list.candidates)
    if (c == x) return true;
  return false;
}

double in_list_rate(int n, int l, double err, double eras, std::uint64_t seed, int trials = 200) {
  int hits = 0;
  for (int t = 0; t < trials; ++t) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(t)));
    const auto x = BitVec::random(n, rng);
    hits += contains(ld_decode(noisy_oracle(x, err, eras), n, l, rng), x) ? 1 : 0;
  }
  return hits / static_cast<double>(trials);
}

}  // namespace

TEST_CASE("list size examples") {
  CHECK(list_size_param(16, 0.0, 1.0) == 9);
  CHECK(list_size_param(1, 0.0, 1.0) == 5);
  CHECK(list_size_param(16, 0.4, 0.6) + 2 == list_size_param(16, 0.45, 0.55));
  CHECK(list_size_param(16, 0.0, 0.1) == 12);
  CHECK(list_size_param(16, 0.4, 0.6) == 13);
  CHECK_THROWS_AS(list_size_param(16, 0.5, 0.5), domain_error);
  CHECK_THROWS_AS(list_size_param(16, 0.6, 0.4), domain_error);
}

TEST_CASE("walsh hadamard transform") {
  std::vector<std::int32_t> v{1, 0, 0, 0};
  walsh_hadamard(v);
  CHECK(v == std::vector<std::int32_t>{1, 1, 1, 1});
  std::vector<std::int32_t> w{3, -1, 4, 1, -5, 9, 2, -6};
  const auto orig = w;
  walsh_hadamard(w);
  walsh_hadamard(w);
  for (std::size_t i = 0; i < w.size(); ++i) CHECK(w[i] == 8 * orig[i]);
}

TEST_CASE("fast votes equal explicit majority votes") {
  for (std::uint64_t seed = 0; seed < 12; ++seed) {
    Rng pick(seed);
    const int n = 3 + static_cast<int>(pick.below(6));
    const int l = 2 + static_cast<int>(pick.below(6));
    const auto x = BitVec::random(n, pick);
    const auto oracle = noisy_oracle(x, 0.2, 0.3);
    Rng a(seed + 100);
    Rng b(seed + 100);
    const auto fast = ld_decode(oracle, n, l, a);
    const auto slow = oracle::decode_direct(oracle, n, l, b);
    CHECK(fast.candidates == slow);
  }
}

TEST_CASE("decoder budget counters") {
  Rng rng(1);
  const auto x = BitVec::random(10, rng);
  const auto list = ld_decode(noiseless_oracle(x), 10, 7, rng);
  CHECK(list.candidates.size() == 128);
  CHECK(list.queries <= 10u * 128u);
  CHECK(list.queries == 10u * 127u);
  CHECK(list.vote_ops == 10u * 7u * 128u);
}

TEST_CASE("noiseless decoding contains x, and the correct sigma yields x") {
  Rng rng(2);
  const auto zero = ld_decode(noiseless_oracle(BitVec::zeros(12)), 12, 6, rng);
  CHECK(zero.candidates[0] == BitVec::zeros(12));

  for (int t = 0; t < 20; ++t) {
    const auto x = BitVec::random(20, rng);
    Rng probe = rng;
    std::uint64_t sigma = 0;
    for (int j = 0; j < 8; ++j)
      if (parity(probe.bits(20) & x.word())) sigma |= std::uint64_t{1} << j;
    const auto list = ld_decode(noiseless_oracle(x), 20, 8, rng);
    CHECK(list.candidates[sigma] == x);
  }
  CHECK(in_list_rate(32, list_size_param(32, 0.0, 1.0), 0.0, 0.0, 3) >= 0.8);
}

TEST_CASE("erasures do not hurt the margin") {
  CHECK(in_list_rate(16, list_size_param(16, 0.0, 0.1), 0.0, 0.9, 4) >= 0.8);
}

TEST_CASE("projected decoding keeps the correct candidate and is a sub-list") {
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    Rng pick(seed);
    const int n = 4 + static_cast<int>(pick.below(3));
    const int l = n + 1 + static_cast<int>(pick.below(3));
    const auto x = BitVec::random(n, pick);
    const auto oracle = noisy_oracle(x, 0.1, 0.2);
    Rng a(seed + 7);
    Rng b(seed + 7);
    const auto full = ld_decode(oracle, n, l, a, DecodeMode::full);
    const auto proj = ld_decode(oracle, n, l, b, DecodeMode::projected);
    const std::set<std::uint64_t> full_set = [&] {
      std::set<std::uint64_t> s;
      for (const auto& c : full.candidates) s.insert(c.word());
      return s;
    }();
    for (const auto& c : proj.candidates) CHECK(full_set.count(c.word()) == 1);
    CHECK(proj.queries == full.queries);
    const auto noiseless = ld_decode(noiseless_oracle(x), n, l, pick, DecodeMode::projected);
    CHECK(contains(noiseless, x));
  }
  Rng rng(1);
  CHECK_THROWS_AS(ld_decode(noiseless_oracle(BitVec::zeros(17)), 17, 18, rng, DecodeMode::projected), usage_error);
}

TEST_CASE("subset sums of seeds are pairwise independent") {
  // With l = 2, n = 3, the pair (r^{1}, r^{1,2}) = (s1, s1 + s2) must be uniform on 64 cells.
  Rng rng(5);
  std::vector<double> counts(64, 0.0);
  const int samples = 100000;
  for (int i = 0; i < samples; ++i) {
    const auto s1 = rng.bits(3);
    const auto s2 = rng.bits(3);
    counts[(s1 << 3) | (s1 ^ s2)] += 1.0;
  }
  double chi = 0.0;
  const double expect = samples / 64.0;
  for (double c : counts) chi += (c - expect) * (c - expect) / expect;
  CHECK(chi < 63.0 + 5.0 * std::sqrt(126.0));
}

TEST_CASE("recovery with a membership oracle") {
  int ok = 0;
  for (int t = 0; t < 100; ++t) {
    Rng rng(derive_seed(6, static_cast<std::uint64_t>(t)));
    const auto x = BitVec::random(16, rng);
    const auto rec = recover_with_eq(noiseless_oracle(x), [&](const BitVec& c) { return c == x; }, 16, 9, 1, rng);
    ok += rec.x && *rec.x == x ? 1 : 0;
  }
  CHECK(ok >= 80);

  Rng rng(7);
  const auto x = BitVec::random(12, rng);
  const auto none = recover_with_eq(noiseless_oracle(x), [](const BitVec&) { return false; }, 12, 6, 3, rng);
  CHECK_FALSE(none.x.has_value());
  CHECK(none.decodes == 3);
  CHECK_THROWS_AS(recover_with_eq(noiseless_oracle(x), [](const BitVec&) { return true; }, 12, 6, 0, rng), usage_error);

  int retried = 0;
  for (int t = 0; t < 50; ++t) {
    Rng r(derive_seed(8, static_cast<std::uint64_t>(t)));
    const auto y = BitVec::random(16, r);
    const auto rec = recover_with_eq(noisy_oracle(y, 0.2, 0.0), [&](const BitVec& c) { return c == y; }, 16,
                                     list_size_param(16, 0.2, 0.8), 10, r);
    retried += rec.x ? 1 : 0;
  }
  CHECK(retried == 50);
}

TEST_CASE("corrupted codewords have exact corruption counts") {
  Rng rng(9);
  const auto x = BitVec::random(10, rng);
  const auto oracle = corrupted_codeword_oracle(x, 0.2, 0.3, rng);
  int wrong = 0;
  int erased = 0;
  for (std::uint64_t r = 0; r < 1024; ++r) {
    const auto a = oracle.query(BitVec(10, r), rng);
    if (!a)
      ++erased;
    else if (*a != inner_product(BitVec(10, r), x))
      ++wrong;
  }
  CHECK(wrong == 205);
  CHECK(erased == 307);
  CHECK(oracle.declared().rate == doctest::Approx((1024.0 - 307.0) / 1024.0));
  CHECK(oracle.declared().margin == doctest::Approx((1024.0 - 307.0 - 2.0 * 205.0) / 1024.0));
}

TEST_CASE("recovery rate does not increase with the error rate") {
  // c = 0.5 fixed: answer with probability c + e, and a fraction e / (c + e) of the answers is flipped.
  const int n = 12;
  const int l = 6;
  double prev = 1.0;
  for (double e : {0.0, 0.1, 0.2, 0.3}) {
    const double rate = in_list_rate(n, l, e / (0.5 + e), 1.0 - (0.5 + e), 40, 200);
    CHECK(rate <= prev + 2.0 * std::sqrt(0.25 / 200.0));
    prev = rate;
  }
}
