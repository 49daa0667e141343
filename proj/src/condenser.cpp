#include "celab/condenser.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include "celab/errors.hpp"
#include "celab/parallel.hpp"

namespace celab {

namespace {

class PlantedAdversary final : public KeyAdversary {
 public:
  PlantedAdversary(int k, std::vector<std::optional<BitVec>> secrets, double q)
      : KeyAdversary(k), secrets_(std::move(secrets)), q_(q) {}

 protected:
  std::uint64_t do_guess(std::uint64_t z, const std::uint64_t* rows, int n, Rng& rng) const override {
    if (z >= secrets_.size() || !secrets_[z]) return rng.bits(key_bits());
    if (secrets_[z]->size() != n) throw usage_error("adversary secret length differs from the matrix width");
    // The top 53 bits drive the q-coin and the low k bits the fallback guess;
    // for k <= 11 they do not overlap.
    const std::uint64_t w = rng.next();
    if (static_cast<double>(w >> 11) * 0x1.0p-53 < q_) return mat_vec_word(rows, key_bits(), secrets_[z]->word());
    return key_bits() <= 11 ? (w & low_mask(key_bits())) : rng.bits(key_bits());
  }

 private:
  std::vector<std::optional<BitVec>> secrets_;
  double q_;
};

class CoinWrapped final : public KeyAdversary {
 public:
  explicit CoinWrapped(AdversaryPtr inner) : KeyAdversary(inner->key_bits()), inner_(std::move(inner)) {}

 protected:
  std::uint64_t do_guess(std::uint64_t z, const std::uint64_t* rows, int n, Rng& rng) const override {
    // Bit 63 is the coin, the low k bits the uniform answer.
    const std::uint64_t w = rng.next();
    if (w >> 63) return inner_->guess_word(z, rows, n, rng);
    return key_bits() <= 63 ? (w & low_mask(key_bits())) : rng.bits(key_bits());
  }

 private:
  AdversaryPtr inner_;
};

void check_key_bits(int k) {
  if (k < 1 || k > kMaxBits) throw usage_error("key length outside [1, 64]");
}

}  // namespace

BitVec gl_condense(const BitVec& x, const BitMatrix& r) { return mat_vec_mul(r, x); }

KeyAdversary::KeyAdversary(int k) : k_(k) { check_key_bits(k); }

BitVec KeyAdversary::guess(std::uint64_t z, const BitMatrix& r, Rng& rng) const {
  if (r.rows() != k_) throw usage_error("key matrix must have k rows");
  std::uint64_t rows[kMaxBits];
  for (int j = 0; j < k_; ++j) rows[j] = r.row_word(j);
  return BitVec(k_, guess_word(z, rows, r.cols(), rng));
}

AdversaryPtr planted_key_adversary(int k, std::vector<std::optional<BitVec>> secret_by_z, double q) {
  if (!(q >= 0.0 && q <= 1.0)) throw usage_error("planted q must lie in [0, 1]");
  return std::make_shared<PlantedAdversary>(k, std::move(secret_by_z), q);
}

double planted_q_for_advantage(int k, double target) {
  const double floor = std::exp2(-k);
  if (!(target >= floor && target <= 1.0)) throw usage_error("planted advantage must lie in [2^-k, 1]");
  return (target - floor) / (1.0 - floor);
}

AdversaryPtr dummy_coin_wrap(AdversaryPtr inner) {
  if (!inner) throw usage_error("cannot wrap a null adversary");
  return std::make_shared<CoinWrapped>(std::move(inner));
}

double estimate_key_success(const KeyAdversary& a, std::uint64_t z, const BitVec& x, std::uint64_t samples,
                            Rng& rng) {
  if (samples == 0) throw usage_error("need at least one sample");
  std::uint64_t hits = 0;
  for (std::uint64_t s = 0; s < samples; ++s) {
    const auto r = BitMatrix::random(a.key_bits(), x.size(), rng);
    if (a.guess(z, r, rng) == gl_condense(x, r)) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(samples);
}

ErasureOracle prefix_predictor(AdversaryPtr a, std::uint64_t z, int i, const BitMatrix& r_prefix,
                               const BitVec& a_prefix, int n, double delta) {
  if (!a) throw usage_error("prefix predictor needs an adversary");
  const int k = a->key_bits();
  if (i < 1 || i > k) throw usage_error("prefix index outside [1, k]");
  if (r_prefix.rows() != i - 1 || a_prefix.size() != i - 1)
    throw usage_error("prefix rows and bits must both have length i - 1");
  if (i > 1 && r_prefix.cols() != n) throw usage_error("prefix rows must have length n");

  struct State {
    AdversaryPtr a;
    std::uint64_t z;
    int i;
    int k;
    int n;
    std::uint64_t want;
    std::uint64_t rows[kMaxBits];
  };
  auto st = std::make_shared<State>(State{std::move(a), z, i, k, n, a_prefix.word(), {}});
  for (int j = 0; j < i - 1; ++j) st->rows[j] = r_prefix.row_word(j);
  const double rate = std::exp2(-i);
  return ErasureOracle(
      n,
      [st](const BitVec& r, Rng& rng) -> Answer {
        st->rows[st->i - 1] = r.word();
        // Suffix rows are cut n bits at a time from 64-bit draws.
        std::uint64_t pool = 0;
        int avail = 0;
        for (int j = st->i; j < st->k; ++j) {
          if (avail < st->n) {
            pool = rng.next();
            avail = 64;
          }
          st->rows[j] = pool & low_mask(st->n);
          pool = st->n >= 64 ? 0 : pool >> st->n;
          avail -= st->n;
        }
        const std::uint64_t g = st->a->guess_word(st->z, st->rows, st->n, rng);
        if ((g & low_mask(st->i - 1)) != st->want) return std::nullopt;
        return ((g >> (st->i - 1)) & 1) != 0;
      },
      {rate, rate * delta});
}

void ReductionParams::validate() const {
  check_key_bits(k);
  if (delta_gap < 3) throw usage_error("the reduction needs an entropy gap of at least 3");
}

double ReductionParams::delta() const {
  return static_cast<double>(delta_gap - 2) * std::log(2.0) / (2.0 * static_cast<double>(k));
}

std::uint64_t ReductionParams::iterations() const {
  return static_cast<std::uint64_t>(std::ceil(2.0 * static_cast<double>(k) / delta()));
}

int ReductionParams::list_size(int i, int n) const {
  const double d = delta();
  return list_size_from_ratio(n, std::exp2(i) / (d * d));
}

ReductionOutcome reduction_B(const AdversaryPtr& a, std::uint64_t z, const std::function<bool(const BitVec&)>& eq,
                             const ReductionParams& params, int n, Rng& rng) {
  params.validate();
  if (!a || a->key_bits() != params.k) throw usage_error("adversary key length differs from k");
  const double delta = params.delta();
  ReductionOutcome out;
  const std::uint64_t budget = params.iterations();
  for (std::uint64_t it = 0; it < budget; ++it) {
    ++out.iterations;
    const int i = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(params.k)));
    const auto prefix = BitMatrix::random(i - 1, n, rng);
    const int l = params.list_size(i, n);
    for (std::uint64_t guess = 0; guess < (std::uint64_t{1} << (i - 1)); ++guess) {
      const auto oracle = prefix_predictor(a, z, i, prefix, BitVec(i - 1, guess), n, delta);
      const auto rec = recover_with_eq(oracle, eq, n, l, 1, rng);
      out.decodes += static_cast<std::uint64_t>(rec.decodes);
      out.oracle_queries += rec.queries;
      if (rec.x) {
        out.x = rec.x;
        return out;
      }
    }
  }
  return out;
}

std::uint64_t reduction_call_ceiling(const ReductionParams& params, int n) {
  params.validate();
  std::uint64_t per_iteration = 0;
  for (int i = 1; i <= params.k; ++i) {
    const std::uint64_t guesses = std::uint64_t{1} << (i - 1);
    const std::uint64_t queries = static_cast<std::uint64_t>(n) * ((std::uint64_t{1} << params.list_size(i, n)) - 1);
    per_iteration = std::max(per_iteration, guesses * queries);
  }
  return params.iterations() * per_iteration;
}

double wilson_lower(std::uint64_t successes, std::uint64_t trials, double z_score) {
  if (trials == 0) return 0.0;
  const double nt = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / nt;
  const double z2 = z_score * z_score;
  const double centre = p + z2 / (2.0 * nt);
  const double spread = z_score * std::sqrt(p * (1.0 - p) / nt + z2 / (4.0 * nt * nt));
  return (centre - spread) / (1.0 + z2 / nt);
}

CondenserReport condenser_experiment(const CondenserConfig& cfg) {
  if (cfg.k < 1 || cfg.k > 8 || cfg.n < cfg.k || cfg.n > 14)
    throw usage_error("condenser runs need 1 <= k <= 8 and k <= n <= 14");
  if (cfg.m < 0 || cfg.n + cfg.m > kMaxTableBits) throw usage_error("condenser source shape outside the cap");
  if (cfg.trials < 1) throw usage_error("need at least one trial");
  const ReductionParams params{cfg.k, cfg.delta_gap};
  params.validate();

  CondenserReport rep;
  rep.config = cfg;
  rep.delta = params.delta();
  rep.target = std::exp2(cfg.delta_gap - cfg.k - 3);
  const double planted = std::min(1.0, std::exp2(cfg.delta_gap - cfg.k));
  rep.q = cfg.q ? *cfg.q : planted_q_for_advantage(cfg.k, planted);
  rep.adversary_advantage = rep.q + (1.0 - rep.q) * std::exp2(-cfg.k);
  rep.call_ceiling_per_trial = reduction_call_ceiling(params, cfg.n);

  const Rng master(cfg.seed);
  Rng source_rng = master.child(0);
  const auto source = planted_source(cfg.n, cfg.k, cfg.m, source_rng);

  struct Trial {
    bool found = false;
    bool correct = false;
    std::uint64_t calls = 0;
    std::uint64_t decodes = 0;
  };
  std::vector<Trial> results(cfg.trials);
  parallel_for(cfg.trials, cfg.workers, [&](std::uint64_t trial) {
    Rng rng(derive_seed(cfg.seed, trial + 1));
    const auto [x, z] = source.sample(rng);
    std::vector<std::optional<BitVec>> secrets(source.table.z_count());
    secrets[z] = x;
    const auto inner = planted_key_adversary(cfg.k, std::move(secrets), rep.q);
    const auto adversary = cfg.wrap ? dummy_coin_wrap(inner) : inner;
    const EqOracle eq = source.eq(x);
    const auto out = reduction_B(adversary, z, [&eq](const BitVec& c) { return eq(c); }, params, cfg.n, rng);
    auto& r = results[trial];
    r.found = out.x.has_value();
    r.correct = out.x && *out.x == x;
    r.calls = adversary->invocations();
    r.decodes = out.decodes;
  });
  for (const auto& r : results) {
    rep.adversary_calls += r.calls;
    rep.max_calls_per_trial = std::max(rep.max_calls_per_trial, r.calls);
    rep.decodes += r.decodes;
    if (r.calls > rep.call_ceiling_per_trial) rep.budget_ok = false;
    if (r.correct) ++rep.successes;
    if (r.found && !r.correct) ++rep.unsound;
  }
  rep.rate = static_cast<double>(rep.successes) / static_cast<double>(cfg.trials);
  rep.ci_low = wilson_lower(rep.successes, cfg.trials);
  rep.pass = rep.ci_low > rep.target && rep.budget_ok && rep.unsound == 0;
  return rep;
}

}  // namespace celab
