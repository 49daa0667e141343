#include "celab/fixtures.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "celab/errors.hpp"

namespace celab {

JointTable random_table(int n, int m, Rng& rng, bool sparse) {
  std::vector<double> w(std::size_t{1} << (n + m));
  for (auto& v : w) {
    v = -std::log1p(-rng.uniform01());
    if (sparse && rng.below(4) == 0) v = 0.0;
  }
  if (std::all_of(w.begin(), w.end(), [](double v) { return v == 0.0; })) w[0] = 1.0;
  return JointTable::normalized(n, m, std::move(w));
}

Distinguisher random_distinguisher(int n, int m, Rng& rng, bool ties) {
  std::vector<double> v(std::size_t{1} << (n + m));
  for (auto& x : v) x = ties ? static_cast<double>(rng.below(5)) / 4.0 : rng.uniform01();
  return Distinguisher(n, m, std::move(v));
}

PlantedAttack planted_attack_instance(int n, int m, int k, Rng& rng) {
  if (k < 1 || k >= n) throw usage_error("planted attack needs 1 <= k < n");
  PlantedAttack out;
  out.k = k;
  out.d = random_distinguisher(n, m, rng);
  const std::uint64_t nx = std::uint64_t{1} << n;
  const std::uint64_t nz = std::uint64_t{1} << m;
  const std::uint64_t top = std::uint64_t{1} << (k - 1);
  std::vector<double> p(nx * nz, 0.0);
  std::vector<std::uint64_t> order(nx);
  for (std::uint64_t z = 0; z < nz; ++z) {
    std::iota(order.begin(), order.end(), std::uint64_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::uint64_t a, std::uint64_t b) { return out.d.at(a, z) > out.d.at(b, z); });
    for (std::uint64_t i = 0; i < top; ++i) p[(order[i] << m) | z] = 1.0 / static_cast<double>(top * nz);
  }
  out.table = JointTable(n, m, std::move(p));
  return out;
}

}  // namespace celab
