#pragma once

#include <cstdint>

#include "celab/distmodel.hpp"
#include "celab/metricopt.hpp"
#include "celab/rng.hpp"

namespace celab {

// Dirichlet(1,...,1) table; with `sparse`, roughly a quarter of the cells are zero.
JointTable random_table(int n, int m, Rng& rng, bool sparse = false);

// Uniform [0,1] values; with `ties`, values snap to the grid {0, 1/4, ..., 1}.
Distinguisher random_distinguisher(int n, int m, Rng& rng, bool ties = false);

// Random D with X | z uniform on the 2^(k-1) largest values of D(., z) and
// Z uniform, so X has entropy k - 1 given Z and D separates it from every
// entropy-k distribution.
struct PlantedAttack {
  JointTable table;
  Distinguisher d;
  double k = 0.0;
};
PlantedAttack planted_attack_instance(int n, int m, int k, Rng& rng);

}  // namespace celab
