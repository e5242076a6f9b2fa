#pragma once

// Brute-force reference computations. Deliberately naive and independent of
// the optimizer, so agreement with the measures means something.

#include <cstdint>
#include <vector>

#include "chent/channels.hpp"
#include "chent/states.hpp"

namespace chent {

/// Max output concurrence over the product grid (cos a, e^{i phi} sin a) per
/// qubit, a = i pi / (2 steps), phi = 2 pi j / steps for i, j < steps. Grids
/// with steps s and 2s are nested. Two-qubit channels only; steps in [8, 100].
double grid_max_concurrence(const Channel& n, std::size_t steps);

struct PartitionVerdict {
  std::vector<std::vector<std::size_t>> blocks;
  std::vector<double> block_purities;
  bool separable = false;
};

struct PartitionCheck {
  /// No k-partition splits the state into a product.
  bool nonseparable_everywhere = false;
  std::vector<PartitionVerdict> detail;
};

/// Every k-partition of a pure state on n <= 6 factors, judged by whether
/// all block purities equal 1 within 1e-8. Throws NotPure, BadArity, TooLarge.
PartitionCheck exhaustive_partition_check(const QuantumState& state, std::size_t k);

/// min of S(Choi(N) || Choi(M)) over the identity, the product of N's local
/// marginals and `samples` random local-product channels M.
double sampled_free_distance_floor(const Channel& n, std::size_t samples, std::uint64_t seed);

}  // namespace chent
