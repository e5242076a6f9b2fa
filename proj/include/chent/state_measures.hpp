#pragma once

// Entropic and concurrence-type quantities on states. Logs are base 2.

#include <cstdint>
#include <limits>
#include <span>

#include "chent/linalg.hpp"
#include "chent/states.hpp"

namespace chent {

struct EntropyValue {
  double value = 0.0;
  /// supp(rho) not contained in supp(sigma); value is then +inf.
  bool support_violation = false;

  bool is_infinite() const noexcept { return support_violation; }
};

/// Tr rho (log rho - log sigma). Eigenvalues of sigma below `support_eig`
/// count as outside its support. Throws DimMismatch.
EntropyValue relative_entropy(const QuantumState& rho, const QuantumState& sigma);
EntropyValue relative_entropy(const ComplexMatrix& rho, const ComplexMatrix& sigma, double support_eig = 1e-10);

/// (1 - eps) sigma + eps I/D; keeps optimization objectives finite.
ComplexMatrix smooth_support(const ComplexMatrix& sigma, double eps = 1e-9);

/// sqrt(2 (1 - Tr rho_1^2)) for a pure bipartite state. Throws NotPure / NotBipartite.
double concurrence_pure(const QuantumState& state);
double concurrence_of_vector(std::span<const Complex> psi, const SystemDims& dims);

/// Two-qubit concurrence of a mixed state via the spin-flipped spectrum.
double concurrence_wootters(const QuantumState& state);
double concurrence_wootters(const ComplexMatrix& rho);

/// min over k-partitions of sqrt(2 sum_t (1 - Tr rho_{A_t}^2) / k).
/// Throws NotPure; BadArity unless 2 <= k <= n.
double kme_concurrence_pure(const QuantumState& state, std::size_t k);
double kme_of_vector(std::span<const Complex> psi, const SystemDims& dims, std::size_t k);

struct RoofInner {
  enum class Kind { concurrence, kme };
  Kind kind = Kind::concurrence;
  std::size_t k = 2;
};

/// Best (smallest) average of the inner pure-state measure over sampled pure
/// decompositions. Trial 0 is the eigendecomposition; later trials alternate
/// random unitary remixing and local perturbation of the best decomposition.
/// Only ever an upper bound on the convex roof.
double convex_roof_upper_bound(const QuantumState& state, RoofInner inner, std::size_t trials, std::uint64_t seed);

}  // namespace chent
