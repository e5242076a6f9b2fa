#pragma once

// Quantum states over an explicit tensor factorization.
//
// Subsystem index 0 is the leftmost (most significant) tensor factor, so the
// basis state |i_0 i_1 ... i_{n-1}> sits at flat index
//   ((i_0 * d_1 + i_1) * d_2 + i_2) ... .

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "chent/linalg.hpp"

namespace chent {

class SystemDims {
 public:
  static constexpr std::size_t kMaxTotal = 4096;

  /// Each local dimension >= 2, at least one factor, product <= 4096.
  explicit SystemDims(std::vector<std::size_t> dims);

  std::size_t count() const noexcept { return dims_.size(); }
  std::size_t total() const noexcept { return total_; }
  std::size_t operator[](std::size_t i) const { return dims_.at(i); }
  std::span<const std::size_t> dims() const noexcept { return dims_; }

  SystemDims concat(const SystemDims& other) const;
  /// Product of the local dimensions at the given indices.
  std::size_t total_of(std::span<const std::size_t> indices) const;

  std::string to_string() const;
  friend bool operator==(const SystemDims&, const SystemDims&) = default;

 private:
  std::vector<std::size_t> dims_;
  std::size_t total_ = 1;
};

class QuantumState {
 public:
  /// Validates Hermiticity, unit trace and eigenvalues >= -1e-9.
  static QuantumState from_density(SystemDims dims, ComplexMatrix rho);
  /// Density matrix of a unit vector (norm checked to 1e-9).
  static QuantumState from_vector(SystemDims dims, ComplexVector psi);
  /// Skips the eigenvalue check; Hermiticity and trace are still enforced.
  static QuantumState from_density_unchecked(SystemDims dims, ComplexMatrix rho);

  const SystemDims& dims() const noexcept { return dims_; }
  const ComplexMatrix& rho() const noexcept { return rho_; }
  /// Stored state vector when the state was built from one.
  const std::optional<ComplexVector>& vector() const noexcept { return psi_; }

  /// Tr rho^2 >= 1 - 1e-9.
  bool is_pure() const noexcept { return pure_; }
  double purity() const noexcept { return purity_; }
  /// State vector (stored, or dominant eigenvector). Throws NotPure.
  ComplexVector pure_vector() const;

 private:
  QuantumState(SystemDims dims, ComplexMatrix rho, std::optional<ComplexVector> psi);

  SystemDims dims_;
  ComplexMatrix rho_;
  std::optional<ComplexVector> psi_;
  double purity_ = 1.0;
  bool pure_ = false;
};

/// k disjoint nonempty blocks covering {0..n-1}, blocks sorted by least
/// element, indices sorted within a block.
class PartitionSpec {
 public:
  PartitionSpec(std::size_t n, std::vector<std::vector<std::size_t>> blocks);

  std::size_t n() const noexcept { return n_; }
  std::size_t k() const noexcept { return blocks_.size(); }
  const std::vector<std::vector<std::size_t>>& blocks() const noexcept { return blocks_; }

  /// "{0}{1,2}"
  std::string to_string() const;
  friend bool operator==(const PartitionSpec&, const PartitionSpec&) = default;

 private:
  std::size_t n_;
  std::vector<std::vector<std::size_t>> blocks_;
};

QuantumState product_pure(std::span<const ComplexVector> locals, const SystemDims& dims);
QuantumState max_entangled(std::size_t d);
/// Reduced state on the (sorted, distinct) kept factors. Throws BadIndexSet.
QuantumState partial_trace(const QuantumState& state, std::span<const std::size_t> keep);
QuantumState mix(std::span<const QuantumState> states, std::span<const double> weights);

/// All partitions of {0..n-1} into exactly k blocks, canonical order.
/// Requires 1 <= k <= n <= 12 (BadArity otherwise).
std::vector<PartitionSpec> enumerate_partitions(std::size_t n, std::size_t k);
/// Memoized enumerate_partitions; safe to call concurrently.
const std::vector<PartitionSpec>& cached_partitions(std::size_t n, std::size_t k);

// Matrix/vector level kernels used by the measures.

ComplexMatrix partial_trace_matrix(const ComplexMatrix& rho, const SystemDims& dims,
                                   std::span<const std::size_t> keep);
/// Reduced density matrix of a pure vector on the kept factors.
ComplexMatrix reduced_from_vector(std::span<const Complex> psi, const SystemDims& dims,
                                  std::span<const std::size_t> keep);
/// Tr rho_A^2 of a pure vector, computed on the smaller side of the cut.
double reduced_purity(std::span<const Complex> psi, const SystemDims& dims,
                      std::span<const std::size_t> block);
/// 1 - Tr rho_A^2 of a unit vector, accurate near product states.
double reduced_deficit(std::span<const Complex> psi, const SystemDims& dims,
                       std::span<const std::size_t> block);
/// Tr(A B) for Hermitian A, B -> Tr rho^2 when both are rho.
double purity_of(const ComplexMatrix& rho);

}  // namespace chent
