#pragma once

// CPTP maps as Kraus families over explicit input/output factorizations.

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "chent/linalg.hpp"
#include "chent/states.hpp"

namespace chent {

class Channel {
 public:
  /// Checks sum K^dagger K = I within `tol`. Families longer than
  /// in_D * out_D are compressed to the minimal Kraus form.
  Channel(SystemDims in_dims, SystemDims out_dims, std::vector<ComplexMatrix> kraus, double tol = 1e-8);

  const SystemDims& in_dims() const noexcept { return in_; }
  const SystemDims& out_dims() const noexcept { return out_; }
  const std::vector<ComplexMatrix>& kraus() const noexcept { return kraus_; }
  std::size_t in_total() const noexcept { return in_.total(); }
  std::size_t out_total() const noexcept { return out_.total(); }

  /// Single Kraus operator: pure inputs stay pure.
  bool is_isometry() const noexcept { return kraus_.size() == 1; }

  /// (N (x) Id)(|psi+><psi+|) with normalized |psi+> on the input space;
  /// row index = out * in_D + ref.
  ComplexMatrix choi_matrix() const;

 private:
  SystemDims in_;
  SystemDims out_;
  std::vector<ComplexMatrix> kraus_;
};

/// Kraus family from a (unnormalized-trace-1) Choi matrix of the above layout.
std::vector<ComplexMatrix> kraus_from_choi(const ComplexMatrix& choi, std::size_t in_dim, std::size_t out_dim,
                                           double cutoff = 1e-14);

QuantumState apply(const Channel& ch, const QuantumState& state);
/// sum_i K_i |psi><psi| K_i^dagger without building a QuantumState.
ComplexMatrix apply_to_vector(const Channel& ch, std::span<const Complex> psi);

Channel unitary_channel(const ComplexMatrix& u, const SystemDims& dims);
Channel identity_channel(const SystemDims& dims);

/// U_CNOT = sum_ij |i><i| (x) |j><(i+j) mod 2|
Channel cnot();
/// The two-qubit swap written as sum_i |i><i+1| (x) |i+1><i| + sum_j |j><j| (x) |j><j|.
Channel swap_channel();
/// |i_1 ... i_n> -> |i_n i_1 ... i_{n-1}>
Channel cyclic_shift(std::size_t n, std::size_t d);
/// |i_1, i_2, ..., i_n> -> |i_1, i_1+i_2, ..., i_1+i_n> (mod d)
Channel ghz_entangler(std::size_t n, std::size_t d);
/// rho -> (1-p) rho + p I/d, Kraus operators from the Weyl basis.
Channel depolarizing(double p, std::size_t d = 2);
/// diag(1, 1, 1, e^{i theta})
Channel controlled_phase(double theta);

/// Names: cnot, swap, cyclic_shift{n,d}, ghz_entangler{n,d}, depolarizing{p,d},
/// controlled_phase{theta}, identity{n,d}. Throws UnknownName / BadParam.
Channel named_channel(const std::string& name, const std::map<std::string, double>& params = {});

/// Density matrix (dims (D, D)) of the normalized Choi state. Throws NotSquare.
QuantumState choi(const Channel& ch);

/// a after b: Kraus {A_i B_j}.
Channel compose(const Channel& a, const Channel& b);
/// Kraus {A_i (x) B_j} on the concatenated factorization.
Channel tensor(const Channel& a, const Channel& b);
/// sum_i p_i N_i
Channel mix_channels(std::span<const Channel> channels, std::span<const double> weights);

struct Superchannel {
  Channel pre;   // V
  Channel post;  // W
};

/// W o N o V
Channel apply_superchannel(const Superchannel& s, const Channel& ch);

enum class FreeFamilyKind { local_product, mixture_of_local_products };

/// Computable sub-family of the free channels: tensor products of local
/// channels, optionally convexly mixed. Every member maps fully separable
/// states to fully separable states.
struct FreeChannelFamily {
  FreeFamilyKind kind = FreeFamilyKind::local_product;
  std::vector<std::size_t> site_dims;
  /// Per-site Kraus rank; empty means d^2 on every site.
  std::vector<std::size_t> kraus_ranks;
  std::size_t mixture_size = 1;

  void validate() const;
  std::size_t rank_of(std::size_t site) const;
  std::size_t terms() const { return kind == FreeFamilyKind::local_product ? 1 : mixture_size; }
};

/// Random member of the family; deterministic in `seed`.
Channel sample_free_channel(const FreeChannelFamily& family, std::uint64_t seed);

/// Channel on one factor built from a local Kraus family, embedded as
/// Id (x) ... (x) K (x) ... (x) Id.
Channel local_product(std::span<const std::vector<ComplexMatrix>> site_kraus, const SystemDims& dims);

/// Local marginal of `ch` on site i: rho -> Tr_{not i} ch(I/d_before (x) rho (x) I/d_after).
Channel local_marginal(const Channel& ch, std::size_t site);

/// max_{ij,ab} |<a|(A - B)(|i><j|)|b>|; zero iff the channels act identically
/// regardless of their Kraus families.
double action_distance(const Channel& a, const Channel& b);

}  // namespace chent
