#pragma once

// Channel-level entanglement quantities. Every value comes with the
// direction in which finite optimization can be wrong.

#include <string>
#include <string_view>
#include <vector>

#include "chent/channels.hpp"
#include "chent/optim.hpp"

namespace chent {

/// Values at or below this count as zero when classifying channels.
inline constexpr double kSepTol = 1e-6;

enum class Bound { exact, lower, upper };
std::string_view to_string(Bound b);
Bound bound_from_string(std::string_view s);

struct Witness {
  std::string kind;  // "none", "product_state", "probe_channel", "free_channel"
  RealVector theta;
  std::vector<ComplexVector> product_state;
  std::vector<ComplexMatrix> kraus;
};

struct MeasureResult {
  std::string measure;
  double value = 0.0;
  Bound bound = Bound::exact;
  Witness witness;
  Telemetry telemetry;
  std::string notes;
};

/// max over probe channels X of S(Choi(N o X) || Choi(M o X)) in bits.
/// M's Choi matrix is smoothed by 1e-9 towards I/D. The identity probe is
/// always among the starts. Throws DimMismatch.
MeasureResult choi_relative_entropy(const Channel& n, const Channel& m, const OptimizerConfig& cfg);

/// Local-product family matching the channel's input factorization.
FreeChannelFamily default_free_family(const Channel& n);

/// min over the family of choi_relative_entropy(N, M), by alternating an
/// outer minimization against the probes found so far with a full inner
/// probe search. Throws DimMismatch.
MeasureResult measure_rr(const Channel& n, const FreeChannelFamily& family, const OptimizerConfig& cfg);

/// max over product pure inputs of the output concurrence. Mixed outputs are
/// handled exactly only on two qubits (UnsupportedMixedOutput otherwise).
/// Throws NotBipartite.
MeasureResult measure_rc(const Channel& n, const OptimizerConfig& cfg);

/// max over fully product pure inputs of the output k-ME concurrence.
/// Throws MixedOutputUnsupported for channels that are not isometries, BadArity.
MeasureResult measure_rkme(const Channel& n, std::size_t k, const OptimizerConfig& cfg);

struct StrengthReport {
  /// Smallest k whose k-ME value is detectably positive; n + 1 if none.
  std::size_t K = 0;
  std::vector<ComplexVector> witness_state;
  std::string classification;  // "Q_K"
  bool mixed_outputs_seen = false;
  std::string caveat;
  std::vector<MeasureResult> per_k;
};

/// Searches k = 2, 3, ... and stops at the first positive value. Channels that
/// are not isometries are restricted to the product inputs whose outputs are
/// pure, with a caveat.
StrengthReport strength_value(const Channel& n, const OptimizerConfig& cfg);

struct GammaClassification {
  /// {k : value_k <= kSepTol}, i.e. the Gamma_k sets the channel belongs to.
  std::vector<std::size_t> separable_ks;
  /// Largest member of separable_ks, 0 if empty.
  std::size_t largest_k = 0;
  /// largest_k == n: maps fully separable states to fully separable states.
  bool in_gamma = false;
  /// The separable set is exactly {2, ..., K-1} for the strength value K.
  bool consistent = true;
  std::size_t strength = 0;
  std::vector<double> values;  // value_k for k = 2..n
};

GammaClassification classify_gamma_k(const Channel& n, const OptimizerConfig& cfg);

/// Choi matrix of (A o B) straight from the two Kraus families.
ComplexMatrix composed_choi(const std::vector<ComplexMatrix>& a, const std::vector<ComplexMatrix>& b);

}  // namespace chent
