#pragma once

// Derivative-free multi-start search over the parameter spaces the channel
// measures need. Every real vector decodes to a valid point, so the search
// itself is unconstrained.

#include <cstdint>
#include <functional>
#include <vector>

#include "chent/linalg.hpp"

namespace chent {

struct OptimizerConfig {
  std::size_t starts = 32;
  std::size_t max_iters = 2000;  // per start
  double xtol = 1e-8;
  double ftol = 1e-10;
  std::uint64_t seed = 0;
  /// Weight of sum_blocks (|theta_block|^2 - 1)^2 added to the search
  /// objective; keeps scale-free parameterizations from drifting. Never
  /// enters reported values.
  double penalty_weight = 0.0;
  /// Extra runs started from these points before the random starts.
  std::vector<RealVector> warm_starts;
  /// Kraus rank of probe channels in nested searches; 0 means D^2.
  std::size_t probe_rank = 0;
  /// Alternating rounds for min-max searches.
  std::size_t rounds = 5;

  void validate() const;
};

/// Decoded point. Only the member matching the manifold kind is filled.
struct DomainPoint {
  std::vector<ComplexVector> vectors;  // product_states
  ComplexMatrix matrix;                // unitary
  std::vector<ComplexMatrix> kraus;    // kraus
  RealVector probabilities;            // simplex
  std::vector<DomainPoint> parts;      // composite
};

class ParamManifold {
 public:
  enum class Kind { product_states, unitary, kraus, simplex, composite };

  /// One unit vector per factor, 2d real components each.
  static ParamManifold product_states(std::vector<std::size_t> dims);
  /// exp(iH), H Hermitian from D^2 reals.
  static ParamManifold unitary(std::size_t d);
  /// `rank` operators out x in with sum K^dagger K = I; 2 rank out in reals.
  static ParamManifold kraus(std::size_t in, std::size_t out, std::size_t rank);
  /// Softmax onto the (m-1)-simplex.
  static ParamManifold simplex(std::size_t m);
  static ParamManifold composite(std::vector<ParamManifold> parts);

  Kind kind() const noexcept { return kind_; }
  std::size_t dof() const noexcept { return dof_; }

  /// Throws BadLength.
  DomainPoint decode(std::span<const double> theta) const;
  /// A theta that decodes to `point` (up to the parameterization's gauge).
  /// Not available for unitary (throws BadParam).
  RealVector encode(const DomainPoint& point) const;
  RealVector random_theta(std::mt19937_64& rng) const;
  /// Norm-free blocks used by the drift penalty.
  double drift(std::span<const double> theta) const;

 private:
  ParamManifold(Kind kind, std::size_t dof) : kind_(kind), dof_(dof) {}

  Kind kind_;
  std::size_t dof_;
  std::vector<std::size_t> dims_;  // product_states local dims; kraus {in, out, rank}; unitary {d}; simplex {m}
  std::vector<ParamManifold> parts_;
};

struct Telemetry {
  std::size_t starts = 0;
  std::size_t iterations = 0;
  std::size_t evaluations = 0;
  std::uint64_t seed = 0;
  std::size_t best_start = 0;
};

struct OptimResult {
  double value = 0.0;
  DomainPoint witness;
  RealVector theta;
  Telemetry telemetry;
};

using Objective = std::function<double(const DomainPoint&)>;

/// Best value over warm starts then `starts` Nelder-Mead runs from seeded
/// random points; start s draws from mt19937_64(seed_seq{seed, s}) so results
/// do not depend on evaluation order. Ties keep the earliest start.
/// Objective exceptions and non-finite values surface as ObjectiveFailure
/// carrying the offending theta.
OptimResult maximize(const Objective& objective, const ParamManifold& manifold, const OptimizerConfig& cfg);
OptimResult minimize(const Objective& objective, const ParamManifold& manifold, const OptimizerConfig& cfg);

/// Plain adaptive Nelder-Mead (maximizing) from a single point; exposed for tests.
struct LocalRun {
  RealVector theta;
  double value = 0.0;
  double initial = 0.0;  // value at x0
  std::size_t iterations = 0;
  std::size_t evaluations = 0;
};
LocalRun nelder_mead_max(const std::function<double(std::span<const double>)>& f, RealVector x0, double step,
                         std::size_t max_iters, double xtol, double ftol);

}  // namespace chent
