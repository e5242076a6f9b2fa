#include "chent/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "chent/errors.hpp"
#include "chent/state_measures.hpp"

namespace chent {

double grid_max_concurrence(const Channel& n, std::size_t steps) {
  if (n.in_dims() != SystemDims({2, 2}) || n.out_dims() != SystemDims({2, 2})) {
    throw Error(ErrorCode::DimMismatch, "grid oracle needs a two-qubit channel");
  }
  if (steps < 8) throw Error(ErrorCode::BadParam, "grid needs at least 8 steps per angle");
  if (steps > 100) throw Error(ErrorCode::TooLarge, "steps^4 evaluations exceed 1e8");

  std::vector<ComplexVector> grid;
  grid.reserve(steps * steps);
  for (std::size_t i = 0; i < steps; ++i) {
    const double a = std::numbers::pi * static_cast<double>(i) / (2.0 * static_cast<double>(steps));
    for (std::size_t j = 0; j < steps; ++j) {
      const double phi = 2.0 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(steps);
      grid.push_back({std::cos(a), std::polar(std::sin(a), phi)});
    }
  }
  const bool unitary = n.kraus().size() == 1;
  const ComplexMatrix& u = n.kraus().front();
  double best = 0.0;
  ComplexVector psi(4);
  for (const auto& x : grid)
    for (const auto& y : grid) {
      psi[0] = x[0] * y[0];
      psi[1] = x[0] * y[1];
      psi[2] = x[1] * y[0];
      psi[3] = x[1] * y[1];
      double c;
      if (unitary) {
        Complex out[4];
        for (std::size_t r = 0; r < 4; ++r) out[r] = u(r, 0) * psi[0] + u(r, 1) * psi[1] + u(r, 2) * psi[2] + u(r, 3) * psi[3];
        c = 2.0 * std::abs(out[0] * out[3] - out[1] * out[2]);
      } else {
        c = concurrence_wootters(apply_to_vector(n, psi));
      }
      best = std::max(best, c);
    }
  return best;
}

PartitionCheck exhaustive_partition_check(const QuantumState& state, std::size_t k) {
  const std::size_t n = state.dims().count();
  if (n > 6) throw Error(ErrorCode::TooLarge, "partition oracle handles at most 6 factors");
  if (k < 2 || k > n) throw Error(ErrorCode::BadArity, "k outside [2, n]");
  const ComplexVector psi = state.pure_vector();

  // labellings with label[i] <= max(label[0..i-1]) + 1 enumerate each partition once
  PartitionCheck out;
  out.nonseparable_everywhere = true;
  std::vector<std::size_t> label(n, 0);
  std::size_t combos = 1;
  for (std::size_t i = 0; i < n; ++i) combos *= k;
  for (std::size_t code = 0; code < combos; ++code) {
    std::size_t c = code;
    for (std::size_t i = 0; i < n; ++i) {
      label[i] = c % k;
      c /= k;
    }
    bool canonical = label[0] == 0;
    std::size_t top = 0;
    for (std::size_t i = 1; i < n && canonical; ++i) {
      if (label[i] > top + 1) canonical = false;
      top = std::max(top, label[i]);
    }
    if (!canonical || top + 1 != k) continue;

    PartitionVerdict v;
    v.blocks.assign(k, {});
    for (std::size_t i = 0; i < n; ++i) v.blocks[label[i]].push_back(i);
    v.separable = true;
    for (const auto& b : v.blocks) {
      const ComplexMatrix r = reduced_from_vector(psi, state.dims(), b);
      double p = 0.0;
      for (const auto& z : r.data()) p += std::norm(z);
      v.block_purities.push_back(p);
      if (std::abs(p - 1.0) > 1e-8) v.separable = false;
    }
    if (v.separable) out.nonseparable_everywhere = false;
    out.detail.push_back(std::move(v));
  }
  return out;
}

double sampled_free_distance_floor(const Channel& n, std::size_t samples, std::uint64_t seed) {
  if (samples < 1) throw Error(ErrorCode::BadParam, "at least one sample required");
  if (!(n.in_dims() == n.out_dims())) throw Error(ErrorCode::DimMismatch, "free-distance floor needs in == out dims");
  const ComplexMatrix rho = n.choi_matrix();
  const std::size_t sites = n.in_dims().count();
  auto distance = [&](const Channel& m) {
    const ComplexMatrix sigma = smooth_support(m.choi_matrix(), 1e-9);
    return relative_entropy(rho, sigma, 0.0).value;
  };

  std::vector<std::vector<ComplexMatrix>> marg, ids;
  for (std::size_t s = 0; s < sites; ++s) {
    marg.push_back(local_marginal(n, s).kraus());
    ids.push_back({ComplexMatrix::identity(n.in_dims()[s])});
  }
  double best = std::min(distance(local_product(ids, n.in_dims())), distance(local_product(marg, n.in_dims())));

  FreeChannelFamily fam;
  fam.site_dims.assign(n.in_dims().dims().begin(), n.in_dims().dims().end());
  for (std::size_t i = 0; i < samples; ++i) {
    best = std::min(best, distance(sample_free_channel(fam, seed * 1000003 + i)));
  }
  return best;
}

}  // namespace chent
