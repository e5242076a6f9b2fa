#include "chent/state_measures.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "chent/errors.hpp"

namespace chent {

namespace {

constexpr double kSupportWeight = 1e-8;

double xlog2x(double x) { return x > 0.0 ? x * std::log2(x) : 0.0; }

}  // namespace

EntropyValue relative_entropy(const ComplexMatrix& rho, const ComplexMatrix& sigma, double support_eig) {
  if (rho.rows() != sigma.rows() || !rho.is_square() || !sigma.is_square()) {
    throw Error(ErrorCode::DimMismatch, "relative entropy of different-size operators");
  }
  const auto a = eig_hermitian(rho.hermitian_part());
  const auto b = eig_hermitian(sigma.hermitian_part());
  const std::size_t n = rho.rows();

  double value = 0.0;
  for (double p : a.values) value += xlog2x(p);
  for (std::size_t j = 0; j < n; ++j) {
    // rho-weight carried by sigma's j-th eigenvector
    double weight = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double p = a.values[i];
      if (p <= 0.0) continue;
      Complex ov{};
      for (std::size_t r = 0; r < n; ++r) ov += std::conj(a.vectors(r, i)) * b.vectors(r, j);
      weight += p * std::norm(ov);
    }
    const double q = b.values[j];
    if (q < support_eig || q <= 0.0) {
      if (weight > kSupportWeight) return {std::numeric_limits<double>::infinity(), true};
      continue;
    }
    value -= weight * std::log2(q);
  }
  return {value, false};
}

EntropyValue relative_entropy(const QuantumState& rho, const QuantumState& sigma) {
  if (!(rho.dims() == sigma.dims())) {
    throw Error(ErrorCode::DimMismatch, rho.dims().to_string() + " vs " + sigma.dims().to_string());
  }
  return relative_entropy(rho.rho(), sigma.rho());
}

ComplexMatrix smooth_support(const ComplexMatrix& sigma, double eps) {
  const std::size_t n = sigma.rows();
  return sigma * Complex(1.0 - eps) + ComplexMatrix::identity(n) * Complex(eps / static_cast<double>(n));
}

double concurrence_of_vector(std::span<const Complex> psi, const SystemDims& dims) {
  if (dims.count() != 2) throw Error(ErrorCode::NotBipartite, "concurrence needs exactly two factors");
  const std::size_t first[] = {0};
  return std::sqrt(2.0 * reduced_deficit(psi, dims, first));
}

double concurrence_pure(const QuantumState& state) {
  if (state.dims().count() != 2) throw Error(ErrorCode::NotBipartite, "concurrence needs exactly two factors");
  return concurrence_of_vector(state.pure_vector(), state.dims());
}

double concurrence_wootters(const ComplexMatrix& rho) {
  if (rho.rows() != 4 || rho.cols() != 4) throw Error(ErrorCode::DimMismatch, "Wootters concurrence needs a 2-qubit state");
  const ComplexMatrix yy{{0, 0, 0, -1}, {0, 0, 1, 0}, {0, 1, 0, 0}, {-1, 0, 0, 0}};
  const ComplexMatrix h = rho.hermitian_part();
  const ComplexMatrix flipped = yy * h.conj() * yy;
  const ComplexMatrix s = matrix_sqrt_psd(h);
  const auto es = eig_hermitian((s * flipped * s).hermitian_part());
  std::vector<double> l(4);
  for (std::size_t i = 0; i < 4; ++i) l[i] = std::sqrt(std::max(0.0, es.values[i]));
  // ascending order from the eigensolver
  return std::max(0.0, l[3] - l[2] - l[1] - l[0]);
}

double concurrence_wootters(const QuantumState& state) {
  if (state.dims() != SystemDims({2, 2})) {
    throw Error(ErrorCode::DimMismatch, "Wootters concurrence needs dims (2,2), got " + state.dims().to_string());
  }
  return concurrence_wootters(state.rho());
}

double kme_of_vector(std::span<const Complex> psi, const SystemDims& dims, std::size_t k) {
  const std::size_t n = dims.count();
  if (k < 2 || k > n) {
    throw Error(ErrorCode::BadArity, "k = " + std::to_string(k) + " outside [2, " + std::to_string(n) + "]");
  }
  double best = std::numeric_limits<double>::infinity();
  for (const auto& part : cached_partitions(n, k)) {
    double deficit = 0.0;
    for (const auto& block : part.blocks()) deficit += reduced_deficit(psi, dims, block);
    best = std::min(best, deficit);
    if (best == 0.0) break;
  }
  return std::sqrt(2.0 * best / static_cast<double>(k));
}

double kme_concurrence_pure(const QuantumState& state, std::size_t k) {
  const std::size_t n = state.dims().count();
  if (k < 2 || k > n) {
    throw Error(ErrorCode::BadArity, "k = " + std::to_string(k) + " outside [2, " + std::to_string(n) + "]");
  }
  return kme_of_vector(state.pure_vector(), state.dims(), k);
}

namespace {

struct Decomposer {
  const SystemDims& dims;
  RoofInner inner;
  std::vector<ComplexVector> weighted;  // sqrt(lambda_i) e_i

  double inner_value(std::span<const Complex> psi) const {
    return inner.kind == RoofInner::Kind::concurrence ? concurrence_of_vector(psi, dims)
                                                      : kme_of_vector(psi, dims, inner.k);
  }

  // mixing matrix u: m x r with orthonormal columns
  double average(const ComplexMatrix& u) const {
    const std::size_t d = dims.total();
    double total = 0.0;
    for (std::size_t j = 0; j < u.rows(); ++j) {
      ComplexVector v(d);
      for (std::size_t i = 0; i < weighted.size(); ++i) {
        const Complex c = u(j, i);
        if (c == Complex{}) continue;
        for (std::size_t x = 0; x < d; ++x) v[x] += c * weighted[i][x];
      }
      const double p = std::pow(norm(v), 2);
      if (p < 1e-15) continue;
      const double s = 1.0 / std::sqrt(p);
      for (auto& z : v) z *= s;
      total += p * inner_value(v);
    }
    return total;
  }
};

}  // namespace

double convex_roof_upper_bound(const QuantumState& state, RoofInner inner, std::size_t trials, std::uint64_t seed) {
  if (trials < 1) throw Error(ErrorCode::BadParam, "at least one trial required");
  if (inner.kind == RoofInner::Kind::concurrence && state.dims().count() != 2) {
    throw Error(ErrorCode::NotBipartite, "concurrence roof needs exactly two factors");
  }
  if (inner.kind == RoofInner::Kind::kme && (inner.k < 2 || inner.k > state.dims().count())) {
    throw Error(ErrorCode::BadArity, "k outside [2, n]");
  }

  Decomposer dec{state.dims(), inner, {}};
  if (state.vector()) {
    dec.weighted.push_back(*state.vector());
  } else {
    const auto es = eig_hermitian(state.rho());
    for (std::size_t i = es.values.size(); i-- > 0;) {
      if (es.values[i] <= 1e-12) break;
      ComplexVector v = es.vectors.column(i);
      const double s = std::sqrt(es.values[i]);
      for (auto& z : v) z *= s;
      dec.weighted.push_back(std::move(v));
    }
  }
  const std::size_t r = dec.weighted.size();
  if (r == 1) return dec.average(ComplexMatrix::identity(1));

  ComplexMatrix best_u = ComplexMatrix::identity(r);
  double best = dec.average(best_u);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n01;
  double step = 0.3;
  for (std::size_t t = 1; t < trials; ++t) {
    ComplexMatrix u;
    if (t % 4 == 1) {
      u = random_unitary(r, rng);
    } else {
      u = best_u;
      for (auto& z : u.data()) z += step * Complex(n01(rng), n01(rng));
      u = orthonormalize_columns(u);
    }
    const double v = dec.average(u);
    if (v < best) {
      best = v;
      best_u = std::move(u);
      if (t % 4 != 1) step = std::min(0.5, step * 1.2);
    } else if (t % 4 != 1) {
      step = std::max(1e-3, step * 0.9);
    }
  }
  return best;
}

}  // namespace chent
