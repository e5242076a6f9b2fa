#include "chent/states.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numeric>
#include <sstream>

#include "chent/errors.hpp"

namespace chent {

SystemDims::SystemDims(std::vector<std::size_t> dims) : dims_(std::move(dims)) {
  if (dims_.empty()) throw Error(ErrorCode::DimMismatch, "at least one subsystem required");
  for (std::size_t d : dims_) {
    if (d < 2) throw Error(ErrorCode::DimMismatch, "local dimensions must be >= 2");
    if (total_ > kMaxTotal / d) throw Error(ErrorCode::TooLarge, "total dimension exceeds 4096");
    total_ *= d;
  }
}

SystemDims SystemDims::concat(const SystemDims& other) const {
  std::vector<std::size_t> all = dims_;
  all.insert(all.end(), other.dims_.begin(), other.dims_.end());
  return SystemDims(std::move(all));
}

std::size_t SystemDims::total_of(std::span<const std::size_t> indices) const {
  std::size_t t = 1;
  for (std::size_t i : indices) t *= dims_.at(i);
  return t;
}

std::string SystemDims::to_string() const {
  std::ostringstream os;
  os << '(';
  for (std::size_t i = 0; i < dims_.size(); ++i) os << (i ? "," : "") << dims_[i];
  os << ')';
  return os.str();
}

double purity_of(const ComplexMatrix& rho) {
  double s = 0.0;
  for (const auto& z : rho.data()) s += std::norm(z);
  return s;
}

QuantumState::QuantumState(SystemDims dims, ComplexMatrix rho, std::optional<ComplexVector> psi)
    : dims_(std::move(dims)), rho_(std::move(rho)), psi_(std::move(psi)) {
  purity_ = psi_ ? 1.0 : purity_of(rho_);
  pure_ = purity_ >= 1.0 - 1e-9;
}

namespace {

void check_density_shape(const SystemDims& dims, const ComplexMatrix& rho) {
  if (rho.rows() != dims.total() || rho.cols() != dims.total()) {
    throw Error(ErrorCode::DimMismatch, "density matrix is not " + std::to_string(dims.total()) +
                                            "x" + std::to_string(dims.total()));
  }
  if (!rho.is_hermitian(1e-9)) throw Error(ErrorCode::NotState, "density matrix is not Hermitian");
  const Complex tr = rho.trace();
  if (std::abs(tr.real() - 1.0) > 1e-9 || std::abs(tr.imag()) > 1e-9) {
    throw Error(ErrorCode::NotState, "density matrix trace differs from 1");
  }
}

}  // namespace

QuantumState QuantumState::from_density(SystemDims dims, ComplexMatrix rho) {
  check_density_shape(dims, rho);
  rho = rho.hermitian_part();
  const auto es = eig_hermitian(rho);
  if (es.values.front() < -1e-9) throw Error(ErrorCode::NotState, "density matrix has a negative eigenvalue");
  return QuantumState(std::move(dims), std::move(rho), std::nullopt);
}

QuantumState QuantumState::from_density_unchecked(SystemDims dims, ComplexMatrix rho) {
  check_density_shape(dims, rho);
  return QuantumState(std::move(dims), rho.hermitian_part(), std::nullopt);
}

QuantumState QuantumState::from_vector(SystemDims dims, ComplexVector psi) {
  if (psi.size() != dims.total()) throw Error(ErrorCode::DimMismatch, "state vector length");
  if (std::abs(norm(psi) - 1.0) > 1e-9) throw Error(ErrorCode::NotNormalized, "state vector norm differs from 1");
  ComplexMatrix rho = outer(psi, psi);
  return QuantumState(std::move(dims), std::move(rho), std::move(psi));
}

ComplexVector QuantumState::pure_vector() const {
  if (psi_) return *psi_;
  if (!pure_) throw Error(ErrorCode::NotPure, "state is mixed (Tr rho^2 < 1 - 1e-9)");
  const auto es = eig_hermitian(rho_);
  return es.vectors.column(rho_.rows() - 1);
}

PartitionSpec::PartitionSpec(std::size_t n, std::vector<std::vector<std::size_t>> blocks)
    : n_(n), blocks_(std::move(blocks)) {
  std::vector<bool> seen(n, false);
  for (auto& b : blocks_) {
    if (b.empty()) throw Error(ErrorCode::BadIndexSet, "empty partition block");
    std::sort(b.begin(), b.end());
    for (std::size_t i : b) {
      if (i >= n || seen[i]) throw Error(ErrorCode::BadIndexSet, "partition blocks overlap or exceed n");
      seen[i] = true;
    }
  }
  if (std::find(seen.begin(), seen.end(), false) != seen.end()) {
    throw Error(ErrorCode::BadIndexSet, "partition does not cover every subsystem");
  }
  std::sort(blocks_.begin(), blocks_.end(),
            [](const auto& a, const auto& b) { return a.front() < b.front(); });
}

std::string PartitionSpec::to_string() const {
  std::ostringstream os;
  for (const auto& b : blocks_) {
    os << '{';
    for (std::size_t i = 0; i < b.size(); ++i) os << (i ? "," : "") << b[i];
    os << '}';
  }
  return os.str();
}

QuantumState product_pure(std::span<const ComplexVector> locals, const SystemDims& dims) {
  if (locals.size() != dims.count()) throw Error(ErrorCode::DimMismatch, "one local vector per subsystem required");
  ComplexVector psi{Complex(1.0, 0.0)};
  for (std::size_t i = 0; i < locals.size(); ++i) {
    if (locals[i].size() != dims[i]) throw Error(ErrorCode::DimMismatch, "local vector dimension");
    if (std::abs(norm(locals[i]) - 1.0) > 1e-9) throw Error(ErrorCode::NotNormalized, "local vector is not unit norm");
    psi = kron(psi, locals[i]);
  }
  return QuantumState::from_vector(dims, std::move(psi));
}

QuantumState max_entangled(std::size_t d) {
  if (d < 2) throw Error(ErrorCode::BadParam, "local dimension must be >= 2");
  ComplexVector psi(d * d);
  const double amp = 1.0 / std::sqrt(static_cast<double>(d));
  for (std::size_t i = 0; i < d; ++i) psi[i * d + i] = amp;
  return QuantumState::from_vector(SystemDims({d, d}), std::move(psi));
}

namespace {

void check_keep(std::span<const std::size_t> keep, std::size_t n) {
  if (keep.empty()) throw Error(ErrorCode::BadIndexSet, "kept index set is empty");
  for (std::size_t i = 0; i < keep.size(); ++i) {
    if (keep[i] >= n) throw Error(ErrorCode::BadIndexSet, "subsystem index out of range");
    if (i > 0 && keep[i] <= keep[i - 1]) throw Error(ErrorCode::BadIndexSet, "kept indices must be sorted and distinct");
  }
}

// Splits every flat index into (index over kept factors, index over the rest).
struct CutIndex {
  std::size_t keep_dim = 1;
  std::size_t rest_dim = 1;
  std::vector<std::size_t> keep_of;
  std::vector<std::size_t> rest_of;
};

CutIndex make_cut(const SystemDims& dims, std::span<const std::size_t> keep) {
  const std::size_t n = dims.count();
  std::vector<bool> kept(n, false);
  for (std::size_t i : keep) kept[i] = true;
  CutIndex cut;
  cut.keep_dim = dims.total_of(keep);
  cut.rest_dim = dims.total() / cut.keep_dim;
  cut.keep_of.resize(dims.total());
  cut.rest_of.resize(dims.total());
  std::vector<std::size_t> digit(n, 0);
  for (std::size_t flat = 0; flat < dims.total(); ++flat) {
    std::size_t k = 0, r = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (kept[i]) k = k * dims[i] + digit[i];
      else r = r * dims[i] + digit[i];
    }
    cut.keep_of[flat] = k;
    cut.rest_of[flat] = r;
    for (std::size_t i = n; i-- > 0;) {
      if (++digit[i] < dims[i]) break;
      digit[i] = 0;
    }
  }
  return cut;
}

ComplexMatrix reshape_for_cut(std::span<const Complex> psi, const CutIndex& cut) {
  ComplexMatrix m(cut.keep_dim, cut.rest_dim);
  for (std::size_t flat = 0; flat < psi.size(); ++flat) m(cut.keep_of[flat], cut.rest_of[flat]) = psi[flat];
  return m;
}

}  // namespace

ComplexMatrix partial_trace_matrix(const ComplexMatrix& rho, const SystemDims& dims,
                                   std::span<const std::size_t> keep) {
  check_keep(keep, dims.count());
  if (rho.rows() != dims.total()) throw Error(ErrorCode::DimMismatch, "density matrix size");
  const CutIndex cut = make_cut(dims, keep);
  // table[a * rest + r] = flat index
  std::vector<std::size_t> table(dims.total());
  for (std::size_t flat = 0; flat < dims.total(); ++flat) table[cut.keep_of[flat] * cut.rest_dim + cut.rest_of[flat]] = flat;
  ComplexMatrix out(cut.keep_dim, cut.keep_dim);
  for (std::size_t a = 0; a < cut.keep_dim; ++a)
    for (std::size_t b = 0; b < cut.keep_dim; ++b) {
      Complex acc = 0.0;
      for (std::size_t r = 0; r < cut.rest_dim; ++r) acc += rho(table[a * cut.rest_dim + r], table[b * cut.rest_dim + r]);
      out(a, b) = acc;
    }
  return out;
}

ComplexMatrix reduced_from_vector(std::span<const Complex> psi, const SystemDims& dims,
                                  std::span<const std::size_t> keep) {
  check_keep(keep, dims.count());
  if (psi.size() != dims.total()) throw Error(ErrorCode::DimMismatch, "state vector length");
  const ComplexMatrix m = reshape_for_cut(psi, make_cut(dims, keep));
  return m * m.adjoint();
}

double reduced_purity(std::span<const Complex> psi, const SystemDims& dims, std::span<const std::size_t> block) {
  check_keep(block, dims.count());
  if (psi.size() != dims.total()) throw Error(ErrorCode::DimMismatch, "state vector length");
  const ComplexMatrix m = reshape_for_cut(psi, make_cut(dims, block));
  // M M^dagger and M^dagger M share their nonzero spectrum
  const ComplexMatrix r = m.rows() <= m.cols() ? m * m.adjoint() : m.adjoint() * m;
  return purity_of(r);
}

double reduced_deficit(std::span<const Complex> psi, const SystemDims& dims, std::span<const std::size_t> block) {
  check_keep(block, dims.count());
  if (psi.size() != dims.total()) throw Error(ErrorCode::DimMismatch, "state vector length");
  ComplexMatrix m = reshape_for_cut(psi, make_cut(dims, block));
  if (m.rows() > m.cols()) m = m.transpose();
  const std::size_t r = m.rows(), c = m.cols();
  if (r * r * c * c > 16'000'000) return std::max(0.0, 1.0 - purity_of(m * m.adjoint()));
  // 1 - Tr rho^2 = 2 sum over 2x2 minors |m_ia m_jb - m_ib m_ja|^2; no cancellation near product states
  double s = 0.0;
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = i + 1; j < r; ++j)
      for (std::size_t a = 0; a < c; ++a)
        for (std::size_t b = a + 1; b < c; ++b) s += std::norm(m(i, a) * m(j, b) - m(i, b) * m(j, a));
  return 2.0 * s;
}

QuantumState partial_trace(const QuantumState& state, std::span<const std::size_t> keep) {
  check_keep(keep, state.dims().count());
  std::vector<std::size_t> kept_dims;
  for (std::size_t i : keep) kept_dims.push_back(state.dims()[i]);
  SystemDims out_dims(std::move(kept_dims));
  if (keep.size() == state.dims().count()) return state;
  ComplexMatrix rho = state.vector() ? reduced_from_vector(*state.vector(), state.dims(), keep)
                                     : partial_trace_matrix(state.rho(), state.dims(), keep);
  return QuantumState::from_density_unchecked(std::move(out_dims), std::move(rho));
}

QuantumState mix(std::span<const QuantumState> states, std::span<const double> weights) {
  if (states.empty() || states.size() != weights.size()) {
    throw Error(ErrorCode::WeightMismatch, "one weight per state required");
  }
  double sum = 0.0;
  for (double w : weights) {
    if (w < 0.0) throw Error(ErrorCode::WeightMismatch, "negative weight");
    sum += w;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw Error(ErrorCode::WeightMismatch, "weights do not sum to 1");
  ComplexMatrix rho(states.front().rho().rows(), states.front().rho().cols());
  for (std::size_t i = 0; i < states.size(); ++i) {
    if (!(states[i].dims() == states.front().dims())) throw Error(ErrorCode::DimMismatch, "states have different dims");
    rho += states[i].rho() * Complex(weights[i], 0.0);
  }
  if (states.size() == 1) return states.front();
  return QuantumState::from_density_unchecked(states.front().dims(), std::move(rho));
}

std::vector<PartitionSpec> enumerate_partitions(std::size_t n, std::size_t k) {
  if (k < 1 || k > n || n > 12) throw Error(ErrorCode::BadArity, "need 1 <= k <= n <= 12");
  std::vector<PartitionSpec> out;
  // restricted growth strings: label[0] = 0, label[i] <= 1 + max(label[0..i-1])
  std::vector<std::size_t> label(n, 0);
  auto recurse = [&](auto&& self, std::size_t i, std::size_t used) -> void {
    if (used + (n - i) < k) return;
    if (i == n) {
      if (used != k) return;
      std::vector<std::vector<std::size_t>> blocks(k);
      for (std::size_t j = 0; j < n; ++j) blocks[label[j]].push_back(j);
      out.emplace_back(n, std::move(blocks));
      return;
    }
    for (std::size_t b = 0; b <= used && b < k; ++b) {
      label[i] = b;
      self(self, i + 1, b == used ? used + 1 : used);
    }
  };
  recurse(recurse, 0, 0);
  return out;
}

const std::vector<PartitionSpec>& cached_partitions(std::size_t n, std::size_t k) {
  static std::mutex mutex;
  static std::map<std::pair<std::size_t, std::size_t>, std::vector<PartitionSpec>> memo;
  std::lock_guard lock(mutex);
  auto it = memo.find({n, k});
  if (it == memo.end()) it = memo.emplace(std::pair{n, k}, enumerate_partitions(n, k)).first;
  return it->second;
}

}  // namespace chent
