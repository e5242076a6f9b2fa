#include "chent/channels.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "chent/errors.hpp"

namespace chent {

namespace {

ComplexMatrix completeness_defect(const std::vector<ComplexMatrix>& kraus, std::size_t in_dim) {
  ComplexMatrix sum(in_dim, in_dim);
  for (const auto& k : kraus) sum += k.adjoint() * k;
  return sum - ComplexMatrix::identity(in_dim);
}

ComplexMatrix choi_of(const std::vector<ComplexMatrix>& kraus, std::size_t in_dim, std::size_t out_dim) {
  const std::size_t n = in_dim * out_dim;
  ComplexMatrix c(n, n);
  const double scale = 1.0 / static_cast<double>(in_dim);
  for (const auto& k : kraus) {
    // row-major storage of K is exactly vec(K)[a * in + i] = K(a, i)
    const auto v = k.data();
    for (std::size_t r = 0; r < n; ++r) {
      const Complex vr = v[r] * scale;
      if (vr == Complex{}) continue;
      for (std::size_t s = 0; s < n; ++s) c(r, s) += vr * std::conj(v[s]);
    }
  }
  return c;
}

}  // namespace

Channel::Channel(SystemDims in_dims, SystemDims out_dims, std::vector<ComplexMatrix> kraus, double tol)
    : in_(std::move(in_dims)), out_(std::move(out_dims)), kraus_(std::move(kraus)) {
  if (kraus_.empty()) throw Error(ErrorCode::NotChannel, "at least one Kraus operator required");
  for (const auto& k : kraus_) {
    if (k.rows() != out_.total() || k.cols() != in_.total()) {
      throw Error(ErrorCode::DimMismatch, "Kraus operator must be " + std::to_string(out_.total()) + "x" +
                                              std::to_string(in_.total()));
    }
  }
  const double defect = completeness_defect(kraus_, in_.total()).max_abs();
  if (defect > tol) {
    throw Error(ErrorCode::NotChannel, "sum K^dagger K deviates from identity by " + std::to_string(defect));
  }
  if (kraus_.size() > in_.total() * out_.total()) {
    kraus_ = kraus_from_choi(choi_of(kraus_, in_.total(), out_.total()), in_.total(), out_.total());
  }
}

ComplexMatrix Channel::choi_matrix() const { return choi_of(kraus_, in_.total(), out_.total()); }

std::vector<ComplexMatrix> kraus_from_choi(const ComplexMatrix& choi, std::size_t in_dim, std::size_t out_dim,
                                           double cutoff) {
  if (choi.rows() != in_dim * out_dim) throw Error(ErrorCode::DimMismatch, "Choi matrix size");
  const auto es = eig_hermitian(choi.hermitian_part());
  const double top = std::max(es.values.back(), 0.0);
  std::vector<ComplexMatrix> kraus;
  for (std::size_t j = es.values.size(); j-- > 0;) {
    const double lambda = es.values[j];
    if (lambda <= cutoff * std::max(top, 1.0)) break;
    const double amp = std::sqrt(lambda * static_cast<double>(in_dim));
    ComplexMatrix k(out_dim, in_dim);
    for (std::size_t r = 0; r < out_dim * in_dim; ++r) k.data()[r] = amp * es.vectors(r, j);
    kraus.push_back(std::move(k));
  }
  if (kraus.empty()) throw Error(ErrorCode::NotChannel, "Choi matrix has no positive eigenvalue");
  return kraus;
}

QuantumState apply(const Channel& ch, const QuantumState& state) {
  if (!(state.dims() == ch.in_dims())) {
    throw Error(ErrorCode::DimMismatch, "state dims " + state.dims().to_string() + " vs channel input " +
                                            ch.in_dims().to_string());
  }
  if (state.vector() && ch.is_isometry()) {
    ComplexVector out = ch.kraus().front() * std::span<const Complex>(*state.vector());
    const double n = norm(out);
    for (auto& z : out) z /= n;
    return QuantumState::from_vector(ch.out_dims(), std::move(out));
  }
  ComplexMatrix rho(ch.out_total(), ch.out_total());
  for (const auto& k : ch.kraus()) rho += k * state.rho() * k.adjoint();
  return QuantumState::from_density_unchecked(ch.out_dims(), std::move(rho));
}

ComplexMatrix apply_to_vector(const Channel& ch, std::span<const Complex> psi) {
  if (psi.size() != ch.in_total()) throw Error(ErrorCode::DimMismatch, "input vector length");
  ComplexMatrix rho(ch.out_total(), ch.out_total());
  for (const auto& k : ch.kraus()) {
    const ComplexVector w = k * psi;
    for (std::size_t r = 0; r < w.size(); ++r) {
      if (w[r] == Complex{}) continue;
      for (std::size_t c = 0; c < w.size(); ++c) rho(r, c) += w[r] * std::conj(w[c]);
    }
  }
  return rho;
}

Channel unitary_channel(const ComplexMatrix& u, const SystemDims& dims) {
  if (!u.is_square() || u.rows() != dims.total()) throw Error(ErrorCode::DimMismatch, "unitary size");
  if (max_abs_diff(u.adjoint() * u, ComplexMatrix::identity(u.rows())) > 1e-8) {
    throw Error(ErrorCode::NotUnitary, "U^dagger U deviates from identity");
  }
  return Channel(dims, dims, {u});
}

Channel identity_channel(const SystemDims& dims) {
  return Channel(dims, dims, {ComplexMatrix::identity(dims.total())});
}

namespace {

// |digits> as a flat index in base d, leftmost digit most significant
std::size_t flat_index(std::span<const std::size_t> digits, std::size_t d) {
  std::size_t idx = 0;
  for (std::size_t x : digits) idx = idx * d + x;
  return idx;
}

std::vector<std::size_t> digits_of(std::size_t flat, std::size_t n, std::size_t d) {
  std::vector<std::size_t> dg(n);
  for (std::size_t i = n; i-- > 0;) {
    dg[i] = flat % d;
    flat /= d;
  }
  return dg;
}

std::size_t integer_param(const std::map<std::string, double>& params, const std::string& key, std::size_t fallback) {
  auto it = params.find(key);
  if (it == params.end()) return fallback;
  const double v = it->second;
  if (!(v >= 2.0) || v != std::floor(v) || v > 64.0) {
    throw Error(ErrorCode::BadParam, "parameter '" + key + "' must be an integer in [2, 64]");
  }
  return static_cast<std::size_t>(v);
}

double real_param(const std::map<std::string, double>& params, const std::string& key, double fallback) {
  auto it = params.find(key);
  return it == params.end() ? fallback : it->second;
}

ComplexMatrix ket_bra(std::size_t d, std::size_t r, std::size_t c) {
  ComplexMatrix m(d, d);
  m(r, c) = 1.0;
  return m;
}

}  // namespace

Channel cnot() {
  ComplexMatrix u(4, 4);
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 2; ++j) u += kron(ket_bra(2, i, i), ket_bra(2, j, (i + j) % 2));
  return unitary_channel(u, SystemDims({2, 2}));
}

Channel swap_channel() {
  ComplexMatrix u(4, 4);
  for (std::size_t i = 0; i < 2; ++i) u += kron(ket_bra(2, i, (i + 1) % 2), ket_bra(2, (i + 1) % 2, i));
  for (std::size_t j = 0; j < 2; ++j) u += kron(ket_bra(2, j, j), ket_bra(2, j, j));
  return unitary_channel(u, SystemDims({2, 2}));
}

Channel cyclic_shift(std::size_t n, std::size_t d) {
  if (n < 2 || d < 2) throw Error(ErrorCode::BadParam, "cyclic_shift needs n >= 2 and d >= 2");
  const SystemDims dims(std::vector<std::size_t>(n, d));
  ComplexMatrix u(dims.total(), dims.total());
  for (std::size_t in = 0; in < dims.total(); ++in) {
    const auto i = digits_of(in, n, d);
    std::vector<std::size_t> o(n);
    o[0] = i[n - 1];
    for (std::size_t j = 1; j < n; ++j) o[j] = i[j - 1];
    u(flat_index(o, d), in) = 1.0;
  }
  return unitary_channel(u, dims);
}

Channel ghz_entangler(std::size_t n, std::size_t d) {
  if (n < 2 || d < 2) throw Error(ErrorCode::BadParam, "ghz_entangler needs n >= 2 and d >= 2");
  const SystemDims dims(std::vector<std::size_t>(n, d));
  ComplexMatrix u(dims.total(), dims.total());
  for (std::size_t in = 0; in < dims.total(); ++in) {
    const auto i = digits_of(in, n, d);
    std::vector<std::size_t> o(n);
    o[0] = i[0];
    for (std::size_t j = 1; j < n; ++j) o[j] = (i[0] + i[j]) % d;
    u(flat_index(o, d), in) = 1.0;
  }
  return unitary_channel(u, dims);
}

Channel depolarizing(double p, std::size_t d) {
  if (!(p >= 0.0 && p <= 1.0)) throw Error(ErrorCode::BadParam, "depolarizing p must lie in [0, 1]");
  if (d < 2) throw Error(ErrorCode::BadParam, "depolarizing d must be >= 2");
  const double dd = static_cast<double>(d * d);
  const Complex omega = std::polar(1.0, 2.0 * std::numbers::pi / static_cast<double>(d));
  std::vector<ComplexMatrix> kraus;
  for (std::size_t a = 0; a < d; ++a) {
    for (std::size_t b = 0; b < d; ++b) {
      const double weight = (a == 0 && b == 0) ? 1.0 - p + p / dd : p / dd;
      if (weight <= 0.0) continue;
      // X^a Z^b
      ComplexMatrix w(d, d);
      for (std::size_t j = 0; j < d; ++j) w((j + a) % d, j) = std::pow(omega, static_cast<double>(j * b));
      kraus.push_back(w * Complex(std::sqrt(weight), 0.0));
    }
  }
  const SystemDims dims({d});
  return Channel(dims, dims, std::move(kraus));
}

Channel controlled_phase(double theta) {
  ComplexMatrix u = ComplexMatrix::identity(4);
  u(3, 3) = std::polar(1.0, theta);
  return unitary_channel(u, SystemDims({2, 2}));
}

Channel named_channel(const std::string& name, const std::map<std::string, double>& params) {
  if (name == "cnot") return cnot();
  if (name == "swap") return swap_channel();
  if (name == "cyclic_shift") return cyclic_shift(integer_param(params, "n", 3), integer_param(params, "d", 2));
  if (name == "ghz_entangler") return ghz_entangler(integer_param(params, "n", 3), integer_param(params, "d", 2));
  if (name == "depolarizing") return depolarizing(real_param(params, "p", 1.0), integer_param(params, "d", 2));
  if (name == "controlled_phase") {
    const double theta = real_param(params, "theta", std::numbers::pi);
    if (!std::isfinite(theta)) throw Error(ErrorCode::BadParam, "theta must be finite");
    return controlled_phase(theta);
  }
  if (name == "identity") {
    const std::size_t n = params.contains("n") ? static_cast<std::size_t>(real_param(params, "n", 1)) : 1;
    if (n < 1 || n > 12) throw Error(ErrorCode::BadParam, "identity n must lie in [1, 12]");
    return identity_channel(SystemDims(std::vector<std::size_t>(n, integer_param(params, "d", 2))));
  }
  throw Error(ErrorCode::UnknownName, "unknown channel name '" + name + "'");
}

QuantumState choi(const Channel& ch) {
  if (ch.in_total() != ch.out_total()) throw Error(ErrorCode::NotSquare, "Choi state needs in_D == out_D");
  const std::size_t d = ch.in_total();
  return QuantumState::from_density_unchecked(SystemDims({d, d}), ch.choi_matrix());
}

Channel compose(const Channel& a, const Channel& b) {
  if (!(a.in_dims() == b.out_dims())) {
    throw Error(ErrorCode::DimMismatch, "compose: " + a.in_dims().to_string() + " vs " + b.out_dims().to_string());
  }
  std::vector<ComplexMatrix> kraus;
  kraus.reserve(a.kraus().size() * b.kraus().size());
  for (const auto& ka : a.kraus())
    for (const auto& kb : b.kraus()) kraus.push_back(ka * kb);
  return Channel(b.in_dims(), a.out_dims(), std::move(kraus), 1e-7);
}

Channel tensor(const Channel& a, const Channel& b) {
  std::vector<ComplexMatrix> kraus;
  kraus.reserve(a.kraus().size() * b.kraus().size());
  for (const auto& ka : a.kraus())
    for (const auto& kb : b.kraus()) kraus.push_back(kron(ka, kb));
  return Channel(a.in_dims().concat(b.in_dims()), a.out_dims().concat(b.out_dims()), std::move(kraus), 1e-7);
}

Channel mix_channels(std::span<const Channel> channels, std::span<const double> weights) {
  if (channels.empty() || channels.size() != weights.size()) {
    throw Error(ErrorCode::WeightMismatch, "one weight per channel required");
  }
  double sum = 0.0;
  for (double w : weights) {
    if (w < 0.0) throw Error(ErrorCode::WeightMismatch, "negative weight");
    sum += w;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw Error(ErrorCode::WeightMismatch, "weights do not sum to 1");
  std::vector<ComplexMatrix> kraus;
  for (std::size_t i = 0; i < channels.size(); ++i) {
    const auto& c = channels[i];
    if (!(c.in_dims() == channels.front().in_dims()) || !(c.out_dims() == channels.front().out_dims())) {
      throw Error(ErrorCode::DimMismatch, "mixed channels must share dims");
    }
    if (weights[i] == 0.0) continue;
    const Complex s(std::sqrt(weights[i]), 0.0);
    for (const auto& k : c.kraus()) kraus.push_back(k * s);
  }
  return Channel(channels.front().in_dims(), channels.front().out_dims(), std::move(kraus), 1e-7);
}

Channel apply_superchannel(const Superchannel& s, const Channel& ch) { return compose(s.post, compose(ch, s.pre)); }

void FreeChannelFamily::validate() const {
  if (site_dims.empty()) throw Error(ErrorCode::BadParam, "free family needs at least one site");
  for (std::size_t d : site_dims)
    if (d < 2) throw Error(ErrorCode::BadParam, "site dimension must be >= 2");
  if (!kraus_ranks.empty()) {
    if (kraus_ranks.size() != site_dims.size()) throw Error(ErrorCode::BadParam, "one Kraus rank per site");
    for (std::size_t i = 0; i < site_dims.size(); ++i)
      if (kraus_ranks[i] < 1 || kraus_ranks[i] > site_dims[i] * site_dims[i]) {
        throw Error(ErrorCode::BadParam, "Kraus rank must lie in [1, d^2]");
      }
  }
  if (mixture_size < 1) throw Error(ErrorCode::BadParam, "mixture size must be >= 1");
}

std::size_t FreeChannelFamily::rank_of(std::size_t site) const {
  return kraus_ranks.empty() ? site_dims.at(site) * site_dims.at(site) : kraus_ranks.at(site);
}

Channel local_product(std::span<const std::vector<ComplexMatrix>> site_kraus, const SystemDims& dims) {
  if (site_kraus.size() != dims.count()) throw Error(ErrorCode::DimMismatch, "one Kraus family per site");
  const SystemDims first({dims[0]});
  Channel out(first, first, site_kraus[0]);
  for (std::size_t i = 1; i < dims.count(); ++i) {
    const SystemDims site({dims[i]});
    out = tensor(out, Channel(site, site, site_kraus[i]));
  }
  return out;
}

Channel sample_free_channel(const FreeChannelFamily& family, std::uint64_t seed) {
  family.validate();
  std::mt19937_64 rng(seed);
  const SystemDims dims(family.site_dims);
  std::vector<Channel> terms;
  for (std::size_t t = 0; t < family.terms(); ++t) {
    std::vector<std::vector<ComplexMatrix>> site_kraus;
    for (std::size_t s = 0; s < dims.count(); ++s) {
      const std::size_t d = dims[s];
      const std::size_t r = family.rank_of(s);
      const ComplexMatrix iso = random_isometry(r * d, d, rng);
      std::vector<ComplexMatrix> ks;
      for (std::size_t j = 0; j < r; ++j) {
        ComplexMatrix k(d, d);
        for (std::size_t a = 0; a < d; ++a)
          for (std::size_t b = 0; b < d; ++b) k(a, b) = iso(j * d + a, b);
        ks.push_back(std::move(k));
      }
      site_kraus.push_back(std::move(ks));
    }
    terms.push_back(local_product(site_kraus, dims));
  }
  if (terms.size() == 1) return terms.front();
  std::exponential_distribution<double> expo(1.0);
  std::vector<double> w(terms.size());
  double sum = 0.0;
  for (auto& x : w) sum += (x = expo(rng));
  for (auto& x : w) x /= sum;
  return mix_channels(terms, w);
}

Channel local_marginal(const Channel& ch, std::size_t site) {
  if (!(ch.in_dims() == ch.out_dims())) throw Error(ErrorCode::DimMismatch, "local marginal needs matching in/out factors");
  const SystemDims& dims = ch.in_dims();
  if (site >= dims.count()) throw Error(ErrorCode::BadIndexSet, "site index out of range");
  const std::size_t d = dims[site];
  std::size_t before = 1, after = 1;
  for (std::size_t i = 0; i < site; ++i) before *= dims[i];
  for (std::size_t i = site + 1; i < dims.count(); ++i) after *= dims[i];
  const ComplexMatrix left = ComplexMatrix::identity(before) * Complex(1.0 / static_cast<double>(before));
  const ComplexMatrix right = ComplexMatrix::identity(after) * Complex(1.0 / static_cast<double>(after));
  const std::size_t keep[] = {site};

  ComplexMatrix c(d * d, d * d);
  for (std::size_t a = 0; a < d; ++a)
    for (std::size_t b = 0; b < d; ++b) {
      ComplexMatrix x = kron(kron(left, ket_bra(d, a, b)), right);
      ComplexMatrix y(dims.total(), dims.total());
      for (const auto& k : ch.kraus()) y += k * x * k.adjoint();
      const ComplexMatrix local = partial_trace_matrix(y, dims, keep);
      // Choi layout: row = out * d + ref
      for (std::size_t o1 = 0; o1 < d; ++o1)
        for (std::size_t o2 = 0; o2 < d; ++o2) c(o1 * d + a, o2 * d + b) += local(o1, o2) / static_cast<double>(d);
    }
  const SystemDims local_dims({d});
  return Channel(local_dims, local_dims, kraus_from_choi(c, d, d), 1e-7);
}

double action_distance(const Channel& a, const Channel& b) {
  if (a.in_total() != b.in_total() || a.out_total() != b.out_total()) {
    throw Error(ErrorCode::DimMismatch, "action_distance on channels of different shape");
  }
  return max_abs_diff(a.choi_matrix(), b.choi_matrix()) * static_cast<double>(a.in_total());
}

}  // namespace chent
