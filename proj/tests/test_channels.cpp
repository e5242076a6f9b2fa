#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <random>

#include "chent/channels.hpp"
#include "chent/errors.hpp"

using namespace chent;

namespace {

ComplexVector ket(std::size_t d, std::size_t i) {
  ComplexVector v(d);
  v[i] = 1.0;
  return v;
}

QuantumState random_mixed(const SystemDims& dims, std::mt19937_64& rng) {
  std::normal_distribution<double> n01;
  ComplexMatrix a(dims.total(), dims.total());
  for (std::size_t r = 0; r < a.rows(); ++r)
    for (std::size_t c = 0; c < a.cols(); ++c) a(r, c) = Complex(n01(rng), n01(rng));
  ComplexMatrix rho = a * a.adjoint();
  rho *= Complex(1.0 / rho.trace().real());
  return QuantumState::from_density(dims, rho);
}

Channel random_channel(std::size_t in, std::size_t out, std::size_t rank, std::mt19937_64& rng) {
  const ComplexMatrix iso = random_isometry(rank * out, in, rng);
  std::vector<ComplexMatrix> ks;
  for (std::size_t j = 0; j < rank; ++j) {
    ComplexMatrix k(out, in);
    for (std::size_t a = 0; a < out; ++a)
      for (std::size_t b = 0; b < in; ++b) k(a, b) = iso(j * out + a, b);
    ks.push_back(k);
  }
  return Channel(SystemDims({in}), SystemDims({out}), ks);
}

}  // namespace

TEST_CASE("named gates match their permutation matrices") {
  const ComplexMatrix cnot_ref{{1, 0, 0, 0}, {0, 1, 0, 0}, {0, 0, 0, 1}, {0, 0, 1, 0}};
  const ComplexMatrix swap_ref{{1, 0, 0, 0}, {0, 0, 1, 0}, {0, 1, 0, 0}, {0, 0, 0, 1}};
  CHECK(max_abs_diff(cnot().kraus().front(), cnot_ref) == 0.0);
  CHECK(max_abs_diff(swap_channel().kraus().front(), swap_ref) == 0.0);
  CHECK(cnot().is_isometry());
  CHECK(max_abs_diff(named_channel("cnot").kraus().front(), cnot_ref) == 0.0);
}

TEST_CASE("cyclic shift moves the last factor to the front") {
  const auto ch = cyclic_shift(3, 3);
  const SystemDims dims({3, 3, 3});
  const std::vector<ComplexVector> in{ket(3, 0), ket(3, 1), ket(3, 2)};
  const std::vector<ComplexVector> expect{ket(3, 2), ket(3, 0), ket(3, 1)};
  const auto out = apply(ch, product_pure(in, dims));
  CHECK(max_abs_diff(out.rho(), product_pure(expect, dims).rho()) < 1e-14);
}

TEST_CASE("ghz entangler prepares GHZ from |+>|0>|0>") {
  const double s = 1.0 / std::sqrt(2.0);
  const SystemDims dims({2, 2, 2});
  const std::vector<ComplexVector> in{{s, s}, ket(2, 0), ket(2, 0)};
  const auto out = apply(ghz_entangler(3, 2), product_pure(in, dims));
  REQUIRE(out.vector());
  CHECK(std::abs((*out.vector())[0] - s) < 1e-14);
  CHECK(std::abs((*out.vector())[7] - s) < 1e-14);

  // d = 3, n = 2: |1>|2> -> |1>|0>
  const auto out3 = apply(ghz_entangler(2, 3), product_pure(std::vector<ComplexVector>{ket(3, 1), ket(3, 2)},
                                                            SystemDims({3, 3})));
  CHECK(std::abs((*out3.vector())[3] - 1.0) < 1e-14);
}

TEST_CASE("Choi state of the identity is maximally entangled") {
  for (std::size_t d : {2u, 3u, 4u}) {
    const auto c = choi(identity_channel(SystemDims({d})));
    CHECK(max_abs_diff(c.rho(), max_entangled(d).rho()) < 1e-14);
  }
}

TEST_CASE("Choi matrix entries follow the out * in_D + ref layout") {
  // amplitude damping-like map, checked against the definition entry by entry
  std::mt19937_64 rng(5);
  const auto ch = random_channel(2, 3, 2, rng);
  const auto c = ch.choi_matrix();
  for (std::size_t a = 0; a < 3; ++a)
    for (std::size_t i = 0; i < 2; ++i)
      for (std::size_t b = 0; b < 3; ++b)
        for (std::size_t j = 0; j < 2; ++j) {
          // <a|N(|i><j|)|b> / in_D
          ComplexMatrix eij(2, 2);
          eij(i, j) = 1.0;
          ComplexMatrix y(3, 3);
          for (const auto& k : ch.kraus()) y += k * eij * k.adjoint();
          CHECK(std::abs(c(a * 2 + i, b * 2 + j) - y(a, b) / 2.0) < 1e-14);
        }
}

TEST_CASE("Kraus to Choi to Kraus reproduces the action") {
  std::mt19937_64 rng(11);
  for (int t = 0; t < 25; ++t) {
    const std::size_t in = 2 + t % 3, out = 2 + (t / 3) % 3, rank = std::max<std::size_t>(1 + t % 4, (in + out - 1) / out);
    const auto ch = random_channel(in, out, rank, rng);
    const auto ks = kraus_from_choi(ch.choi_matrix(), in, out);
    CHECK(ks.size() == rank);
    const Channel back(SystemDims({in}), SystemDims({out}), ks);
    CHECK(action_distance(ch, back) < 1e-10);
  }
}

TEST_CASE("long Kraus families are compressed") {
  std::vector<ComplexMatrix> ks;
  for (int i = 0; i < 10; ++i) ks.push_back(ComplexMatrix::identity(2) * Complex(std::sqrt(0.1)));
  const Channel ch(SystemDims({2}), SystemDims({2}), ks);
  CHECK(ch.kraus().size() == 1);
  CHECK(action_distance(ch, identity_channel(SystemDims({2}))) < 1e-12);
}

TEST_CASE("depolarizing matches (1-p) rho + p I/d") {
  std::mt19937_64 rng(3);
  for (std::size_t d : {2u, 3u}) {
    for (double p : {0.0, 0.3, 1.0}) {
      const auto rho = random_mixed(SystemDims({d}), rng);
      const auto out = apply(depolarizing(p, d), rho);
      ComplexMatrix expect = rho.rho() * Complex(1 - p) + ComplexMatrix::identity(d) * Complex(p / d);
      CHECK(max_abs_diff(out.rho(), expect) < 1e-12);
    }
  }
  CHECK(depolarizing(1.0, 2).kraus().size() == 4);
  CHECK(depolarizing(0.0, 2).kraus().size() == 1);
}

TEST_CASE("compose, tensor and mixtures") {
  const auto c = cnot();
  CHECK(action_distance(compose(c, c), identity_channel(SystemDims({2, 2}))) < 1e-14);
  const auto s = swap_channel();
  // SWAP = CNOT_12 CNOT_21 CNOT_12
  const auto c21 = compose(s, compose(c, s));
  CHECK(action_distance(compose(c, compose(c21, c)), s) < 1e-14);

  const auto t = tensor(identity_channel(SystemDims({2})), depolarizing(1.0));
  CHECK(t.in_dims() == SystemDims({2, 2}));
  const auto out = apply(t, choi(identity_channel(SystemDims({2}))));
  CHECK(max_abs_diff(out.rho(), ComplexMatrix::identity(4) * Complex(0.25)) < 1e-12);

  const std::vector<Channel> chans{identity_channel(SystemDims({2})), depolarizing(1.0)};
  const std::vector<double> w{0.6, 0.4};
  CHECK(action_distance(mix_channels(chans, w), depolarizing(0.4)) < 1e-12);
  const std::vector<double> bad{0.6, 0.6};
  CHECK_THROWS_AS(mix_channels(chans, bad), Error);

  const Superchannel sc{identity_channel(SystemDims({2, 2})), swap_channel()};
  CHECK(action_distance(apply_superchannel(sc, c), compose(s, c)) < 1e-14);
}

TEST_CASE("sampled free channels keep product inputs product") {
  std::mt19937_64 rng(21);
  for (auto kind : {FreeFamilyKind::local_product, FreeFamilyKind::mixture_of_local_products}) {
    FreeChannelFamily fam{kind, {2, 3}, {}, 3};
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      const auto ch = sample_free_channel(fam, seed);
      CHECK(ch.in_dims() == SystemDims({2, 3}));
      CHECK(action_distance(ch, sample_free_channel(fam, seed)) == 0.0);
      const std::vector<ComplexVector> locals{random_unit_vector(2, rng), random_unit_vector(3, rng)};
      const auto out = apply(ch, product_pure(locals, SystemDims({2, 3})));
      if (kind == FreeFamilyKind::local_product) {
        const std::size_t k0[] = {0}, k1[] = {1};
        const auto r0 = partial_trace(out, k0).rho();
        const auto r1 = partial_trace(out, k1).rho();
        CHECK(max_abs_diff(out.rho(), kron(r0, r1)) < 1e-12);
      }
      CHECK(std::abs(out.rho().trace().real() - 1.0) < 1e-12);
    }
  }
  FreeChannelFamily bad{FreeFamilyKind::local_product, {2}, {5}, 1};
  CHECK_THROWS_AS(bad.validate(), Error);
}

TEST_CASE("local marginal of a local product recovers the factors") {
  std::mt19937_64 rng(8);
  const auto a = random_channel(2, 2, 3, rng);
  const auto b = random_channel(3, 3, 2, rng);
  const auto t = tensor(a, b);
  CHECK(action_distance(local_marginal(t, 0), a) < 1e-12);
  CHECK(action_distance(local_marginal(t, 1), b) < 1e-12);
  // CNOT marginals: control dephased, target half-flipped
  const auto m1 = local_marginal(cnot(), 1);
  const auto out = apply(m1, QuantumState::from_vector(SystemDims({2}), ket(2, 0)));
  CHECK(max_abs_diff(out.rho(), ComplexMatrix::identity(2) * Complex(0.5)) < 1e-12);
}

TEST_CASE("channel errors") {
  CHECK_THROWS_AS(named_channel("bogus"), Error);
  try {
    named_channel("cyclic_shift", {{"n", 1.5}});
    FAIL("expected throw");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::BadParam);
  }
  try {
    Channel(SystemDims({2}), SystemDims({2}), {ComplexMatrix::identity(2) * Complex(0.5)});
    FAIL("expected throw");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NotChannel);
  }
  ComplexMatrix m{{1, 1}, {0, 1}};
  CHECK_THROWS_AS(unitary_channel(m, SystemDims({2})), Error);
  std::mt19937_64 rng(1);
  CHECK_THROWS_AS(choi(Channel(SystemDims({2}), SystemDims({3}), {random_isometry(3, 2, rng)})), Error);
}
