#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>
#include <set>

#include "chent/errors.hpp"
#include "chent/states.hpp"

using namespace chent;

namespace {

ComplexVector ket(std::size_t d, std::size_t i) {
  ComplexVector v(d);
  v[i] = 1.0;
  return v;
}

ComplexVector plus() {
  const double s = 1.0 / std::sqrt(2.0);
  return {s, s};
}

QuantumState ghz3() {
  ComplexVector psi(8);
  psi[0] = psi[7] = 1.0 / std::sqrt(2.0);
  return QuantumState::from_vector(SystemDims({2, 2, 2}), psi);
}

// Naive partial trace straight from the definition, indexing digits explicitly.
ComplexMatrix naive_partial_trace(const ComplexMatrix& rho, const std::vector<std::size_t>& dims,
                                  const std::vector<std::size_t>& keep) {
  const std::size_t n = dims.size();
  std::size_t total = 1;
  for (auto d : dims) total *= d;
  auto digits = [&](std::size_t flat) {
    std::vector<std::size_t> dg(n);
    for (std::size_t i = n; i-- > 0;) {
      dg[i] = flat % dims[i];
      flat /= dims[i];
    }
    return dg;
  };
  std::size_t kd = 1;
  for (auto i : keep) kd *= dims[i];
  ComplexMatrix out(kd, kd);
  for (std::size_t r = 0; r < total; ++r)
    for (std::size_t c = 0; c < total; ++c) {
      const auto dr = digits(r), dc = digits(c);
      bool traced_equal = true;
      for (std::size_t i = 0; i < n; ++i) {
        const bool kept = std::find(keep.begin(), keep.end(), i) != keep.end();
        if (!kept && dr[i] != dc[i]) traced_equal = false;
      }
      if (!traced_equal) continue;
      std::size_t a = 0, b = 0;
      for (auto i : keep) {
        a = a * dims[i] + dr[i];
        b = b * dims[i] + dc[i];
      }
      out(a, b) += rho(r, c);
    }
  return out;
}

QuantumState random_mixed(const SystemDims& dims, std::size_t rank, std::mt19937_64& rng) {
  ComplexMatrix rho(dims.total(), dims.total());
  for (std::size_t i = 0; i < rank; ++i) {
    const auto v = random_unit_vector(dims.total(), rng);
    rho += outer(v, v) * Complex(1.0 / rank, 0.0);
  }
  return QuantumState::from_density(dims, rho.hermitian_part());
}

std::size_t stirling2(std::size_t n, std::size_t k) {
  if (n == 0 && k == 0) return 1;
  if (n == 0 || k == 0) return 0;
  return k * stirling2(n - 1, k) + stirling2(n - 1, k - 1);
}

}  // namespace

TEST_CASE("SystemDims validation") {
  CHECK(SystemDims({2, 3}).total() == 6);
  CHECK_THROWS_AS(SystemDims({}), Error);
  CHECK_THROWS_AS(SystemDims({1, 2}), Error);
  CHECK_THROWS_AS(SystemDims({64, 65}), Error);
  CHECK_NOTHROW(SystemDims({64, 64}));
}

TEST_CASE("product_pure") {
  const SystemDims d22({2, 2});
  SUBCASE("|00>") {
    const ComplexVector locals[] = {ket(2, 0), ket(2, 0)};
    const auto s = product_pure(locals, d22);
    CHECK(s.is_pure());
    CHECK(s.rho()(0, 0) == Complex(1.0, 0.0));
    CHECK(s.rho().max_abs() == 1.0);
  }
  SUBCASE("|+>|0> is the input state of the CNOT example") {
    const ComplexVector locals[] = {plus(), ket(2, 0)};
    const auto s = product_pure(locals, d22);
    // (|0><0| + |0><1| + |1><0| + |1><1|)/2 (x) |0><0|
    for (std::size_t r : {0u, 2u})
      for (std::size_t c : {0u, 2u}) CHECK(std::abs(s.rho()(r, c) - 0.5) < 1e-15);
    CHECK(std::abs(s.rho().trace() - 1.0) < 1e-15);
  }
  SUBCASE("|+++> has all entries 1/8") {
    const ComplexVector locals[] = {plus(), plus(), plus()};
    const auto s = product_pure(locals, SystemDims({2, 2, 2}));
    for (const auto& z : s.rho().data()) CHECK(std::abs(z - 0.125) < 1e-15);
  }
  SUBCASE("errors") {
    const ComplexVector bad_len[] = {ket(3, 0), ket(2, 0)};
    CHECK_THROWS_AS(product_pure(bad_len, d22), Error);
    const ComplexVector unnormalized[] = {ComplexVector{1.0, 1.0}, ket(2, 0)};
    try {
      product_pure(unnormalized, d22);
      FAIL("expected NotNormalized");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::NotNormalized);
    }
  }
}

TEST_CASE("max_entangled") {
  const auto bell = max_entangled(2);
  CHECK(bell.is_pure());
  const std::size_t k0[] = {0}, k1[] = {1};
  CHECK(max_abs_diff(partial_trace(bell, k0).rho(), ComplexMatrix::identity(2) * Complex(0.5)) < 1e-15);
  CHECK(max_abs_diff(partial_trace(bell, k1).rho(), ComplexMatrix::identity(2) * Complex(0.5)) < 1e-15);

  // Schmidt coefficients 1/sqrt3 -> reduced purity 3 * (1/3)^2
  CHECK(partial_trace(max_entangled(3), k0).purity() == doctest::Approx(1.0 / 3.0));
  CHECK_THROWS_AS(max_entangled(1), Error);
}

TEST_CASE("partial_trace examples") {
  const ComplexVector zz[] = {ket(2, 0), ket(2, 0)};
  const auto s00 = product_pure(zz, SystemDims({2, 2}));
  const std::size_t k1[] = {1};
  CHECK(max_abs_diff(partial_trace(s00, k1).rho(), ComplexMatrix{{1.0, 0.0}, {0.0, 0.0}}) < 1e-15);

  const std::size_t k01[] = {0, 1};
  const auto r = partial_trace(ghz3(), k01).rho();
  const auto oracle = naive_partial_trace(ghz3().rho(), {2, 2, 2}, {0, 1});
  CHECK(max_abs_diff(r, oracle) < 1e-15);
  CHECK(std::abs(r(0, 0) - 0.5) < 1e-15);
  CHECK(std::abs(r(3, 3) - 0.5) < 1e-15);
  CHECK(std::abs(r(0, 3)) < 1e-15);

  const std::size_t bad[] = {3};
  const std::size_t unsorted[] = {1, 0};
  CHECK_THROWS_AS(partial_trace(ghz3(), bad), Error);
  CHECK_THROWS_AS(partial_trace(ghz3(), unsorted), Error);
  CHECK_THROWS_AS(partial_trace(ghz3(), std::span<const std::size_t>{}), Error);
}

TEST_CASE("partial_trace agrees with the naive oracle on mixed-dimension states") {
  std::mt19937_64 rng(2);
  const SystemDims dims({2, 3, 2});
  const auto s = random_mixed(dims, 3, rng);
  const std::vector<std::vector<std::size_t>> keeps = {{0}, {1}, {2}, {0, 2}, {1, 2}, {0, 1}, {0, 1, 2}};
  for (const auto& keep : keeps) {
    const auto r = partial_trace(s, keep);
    CHECK(max_abs_diff(r.rho(), naive_partial_trace(s.rho(), {2, 3, 2}, keep)) < 1e-13);
    CHECK(std::abs(r.rho().trace() - 1.0) < 1e-9);
  }
  const std::size_t all[] = {0, 1, 2};
  CHECK(max_abs_diff(partial_trace(s, all).rho(), s.rho()) == 0.0);
}

TEST_CASE("reduced states of product states are pure") {
  std::mt19937_64 rng(4);
  const SystemDims dims({2, 3, 2, 2});
  for (int rep = 0; rep < 10; ++rep) {
    std::vector<ComplexVector> locals;
    for (std::size_t i = 0; i < dims.count(); ++i) locals.push_back(random_unit_vector(dims[i], rng));
    const auto s = product_pure(locals, dims);
    for (const auto& p : enumerate_partitions(4, 2)) {
      for (const auto& block : p.blocks()) {
        CHECK(std::abs(partial_trace(s, block).purity() - 1.0) <= 1e-8);
        CHECK(std::abs(reduced_purity(*s.vector(), dims, block) - 1.0) <= 1e-8);
      }
    }
  }
}

TEST_CASE("mix") {
  const auto bell = max_entangled(2);
  CHECK(max_abs_diff(mix(std::span(&bell, 1), std::vector<double>{1.0}).rho(), bell.rho()) == 0.0);

  const ComplexVector k0[] = {ket(2, 0)}, k1[] = {ket(2, 1)};
  const std::vector<QuantumState> basis = {product_pure(k0, SystemDims({2})), product_pure(k1, SystemDims({2}))};
  const auto half = mix(basis, std::vector<double>{0.5, 0.5});
  CHECK(max_abs_diff(half.rho(), ComplexMatrix::identity(2) * Complex(0.5)) < 1e-15);
  CHECK_FALSE(half.is_pure());

  const auto mm = QuantumState::from_density(SystemDims({2, 2}), ComplexMatrix::identity(4) * Complex(0.25));
  const std::vector<QuantumState> w = {bell, mm};
  const auto werner = mix(w, std::vector<double>{0.5, 0.5});
  // 0.5 * 1/2 + 0.5 * 1/4 on |00><00| and |11><11|
  CHECK(werner.rho()(0, 0).real() == doctest::Approx(3.0 / 8.0));
  CHECK(werner.rho()(3, 3).real() == doctest::Approx(3.0 / 8.0));
  CHECK(werner.rho()(1, 1).real() == doctest::Approx(1.0 / 8.0));

  CHECK_THROWS_AS(mix(w, std::vector<double>{0.6, 0.6}), Error);
  CHECK_THROWS_AS(mix(w, std::vector<double>{1.0}), Error);
  const std::vector<QuantumState> mismatched = {bell, basis[0]};
  CHECK_THROWS_AS(mix(mismatched, std::vector<double>{0.5, 0.5}), Error);
}

TEST_CASE("from_density rejects non-states") {
  CHECK_THROWS_AS(QuantumState::from_density(SystemDims({2}), ComplexMatrix::identity(2)), Error);
  const ComplexMatrix neg{{1.5, 0.0}, {0.0, -0.5}};
  CHECK_THROWS_AS(QuantumState::from_density(SystemDims({2}), neg), Error);
  const ComplexMatrix mixed{{0.5, 0.0}, {0.0, 0.5}};
  CHECK_THROWS_AS(QuantumState::from_density(SystemDims({2}), mixed).pure_vector(), Error);
}

TEST_CASE("enumerate_partitions examples") {
  const auto p32 = enumerate_partitions(3, 2);
  REQUIRE(p32.size() == 3);
  std::set<std::string> names;
  for (const auto& p : p32) names.insert(p.to_string());
  CHECK(names == std::set<std::string>{"{0}{1,2}", "{0,2}{1}", "{0,1}{2}"});

  CHECK(enumerate_partitions(2, 2).size() == 1);
  CHECK(enumerate_partitions(2, 2).front().to_string() == "{0}{1}");
  CHECK(enumerate_partitions(4, 2).size() == 7);
  CHECK_THROWS_AS(enumerate_partitions(3, 4), Error);
  CHECK_THROWS_AS(enumerate_partitions(13, 2), Error);
  CHECK_THROWS_AS(enumerate_partitions(3, 0), Error);
}

TEST_CASE("enumerate_partitions matches Stirling numbers and brute force") {
  for (std::size_t n = 1; n <= 8; ++n)
    for (std::size_t k = 1; k <= n; ++k) CHECK(enumerate_partitions(n, k).size() == stirling2(n, k));

  // brute force: every labelling in k^n, canonicalized
  for (std::size_t n = 1; n <= 6; ++n)
    for (std::size_t k = 1; k <= n; ++k) {
      std::set<std::string> brute;
      std::vector<std::size_t> lab(n, 0);
      std::size_t combos = 1;
      for (std::size_t i = 0; i < n; ++i) combos *= k;
      for (std::size_t c = 0; c < combos; ++c) {
        std::size_t x = c;
        for (std::size_t i = 0; i < n; ++i) {
          lab[i] = x % k;
          x /= k;
        }
        std::vector<std::vector<std::size_t>> blocks(k);
        for (std::size_t i = 0; i < n; ++i) blocks[lab[i]].push_back(i);
        if (std::any_of(blocks.begin(), blocks.end(), [](const auto& b) { return b.empty(); })) continue;
        brute.insert(PartitionSpec(n, blocks).to_string());
      }
      std::set<std::string> ours;
      for (const auto& p : enumerate_partitions(n, k)) ours.insert(p.to_string());
      CHECK(ours == brute);
      CHECK(ours.size() == enumerate_partitions(n, k).size());  // no duplicates
    }
}

TEST_CASE("PartitionSpec canonicalizes and validates") {
  const PartitionSpec p(3, {{2, 1}, {0}});
  CHECK(p.to_string() == "{0}{1,2}");
  CHECK_THROWS_AS(PartitionSpec(3, {{0, 1}}), Error);
  CHECK_THROWS_AS(PartitionSpec(3, {{0, 1}, {1, 2}}), Error);
  CHECK_THROWS_AS(PartitionSpec(3, {{0, 1, 2}, {}}), Error);
  CHECK(&cached_partitions(4, 2) == &cached_partitions(4, 2));
}
