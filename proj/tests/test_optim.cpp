#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numbers>
#include <random>

#include "chent/errors.hpp"
#include "chent/optim.hpp"

using namespace chent;

namespace {

// 2|ad - bc| of U (a (x) b), written out without the library's measures
double two_qubit_concurrence_after(const ComplexMatrix& u, const DomainPoint& p) {
  const ComplexVector in = kron(p.vectors[0], p.vectors[1]);
  const ComplexVector v = u * std::span<const Complex>(in);
  return 2.0 * std::abs(v[0] * v[3] - v[1] * v[2]);
}

ComplexMatrix cz(double theta) {
  ComplexMatrix u = ComplexMatrix::identity(4);
  u(3, 3) = std::polar(1.0, theta);
  return u;
}

const ComplexMatrix kCnot{{1, 0, 0, 0}, {0, 1, 0, 0}, {0, 0, 0, 1}, {0, 0, 1, 0}};

}  // namespace

TEST_CASE("decode examples") {
  const auto ps = ParamManifold::product_states({2, 2});
  CHECK(ps.dof() == 8);
  const double t1[] = {1, 0, 0, 0, 1, 0, 0, 0};
  const auto p = ps.decode(t1);
  CHECK(p.vectors[0][0] == Complex(1, 0));
  CHECK(p.vectors[1][1] == Complex(0, 0));

  const auto u = ParamManifold::unitary(2);
  const double zero[] = {0, 0, 0, 0};
  CHECK(max_abs_diff(u.decode(zero).matrix, ComplexMatrix::identity(2)) < 1e-15);

  const auto s = ParamManifold::simplex(2);
  const double z2[] = {0, 0};
  CHECK(s.decode(z2).probabilities == RealVector{0.5, 0.5});

  const double short_theta[] = {1, 2, 3};
  CHECK_THROWS_AS(ps.decode(short_theta), Error);
}

TEST_CASE("decoded points satisfy their constraints") {
  std::mt19937_64 rng(1);
  const auto ps = ParamManifold::product_states({2, 3, 2});
  const auto un = ParamManifold::unitary(4);
  const auto kr = ParamManifold::kraus(3, 2, 4);
  const auto sx = ParamManifold::simplex(5);
  const auto comp = ParamManifold::composite({ps, kr, sx});
  CHECK(comp.dof() == ps.dof() + kr.dof() + sx.dof());
  std::normal_distribution<double> wide(0.0, 5.0);
  for (int t = 0; t < 50; ++t) {
    auto draw = [&](const ParamManifold& m) {
      RealVector th(m.dof());
      for (auto& x : th) x = wide(rng);
      return th;
    };
    for (const auto& v : ps.decode(draw(ps)).vectors) CHECK(std::abs(norm(v) - 1.0) < 1e-8);
    const auto m = un.decode(draw(un)).matrix;
    CHECK(max_abs_diff(m.adjoint() * m, ComplexMatrix::identity(4)) < 1e-8);
    ComplexMatrix sum(3, 3);
    for (const auto& k : kr.decode(draw(kr)).kraus) sum += k.adjoint() * k;
    CHECK(max_abs_diff(sum, ComplexMatrix::identity(3)) < 1e-8);
    double total = 0.0;
    for (double x : sx.decode(draw(sx)).probabilities) {
      CHECK(x >= 0.0);
      total += x;
    }
    CHECK(std::abs(total - 1.0) < 1e-12);
    const auto c = comp.decode(draw(comp));
    CHECK(c.parts.size() == 3);
    CHECK(c.parts[1].kraus.size() == 4);
  }
}

TEST_CASE("encode inverts decode up to gauge") {
  std::mt19937_64 rng(2);
  const auto kr = ParamManifold::kraus(2, 2, 4);
  for (int t = 0; t < 10; ++t) {
    const auto p = kr.decode(kr.random_theta(rng));
    const auto q = kr.decode(kr.encode(p));
    for (std::size_t j = 0; j < 4; ++j) CHECK(max_abs_diff(p.kraus[j], q.kraus[j]) < 1e-12);
  }
  DomainPoint id;
  id.kraus = {ComplexMatrix::identity(2)};
  const auto back = kr.decode(kr.encode(id));
  CHECK(max_abs_diff(back.kraus[0], ComplexMatrix::identity(2)) < 1e-14);
  CHECK(back.kraus[1].max_abs() < 1e-14);

  const auto sx = ParamManifold::simplex(3);
  DomainPoint pr;
  pr.probabilities = {0.2, 0.3, 0.5};
  const auto w = sx.decode(sx.encode(pr)).probabilities;
  for (std::size_t i = 0; i < 3; ++i) CHECK(std::abs(w[i] - pr.probabilities[i]) < 1e-14);
}

TEST_CASE("Nelder-Mead finds a smooth maximum") {
  auto f = [](std::span<const double> x) {
    return -(x[0] - 1) * (x[0] - 1) - 4 * (x[1] + 2) * (x[1] + 2) - (x[2] - 0.5) * (x[2] - 0.5);
  };
  const auto run = nelder_mead_max(f, {0, 0, 0}, 0.5, 5000, 1e-10, 1e-14);
  CHECK(std::abs(run.theta[0] - 1) < 1e-5);
  CHECK(std::abs(run.theta[1] + 2) < 1e-5);
  CHECK(std::abs(run.theta[2] - 0.5) < 1e-5);
  CHECK(run.value > -1e-9);
}

TEST_CASE("CNOT output concurrence over product inputs reaches 1") {
  OptimizerConfig cfg;
  cfg.seed = 1;
  const auto r = maximize([](const DomainPoint& p) { return two_qubit_concurrence_after(kCnot, p); },
                          ParamManifold::product_states({2, 2}), cfg);
  CHECK(std::abs(r.value - 1.0) < 1e-4);
  CHECK(r.telemetry.starts == 32);
  CHECK(std::abs(two_qubit_concurrence_after(kCnot, r.witness) - r.value) < 1e-15);
}

TEST_CASE("controlled phase pi/2 agrees with a product-angle grid") {
  const ComplexMatrix u = cz(std::numbers::pi / 2);
  // grid over (cos a, e^{i phi} sin a) per qubit, step pi/64
  double grid = 0.0;
  const double h = std::numbers::pi / 64;
  for (double a = 0; a <= std::numbers::pi / 2 + 1e-12; a += h)
    for (double b = 0; b <= std::numbers::pi / 2 + 1e-12; b += h)
      for (double phi = 0; phi < 2 * std::numbers::pi; phi += 4 * h) {
        DomainPoint p;
        p.vectors = {{std::cos(a), std::polar(std::sin(a), phi)}, {std::cos(b), std::sin(b)}};
        grid = std::max(grid, two_qubit_concurrence_after(u, p));
      }
  OptimizerConfig cfg;
  cfg.seed = 4;
  const auto r = maximize([&](const DomainPoint& p) { return two_qubit_concurrence_after(u, p); },
                          ParamManifold::product_states({2, 2}), cfg);
  CHECK(std::abs(r.value - std::sin(std::numbers::pi / 4)) < 1e-3);
  CHECK(std::abs(r.value - grid) < 2e-2);
  CHECK(r.value >= grid - 1e-9);
}

TEST_CASE("constant objective stops after one iteration") {
  OptimizerConfig cfg;
  cfg.starts = 1;
  const auto r = maximize([](const DomainPoint&) { return 0.5; }, ParamManifold::product_states({2, 2}), cfg);
  CHECK(r.value == 0.5);
  CHECK(r.telemetry.iterations == 1);
}

TEST_CASE("determinism and best-of monotonicity in starts") {
  std::mt19937_64 rng(9);
  const ComplexMatrix u = random_unitary(4, rng);
  auto obj = [&](const DomainPoint& p) { return two_qubit_concurrence_after(u, p); };
  OptimizerConfig cfg;
  cfg.seed = 17;
  cfg.starts = 4;
  cfg.max_iters = 60;  // keep runs short so starts differ
  const auto a = maximize(obj, ParamManifold::product_states({2, 2}), cfg);
  const auto b = maximize(obj, ParamManifold::product_states({2, 2}), cfg);
  CHECK(a.value == b.value);
  CHECK(a.theta == b.theta);
  cfg.starts = 8;
  const auto c = maximize(obj, ParamManifold::product_states({2, 2}), cfg);
  CHECK(c.value >= a.value);

  // minimize mirrors maximize
  cfg.starts = 4;
  const auto m = minimize([&](const DomainPoint& p) { return -obj(p); }, ParamManifold::product_states({2, 2}), cfg);
  CHECK(m.value == -a.value);
}

TEST_CASE("warm starts are never lost") {
  DomainPoint good;
  const double s = 1.0 / std::sqrt(2.0);
  good.vectors = {{s, s}, {1, 0}};
  const auto ps = ParamManifold::product_states({2, 2});
  OptimizerConfig cfg;
  cfg.starts = 1;
  cfg.max_iters = 1;
  cfg.warm_starts = {ps.encode(good)};
  const auto r = maximize([](const DomainPoint& p) { return two_qubit_concurrence_after(kCnot, p); }, ps, cfg);
  CHECK(r.value >= 1.0 - 1e-12);
  CHECK(r.telemetry.best_start == 0);
}

TEST_CASE("objective failures carry theta") {
  OptimizerConfig cfg;
  cfg.starts = 1;
  try {
    maximize([](const DomainPoint&) -> double { throw std::runtime_error("boom"); },
             ParamManifold::simplex(3), cfg);
    FAIL("expected throw");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ObjectiveFailure);
    CHECK(e.theta().size() == 3);
  }
  try {
    maximize([](const DomainPoint&) { return std::nan(""); }, ParamManifold::simplex(2), cfg);
    FAIL("expected throw");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ObjectiveFailure);
  }
  cfg.starts = 0;
  CHECK_THROWS_AS(maximize([](const DomainPoint&) { return 0.0; }, ParamManifold::simplex(2), cfg), Error);
}

TEST_CASE("drift penalty does not change reported values") {
  OptimizerConfig cfg;
  cfg.seed = 2;
  cfg.penalty_weight = 0.1;
  const auto r = maximize([](const DomainPoint& p) { return two_qubit_concurrence_after(kCnot, p); },
                          ParamManifold::product_states({2, 2}), cfg);
  CHECK(std::abs(r.value - 1.0) < 1e-4);
  CHECK(two_qubit_concurrence_after(kCnot, r.witness) == r.value);
}
