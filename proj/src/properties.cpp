#include "chent/properties.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <random>

#include "chent/channel_measures.hpp"
#include "chent/errors.hpp"
#include "chent/oracle.hpp"

namespace chent {

namespace {

constexpr double kSlack = 2e-3;

class Tracker {
 public:
  explicit Tracker(std::string name) { out_.name = std::move(name); }

  void record(double margin, const std::string& what) {
    ++out_.trials;
    if (margin < worst_) {
      worst_ = margin;
      if (margin < 0.0) out_.detail = what;
    }
  }

  PropertyOutcome finish() {
    out_.worst_margin = out_.trials == 0 ? 0.0 : worst_;
    out_.passed = out_.worst_margin >= 0.0;
    if (out_.passed && out_.detail.empty()) out_.detail = "ok";
    return out_;
  }

 private:
  PropertyOutcome out_;
  double worst_ = std::numeric_limits<double>::infinity();
};

std::mt19937_64 stream(const SuiteConfig& cfg, std::string_view property) {
  std::seed_seq seq{cfg.seed, static_cast<std::uint64_t>(std::hash<std::string_view>{}(property))};
  return std::mt19937_64(seq);
}

Channel random_channel(std::size_t d, std::size_t rank, std::mt19937_64& rng, const SystemDims& dims) {
  const ComplexMatrix iso = random_isometry(rank * d, d, rng);
  std::vector<ComplexMatrix> ks;
  for (std::size_t j = 0; j < rank; ++j) {
    ComplexMatrix k(d, d);
    for (std::size_t a = 0; a < d; ++a)
      for (std::size_t b = 0; b < d; ++b) k(a, b) = iso(j * d + a, b);
    ks.push_back(std::move(k));
  }
  return Channel(dims, dims, std::move(ks));
}

// full Kraus rank, hence full-rank Choi matrices throughout
Channel full_rank_qubit_channel(std::mt19937_64& rng) { return random_channel(2, 4, rng, SystemDims({2})); }

Channel random_two_qubit_unitary(std::mt19937_64& rng) {
  return unitary_channel(random_unitary(4, rng), SystemDims({2, 2}));
}

Channel free_mixture(std::mt19937_64& rng) {
  return sample_free_channel({FreeFamilyKind::mixture_of_local_products, {2, 2}, {}, 2}, rng());
}

OptimizerConfig opt(std::mt19937_64& rng, std::size_t starts) {
  OptimizerConfig c;
  c.seed = rng();
  c.starts = starts;
  return c;
}

RealVector encode_probe(const std::vector<ComplexMatrix>& kraus, std::size_t d, std::size_t rank) {
  DomainPoint p;
  p.kraus = kraus;
  return ParamManifold::kraus(d, d, rank).encode(p);
}

std::vector<ComplexMatrix> probe_or_identity(const MeasureResult& r, std::size_t d) {
  if (r.witness.kind == "probe_channel") return r.witness.kraus;
  return {ComplexMatrix::identity(d)};
}

std::string fmt(const char* label, double a, double b) {
  return std::string(label) + " lhs=" + std::to_string(a) + " rhs=" + std::to_string(b);
}

std::vector<PropertyOutcome> suite_sc(const SuiteConfig& cfg) {
  std::vector<PropertyOutcome> out;
  const SystemDims q({2});
  {
    Tracker t("sc.nonnegativity");
    auto rng = stream(cfg, t.finish().name);
    for (std::size_t i = 0; i < cfg.trials; ++i) {
      const auto n = random_channel(2, 1 + i % 4, rng, q), m = random_channel(2, 1 + (i / 4) % 4, rng, q);
      const double v = choi_relative_entropy(n, m, opt(rng, 2)).value;
      t.record(v + 1e-9, "value " + std::to_string(v));
    }
    out.push_back(t.finish());
  }
  {
    Tracker t("sc.identical_zero");
    auto rng = stream(cfg, "sc.identical_zero");
    for (std::size_t i = 0; i < cfg.trials; ++i) {
      const auto n = random_channel(2, 1 + i % 4, rng, q);
      const double v = choi_relative_entropy(n, n, opt(rng, 1)).value;
      t.record(v == 0.0 ? 0.0 : -std::abs(v), "value " + std::to_string(v));
    }
    out.push_back(t.finish());
  }
  {
    Tracker t("sc.monotonicity");
    auto rng = stream(cfg, "sc.monotonicity");
    for (std::size_t i = 0; i < cfg.trials; ++i) {
      const auto n = full_rank_qubit_channel(rng), m = full_rank_qubit_channel(rng);
      const Superchannel s{full_rank_qubit_channel(rng), full_rank_qubit_channel(rng)};
      const auto lhs = choi_relative_entropy(apply_superchannel(s, n), apply_superchannel(s, m), opt(rng, 4));
      auto rcfg = opt(rng, 4);
      const Channel x(q, q, probe_or_identity(lhs, 2));
      rcfg.warm_starts.push_back(encode_probe(compose(s.pre, x).kraus(), 2, 4));
      const auto rhs = choi_relative_entropy(n, m, rcfg);
      t.record(rhs.value + kSlack - lhs.value, fmt("S_C(Phi(N)||Phi(M)) vs S_C(N||M):", lhs.value, rhs.value));
    }
    out.push_back(t.finish());
  }
  {
    Tracker t("sc.joint_convexity");
    auto rng = stream(cfg, "sc.joint_convexity");
    std::uniform_real_distribution<double> u01(0.05, 0.95);
    for (std::size_t i = 0; i < cfg.trials; ++i) {
      const std::vector<Channel> ns{full_rank_qubit_channel(rng), full_rank_qubit_channel(rng)};
      const std::vector<Channel> ms{full_rank_qubit_channel(rng), full_rank_qubit_channel(rng)};
      const double p = u01(rng);
      const std::vector<double> w{p, 1 - p};
      const auto lhs = choi_relative_entropy(mix_channels(ns, w), mix_channels(ms, w), opt(rng, 4));
      const RealVector seed = encode_probe(probe_or_identity(lhs, 2), 2, 4);
      double rhs = 0.0;
      for (std::size_t j = 0; j < 2; ++j) {
        auto c = opt(rng, 4);
        c.warm_starts.push_back(seed);
        rhs += w[j] * choi_relative_entropy(ns[j], ms[j], c).value;
      }
      t.record(rhs + kSlack - lhs.value, fmt("mixture vs average:", lhs.value, rhs));
    }
    out.push_back(t.finish());
  }
  {
    Tracker t("sc.superadditivity");
    auto rng = stream(cfg, "sc.superadditivity");
    for (std::size_t i = 0; i < cfg.trials; ++i) {
      const auto n0 = full_rank_qubit_channel(rng), n1 = full_rank_qubit_channel(rng);
      const auto m0 = full_rank_qubit_channel(rng), m1 = full_rank_qubit_channel(rng);
      const auto r0 = choi_relative_entropy(n0, m0, opt(rng, 4));
      const auto r1 = choi_relative_entropy(n1, m1, opt(rng, 4));
      const Channel x = tensor(Channel(q, q, probe_or_identity(r0, 2)), Channel(q, q, probe_or_identity(r1, 2)));
      auto c = opt(rng, 1);
      c.max_iters = 200;
      c.warm_starts.push_back(encode_probe(x.kraus(), 4, 16));
      const auto lhs = choi_relative_entropy(tensor(n0, n1), tensor(m0, m1), c);
      t.record(lhs.value + kSlack - r0.value - r1.value, fmt("joint vs sum:", lhs.value, r0.value + r1.value));
    }
    out.push_back(t.finish());
  }
  return out;
}

OptimizerConfig rr_cfg(std::mt19937_64& rng) {
  OptimizerConfig c = opt(rng, 1);
  c.rounds = 1;
  c.max_iters = 200;
  c.probe_rank = 4;
  return c;
}

std::vector<PropertyOutcome> suite_rr(const SuiteConfig& cfg) {
  std::vector<PropertyOutcome> out;
  const SystemDims qq({2, 2});
  {
    Tracker t("rr.nonnegativity");
    auto rng = stream(cfg, "rr.nonnegativity");
    for (std::size_t i = 0; i < cfg.trials; ++i) {
      const auto n = i % 2 ? random_two_qubit_unitary(rng) : random_channel(4, 2, rng, qq);
      const double v = measure_rr(n, default_free_family(n), rr_cfg(rng)).value;
      t.record(v + 1e-9, "value " + std::to_string(v));
    }
    out.push_back(t.finish());
  }
  {
    Tracker t("rr.free_zero");
    auto rng = stream(cfg, "rr.free_zero");
    for (std::size_t i = 0; i < cfg.trials; ++i) {
      FreeChannelFamily f{FreeFamilyKind::local_product, {2, 2}, {}, 1};
      if (i % 2) f.kraus_ranks = {1, 1};
      const auto n = sample_free_channel(f, rng());
      const double v = measure_rr(n, default_free_family(n), rr_cfg(rng)).value;
      t.record(1e-4 - std::abs(v), "value " + std::to_string(v));
    }
    out.push_back(t.finish());
  }
  {
    Tracker t("rr.entangling_positive");
    auto rng = stream(cfg, "rr.entangling_positive");
    for (const auto& n : {cnot(), controlled_phase(std::numbers::pi)}) {
      const double v = measure_rr(n, default_free_family(n), rr_cfg(rng)).value;
      t.record(v - 0.1, "value " + std::to_string(v));
    }
    out.push_back(t.finish());
  }
  if (cfg.nightly) {
    // restricted additivity with the product family on the doubled space
    Tracker t("rr.restricted_additivity");
    auto rng = stream(cfg, "rr.restricted_additivity");
    for (std::size_t i = 0; i < 5; ++i) {
      const Channel n0 = controlled_phase(std::uniform_real_distribution<double>(0.5, 3.0)(rng));
      const Channel n1 = controlled_phase(std::uniform_real_distribution<double>(0.5, 3.0)(rng));
      auto c = rr_cfg(rng);
      c.probe_rank = 1;
      const double a = measure_rr(n0, default_free_family(n0), c).value;
      const double b = measure_rr(n1, default_free_family(n1), c).value;
      // regroup (A0 B0)(A1 B1) as (A0 A1)(B0 B1)
      const Channel sw = tensor(tensor(identity_channel(SystemDims({2})), swap_channel()),
                                identity_channel(SystemDims({2})));
      const Channel joint = compose(sw, compose(tensor(n0, n1), sw));
      const Channel regrouped(SystemDims({4, 4}), SystemDims({4, 4}), joint.kraus());
      const double ab = measure_rr(regrouped, default_free_family(regrouped), c).value;
      t.record(ab - a - b + 5e-3, fmt("joint vs sum:", ab, a + b));
    }
    out.push_back(t.finish());
  }
  return out;
}

std::vector<PropertyOutcome> suite_rc(const SuiteConfig& cfg) {
  std::vector<PropertyOutcome> out;
  const double sign = cfg.fault_sign_flip ? -1.0 : 1.0;
  auto rc = [&](const Channel& n, const OptimizerConfig& c) { return sign * measure_rc(n, c).value; };
  {
    Tracker t("rc.nonnegativity");
    auto rng = stream(cfg, "rc.nonnegativity");
    for (std::size_t i = 0; i < cfg.trials; ++i) {
      const auto n = i % 2 ? random_two_qubit_unitary(rng) : random_channel(4, 2, rng, SystemDims({2, 2}));
      const double v = rc(n, opt(rng, 8));
      t.record(v + 1e-9, "value " + std::to_string(v));
    }
    out.push_back(t.finish());
  }
  {
    Tracker t("rc.free_zero");
    auto rng = stream(cfg, "rc.free_zero");
    for (std::size_t i = 0; i < cfg.trials; ++i) {
      const double v = rc(free_mixture(rng), opt(rng, 4));
      t.record(1e-6 - std::abs(v), "value " + std::to_string(v));
    }
    out.push_back(t.finish());
  }
  {
    Tracker t("rc.monotonicity");
    auto rng = stream(cfg, "rc.monotonicity");
    for (std::size_t i = 0; i < cfg.trials; ++i) {
      const auto n = random_two_qubit_unitary(rng);
      const Superchannel s{free_mixture(rng), free_mixture(rng)};
      const double lhs = rc(apply_superchannel(s, n), opt(rng, 8));
      const double rhs = rc(n, opt(rng, 32));
      t.record(rhs + kSlack - lhs, fmt("R_c(W o N o V) vs R_c(N):", lhs, rhs));
    }
    out.push_back(t.finish());
  }
  {
    Tracker t("rc.strong_monotonicity");
    auto rng = stream(cfg, "rc.strong_monotonicity");
    for (std::size_t i = 0; i < cfg.trials; ++i) {
      const auto n = random_two_qubit_unitary(rng);
      std::exponential_distribution<double> expo(1.0);
      double w[3], total = 0.0;
      for (double& x : w) total += (x = expo(rng));
      double lhs = 0.0;
      for (double x : w) {
        const Superchannel s{free_mixture(rng), free_mixture(rng)};
        lhs += x / total * rc(apply_superchannel(s, n), opt(rng, 8));
      }
      const double rhs = rc(n, opt(rng, 32));
      t.record(rhs + kSlack - lhs, fmt("ensemble average vs R_c(N):", lhs, rhs));
    }
    out.push_back(t.finish());
  }
  {
    Tracker t("rc.convexity");
    auto rng = stream(cfg, "rc.convexity");
    std::uniform_real_distribution<double> u01(0.05, 0.95);
    for (std::size_t i = 0; i < cfg.trials; ++i) {
      const std::vector<Channel> ns{random_two_qubit_unitary(rng), random_two_qubit_unitary(rng)};
      const double p = u01(rng);
      const std::vector<double> w{p, 1 - p};
      const double lhs = rc(mix_channels(ns, w), opt(rng, 8));
      const double rhs = p * rc(ns[0], opt(rng, 32)) + (1 - p) * rc(ns[1], opt(rng, 32));
      t.record(rhs + kSlack - lhs, fmt("mixture vs average:", lhs, rhs));
    }
    out.push_back(t.finish());
  }
  {
    Tracker t("rc.grid_agreement");
    auto rng = stream(cfg, "rc.grid_agreement");
    for (std::size_t i = 0; i < cfg.trials; ++i) {
      const auto n = random_two_qubit_unitary(rng);
      const double v = rc(n, opt(rng, 32));
      const double g = grid_max_concurrence(n, 32);
      t.record(2e-2 - std::abs(v - g), fmt("optimizer vs grid:", v, g));
    }
    out.push_back(t.finish());
  }
  return out;
}

Channel local_unitaries(std::size_t n, std::mt19937_64& rng) {
  ComplexMatrix u = random_unitary(2, rng);
  for (std::size_t i = 1; i < n; ++i) u = kron(u, random_unitary(2, rng));
  return unitary_channel(u, SystemDims(std::vector<std::size_t>(n, 2)));
}

std::vector<PropertyOutcome> suite_rkme(const SuiteConfig& cfg) {
  std::vector<PropertyOutcome> out;
  const SystemDims q3({2, 2, 2});
  {
    Tracker t("rkme.nonnegativity");
    auto rng = stream(cfg, "rkme.nonnegativity");
    for (std::size_t i = 0; i < cfg.trials; ++i) {
      const auto n = unitary_channel(random_unitary(8, rng), q3);
      const double v = measure_rkme(n, 2 + i % 2, opt(rng, 4)).value;
      t.record(v + 1e-9, "value " + std::to_string(v));
    }
    out.push_back(t.finish());
  }
  {
    Tracker t("rkme.free_zero");
    auto rng = stream(cfg, "rkme.free_zero");
    for (std::size_t i = 0; i < cfg.trials; ++i) {
      const double v = measure_rkme(local_unitaries(3, rng), 2 + i % 2, opt(rng, 4)).value;
      t.record(1e-6 - std::abs(v), "value " + std::to_string(v));
    }
    out.push_back(t.finish());
  }
  {
    Tracker t("rkme.local_unitary_monotonicity");
    auto rng = stream(cfg, "rkme.local_unitary_monotonicity");
    for (std::size_t i = 0; i < cfg.trials; ++i) {
      const auto n = unitary_channel(random_unitary(8, rng), q3);
      const Superchannel s{local_unitaries(3, rng), local_unitaries(3, rng)};
      const std::size_t k = 2 + i % 2;
      const auto lhs = measure_rkme(apply_superchannel(s, n), k, opt(rng, 8));
      // V maps the product witness to a product input of N
      const auto& v = s.pre.kraus().front();
      ComplexVector psi = lhs.witness.product_state.front();
      for (std::size_t j = 1; j < 3; ++j) psi = kron(psi, lhs.witness.product_state[j]);
      const ComplexVector moved = v * std::span<const Complex>(psi);
      // recover the factors from the product vector by slicing
      DomainPoint p;
      for (std::size_t site = 0; site < 3; ++site) {
        const std::size_t keep[] = {site};
        const ComplexMatrix r = reduced_from_vector(moved, q3, keep);
        const auto es = eig_hermitian(r.hermitian_part());
        p.vectors.push_back(es.vectors.column(1));
      }
      auto c = opt(rng, 8);
      c.warm_starts.push_back(ParamManifold::product_states({2, 2, 2}).encode(p));
      const auto rhs = measure_rkme(n, k, c);
      t.record(rhs.value + kSlack - lhs.value, fmt("R(W o N o V) vs R(N):", lhs.value, rhs.value));
    }
    out.push_back(t.finish());
  }
  {
    Tracker t("rkme.subadditivity");
    auto rng = stream(cfg, "rkme.subadditivity");
    for (std::size_t i = 0; i < cfg.trials; ++i) {
      const auto a = random_two_qubit_unitary(rng), b = random_two_qubit_unitary(rng);
      const double lhs = measure_rkme(tensor(a, b), 2, opt(rng, 4)).value;
      const double rhs = measure_rkme(a, 2, opt(rng, 16)).value + measure_rkme(b, 2, opt(rng, 16)).value;
      t.record(rhs + kSlack - lhs, fmt("R(N (x) M) vs R(N) + R(M):", lhs, rhs));
    }
    out.push_back(t.finish());
  }
  {
    Tracker t("rkme.ordering_consistency");
    auto rng = stream(cfg, "rkme.ordering_consistency");
    for (std::size_t i = 0; i < cfg.trials; ++i) {
      Channel n = cnot();
      switch (i % 5) {
        case 0:
          n = unitary_channel(random_unitary(8, rng), q3);
          break;
        case 1:
          n = tensor(random_two_qubit_unitary(rng), local_unitaries(1, rng));
          break;
        case 2:
          n = compose(cyclic_shift(3, 2), local_unitaries(3, rng));
          break;
        case 3:
          n = local_unitaries(3, rng);
          break;
        default:
          n = compose(ghz_entangler(3, 2), local_unitaries(3, rng));
      }
      const auto c = opt(rng, 8);
      const auto g = classify_gamma_k(n, c);
      const auto s = strength_value(n, c);
      const bool ok = g.consistent && g.strength == s.K;
      t.record(ok ? 0.0 : -1.0, "strength " + std::to_string(s.K) + " vs classifier " + std::to_string(g.strength));
    }
    out.push_back(t.finish());
  }
  return out;
}

}  // namespace

std::vector<PropertyOutcome> run_suite(std::string_view suite, const SuiteConfig& cfg) {
  if (cfg.trials < 1) throw Error(ErrorCode::BadParam, "trials must be >= 1");
  std::vector<PropertyOutcome> out;
  auto add = [&](std::vector<PropertyOutcome> part) { out.insert(out.end(), part.begin(), part.end()); };
  const bool all = suite == "all";
  if (!all && suite != "sc" && suite != "rr" && suite != "rc" && suite != "rkme") {
    throw Error(ErrorCode::BadParam, "unknown suite '" + std::string(suite) + "'");
  }
  if (all || suite == "sc") add(suite_sc(cfg));
  if (all || suite == "rr") add(suite_rr(cfg));
  if (all || suite == "rc") add(suite_rc(cfg));
  if (all || suite == "rkme") add(suite_rkme(cfg));
  return out;
}

bool all_passed(const std::vector<PropertyOutcome>& outcomes) {
  return std::all_of(outcomes.begin(), outcomes.end(), [](const PropertyOutcome& o) { return o.passed; });
}

}  // namespace chent
