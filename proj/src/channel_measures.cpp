#include "chent/channel_measures.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

#include "chent/errors.hpp"
#include "chent/state_measures.hpp"

namespace chent {

std::string_view to_string(Bound b) {
  switch (b) {
    case Bound::exact:
      return "exact";
    case Bound::lower:
      return "lower";
    case Bound::upper:
      return "upper";
  }
  return "exact";
}

Bound bound_from_string(std::string_view s) {
  if (s == "exact") return Bound::exact;
  if (s == "lower") return Bound::lower;
  if (s == "upper") return Bound::upper;
  throw Error(ErrorCode::BadParam, "unknown bound '" + std::string(s) + "'");
}

ComplexMatrix composed_choi(const std::vector<ComplexMatrix>& a, const std::vector<ComplexMatrix>& b) {
  const std::size_t in = b.front().cols(), out = a.front().rows();
  const std::size_t n = in * out;
  ComplexMatrix c(n, n);
  const double scale = 1.0 / static_cast<double>(in);
  for (const auto& ka : a)
    for (const auto& kb : b) {
      const ComplexMatrix k = ka * kb;
      const auto v = k.data();
      for (std::size_t r = 0; r < n; ++r) {
        if (v[r] == Complex{}) continue;
        const Complex vr = v[r] * scale;
        for (std::size_t s = 0; s < n; ++s) c(r, s) += vr * std::conj(v[s]);
      }
    }
  return c;
}

namespace {

constexpr double kSmoothing = 1e-9;

void merge(Telemetry& into, const Telemetry& t) {
  into.starts += t.starts;
  into.iterations += t.iterations;
  into.evaluations += t.evaluations;
}

std::optional<ComplexMatrix> single_kraus(const Channel& ch) {
  if (ch.kraus().size() == 1) return ch.kraus().front();
  const auto ks = kraus_from_choi(ch.choi_matrix(), ch.in_total(), ch.out_total(), 1e-12);
  if (ks.size() == 1) return ks.front();
  return std::nullopt;
}

double sc_objective(const Channel& n, const std::vector<ComplexMatrix>& m_kraus, const std::vector<ComplexMatrix>& probe) {
  const ComplexMatrix rho = composed_choi(n.kraus(), probe);
  const ComplexMatrix sigma = smooth_support(composed_choi(m_kraus, probe), kSmoothing);
  // sigma is strictly positive after smoothing
  return relative_entropy(rho, sigma, 0.0).value;
}

std::vector<ComplexMatrix> identity_kraus(std::size_t d) { return {ComplexMatrix::identity(d)}; }

void check_same_square(const Channel& n, const Channel& m) {
  if (!(n.in_dims() == m.in_dims()) || !(n.out_dims() == m.out_dims())) {
    throw Error(ErrorCode::DimMismatch, "channels act on different spaces");
  }
  if (n.in_total() != n.out_total()) throw Error(ErrorCode::DimMismatch, "Choi relative entropy needs square channels");
}

MeasureResult sc_search(const Channel& n, const std::vector<ComplexMatrix>& m_kraus, const OptimizerConfig& cfg,
                        const std::vector<RealVector>& probe_warm) {
  const std::size_t d = n.in_total();
  const std::size_t rank = cfg.probe_rank == 0 ? d * d : cfg.probe_rank;
  const auto manifold = ParamManifold::kraus(d, d, rank);
  OptimizerConfig local = cfg;
  DomainPoint id;
  id.kraus = identity_kraus(d);
  local.warm_starts.clear();
  local.warm_starts.push_back(manifold.encode(id));
  for (const auto& w : cfg.warm_starts)
    if (w.size() == manifold.dof()) local.warm_starts.push_back(w);
  for (const auto& w : probe_warm)
    if (w.size() == manifold.dof()) local.warm_starts.push_back(w);

  const auto r = maximize([&](const DomainPoint& p) { return sc_objective(n, m_kraus, p.kraus); }, manifold, local);
  MeasureResult out;
  out.measure = "sc";
  out.value = r.value;
  out.bound = Bound::lower;
  out.witness = {"probe_channel", r.theta, {}, r.witness.kraus};
  out.telemetry = r.telemetry;
  out.notes = "max over probe channels of Kraus rank " + std::to_string(rank) +
              "; finite search, so the value can only be too low";
  return out;
}

}  // namespace

MeasureResult choi_relative_entropy(const Channel& n, const Channel& m, const OptimizerConfig& cfg) {
  check_same_square(n, m);
  cfg.validate();
  if (max_abs_diff(n.choi_matrix(), m.choi_matrix()) <= 1e-12) {
    MeasureResult out;
    out.measure = "sc";
    out.value = 0.0;
    out.bound = Bound::exact;
    out.witness.kind = "none";
    out.telemetry.seed = cfg.seed;
    out.notes = "identical Choi matrices; the objective vanishes for every probe";
    return out;
  }
  return sc_search(n, m.kraus(), cfg, {});
}

FreeChannelFamily default_free_family(const Channel& n) {
  FreeChannelFamily f;
  f.kind = FreeFamilyKind::local_product;
  f.site_dims.assign(n.in_dims().dims().begin(), n.in_dims().dims().end());
  return f;
}

namespace {

// Parameterization of a free family: per-term composite of per-site Kraus
// manifolds, plus a simplex for mixtures.
class FamilyModel {
 public:
  explicit FamilyModel(const FreeChannelFamily& f) : family_(f), manifold_(build(f)) {}

  const ParamManifold& manifold() const { return manifold_; }

  std::vector<ComplexMatrix> kraus(const DomainPoint& p) const {
    if (family_.terms() == 1) return term_kraus(p.parts.front(), 1.0);
    std::vector<ComplexMatrix> out;
    const auto& w = p.parts.back().probabilities;
    for (std::size_t t = 0; t < family_.terms(); ++t) {
      if (w[t] <= 0.0) continue;
      auto ks = term_kraus(p.parts[t], w[t]);
      out.insert(out.end(), std::make_move_iterator(ks.begin()), std::make_move_iterator(ks.end()));
    }
    return out;
  }

  /// The same local channels in every term, uniform weights. Empty if some
  /// site needs more Kraus operators than its rank allows.
  std::optional<RealVector> encode_local(const std::vector<std::vector<ComplexMatrix>>& site_kraus) const {
    DomainPoint term;
    for (std::size_t s = 0; s < site_kraus.size(); ++s) {
      if (site_kraus[s].size() > family_.rank_of(s)) return std::nullopt;
      DomainPoint site;
      site.kraus = site_kraus[s];
      term.parts.push_back(std::move(site));
    }
    DomainPoint p;
    for (std::size_t t = 0; t < family_.terms(); ++t) p.parts.push_back(term);
    if (family_.terms() > 1) {
      DomainPoint w;
      w.probabilities.assign(family_.terms(), 1.0 / static_cast<double>(family_.terms()));
      p.parts.push_back(std::move(w));
    }
    return manifold_.encode(p);
  }

 private:
  static ParamManifold build(const FreeChannelFamily& f) {
    f.validate();
    std::vector<ParamManifold> sites;
    for (std::size_t s = 0; s < f.site_dims.size(); ++s) {
      sites.push_back(ParamManifold::kraus(f.site_dims[s], f.site_dims[s], f.rank_of(s)));
    }
    std::vector<ParamManifold> parts(f.terms(), ParamManifold::composite(sites));
    if (f.terms() > 1) parts.push_back(ParamManifold::simplex(f.terms()));
    return ParamManifold::composite(std::move(parts));
  }

  std::vector<ComplexMatrix> term_kraus(const DomainPoint& term, double weight) const {
    std::vector<ComplexMatrix> acc{ComplexMatrix::identity(1) * Complex(std::sqrt(weight))};
    for (const auto& site : term.parts) {
      std::vector<ComplexMatrix> next;
      next.reserve(acc.size() * site.kraus.size());
      for (const auto& a : acc)
        for (const auto& k : site.kraus) next.push_back(kron(a, k));
      acc = std::move(next);
    }
    return acc;
  }

  FreeChannelFamily family_;
  ParamManifold manifold_;
};

}  // namespace

MeasureResult measure_rr(const Channel& n, const FreeChannelFamily& family, const OptimizerConfig& cfg) {
  cfg.validate();
  if (!(n.in_dims() == n.out_dims())) throw Error(ErrorCode::DimMismatch, "free-distance measure needs in == out dims");
  if (!std::equal(family.site_dims.begin(), family.site_dims.end(), n.in_dims().dims().begin(),
                  n.in_dims().dims().end())) {
    throw Error(ErrorCode::DimMismatch, "free family sites do not match " + n.in_dims().to_string());
  }
  const FamilyModel model(family);
  const std::size_t d = n.in_total();

  // anchors: the identity and the channel's own local marginals
  std::vector<RealVector> anchors;
  {
    std::vector<std::vector<ComplexMatrix>> ids, marg;
    for (std::size_t s = 0; s < family.site_dims.size(); ++s) {
      ids.push_back(identity_kraus(family.site_dims[s]));
      marg.push_back(local_marginal(n, s).kraus());
    }
    if (auto t = model.encode_local(marg)) anchors.push_back(*t);
    if (auto t = model.encode_local(ids)) anchors.push_back(*t);
  }

  std::vector<std::vector<ComplexMatrix>> probes{identity_kraus(d)};
  std::vector<RealVector> probe_thetas;
  MeasureResult best;
  best.value = std::numeric_limits<double>::infinity();
  Telemetry tele;
  tele.seed = cfg.seed;
  RealVector best_outer;
  std::size_t rounds_run = 0;

  for (std::size_t round = 0; round < cfg.rounds; ++round) {
    ++rounds_run;
    OptimizerConfig outer_cfg = cfg;
    outer_cfg.seed = cfg.seed + 1000003 * round;
    outer_cfg.warm_starts.clear();
    if (!best_outer.empty()) outer_cfg.warm_starts.push_back(best_outer);
    outer_cfg.warm_starts.insert(outer_cfg.warm_starts.end(), anchors.begin(), anchors.end());
    const auto outer = minimize(
        [&](const DomainPoint& p) {
          const auto mk = model.kraus(p);
          double worst = -std::numeric_limits<double>::infinity();
          for (const auto& x : probes) worst = std::max(worst, sc_objective(n, mk, x));
          return worst;
        },
        model.manifold(), outer_cfg);
    merge(tele, outer.telemetry);

    const Channel m(n.in_dims(), n.out_dims(), model.kraus(outer.witness), 1e-7);
    OptimizerConfig inner_cfg = cfg;
    inner_cfg.seed = cfg.seed + 1000003 * round + 1;
    inner_cfg.warm_starts.clear();
    MeasureResult inner = max_abs_diff(n.choi_matrix(), m.choi_matrix()) <= 1e-12
                              ? choi_relative_entropy(n, m, inner_cfg)
                              : sc_search(n, m.kraus(), inner_cfg, probe_thetas);
    merge(tele, inner.telemetry);

    if (inner.value < best.value) {
      best.value = inner.value;
      best.witness = {"free_channel", outer.theta, {}, m.kraus()};
      best_outer = outer.theta;
    }
    if (best.value <= cfg.ftol) break;
    if (inner.witness.kind == "probe_channel") {
      probes.push_back(inner.witness.kraus);
      probe_thetas.push_back(inner.witness.theta);
    }
  }

  best.measure = "rr";
  best.bound = Bound::upper;
  best.telemetry = tele;
  best.notes = "min over the " +
               std::string(family.kind == FreeFamilyKind::local_product ? "local-product" : "mixed local-product") +
               " free family (upper bound on the true free set); each inner value is a probe search (lower bound); " +
               std::to_string(rounds_run) + " alternating rounds";
  return best;
}

MeasureResult measure_rc(const Channel& n, const OptimizerConfig& cfg) {
  cfg.validate();
  const SystemDims& out = n.out_dims();
  if (out.count() != 2) throw Error(ErrorCode::NotBipartite, "output has " + std::to_string(out.count()) + " factors");
  const auto iso = single_kraus(n);
  const bool qubits = out == SystemDims({2, 2});
  if (!iso && !qubits) {
    throw Error(ErrorCode::UnsupportedMixedOutput,
                "outputs may be mixed and exact mixed-state concurrence is only available on two qubits; "
                "use convex_roof_upper_bound for a sampled upper bound");
  }
  std::vector<std::size_t> in_dims(n.in_dims().dims().begin(), n.in_dims().dims().end());
  const auto manifold = ParamManifold::product_states(in_dims);
  bool used_mixed = false;

  const auto r = maximize(
      [&](const DomainPoint& p) {
        ComplexVector psi = p.vectors.front();
        for (std::size_t i = 1; i < p.vectors.size(); ++i) psi = kron(psi, p.vectors[i]);
        if (iso) return concurrence_of_vector(*iso * std::span<const Complex>(psi), out);
        const ComplexMatrix rho = apply_to_vector(n, psi);
        if (purity_of(rho) >= 1.0 - 1e-8) {
          const std::size_t first[] = {0};
          return std::sqrt(std::max(0.0, 2.0 * (1.0 - purity_of(partial_trace_matrix(rho, out, first)))));
        }
        used_mixed = true;
        return concurrence_wootters(rho);
      },
      manifold, cfg);

  MeasureResult res;
  res.measure = "rc";
  res.value = r.value;
  res.bound = Bound::lower;
  res.witness = {"product_state", r.theta, r.witness.vectors, {}};
  res.telemetry = r.telemetry;
  res.notes = "max over product pure inputs; finite search, so the value can only be too low";
  if (used_mixed) res.notes += "; mixed two-qubit outputs scored with the spin-flip formula";
  return res;
}

namespace {

// k-ME over product inputs; non-isometric channels score only pure outputs.
MeasureResult kme_search(const Channel& n, std::size_t k, const OptimizerConfig& cfg, bool* mixed_seen) {
  const SystemDims& out = n.out_dims();
  const auto iso = single_kraus(n);
  std::vector<std::size_t> in_dims(n.in_dims().dims().begin(), n.in_dims().dims().end());
  const auto manifold = ParamManifold::product_states(in_dims);
  const auto r = maximize(
      [&](const DomainPoint& p) {
        ComplexVector psi = p.vectors.front();
        for (std::size_t i = 1; i < p.vectors.size(); ++i) psi = kron(psi, p.vectors[i]);
        if (iso) return kme_of_vector(*iso * std::span<const Complex>(psi), out, k);
        const ComplexMatrix rho = apply_to_vector(n, psi);
        if (purity_of(rho) < 1.0 - 1e-8) {
          *mixed_seen = true;
          return 0.0;
        }
        const auto es = eig_hermitian(rho.hermitian_part());
        return kme_of_vector(es.vectors.column(es.values.size() - 1), out, k);
      },
      manifold, cfg);
  MeasureResult res;
  res.measure = "rkme";
  res.value = r.value;
  res.bound = Bound::lower;
  res.witness = {"product_state", r.theta, r.witness.vectors, {}};
  res.telemetry = r.telemetry;
  res.notes = "k = " + std::to_string(k) + "; max over fully product pure inputs; finite search, so the value can only be too low";
  return res;
}

void check_k(const Channel& n, std::size_t k) {
  const std::size_t parts = n.out_dims().count();
  if (k < 2 || k > parts) {
    throw Error(ErrorCode::BadArity, "k = " + std::to_string(k) + " outside [2, " + std::to_string(parts) + "]");
  }
}

}  // namespace

MeasureResult measure_rkme(const Channel& n, std::size_t k, const OptimizerConfig& cfg) {
  cfg.validate();
  check_k(n, k);
  if (!single_kraus(n)) {
    throw Error(ErrorCode::MixedOutputUnsupported,
                "channel is not an isometry, so outputs can be mixed; use convex_roof_upper_bound with the k-ME "
                "inner measure for sampled upper bounds");
  }
  bool unused = false;
  return kme_search(n, k, cfg, &unused);
}

StrengthReport strength_value(const Channel& n, const OptimizerConfig& cfg) {
  cfg.validate();
  const std::size_t parts = n.out_dims().count();
  StrengthReport rep;
  rep.K = parts + 1;
  for (std::size_t k = 2; k <= parts; ++k) {
    bool mixed = false;
    auto r = kme_search(n, k, cfg, &mixed);
    rep.mixed_outputs_seen |= mixed;
    rep.witness_state = r.witness.product_state;
    const bool positive = r.value > kSepTol;
    rep.per_k.push_back(std::move(r));
    if (positive) {
      rep.K = k;
      break;
    }
  }
  rep.classification = "Q_" + std::to_string(rep.K);
  if (rep.mixed_outputs_seen) {
    rep.caveat = "some product inputs produced mixed outputs; only pure outputs were scored";
  }
  return rep;
}

GammaClassification classify_gamma_k(const Channel& n, const OptimizerConfig& cfg) {
  cfg.validate();
  const std::size_t parts = n.out_dims().count();
  GammaClassification g;
  g.strength = parts + 1;
  for (std::size_t k = 2; k <= parts; ++k) {
    bool mixed = false;
    const double v = kme_search(n, k, cfg, &mixed).value;
    g.values.push_back(v);
    if (v <= kSepTol) {
      g.separable_ks.push_back(k);
      g.largest_k = k;
    } else if (g.strength == parts + 1) {
      g.strength = k;
    }
  }
  g.in_gamma = parts >= 2 && g.largest_k == parts;
  // positivity at k forces positivity at every k' > k
  for (std::size_t k = 2; k <= parts; ++k) {
    const bool sep = std::find(g.separable_ks.begin(), g.separable_ks.end(), k) != g.separable_ks.end();
    if (sep != (k < g.strength)) g.consistent = false;
  }
  return g;
}

}  // namespace chent
