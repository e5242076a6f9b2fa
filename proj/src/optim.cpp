#include "chent/optim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

#include "chent/errors.hpp"

namespace chent {

void OptimizerConfig::validate() const {
  if (starts < 1) throw Error(ErrorCode::BadParam, "starts must be >= 1");
  if (max_iters < 1) throw Error(ErrorCode::BadParam, "max_iters must be >= 1");
  if (!(xtol > 0.0) || !(ftol > 0.0)) throw Error(ErrorCode::BadParam, "tolerances must be positive");
  if (penalty_weight < 0.0) throw Error(ErrorCode::BadParam, "penalty_weight must be >= 0");
  if (rounds < 1) throw Error(ErrorCode::BadParam, "rounds must be >= 1");
}

ParamManifold ParamManifold::product_states(std::vector<std::size_t> dims) {
  if (dims.empty()) throw Error(ErrorCode::BadParam, "product_states needs at least one factor");
  std::size_t dof = 0;
  for (std::size_t d : dims) {
    if (d < 1) throw Error(ErrorCode::BadParam, "local dimension must be >= 1");
    dof += 2 * d;
  }
  ParamManifold m(Kind::product_states, dof);
  m.dims_ = std::move(dims);
  return m;
}

ParamManifold ParamManifold::unitary(std::size_t d) {
  if (d < 1) throw Error(ErrorCode::BadParam, "unitary dimension must be >= 1");
  ParamManifold m(Kind::unitary, d * d);
  m.dims_ = {d};
  return m;
}

ParamManifold ParamManifold::kraus(std::size_t in, std::size_t out, std::size_t rank) {
  if (in < 1 || out < 1 || rank < 1) throw Error(ErrorCode::BadParam, "kraus manifold needs positive sizes");
  if (rank * out < in) throw Error(ErrorCode::BadParam, "rank * out must be >= in for an isometry");
  ParamManifold m(Kind::kraus, 2 * rank * out * in);
  m.dims_ = {in, out, rank};
  return m;
}

ParamManifold ParamManifold::simplex(std::size_t m) {
  if (m < 1) throw Error(ErrorCode::BadParam, "simplex needs at least one vertex");
  ParamManifold p(Kind::simplex, m);
  p.dims_ = {m};
  return p;
}

ParamManifold ParamManifold::composite(std::vector<ParamManifold> parts) {
  std::size_t dof = 0;
  for (const auto& p : parts) dof += p.dof();
  ParamManifold m(Kind::composite, dof);
  m.parts_ = std::move(parts);
  return m;
}

namespace {

void check_length(std::span<const double> theta, std::size_t dof) {
  if (theta.size() != dof) {
    throw Error(ErrorCode::BadLength, "expected " + std::to_string(dof) + " parameters, got " +
                                          std::to_string(theta.size()));
  }
}

}  // namespace

DomainPoint ParamManifold::decode(std::span<const double> theta) const {
  check_length(theta, dof_);
  DomainPoint p;
  switch (kind_) {
    case Kind::product_states: {
      std::size_t off = 0;
      for (std::size_t d : dims_) {
        ComplexVector v(d);
        for (std::size_t i = 0; i < d; ++i) v[i] = Complex(theta[off + 2 * i], theta[off + 2 * i + 1]);
        off += 2 * d;
        const double n = norm(v);
        if (n < 1e-300 || !std::isfinite(n)) {
          std::fill(v.begin(), v.end(), Complex{});
          v[0] = 1.0;
        } else {
          for (auto& z : v) z /= n;
        }
        p.vectors.push_back(std::move(v));
      }
      break;
    }
    case Kind::unitary: {
      const std::size_t d = dims_[0];
      ComplexMatrix h(d, d);
      std::size_t off = 0;
      for (std::size_t i = 0; i < d; ++i) h(i, i) = theta[off++];
      for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = i + 1; j < d; ++j) {
          h(i, j) = Complex(theta[off], theta[off + 1]);
          h(j, i) = std::conj(h(i, j));
          off += 2;
        }
      const auto es = eig_hermitian(h);
      ComplexMatrix u(d, d);
      for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j) {
          Complex acc{};
          for (std::size_t k = 0; k < d; ++k)
            acc += es.vectors(i, k) * std::polar(1.0, es.values[k]) * std::conj(es.vectors(j, k));
          u(i, j) = acc;
        }
      p.matrix = std::move(u);
      break;
    }
    case Kind::kraus: {
      const std::size_t in = dims_[0], out = dims_[1], rank = dims_[2];
      ComplexMatrix stacked(rank * out, in);
      for (std::size_t r = 0; r < rank * out; ++r)
        for (std::size_t c = 0; c < in; ++c) {
          const std::size_t at = 2 * (r * in + c);
          stacked(r, c) = Complex(theta[at], theta[at + 1]);
        }
      const ComplexMatrix iso = orthonormalize_columns(stacked);
      for (std::size_t j = 0; j < rank; ++j) {
        ComplexMatrix k(out, in);
        for (std::size_t a = 0; a < out; ++a)
          for (std::size_t b = 0; b < in; ++b) k(a, b) = iso(j * out + a, b);
        p.kraus.push_back(std::move(k));
      }
      break;
    }
    case Kind::simplex: {
      const double top = *std::max_element(theta.begin(), theta.end());
      RealVector w(theta.size());
      double sum = 0.0;
      for (std::size_t i = 0; i < w.size(); ++i) sum += (w[i] = std::exp(theta[i] - top));
      for (auto& x : w) x /= sum;
      p.probabilities = std::move(w);
      break;
    }
    case Kind::composite: {
      std::size_t off = 0;
      for (const auto& part : parts_) {
        p.parts.push_back(part.decode(theta.subspan(off, part.dof())));
        off += part.dof();
      }
      break;
    }
  }
  return p;
}

RealVector ParamManifold::encode(const DomainPoint& point) const {
  RealVector theta;
  theta.reserve(dof_);
  switch (kind_) {
    case Kind::product_states:
      if (point.vectors.size() != dims_.size()) throw Error(ErrorCode::BadLength, "one vector per factor");
      for (std::size_t s = 0; s < dims_.size(); ++s) {
        if (point.vectors[s].size() != dims_[s]) throw Error(ErrorCode::BadLength, "local vector length");
        for (const auto& z : point.vectors[s]) {
          theta.push_back(z.real());
          theta.push_back(z.imag());
        }
      }
      break;
    case Kind::unitary:
      throw Error(ErrorCode::BadParam, "unitary points are not encodable");
    case Kind::kraus: {
      const std::size_t in = dims_[0], out = dims_[1], rank = dims_[2];
      if (point.kraus.size() > rank) throw Error(ErrorCode::BadLength, "too many Kraus operators");
      for (std::size_t j = 0; j < rank; ++j)
        for (std::size_t a = 0; a < out; ++a)
          for (std::size_t b = 0; b < in; ++b) {
            const Complex z = j < point.kraus.size() ? point.kraus[j](a, b) : Complex{};
            theta.push_back(z.real());
            theta.push_back(z.imag());
          }
      break;
    }
    case Kind::simplex:
      if (point.probabilities.size() != dims_[0]) throw Error(ErrorCode::BadLength, "probability vector length");
      for (double p : point.probabilities) theta.push_back(std::log(std::max(p, 1e-300)));
      break;
    case Kind::composite:
      if (point.parts.size() != parts_.size()) throw Error(ErrorCode::BadLength, "one point per part");
      for (std::size_t i = 0; i < parts_.size(); ++i) {
        const auto t = parts_[i].encode(point.parts[i]);
        theta.insert(theta.end(), t.begin(), t.end());
      }
      break;
  }
  return theta;
}

RealVector ParamManifold::random_theta(std::mt19937_64& rng) const {
  std::normal_distribution<double> n01;
  RealVector theta(dof_);
  for (auto& x : theta) x = n01(rng);
  if (kind_ == Kind::unitary) {
    // spread eigenphases over the full circle
    for (auto& x : theta) x *= std::numbers::pi / 2;
  }
  return theta;
}

double ParamManifold::drift(std::span<const double> theta) const {
  auto sq = [](std::span<const double> t) {
    double s = 0.0;
    for (double x : t) s += x * x;
    return s;
  };
  switch (kind_) {
    case Kind::product_states: {
      double out = 0.0;
      std::size_t off = 0;
      for (std::size_t d : dims_) {
        const double n = sq(theta.subspan(off, 2 * d));
        out += (n - 1.0) * (n - 1.0);
        off += 2 * d;
      }
      return out;
    }
    case Kind::kraus: {
      const double n = sq(theta) / static_cast<double>(dims_[0]);
      return (n - 1.0) * (n - 1.0);
    }
    case Kind::composite: {
      double out = 0.0;
      std::size_t off = 0;
      for (const auto& part : parts_) {
        out += part.drift(theta.subspan(off, part.dof()));
        off += part.dof();
      }
      return out;
    }
    default:
      return 0.0;
  }
}

LocalRun nelder_mead_max(const std::function<double(std::span<const double>)>& f, RealVector x0, double step,
                         std::size_t max_iters, double xtol, double ftol) {
  const std::size_t n = x0.size();
  LocalRun run;
  if (n == 0) {
    run.value = run.initial = f(x0);
    run.evaluations = 1;
    run.theta = std::move(x0);
    return run;
  }
  // adaptive coefficients for high dimensions
  const double nd = static_cast<double>(n);
  const double alpha = 1.0, beta = 1.0 + 2.0 / nd, gamma = 0.75 - 1.0 / (2.0 * nd), delta = 1.0 - 1.0 / nd;

  std::vector<RealVector> simplex(n + 1, x0);
  std::vector<double> fv(n + 1);
  auto eval = [&](const RealVector& x) {
    ++run.evaluations;
    return -f(x);  // minimize the negation
  };
  for (std::size_t i = 0; i < n; ++i) simplex[i + 1][i] += step;
  for (std::size_t i = 0; i <= n; ++i) fv[i] = eval(simplex[i]);
  run.initial = -fv[0];

  std::vector<std::size_t> order(n + 1);
  RealVector centroid(n), xr(n), xe(n), xc(n);
  for (std::size_t it = 0; it < max_iters; ++it) {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return fv[a] < fv[b]; });
    {
      std::vector<RealVector> s2(n + 1);
      std::vector<double> f2(n + 1);
      for (std::size_t i = 0; i <= n; ++i) {
        s2[i] = std::move(simplex[order[i]]);
        f2[i] = fv[order[i]];
      }
      simplex = std::move(s2);
      fv = std::move(f2);
    }
    run.iterations = it + 1;

    const double fspread = fv[n] - fv[0];
    double size = 0.0;
    for (std::size_t i = 1; i <= n; ++i)
      for (std::size_t j = 0; j < n; ++j) size = std::max(size, std::abs(simplex[i][j] - simplex[0][j]));
    if (fspread <= ftol * std::max(1.0, std::abs(fv[0])) || size <= xtol) break;

    std::fill(centroid.begin(), centroid.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) centroid[j] += simplex[i][j] / nd;

    for (std::size_t j = 0; j < n; ++j) xr[j] = centroid[j] + alpha * (centroid[j] - simplex[n][j]);
    const double fr = eval(xr);
    if (fr < fv[0]) {
      for (std::size_t j = 0; j < n; ++j) xe[j] = centroid[j] + beta * (xr[j] - centroid[j]);
      const double fe = eval(xe);
      if (fe < fr) {
        simplex[n] = xe;
        fv[n] = fe;
      } else {
        simplex[n] = xr;
        fv[n] = fr;
      }
      continue;
    }
    if (fr < fv[n - 1]) {
      simplex[n] = xr;
      fv[n] = fr;
      continue;
    }
    const bool outside = fr < fv[n];
    for (std::size_t j = 0; j < n; ++j) {
      xc[j] = outside ? centroid[j] + gamma * (xr[j] - centroid[j]) : centroid[j] - gamma * (centroid[j] - simplex[n][j]);
    }
    const double fc = eval(xc);
    if (fc < (outside ? fr : fv[n])) {
      simplex[n] = xc;
      fv[n] = fc;
      continue;
    }
    for (std::size_t i = 1; i <= n; ++i) {
      for (std::size_t j = 0; j < n; ++j) simplex[i][j] = simplex[0][j] + delta * (simplex[i][j] - simplex[0][j]);
      fv[i] = eval(simplex[i]);
    }
  }
  const auto best = static_cast<std::size_t>(std::min_element(fv.begin(), fv.end()) - fv.begin());
  run.theta = simplex[best];
  run.value = -fv[best];
  return run;
}

OptimResult maximize(const Objective& objective, const ParamManifold& manifold, const OptimizerConfig& cfg) {
  cfg.validate();
  OptimResult result;
  result.value = -std::numeric_limits<double>::infinity();
  result.telemetry.seed = cfg.seed;

  // best raw value seen within the current start
  double start_best = 0.0;
  RealVector start_theta;
  auto raw = [&](std::span<const double> theta) {
    double v = 0.0;
    try {
      v = objective(manifold.decode(theta));
    } catch (const Error& e) {
      if (e.code() == ErrorCode::ObjectiveFailure) throw;
      throw Error(ErrorCode::ObjectiveFailure, e.what(), RealVector(theta.begin(), theta.end()));
    } catch (const std::exception& e) {
      throw Error(ErrorCode::ObjectiveFailure, e.what(), RealVector(theta.begin(), theta.end()));
    }
    if (!std::isfinite(v)) {
      throw Error(ErrorCode::ObjectiveFailure, "objective returned a non-finite value",
                  RealVector(theta.begin(), theta.end()));
    }
    if (start_theta.empty() || v > start_best) {
      start_best = v;
      start_theta.assign(theta.begin(), theta.end());
    }
    return v;
  };
  auto searched = [&](std::span<const double> theta) {
    const double v = raw(theta);
    return cfg.penalty_weight > 0.0 ? v - cfg.penalty_weight * manifold.drift(theta) : v;
  };

  const std::size_t total = cfg.warm_starts.size() + cfg.starts;
  for (std::size_t s = 0; s < total; ++s) {
    RealVector x0;
    if (s < cfg.warm_starts.size()) {
      x0 = cfg.warm_starts[s];
      check_length(x0, manifold.dof());
    } else {
      std::seed_seq seq{cfg.seed, static_cast<std::uint64_t>(s - cfg.warm_starts.size())};
      std::mt19937_64 rng(seq);
      x0 = manifold.random_theta(rng);
    }
    start_theta.clear();
    std::size_t budget = cfg.max_iters;
    double step = 0.5;
    bool first = true;
    double last = 0.0;
    while (budget > 0) {
      const auto run = nelder_mead_max(searched, x0, step, budget, cfg.xtol, cfg.ftol);
      if (first) last = run.initial;
      first = false;
      result.telemetry.iterations += run.iterations;
      result.telemetry.evaluations += run.evaluations;
      budget -= std::min(budget, run.iterations);
      // restart from the best vertex only while runs keep improving
      if (!(run.value > last + cfg.ftol * std::max(1.0, std::abs(run.value)))) break;
      last = run.value;
      x0 = run.theta;
      step = 0.1;
    }
    ++result.telemetry.starts;
    if (start_best > result.value) {
      result.value = start_best;
      result.theta = start_theta;
      result.telemetry.best_start = s;
    }
  }
  result.witness = manifold.decode(result.theta);
  return result;
}

OptimResult minimize(const Objective& objective, const ParamManifold& manifold, const OptimizerConfig& cfg) {
  auto negated = [&](const DomainPoint& p) { return -objective(p); };
  OptimResult r = maximize(negated, manifold, cfg);
  r.value = -r.value;
  return r;
}

}  // namespace chent
