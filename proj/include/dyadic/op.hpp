#pragma once

// ============================================================================
// The positive dyadic operator and its norm estimators.
//
//   T f (x) = Sum_{Q active} lambda_Q <f>^sigma_Q 1_Q(x),
//   <f>^sigma_Q = (1/sigma(Q)) Int_Q f dsigma,
//
// where a cube is active when lambda_Q > 0, sigma(Q) > 0 and omega(Q) > 0.
// The operator norm L^p(sigma) -> L^q(omega) with q < 1 <= p is estimated by
// annealed projected gradient ascent of Int (T f + eps)^q domega over the
// nonnegative part of the unit sphere of L^p(sigma), with eps -> 0.
//
// The multiplier estimator restricts the supremum to test functions of tower
// form B = Sum_Q b_Q 1_Q with b >= 0; these sandwich the operator norm within
// the L^p(sigma) bound of the dyadic maximal operator.
// ============================================================================

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <stdexcept>
#include <vector>

#include "dyadic/exponents.hpp"
#include "dyadic/instance.hpp"
#include "dyadic/mixed_norm.hpp"
#include "dyadic/tree.hpp"

namespace dyadic {

// T f at the leaves, using the active cube set of the instance.
inline std::vector<double> apply_operator(const Instance& inst, const std::vector<double>& f_leaves) {
  const Tree& t = inst.tree;
  if (f_leaves.size() != t.leaf_count)
    throw std::invalid_argument("leaf vector size mismatch");
  std::vector<double> weighted(t.leaf_count);
  for (std::size_t i = 0; i < t.leaf_count; ++i) weighted[i] = f_leaves[i] * inst.sigma.leaf[i];
  std::vector<double> mass = subtree_sum(t, from_leaves(t, weighted));
  std::vector<double> contrib(t.node_count, 0.0);
  for (std::size_t n = 0; n < t.node_count; ++n)
    if (inst.active[n]) contrib[n] = inst.lambda[n] * mass[n] / inst.sigma.node[n];
  std::vector<double> towers = ancestor_sum(t, contrib);
  return leaf_slice(t, towers);
}

// Per-leaf supremum of |f| averages over sigma-charged ancestor cubes.
inline std::vector<double> maximal_average(const Tree& t, const Measure& sigma,
                                           const std::vector<double>& f_leaves) {
  if (f_leaves.size() != t.leaf_count)
    throw std::invalid_argument("leaf vector size mismatch");
  std::vector<double> weighted(t.leaf_count);
  for (std::size_t i = 0; i < t.leaf_count; ++i) weighted[i] = std::abs(f_leaves[i]) * sigma.leaf[i];
  std::vector<double> mass = subtree_sum(t, from_leaves(t, weighted));
  std::vector<double> avg(t.node_count, 0.0);
  for (std::size_t n = 0; n < t.node_count; ++n)
    if (sigma.node[n] > 0.0) avg[n] = mass[n] / sigma.node[n];
  return leaf_slice(t, ancestor_max(t, avg));
}

inline double lp_norm_leaf(const Measure& mu, const std::vector<double>& f_leaves, double p) {
  if (!(p > 0.0) || !std::isfinite(p))
    throw std::invalid_argument("leaf norm needs a finite positive exponent");
  double s = 0.0;
  for (std::size_t i = 0; i < f_leaves.size(); ++i)
    if (mu.leaf[i] > 0.0 && f_leaves[i] != 0.0) s += mu.leaf[i] * std::pow(std::abs(f_leaves[i]), p);
  return s == 0.0 ? 0.0 : std::pow(s, 1.0 / p);
}

// ---------------------------------------------------------------------------
// Annealed projected gradient ascent shared by the norm estimators.
// ---------------------------------------------------------------------------

struct AscentOptions {
  int starts = 8;
  int stages = 10;          // eps_init * 0.1^stage, down to eps_init * 1e-9
  double eps_init = 1e-3;
  int iters_per_stage = 60;
  std::uint64_t seed = 1234;
};

struct NormEstimate {
  double value = 0.0;
  std::vector<double> maximizer;
  double stationarity = 0.0;  // relative gain of the last accepted ascent step
  long iterations = 0;
  bool converged = false;
};

namespace detail {

inline NormEstimate run_annealed_ascent(
    const std::vector<std::vector<double>>& inits,
    const std::function<double(const std::vector<double>&, double)>& objective,
    const std::function<std::vector<double>(const std::vector<double>&, double)>& gradient,
    const std::function<bool(std::vector<double>&)>& project, const AscentOptions& opts) {
  NormEstimate est;
  double best_obj = -1.0;
  for (const auto& init : inits) {
    std::vector<double> x = init;
    if (!project(x)) continue;
    double eps = opts.eps_init;
    double step = 0.5;
    double last_gain = 0.0;
    for (int stage = 0; stage < opts.stages; ++stage, eps *= 0.1) {
      double obj = objective(x, eps);
      for (int it = 0; it < opts.iters_per_stage; ++it) {
        ++est.iterations;
        std::vector<double> g = gradient(x, eps);
        double gmax = 0.0, xmax = 0.0;
        for (double v : g) gmax = std::max(gmax, std::abs(v));
        for (double v : x) xmax = std::max(xmax, std::abs(v));
        if (gmax == 0.0) break;
        double ref = xmax > 0.0 ? xmax : 1.0;
        bool improved = false;
        for (int shrink = 0; shrink < 50; ++shrink) {
          std::vector<double> cand = x;
          double sc = step * ref / gmax;
          for (std::size_t i = 0; i < cand.size(); ++i) cand[i] += sc * g[i];
          if (!project(cand)) {
            step *= 0.5;
            continue;
          }
          double o2 = objective(cand, eps);
          if (o2 > obj) {
            last_gain = (o2 - obj) / std::max(obj, 1e-300);
            x = std::move(cand);
            obj = o2;
            step *= 1.3;
            improved = true;
            break;
          }
          step *= 0.5;
        }
        if (!improved) break;
        if (last_gain < 1e-12 && it > 3) break;
      }
    }
    double final_obj = objective(x, 0.0);
    if (final_obj > best_obj) {
      best_obj = final_obj;
      est.maximizer = x;
      est.stationarity = last_gain;
    }
  }
  est.converged = est.stationarity <= 1e-9;
  return est;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Operator norm estimate: sup { ||T f||_{L^q(omega)} : ||f||_{L^p(sigma)} <= 1 }.
// ---------------------------------------------------------------------------

inline NormEstimate estimate_operator_norm(const Instance& inst, const AscentOptions& opts = {}) {
  const Tree& t = inst.tree;
  const double p = inst.exps.p, q = inst.exps.q;

  double lmax = 0.0;
  for (std::size_t n = 0; n < t.node_count; ++n)
    if (inst.active[n]) lmax = std::max(lmax, inst.lambda[n]);
  NormEstimate est;
  est.maximizer.assign(t.leaf_count, 0.0);
  if (lmax == 0.0) {
    est.converged = true;
    return est;
  }
  std::vector<double> lam_hat(t.node_count, 0.0);
  for (std::size_t n = 0; n < t.node_count; ++n)
    if (inst.active[n]) lam_hat[n] = inst.lambda[n] / lmax;

  auto apply_hat = [&](const std::vector<double>& f) {
    std::vector<double> weighted(t.leaf_count);
    for (std::size_t i = 0; i < t.leaf_count; ++i) weighted[i] = f[i] * inst.sigma.leaf[i];
    std::vector<double> mass = subtree_sum(t, from_leaves(t, weighted));
    std::vector<double> contrib(t.node_count, 0.0);
    for (std::size_t n = 0; n < t.node_count; ++n)
      if (inst.active[n]) contrib[n] = lam_hat[n] * mass[n] / inst.sigma.node[n];
    return leaf_slice(t, ancestor_sum(t, contrib));
  };

  auto objective = [&](const std::vector<double>& f, double eps) {
    std::vector<double> tf = apply_hat(f);
    double s = 0.0;
    for (std::size_t i = 0; i < t.leaf_count; ++i) {
      if (!(inst.omega.leaf[i] > 0.0)) continue;
      double base = tf[i] + eps;
      if (base > 0.0) s += inst.omega.leaf[i] * std::pow(base, q);
    }
    return s;
  };
  auto gradient = [&](const std::vector<double>& f, double eps) {
    std::vector<double> tf = apply_hat(f);
    std::vector<double> u(t.leaf_count, 0.0);
    for (std::size_t i = 0; i < t.leaf_count; ++i)
      if (inst.omega.leaf[i] > 0.0) u[i] = inst.omega.leaf[i] * std::pow(tf[i] + eps, q - 1.0);
    std::vector<double> w = subtree_sum(t, from_leaves(t, u));
    std::vector<double> h(t.node_count, 0.0);
    for (std::size_t n = 0; n < t.node_count; ++n)
      if (inst.active[n]) h[n] = lam_hat[n] * w[n] / inst.sigma.node[n];
    std::vector<double> towers = leaf_slice(t, ancestor_sum(t, h));
    std::vector<double> g(t.leaf_count, 0.0);
    for (std::size_t i = 0; i < t.leaf_count; ++i) g[i] = inst.sigma.leaf[i] * towers[i];
    return g;
  };
  auto project = [&](std::vector<double>& f) {
    for (std::size_t i = 0; i < t.leaf_count; ++i)
      if (f[i] < 0.0 || !(inst.sigma.leaf[i] > 0.0)) f[i] = 0.0;
    double nrm = lp_norm_leaf(inst.sigma, f, p);
    if (!(nrm > 0.0)) return false;
    for (auto& v : f) v /= nrm;
    return true;
  };

  std::vector<std::vector<double>> inits;
  inits.emplace_back(t.leaf_count, 1.0);
  inits.push_back(inst.omega.leaf);
  for (int s = 2; s < opts.starts; ++s) {
    std::mt19937_64 rng(opts.seed + static_cast<std::uint64_t>(s));
    std::lognormal_distribution<double> ln(0.0, 1.0);
    std::vector<double> f(t.leaf_count);
    for (auto& v : f) v = ln(rng);
    inits.push_back(std::move(f));
  }

  // with q < 1 the objective rewards concentration, so the global maximum is
  // often a point mass or a sparse mix that interior starts miss; screen
  // vertex, pair, and coarse direction-grid candidates by the raw objective
  // and let the strongest join the ascent
  std::vector<std::size_t> charged;
  for (std::size_t i = 0; i < t.leaf_count; ++i)
    if (inst.sigma.leaf[i] > 0.0) charged.push_back(i);
  std::vector<std::vector<double>> cands;
  if (charged.size() <= 64) {
    for (std::size_t i : charged) {
      std::vector<double> f(t.leaf_count, 0.0);
      f[i] = 1.0;
      cands.push_back(std::move(f));
    }
  } else {
    std::vector<double> h(t.node_count, 0.0);
    for (std::size_t n = 0; n < t.node_count; ++n)
      if (inst.active[n]) h[n] = lam_hat[n] / inst.sigma.node[n];
    std::vector<double> tower_hat = leaf_slice(t, ancestor_sum(t, h));
    std::vector<std::pair<double, std::size_t>> scored;
    for (std::size_t i : charged) {
      if (!(inst.omega.leaf[i] > 0.0)) continue;
      double spread = std::pow(inst.sigma.leaf[i], 1.0 - 1.0 / p) * tower_hat[i];
      if (spread > 0.0) scored.emplace_back(inst.omega.leaf[i] * std::pow(spread, q), i);
    }
    std::sort(scored.begin(), scored.end(), std::greater<>());
    for (std::size_t k = 0; k < scored.size() && k < 16; ++k) {
      std::vector<double> f(t.leaf_count, 0.0);
      f[scored[k].second] = 1.0;
      cands.push_back(std::move(f));
    }
  }
  if (charged.size() >= 2 && charged.size() <= 32) {
    for (std::size_t a = 0; a < charged.size(); ++a)
      for (std::size_t b = a + 1; b < charged.size(); ++b) {
        std::vector<double> f(t.leaf_count, 0.0);
        f[charged[a]] = 1.0;
        f[charged[b]] = 1.0;
        cands.push_back(std::move(f));
      }
  }
  if (charged.size() >= 3 && charged.size() <= 6) {
    int m = charged.size() <= 4 ? 7 : 4;
    std::vector<int> parts(charged.size(), 0);
    auto emit = [&](auto&& self, std::size_t idx, int remaining) -> void {
      if (idx + 1 == parts.size()) {
        parts[idx] = remaining;
        std::vector<double> f(t.leaf_count, 0.0);
        for (std::size_t j = 0; j < charged.size(); ++j)
          f[charged[j]] = static_cast<double>(parts[j]);
        cands.push_back(std::move(f));
        return;
      }
      for (int take = 0; take <= remaining; ++take) {
        parts[idx] = take;
        self(self, idx + 1, remaining - take);
      }
    };
    emit(emit, 0, m);
  }
  std::vector<std::pair<double, std::size_t>> ranked;
  for (std::size_t c = 0; c < cands.size(); ++c) {
    std::vector<double> x = cands[c];
    if (!project(x)) continue;
    ranked.emplace_back(objective(x, 0.0), c);
  }
  std::sort(ranked.begin(), ranked.end(), std::greater<>());
  for (std::size_t k = 0; k < ranked.size() && k < 8; ++k)
    inits.push_back(cands[ranked[k].second]);

  NormEstimate run = detail::run_annealed_ascent(inits, objective, gradient, project, opts);
  if (run.maximizer.empty()) return est;
  double g0 = objective(run.maximizer, 0.0);
  run.value = g0 > 0.0 ? lmax * std::pow(g0, 1.0 / q) : 0.0;
  return run;
}

// ---------------------------------------------------------------------------
// Multiplier estimate over tower test functions B = Sum b_Q 1_Q, b >= 0.
// ---------------------------------------------------------------------------

inline NormEstimate estimate_multiplier_norm(const Instance& inst, const AscentOptions& opts = {}) {
  const Tree& t = inst.tree;
  const double p = inst.exps.p, q = inst.exps.q;

  double lmax = 0.0;
  for (std::size_t n = 0; n < t.node_count; ++n)
    if (inst.active[n]) lmax = std::max(lmax, inst.lambda[n]);
  NormEstimate est;
  est.maximizer.assign(t.node_count, 0.0);
  if (lmax == 0.0) {
    est.converged = true;
    return est;
  }
  std::vector<double> lam_hat(t.node_count, 0.0);
  for (std::size_t n = 0; n < t.node_count; ++n)
    if (inst.active[n]) lam_hat[n] = inst.lambda[n] / lmax;

  std::vector<double> prefix = ancestor_sum(t, lam_hat);
  std::vector<double> strict(t.node_count);  // prefix excluding the node itself
  for (std::size_t n = 0; n < t.node_count; ++n) strict[n] = prefix[n] - lam_hat[n];
  std::vector<double> prefix_leaf = leaf_slice(t, prefix);

  std::vector<std::uint8_t> allowed(t.node_count, 0);
  for (std::size_t n = 0; n < t.node_count; ++n) allowed[n] = inst.sigma.node[n] > 0.0 ? 1 : 0;

  auto leaf_values = [&](const std::vector<double>& b) {
    std::vector<double> a = ancestor_sum(t, b);
    std::vector<double> h(t.node_count, 0.0);
    for (std::size_t n = 0; n < t.node_count; ++n)
      if (inst.active[n]) h[n] = lam_hat[n] * a[n];
    std::vector<double> v = leaf_slice(t, ancestor_sum(t, h));
    for (auto& x : v) x = std::max(x, 0.0);
    return v;
  };
  auto objective = [&](const std::vector<double>& b, double eps) {
    std::vector<double> v = leaf_values(b);
    double s = 0.0;
    for (std::size_t i = 0; i < t.leaf_count; ++i) {
      if (!(inst.omega.leaf[i] > 0.0)) continue;
      double base = v[i] + eps;
      if (base > 0.0) s += inst.omega.leaf[i] * std::pow(base, q);
    }
    return s;
  };
  auto gradient = [&](const std::vector<double>& b, double eps) {
    std::vector<double> v = leaf_values(b);
    std::vector<double> u(t.leaf_count, 0.0), usum(t.leaf_count, 0.0);
    for (std::size_t i = 0; i < t.leaf_count; ++i) {
      if (!(inst.omega.leaf[i] > 0.0)) continue;
      u[i] = inst.omega.leaf[i] * std::pow(v[i] + eps, q - 1.0);
      usum[i] = u[i] * prefix_leaf[i];
    }
    std::vector<double> u0 = subtree_sum(t, from_leaves(t, u));
    std::vector<double> u1 = subtree_sum(t, from_leaves(t, usum));
    std::vector<double> g(t.node_count, 0.0);
    for (std::size_t n = 0; n < t.node_count; ++n)
      if (allowed[n]) g[n] = u1[n] - strict[n] * u0[n];
    return g;
  };
  auto project = [&](std::vector<double>& b) {
    for (std::size_t n = 0; n < t.node_count; ++n)
      if (b[n] < 0.0 || !allowed[n]) b[n] = 0.0;
    std::vector<double> trace = leaf_slice(t, ancestor_sum(t, b));
    double nrm = lp_norm_leaf(inst.sigma, trace, p);
    if (!(nrm > 0.0)) return false;
    for (auto& v : b) v /= nrm;
    return true;
  };

  std::vector<std::vector<double>> inits;
  inits.emplace_back(t.node_count, 1.0);
  inits.push_back(lam_hat);
  for (int s = 2; s < opts.starts; ++s) {
    std::mt19937_64 rng(opts.seed + 40 + static_cast<std::uint64_t>(s));
    std::lognormal_distribution<double> ln(0.0, 1.0);
    std::vector<double> b(t.node_count);
    for (auto& v : b) v = ln(rng);
    inits.push_back(std::move(b));
  }

  NormEstimate run = detail::run_annealed_ascent(inits, objective, gradient, project, opts);
  if (run.maximizer.empty()) return est;
  double g0 = objective(run.maximizer, 0.0);
  run.value = g0 > 0.0 ? lmax * std::pow(g0, 1.0 / q) : 0.0;
  return run;
}

// ---------------------------------------------------------------------------
// Transforms between tower coefficients b and envelope families a.
// ---------------------------------------------------------------------------

// a_Q = Sum_{R superset Q} b_R; turns Sum_Q b_Q 1_Q into sup_Q a_Q 1_Q exactly
// and Sum_Q rho_Q b_Q 1_Q into Sum_Q lambda_Q a_Q 1_Q exactly.
inline std::vector<double> ancestor_sum_family(const Tree& t, const std::vector<double>& b) {
  return ancestor_sum(t, b);
}

// b_Q = M_Q - M_{parent(Q)} with M the running ancestor maximum of a; then
// Sum_Q b_Q 1_Q = sup_Q a_Q 1_Q exactly while Sum_Q rho_Q b_Q 1_Q dominates
// Sum_Q lambda_Q a_Q 1_Q pointwise.
inline std::vector<double> envelope_increment_family(const Tree& t, const std::vector<double>& a) {
  std::vector<double> m = ancestor_max(t, a);
  std::vector<double> b(t.node_count, 0.0);
  b[t.root()] = m[t.root()];
  for (std::size_t n = 1; n < t.node_count; ++n) b[n] = m[n] - m[t.parent(n)];
  return b;
}

// ---------------------------------------------------------------------------
// Dual comparison for multiplier coefficients b >= 0 on active cubes:
//   lhs  = || { lambda_Q^q (omega(Q)/sigma(Q)) b_Q } ||_{(p/(p-q), 1)(sigma)}
//   rhs  = || { b_Q } ||_{(inf, 1/(1-q))(omega)}
//   sufficient_integral = Int ( Sum_active lambda_Q^q (omega(Q)/sigma(Q)) 1_Q )^{p/(p-q)} dsigma
// ---------------------------------------------------------------------------

struct DualMultiplierComparison {
  double lhs = 0.0;
  double rhs = 0.0;
  double sufficient_integral = 0.0;
};

inline DualMultiplierComparison dual_multiplier_comparison(const Instance& inst,
                                                           const std::vector<double>& b) {
  const Tree& t = inst.tree;
  const double p = inst.exps.p, q = inst.exps.q;
  DualMultiplierComparison out;

  std::vector<double> ratio(t.node_count, 0.0);
  for (std::size_t n = 0; n < t.node_count; ++n)
    if (inst.active[n])
      ratio[n] = std::pow(inst.lambda[n], q) * inst.omega.node[n] / inst.sigma.node[n];

  std::vector<double> lhs_family(t.node_count, 0.0);
  std::vector<double> rhs_family(t.node_count, 0.0);
  for (std::size_t n = 0; n < t.node_count; ++n) {
    if (!inst.active[n]) continue;
    lhs_family[n] = ratio[n] * b[n];
    rhs_family[n] = b[n];
  }
  out.lhs = mixed_norm(t, inst.sigma, lhs_family, {p / (p - q), 1.0}).value;
  out.rhs = mixed_norm(t, inst.omega, rhs_family, {kInf, 1.0 / (1.0 - q)}).value;

  std::vector<double> base = leaf_slice(t, ancestor_sum(t, ratio));
  double integral = 0.0;
  for (std::size_t i = 0; i < t.leaf_count; ++i)
    if (inst.sigma.leaf[i] > 0.0 && base[i] > 0.0)
      integral += inst.sigma.leaf[i] * std::pow(base[i], p / (p - q));
  out.sufficient_integral = integral;
  return out;
}

}  // namespace dyadic
