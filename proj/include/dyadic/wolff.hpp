#pragma once

// ============================================================================
// Localized gamma-averages and generalized Wolff potentials.
//
// For an active cube Q the localized sum at a leaf x in Q is
//   rho_Q(x) = Sum { lambda_R : x in R subset Q, R active },
// and its gamma-average over omega is
//   Lambda_{gamma,Q} = ( (1/omega(Q)) Int_Q rho_Q^gamma domega )^{1/gamma},
// with the limits gamma -> 0 (geometric mean), +inf (sup), -inf (inf).
// Leaves with rho = 0 under gamma < 0 contribute +inf to the mean, which the
// outer power 1/gamma < 0 sends to 0; both corners are evaluated literally.
//
// The generalized Wolff potential and its condition integral are
//   W(x) = Sum_{Q active, Q ni x} lambda_Q (omega(Q)/sigma(Q))^{p'-1} Lambda_{gamma,Q}^{p'-1},
//   condition_value = Int W^{(p-1)q/(p-q)} domega.
//
// dlbo_ratio measures the oscillation of rho_Q over omega-charged leaves,
// maximized over active cubes (dyadic logarithmic bounded oscillation).
// ============================================================================

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "dyadic/exponents.hpp"
#include "dyadic/instance.hpp"
#include "dyadic/tree.hpp"

namespace dyadic {

namespace detail {

// gamma-average of rho_Q over the omega-charged leaves of one node, given the
// ancestor-inclusive prefix sums of lambda.
inline double node_power_mean(const Tree& t, const std::vector<double>& prefix,
                              const std::vector<double>& prefix_leaf, const Measure& omega,
                              std::size_t node, double lambda_node, double gamma) {
  double base = prefix[node] - lambda_node;
  auto [lo, hi] = t.leaf_span(node);
  double total = omega.node[node];

  if (gamma == kInf || gamma == -kInf) {
    double best = gamma == kInf ? 0.0 : kInf;
    for (std::size_t i = lo; i < hi; ++i) {
      if (!(omega.leaf[i] > 0.0)) continue;
      double rho = std::max(prefix_leaf[i] - base, 0.0);
      best = gamma == kInf ? std::max(best, rho) : std::min(best, rho);
    }
    return best;
  }
  if (gamma == 0.0) {
    double acc = 0.0;
    for (std::size_t i = lo; i < hi; ++i) {
      if (!(omega.leaf[i] > 0.0)) continue;
      double rho = std::max(prefix_leaf[i] - base, 0.0);
      acc += omega.leaf[i] * std::log(rho);
    }
    return std::exp(acc / total);
  }
  if (gamma < 0.0) {
    for (std::size_t i = lo; i < hi; ++i)
      if (omega.leaf[i] > 0.0 && prefix_leaf[i] - base <= 0.0) return 0.0;
  }
  double acc = 0.0;
  for (std::size_t i = lo; i < hi; ++i) {
    if (!(omega.leaf[i] > 0.0)) continue;
    double rho = std::max(prefix_leaf[i] - base, 0.0);
    acc += omega.leaf[i] * (rho == 0.0 ? 0.0 : std::pow(rho, gamma));
  }
  double mean = acc / total;
  return mean == 0.0 ? 0.0 : std::pow(mean, 1.0 / gamma);
}

}  // namespace detail

// Per-node gamma-averages for every cube; zero where omega(Q) = 0.
inline std::vector<double> localized_power_means(const Tree& t, const std::vector<double>& lambda,
                                                 const Measure& omega, double gamma) {
  if (std::isnan(gamma)) throw std::invalid_argument("gamma must not be NaN");
  std::vector<double> prefix = ancestor_sum(t, lambda);
  std::vector<double> prefix_leaf = leaf_slice(t, prefix);
  std::vector<double> out(t.node_count, 0.0);
  for (std::size_t n = 0; n < t.node_count; ++n)
    if (omega.node[n] > 0.0)
      out[n] = detail::node_power_mean(t, prefix, prefix_leaf, omega, n, lambda[n], gamma);
  return out;
}

inline double lambda_gamma(const Tree& t, const std::vector<double>& lambda, const Measure& omega,
                           std::size_t node, double gamma) {
  if (std::isnan(gamma)) throw std::invalid_argument("gamma must not be NaN");
  if (!(omega.node[node] > 0.0))
    throw std::domain_error("gamma-average needs omega(Q) > 0");
  std::vector<double> prefix = ancestor_sum(t, lambda);
  std::vector<double> prefix_leaf = leaf_slice(t, prefix);
  return detail::node_power_mean(t, prefix, prefix_leaf, omega, node, lambda[node], gamma);
}

// Linear-case identity Lambda_{1,Q} = (1/omega(Q)) Sum_{R subset Q} lambda_R omega(R),
// computed by a single subtree sweep (independent of the generic leaf path).
inline std::vector<double> inner_sum_means(const Tree& t, const std::vector<double>& lambda,
                                           const Measure& omega) {
  std::vector<double> weighted(t.node_count);
  for (std::size_t n = 0; n < t.node_count; ++n) weighted[n] = lambda[n] * omega.node[n];
  std::vector<double> sums = subtree_sum(t, weighted);
  std::vector<double> out(t.node_count, 0.0);
  for (std::size_t n = 0; n < t.node_count; ++n)
    if (omega.node[n] > 0.0) out[n] = sums[n] / omega.node[n];
  return out;
}

// ---------------------------------------------------------------------------
// Wolff potential, condition integral, report.
// ---------------------------------------------------------------------------

inline std::vector<double> wolff_potential(const Instance& inst, double gamma) {
  if (!(inst.exps.p > 1.0))
    throw std::invalid_argument("the Wolff potential needs p > 1 (finite conjugate exponent)");
  const Tree& t = inst.tree;
  const double dual = inst.exps.conj_p() - 1.0;
  std::vector<double> means = localized_power_means(t, inst.lambda_active, inst.omega, gamma);
  std::vector<double> contrib(t.node_count, 0.0);
  for (std::size_t n = 0; n < t.node_count; ++n)
    if (inst.active[n])
      contrib[n] = inst.lambda_active[n] *
                   std::pow(inst.omega.node[n] / inst.sigma.node[n], dual) *
                   (means[n] == 0.0 ? 0.0 : std::pow(means[n], dual));
  return leaf_slice(t, ancestor_sum(t, contrib));
}

inline double wolff_condition_from_potential(const Instance& inst,
                                             const std::vector<double>& potential) {
  const double expo = inst.exps.omega_power();
  double s = 0.0;
  for (std::size_t i = 0; i < inst.tree.leaf_count; ++i)
    if (inst.omega.leaf[i] > 0.0 && potential[i] > 0.0)
      s += inst.omega.leaf[i] * std::pow(potential[i], expo);
  return s;
}

inline double wolff_condition_value(const Instance& inst, double gamma) {
  return wolff_condition_from_potential(inst, wolff_potential(inst, gamma));
}

struct ValueRange {
  double min = 0.0;
  double max = 0.0;
};

// Range of rho_Q over omega-charged leaves of one active cube.
inline ValueRange localized_range(const Instance& inst, std::size_t node) {
  const Tree& t = inst.tree;
  std::vector<double> prefix = ancestor_sum(t, inst.lambda_active);
  std::vector<double> prefix_leaf = leaf_slice(t, prefix);
  double base = prefix[node] - inst.lambda_active[node];
  auto [lo, hi] = t.leaf_span(node);
  ValueRange r{kInf, 0.0};
  for (std::size_t i = lo; i < hi; ++i) {
    if (!(inst.omega.leaf[i] > 0.0)) continue;
    double rho = std::max(prefix_leaf[i] - base, 0.0);
    r.min = std::min(r.min, rho);
    r.max = std::max(r.max, rho);
  }
  if (r.min == kInf) r.min = 0.0;
  return r;
}

inline double dlbo_ratio(const Instance& inst) {
  const Tree& t = inst.tree;
  std::vector<double> prefix = ancestor_sum(t, inst.lambda_active);
  std::vector<double> prefix_leaf = leaf_slice(t, prefix);
  double worst = 1.0;
  for (std::size_t n = 0; n < t.node_count; ++n) {
    if (!inst.active[n]) continue;
    double base = prefix[n] - inst.lambda_active[n];
    auto [lo, hi] = t.leaf_span(n);
    double mn = kInf, mx = 0.0;
    for (std::size_t i = lo; i < hi; ++i) {
      if (!(inst.omega.leaf[i] > 0.0)) continue;
      double rho = std::max(prefix_leaf[i] - base, 0.0);
      mn = std::min(mn, rho);
      mx = std::max(mx, rho);
    }
    if (mn == kInf) continue;
    double ratio = mx == 0.0 ? 1.0 : (mn == 0.0 ? kInf : mx / mn);
    worst = std::max(worst, ratio);
  }
  return worst;
}

struct WolffReport {
  double gamma = 1.0;
  std::vector<double> potential;
  double condition_value = 0.0;
  double dlbo = 1.0;
};

inline WolffReport wolff_report(const Instance& inst, double gamma) {
  WolffReport rep;
  rep.gamma = gamma;
  rep.potential = wolff_potential(inst, gamma);
  rep.condition_value = wolff_condition_from_potential(inst, rep.potential);
  rep.dlbo = dlbo_ratio(inst);
  return rep;
}

// ---------------------------------------------------------------------------
// Gamma-average envelope comparison:
//   lhs = ( Int ( Sum_active Lambda_{gamma,Q} a_Q 1_Q )^q domega )^{1/q}
//   rhs = || Sum_active a_Q 1_Q ||_{L^p(sigma)}
// ---------------------------------------------------------------------------

struct EnvelopePair {
  double lhs = 0.0;
  double rhs = 0.0;
};

inline EnvelopePair power_mean_envelope_check(const Instance& inst, const std::vector<double>& a,
                                              double gamma) {
  const Tree& t = inst.tree;
  const double p = inst.exps.p, q = inst.exps.q;
  std::vector<double> means = localized_power_means(t, inst.lambda_active, inst.omega, gamma);
  std::vector<double> weighted(t.node_count, 0.0), plain(t.node_count, 0.0);
  for (std::size_t n = 0; n < t.node_count; ++n) {
    if (!inst.active[n]) continue;
    weighted[n] = means[n] * a[n];
    plain[n] = a[n];
  }
  std::vector<double> lhs_leaf = leaf_slice(t, ancestor_sum(t, weighted));
  std::vector<double> rhs_leaf = leaf_slice(t, ancestor_sum(t, plain));

  EnvelopePair out;
  double acc = 0.0;
  for (std::size_t i = 0; i < t.leaf_count; ++i)
    if (inst.omega.leaf[i] > 0.0 && lhs_leaf[i] > 0.0)
      acc += inst.omega.leaf[i] * std::pow(lhs_leaf[i], q);
  out.lhs = acc == 0.0 ? 0.0 : std::pow(acc, 1.0 / q);
  double racc = 0.0;
  for (std::size_t i = 0; i < t.leaf_count; ++i)
    if (inst.sigma.leaf[i] > 0.0 && rhs_leaf[i] > 0.0)
      racc += inst.sigma.leaf[i] * std::pow(rhs_leaf[i], p);
  out.rhs = racc == 0.0 ? 0.0 : std::pow(racc, 1.0 / p);
  return out;
}

// ---------------------------------------------------------------------------
// Sufficiency constructions from gamma-averages.
//
// Variant family:  d_Q = (Lambda_{gamma-1,Q})^{1-gamma} sup_{R superset Q}
//                        (omega(R)/sigma(R)) Lambda_{gamma,R}^gamma,
// with the Carleson-type sup of lambda_Q d_Q^{-1} omega(Q) bounded by
// max(1, 1/gamma): the summation-by-parts step compares a right-endpoint sum
// with the integral of t^{gamma-1}, whose direction flips at gamma = 1.
//
// Pair family (gamma = 1):
//   a_Q = ( Sum_{R superset Q} lambda_R (omega(R)/sigma(R))^{p'-1}
//           Lambda_{1,R}^{p'-1} )^{(p-1)(1-q)/(p-q)},
//   c_Q = (omega(Q)/sigma(Q)) Lambda_{1,Q},
// with the three condition values evaluated raw.
// ---------------------------------------------------------------------------

struct VariantConstruction {
  std::vector<double> d;
  double sup_value = 0.0;       // sup_P (1/sigma(P)) Sum_{Q subset P} lambda_Q d_Q^{-1} omega(Q)
  double integral_value = 0.0;  // D2-type quantity of d, with its outer power
};

inline VariantConstruction sufficiency_family_variant(const Instance& inst, double gamma) {
  if (!(inst.exps.p > 1.0)) throw std::invalid_argument("construction needs p > 1");
  if (!(gamma > 0.0) || !std::isfinite(gamma))
    throw std::invalid_argument("construction needs finite gamma > 0");
  const Tree& t = inst.tree;
  const double dual = inst.exps.conj_p() - 1.0;

  std::vector<double> means = localized_power_means(t, inst.lambda_active, inst.omega, gamma);
  std::vector<double> means_lower =
      localized_power_means(t, inst.lambda_active, inst.omega, gamma - 1.0);

  std::vector<double> ratio(t.node_count, 0.0);
  for (std::size_t n = 0; n < t.node_count; ++n)
    if (inst.active[n])
      ratio[n] = (inst.omega.node[n] / inst.sigma.node[n]) * std::pow(means[n], gamma);
  std::vector<double> sup_ratio = ancestor_max(t, ratio);

  VariantConstruction out;
  out.d.assign(t.node_count, 0.0);
  for (std::size_t n = 0; n < t.node_count; ++n) {
    if (!inst.active[n]) continue;
    double head = gamma == 1.0 ? 1.0 : std::pow(means_lower[n], 1.0 - gamma);
    out.d[n] = head * sup_ratio[n];
  }

  std::vector<double> carleson(t.node_count, 0.0);
  for (std::size_t n = 0; n < t.node_count; ++n)
    if (inst.active[n] && out.d[n] > 0.0)
      carleson[n] = inst.lambda_active[n] * inst.omega.node[n] / out.d[n];
  std::vector<double> csum = subtree_sum(t, carleson);
  for (std::size_t n = 0; n < t.node_count; ++n)
    if (inst.active[n]) out.sup_value = std::max(out.sup_value, csum[n] / inst.sigma.node[n]);

  std::vector<double> env(t.node_count, 0.0);
  for (std::size_t n = 0; n < t.node_count; ++n)
    if (inst.active[n]) env[n] = inst.lambda_active[n] * std::pow(out.d[n], dual);
  std::vector<double> base = leaf_slice(t, ancestor_sum(t, env));
  double acc = 0.0;
  for (std::size_t i = 0; i < t.leaf_count; ++i)
    if (inst.omega.leaf[i] > 0.0 && base[i] > 0.0)
      acc += inst.omega.leaf[i] * std::pow(base[i], inst.exps.omega_power());
  out.integral_value = acc == 0.0 ? 0.0 : std::pow(acc, (inst.exps.p - inst.exps.q) / inst.exps.q);
  return out;
}

struct PairConstruction {
  std::vector<double> a, c;
  double sup_value = 0.0;       // sup_Q (a_Q/(c_Q sigma(Q))) Sum_{R subset Q} lambda_R a_R^{-1} omega(R)
  double sum_value = 0.0;       // Sum lambda_Q a_Q^{-p'} c_Q^{p'-1} omega(Q)
  double envelope_value = 0.0;  // Int (sup a_Q 1_Q)^{q/(1-q)} domega
};

inline PairConstruction sufficiency_family_pair(const Instance& inst) {
  if (!(inst.exps.p > 1.0)) throw std::invalid_argument("construction needs p > 1");
  const Tree& t = inst.tree;
  const double p = inst.exps.p, q = inst.exps.q;
  const double dual = inst.exps.conj_p() - 1.0;

  std::vector<double> means = localized_power_means(t, inst.lambda_active, inst.omega, 1.0);
  std::vector<double> w(t.node_count, 0.0);
  for (std::size_t n = 0; n < t.node_count; ++n)
    if (inst.active[n])
      w[n] = inst.lambda_active[n] * std::pow(inst.omega.node[n] / inst.sigma.node[n], dual) *
             (means[n] == 0.0 ? 0.0 : std::pow(means[n], dual));
  std::vector<double> tails = ancestor_sum(t, w);

  PairConstruction out;
  out.a.assign(t.node_count, 0.0);
  out.c.assign(t.node_count, 0.0);
  const double expo = (p - 1.0) * (1.0 - q) / (p - q);
  for (std::size_t n = 0; n < t.node_count; ++n) {
    if (!inst.active[n]) continue;
    out.a[n] = std::pow(tails[n], expo);
    out.c[n] = (inst.omega.node[n] / inst.sigma.node[n]) * means[n];
  }

  std::vector<double> v(t.node_count, 0.0);
  for (std::size_t n = 0; n < t.node_count; ++n)
    if (inst.active[n] && out.a[n] > 0.0)
      v[n] = inst.lambda_active[n] * inst.omega.node[n] / out.a[n];
  std::vector<double> vsum = subtree_sum(t, v);
  for (std::size_t n = 0; n < t.node_count; ++n)
    if (inst.active[n] && out.c[n] > 0.0)
      out.sup_value =
          std::max(out.sup_value, (out.a[n] / (out.c[n] * inst.sigma.node[n])) * vsum[n]);

  for (std::size_t n = 0; n < t.node_count; ++n)
    if (inst.active[n] && out.a[n] > 0.0)
      out.sum_value += inst.lambda_active[n] * std::pow(out.a[n], -inst.exps.conj_p()) *
                       std::pow(out.c[n], dual) * inst.omega.node[n];

  std::vector<double> envelope = leaf_slice(t, ancestor_max(t, out.a));
  for (std::size_t i = 0; i < t.leaf_count; ++i)
    if (inst.omega.leaf[i] > 0.0 && envelope[i] > 0.0)
      out.envelope_value += inst.omega.leaf[i] * std::pow(envelope[i], inst.exps.envelope_power());
  return out;
}

// sup over active Q of sigma(Q)^{-1/p} ( Int_Q rho_Q^q domega )^{1/q}.
inline double necessary_energy_sup(const Instance& inst) {
  const Tree& t = inst.tree;
  const double p = inst.exps.p, q = inst.exps.q;
  std::vector<double> prefix = ancestor_sum(t, inst.lambda_active);
  std::vector<double> prefix_leaf = leaf_slice(t, prefix);
  double best = 0.0;
  for (std::size_t n = 0; n < t.node_count; ++n) {
    if (!inst.active[n]) continue;
    double base = prefix[n] - inst.lambda_active[n];
    auto [lo, hi] = t.leaf_span(n);
    double acc = 0.0;
    for (std::size_t i = lo; i < hi; ++i) {
      if (!(inst.omega.leaf[i] > 0.0)) continue;
      double rho = std::max(prefix_leaf[i] - base, 0.0);
      if (rho > 0.0) acc += inst.omega.leaf[i] * std::pow(rho, q);
    }
    if (acc > 0.0)
      best = std::max(best, std::pow(inst.sigma.node[n], -1.0 / p) * std::pow(acc, 1.0 / q));
  }
  return best;
}

}  // namespace dyadic
