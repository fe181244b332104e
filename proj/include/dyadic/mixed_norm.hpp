#pragma once

// ============================================================================
// Mixed integral/supremum norms of cube-indexed families.
//
// For a family {a_Q} of nonnegative reals and a measure mu, the norm with
// exponent pair (r, s) is:
//
//   r < inf, s finite:  ( Int ( Sum_Q a_Q^s 1_Q )^{r/s} dmu )^{1/r}
//   r < inf, s = inf :  ( Int ( sup_Q a_Q 1_Q )^{r}   dmu )^{1/r}
//   r = inf, s finite:  sup_Q ( (1/mu(Q)) Sum_{R subset Q} a_R^s mu(R) )^{1/s}
//   r = inf, s = inf :  sup_Q a_Q
//
// The r = inf, s finite case is a Carleson-type norm; the sup there runs over
// cubes with mu(Q) > 0.  Negative finite s is evaluated literally; a zero
// family value that meets positive mass then makes the norm +inf, reported
// through the zero_base flag.
// ============================================================================

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "dyadic/exponents.hpp"
#include "dyadic/tree.hpp"

namespace dyadic {

struct NormExponents {
  double outer = 1.0;  // r in (0, inf]
  double inner = 1.0;  // s in (-inf, 0) or (0, inf]
};

struct NormValue {
  double value = 0.0;
  bool zero_base = false;  // 0^{negative} met positive mass; value is +inf
};

inline void validate_norm_exponents(NormExponents rs) {
  if (!(rs.outer > 0.0) || std::isnan(rs.outer))
    throw std::invalid_argument("outer exponent must lie in (0, inf], got " + std::to_string(rs.outer));
  if (rs.inner == 0.0 || std::isnan(rs.inner) || rs.inner == -kInf)
    throw std::invalid_argument("inner exponent must be finite nonzero or +inf");
}

inline NormValue mixed_norm(const Tree& t, const Measure& mu, const std::vector<double>& family,
                            NormExponents rs) {
  validate_norm_exponents(rs);
  const double r = rs.outer, s = rs.inner;
  NormValue out;

  if (r == kInf && s == kInf) {
    double m = 0.0;
    for (double v : family) m = std::max(m, std::abs(v));
    out.value = m;
    return out;
  }

  if (r == kInf) {
    // Carleson regime: subtree sums of a^s mu(R), normalized per cube.
    std::vector<double> g(t.node_count, 0.0);
    for (std::size_t n = 0; n < t.node_count; ++n) {
      if (!(mu.node[n] > 0.0)) continue;
      double a = std::abs(family[n]);
      if (a == 0.0 && s < 0.0) {
        out.zero_base = true;
        out.value = kInf;
        return out;
      }
      g[n] = (a == 0.0) ? 0.0 : std::pow(a, s) * mu.node[n];
    }
    std::vector<double> sums = subtree_sum(t, g);
    double best = 0.0;
    for (std::size_t n = 0; n < t.node_count; ++n) {
      if (!(mu.node[n] > 0.0)) continue;
      double base = sums[n] / mu.node[n];
      double v = (base == 0.0) ? 0.0 : std::pow(base, 1.0 / s);
      best = std::max(best, v);
    }
    out.value = best;
    return out;
  }

  // Finite outer exponent: integrate a per-leaf base over charged leaves.
  std::vector<double> base(t.node_count, 0.0);
  if (s == kInf) {
    std::vector<double> absfam(family.size());
    for (std::size_t n = 0; n < family.size(); ++n) absfam[n] = std::abs(family[n]);
    base = ancestor_max(t, absfam);
  } else {
    std::vector<double> powfam(family.size(), 0.0);
    for (std::size_t n = 0; n < family.size(); ++n) {
      double a = std::abs(family[n]);
      if (a == 0.0 && s < 0.0)
        powfam[n] = kInf;
      else
        powfam[n] = (a == 0.0) ? 0.0 : std::pow(a, s);
    }
    base = ancestor_sum(t, powfam);
  }

  double integral = 0.0;
  std::size_t fl = t.first_leaf();
  for (std::size_t i = 0; i < t.leaf_count; ++i) {
    if (!(mu.leaf[i] > 0.0)) continue;
    double b = base[fl + i];
    if (s != kInf && std::isinf(b)) {
      out.zero_base = true;
      out.value = kInf;
      return out;
    }
    double integrand;
    if (s == kInf)
      integrand = (b == 0.0) ? 0.0 : std::pow(b, r);
    else
      integrand = (b == 0.0) ? 0.0 : std::pow(b, r / s);
    integral += mu.leaf[i] * integrand;
  }
  out.value = (integral == 0.0) ? 0.0 : std::pow(integral, 1.0 / r);
  return out;
}

inline double mixed_norm_value(const Tree& t, const Measure& mu, const std::vector<double>& family,
                               NormExponents rs) {
  return mixed_norm(t, mu, family, rs).value;
}

// ---------------------------------------------------------------------------
// Power scaling: ||{a_Q^t}||_{(r,s)} equals ||a||_{(tr,ts)}^t.
// ---------------------------------------------------------------------------

struct PowerScalingCheck {
  double lhs = 0.0;
  double rhs = 0.0;
  double ratio = 1.0;
  bool requires_outer_power = true;  // the identity needs the outer power t on the right
};

inline PowerScalingCheck power_scaling_check(const Tree& t, const Measure& mu,
                                             const std::vector<double>& family, NormExponents rs,
                                             double power) {
  if (!(power > 0.0) || !std::isfinite(power))
    throw std::invalid_argument("scaling power must be positive and finite");
  std::vector<double> powered(family.size());
  for (std::size_t n = 0; n < family.size(); ++n) powered[n] = std::pow(std::abs(family[n]), power);
  PowerScalingCheck check;
  check.lhs = mixed_norm(t, mu, powered, rs).value;
  NormExponents scaled{rs.outer == kInf ? kInf : power * rs.outer,
                       rs.inner == kInf ? kInf : power * rs.inner};
  check.rhs = std::pow(mixed_norm(t, mu, family, scaled).value, power);
  check.ratio = (check.lhs == check.rhs) ? 1.0 : check.lhs / check.rhs;
  return check;
}

// ---------------------------------------------------------------------------
// Dual pairing: sup { Sum_Q a_Q b_Q mu(Q) : ||b||_{(r',s')} <= 1, b >= 0 }.
// ---------------------------------------------------------------------------

struct DualNormOptions {
  int starts = 8;
  int max_iters = 10000;
  std::uint64_t seed = 97;
};

struct DualNormValue {
  double value = 0.0;
  std::vector<double> witness;
  bool converged = false;
};

inline double conjugate_exponent(double r) {
  if (r == 1.0) return kInf;
  if (r == kInf) return 1.0;
  return r / (r - 1.0);
}

inline DualNormValue mixed_norm_dual(const Tree& t, const Measure& mu,
                                     const std::vector<double>& family, NormExponents rs,
                                     const DualNormOptions& opts = {}) {
  if (!(rs.outer >= 1.0) || !(rs.inner >= 1.0))
    throw std::invalid_argument("dual pairing requires exponents in [1, inf]");
  NormExponents conj{conjugate_exponent(rs.outer), conjugate_exponent(rs.inner)};

  std::vector<double> gain(t.node_count, 0.0);
  bool any = false;
  for (std::size_t n = 0; n < t.node_count; ++n) {
    if (mu.node[n] > 0.0 && family[n] != 0.0) {
      gain[n] = family[n] * mu.node[n];
      any = true;
    }
  }
  DualNormValue result;
  result.witness.assign(t.node_count, 0.0);
  if (!any) {
    result.converged = true;
    return result;
  }

  auto pairing = [&](const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t n = 0; n < t.node_count; ++n) s += gain[n] * b[n];
    return s;
  };
  auto project = [&](std::vector<double>& b) {
    for (std::size_t n = 0; n < t.node_count; ++n)
      if (b[n] < 0.0 || !(mu.node[n] > 0.0)) b[n] = 0.0;
    double nrm = mixed_norm(t, mu, b, conj).value;
    if (!(nrm > 0.0) || std::isinf(nrm)) return false;
    for (auto& v : b) v /= nrm;
    return true;
  };

  std::mt19937_64 rng(opts.seed);
  int iters_per_start = std::max(100, opts.max_iters / std::max(1, opts.starts));
  for (int start = 0; start < opts.starts; ++start) {
    std::vector<double> b(t.node_count, 0.0);
    if (start == 0) {
      b.assign(t.node_count, 1.0);
    } else if (start == 1) {
      b = gain;
    } else {
      std::lognormal_distribution<double> ln(0.0, 1.0);
      for (std::size_t n = 0; n < t.node_count; ++n) b[n] = ln(rng);
    }
    if (!project(b)) continue;
    double best = pairing(b);
    double step = 1.0;
    bool settled = false;
    for (int it = 0; it < iters_per_start && !settled; ++it) {
      bool improved = false;
      for (int halving = 0; halving < 40; ++halving) {
        std::vector<double> cand = b;
        double scale = step / (1.0 + best);
        for (std::size_t n = 0; n < t.node_count; ++n) cand[n] += scale * gain[n];
        if (!project(cand)) break;
        double val = pairing(cand);
        if (val > best * (1.0 + 1e-14)) {
          double gain_rel = (val - best) / std::max(best, 1e-300);
          b = std::move(cand);
          best = val;
          step *= 1.3;
          improved = true;
          if (gain_rel < 1e-13) settled = true;
          break;
        }
        step *= 0.5;
      }
      if (!improved) settled = true;
    }
    if (best > result.value) {
      result.value = best;
      result.witness = b;
      result.converged = settled;
    }
  }
  return result;
}

// ---------------------------------------------------------------------------
// Factorization: split c into a * b with a Hoelder-consistent exponent split,
//   ||a||_{(r1,s1)} ||b||_{(r2,s2)} <= K ||c||_{(r,s)},
// returning the constant K actually achieved.
// ---------------------------------------------------------------------------

struct FactorizeOptions {
  double fallback_threshold = 100.0;
  int descent_sweeps = 40;
};

struct FactorizeResult {
  std::vector<double> first, second;
  double first_norm = 0.0;
  double second_norm = 0.0;
  double base_norm = 0.0;
  double constant = 1.0;
  bool used_descent = false;
};

namespace detail {

inline double inv_exp(double r) { return r == kInf ? 0.0 : 1.0 / r; }

// a = u^{eu} v^{ev} elementwise with 0^0 := 1
inline std::vector<double> power_blend(const std::vector<double>& u, double eu,
                                       const std::vector<double>& v, double ev) {
  std::vector<double> out(u.size(), 1.0);
  for (std::size_t n = 0; n < u.size(); ++n) {
    double x = 1.0;
    if (eu != 0.0) x *= std::pow(u[n], eu);
    if (ev != 0.0) x *= std::pow(v[n], ev);
    out[n] = x;
  }
  return out;
}

}  // namespace detail

inline FactorizeResult mixed_norm_factorize(const Tree& t, const Measure& mu,
                                            const std::vector<double>& c, NormExponents rs,
                                            NormExponents rs1, NormExponents rs2,
                                            const FactorizeOptions& opts = {}) {
  validate_norm_exponents(rs);
  validate_norm_exponents(rs1);
  validate_norm_exponents(rs2);
  if (rs.inner < 0.0 || rs1.inner < 0.0 || rs2.inner < 0.0)
    throw std::invalid_argument("factorization requires positive inner exponents");
  using detail::inv_exp;
  if (std::abs(inv_exp(rs.outer) - inv_exp(rs1.outer) - inv_exp(rs2.outer)) > 1e-12 ||
      std::abs(inv_exp(rs.inner) - inv_exp(rs1.inner) - inv_exp(rs2.inner)) > 1e-12)
    throw std::invalid_argument("exponent split violates the Hoelder relations 1/r = 1/r1 + 1/r2, "
                                "1/s = 1/s1 + 1/s2");

  FactorizeResult res;
  res.base_norm = mixed_norm(t, mu, c, rs).value;
  if (res.base_norm == 0.0) {
    res.first.assign(c.size(), 0.0);
    res.second.assign(c.size(), 0.0);
    return res;
  }

  const double ir = inv_exp(rs.outer), is = inv_exp(rs.inner);
  const double er1 = ir > 0.0 ? inv_exp(rs1.outer) / ir : 0.0;
  const double es1 = is > 0.0 ? inv_exp(rs1.inner) / is : 0.0;
  const double er2 = ir > 0.0 ? 1.0 - er1 : 0.0;
  const double es2 = is > 0.0 ? 1.0 - es1 : 0.0;

  auto evaluate = [&](const std::vector<double>& a, const std::vector<double>& b, double& na,
                      double& nb) {
    na = mixed_norm(t, mu, a, rs1).value;
    nb = mixed_norm(t, mu, b, rs2).value;
    if (na == 0.0 && nb == 0.0) return 1.0;
    return na * nb / res.base_norm;
  };

  std::vector<std::pair<std::vector<double>, std::vector<double>>> candidates;

  // Proportional splits are exact by power scaling.
  if (ir == 0.0 || is == 0.0 || std::abs(er1 - es1) <= 1e-12) {
    double share = ir > 0.0 ? er1 : es1;
    std::vector<double> a(c.size()), b(c.size());
    for (std::size_t n = 0; n < c.size(); ++n) {
      a[n] = std::pow(c[n], share);
      b[n] = std::pow(c[n], 1.0 - share);
      if (c[n] == 0.0) { a[n] = 0.0; b[n] = 0.0; }
    }
    candidates.emplace_back(std::move(a), std::move(b));
  }

  if (ir > 0.0 && is > 0.0) {
    const double s = rs.inner;
    // Shapes for the sup-side factor v of the core split c = u * v.
    std::vector<std::vector<double>> shapes;
    shapes.push_back(std::vector<double>(c.size(), 1.0));

    // Carleson shape: per-cube normalized subtree average of c^s.
    std::vector<double> g(t.node_count, 0.0);
    for (std::size_t n = 0; n < t.node_count; ++n)
      if (mu.node[n] > 0.0 && c[n] > 0.0) g[n] = std::pow(c[n], s) * mu.node[n];
    std::vector<double> sums = subtree_sum(t, g);
    std::vector<double> carleson(t.node_count, 1.0);
    for (std::size_t n = 0; n < t.node_count; ++n)
      if (mu.node[n] > 0.0 && sums[n] > 0.0)
        carleson[n] = std::pow(sums[n] / mu.node[n], 1.0 / s);
    shapes.push_back(carleson);

    // Averaged path shape: subtree average of the per-leaf path sums of c^s.
    std::vector<double> powfam(t.node_count, 0.0);
    for (std::size_t n = 0; n < t.node_count; ++n)
      if (c[n] > 0.0) powfam[n] = std::pow(c[n], s);
    std::vector<double> path = ancestor_sum(t, powfam);
    std::vector<double> path_mass(t.node_count, 0.0);
    std::size_t fl = t.first_leaf();
    for (std::size_t i = 0; i < t.leaf_count; ++i) path_mass[fl + i] = path[fl + i] * mu.leaf[i];
    std::vector<double> path_sums = subtree_sum(t, path_mass);
    std::vector<double> averaged(t.node_count, 1.0);
    for (std::size_t n = 0; n < t.node_count; ++n)
      if (mu.node[n] > 0.0 && path_sums[n] > 0.0)
        averaged[n] = std::pow(path_sums[n] / mu.node[n], 1.0 / s);
    shapes.push_back(averaged);

    if (rs.outer != kInf) {
      double theta = s / (s + rs.outer);
      std::vector<double> damped(t.node_count, 1.0);
      for (std::size_t n = 0; n < t.node_count; ++n) damped[n] = std::pow(carleson[n], theta);
      shapes.push_back(damped);
    }

    for (auto& v : shapes) {
      std::vector<double> u(c.size(), 0.0);
      for (std::size_t n = 0; n < c.size(); ++n)
        if (c[n] > 0.0) u[n] = c[n] / v[n];
      std::vector<double> a = detail::power_blend(u, er1, v, es1);
      std::vector<double> b = detail::power_blend(u, er2, v, es2);
      for (std::size_t n = 0; n < c.size(); ++n)
        if (c[n] == 0.0) { a[n] = 0.0; b[n] = 0.0; }
      candidates.emplace_back(std::move(a), std::move(b));
    }
  }

  double best = kInf;
  for (auto& [a, b] : candidates) {
    double na, nb;
    double k = evaluate(a, b, na, nb);
    if (k < best) {
      best = k;
      res.first = a;
      res.second = b;
      res.first_norm = na;
      res.second_norm = nb;
      res.constant = k;
    }
  }

  if (res.constant > opts.fallback_threshold) {
    // Coordinate descent on the second factor; the first is c / b.
    res.used_descent = true;
    std::vector<double> b = res.second;
    auto rebuild = [&](const std::vector<double>& bb) {
      std::vector<double> a(c.size(), 0.0);
      for (std::size_t n = 0; n < c.size(); ++n)
        if (c[n] > 0.0 && bb[n] > 0.0) a[n] = c[n] / bb[n];
      return a;
    };
    std::vector<double> a = rebuild(b);
    double na, nb;
    double cur = evaluate(a, b, na, nb);
    const double factors[] = {3.0, 1.0 / 3.0, 1.5, 1.0 / 1.5, 1.1, 1.0 / 1.1};
    for (int sweep = 0; sweep < opts.descent_sweeps; ++sweep) {
      double before = cur;
      for (std::size_t n = 0; n < c.size(); ++n) {
        if (!(c[n] > 0.0)) continue;
        for (double f : factors) {
          std::vector<double> bb = b;
          bb[n] *= f;
          std::vector<double> aa = rebuild(bb);
          double naa, nbb;
          double k = evaluate(aa, bb, naa, nbb);
          if (k < cur * (1.0 - 1e-12)) {
            cur = k;
            b = std::move(bb);
            a = std::move(aa);
            na = naa;
            nb = nbb;
          }
        }
      }
      if (cur > before * (1.0 - 1e-4)) break;
    }
    if (cur < res.constant) {
      res.first = a;
      res.second = b;
      res.first_norm = na;
      res.second_norm = nb;
      res.constant = cur;
    }
  }
  return res;
}

// ---------------------------------------------------------------------------
// Comparability ratios between partial-summation expressions.
// ---------------------------------------------------------------------------

struct ExpressionRatios {
  std::vector<double> values;
  double ratio_low = 1.0;   // min/max over the expressions
  double ratio_high = 1.0;  // max/min
};

namespace detail {

inline void fill_ratios(ExpressionRatios& out) {
  double mn = kInf, mx = 0.0;
  for (double v : out.values) {
    mn = std::min(mn, v);
    mx = std::max(mx, v);
  }
  if (mx == 0.0) {
    out.ratio_low = out.ratio_high = 1.0;
  } else {
    out.ratio_low = mn / mx;
    out.ratio_high = (mn == 0.0) ? kInf : mx / mn;
  }
}

inline double power_or_one(double base, double e) {
  if (e == 0.0) return 1.0;  // 0^0 := 1 in the degenerate p = 1 branches
  return base == 0.0 ? 0.0 : std::pow(base, e);
}

}  // namespace detail

// Three expressions tied by summation by parts:
//   E1 = Int ( Sum_Q a_Q 1_Q )^p dmu
//   E2 = Sum_Q a_Q mu(Q) ( Sum_{R superset Q} a_R )^{p-1}
//   E3 = Sum_Q a_Q Int_Q ( Sum_{R subset Q} a_R 1_R )^{p-1} dmu
inline ExpressionRatios summation_by_parts_ratio(const Tree& t, const Measure& mu,
                                                 const std::vector<double>& a, double p) {
  if (!(p >= 1.0) || !std::isfinite(p))
    throw std::invalid_argument("summation-by-parts comparison requires p in [1, inf)");
  std::vector<double> up = ancestor_sum(t, a);

  double e1 = 0.0;
  std::size_t fl = t.first_leaf();
  for (std::size_t i = 0; i < t.leaf_count; ++i)
    if (mu.leaf[i] > 0.0) e1 += mu.leaf[i] * detail::power_or_one(up[fl + i], p);

  double e2 = 0.0;
  for (std::size_t n = 0; n < t.node_count; ++n)
    if (a[n] != 0.0 && mu.node[n] > 0.0)
      e2 += a[n] * mu.node[n] * detail::power_or_one(up[n], p - 1.0);

  double e3 = 0.0;
  for (std::size_t n = 0; n < t.node_count; ++n) {
    if (a[n] == 0.0 || !(mu.node[n] > 0.0)) continue;
    double offset = up[n] - a[n];
    auto [lo, hi] = t.leaf_span(n);
    double inner = 0.0;
    for (std::size_t i = lo; i < hi; ++i)
      if (mu.leaf[i] > 0.0) inner += mu.leaf[i] * detail::power_or_one(up[fl + i] - offset, p - 1.0);
    e3 += a[n] * inner;
  }

  ExpressionRatios out;
  out.values = {e1, e2, e3};
  detail::fill_ratios(out);
  return out;
}

// Four expressions tied by localized averages:
//   F1 = Int ( Sum_Q a_Q 1_Q )^p dmu
//   F2 = Sum_Q a_Q mu(Q) ( (1/mu(Q)) Sum_{R subset Q} a_R mu(R) )^{p-1}
//   F3 = Int ( sup_Q (1_Q/mu(Q)) Sum_{R subset Q} a_R mu(R) )^p dmu
//   F4 = Sum_Q a_Q mu(Q) ( sup_{R superset Q} (1/mu(R)) Sum_{S subset R} a_S mu(S) )^{p-1}
inline ExpressionRatios equivalent_expressions_ratio(const Tree& t, const Measure& mu,
                                                     const std::vector<double>& a, double p) {
  if (!(p > 1.0) || !std::isfinite(p))
    throw std::invalid_argument("equivalent-expressions comparison requires p in (1, inf)");
  std::vector<double> up = ancestor_sum(t, a);
  std::vector<double> weighted(t.node_count, 0.0);
  for (std::size_t n = 0; n < t.node_count; ++n) weighted[n] = a[n] * mu.node[n];
  std::vector<double> down = subtree_sum(t, weighted);

  std::vector<double> avg(t.node_count, 0.0);
  for (std::size_t n = 0; n < t.node_count; ++n)
    if (mu.node[n] > 0.0) avg[n] = down[n] / mu.node[n];
  std::vector<double> avg_max = ancestor_max(t, avg);

  std::size_t fl = t.first_leaf();
  double f1 = 0.0, f2 = 0.0, f3 = 0.0, f4 = 0.0;
  for (std::size_t i = 0; i < t.leaf_count; ++i) {
    if (!(mu.leaf[i] > 0.0)) continue;
    f1 += mu.leaf[i] * detail::power_or_one(up[fl + i], p);
    f3 += mu.leaf[i] * detail::power_or_one(avg_max[fl + i], p);
  }
  for (std::size_t n = 0; n < t.node_count; ++n) {
    if (a[n] == 0.0 || !(mu.node[n] > 0.0)) continue;
    f2 += a[n] * mu.node[n] * detail::power_or_one(avg[n], p - 1.0);
    f4 += a[n] * mu.node[n] * detail::power_or_one(avg_max[n], p - 1.0);
  }

  ExpressionRatios out;
  out.values = {f1, f2, f3, f4};
  detail::fill_ratios(out);
  return out;
}

}  // namespace dyadic
