#pragma once

// ============================================================================
// Chain-supported counterexample generators and series bookkeeping.
//
// Decreasing chain (small gamma): nested cubes P_0 >= P_1 >= ... with annuli
// E_j = P_j \ P_{j+1} and
//   lambda_{P_j} = j^{alpha-1} log(j+2)^{-delta}   (j = 0 frozen at the j = 1 value)
//   omega(E_j)   = (j+1)^{-beta-1}
//   sigma(P_j)   = log(j+2)^{-epsilon}
// under alpha q = beta and q delta = 1.  Tracked quantities: the testing sum
//   sigma(P_0)^{-q/p} Sum_k omega(E_k) (Sum_{l<=k} lambda_{P_l})^q,
// which diverges (terms ~ k^{-1} log^{-1}), and a majorant of the gamma-Wolff
// integral obtained by enlarging each localized sum Sum_{n=l}^m to Sum_{n=0}^m,
//   Sum_k omega(E_k) (Sum_{l<=k} t_l)^{(p-1)q/(p-q)},
//   t_l = lambda_l (omega(P_l)/sigma(P_l))^{p'-1} Lambda_l^{p'-1},
//   Lambda_l = ( omega(P_l)^{-1} Sum_{m>=l} omega(E_m) L_m^gamma )^{1/gamma},
// which converges (terms ~ k^{-1} log^{-s}, s = (p - epsilon q)/(p-q) > 1).
//
// Increasing chain (large gamma): P_0 <= P_1 <= ... with E_0 = P_0,
// E_j = P_j \ P_{j-1}, sigma a unit mass on P_0, and
//   omega(E_j) = 2^{j+1},  lambda_{P_j}^q omega(P_j) = (j+1)^{-beta}.
// Tracked quantities: Sum_j (j+1)^{-beta} (finite, beta > 1) and
//   Sum_j (omega(E_j)/omega(P_j)) (j+1)^{-alpha beta},  alpha = (p-1)/(p-q),
// which diverges like N^{1 - alpha beta}.  The telescoping lower estimate
//   Sum_j (omega(E_{j+1})/omega(P_j)) b_j^alpha
//     >= log(omega(P_N)) b_N^alpha - log(omega(E_0)) b_0
// is evaluated in log space to stay finite for N ~ 10^6.
// ============================================================================

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "dyadic/exponents.hpp"
#include "dyadic/instance.hpp"
#include "dyadic/tree.hpp"

namespace dyadic {

// ---------------------------------------------------------------------------
// Series classification: term ~ C (k+1)^{-a-1} log(k+2)^{-b}.
// ---------------------------------------------------------------------------

struct SeriesTerm {
  double coefficient = 1.0;
  double a = 0.0;
  double b = 0.0;
};

struct SeriesVerdict {
  bool converges = false;
};

inline SeriesVerdict classify_series(const SeriesTerm& term) {
  if (!(term.coefficient > 0.0) || !std::isfinite(term.coefficient) ||
      !std::isfinite(term.a) || !std::isfinite(term.b))
    throw std::invalid_argument("series term needs a positive finite coefficient and exponents");
  SeriesVerdict v;
  if (term.a > 1e-12)
    v.converges = true;
  else if (term.a < -1e-12)
    v.converges = false;
  else
    v.converges = term.b > 1.0;
  return v;
}

// Integral-test tail estimate Sum_{k > K} term(k) for a convergent term.
inline double series_tail_bound(const SeriesTerm& term, double K) {
  if (!classify_series(term).converges)
    throw std::domain_error("tail bound only defined for a convergent series");
  if (term.a > 1e-12)
    return term.coefficient / term.a * std::pow(K + 1.0, -term.a) *
           std::pow(std::log(K + 2.0), -term.b);
  return term.coefficient / (term.b - 1.0) * std::pow(std::log(K + 2.0), 1.0 - term.b);
}

struct ComparisonSides {
  double lhs = 0.0;
  double rhs = 0.0;
};

// Sum_{j=1}^{k} j^{alpha-1} log(j+2)^{-delta}  vs  k^alpha log(k+2)^{-delta}.
inline ComparisonSides rising_sum_comparison(double alpha, double delta, std::size_t k) {
  if (!(alpha > 0.0) || !(delta > 0.0))
    throw std::invalid_argument("comparison needs alpha > 0 and delta > 0");
  ComparisonSides out;
  for (std::size_t j = 1; j <= k; ++j) {
    double jd = static_cast<double>(j);
    out.lhs += std::pow(jd, alpha - 1.0) * std::pow(std::log(jd + 2.0), -delta);
  }
  double kd = static_cast<double>(k);
  out.rhs = std::pow(kd, alpha) * std::pow(std::log(kd + 2.0), -delta);
  return out;
}

// Sum_{j=k}^{k+window} (j+1)^{-beta-1} log(j+2)^{-delta}  vs
// (k+1)^{-beta} log(k+2)^{-delta}; the window truncates the infinite tail.
inline ComparisonSides decaying_tail_comparison(double beta, double delta, std::size_t k,
                                                std::size_t window = 1000000) {
  if (!(beta > 0.0) || !(delta > 0.0))
    throw std::invalid_argument("comparison needs beta > 0 and delta > 0");
  ComparisonSides out;
  for (std::size_t j = k; j <= k + window; ++j) {
    double jd = static_cast<double>(j);
    out.lhs += std::pow(jd + 1.0, -beta - 1.0) * std::pow(std::log(jd + 2.0), -delta);
  }
  double kd = static_cast<double>(k);
  out.rhs = std::pow(kd + 1.0, -beta) * std::pow(std::log(kd + 2.0), -delta);
  return out;
}

// Least-squares slope of log(y) against log(x).
inline double fit_log_slope(const std::vector<double>& xs, const std::vector<double>& ys) {
  if (xs.size() != ys.size() || xs.size() < 2)
    throw std::invalid_argument("slope fit needs at least two matching points");
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (!(xs[i] > 0.0) || !(ys[i] > 0.0))
      throw std::invalid_argument("slope fit needs positive samples");
    double lx = std::log(xs[i]), ly = std::log(ys[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  double n = static_cast<double>(xs.size());
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

// ---------------------------------------------------------------------------
// Decreasing chain (small gamma).
// ---------------------------------------------------------------------------

namespace detail {

struct SmallGammaExponents {
  double alpha = 1.0;
  double beta = 0.0;   // alpha * q
  double delta = 0.0;  // 1 / q
};

inline SmallGammaExponents small_gamma_exponents(double q) {
  SmallGammaExponents e;
  e.beta = e.alpha * q;
  e.delta = 1.0 / q;
  return e;
}

inline void validate_small_gamma(double p, double q, double gamma, std::size_t depth,
                                 double epsilon) {
  if (!(p > 1.0)) throw std::invalid_argument("p must exceed 1");
  if (!(q > 0.0 && q < 1.0)) throw std::invalid_argument("q must lie in (0, 1)");
  if (!(gamma > 0.0 && gamma < q))
    throw std::invalid_argument("gamma must satisfy 0 < gamma < q");
  if (!(epsilon > 0.0 && epsilon < 1.0))
    throw std::invalid_argument("epsilon must satisfy 0 < epsilon < 1");
  if (depth < 4) throw std::invalid_argument("depth must be at least 4");
  SmallGammaExponents e = small_gamma_exponents(q);
  double pp = p / (p - 1.0);
  if (!(e.beta - e.alpha * gamma > 0.0))
    throw std::invalid_argument("beta - alpha*gamma must be positive");
  if (!(e.alpha * pp - e.beta * (pp - 1.0) > 0.0))
    throw std::invalid_argument("alpha*p' - beta*(p'-1) must be positive");
}

inline double small_gamma_lambda(const SmallGammaExponents& e, std::size_t j) {
  double jd = j == 0 ? 1.0 : static_cast<double>(j);  // frozen j = 0 term
  return std::pow(jd, e.alpha - 1.0) * std::pow(std::log(jd + 2.0), -e.delta);
}

inline double small_gamma_omega(const SmallGammaExponents& e, std::size_t j) {
  return std::pow(static_cast<double>(j) + 1.0, -e.beta - 1.0);
}

inline double small_gamma_sigma(double epsilon, std::size_t j) {
  return std::pow(std::log(static_cast<double>(j) + 2.0), -epsilon);
}

}  // namespace detail

struct SmallGammaPartials {
  std::vector<std::size_t> depths;
  std::vector<double> necessary;  // sigma(P_0)^{-q/p} Sum omega(E_k) L_k^q
  std::vector<double> wolff;      // majorant partial sums
};

inline SmallGammaPartials small_gamma_partials(double p, double q, double gamma, double epsilon,
                                               std::vector<std::size_t> depths) {
  if (depths.empty()) throw std::invalid_argument("at least one checkpoint depth required");
  std::sort(depths.begin(), depths.end());
  detail::validate_small_gamma(p, q, gamma, depths.back(), epsilon);
  const auto e = detail::small_gamma_exponents(q);
  const std::size_t n = depths.back();
  const double pp = p / (p - 1.0);
  const double omega_power = (p - 1.0) * q / (p - q);
  const double sigma0_factor = std::pow(detail::small_gamma_sigma(epsilon, 0), -q / p);

  // forward: prefix coefficient sums L_m and the weights omega(E_m) L_m^gamma
  std::vector<double> u(n + 1, 0.0);
  std::vector<double> lam(n + 1, 0.0);
  double prefix = 0.0;
  for (std::size_t m = 0; m <= n; ++m) {
    lam[m] = detail::small_gamma_lambda(e, m);
    prefix += lam[m];
    u[m] = detail::small_gamma_omega(e, m) * std::pow(prefix, gamma);
  }

  // backward: truncated suffix masses and the per-level summands t_l
  std::vector<double> t(n + 1, 0.0);
  double suffix_mass = 0.0, suffix_u = 0.0;
  for (std::size_t l = n + 1; l-- > 0;) {
    suffix_mass += detail::small_gamma_omega(e, l);
    suffix_u += u[l];
    double lam_maj = std::pow(suffix_u / suffix_mass, 1.0 / gamma);
    t[l] = lam[l] * std::pow(suffix_mass / detail::small_gamma_sigma(epsilon, l), pp - 1.0) *
           std::pow(lam_maj, pp - 1.0);
  }

  SmallGammaPartials out;
  out.depths = depths;
  out.necessary.reserve(depths.size());
  out.wolff.reserve(depths.size());
  double necessary = 0.0, wolff = 0.0, lam_prefix = 0.0, t_prefix = 0.0;
  std::size_t next = 0;
  for (std::size_t k = 0; k <= n; ++k) {
    lam_prefix += lam[k];
    t_prefix += t[k];
    double mass = detail::small_gamma_omega(e, k);
    necessary += mass * std::pow(lam_prefix, q);
    wolff += mass * std::pow(t_prefix, omega_power);
    while (next < depths.size() && depths[next] == k) {
      out.necessary.push_back(sigma0_factor * necessary);
      out.wolff.push_back(wolff);
      ++next;
    }
  }
  return out;
}

struct SmallGammaSeries {
  SeriesTerm necessary;
  SeriesTerm wolff;
};

inline SmallGammaSeries small_gamma_series_terms(double p, double q, double epsilon) {
  const auto e = detail::small_gamma_exponents(q);
  SmallGammaSeries out;
  out.necessary.a = e.beta - e.alpha * q;
  out.necessary.b = q * e.delta;
  out.wolff.a = (e.beta * p - e.alpha * p * q) / (p - q);
  out.wolff.b = (e.delta * p * q - epsilon * q) / (p - q);
  return out;
}

struct SmallGammaChain {
  Instance instance;
  double alpha = 0.0;
  double beta = 0.0;
  double delta = 0.0;
  double epsilon = 0.0;
  double necessary_quantity = 0.0;
  double wolff_quantity = 0.0;
};

inline SmallGammaChain build_counterexample_small_gamma(double p, double q, double gamma,
                                                        std::size_t depth, double epsilon) {
  detail::validate_small_gamma(p, q, gamma, depth, epsilon);
  const auto e = detail::small_gamma_exponents(q);
  Tree t = make_tree(2, static_cast<int>(depth) + 1);

  std::vector<double> lambda(t.node_count, 0.0);
  std::vector<double> sigma_leaves(t.leaf_count, 0.0);
  std::vector<double> omega_leaves(t.leaf_count, 0.0);
  for (std::size_t j = 0; j <= depth; ++j) {
    std::size_t pj = t.level_offset[j];  // leftmost node at level j
    lambda[pj] = detail::small_gamma_lambda(e, j);
    std::size_t rep = t.leaf_span(t.child(pj, 1)).first;
    omega_leaves[rep] = detail::small_gamma_omega(e, j);
    double annulus = j < depth
                         ? detail::small_gamma_sigma(epsilon, j) -
                               detail::small_gamma_sigma(epsilon, j + 1)
                         : detail::small_gamma_sigma(epsilon, j);
    sigma_leaves[rep] = annulus;
  }

  SmallGammaChain out;
  out.instance = make_instance(t, lambda, sigma_leaves, omega_leaves, Exponents{p, q, gamma});
  out.alpha = e.alpha;
  out.beta = e.beta;
  out.delta = e.delta;
  out.epsilon = epsilon;
  SmallGammaPartials parts = small_gamma_partials(p, q, gamma, epsilon, {depth});
  out.necessary_quantity = parts.necessary.back();
  out.wolff_quantity = parts.wolff.back();
  return out;
}

// ---------------------------------------------------------------------------
// Increasing chain (large gamma).
// ---------------------------------------------------------------------------

namespace detail {

inline void validate_large_gamma(double p, double q, std::size_t depth, double beta) {
  if (!(p > 1.0)) throw std::invalid_argument("p must exceed 1");
  if (!(q > 0.0 && q < 1.0)) throw std::invalid_argument("q must lie in (0, 1)");
  if (!(beta > 1.0)) throw std::invalid_argument("beta must exceed 1");
  double alpha = (p - 1.0) / (p - q);
  if (!(alpha * beta < 1.0)) throw std::invalid_argument("alpha*beta must stay below 1");
  if (depth < 4) throw std::invalid_argument("depth must be at least 4");
}

// omega(E_j)/omega(P_j) = 2^{j+1}/(2^{j+2}-2) in overflow-safe form
inline double large_gamma_mass_ratio(std::size_t j) {
  return 1.0 / (2.0 - std::pow(2.0, -static_cast<double>(j)));
}

inline double large_gamma_b(double beta, std::size_t j) {
  return std::pow(static_cast<double>(j) + 1.0, -beta);  // lambda^q omega(P_j)
}

}  // namespace detail

struct LargeGammaPartials {
  std::vector<std::size_t> depths;
  std::vector<double> sufficient;  // Sum (j+1)^{-beta}
  std::vector<double> divergent;   // Sum (omega(E_j)/omega(P_j)) (j+1)^{-alpha beta}
};

inline LargeGammaPartials large_gamma_partials(double p, double q, double beta,
                                               std::vector<std::size_t> depths) {
  if (depths.empty()) throw std::invalid_argument("at least one checkpoint depth required");
  std::sort(depths.begin(), depths.end());
  detail::validate_large_gamma(p, q, depths.back(), beta);
  const double alpha = (p - 1.0) / (p - q);

  LargeGammaPartials out;
  out.depths = depths;
  double sufficient = 0.0, divergent = 0.0;
  std::size_t next = 0;
  for (std::size_t j = 0; j <= depths.back(); ++j) {
    double b = detail::large_gamma_b(beta, j);
    sufficient += b;
    divergent += detail::large_gamma_mass_ratio(j) * std::pow(b, alpha);
    while (next < depths.size() && depths[next] == j) {
      out.sufficient.push_back(sufficient);
      out.divergent.push_back(divergent);
      ++next;
    }
  }
  return out;
}

struct LowerEstimate {
  double lhs = 0.0;
  double rhs = 0.0;
};

// Telescoping display: Sum_{j<=N} (omega(E_{j+1})/omega(P_j)) b_j^alpha
//   >= log(omega(P_N)) b_N^alpha - log(omega(E_0)) b_0.
inline LowerEstimate large_gamma_lower_estimate(double p, double q, double beta, std::size_t n) {
  detail::validate_large_gamma(p, q, n, beta);
  const double alpha = (p - 1.0) / (p - q);
  LowerEstimate out;
  for (std::size_t j = 0; j <= n; ++j) {
    // omega(E_{j+1})/omega(P_j) = 2^{j+2}/(2^{j+2}-2)
    double ratio = 1.0 / (1.0 - std::pow(2.0, -static_cast<double>(j) - 1.0));
    out.lhs += ratio * std::pow(detail::large_gamma_b(beta, j), alpha);
  }
  double log_total = (static_cast<double>(n) + 2.0) * std::log(2.0) +
                     std::log1p(-std::pow(2.0, -static_cast<double>(n) - 1.0));
  out.rhs = log_total * std::pow(detail::large_gamma_b(beta, n), alpha) -
            std::log(2.0) * detail::large_gamma_b(beta, 0);
  return out;
}

struct LargeGammaChain {
  Instance instance;
  double alpha = 0.0;
  double beta = 0.0;
  double sufficient_quantity = 0.0;
  double divergent_quantity = 0.0;
};

inline LargeGammaChain build_counterexample_large_gamma(double p, double q, std::size_t depth,
                                                        double beta) {
  detail::validate_large_gamma(p, q, depth, beta);
  Tree t = make_tree(2, static_cast<int>(depth));

  std::vector<double> lambda(t.node_count, 0.0);
  std::vector<double> sigma_leaves(t.leaf_count, 0.0);
  std::vector<double> omega_leaves(t.leaf_count, 0.0);
  sigma_leaves[0] = 1.0;
  omega_leaves[0] = 2.0;  // E_0 = P_0
  for (std::size_t j = 0; j <= depth; ++j) {
    std::size_t pj = t.level_offset[depth - j];  // leftmost node at level depth - j
    double mass = std::pow(2.0, static_cast<double>(j) + 2.0) - 2.0;  // omega(P_j)
    lambda[pj] = std::pow(detail::large_gamma_b(beta, j) / mass, 1.0 / q);
    if (j >= 1) {
      std::size_t rep = t.leaf_span(t.child(pj, 1)).first;
      omega_leaves[rep] = std::pow(2.0, static_cast<double>(j) + 1.0);
    }
  }

  LargeGammaChain out;
  out.instance = make_instance(t, lambda, sigma_leaves, omega_leaves, Exponents{p, q, q});
  out.alpha = (p - 1.0) / (p - q);
  out.beta = beta;
  LargeGammaPartials parts = large_gamma_partials(p, q, beta, {depth});
  out.sufficient_quantity = parts.sufficient.back();
  out.divergent_quantity = parts.divergent.back();
  return out;
}

// ---------------------------------------------------------------------------
// Riesz model coefficients.
// ---------------------------------------------------------------------------

// lambda_Q = sigma(Q) |Q|^{alpha_r/d - 1} with |Q| = 2^{-kd} for a depth-k cube
// on a tree of branching 2^d.
inline std::vector<double> riesz_model_coefficients(const Tree& t, const Measure& sigma,
                                                    double alpha_r) {
  int d = 0;
  int b = t.branching;
  while (b > 1 && b % 2 == 0) {
    b /= 2;
    ++d;
  }
  if (b != 1 || d == 0)
    throw std::invalid_argument("branching must be a power of two for the Riesz model");
  if (!(alpha_r > 0.0 && alpha_r < static_cast<double>(d)))
    throw std::invalid_argument("alpha_r must lie in (0, d)");
  std::vector<double> lambda(t.node_count, 0.0);
  for (std::size_t node = 0; node < t.node_count; ++node) {
    double k = static_cast<double>(t.level_of(node));
    lambda[node] = sigma.node[node] * std::pow(2.0, k * (static_cast<double>(d) - alpha_r));
  }
  return lambda;
}

}  // namespace dyadic
