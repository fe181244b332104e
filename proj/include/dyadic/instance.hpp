#pragma once

// A problem instance: tree geometry, the two measures, the operator's
// coefficient family, and the integrability parameters.  The active mask and
// the masked coefficient vector are precomputed once; every norm, potential,
// and condition quantity downstream indexes only the active cubes (coefficient
// positive, both cube masses positive), which removes all 0/0 cases at the
// source.

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "dyadic/exponents.hpp"
#include "dyadic/tree.hpp"

namespace dyadic {

struct Instance {
  Tree tree;
  Measure sigma;
  Measure omega;
  std::vector<double> lambda;         // per node, >= 0
  Exponents exps;
  std::vector<std::uint8_t> active;   // lambda>0 && sigma(Q)>0 && omega(Q)>0
  std::vector<double> lambda_active;  // lambda zeroed outside the active set
};

inline Instance make_instance(Tree tree, std::vector<double> lambda,
                              std::vector<double> sigma_leaves, std::vector<double> omega_leaves,
                              Exponents exps) {
  validate_exponents(exps);
  if (lambda.size() != tree.node_count)
    throw std::invalid_argument("lambda has " + std::to_string(lambda.size()) +
                                " entries, tree has " + std::to_string(tree.node_count) + " nodes");
  for (std::size_t n = 0; n < lambda.size(); ++n)
    if (!(lambda[n] >= 0.0) || !std::isfinite(lambda[n]))
      throw std::invalid_argument("lambda at node " + std::to_string(n) +
                                  " must be finite and nonnegative");
  Instance inst;
  inst.tree = std::move(tree);
  inst.sigma = make_measure(inst.tree, std::move(sigma_leaves));
  inst.omega = make_measure(inst.tree, std::move(omega_leaves));
  inst.lambda = std::move(lambda);
  inst.exps = exps;
  inst.active = active_mask(inst.tree, inst.lambda, inst.sigma, inst.omega);
  inst.lambda_active = masked(inst.lambda, inst.active);
  return inst;
}

}  // namespace dyadic
