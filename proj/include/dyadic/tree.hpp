#pragma once

// ============================================================================
// Complete b-ary tree of nested "cubes" in level order, plus measures given by
// leaf masses with cached per-node totals.
//
// Every quantity downstream is a sum, average, or supremum of node data over
// ancestor chains or descendant ranges, so the primitives here are:
//   * level-order index arithmetic (parent / child / level / leaf span),
//   * top-down sweeps accumulating over ancestors (sum, max),
//   * bottom-up sweeps aggregating over descendants (sum),
//   * leaf integration against a measure.
// Summation order is fixed everywhere (children in index order, leaves left to
// right), so repeated runs produce bit-identical results.
// ============================================================================

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace dyadic {

// Hard cap on materialized tree size.
inline constexpr std::size_t kNodeCap = std::size_t{1} << 26;

// One character per level keeps lexicographic path order equal to index order.
inline constexpr const char kPathDigits[] = "0123456789abcdefghijklmnopqrstuvwxyz";
inline constexpr int kMaxBranching = 36;

struct Tree {
  int branching = 2;
  int depth = 0;
  std::size_t node_count = 0;
  std::size_t leaf_count = 0;
  std::vector<std::size_t> level_offset;  // size depth+2; level_offset[depth+1] == node_count
  std::vector<std::size_t> level_size;    // size depth+1; level_size[k] == branching^k

  std::size_t root() const { return 0; }
  std::size_t first_leaf() const { return level_offset[depth]; }
  bool is_leaf(std::size_t node) const { return node >= first_leaf(); }
  std::size_t leaf_node(std::size_t leaf_index) const { return first_leaf() + leaf_index; }

  int level_of(std::size_t node) const {
    auto it = std::upper_bound(level_offset.begin(), level_offset.end(), node);
    return static_cast<int>(it - level_offset.begin()) - 1;
  }

  std::size_t parent(std::size_t node) const {
    int k = level_of(node);
    std::size_t i = node - level_offset[k];
    return level_offset[k - 1] + i / static_cast<std::size_t>(branching);
  }

  std::size_t child(std::size_t node, int j) const {
    int k = level_of(node);
    std::size_t i = node - level_offset[k];
    return level_offset[k + 1] + i * static_cast<std::size_t>(branching) + static_cast<std::size_t>(j);
  }

  // Leaves covered by a node, as a half-open range of leaf indices.
  std::pair<std::size_t, std::size_t> leaf_span(std::size_t node) const {
    int k = level_of(node);
    std::size_t i = node - level_offset[k];
    std::size_t width = level_size[depth - k];
    return {i * width, (i + 1) * width};
  }
};

inline Tree make_tree(int branching, int depth, std::size_t node_cap = kNodeCap) {
  if (branching < 2 || branching > kMaxBranching)
    throw std::invalid_argument("branching must lie in [2, " + std::to_string(kMaxBranching) +
                                "], got " + std::to_string(branching));
  if (depth < 0)
    throw std::invalid_argument("depth must be nonnegative, got " + std::to_string(depth));

  Tree t;
  t.branching = branching;
  t.depth = depth;
  t.level_offset.resize(static_cast<std::size_t>(depth) + 2);
  t.level_size.resize(static_cast<std::size_t>(depth) + 1);

  std::size_t size = 1;
  std::size_t count = 0;
  for (int k = 0; k <= depth; ++k) {
    t.level_offset[k] = count;
    t.level_size[k] = size;
    if (size > node_cap || count > node_cap - size)
      throw std::length_error("tree with branching " + std::to_string(branching) + " and depth " +
                              std::to_string(depth) + " exceeds the node cap 2^26 (" +
                              std::to_string(node_cap) + " nodes)");
    count += size;
    if (k < depth) {
      if (size > node_cap / static_cast<std::size_t>(branching))
        throw std::length_error("tree with branching " + std::to_string(branching) + " and depth " +
                                std::to_string(depth) + " exceeds the node cap 2^26 (" +
                                std::to_string(node_cap) + " nodes)");
      size *= static_cast<std::size_t>(branching);
    }
  }
  t.level_offset[depth + 1] = count;
  t.node_count = count;
  t.leaf_count = t.level_size[depth];
  return t;
}

// ---------------------------------------------------------------------------
// Paths: "" is the root, each character is a child index digit.
// ---------------------------------------------------------------------------

inline std::string node_path(const Tree& t, std::size_t node) {
  int k = t.level_of(node);
  std::size_t i = node - t.level_offset[k];
  std::string path(static_cast<std::size_t>(k), '0');
  for (int j = k - 1; j >= 0; --j) {
    path[j] = kPathDigits[i % static_cast<std::size_t>(t.branching)];
    i /= static_cast<std::size_t>(t.branching);
  }
  return path;
}

inline std::size_t node_at_path(const Tree& t, const std::string& path) {
  if (path.size() > static_cast<std::size_t>(t.depth))
    throw std::invalid_argument("path \"" + path + "\" is deeper than the tree (depth " +
                                std::to_string(t.depth) + ")");
  std::size_t i = 0;
  for (char c : path) {
    const char* pos = std::char_traits<char>::find(kPathDigits, kMaxBranching, c);
    std::size_t digit = pos ? static_cast<std::size_t>(pos - kPathDigits) : kMaxBranching;
    if (digit >= static_cast<std::size_t>(t.branching))
      throw std::invalid_argument("path \"" + path + "\" contains digit '" + std::string(1, c) +
                                  "' outside branching " + std::to_string(t.branching));
    i = i * static_cast<std::size_t>(t.branching) + digit;
  }
  return t.level_offset[path.size()] + i;
}

// ---------------------------------------------------------------------------
// Measures: nonnegative leaf masses plus per-node subtree totals.
// ---------------------------------------------------------------------------

struct Measure {
  std::vector<double> leaf;  // one mass per leaf
  std::vector<double> node;  // node[n] = total mass of the leaves under n
  double total() const { return node.empty() ? 0.0 : node[0]; }
};

inline Measure make_measure(const Tree& t, std::vector<double> leaf_masses) {
  if (leaf_masses.size() != t.leaf_count)
    throw std::invalid_argument("leaf mass vector has " + std::to_string(leaf_masses.size()) +
                                " entries, tree has " + std::to_string(t.leaf_count) + " leaves");
  for (std::size_t i = 0; i < leaf_masses.size(); ++i)
    if (!(leaf_masses[i] >= 0.0) || !std::isfinite(leaf_masses[i]))
      throw std::invalid_argument("leaf mass at index " + std::to_string(i) +
                                  " must be finite and nonnegative");
  Measure m;
  m.leaf = std::move(leaf_masses);
  m.node.assign(t.node_count, 0.0);
  std::size_t fl = t.first_leaf();
  for (std::size_t i = 0; i < t.leaf_count; ++i) m.node[fl + i] = m.leaf[i];
  for (int k = t.depth - 1; k >= 0; --k) {
    std::size_t begin = t.level_offset[k], end = t.level_offset[k + 1];
    for (std::size_t n = begin; n < end; ++n) {
      std::size_t c0 = t.level_offset[k + 1] + (n - begin) * static_cast<std::size_t>(t.branching);
      double s = 0.0;
      for (int j = 0; j < t.branching; ++j) s += m.node[c0 + static_cast<std::size_t>(j)];
      m.node[n] = s;
    }
  }
  return m;
}

// ---------------------------------------------------------------------------
// Sweeps over node-indexed vectors.
// ---------------------------------------------------------------------------

// out[n] = sum of x over the ancestors of n, inclusive of n itself.
inline std::vector<double> ancestor_sum(const Tree& t, const std::vector<double>& x) {
  std::vector<double> out = x;
  for (int k = 1; k <= t.depth; ++k) {
    std::size_t begin = t.level_offset[k], end = t.level_offset[k + 1];
    std::size_t pbegin = t.level_offset[k - 1];
    for (std::size_t n = begin; n < end; ++n)
      out[n] += out[pbegin + (n - begin) / static_cast<std::size_t>(t.branching)];
  }
  return out;
}

// out[n] = max of x over the ancestors of n, inclusive.
inline std::vector<double> ancestor_max(const Tree& t, const std::vector<double>& x) {
  std::vector<double> out = x;
  for (int k = 1; k <= t.depth; ++k) {
    std::size_t begin = t.level_offset[k], end = t.level_offset[k + 1];
    std::size_t pbegin = t.level_offset[k - 1];
    for (std::size_t n = begin; n < end; ++n) {
      double pv = out[pbegin + (n - begin) / static_cast<std::size_t>(t.branching)];
      if (pv > out[n]) out[n] = pv;
    }
  }
  return out;
}

// out[n] = sum of x over the descendants of n, inclusive.
inline std::vector<double> subtree_sum(const Tree& t, const std::vector<double>& x) {
  std::vector<double> out = x;
  for (int k = t.depth - 1; k >= 0; --k) {
    std::size_t begin = t.level_offset[k], end = t.level_offset[k + 1];
    for (std::size_t n = begin; n < end; ++n) {
      std::size_t c0 = t.level_offset[k + 1] + (n - begin) * static_cast<std::size_t>(t.branching);
      double s = out[n];
      for (int j = 0; j < t.branching; ++j) s += out[c0 + static_cast<std::size_t>(j)];
      out[n] = s;
    }
  }
  return out;
}

// Copy of the leaf-level slice of a node-indexed vector.
inline std::vector<double> leaf_slice(const Tree& t, const std::vector<double>& node_values) {
  std::size_t fl = t.first_leaf();
  return std::vector<double>(node_values.begin() + static_cast<std::ptrdiff_t>(fl), node_values.end());
}

// Node-indexed vector whose leaf entries are given and whose internal entries are zero.
inline std::vector<double> from_leaves(const Tree& t, const std::vector<double>& leaf_values) {
  std::vector<double> out(t.node_count, 0.0);
  std::size_t fl = t.first_leaf();
  for (std::size_t i = 0; i < t.leaf_count; ++i) out[fl + i] = leaf_values[i];
  return out;
}

inline double integrate_leaves(const Tree& t, const Measure& m, const std::vector<double>& leaf_values) {
  double s = 0.0;
  for (std::size_t i = 0; i < t.leaf_count; ++i)
    if (m.leaf[i] > 0.0) s += m.leaf[i] * leaf_values[i];
  return s;
}

// Mean of a leaf function over the leaves under a node; 0/0 := 0.
inline double subtree_average(const Tree& t, const Measure& m, std::size_t node,
                              const std::vector<double>& leaf_values) {
  if (!(m.node[node] > 0.0)) return 0.0;
  auto [lo, hi] = t.leaf_span(node);
  double s = 0.0;
  for (std::size_t i = lo; i < hi; ++i)
    if (m.leaf[i] > 0.0) s += m.leaf[i] * leaf_values[i];
  return s / m.node[node];
}

// ---------------------------------------------------------------------------
// Localized coefficient sums.
// ---------------------------------------------------------------------------

struct LeafSlice {
  std::size_t begin = 0;               // first leaf index covered
  std::vector<double> values;          // one entry per covered leaf
};

// rho_Q restricted to the leaves of Q: values[i] = sum of lambda over the
// nodes on the path from Q down to leaf (begin + i).
inline LeafSlice localized_sum(const Tree& t, const std::vector<double>& lambda, std::size_t node) {
  auto [lo, hi] = t.leaf_span(node);
  LeafSlice slice;
  slice.begin = lo;
  slice.values.assign(hi - lo, 0.0);
  for (std::size_t i = lo; i < hi; ++i) {
    double s = 0.0;
    std::size_t n = t.leaf_node(i);
    while (true) {
      s += lambda[n];
      if (n == node) break;
      n = t.parent(n);
    }
    slice.values[i - lo] = s;
  }
  return slice;
}

// ---------------------------------------------------------------------------
// Active cube collection: lambda_Q > 0, sigma(Q) > 0, omega(Q) > 0.
// ---------------------------------------------------------------------------

inline std::vector<std::uint8_t> active_mask(const Tree& t, const std::vector<double>& lambda,
                                             const Measure& sigma, const Measure& omega) {
  std::vector<std::uint8_t> mask(t.node_count, 0);
  for (std::size_t n = 0; n < t.node_count; ++n)
    mask[n] = (lambda[n] > 0.0 && sigma.node[n] > 0.0 && omega.node[n] > 0.0) ? 1 : 0;
  return mask;
}

inline std::vector<double> masked(const std::vector<double>& v, const std::vector<std::uint8_t>& mask) {
  std::vector<double> out(v.size(), 0.0);
  for (std::size_t n = 0; n < v.size(); ++n)
    if (mask[n]) out[n] = v[n];
  return out;
}

}  // namespace dyadic
