#pragma once

// Instance and report serialization.
//
// Instances are versioned JSON documents:
//   {"format": 1, "branching": b, "depth": d,
//    "lambda": {"<path>": value, ...},            // omitted entries are 0
//    "sigma_leaves": [...], "omega_leaves": [...], // lexicographic path order
//    "exponents": {"p": .., "q": .., "gamma": ..}}
//
// Serialization is canonical: fixed key order, lambda keys sorted, numbers
// printed with 17 significant digits.  Content digests (FNV-1a 64) are taken
// over the canonical byte stream, so identical instances hash identically
// across runs and platforms with IEEE doubles.

#include <cinttypes>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "dyadic/instance.hpp"

namespace dyadic {

using ordered_json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Canonical dumping and hashing.
// ---------------------------------------------------------------------------

// JSON value for a double that may be non-finite (reports only; instance
// fields are validated finite).  Non-finite values become strings.
inline ordered_json json_number(double v) {
  if (std::isfinite(v)) return ordered_json(v);
  if (std::isnan(v)) return ordered_json("nan");
  return ordered_json(v > 0 ? "inf" : "-inf");
}

namespace detail {

inline void dump_canonical(const ordered_json& j, std::string& out) {
  switch (j.type()) {
    case ordered_json::value_t::object: {
      out += '{';
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) out += ',';
        first = false;
        out += ordered_json(it.key()).dump();
        out += ':';
        dump_canonical(it.value(), out);
      }
      out += '}';
      break;
    }
    case ordered_json::value_t::array: {
      out += '[';
      bool first = true;
      for (const auto& v : j) {
        if (!first) out += ',';
        first = false;
        dump_canonical(v, out);
      }
      out += ']';
      break;
    }
    case ordered_json::value_t::number_float: {
      char buf[40];
      std::snprintf(buf, sizeof(buf), "%.17g", j.get<double>());
      out += buf;
      break;
    }
    default:
      out += j.dump();
      break;
  }
}

}  // namespace detail

inline std::string canonical_dump(const ordered_json& j) {
  std::string out;
  detail::dump_canonical(j, out);
  return out;
}

inline std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016" PRIx64, v);
  return buf;
}

// ---------------------------------------------------------------------------
// Instance <-> JSON.
// ---------------------------------------------------------------------------

inline ordered_json instance_to_json(const Instance& inst) {
  ordered_json j;
  j["format"] = 1;
  j["branching"] = inst.tree.branching;
  j["depth"] = inst.tree.depth;
  std::map<std::string, double> coeffs;
  for (std::size_t n = 0; n < inst.tree.node_count; ++n)
    if (inst.lambda[n] != 0.0) coeffs[node_path(inst.tree, n)] = inst.lambda[n];
  ordered_json lam = ordered_json::object();
  for (const auto& [path, value] : coeffs) lam[path] = value;
  j["lambda"] = lam;
  j["sigma_leaves"] = inst.sigma.leaf;
  j["omega_leaves"] = inst.omega.leaf;
  ordered_json exps;
  exps["p"] = inst.exps.p;
  exps["q"] = inst.exps.q;
  if (std::isfinite(inst.exps.gamma))
    exps["gamma"] = inst.exps.gamma;
  else
    exps["gamma"] = inst.exps.gamma > 0 ? "inf" : "-inf";
  j["exponents"] = exps;
  return j;
}

namespace detail {

inline double require_number(const nlohmann::json& j, const std::string& where) {
  if (!j.is_number())
    throw std::invalid_argument("at " + where + ": expected a number");
  return j.get<double>();
}

inline double read_gamma(const nlohmann::json& j, const std::string& where) {
  if (j.is_string()) {
    std::string s = j.get<std::string>();
    if (s == "inf" || s == "+inf") return kInf;
    if (s == "-inf") return -kInf;
    throw std::invalid_argument("at " + where + ": expected a number or \"inf\"/\"-inf\"");
  }
  return require_number(j, where);
}

inline std::vector<double> read_mass_array(const nlohmann::json& j, const std::string& where,
                                           std::size_t expected) {
  if (!j.is_array())
    throw std::invalid_argument("at " + where + ": expected an array");
  if (j.size() != expected)
    throw std::invalid_argument("at " + where + ": expected " + std::to_string(expected) +
                                " entries (one per leaf), got " + std::to_string(j.size()));
  std::vector<double> out(expected);
  for (std::size_t i = 0; i < expected; ++i) {
    double v = require_number(j[i], where + "/" + std::to_string(i));
    if (!(v >= 0.0) || !std::isfinite(v))
      throw std::invalid_argument("at " + where + "/" + std::to_string(i) +
                                  ": mass must be finite and nonnegative");
    out[i] = v;
  }
  return out;
}

}  // namespace detail

inline Instance instance_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw std::invalid_argument("at /: expected an object");
  if (!j.contains("format") || !j["format"].is_number_integer() || j["format"].get<int>() != 1)
    throw std::invalid_argument("at /format: expected the integer 1");
  if (!j.contains("branching")) throw std::invalid_argument("at /branching: missing");
  if (!j.contains("depth")) throw std::invalid_argument("at /depth: missing");
  int branching = static_cast<int>(detail::require_number(j["branching"], "/branching"));
  int depth = static_cast<int>(detail::require_number(j["depth"], "/depth"));
  Tree tree = make_tree(branching, depth);

  std::vector<double> lambda(tree.node_count, 0.0);
  if (j.contains("lambda")) {
    if (!j["lambda"].is_object())
      throw std::invalid_argument("at /lambda: expected an object mapping paths to values");
    for (auto it = j["lambda"].begin(); it != j["lambda"].end(); ++it) {
      std::size_t n;
      try {
        n = node_at_path(tree, it.key());
      } catch (const std::invalid_argument& e) {
        throw std::invalid_argument("at /lambda/" + it.key() + ": " + e.what());
      }
      double v = detail::require_number(it.value(), "/lambda/" + it.key());
      if (!(v >= 0.0) || !std::isfinite(v))
        throw std::invalid_argument("at /lambda/" + it.key() +
                                    ": coefficient must be finite and nonnegative");
      lambda[n] = v;
    }
  }

  if (!j.contains("sigma_leaves")) throw std::invalid_argument("at /sigma_leaves: missing");
  if (!j.contains("omega_leaves")) throw std::invalid_argument("at /omega_leaves: missing");
  std::vector<double> sigma = detail::read_mass_array(j["sigma_leaves"], "/sigma_leaves", tree.leaf_count);
  std::vector<double> omega = detail::read_mass_array(j["omega_leaves"], "/omega_leaves", tree.leaf_count);

  if (!j.contains("exponents") || !j["exponents"].is_object())
    throw std::invalid_argument("at /exponents: expected an object with p, q, gamma");
  const auto& ex = j["exponents"];
  if (!ex.contains("p") || !ex.contains("q") || !ex.contains("gamma"))
    throw std::invalid_argument("at /exponents: p, q and gamma are all required");
  Exponents exps;
  exps.p = detail::require_number(ex["p"], "/exponents/p");
  exps.q = detail::require_number(ex["q"], "/exponents/q");
  exps.gamma = detail::read_gamma(ex["gamma"], "/exponents/gamma");

  return make_instance(std::move(tree), std::move(lambda), std::move(sigma), std::move(omega), exps);
}

inline std::string instance_digest(const Instance& inst) {
  return hex64(fnv1a64(canonical_dump(instance_to_json(inst))));
}

inline Instance load_instance(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open instance file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument(std::string("parse error in ") + path + ": " + e.what());
  }
  return instance_from_json(j);
}

inline void save_instance(const Instance& inst, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open file for writing: " + path);
  out << canonical_dump(instance_to_json(inst)) << "\n";
}

// ---------------------------------------------------------------------------
// Run reports.
// ---------------------------------------------------------------------------

struct RunReport {
  std::string command;                       // argv echo
  std::string instance_digest;
  ordered_json results = ordered_json::object();
  ordered_json constants = ordered_json::object();  // keyed "p=..,q=..:<name>"
  double wall_seconds = 0.0;

  ordered_json to_json(bool include_wall = true) const {
    ordered_json j;
    j["command"] = command;
    j["instance_digest"] = instance_digest;
    j["results"] = results;
    j["constants"] = constants;
    if (include_wall) j["wall_seconds"] = wall_seconds;
    return j;
  }

  // Wall time excluded: the hash covers only reproducible content.
  std::string content_hash() const { return hex64(fnv1a64(canonical_dump(to_json(false)))); }
};

}  // namespace dyadic
