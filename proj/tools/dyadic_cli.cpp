// Command-line front door for the dyadic two-weight toolkit.
//
//   norm            operator norm estimate via annealed projected ascent
//   lp-norm         discrete Littlewood-Paley norm of a coefficient family
//   wolff           potential, condition integral, localized ratio report
//   characterize    two-sided bounds with minimized auxiliary families
//   counterexample  chain constructions with convergence verdicts
//   verify          seeded property suites (DYADIC_WORKERS sets the fan-out)
//
// Each subcommand prints a one-line summary followed by a JSON report whose
// content hash covers everything except wall time, so identical inputs give
// identical hashes.  --out additionally writes the report to a file and
// --explain prints the definitions of the computed quantities.
// Exit codes: 0 ok, 1 computation or suite failure, 2 usage error.

#include <chrono>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dyadic/chains.hpp"
#include "dyadic/characterize.hpp"
#include "dyadic/instance.hpp"
#include "dyadic/io.hpp"
#include "dyadic/mixed_norm.hpp"
#include "dyadic/op.hpp"
#include "dyadic/verify.hpp"
#include "dyadic/wolff.hpp"

namespace {

using dyadic::ordered_json;

struct Timer {
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }
};

double parse_exponent(const std::string& text, const std::string& name) {
  if (text == "inf" || text == "+inf") return dyadic::kInf;
  if (text == "-inf") return -dyadic::kInf;
  try {
    std::size_t used = 0;
    double v = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw std::invalid_argument(name + " must be a number or 'inf', got '" + text + "'");
  }
}

std::string join_args(int argc, char** argv) {
  std::string cmd;
  for (int i = 0; i < argc; ++i) {
    if (i > 0) cmd += ' ';
    cmd += argv[i];
  }
  return cmd;
}

void emit_report(dyadic::RunReport& rep, double wall, const std::string& out_path) {
  rep.wall_seconds = wall;
  ordered_json j = rep.to_json(true);
  j["content_hash"] = rep.content_hash();
  std::string text = dyadic::canonical_dump(j);
  std::printf("%s\n", text.c_str());
  if (!out_path.empty()) {
    std::ofstream out(out_path);
    if (!out) throw std::runtime_error("cannot open report file: " + out_path);
    out << text << "\n";
  }
}

ordered_json number_array(const std::vector<double>& values) {
  ordered_json arr = ordered_json::array();
  for (double v : values) arr.push_back(dyadic::json_number(v));
  return arr;
}

// family files reuse the lambda encoding: an object of path -> value entries
std::vector<double> load_family(const dyadic::Tree& t, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open family file: " + path);
  nlohmann::json j = nlohmann::json::parse(in);
  if (!j.is_object()) throw std::runtime_error("family file must hold a JSON object");
  std::vector<double> fam(t.node_count, 0.0);
  for (const auto& [key, value] : j.items()) {
    if (!value.is_number())
      throw std::runtime_error("family entry \"" + key + "\" is not a number");
    fam[dyadic::node_at_path(t, key)] = value.get<double>();
  }
  return fam;
}

const char* kExplainNorm =
    "T(f sigma)(x) = Sum_{Q in calQ} lambda_Q <f>^sigma_Q 1_Q(x),\n"
    "with calQ the cubes where lambda_Q, sigma(Q), omega(Q) are all positive.\n"
    "Reported value approximates\n"
    "    sup { ||T(f sigma)||_{L^q(omega)} : f >= 0, ||f||_{L^p(sigma)} <= 1 }\n"
    "by multi-start projected gradient ascent on the L^p(sigma) sphere with an\n"
    "annealed smoothing parameter.  --multiplier instead ascends the tower\n"
    "operator f -> (Sum_Q b_Q 1_Q) f over unit towers b.\n";

const char* kExplainLpNorm =
    "Mixed norm of a nonnegative family a = {a_Q} over the tree:\n"
    "    finite r, finite s : ( Int ( Sum_Q a_Q^s 1_Q )^{r/s} dmu )^{1/r}\n"
    "    finite r, s = inf  : ( Int ( sup_Q a_Q 1_Q )^r dmu )^{1/r}\n"
    "    r = inf, finite s  : sup_Q ( (1/mu(Q)) Sum_{R subset Q} a_R^s mu(R) )^{1/s}\n"
    "    r = inf, s = inf   : sup_Q a_Q\n"
    "Negative s is taken literally; 0^{s<0} against positive mass flags an\n"
    "infinite value.  The family defaults to the instance coefficients.\n";

const char* kExplainWolff =
    "rho_Q(x) = Sum_{x in R subset Q} lambda_R on the active cubes, and\n"
    "Lambda_{gamma,Q} = ( (1/omega(Q)) Int_Q rho_Q^gamma domega )^{1/gamma}\n"
    "(geometric mean at gamma = 0, endpoint sup/inf at gamma = +-inf).\n"
    "Potential:  W(x) = Sum_{Q ni x} lambda_Q (omega(Q)/sigma(Q))^{p'-1}\n"
    "                   Lambda_{gamma,Q}^{p'-1}\n"
    "Condition:  Int W^{(p-1)q/(p-q)} domega\n"
    "dlbo:       worst ratio of max/min of rho_Q over omega-charged leaves,\n"
    "            taken over active cubes.\n";

const char* kExplainCharacterize =
    "For an auxiliary family a > 0 and the derived d > 0 on active cubes:\n"
    "  A1 = ( Int ( Sum_Q lambda_Q (omega(Q)/sigma(Q)) a_Q^{-1} 1_Q )^{p'} dsigma )^{1/p'}\n"
    "  A2 = ( Int ( sup_Q a_Q 1_Q )^{q/(1-q)} domega )^{(1-q)/q}\n"
    "  D1 = sup_Q (1/sigma(Q)) Sum_{R subset Q} lambda_R d_R^{-1} omega(R)\n"
    "  D2 = ( Int ( Sum_Q lambda_Q d_Q^{p'-1} 1_Q )^{(p-1)q/(p-q)} domega )^{(p-q)/q}\n"
    "upper_bound minimizes a product of these over families; factorization\n"
    "splits lambda = b c and takes the matching envelope and tower norms.\n"
    "Both bound the operator norm from above and are comparable to it.\n";

const char* kExplainCounterexample =
    "Two chain constructions on binary trees.\n"
    "small-gamma (decreasing chain, 0 < gamma < q < 1 <= p):\n"
    "  lambda_{P_j} = j^{alpha-1} log(j+2)^{-delta}, omega(E_j) = (j+1)^{-beta-1},\n"
    "  sigma(P_j) = log(j+2)^{-epsilon} with alpha = 1, beta = q, delta = 1/q.\n"
    "  The testing quantity sigma(P_0)^{-q/p} Sum omega(E_k) L_k^q diverges while\n"
    "  the gamma-Wolff condition integral stays bounded.\n"
    "large-gamma (increasing chain, gamma = q):\n"
    "  omega(E_j) = 2^{j+1}, sigma = point mass at the bottom,\n"
    "  lambda_{P_j}^q omega(P_j) = (j+1)^{-beta} with beta > 1, alpha beta < 1.\n"
    "  Sum (j+1)^{-beta} converges while the localized requirement\n"
    "  Sum (omega(E_j)/omega(P_j)) (j+1)^{-alpha beta} diverges like a telescoped\n"
    "  logarithm; alpha = (p-1)/(p-q).\n";

const char* kExplainVerify =
    "Seeded property suites over random instances:\n"
    "  invariants       exact identities (measure additivity, serialization\n"
    "                   round trips, norm power scaling, partial-summation\n"
    "                   ordering, tower/envelope transforms, power-mean facts)\n"
    "  sandwich         minimized upper bounds bracket the estimated norm\n"
    "                   within a recorded constant per (p, q)\n"
    "  wolff-scale      homogeneity in lambda and sigma, monotonicity in gamma\n"
    "  counterexamples  chain generators reproduce the certified verdicts\n"
    "Instance k depends only on (seed, k); DYADIC_WORKERS sets the fan-out\n"
    "and the first failing instance is dumped as a reproducer JSON.\n";

int require_instance(const std::string& path) {
  if (!path.empty()) return 0;
  std::fprintf(stderr, "error: --instance is required (or use --explain)\n");
  return 2;
}

int cmd_norm(const std::string& cmd_echo, const std::string& instance_path, std::uint64_t seed,
             bool multiplier, const std::string& out_path) {
  Timer timer;
  dyadic::Instance inst = dyadic::load_instance(instance_path);
  dyadic::AscentOptions opts;
  opts.seed = seed;
  dyadic::NormEstimate est =
      multiplier ? estimate_multiplier_norm(inst, opts) : estimate_operator_norm(inst, opts);
  std::printf("%s = %.17g\n", multiplier ? "multiplier norm" : "norm", est.value);

  dyadic::RunReport rep;
  rep.command = cmd_echo;
  rep.instance_digest = dyadic::instance_digest(inst);
  rep.results["kind"] = multiplier ? "multiplier" : "operator";
  rep.results["p"] = dyadic::json_number(inst.exps.p);
  rep.results["q"] = dyadic::json_number(inst.exps.q);
  rep.results["value"] = dyadic::json_number(est.value);
  rep.results["stationarity"] = dyadic::json_number(est.stationarity);
  rep.results["iterations"] = est.iterations;
  rep.results["converged"] = est.converged;
  emit_report(rep, timer.seconds(), out_path);
  return 0;
}

int cmd_lp_norm(const std::string& cmd_echo, const std::string& instance_path,
                const std::string& outer_text, const std::string& inner_text,
                const std::string& measure_name, const std::string& family_path,
                const std::string& out_path) {
  Timer timer;
  dyadic::Instance inst = dyadic::load_instance(instance_path);
  dyadic::NormExponents rs{parse_exponent(outer_text, "--outer"),
                           parse_exponent(inner_text, "--inner")};
  if (measure_name != "omega" && measure_name != "sigma")
    throw std::runtime_error("--measure must be omega or sigma");
  const dyadic::Measure& mu = measure_name == "sigma" ? inst.sigma : inst.omega;
  std::vector<double> fam =
      family_path.empty() ? inst.lambda : load_family(inst.tree, family_path);
  dyadic::NormValue nv = dyadic::mixed_norm(inst.tree, mu, fam, rs);
  std::printf("lp-norm = %.17g\n", nv.value);

  dyadic::RunReport rep;
  rep.command = cmd_echo;
  rep.instance_digest = dyadic::instance_digest(inst);
  rep.results["outer"] = dyadic::json_number(rs.outer);
  rep.results["inner"] = dyadic::json_number(rs.inner);
  rep.results["measure"] = measure_name;
  rep.results["family"] = family_path.empty() ? "lambda" : family_path;
  rep.results["value"] = dyadic::json_number(nv.value);
  rep.results["zero_base"] = nv.zero_base;
  emit_report(rep, timer.seconds(), out_path);
  return 0;
}

int cmd_wolff(const std::string& cmd_echo, const std::string& instance_path, double gamma,
              bool gamma_given, const std::string& out_path) {
  Timer timer;
  dyadic::Instance inst = dyadic::load_instance(instance_path);
  double g = gamma_given ? gamma : inst.exps.gamma;
  dyadic::WolffReport wr = dyadic::wolff_report(inst, g);
  std::printf("wolff condition = %.17g  dlbo = %.6g\n", wr.condition_value, wr.dlbo);

  dyadic::RunReport rep;
  rep.command = cmd_echo;
  rep.instance_digest = dyadic::instance_digest(inst);
  rep.results["gamma"] = dyadic::json_number(wr.gamma);
  rep.results["condition_value"] = dyadic::json_number(wr.condition_value);
  rep.results["dlbo"] = dyadic::json_number(wr.dlbo);
  rep.results["potential"] = number_array(wr.potential);
  emit_report(rep, timer.seconds(), out_path);
  return 0;
}

int cmd_characterize(const std::string& cmd_echo, const std::string& instance_path,
                     std::uint64_t seed, int sweeps, const std::string& out_path) {
  Timer timer;
  dyadic::Instance inst = dyadic::load_instance(instance_path);
  dyadic::MinimizeOptions opts;
  opts.seed = seed;
  if (sweeps > 0) opts.max_sweeps = sweeps;
  dyadic::CharacterizationReport cr = dyadic::characterization_report(inst, opts);
  std::printf("norm = %.17g  upper = %.17g  factorization = %.17g\n", cr.norm_value,
              cr.upper_bound, cr.factorization_bound);

  dyadic::RunReport rep;
  rep.command = cmd_echo;
  rep.instance_digest = dyadic::instance_digest(inst);
  rep.results["A1"] = dyadic::json_number(cr.A1);
  rep.results["A2"] = dyadic::json_number(cr.A2);
  rep.results["D1"] = dyadic::json_number(cr.D1);
  rep.results["D2"] = dyadic::json_number(cr.D2);
  rep.results["upper_bound"] = dyadic::json_number(cr.upper_bound);
  rep.results["factorization_bound"] = dyadic::json_number(cr.factorization_bound);
  rep.results["norm"] = dyadic::json_number(cr.norm_value);
  rep.results["sandwich_ratio_low"] = dyadic::json_number(cr.sandwich_ratio_low);
  rep.results["sandwich_ratio_high"] = dyadic::json_number(cr.sandwich_ratio_high);
  char key[64];
  std::snprintf(key, sizeof(key), "p=%g,q=%g:sandwich", inst.exps.p, inst.exps.q);
  rep.constants[key] = dyadic::json_number(
      std::max(cr.sandwich_ratio_high, cr.sandwich_ratio_low > 0.0
                                           ? 1.0 / cr.sandwich_ratio_low
                                           : cr.sandwich_ratio_high));
  emit_report(rep, timer.seconds(), out_path);
  return 0;
}

// a complete binary tree is materialized only while its node count stays
// within the cap; deeper chains are reported from the streamed partial sums
constexpr std::size_t kMaterializeNodeCap = std::size_t{1} << 20;

std::vector<std::size_t> chain_checkpoints(std::size_t depth) {
  std::vector<std::size_t> cps;
  for (std::size_t c : {depth / 4, depth / 2, depth})
    if (c >= 4 && (cps.empty() || c > cps.back())) cps.push_back(c);
  if (cps.empty()) cps.push_back(depth);
  return cps;
}

int cmd_counterexample(const std::string& cmd_echo, const std::string& which, double p, double q,
                       double gamma, bool gamma_given, std::size_t depth, double epsilon,
                       double beta, const std::string& instance_out,
                       const std::string& out_path) {
  Timer timer;
  dyadic::RunReport rep;
  rep.command = cmd_echo;
  rep.results["which"] = which;
  rep.results["p"] = dyadic::json_number(p);
  rep.results["q"] = dyadic::json_number(q);
  rep.results["depth"] = depth;

  if (which == "small-gamma") {
    if (!gamma_given)
      throw std::runtime_error("--gamma is required for the small-gamma chain");
    std::vector<std::size_t> cps = chain_checkpoints(depth);
    dyadic::SmallGammaPartials parts = dyadic::small_gamma_partials(p, q, gamma, epsilon, cps);
    dyadic::SmallGammaSeries series = dyadic::small_gamma_series_terms(p, q, epsilon);
    rep.results["gamma"] = dyadic::json_number(gamma);
    rep.results["epsilon"] = dyadic::json_number(epsilon);
    rep.results["checkpoints"] = parts.depths;
    rep.results["testing_partials"] = number_array(parts.necessary);
    rep.results["potential_partials"] = number_array(parts.wolff);
    rep.results["testing_series"] = ordered_json{
        {"a", dyadic::json_number(series.necessary.a)},
        {"b", dyadic::json_number(series.necessary.b)},
        {"converges", dyadic::classify_series(series.necessary).converges}};
    rep.results["potential_series"] = ordered_json{
        {"a", dyadic::json_number(series.wolff.a)},
        {"b", dyadic::json_number(series.wolff.b)},
        {"converges", dyadic::classify_series(series.wolff).converges}};

    std::size_t node_count = (std::size_t{1} << (depth + 2)) - 1;
    bool materialize = depth + 2 < 64 && node_count <= kMaterializeNodeCap;
    rep.results["materialized"] = materialize;
    if (materialize) {
      dyadic::SmallGammaChain chain =
          dyadic::build_counterexample_small_gamma(p, q, gamma, depth, epsilon);
      rep.instance_digest = dyadic::instance_digest(chain.instance);
      rep.results["testing_quantity"] = dyadic::json_number(chain.necessary_quantity);
      rep.results["potential_quantity"] = dyadic::json_number(chain.wolff_quantity);
      rep.results["instance"] = dyadic::instance_to_json(chain.instance);
      if (!instance_out.empty()) dyadic::save_instance(chain.instance, instance_out);
      std::printf("small-gamma chain, depth %zu: testing = %.17g, potential <= %.17g\n", depth,
                  chain.necessary_quantity, chain.wolff_quantity);
    } else {
      rep.results["notice"] = "node count exceeds the materialization cap; streamed sums only";
      std::printf("small-gamma chain, depth %zu (streamed): testing = %.17g, potential <= %.17g\n",
                  depth, parts.necessary.back(), parts.wolff.back());
    }
  } else if (which == "large-gamma") {
    std::vector<std::size_t> cps = chain_checkpoints(depth);
    dyadic::LargeGammaPartials parts = dyadic::large_gamma_partials(p, q, beta, cps);
    dyadic::LowerEstimate lower = dyadic::large_gamma_lower_estimate(p, q, beta, depth);
    rep.results["beta"] = dyadic::json_number(beta);
    rep.results["alpha"] = dyadic::json_number((p - 1.0) / (p - q));
    rep.results["checkpoints"] = parts.depths;
    rep.results["sufficient_partials"] = number_array(parts.sufficient);
    rep.results["divergent_partials"] = number_array(parts.divergent);
    rep.results["lower_estimate"] = ordered_json{{"lhs", dyadic::json_number(lower.lhs)},
                                                 {"rhs", dyadic::json_number(lower.rhs)}};

    std::size_t node_count = (std::size_t{1} << (depth + 1)) - 1;
    bool materialize = depth + 1 < 64 && node_count <= kMaterializeNodeCap;
    rep.results["materialized"] = materialize;
    if (materialize) {
      dyadic::LargeGammaChain chain = dyadic::build_counterexample_large_gamma(p, q, depth, beta);
      rep.instance_digest = dyadic::instance_digest(chain.instance);
      rep.results["sufficient_quantity"] = dyadic::json_number(chain.sufficient_quantity);
      rep.results["divergent_quantity"] = dyadic::json_number(chain.divergent_quantity);
      rep.results["instance"] = dyadic::instance_to_json(chain.instance);
      if (!instance_out.empty()) dyadic::save_instance(chain.instance, instance_out);
      std::printf("large-gamma chain, depth %zu: sufficient = %.17g, divergent = %.17g\n", depth,
                  chain.sufficient_quantity, chain.divergent_quantity);
    } else {
      rep.results["notice"] = "node count exceeds the materialization cap; streamed sums only";
      std::printf("large-gamma chain, depth %zu (streamed): sufficient = %.17g, divergent = %.17g\n",
                  depth, parts.sufficient.back(), parts.divergent.back());
    }
  } else {
    throw std::runtime_error("--which must be small-gamma or large-gamma");
  }
  emit_report(rep, timer.seconds(), out_path);
  return 0;
}

int cmd_verify(const std::string& cmd_echo, const std::string& suite, std::uint64_t seed,
               int instances, int max_depth, const std::string& reproducer_dir,
               const std::string& out_path) {
  Timer timer;
  dyadic::SuiteOptions opts;
  opts.seed = seed;
  opts.instances = instances;
  opts.max_depth = max_depth;
  opts.reproducer_dir = reproducer_dir;
  dyadic::SuiteResult result = dyadic::run_suite(suite, opts);
  std::printf("suite %s: %d checks, %d failures\n", result.name.c_str(), result.checks,
              result.failures);
  for (const auto& msg : result.messages) std::fprintf(stderr, "FAIL %s\n", msg.c_str());

  dyadic::RunReport rep;
  rep.command = cmd_echo;
  rep.results["suite"] = result.name;
  rep.results["seed"] = seed;
  rep.results["passed"] = result.passed;
  rep.results["checks"] = result.checks;
  rep.results["failures"] = result.failures;
  rep.results["messages"] = result.messages;
  if (!result.reproducer_path.empty()) rep.results["reproducer"] = result.reproducer_path;
  for (const auto& [key, value] : result.constants)
    rep.constants[key] = dyadic::json_number(value);
  emit_report(rep, timer.seconds(), out_path);
  return result.passed ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dyadic two-weight norm and potential toolkit"};
  app.require_subcommand(1);
  std::string cmd_echo = join_args(argc, argv);

  std::string instance_path, out_path, family_path, instance_out;
  std::string outer_text = "inf", inner_text = "inf", measure_name = "omega";
  std::string suite = "invariants", which, reproducer_dir = ".";
  std::uint64_t seed_norm = 1234, seed_char = 5150, seed_verify = 7;
  double gamma = 1.0, p = 2.0, q = 0.5, epsilon = 0.5, beta = 1.25;
  std::size_t depth = 8;
  int sweeps = 0, instances = 0, max_depth = 3;
  bool multiplier = false;
  bool explain_norm = false, explain_lp = false, explain_wolff = false;
  bool explain_char = false, explain_ce = false, explain_verify = false;

  CLI::App* norm = app.add_subcommand("norm", "estimate the operator norm");
  norm->add_option("--instance", instance_path, "instance JSON file");
  norm->add_option("--seed", seed_norm, "ascent seed");
  norm->add_flag("--multiplier", multiplier, "estimate the tower multiplier norm instead");
  norm->add_option("--out", out_path, "also write the report to this file");
  norm->add_flag("--explain", explain_norm, "print the computed quantity definitions");

  CLI::App* lp = app.add_subcommand("lp-norm", "mixed norm of a coefficient family");
  lp->add_option("--instance", instance_path, "instance JSON file");
  lp->add_option("--outer", outer_text, "outer exponent r (number or inf)");
  lp->add_option("--inner", inner_text, "inner exponent s (number, inf, may be negative)");
  lp->add_option("--measure", measure_name, "omega or sigma")->default_str("omega");
  lp->add_option("--family-file", family_path, "JSON path->value family; defaults to lambda");
  lp->add_option("--out", out_path, "also write the report to this file");
  lp->add_flag("--explain", explain_lp, "print the computed quantity definitions");

  CLI::App* wolff = app.add_subcommand("wolff", "potential and condition report");
  wolff->add_option("--instance", instance_path, "instance JSON file");
  CLI::Option* gamma_opt =
      wolff->add_option("--gamma", gamma, "averaging exponent; defaults to the instance value");
  wolff->add_option("--out", out_path, "also write the report to this file");
  wolff->add_flag("--explain", explain_wolff, "print the computed quantity definitions");

  CLI::App* character = app.add_subcommand("characterize", "two-sided bound report");
  character->add_option("--instance", instance_path, "instance JSON file");
  character->add_option("--seed", seed_char, "minimizer seed");
  character->add_option("--sweeps", sweeps, "coordinate-descent sweep cap");
  character->add_option("--out", out_path, "also write the report to this file");
  character->add_flag("--explain", explain_char, "print the computed quantity definitions");

  CLI::App* ce = app.add_subcommand("counterexample", "chain constructions and verdicts");
  ce->add_option("--which", which, "small-gamma or large-gamma");
  ce->add_option("--p", p, "integrability exponent p");
  ce->add_option("--q", q, "target exponent q in (0, 1)");
  CLI::Option* ce_gamma = ce->add_option("--gamma", gamma, "averaging exponent (small-gamma)");
  ce->add_option("--depth", depth, "chain length");
  ce->add_option("--epsilon", epsilon, "sigma decay exponent (small-gamma)");
  ce->add_option("--beta", beta, "series exponent (large-gamma)");
  ce->add_option("--instance-out", instance_out, "write the materialized instance here");
  ce->add_option("--out", out_path, "also write the report to this file");
  ce->add_flag("--explain", explain_ce, "print the computed quantity definitions");

  CLI::App* verify = app.add_subcommand("verify", "run a seeded property suite");
  verify->add_option("--suite", suite, "invariants, sandwich, wolff-scale, counterexamples");
  verify->add_option("--seed", seed_verify, "suite seed");
  verify->add_option("--instances", instances, "instance count (0 = suite default)");
  verify->add_option("--max-depth", max_depth, "deepest random tree");
  verify->add_option("--reproducer-dir", reproducer_dir, "where failing instances are dumped");
  verify->add_option("--out", out_path, "also write the report to this file");
  verify->add_flag("--explain", explain_verify, "print the computed quantity definitions");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (norm->parsed()) {
      if (explain_norm) { std::fputs(kExplainNorm, stdout); return 0; }
      if (int rc = require_instance(instance_path)) return rc;
      return cmd_norm(cmd_echo, instance_path, seed_norm, multiplier, out_path);
    }
    if (lp->parsed()) {
      if (explain_lp) { std::fputs(kExplainLpNorm, stdout); return 0; }
      if (int rc = require_instance(instance_path)) return rc;
      return cmd_lp_norm(cmd_echo, instance_path, outer_text, inner_text, measure_name,
                         family_path, out_path);
    }
    if (wolff->parsed()) {
      if (explain_wolff) { std::fputs(kExplainWolff, stdout); return 0; }
      if (int rc = require_instance(instance_path)) return rc;
      return cmd_wolff(cmd_echo, instance_path, gamma, gamma_opt->count() > 0, out_path);
    }
    if (character->parsed()) {
      if (explain_char) { std::fputs(kExplainCharacterize, stdout); return 0; }
      if (int rc = require_instance(instance_path)) return rc;
      return cmd_characterize(cmd_echo, instance_path, seed_char, sweeps, out_path);
    }
    if (ce->parsed()) {
      if (explain_ce) { std::fputs(kExplainCounterexample, stdout); return 0; }
      if (which.empty()) {
        std::fprintf(stderr, "error: --which is required (or use --explain)\n");
        return 2;
      }
      return cmd_counterexample(cmd_echo, which, p, q, gamma, ce_gamma->count() > 0, depth,
                                epsilon, beta, instance_out, out_path);
    }
    if (verify->parsed()) {
      if (explain_verify) { std::fputs(kExplainVerify, stdout); return 0; }
      return cmd_verify(cmd_echo, suite, seed_verify, instances, max_depth, reproducer_dir,
                        out_path);
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 2;
}
