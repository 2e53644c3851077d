// sospl: decide / bound / check-cnf / export front end over problem files,
// partial-example CSVs and DIMACS CNFs.

#include <CLI11.hpp>
#include <json.hpp>

#include <iostream>

#include "sospl/sospl.hpp"

namespace {

using nlohmann::json;

struct RunConfig {
  std::string problem;
  std::string data;
  std::string expr;
  std::string out;
  std::string format = "text";
  unsigned degree = 0;  // 0: take from an embedded query or default 2
  double delta = 0.05;
  double epsilon = 1e-3;
  int level = 0;
  sospl::SolverConfig solver;
};

constexpr int kExitAccept = 0;
constexpr int kExitReject = 1;
constexpr int kExitIndeterminate = 2;
constexpr int kExitParse = 3;
constexpr int kExitIo = 4;
constexpr int kExitError = 5;

std::string mono_text(const sospl::Monomial& m, const sospl::VariableSet& vars) {
  return sospl::to_string(sospl::Polynomial::term(m, 1.0), vars);
}

json certificate_json(const sospl::RefutationCertificate& cert,
                      const sospl::VerifyReport& rep, const sospl::VariableSet& vars) {
  json j;
  j["degree"] = cert.degree;
  j["constant"] = cert.constant;
  j["expansion_constant"] = rep.constant;
  j["residual_norm"] = rep.residual_norm;
  j["certificate_norm"] = rep.certificate_norm;
  j["grams"] = json::array();
  for (const sospl::GramBlock& g : cert.grams) {
    json jg;
    jg["group"] = g.group;
    jg["constraint"] = g.constraint;
    jg["dim"] = g.dim;
    jg["entries"] = g.entries;
    j["grams"].push_back(std::move(jg));
  }
  j["equality_multipliers"] = json::array();
  for (const sospl::EqualityMultiplier& em : cert.eq_multipliers) {
    json je;
    je["group"] = em.group;
    je["constraint"] = em.constraint;
    je["multiplier"] = sospl::to_string(em.multiplier, vars);
    j["equality_multipliers"].push_back(std::move(je));
  }
  j["moment_bound_multipliers"] = json::array();
  for (const sospl::MomentBoundMultiplier& bm : cert.bound_multipliers)
    j["moment_bound_multipliers"].push_back({{"bound", bm.bound}, {"lambda", bm.lambda}});
  j["linking_multipliers"] = json::array();
  for (const sospl::LinkingMultiplier& lm : cert.linking)
    j["linking_multipliers"].push_back({{"monomial", mono_text(lm.alpha, vars)},
                                        {"lower", lm.lambda_lower},
                                        {"upper", lm.lambda_upper}});
  j["markers"] = json::array();
  for (const sospl::MarkerMultiplier& mm : cert.markers)
    j["markers"].push_back({{"group", mm.group},
                            {"constraint", mm.constraint},
                            {"equality", mm.equality},
                            {"value", mm.value}});
  return j;
}

void emit(const RunConfig& cfg, const std::vector<std::pair<std::string, std::string>>& kv,
          const std::string& text) {
  if (cfg.format == "structured") {
    for (const auto& [k, v] : kv) std::cout << k << "=" << v << "\n";
  } else {
    std::cout << text;
  }
}

std::string fmt(double v) { return sospl::format_double(v); }

int cmd_decide(const RunConfig& cfg) {
  sospl::ParsedProblem prob = sospl::parse_problem_file(cfg.problem);
  unsigned degree = cfg.degree;
  if (degree == 0) {
    degree = 2;
    for (const sospl::Query& q : prob.queries)
      if (q.kind == sospl::Query::Kind::Decide) degree = q.degree;
  }
  std::optional<sospl::PartialExampleSet> data;
  if (!cfg.data.empty())
    data = sospl::load_examples(cfg.data, prob.system.variables);

  sospl::DecideResult res = sospl::decide(prob.system, data ? &*data : nullptr, degree,
                                          cfg.delta, cfg.solver);

  std::vector<std::pair<std::string, std::string>> kv;
  std::ostringstream text;
  const char* verdict = res.decision == sospl::Decision::Accept     ? "Accept"
                        : res.decision == sospl::Decision::Reject   ? "Reject"
                                                                    : "Indeterminate";
  kv.push_back({"verdict", verdict});
  kv.push_back({"degree", std::to_string(degree)});
  kv.push_back({"iterations", std::to_string(res.outcome.iterations)});
  text << verdict << " (degree " << degree << ", " << res.outcome.iterations
       << " iterations)\n";
  if (res.used_examples) {
    kv.push_back({"m", std::to_string(res.diagnostics.m)});
    kv.push_back({"n_d", std::to_string(res.diagnostics.n_d)});
    kv.push_back({"distinct_patterns", std::to_string(res.diagnostics.distinct_patterns)});
    double rmin = 0, rmax = 0;
    if (!res.diagnostics.radii.empty()) {
      rmin = rmax = res.diagnostics.radii[0].second;
      for (const auto& [mono, r] : res.diagnostics.radii) {
        rmin = std::min(rmin, r);
        rmax = std::max(rmax, r);
      }
    }
    kv.push_back({"radius_min", fmt(rmin)});
    kv.push_back({"radius_max", fmt(rmax)});
    kv.push_back({"witnessed_violations", std::to_string(res.diagnostics.violations.size())});
    std::vector<sospl::Polynomial> user;
    for (const sospl::SupportConstraint& g : prob.system.inequalities)
      if (!sospl::is_axiom(g.tag)) user.push_back(g.poly);
    double wr = sospl::witness_rate(user, *data);
    kv.push_back({"witness_rate", fmt(wr)});
    text << "m=" << res.diagnostics.m << " monomials=" << res.diagnostics.n_d
         << " radius=[" << fmt(rmin) << ", " << fmt(rmax) << "]\n"
         << "support witness rate over rows: " << fmt(wr) << "\n";
    if (!res.diagnostics.violations.empty())
      text << "rows directly falsify " << res.diagnostics.violations.size()
           << " restricted constraint(s)\n";
  }
  if (res.decision == sospl::Decision::Reject) {
    std::string cert_path = cfg.out.empty() ? cfg.problem + ".cert.json" : cfg.out;
    json j = certificate_json(res.outcome.certificate, res.outcome.certificate_report,
                              prob.system.variables);
    std::ofstream co(cert_path);
    if (!co) throw sospl::io_error("cannot write certificate to '" + cert_path + "'");
    co << j.dump(2) << "\n";
    kv.push_back({"certificate", cert_path});
    text << "refutation certificate: " << cert_path << "\n";
  }
  if (res.decision == sospl::Decision::Indeterminate) {
    kv.push_back({"cone_residual", fmt(res.outcome.cone_residual)});
    kv.push_back({"affine_residual", fmt(res.outcome.affine_residual)});
    text << "residuals: cone " << fmt(res.outcome.cone_residual) << ", affine "
         << fmt(res.outcome.affine_residual) << "\n";
  }
  emit(cfg, kv, text.str());
  switch (res.decision) {
    case sospl::Decision::Accept: return kExitAccept;
    case sospl::Decision::Reject: return kExitReject;
    default: return kExitIndeterminate;
  }
}

int cmd_bound(const RunConfig& cfg) {
  sospl::ParsedProblem prob = sospl::parse_problem_file(cfg.problem);
  std::string expr = cfg.expr;
  unsigned degree = cfg.degree;
  if (expr.empty()) {
    for (const sospl::Query& q : prob.queries)
      if (q.kind == sospl::Query::Kind::Bound) {
        expr = sospl::to_string(q.bound_poly, prob.system.variables);
        if (degree == 0) degree = q.degree;
        break;
      }
    if (expr.empty())
      throw sospl::domain_error("no expression given and no bound query in the problem");
  }
  if (degree == 0) degree = 2;
  sospl::Polynomial p = sospl::parse_polynomial(expr, prob.system.variables);
  std::optional<sospl::PartialExampleSet> data;
  if (!cfg.data.empty())
    data = sospl::load_examples(cfg.data, prob.system.variables);

  sospl::BoundResult res = sospl::bound_expectation(
      prob.system, data ? &*data : nullptr, p, degree, cfg.epsilon, cfg.delta, cfg.solver);

  auto status = [](sospl::EndpointStatus s) {
    return s == sospl::EndpointStatus::Certified ? "certified" : "indeterminate";
  };
  std::vector<std::pair<std::string, std::string>> kv = {
      {"expr", expr},
      {"lo", fmt(res.interval.lo)},
      {"hi", fmt(res.interval.hi)},
      {"lo_status", status(res.lo_status)},
      {"hi_status", status(res.hi_status)},
      {"degree", std::to_string(degree)},
      {"iterations", std::to_string(res.iterations)},
      {"empty_feasible_set", res.empty_feasible_set ? "true" : "false"}};
  std::ostringstream text;
  if (res.empty_feasible_set) {
    text << "E[" << expr << "]: the constraint system itself is infeasible\n";
  } else {
    text << "E[" << expr << "] in [" << fmt(res.interval.lo) << ", "
         << fmt(res.interval.hi) << "]  (lower " << status(res.lo_status) << ", upper "
         << status(res.hi_status) << ", degree " << degree << ", "
         << res.iterations << " iterations)\n";
  }
  emit(cfg, kv, text.str());
  return kExitAccept;
}

int cmd_check_cnf(const RunConfig& cfg) {
  sospl::CnfFormula f = sospl::parse_dimacs_file(cfg.problem);
  sospl::CrosscheckReport rep = sospl::crosscheck_sos(f, cfg.level, cfg.solver);
  const char* sos = rep.sos.feasible()     ? "feasible"
                    : rep.sos.infeasible() ? "infeasible"
                                           : "indeterminate";
  std::vector<std::pair<std::string, std::string>> kv = {
      {"level", std::to_string(cfg.level)},
      {"refuted", rep.refuted ? "true" : "false"},
      {"degree", std::to_string(rep.degree)},
      {"sos", sos},
      {"agree", rep.agree ? "true" : "false"},
      {"escalations", std::to_string(rep.escalations)}};
  std::ostringstream text;
  if (rep.refuted)
    text << "level-" << rep.level << " refuted; degree-" << rep.degree << " " << sos
         << "; " << (rep.agree ? "agree" : "DISAGREE") << "\n";
  else
    text << "not refuted at level " << cfg.level << "; degree-" << rep.degree << " "
         << sos << "\n";
  if (rep.refuted && !cfg.out.empty()) {
    std::ofstream to(cfg.out);
    if (!to) throw sospl::io_error("cannot write trace to '" + cfg.out + "'");
    sospl::render_trace(*rep.trace.root, to);
  }
  emit(cfg, kv, text.str());
  return rep.agree ? kExitAccept : kExitReject;
}

int cmd_export(const RunConfig& cfg) {
  sospl::ParsedProblem prob = sospl::parse_problem_file(cfg.problem);
  unsigned degree = cfg.degree ? cfg.degree : 2;
  sospl::SosProgram prog;
  if (!cfg.data.empty()) {
    sospl::PartialExampleSet data = sospl::load_examples(cfg.data, prob.system.variables);
    prog = sospl::build_learned_program(prob.system, data, degree, cfg.delta).program;
  } else {
    prog = sospl::build_program(prob.system, degree);
  }
  std::string path = cfg.out.empty() ? cfg.problem + ".dat-s" : cfg.out;
  sospl::export_interchange(prog, path);
  emit(cfg,
       {{"path", path},
        {"vars", std::to_string(prog.var_count())},
        {"blocks", std::to_string(prog.blocks.size())},
        {"rows", std::to_string(prog.rows.size())}},
       "wrote " + path + " (" + std::to_string(prog.var_count()) + " variables, " +
           std::to_string(prog.blocks.size()) + " blocks, " +
           std::to_string(prog.rows.size()) + " rows)\n");
  return kExitAccept;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sum-of-squares probability logic engine"};
  app.require_subcommand(1);
  RunConfig cfg;

  auto add_common = [&](CLI::App* sub, bool needs_problem) {
    sub->add_option("--problem", cfg.problem, "problem file (or DIMACS for check-cnf)")
        ->required(needs_problem);
    sub->add_option("--data", cfg.data, "partial-example CSV");
    sub->add_option("--degree", cfg.degree, "relaxation degree d");
    sub->add_option("--delta", cfg.delta, "confidence parameter for data constraints");
    sub->add_option("--epsilon", cfg.epsilon, "query precision");
    sub->add_option("--tol-feas", cfg.solver.tol_feas, "feasibility tolerance");
    sub->add_option("--tol-cert", cfg.solver.tol_cert, "certificate tolerance");
    sub->add_option("--tol-gap", cfg.solver.tol_gap, "optimization gap tolerance");
    sub->add_option("--max-iter", cfg.solver.max_iter, "iteration cap per solve");
    sub->add_option("--seed", cfg.solver.seed, "seed recorded in reports");
    sub->add_option("--format", cfg.format, "text | structured")
        ->check(CLI::IsMember({"text", "structured"}));
    sub->add_option("--out", cfg.out, "output path (certificate / trace / dat-s)");
  };

  CLI::App* decide = app.add_subcommand("decide", "accept or reject the system");
  add_common(decide, true);
  CLI::App* bound = app.add_subcommand("bound", "certified bounds on E[expr]");
  add_common(bound, true);
  bound->add_option("expr", cfg.expr, "polynomial expression");
  CLI::App* check = app.add_subcommand("check-cnf", "failed-literal oracle vs relaxation");
  add_common(check, true);
  check->add_option("--level", cfg.level, "failed-literal levels s");
  CLI::App* exp = app.add_subcommand("export", "write the sparse SDPA program");
  add_common(exp, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : kExitError;
  }

  try {
    if (app.got_subcommand(decide)) return cmd_decide(cfg);
    if (app.got_subcommand(bound)) return cmd_bound(cfg);
    if (app.got_subcommand(check)) return cmd_check_cnf(cfg);
    if (app.got_subcommand(exp)) return cmd_export(cfg);
  } catch (const sospl::parse_error& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return kExitParse;
  } catch (const sospl::io_error& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
  return kExitError;
}
