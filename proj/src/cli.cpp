#include "robust_treat/cli.hpp"

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "robust_treat/error.hpp"
#include "robust_treat/oracle.hpp"
#include "robust_treat/serialize.hpp"
#include "robust_treat/solver_mmr.hpp"
#include "robust_treat/solver_per.hpp"
#include "robust_treat/verify.hpp"

namespace robust_treat::cli {
namespace {

struct ModelFlags {
  std::string spec_path;
  std::string model;
  std::string mu_bar;
  std::optional<double> sigma;
  std::optional<double> k;
  std::optional<double> C;
  std::string x0;
  std::vector<std::string> sites;
};

struct RunConfig {
  ModelFlags model;
  std::string out_path;
  std::uint64_t seed = 20240611;
  std::vector<std::string> rules;
  double lo = -5.0;
  double hi = 5.0;
  std::int64_t count = 201;
  VerifyOptions verify;
};

Error usage(const std::string& message) { return Error(ErrorKind::Precondition, message); }

std::vector<double> parse_list(const std::string& text, const char* flag) {
  std::vector<double> values;
  std::stringstream stream(text);
  std::string item;
  while (std::getline(stream, item, ',')) {
    const char* first = item.data();
    const char* last = item.data() + item.size();
    while (first < last && *first == ' ') ++first;
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last) {
      throw usage(std::string("--") + flag + ": cannot parse '" + item + "' as a number");
    }
    values.push_back(value);
  }
  if (values.empty()) throw usage(std::string("--") + flag + ": expected a number list");
  return values;
}

Eigen::VectorXd to_vector(const std::vector<double>& values) {
  return Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
}

ProblemSpec build_spec(const ModelFlags& flags) {
  const bool from_file = !flags.spec_path.empty();
  const bool from_flags = !flags.model.empty();
  if (from_file == from_flags) {
    throw usage("give exactly one model source: --spec <path> or --model external-validity|evidence");
  }
  if (from_file) {
    std::ifstream in(flags.spec_path);
    if (!in) throw usage("cannot open spec file '" + flags.spec_path + "'");
    Json doc;
    try {
      doc = Json::parse(in);
    } catch (const Json::exception& e) {
      throw usage(std::string("spec file is not valid JSON: ") + e.what());
    }
    return spec_from_json(doc);
  }
  if (flags.mu_bar.empty()) throw usage("--mu-bar is required");
  if (flags.model == "external-validity") {
    if (!flags.sigma || !flags.k) throw usage("external-validity model needs --sigma and --k");
    const std::vector<double> mu = parse_list(flags.mu_bar, "mu-bar");
    if (mu.size() != 1) throw usage("external-validity model takes a scalar --mu-bar");
    return make_external_validity(mu[0], *flags.sigma, *flags.k);
  }
  if (flags.model == "evidence") {
    if (!flags.C || flags.x0.empty() || flags.sites.empty()) {
      throw usage("evidence model needs --C, --x0 and at least one --site");
    }
    std::vector<EvidenceSite> sites;
    for (const std::string& site : flags.sites) {
      const auto colon = site.find(':');
      if (colon == std::string::npos) throw usage("--site expects 'x1,...,xd:variance'");
      const std::vector<double> variance = parse_list(site.substr(colon + 1), "site");
      if (variance.size() != 1) throw usage("--site takes one variance after ':'");
      sites.push_back({to_vector(parse_list(site.substr(0, colon), "site")), variance[0]});
    }
    return make_evidence_aggregation(to_vector(parse_list(flags.x0, "x0")), sites, *flags.C,
                                     to_vector(parse_list(flags.mu_bar, "mu-bar")));
  }
  throw usage("unknown --model '" + flags.model + "' (expected external-validity or evidence)");
}

std::string format_number(double x) {
  char buffer[64];
  const auto result = std::to_chars(buffer, buffer + sizeof buffer, x);
  return std::string(buffer, result.ptr);
}

void emit(const RunConfig& config, const std::string& text, std::ostream& out) {
  if (config.out_path.empty()) {
    out << text;
    return;
  }
  std::ofstream file(config.out_path, std::ios::binary);
  if (!file) throw usage("cannot write '" + config.out_path + "'");
  file << text;
}

std::vector<std::pair<std::string, DecisionRule>> named_rules(const ProblemSpec& spec) {
  const MmrSolution mmr = solve_mmr(spec);
  const PerSolution per = solve_per(spec);
  std::vector<std::pair<std::string, DecisionRule>> rules;
  bool has_w0 = false;
  for (const LabeledRule& r : mmr.rules) {
    rules.emplace_back(r.label, r.rule);
    has_w0 = has_w0 || r.label == "d_w0";
  }
  if (!has_w0) rules.emplace_back("d_w0", DecisionRule(Threshold{mmr.index.w, 0.0}));
  rules.emplace_back("d_per", per.randomized_rule);
  rules.emplace_back("d_per_nonrandomized", per.nonrandomized_rule);
  return rules;
}

std::vector<std::pair<std::string, DecisionRule>> select_rules(
    const ProblemSpec& spec, const std::vector<std::string>& labels,
    const std::vector<std::string>& defaults) {
  const auto all = named_rules(spec);
  const std::vector<std::string>& wanted = labels.empty() ? defaults : labels;
  std::vector<std::pair<std::string, DecisionRule>> chosen;
  for (const std::string& label : wanted) {
    const auto it = std::find_if(all.begin(), all.end(),
                                 [&](const auto& entry) { return entry.first == label; });
    if (it == all.end()) {
      std::string known;
      for (const auto& entry : all) known += (known.empty() ? "" : ", ") + entry.first;
      throw usage("unknown rule '" + label + "' for this spec (available: " + known + ")");
    }
    chosen.push_back(*it);
  }
  return chosen;
}

int cmd_solve(const RunConfig& config, std::ostream& out) {
  const ProblemSpec spec = build_spec(config.model);
  Json doc;
  doc["schema_version"] = kSchemaVersion;
  doc["spec"] = to_json(spec);
  doc["mmr"] = to_json(solve_mmr(spec));
  doc["per"] = to_json(solve_per(spec));
  doc["agreement"] = to_json(classify_agreement(spec));
  emit(config, doc.dump(2) + "\n", out);
  return kExitOk;
}

std::string csv_curve(const std::vector<std::pair<std::string, DecisionRule>>& rules,
                      const char* axis, const std::vector<double>& grid,
                      const std::function<double(const DecisionRule&, double)>& value) {
  std::string text = axis;
  for (const auto& entry : rules) text += "," + entry.first;
  text += "\n";
  for (double x : grid) {
    text += format_number(x);
    for (const auto& entry : rules) text += "," + format_number(value(entry.second, x));
    text += "\n";
  }
  return text;
}

void check_grid(const RunConfig& config) {
  if (config.count < 2 || !(config.lo < config.hi)) {
    throw usage("grid needs count >= 2 and min < max");
  }
}

int cmd_rule_curve(const RunConfig& config, std::ostream& out) {
  check_grid(config);
  const ProblemSpec spec = build_spec(config.model);
  std::vector<std::string> defaults;
  for (const LabeledRule& r : solve_mmr(spec).rules) defaults.push_back(r.label);
  defaults.push_back("d_per");
  const auto rules = select_rules(spec, config.rules, defaults);
  const Eigen::VectorXd direction = spec.mu_bar() / spec.mu_bar().norm();
  const auto grid = oracle::linspace(config.lo, config.hi, config.count);
  emit(config,
       csv_curve(rules, "y", grid,
                 [&](const DecisionRule& rule, double y) {
                   return evaluate(rule, Eigen::VectorXd(y * direction));
                 }),
       out);
  return kExitOk;
}

int cmd_profiled_regret(const RunConfig& config, std::ostream& out) {
  check_grid(config);
  const ProblemSpec spec = build_spec(config.model);
  if (external_validity_params(spec) == nullptr) {
    throw Error(ErrorKind::Domain, "profiled-regret is only available for the external-validity model");
  }
  const bool case_ii = classify_regime(spec).tag == RegimeTag::CaseII;
  const auto rules = select_rules(spec, config.rules,
                                  case_ii ? std::vector<std::string>{"d_per", "d_linear"}
                                          : std::vector<std::string>{"d_per", "d_w0"});
  const auto grid = oracle::linspace(config.lo, config.hi, config.count);
  emit(config,
       csv_curve(rules, "mu", grid,
                 [&](const DecisionRule& rule, double mu) {
                   return profiled_regret(rule, mu, spec);
                 }),
       out);
  return kExitOk;
}

int cmd_verify(const RunConfig& config, std::ostream& out) {
  const ProblemSpec spec = build_spec(config.model);
  VerifyOptions options = config.verify;
  options.seed = config.seed;
  const VerifyReport report = run_verification(spec, options);
  Json doc;
  doc["schema_version"] = kSchemaVersion;
  doc["spec"] = to_json(spec);
  doc["report"] = to_json(report);
  emit(config, doc.dump(2) + "\n", out);
  return report.passed ? kExitOk : kExitVerifyFailed;
}

void add_model_flags(CLI::App& cmd, RunConfig& config) {
  ModelFlags& m = config.model;
  cmd.add_option("--spec", m.spec_path, "JSON spec file");
  cmd.add_option("--model", m.model, "external-validity or evidence");
  cmd.add_option("--mu-bar", m.mu_bar, "prior location, comma separated for vectors");
  cmd.add_option("--sigma", m.sigma, "signal standard deviation (external-validity)");
  cmd.add_option("--k", m.k, "identified-set half width (external-validity)");
  cmd.add_option("--C", m.C, "Lipschitz constant (evidence)");
  cmd.add_option("--x0", m.x0, "target covariates, comma separated (evidence)");
  cmd.add_option("--site", m.sites, "site as 'x1,...,xd:variance' (evidence, repeatable)");
  cmd.add_option("--out", config.out_path, "output file, stdout when absent");
  cmd.add_option("--seed", config.seed, "random seed; ROBUST_TREAT_SEED overrides");
}

int exit_code_for(ErrorKind kind) {
  return (kind == ErrorKind::Numeric || kind == ErrorKind::LinearAlgebra) ? kExitNumeric
                                                                           : kExitUsage;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Robust treatment choice under partial identification", "robust-treat"};
  app.require_subcommand(1);
  RunConfig config;

  CLI::App* solve = app.add_subcommand("solve", "solve the ex-ante and ex-post problems (JSON)");
  add_model_flags(*solve, config);

  CLI::App* curve = app.add_subcommand("rule-curve", "actions of selected rules along y (CSV)");
  add_model_flags(*curve, config);
  curve->add_option("--rule", config.rules, "rule label (repeatable)");
  curve->add_option("--y-min", config.lo, "grid start");
  curve->add_option("--y-max", config.hi, "grid end");
  curve->add_option("--y-count", config.count, "grid size");

  CLI::App* profiled =
      app.add_subcommand("profiled-regret", "profiled regret of selected rules (CSV)");
  add_model_flags(*profiled, config);
  profiled->add_option("--rule", config.rules, "rule label (repeatable)");
  profiled->add_option("--mu-min", config.lo, "grid start");
  profiled->add_option("--mu-max", config.hi, "grid end");
  profiled->add_option("--mu-count", config.count, "grid size");

  CLI::App* verify = app.add_subcommand("verify", "run the verification suite (JSON)");
  add_model_flags(*verify, config);
  VerifyOptions& v = config.verify;
  verify->add_option("--perturb-sigma-tilde", v.overrides.sigma_tilde_shift);
  verify->add_option("--perturb-rho-star", v.overrides.rho_star_shift);
  verify->add_option("--perturb-beta-star", v.overrides.beta_star_shift);
  verify->add_option("--tol-closed-form", v.closed_form_tol)->check(CLI::PositiveNumber);
  verify->add_option("--tol-quadrature", v.quadrature_tol)->check(CLI::PositiveNumber);
  verify->add_option("--tol-oracle", v.oracle_tol)->check(CLI::PositiveNumber);
  verify->add_option("--mc-draws", v.mc_draws, "Monte Carlo draws, 0 disables")
      ->check(CLI::NonNegativeNumber);
  verify->add_option("--knots", v.knots, "oracle index knots")->check(CLI::PositiveNumber);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  if (const char* env = std::getenv("ROBUST_TREAT_SEED")) {
    const std::string text(env);
    std::uint64_t seed = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), seed);
    if (ec != std::errc() || ptr != text.data() + text.size()) {
      err << "error: ROBUST_TREAT_SEED must be an unsigned integer\n";
      return kExitUsage;
    }
    config.seed = seed;
  }

  try {
    if (*solve) return cmd_solve(config, out);
    if (*curve) return cmd_rule_curve(config, out);
    if (*profiled) return cmd_profiled_regret(config, out);
    return cmd_verify(config, out);
  } catch (const Error& e) {
    err << "error: " << to_string(e.kind()) << ": " << e.what() << "\n";
    return exit_code_for(e.kind());
  } catch (const Json::exception& e) {
    err << "error: spec: " << e.what() << "\n";
    return kExitUsage;
  }
}

}  // namespace robust_treat::cli
