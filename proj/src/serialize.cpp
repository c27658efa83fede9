#include "robust_treat/serialize.hpp"

#include "robust_treat/error.hpp"

namespace robust_treat {
namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

Json vector_json(const Eigen::VectorXd& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

Json matrix_json(const Eigen::MatrixXd& m) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) out.push_back(vector_json(m.row(i).transpose()));
  return out;
}

Eigen::VectorXd vector_from(const Json& doc, const char* field) {
  if (doc.is_number()) return scalar_vector(doc.get<double>());
  if (!doc.is_array() || doc.empty()) {
    throw Error(ErrorKind::Domain, std::string("spec: '") + field + "' must be a number or array");
  }
  Eigen::VectorXd v(static_cast<Eigen::Index>(doc.size()));
  for (std::size_t i = 0; i < doc.size(); ++i) {
    if (!doc[i].is_number()) {
      throw Error(ErrorKind::Domain, std::string("spec: '") + field + "' entries must be numbers");
    }
    v(static_cast<Eigen::Index>(i)) = doc[i].get<double>();
  }
  return v;
}

const Json& field(const Json& doc, const char* name) {
  if (!doc.contains(name)) {
    throw Error(ErrorKind::Domain, std::string("spec: missing field '") + name + "'");
  }
  return doc.at(name);
}

double number(const Json& doc, const char* name) {
  const Json& value = field(doc, name);
  if (!value.is_number()) {
    throw Error(ErrorKind::Domain, std::string("spec: '") + name + "' must be a number");
  }
  return value.get<double>();
}

std::string_view method_name(AcceptanceMethod m) {
  return m == AcceptanceMethod::ClosedForm ? "closed_form" : "quadrature";
}

}  // namespace

ProblemSpec spec_from_json(const Json& doc) {
  if (!doc.is_object()) throw Error(ErrorKind::Domain, "spec: document must be an object");
  const Json& model = field(doc, "model");
  if (!model.is_string()) throw Error(ErrorKind::Domain, "spec: 'model' must be a string");
  const std::string name = model.get<std::string>();
  if (name == "external-validity") {
    const Json& mu = field(doc, "mu_bar");
    const Eigen::VectorXd mu_bar = vector_from(mu, "mu_bar");
    if (mu_bar.size() != 1) throw Error(ErrorKind::Dimension, "spec: external-validity mu_bar is scalar");
    return make_external_validity(mu_bar(0), number(doc, "sigma"), number(doc, "k"));
  }
  if (name == "evidence") {
    std::vector<EvidenceSite> sites;
    const Json& list = field(doc, "sites");
    if (!list.is_array()) throw Error(ErrorKind::Domain, "spec: 'sites' must be an array");
    for (const Json& site : list) {
      sites.push_back({vector_from(field(site, "x"), "x"), number(site, "variance")});
    }
    return make_evidence_aggregation(vector_from(field(doc, "x0"), "x0"), sites,
                                     number(doc, "C"), vector_from(field(doc, "mu_bar"), "mu_bar"));
  }
  throw Error(ErrorKind::Domain, "spec: unknown model '" + name + "'");
}

Json to_json(const ProblemSpec& spec) {
  Json out;
  out["label"] = spec.label();
  out["n"] = spec.n();
  out["mu_bar"] = vector_json(spec.mu_bar());
  out["Sigma"] = matrix_json(spec.sigma());
  out["flipped"] = spec.flipped();
  std::visit(overloaded{
                 [&](const ExternalValidityParams& p) {
                   out["model"] = "external-validity";
                   out["sigma"] = p.sigma;
                   out["k"] = p.k;
                 },
                 [&](const EvidenceParams& p) {
                   out["model"] = "evidence";
                   out["x0"] = vector_json(p.x0);
                   out["C"] = p.C;
                   Json sites = Json::array();
                   for (const EvidenceSite& s : p.sites) {
                     sites.push_back({{"x", vector_json(s.x)}, {"variance", s.variance}});
                   }
                   out["sites"] = sites;
                 },
                 [&](const CustomModel&) { out["model"] = "custom"; },
             },
             spec.params());
  const IdentifiedBounds b = bounds_at(spec, spec.mu_bar());
  out["bounds_at_mu_bar"] = {{"lower", b.lower}, {"upper", b.upper}};
  return out;
}

Json to_json(const DecisionRule& rule) {
  Json out;
  out["type"] = std::string(rule.type_name());
  std::visit(overloaded{
                 [&](const Threshold& r) {
                   out["w"] = vector_json(r.w);
                   out["c"] = r.c;
                 },
                 [&](const Probit& r) {
                   out["w"] = vector_json(r.w);
                   out["sigma_tilde"] = r.sigma_tilde;
                 },
                 [&](const ClampedLinear& r) {
                   out["w"] = vector_json(r.w);
                   out["rho"] = r.rho;
                 },
                 [&](const TwoStep& r) {
                   out["w"] = vector_json(r.w);
                   out["lo"] = r.lo;
                   out["hi"] = r.hi;
                 },
                 [&](const Constant& r) { out["a"] = r.a; },
                 [&](const Mixture& r) {
                   out["weights"] = r.weights;
                   Json parts = Json::array();
                   for (const DecisionRule& c : r.components) parts.push_back(to_json(c));
                   out["components"] = parts;
                 },
                 [&](const Tabulated& r) {
                   out["w"] = vector_json(r.w);
                   out["knots"] = r.knots;
                   out["values"] = r.values;
                 },
             },
             rule.variant());
  return out;
}

DecisionRule rule_from_json(const Json& doc) {
  const std::string type = field(doc, "type").get<std::string>();
  if (type == "threshold") return Threshold{vector_from(field(doc, "w"), "w"), number(doc, "c")};
  if (type == "probit") {
    return Probit{vector_from(field(doc, "w"), "w"), number(doc, "sigma_tilde")};
  }
  if (type == "clamped_linear") {
    return ClampedLinear{vector_from(field(doc, "w"), "w"), number(doc, "rho")};
  }
  if (type == "two_step") {
    return TwoStep{vector_from(field(doc, "w"), "w"), number(doc, "lo"), number(doc, "hi")};
  }
  if (type == "constant") return Constant{number(doc, "a")};
  if (type == "mixture") {
    Mixture m;
    m.weights = field(doc, "weights").get<std::vector<double>>();
    for (const Json& c : field(doc, "components")) m.components.push_back(rule_from_json(c));
    return m;
  }
  if (type == "tabulated") {
    return Tabulated{vector_from(field(doc, "w"), "w"),
                     field(doc, "knots").get<std::vector<double>>(),
                     field(doc, "values").get<std::vector<double>>()};
  }
  throw Error(ErrorKind::Domain, "rule: unknown type '" + type + "'");
}

Json to_json(const MmrSolution& solution) {
  Json out;
  out["regime"] = std::string(to_string(solution.regime.tag));
  out["ratio"] = solution.regime.ratio;
  out["phi_norm"] = solution.regime.phi_norm;
  out["index"] = {{"w", vector_json(solution.index.w)}, {"norm", solution.index.norm}};
  out["bounds"] = {{"lower", solution.bounds.lower}, {"upper", solution.bounds.upper}};
  out["value"] = solution.value;

  Json rules = Json::array();
  for (const LabeledRule& r : solution.rules) {
    rules.push_back({{"label", r.label}, {"optimal", r.optimal}, {"rule", to_json(r.rule)}});
  }
  out["rules"] = rules;

  Json support = Json::array();
  for (const LfpSupportPoint& p : solution.lfp.support) {
    support.push_back({{"mu_sign", p.mu_sign}, {"u", p.u}, {"mass", p.mass}});
  }
  out["lfp"] = {{"four_point", solution.lfp.four_point},
                {"q_plus", solution.lfp.prior.q_plus},
                {"q_minus", solution.lfp.prior.q_minus},
                {"support", support}};

  if (solution.constants) {
    const CaseIIConstants& k = *solution.constants;
    Json constants = {{"sigma_tilde", k.sigma_tilde},
                      {"rho_star", k.rho_star},
                      {"beta_star", k.beta_star},
                      {"c_star", k.c_star}};
    if (k.t_star) {
      Json roots = Json::array();
      for (const TStarRoot& root : k.t_star->roots) {
        roots.push_back({{"t", root.t}, {"rule", to_json(root.rule)}});
      }
      constants["t_star"] = {{"s_star", k.t_star->s_star},
                             {"mu_dot", vector_json(k.t_star->mu_dot)},
                             {"roots", roots}};
    }
    out["constants"] = constants;
  } else {
    out["constants"] = nullptr;
  }

  Json certs = Json::array();
  for (const RuleCertificate& c : solution.certificates) {
    Json cert = {{"label", c.label},
                 {"worst_case", c.worst_case},
                 {"value_residual", c.value_residual},
                 {"passed", c.passed}};
    if (c.moments) {
      const MomentCertificate& m = *c.moments;
      cert["moments"] = {{"e_minus", m.e_minus},
                         {"e_plus", m.e_plus},
                         {"target_minus", m.target_minus},
                         {"target_plus", m.target_plus},
                         {"residual_minus", m.residual_minus},
                         {"residual_plus", m.residual_plus},
                         {"tol", m.tol},
                         {"method", std::string(method_name(m.method))},
                         {"passed", m.passed}};
    }
    certs.push_back(cert);
  }
  out["certificates"] = certs;
  return out;
}

Json to_json(const PerSolution& solution) {
  return {{"randomized_rule", to_json(solution.randomized_rule)},
          {"nonrandomized_rule", to_json(solution.nonrandomized_rule)},
          {"ambiguous_sign", solution.ambiguous_sign}};
}

Json to_json(const AgreementReport& report) {
  return {{"with_randomization", report.with_randomization},
          {"without_randomization", report.without_randomization}};
}

Json to_json(const oracle::AuditReport& report) {
  Json checks = Json::array();
  for (const oracle::AuditCheck& c : report.checks) {
    checks.push_back(
        {{"name", c.name}, {"residual", c.residual}, {"tol", c.tol}, {"passed", c.passed}});
  }
  return {{"checks", checks}, {"passed", report.passed}};
}

Json to_json(const oracle::MinimaxReport& report) {
  return {{"closed_form", report.closed_form},
          {"coarse_value", report.coarse.value},
          {"coarse_discrete_value", report.coarse.discrete_value},
          {"refined_value", report.refined.value},
          {"gap", report.gap},
          {"refined_gap", report.refined_gap},
          {"refinement_step", report.refinement_step},
          {"monotone", report.monotone},
          {"too_coarse", report.too_coarse}};
}

}  // namespace robust_treat
