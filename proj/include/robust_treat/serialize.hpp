#pragma once

#include <json.hpp>

#include "robust_treat/model.hpp"
#include "robust_treat/oracle.hpp"
#include "robust_treat/rules.hpp"
#include "robust_treat/solver_mmr.hpp"
#include "robust_treat/solver_per.hpp"

namespace robust_treat {

inline constexpr int kSchemaVersion = 1;

using Json = nlohmann::json;

/// Builds a spec from {"model": "external-validity", "mu_bar", "sigma", "k"} or
/// {"model": "evidence", "x0", "sites": [{"x", "variance"}], "C", "mu_bar"}.
/// A scalar mu_bar is accepted wherever a one-element vector is expected.
ProblemSpec spec_from_json(const Json& doc);

Json to_json(const ProblemSpec& spec);
Json to_json(const DecisionRule& rule);
Json to_json(const MmrSolution& solution);
Json to_json(const PerSolution& solution);
Json to_json(const AgreementReport& report);
Json to_json(const oracle::AuditReport& report);
Json to_json(const oracle::MinimaxReport& report);

DecisionRule rule_from_json(const Json& doc);

}  // namespace robust_treat
