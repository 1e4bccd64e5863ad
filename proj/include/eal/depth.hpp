#pragma once

#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "eal/term.hpp"

namespace eal {

using VarDepthContext = std::map<std::string, Nat>;

struct DepthError {
  std::string kind;  // AffinityViolation, DepthMismatch, RegionDepthConflict, StoreDepth,
                     // UnboundVariable, UnknownRegion, MalformedTerm
  std::string rule;
  std::string path;
  std::optional<Nat> expected, actual;
  std::string message;

  nlohmann::json to_json() const;
};

struct DepthDerivation {
  std::string rule;
  Nat delta = 0;
  std::string path;
  std::vector<DepthDerivation> premises;
};

struct DepthResult {
  std::optional<DepthDerivation> derivation;
  std::optional<DepthError> error;
  bool ok() const { return derivation.has_value(); }
};

// Decides R;Gamma |-^delta P on the erased tree. Syntax-directed; failures
// carry the offending occurrence.
DepthResult check_depth(const TermPtr& p, const RegionDepthContext& R,
                        const VarDepthContext& gamma, Nat delta);

// Re-verifies that a derivation is a correct transcript for the judgement.
bool derivation_replays(const DepthDerivation& d, const TermPtr& p, const RegionDepthContext& R,
                        const VarDepthContext& gamma, Nat delta);

std::string render_derivation(const DepthDerivation& d, const TermPtr& p);

struct DepthConstraint {
  std::string region;
  std::optional<std::string> base;  // region of the enclosing store, if any
  Nat offset = 0;
  std::string path;
};

struct InferResult {
  std::optional<RegionDepthContext> context;
  std::vector<DepthConstraint> constraints;
  std::string conflict;  // set when unsatisfiable
  bool ok() const { return context.has_value(); }
};

// Collects R(r) = depth-of-get/set occurrences (shifted under stores) and
// solves; any solution is returned, unconstrained regions default to 0.
InferResult infer_region_depths(const TermPtr& p);

}  // namespace eal
