#pragma once

#include <optional>
#include <string>

#include <json.hpp>

#include "eal/term.hpp"
#include "eal/type.hpp"

namespace eal {

struct TypeError {
  std::string kind;  // AffinityViolation, DepthMismatch, TypeMismatch,
                     // EscapingTypeVariable, NotAStoreType, IllFormedType,
                     // UnboundVariable, CannotSynthesize, MalformedTerm
  std::string path;  // occurrence in the annotated tree
  TypePtr expected, found;
  std::string message;

  nlohmann::json to_json() const;
  std::string render() const;
};

struct TypeCheckResult {
  TypePtr type;
  std::optional<TypeError> error;
  bool ok() const { return type != nullptr; }
};

// Bidirectional checker for the elementary affine type system. Synthesizes
// when `expected` is absent; checks against it otherwise. The delta
// discipline of the depth system is re-verified along the way.
TypeCheckResult check(const TermPtr& p, const RegionTypeContext& R, const TypedVarContext& gamma,
                      Nat delta, const TypePtr& expected = nullptr);

enum class ValueShape { Abstraction, Banged, Atomic };

struct ClassifyResult {
  std::optional<ValueShape> shape;
  std::string error;  // ClassificationMismatch diagnostics
  bool ok() const { return shape.has_value(); }
};

// Shape of a closed typed value per the classification lemma: arrow types
// hold abstractions, bang types hold banged values.
ClassifyResult classify_value(const TermPtr& v, const TypePtr& a);

// Substitutes a type for a free type variable inside a term's annotations.
TermPtr subst_tvar_in_term(const TermPtr& t, const TypePtr& b, const std::string& tv);

}  // namespace eal
