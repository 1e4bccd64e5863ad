#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>

#include "eal/term.hpp"

namespace eal {

enum class TypeKind : std::uint8_t {
  Var,        // t
  Unit,       // 1
  Behaviour,  // B
  Arrow,      // A -o alpha      (a = A, b = alpha)
  Bang,       // !A              (a)
  Forall,     // forall t. A     (name = t, a)
  Region,     // Reg r A         (name = r, a)
};

struct Type {
  TypeKind kind;
  std::string name;  // tvar, forall binder, or region
  TypePtr a, b;
};

TypePtr ty_var(std::string t);
TypePtr ty_unit();
TypePtr ty_behaviour();
TypePtr ty_arrow(TypePtr a, TypePtr b);
TypePtr ty_bang(TypePtr a);
TypePtr ty_bangs(TypePtr a, Nat n);
TypePtr ty_forall(std::string t, TypePtr a);
TypePtr ty_region(std::string r, TypePtr a);

// Value-types exclude the behaviour type B everywhere except to the right
// of an arrow.
bool is_value_type(const TypePtr& t);

bool alpha_equal_types(const TypePtr& a, const TypePtr& b);

std::set<std::string> free_tvars(const TypePtr& t);

// Capture-avoiding [B/t]A.
TypePtr type_subst(const TypePtr& a, const TypePtr& b, const std::string& t);

std::string print_type(const TypePtr& t);

struct RegionTypeEntry {
  Nat depth = 0;
  TypePtr type;
};
using RegionTypeContext = std::map<std::string, RegionTypeEntry>;

struct TypedVarEntry {
  Nat depth = 0;
  TypePtr type;
};
using TypedVarContext = std::map<std::string, TypedVarEntry>;

// R |- alpha of Table 8; on failure reports the first failing premise.
struct WfResult {
  bool ok = true;
  std::string failing;  // human-readable premise when !ok
};
WfResult wf_type(const RegionTypeContext& R, const TypePtr& t);
WfResult wf_region_context(const RegionTypeContext& R);
WfResult wf_var_context(const RegionTypeContext& R, const TypedVarContext& G);

RegionDepthContext depth_projection(const RegionTypeContext& R);

}  // namespace eal
