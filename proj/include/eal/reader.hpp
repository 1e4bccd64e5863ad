#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "eal/term.hpp"
#include "eal/type.hpp"

namespace eal {

struct SyntaxError : EalError {
  int line = 0, col = 0;
  SyntaxError(int l, int c, const std::string& msg)
      : EalError("SyntaxError",
                 "syntax error at " + std::to_string(l) + ":" + std::to_string(c) + ": " + msg),
        line(l),
        col(c) {}
};

struct RegionDecl {
  std::string name;
  std::optional<Nat> depth;
  TypePtr type;  // optional value-type
};

struct AddressDecl {
  std::string name;
  std::string region;
};

struct VarDecl {
  std::string name;
  Nat depth = 0;
  TypePtr type;  // optional
};

// A `.eal` compilation unit: declarations followed by a program body.
struct SourceUnit {
  std::vector<RegionDecl> regions;
  std::vector<AddressDecl> addresses;
  std::vector<VarDecl> vars;
  std::map<std::string, TypePtr> aliases;
  TermPtr body;

  RegionDepthContext region_depths() const;  // declared depths (0 when omitted)
  RegionTypeContext region_types() const;
  TypedVarContext var_types() const;
  std::map<std::string, Nat> var_depths() const;
};

SourceUnit parse_unit(const std::string& text);

// Convenience for inline snippets: undeclared get/set/store operands are
// read as region constants; free identifiers stay variables.
TermPtr parse_term(const std::string& text);

TypePtr parse_type(const std::string& text);

std::string print_term(const TermPtr& t);
std::string print_unit(const SourceUnit& u);

// Positional binder renaming; used as a structural-equivalence key.
std::string canonical_key(const TermPtr& t);

}  // namespace eal
