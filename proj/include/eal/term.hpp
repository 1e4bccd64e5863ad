#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace eal {

using Nat = std::uint32_t;

struct Type;
using TypePtr = std::shared_ptr<const Type>;

struct Term;
using TermPtr = std::shared_ptr<const Term>;

// Errors raised on contract violations (unknown region, substitution of a
// non-address into region position, ...). Checker verdicts are not
// exceptions; see depth.hpp / typecheck.hpp.
struct EalError : std::runtime_error {
  std::string kind;
  EalError(std::string k, const std::string& msg)
      : std::runtime_error(msg), kind(std::move(k)) {}
};

// Operand of get/set/store and payload of a region-constant value.
// A ν-generated address belongs to a region; a variable stands for an
// address to be substituted later.
struct RegionRef {
  enum class Kind : std::uint8_t { Region, Address, Var };
  Kind kind = Kind::Region;
  std::string name;    // region name, address name, or variable name
  std::string region;  // owning region (Address only)

  static RegionRef mk_region(std::string r) { return {Kind::Region, std::move(r), {}}; }
  static RegionRef mk_address(std::string a, std::string r) {
    return {Kind::Address, std::move(a), std::move(r)};
  }
  static RegionRef mk_var(std::string x) { return {Kind::Var, std::move(x), {}}; }

  bool is_var() const { return kind == Kind::Var; }
  bool same_cell(const RegionRef& o) const { return kind == o.kind && name == o.name; }
  // Region governing depth/typing; Var has none.
  const std::string& region_name() const {
    if (kind == Kind::Region) return name;
    if (kind == Kind::Address) return region;
    throw EalError("InternalError", "region_name on a variable reference");
  }
};

enum class TermKind : std::uint8_t {
  Unit,       // *
  Var,        // x
  RegionVal,  // a region or address used as a value
  Lam,        // \x. M          (child0 = body)
  App,        // M N            (child0 = fn, child1 = arg)
  Bang,       // !M             (child0)
  LetBang,    // let !x = N in M  (child0 = scrutinee, child1 = body)
  Get,        // get(rho)
  Set,        // set(rho, V)    (child0 = value)
  Store,      // rho <= V       (child0 = value)
  Par,        // P | Q          (child0, child1)
  New,        // new x:r in M   (child0 = body)
  TyAbs,      // /\t. M         (child0) -- erases to child0
  TyApp,      // M [A]          (child0) -- erases to child0
};

struct Term {
  TermKind kind;
  std::string name;   // Var name; binder of Lam/LetBang/New; tvar of TyAbs
  RegionRef ref;      // RegionVal/Get/Set/Store
  std::string region; // region annotation of New
  TypePtr ann;        // binder annotation (Lam, LetBang) or TyApp argument
  TermPtr child0, child1;
};

TermPtr mk_unit();
TermPtr mk_var(std::string x);
TermPtr mk_region_val(RegionRef r);
TermPtr mk_lam(std::string x, TermPtr body, TypePtr ann = nullptr);
TermPtr mk_app(TermPtr f, TermPtr a);
TermPtr mk_bang(TermPtr m);
TermPtr mk_let_bang(std::string x, TermPtr scrutinee, TermPtr body, TypePtr ann = nullptr);
TermPtr mk_get(RegionRef r);
TermPtr mk_set(RegionRef r, TermPtr v);
TermPtr mk_store(RegionRef r, TermPtr v);
TermPtr mk_par(TermPtr l, TermPtr r);
TermPtr mk_new(std::string x, std::string region, TermPtr body);
TermPtr mk_tyabs(std::string t, TermPtr body);
TermPtr mk_tyapp(TermPtr body, TypePtr arg);

// Values per the program grammar: *, regions/addresses, variables,
// abstractions and !V.
bool is_value(const TermPtr& t);

// Drops type abstraction/application nodes and binder annotations.
TermPtr erase(const TermPtr& t);
bool has_annotations(const TermPtr& t);

std::set<std::string> free_vars(const TermPtr& t);
Nat fo_count(const std::string& x, const TermPtr& t);

// Capture-avoiding substitution of v for free x. Substituting a term that
// is not a variable/region/address into region position throws
// EalError("InvalidSubstitution").
TermPtr subst(const TermPtr& t, const TermPtr& v, const std::string& x);

bool alpha_equal(const TermPtr& a, const TermPtr& b);

// Renames binders so that all bound names are pairwise distinct and
// disjoint from free names. Applied once at parse time.
TermPtr canonical_rename(const TermPtr& t);

// One AST node, addressed by a word over {0,1}: unary constructors extend
// the path with 0, binary ones with 0/1. Computed on the erased tree.
struct Occurrence {
  std::string path;
  TermKind kind;
  Nat naive_depth = 0;
  std::optional<std::string> store_region;  // set when the path crosses a store
};

std::vector<Occurrence> occurrences(const TermPtr& t);

using RegionDepthContext = std::map<std::string, Nat>;

Nat naive_depth(const TermPtr& t);
// Occurrences under a store get R(region) added. Throws
// EalError("UnknownRegion") if R misses a region the program mentions.
Nat revised_depth(const TermPtr& t, const RegionDepthContext& R);
Nat revised_depth_of(const Occurrence& o, const RegionDepthContext& R);

// Set of regions mentioned by the program (through refs and addresses).
std::set<std::string> regions_of(const TermPtr& t);

// Path of the first store node that does not sit in static position
// (i.e. its path from the root crosses something other than Par).
std::optional<std::string> ill_placed_store(const TermPtr& t);

struct StoreEntry {
  RegionRef ref;  // Region or Address
  TermPtr value;
};

// Flattened structural-equivalence normal form: top-level parallel spine
// split into store-free threads and a store bag.
struct CanonicalProgram {
  std::vector<TermPtr> threads;
  std::vector<StoreEntry> store;

  TermPtr reassemble() const;
};

// Throws EalError("IllPlacedStore") when a store occurs under a non-static
// context.
CanonicalProgram canonicalize(const TermPtr& t);

// Equality of canonical forms as multisets, modulo alpha.
bool canonical_equal(const CanonicalProgram& a, const CanonicalProgram& b);

TermPtr subterm_at(const TermPtr& t, const std::string& path);
TermPtr replace_at(const TermPtr& t, const std::string& path, const TermPtr& repl);

}  // namespace eal
