#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "eal/church.hpp"
#include "eal/term.hpp"
#include "eal/type.hpp"

namespace eal {

struct StdlibEntry {
  std::string name;
  std::string source;         // concrete syntax as shipped/generated
  TermPtr term;               // resolved against earlier entries
  TypePtr type;               // declared type
  Nat delta = 0;              // judgement depth the entry checks at
  RegionTypeContext regions;  // per-entry region context (usually empty)
  std::vector<std::pair<std::string, std::string>> addresses;  // name -> region
  Nat arity = 0;
  Nat result_bangs = 0;       // p in ... -o !^p N, for arithmetic entries
  std::string provenance;
};

class StdlibCatalog {
 public:
  static const StdlibCatalog& get();

  const std::vector<StdlibEntry>& entries() const { return entries_; }
  const StdlibEntry* find(const std::string& name) const;

  // Substitutes catalog terms for free occurrences of catalog names.
  TermPtr resolve(const TermPtr& t) const;

  struct CheckOutcome {
    std::string name;
    bool ok = false;
    std::string error;
  };
  std::vector<CheckOutcome> verify_all() const;

 private:
  StdlibCatalog();
  std::vector<StdlibEntry> entries_;
};

std::string stdlib_dir();
std::string corpus_dir();
std::string read_file(const std::string& path);

struct DecodeResult {
  std::optional<Nat> value;
  std::string error;  // NotANumeral or BudgetExceeded when !value
  bool ok() const { return value.has_value(); }
};

// Strong-normalizes and matches against the numeral scheme.
DecodeResult decode(const TermPtr& m, Nat budget = 2'000'000);

using HostFn = std::function<std::uint64_t(const std::vector<std::uint64_t>&)>;

struct RepSample {
  std::vector<std::uint64_t> inputs;
  std::uint64_t want = 0;
  std::optional<Nat> got;
  bool pass = false;
  std::string note;
};

struct RepReport {
  std::string name;
  bool pass = true;
  std::vector<RepSample> samples;
};

// Applies the term to numerals, strong-normalizes, strips `result_bangs`
// bangs and compares against the host function.
RepReport verify_representation(const std::string& name, const TermPtr& term, Nat arity,
                                Nat result_bangs, const HostFn& host,
                                const std::vector<std::vector<std::uint64_t>>& samples,
                                Nat budget = 2'000'000);
RepReport verify_representation(const StdlibEntry& e, const HostFn& host,
                                const std::vector<std::vector<std::uint64_t>>& samples,
                                Nat budget = 2'000'000);

// A combinator outside the named catalog (built by lifting/composition).
struct BuiltEntry {
  TermPtr term;
  TypePtr type;
  std::vector<Nat> input_bangs;  // each input has type !^j N
  Nat result_bangs = 0;
  Nat arity = 0;
};

BuiltEntry built_from(const StdlibEntry& e);

// Church list of the given elements.
TermPtr list_of(const std::vector<TermPtr>& elems, const TypePtr& elem_type);
TypePtr ty_list(const TypePtr& elem_type);

// T^i : lifts every input and the result under one more bang, i times.
BuiltEntry lift_inputs(const BuiltEntry& base, Nat levels);

// <F> : pre-composes coercions so all inputs take bare numerals.
BuiltEntry coerce_inputs(const BuiltEntry& base);

// g(f_1(xs), ..., f_m(xs)) with the bang bookkeeping of the appendix.
BuiltEntry compose_entries(const BuiltEntry& g, const std::vector<BuiltEntry>& fs);

// Bounded sum/product of f(i, xs) for i = 0..n; f must have bare inputs and
// result (p = 0).
BuiltEntry bounded_entry(const BuiltEntry& f, bool product);

}  // namespace eal
