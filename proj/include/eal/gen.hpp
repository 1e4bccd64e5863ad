#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "eal/depth.hpp"
#include "eal/machine.hpp"
#include "eal/term.hpp"
#include "eal/type.hpp"

namespace eal {

struct GenConfig {
  std::uint64_t seed = 0;
  Nat max_size = 40;
  Nat max_depth = 4;
  Nat region_count = 2;
  Nat max_threads = 2;
  bool with_stores = true;
  bool typed = false;
  bool pure_functional = false;  // no parallel/regions: the functional fragment
};

struct GeneratedProgram {
  TermPtr term;  // closed
  RegionDepthContext regions;
  RegionTypeContext region_types;  // typed mode only
};

// Derivation-directed generation: the output passes check_depth at delta 0
// by construction.
GeneratedProgram gen_well_formed(const GenConfig& cfg);

// Fully annotated, forall-free programs passing `check` by construction.
GeneratedProgram gen_typed(const GenConfig& cfg);

struct OracleConfig {
  SchedulerPolicy policy{PolicyMode::Seeded, 1, CopyPreference::Copy};
  Nat step_budget = 200;
  std::size_t explore_budget = 400;
  bool also_exhaustive = true;
  bool typed = false;
  std::uint64_t digit_cap = 100000;
};

struct OracleReport {
  bool ok = true;
  std::vector<std::string> violations;
  std::size_t steps_checked = 0;
  std::size_t tower_checked = 0;
  TermPtr counterexample;  // minimized witness when !ok
};

// Per-step checks along traces: well-formedness preservation, depth
// non-increase, substitution depth bound, strict mu decrease, tower
// decrease (when exact), the size-vs-measure bound, subject reduction in
// typed mode, and progress classification at stuck states.
OracleReport run_oracles(const GeneratedProgram& gp, const OracleConfig& cfg);

// Shrinks `term` by replacing subterms with * while `still_interesting`
// holds; used for counterexample reports.
TermPtr shrink(const TermPtr& term, const std::function<bool(const TermPtr&)>& still_interesting,
               int max_rounds = 3);

}  // namespace eal
