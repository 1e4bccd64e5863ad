#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "eal/term.hpp"

namespace eal {

enum class RuleTag : std::uint8_t { Beta, LetBang, SetWrite, GetConsume, GetCopy, NuAlloc };

std::string rule_tag_name(RuleTag t);

struct RedexChoice {
  std::size_t thread = 0;
  std::string path;  // occurrence of the redex inside the thread
  RuleTag rule = RuleTag::Beta;
  std::optional<std::size_t> entry;  // store index for GetConsume/GetCopy

  bool operator==(const RedexChoice& o) const {
    return thread == o.thread && path == o.path && rule == o.rule && entry == o.entry;
  }
};

struct MachineState {
  CanonicalProgram prog;
  Nat steps = 0;
  std::uint64_t next_addr = 0;

  // Erases annotations unless asked to keep them (typed stepping only makes
  // sense for forall-free programs).
  static MachineState load(const TermPtr& program, bool keep_annotations = false);

  TermPtr program() const { return prog.reassemble(); }
  std::string key() const;
  bool all_values() const;
};

// Complete modulo structural equivalence: one GetConsume per matching store
// entry, one GetCopy per banged entry under a let-get, single functional /
// write / alloc redex per thread spine.
std::vector<RedexChoice> enumerate_redexes(const MachineState& s);

// Applies exactly the chosen rewrite; throws EalError("InvalidChoice") when
// the choice does not match the state.
MachineState step(const MachineState& s, const RedexChoice& c);

enum class PolicyMode : std::uint8_t { Seeded, Deterministic, Exhaustive };
enum class CopyPreference : std::uint8_t { Copy, Consume };

struct SchedulerPolicy {
  PolicyMode mode = PolicyMode::Deterministic;
  std::uint64_t seed = 0;
  CopyPreference copy_pref = CopyPreference::Copy;
};

enum class RunStatus : std::uint8_t { Value, Stuck, BudgetExceeded };

struct TraceStep {
  RedexChoice choice;
  MachineState after;
};

struct Trace {
  MachineState initial;
  std::vector<TraceStep> steps;
  RunStatus status = RunStatus::Stuck;
};

Trace run(const MachineState& s, const SchedulerPolicy& policy, Nat budget);

struct ExploreResult {
  std::vector<MachineState> finals;
  std::size_t states_visited = 0;
  bool budget_exceeded = false;
};

using EdgeCallback =
    std::function<void(const MachineState&, const RedexChoice&, const MachineState&)>;

// Exhaustive interleaving exploration. Thread-deterministic steps (Beta,
// LetBang, NuAlloc, SetWrite) commute with every other thread's step and are
// taken eagerly; branching happens at reads. The reachable final-state set
// is unchanged.
ExploreResult explore(const MachineState& s, std::size_t state_budget,
                      const EdgeCallback& on_edge = nullptr);

// Arbitrary-context functional reduction of the store-free fragment:
// E[(\x.M)N] and E[let !x = !N in M] for any context E.
std::vector<std::string> lambda_bang_redexes(const TermPtr& t);
TermPtr lambda_bang_step(const TermPtr& t, const std::string& path);

// Leftmost-outermost strong beta-reduction (under lambdas and bangs) to
// normal form; nullopt when the budget runs out.
std::optional<TermPtr> strong_normalize(const TermPtr& m, Nat budget);

struct StuckReport {
  std::vector<std::size_t> values;
  struct Blocked {
    std::size_t thread;
    std::string cell;   // region or address name
    std::string path;   // occurrence of the blocked get
  };
  std::vector<Blocked> blocked;
  std::vector<std::size_t> unclassified;
  bool progress_violation = false;  // typed+closed state with an unclassified thread
};

StuckReport classify_stuck(const MachineState& s, bool typed_and_closed = false);

}  // namespace eal
