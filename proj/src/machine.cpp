#include "eal/machine.hpp"

#include <algorithm>
#include <deque>
#include <random>

#include "eal/reader.hpp"

namespace eal {

std::string rule_tag_name(RuleTag t) {
  switch (t) {
    case RuleTag::Beta: return "Beta";
    case RuleTag::LetBang: return "LetBang";
    case RuleTag::SetWrite: return "SetWrite";
    case RuleTag::GetConsume: return "GetConsume";
    case RuleTag::GetCopy: return "GetCopy";
    case RuleTag::NuAlloc: return "NuAlloc";
  }
  return "?";
}

MachineState MachineState::load(const TermPtr& program, bool keep_annotations) {
  MachineState s;
  s.prog = canonicalize(keep_annotations ? program : erase(program));
  return s;
}

bool MachineState::all_values() const {
  for (const auto& t : prog.threads)
    if (!is_value(t)) return false;
  return true;
}

std::string MachineState::key() const {
  std::vector<std::string> parts;
  parts.reserve(prog.threads.size() + prog.store.size());
  for (const auto& t : prog.threads) parts.push_back("T " + canonical_key(t));
  for (const auto& e : prog.store)
    parts.push_back("S " + e.ref.name + " <= " + canonical_key(e.value));
  std::sort(parts.begin(), parts.end());
  std::string out;
  for (auto& p : parts) {
    out += p;
    out += '\n';
  }
  return out;
}

namespace {

bool cell_matches(const RegionRef& op, const RegionRef& entry) {
  return op.kind == entry.kind && op.name == entry.name;
}

void enumerate_thread(const MachineState& s, std::size_t ti, std::vector<RedexChoice>& out) {
  TermPtr cur = s.prog.threads[ti];
  std::string path;
  for (;;) {
    switch (cur->kind) {
      case TermKind::App: {
        if (!is_value(cur->child0)) {
          cur = cur->child0;
          path.push_back('0');
          continue;
        }
        if (!is_value(cur->child1)) {
          cur = cur->child1;
          path.push_back('1');
          continue;
        }
        if (cur->child0->kind == TermKind::Lam)
          out.push_back({ti, path, RuleTag::Beta, std::nullopt});
        return;
      }
      case TermKind::Bang: {
        if (is_value(cur->child0)) return;  // whole thread position is a value
        cur = cur->child0;
        path.push_back('0');
        continue;
      }
      case TermKind::LetBang: {
        const auto& scrut = cur->child0;
        if (scrut->kind == TermKind::Get && !scrut->ref.is_var()) {
          for (std::size_t j = 0; j < s.prog.store.size(); ++j) {
            const auto& e = s.prog.store[j];
            if (cell_matches(scrut->ref, e.ref) && e.value->kind == TermKind::Bang)
              out.push_back({ti, path, RuleTag::GetCopy, j});
          }
        }
        if (!is_value(scrut)) {
          cur = scrut;
          path.push_back('0');
          continue;
        }
        if (scrut->kind == TermKind::Bang)
          out.push_back({ti, path, RuleTag::LetBang, std::nullopt});
        return;
      }
      case TermKind::Get: {
        if (cur->ref.is_var()) return;
        for (std::size_t j = 0; j < s.prog.store.size(); ++j)
          if (cell_matches(cur->ref, s.prog.store[j].ref))
            out.push_back({ti, path, RuleTag::GetConsume, j});
        return;
      }
      case TermKind::Set: {
        if (!cur->ref.is_var() && is_value(cur->child0))
          out.push_back({ti, path, RuleTag::SetWrite, std::nullopt});
        return;  // no evaluation context descends into set
      }
      case TermKind::New:
        out.push_back({ti, path, RuleTag::NuAlloc, std::nullopt});
        return;
      default:
        return;  // values, stray parallels, annotation nodes: no redex here
    }
  }
}

}  // namespace

std::vector<RedexChoice> enumerate_redexes(const MachineState& s) {
  std::vector<RedexChoice> out;
  for (std::size_t i = 0; i < s.prog.threads.size(); ++i) enumerate_thread(s, i, out);
  return out;
}

MachineState step(const MachineState& s, const RedexChoice& c) {
  auto all = enumerate_redexes(s);
  if (std::find(all.begin(), all.end(), c) == all.end())
    throw EalError("InvalidChoice", "redex choice does not match the state");

  MachineState next = s;
  next.steps = s.steps + 1;
  TermPtr thread = s.prog.threads[c.thread];
  TermPtr redex = subterm_at(thread, c.path);
  TermPtr result;

  switch (c.rule) {
    case RuleTag::Beta:
      result = subst(redex->child0->child0, redex->child1, redex->child0->name);
      break;
    case RuleTag::LetBang:
      result = subst(redex->child1, redex->child0->child0, redex->name);
      break;
    case RuleTag::SetWrite:
      result = mk_unit();
      next.prog.store.push_back({redex->ref, redex->child0});
      break;
    case RuleTag::GetConsume: {
      result = s.prog.store[*c.entry].value;
      next.prog.store.erase(next.prog.store.begin() + static_cast<long>(*c.entry));
      break;
    }
    case RuleTag::GetCopy: {
      auto banged = s.prog.store[*c.entry].value;  // !W
      result = subst(redex->child1, banged->child0, redex->name);
      break;
    }
    case RuleTag::NuAlloc: {
      std::string addr = redex->name + "#" + std::to_string(next.next_addr++);
      result = subst(redex->child0, mk_region_val(RegionRef::mk_address(addr, redex->region)),
                     redex->name);
      break;
    }
  }

  TermPtr new_thread = replace_at(thread, c.path, result);
  // Re-canonicalize: a step can expose parallel composition at the top of
  // the thread.
  auto flat = canonicalize(new_thread);
  next.prog.threads.erase(next.prog.threads.begin() + static_cast<long>(c.thread));
  next.prog.threads.insert(next.prog.threads.begin() + static_cast<long>(c.thread),
                           flat.threads.begin(), flat.threads.end());
  for (auto& e : flat.store) next.prog.store.push_back(std::move(e));
  return next;
}

namespace {

bool is_forceable(RuleTag t) {
  switch (t) {
    case RuleTag::Beta:
    case RuleTag::LetBang:
    case RuleTag::NuAlloc:
    case RuleTag::SetWrite:
      return true;
    default:
      return false;
  }
}

std::vector<RedexChoice> ordered_choices(std::vector<RedexChoice> cs, CopyPreference pref) {
  std::stable_sort(cs.begin(), cs.end(), [&](const RedexChoice& a, const RedexChoice& b) {
    if (a.thread != b.thread) return a.thread < b.thread;
    bool ac = a.rule == RuleTag::GetCopy, bc = b.rule == RuleTag::GetCopy;
    if (ac != bc) return pref == CopyPreference::Copy ? ac : bc;
    if (a.entry && b.entry && *a.entry != *b.entry) return *a.entry < *b.entry;
    return a.path < b.path;
  });
  return cs;
}

}  // namespace

Trace run(const MachineState& s, const SchedulerPolicy& policy, Nat budget) {
  Trace tr;
  tr.initial = s;
  std::mt19937_64 rng(policy.seed);
  MachineState cur = s;
  for (Nat i = 0;; ++i) {
    auto cs = enumerate_redexes(cur);
    if (cs.empty()) {
      tr.status = cur.all_values() ? RunStatus::Value : RunStatus::Stuck;
      return tr;
    }
    if (i >= budget) {
      tr.status = RunStatus::BudgetExceeded;
      return tr;
    }
    RedexChoice pick;
    if (policy.mode == PolicyMode::Seeded) {
      auto ordered = ordered_choices(std::move(cs), policy.copy_pref);
      pick = ordered[std::uniform_int_distribution<std::size_t>(0, ordered.size() - 1)(rng)];
    } else {
      pick = ordered_choices(std::move(cs), policy.copy_pref)[0];
    }
    cur = step(cur, pick);
    tr.steps.push_back({pick, cur});
  }
}

ExploreResult explore(const MachineState& s0, std::size_t state_budget,
                      const EdgeCallback& on_edge) {
  ExploreResult res;
  std::set<std::string> seen, final_keys;
  std::deque<MachineState> work;
  work.push_back(s0);
  seen.insert(s0.key());

  while (!work.empty()) {
    if (res.states_visited >= state_budget) {
      res.budget_exceeded = true;
      return res;
    }
    MachineState s = work.front();
    work.pop_front();
    ++res.states_visited;

    // Run thread-deterministic steps to quiescence.
    bool already_seen = false;
    for (;;) {
      auto cs = enumerate_redexes(s);
      if (cs.empty()) {
        if (final_keys.insert(s.key()).second) res.finals.push_back(s);
        already_seen = true;
        break;
      }
      auto forced = std::find_if(cs.begin(), cs.end(),
                                 [](const RedexChoice& c) { return is_forceable(c.rule); });
      if (forced == cs.end()) {
        // branch over every read choice
        for (const auto& c : ordered_choices(cs, CopyPreference::Copy)) {
          auto nxt = step(s, c);
          if (on_edge) on_edge(s, c, nxt);
          if (seen.insert(nxt.key()).second) work.push_back(nxt);
        }
        already_seen = true;
        break;
      }
      auto nxt = step(s, *forced);
      if (on_edge) on_edge(s, *forced, nxt);
      if (!seen.insert(nxt.key()).second) {
        already_seen = true;
        break;
      }
      s = std::move(nxt);
      ++res.states_visited;
      if (res.states_visited >= state_budget) {
        res.budget_exceeded = true;
        return res;
      }
    }
    (void)already_seen;
  }
  return res;
}

namespace {

bool is_table2_redex(const TermPtr& t) {
  if (t->kind == TermKind::App && t->child0->kind == TermKind::Lam) return true;
  if (t->kind == TermKind::LetBang && t->child0->kind == TermKind::Bang) return true;
  return false;
}

void collect_redexes(const TermPtr& t, std::string& path, std::vector<std::string>& out) {
  if (is_table2_redex(t)) out.push_back(path);
  if (t->child0) {
    path.push_back('0');
    collect_redexes(t->child0, path, out);
    path.pop_back();
  }
  if (t->child1) {
    path.push_back('1');
    collect_redexes(t->child1, path, out);
    path.pop_back();
  }
}

}  // namespace

std::vector<std::string> lambda_bang_redexes(const TermPtr& t) {
  std::vector<std::string> out;
  std::string path;
  collect_redexes(erase(t), path, out);
  return out;
}

TermPtr lambda_bang_step(const TermPtr& t, const std::string& path) {
  auto e = erase(t);
  auto redex = subterm_at(e, path);
  if (!is_table2_redex(redex)) throw EalError("InvalidChoice", "no functional redex at path");
  TermPtr result;
  if (redex->kind == TermKind::App)
    result = subst(redex->child0->child0, redex->child1, redex->child0->name);
  else
    result = subst(redex->child1, redex->child0->child0, redex->name);
  return replace_at(e, path, result);
}

namespace {

// Rewrites the leftmost-outermost functional redex in place; returns null
// when the term is normal.
TermPtr contract_first(const TermPtr& t) {
  if (is_table2_redex(t)) {
    if (t->kind == TermKind::App)
      return subst(t->child0->child0, t->child1, t->child0->name);
    return subst(t->child1, t->child0->child0, t->name);
  }
  if (t->child0) {
    if (auto c = contract_first(t->child0)) {
      Term copy = *t;
      copy.child0 = c;
      return std::make_shared<Term>(std::move(copy));
    }
  }
  if (t->child1) {
    if (auto c = contract_first(t->child1)) {
      Term copy = *t;
      copy.child1 = c;
      return std::make_shared<Term>(std::move(copy));
    }
  }
  return nullptr;
}

}  // namespace

std::optional<TermPtr> strong_normalize(const TermPtr& m, Nat budget) {
  TermPtr cur = erase(m);
  for (Nat i = 0; i < budget; ++i) {
    auto next = contract_first(cur);
    if (!next) return cur;
    cur = next;
  }
  if (!contract_first(cur)) return cur;
  return std::nullopt;
}

StuckReport classify_stuck(const MachineState& s, bool typed_and_closed) {
  StuckReport rep;
  for (std::size_t i = 0; i < s.prog.threads.size(); ++i) {
    TermPtr cur = s.prog.threads[i];
    if (is_value(cur)) {
      rep.values.push_back(i);
      continue;
    }
    // walk the call-by-value spine to its end
    std::string path;
    bool classified = false;
    for (bool walking = true; walking;) {
      switch (cur->kind) {
        case TermKind::App:
          if (!is_value(cur->child0)) {
            cur = cur->child0;
            path.push_back('0');
          } else if (!is_value(cur->child1)) {
            cur = cur->child1;
            path.push_back('1');
          } else {
            walking = false;
          }
          break;
        case TermKind::Bang:
          cur = cur->child0;
          path.push_back('0');
          break;
        case TermKind::LetBang:
          if (!is_value(cur->child0)) {
            cur = cur->child0;
            path.push_back('0');
          } else {
            walking = false;
          }
          break;
        case TermKind::Get:
          if (!cur->ref.is_var()) {
            rep.blocked.push_back({i, cur->ref.name, path});
            classified = true;
          }
          walking = false;
          break;
        default:
          walking = false;
      }
      if (classified) break;
    }
    if (!classified) rep.unclassified.push_back(i);
  }
  rep.progress_violation = typed_and_closed && !rep.unclassified.empty();
  return rep;
}

}  // namespace eal
