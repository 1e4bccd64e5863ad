#include "eal/gen.hpp"

#include <random>

#include "eal/measure.hpp"
#include "eal/reader.hpp"
#include "eal/typecheck.hpp"

namespace eal {

namespace {

struct GVar {
  std::string name;
  Nat depth = 0;
  int quota = 0;
  TypePtr type;       // typed mode
  std::string alias;  // nu-bound address variables: owning region
  bool is_alias() const { return !alias.empty(); }
};

struct Gen {
  std::mt19937_64 rng;
  GenConfig cfg;
  std::vector<std::string> regions;
  RegionDepthContext rdepth;
  RegionTypeContext rtypes;
  std::vector<GVar> env;
  long budget = 0;
  int fresh = 0;

  explicit Gen(const GenConfig& c) : rng(c.seed), cfg(c), budget((long)c.max_size) {}

  std::size_t pick(std::size_t n) {
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
  }
  bool coin(double p) { return std::uniform_real_distribution<double>(0, 1)(rng) < p; }
  std::string fresh_name(const char* base) { return base + std::to_string(fresh++); }

  std::vector<std::size_t> vars_at(Nat delta, const TypePtr& want) {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < env.size(); ++i) {
      const auto& v = env[i];
      if (v.is_alias() || v.quota <= 0 || v.depth != delta) continue;
      if (want && !alpha_equal_types(v.type, want)) continue;
      out.push_back(i);
    }
    return out;
  }

  std::vector<std::string> regions_at(Nat delta) {
    std::vector<std::string> out;
    for (const auto& r : regions)
      if (rdepth.at(r) == delta) out.push_back(r);
    return out;
  }

  // ---------- untyped (depth-directed) ----------

  TermPtr leaf(Nat delta) {
    auto vs = vars_at(delta, nullptr);
    auto rs = cfg.with_stores ? regions_at(delta) : std::vector<std::string>{};
    std::vector<int> menu;  // 0 unit, 1 var, 2 get, 3 region const
    menu.push_back(0);
    if (!vs.empty()) {
      menu.push_back(1);
      menu.push_back(1);
    }
    if (!rs.empty()) menu.push_back(2);
    if (!regions.empty() && coin(0.1)) menu.push_back(3);
    switch (menu[pick(menu.size())]) {
      case 1: {
        auto& v = env[vs[pick(vs.size())]];
        --v.quota;
        return mk_var(v.name);
      }
      case 2:
        return mk_get(RegionRef::mk_region(rs[pick(rs.size())]));
      case 3:
        return mk_region_val(RegionRef::mk_region(regions[pick(regions.size())]));
      default:
        return mk_unit();
    }
  }

  TermPtr value(Nat delta, Nat room) {
    --budget;
    if (budget <= 0) return mk_unit();
    double roll = std::uniform_real_distribution<double>(0, 1)(rng);
    if (roll < 0.25) {
      auto x = fresh_name("v");
      env.push_back({x, delta, 1, nullptr, ""});
      auto body = term(delta, room);
      env.pop_back();
      return mk_lam(x, body);
    }
    if (roll < 0.45 && room > 0) return mk_bang(value(delta + 1, room - 1));
    auto l = leaf(delta);
    if (is_value(l)) return l;
    return mk_unit();  // a get leaf is not a value
  }

  TermPtr term(Nat delta, Nat room) {
    --budget;
    if (budget <= 0) return leaf(delta);
    double roll = std::uniform_real_distribution<double>(0, 1)(rng);
    if (roll < 0.15) {  // abstraction
      auto x = fresh_name("v");
      env.push_back({x, delta, 1, nullptr, ""});
      auto body = term(delta, room);
      env.pop_back();
      return mk_lam(x, body);
    }
    if (roll < 0.35) {  // application, biased toward call-by-value redexes
      TermPtr fn;
      if (coin(0.6)) {
        auto x = fresh_name("v");
        env.push_back({x, delta, 1, nullptr, ""});
        auto body = term(delta, room);
        env.pop_back();
        fn = mk_lam(x, body);
      } else {
        fn = term(delta, room);
      }
      auto arg = coin(0.7) ? value(delta, room) : term(delta, room);
      return mk_app(fn, arg);
    }
    if (roll < 0.5 && room > 0) return mk_bang(term(delta + 1, room - 1));
    if (roll < 0.65) {  // let !
      TermPtr scrut;
      auto rs = cfg.with_stores ? regions_at(delta) : std::vector<std::string>{};
      if (room > 0 && coin(0.5))
        scrut = mk_bang(value(delta + 1, room - 1));
      else if (!rs.empty() && coin(0.6))
        scrut = mk_get(RegionRef::mk_region(rs[pick(rs.size())]));
      else
        scrut = term(delta, room);
      auto x = fresh_name("v");
      env.push_back({x, delta + 1, 1 + (int)pick(3), nullptr, ""});
      auto body = term(delta, room);
      env.pop_back();
      return mk_let_bang(x, scrut, body);
    }
    if (roll < 0.73 && cfg.with_stores) {
      auto rs = regions_at(delta);
      if (!rs.empty()) return mk_set(RegionRef::mk_region(rs[pick(rs.size())]), value(delta, room));
    }
    if (roll < 0.78 && !regions.empty()) {  // nu binder
      auto r = regions[pick(regions.size())];
      auto x = fresh_name("a");
      env.push_back({x, 0, 0, nullptr, r});
      auto body = term(delta, room);
      env.pop_back();
      return mk_new(x, r, body);
    }
    if (roll < 0.82 && !cfg.pure_functional)
      return mk_par(term(delta, room), term(delta, room));
    return leaf(delta);
  }

  // ---------- typed (Table 9-directed) ----------

  // croom: bangs needed to construct a canonical inhabitant
  static Nat croom(const TypePtr& t) {
    switch (t->kind) {
      case TypeKind::Bang:
        return 1 + croom(t->a);
      case TypeKind::Arrow:
        return croom(t->b);
      default:
        return 0;
    }
  }

  TypePtr gen_vtype(Nat room, Nat size) {
    double roll = std::uniform_real_distribution<double>(0, 1)(rng);
    if (size == 0) return ty_unit();
    if (roll < 0.40) return ty_unit();
    if (roll < 0.60 && room > 0) return ty_bang(gen_vtype(room - 1, size - 1));
    if (roll < 0.90) return ty_arrow(gen_vtype(2, size - 1), gen_vtype(room, size - 1));
    if (!regions.empty()) {
      auto r = regions[pick(regions.size())];
      return ty_region(r, rtypes.at(r).type);
    }
    return ty_unit();
  }

  TermPtr inhabit(const TypePtr& a, Nat delta, Nat room) {
    switch (a->kind) {
      case TypeKind::Unit:
        return mk_unit();
      case TypeKind::Arrow: {
        auto x = fresh_name("v");
        return mk_lam(x, inhabit(a->b, delta, room), a->a);
      }
      case TypeKind::Bang:
        return mk_bang(inhabit(a->a, delta + 1, room > 0 ? room - 1 : 0));
      case TypeKind::Region:
        return mk_region_val(RegionRef::mk_region(a->name));
      default:
        return mk_unit();
    }
  }

  TermPtr typed_of(const TypePtr& a, Nat delta, Nat room) {
    --budget;
    auto vs = vars_at(delta, a);
    if (budget <= 0) {
      if (!vs.empty()) {
        auto& v = env[vs[pick(vs.size())]];
        --v.quota;
        return mk_var(v.name);
      }
      return inhabit(a, delta, room);
    }
    double roll = std::uniform_real_distribution<double>(0, 1)(rng);
    if (!vs.empty() && roll < 0.2) {
      auto& v = env[vs[pick(vs.size())]];
      --v.quota;
      return mk_var(v.name);
    }
    if (roll < 0.32) {  // identity redex at this type
      auto x = fresh_name("v");
      auto fn = mk_lam(x, mk_var(x), a);
      return mk_app(fn, typed_of(a, delta, room));
    }
    if (roll < 0.44 && room > 0) {  // let-bang wrapper
      TypePtr xt;
      TermPtr scrut;
      // a region holding a banged value makes a copyable read scrutinee
      if (cfg.with_stores && coin(0.4)) {
        for (const auto& r : regions) {
          const auto& e = rtypes.at(r);
          if (e.depth == delta && e.type->kind == TypeKind::Bang) {
            xt = e.type->a;
            scrut = mk_get(RegionRef::mk_region(r));
            break;
          }
        }
      }
      if (!scrut) {
        xt = gen_vtype(room - 1, 2);
        scrut = mk_bang(typed_of(xt, delta + 1, room - 1));
      }
      auto x = fresh_name("v");
      env.push_back({x, delta + 1, 2, xt, ""});
      auto body = typed_of(a, delta, room);
      env.pop_back();
      return mk_let_bang(x, scrut, body, xt);
    }
    if (roll < 0.48 && !regions.empty() && !cfg.pure_functional) {  // nu wrapper
      auto r = regions[pick(regions.size())];
      auto x = fresh_name("nu");
      env.push_back({x, 0, 0, nullptr, r});
      auto body = typed_of(a, delta, room);
      env.pop_back();
      return mk_new(x, r, body);
    }
    if (roll < 0.54) {  // application
      auto xt = gen_vtype(std::min<Nat>(room, 1), 2);
      auto x = fresh_name("v");
      env.push_back({x, delta, 1, xt, ""});
      auto body = typed_of(a, delta, room);
      env.pop_back();
      auto fn = mk_lam(x, body, xt);
      return mk_app(fn, typed_of(xt, delta, room));
    }
    // reads pinned at this depth with a matching content type
    if (roll < 0.62 && cfg.with_stores) {
      for (const auto& r : regions) {
        const auto& e = rtypes.at(r);
        if (e.depth == delta && alpha_equal_types(e.type, a)) return mk_get(RegionRef::mk_region(r));
      }
    }
    switch (a->kind) {
      case TypeKind::Unit: {
        if (cfg.with_stores && coin(0.3)) {
          for (const auto& r : regions) {
            const auto& e = rtypes.at(r);
            if (e.depth == delta && croom(e.type) <= room)
              return mk_set(RegionRef::mk_region(r), typed_value_of(e.type, delta, room));
          }
        }
        return mk_unit();
      }
      case TypeKind::Arrow: {
        auto x = fresh_name("v");
        env.push_back({x, delta, 1, a->a, ""});
        auto body = typed_of(a->b, delta, room);
        env.pop_back();
        return mk_lam(x, body, a->a);
      }
      case TypeKind::Bang:
        if (room > 0) return mk_bang(typed_of(a->a, delta + 1, room - 1));
        return inhabit(a, delta, room);
      case TypeKind::Region:
        return mk_region_val(RegionRef::mk_region(a->name));
      default:
        return inhabit(a, delta, room);
    }
  }

  TermPtr typed_value_of(const TypePtr& a, Nat delta, Nat room) {
    switch (a->kind) {
      case TypeKind::Unit:
        return mk_unit();
      case TypeKind::Region:
        return mk_region_val(RegionRef::mk_region(a->name));
      case TypeKind::Bang:
        return mk_bang(typed_value_of(a->a, delta + 1, room > 0 ? room - 1 : 0));
      case TypeKind::Arrow: {
        auto x = fresh_name("v");
        env.push_back({x, delta, 1, a->a, ""});
        auto body = typed_of(a->b, delta, room);
        env.pop_back();
        return mk_lam(x, body, a->a);
      }
      default:
        return mk_unit();
    }
  }
};

}  // namespace

GeneratedProgram gen_well_formed(const GenConfig& cfg) {
  Gen g(cfg);
  for (Nat i = 0; i < cfg.region_count; ++i) {
    auto name = "r" + std::to_string(i);
    g.regions.push_back(name);
    g.rdepth[name] = (Nat)g.pick(cfg.max_depth + 1);
  }
  Nat threads = 1 + (Nat)g.pick(std::max<Nat>(cfg.max_threads, 1));
  TermPtr prog = nullptr;
  for (Nat i = 0; i < threads; ++i) {
    auto t = g.term(0, cfg.max_depth);
    // administrative redex layers so every program exercises some steps
    for (Nat w = (Nat)g.pick(3); w-- > 0;) {
      if (g.coin(0.5) || cfg.max_depth == 0)
        t = mk_app(mk_lam(g.fresh_name("w"), t), g.value(0, cfg.max_depth));
      else
        t = mk_let_bang(g.fresh_name("w"), mk_bang(g.value(1, cfg.max_depth - 1)), t);
    }
    prog = prog ? mk_par(prog, t) : t;
  }
  if (cfg.with_stores) {
    Nat stores = (Nat)g.pick(3);
    for (Nat i = 0; i < stores && !g.regions.empty(); ++i) {
      auto r = g.regions[g.pick(g.regions.size())];
      auto v = g.value(g.rdepth[r], cfg.max_depth - g.rdepth[r]);
      prog = mk_par(prog, mk_store(RegionRef::mk_region(r), v));
    }
  }
  GeneratedProgram out{prog, g.rdepth, {}};
  auto res = check_depth(out.term, out.regions, {}, 0);
  if (!res.ok())
    throw EalError("GeneratorBug", "generated program is not well-formed: " +
                                       res.error->message + " in " + print_term(out.term));
  return out;
}

GeneratedProgram gen_typed(const GenConfig& cfg) {
  Gen g(cfg);
  for (Nat i = 0; i < cfg.region_count; ++i) {
    auto name = "r" + std::to_string(i);
    g.regions.push_back(name);
    Nat depth = (Nat)g.pick(cfg.max_depth);
    g.rdepth[name] = depth;
    g.rtypes[name] = {depth, nullptr};
  }
  // content types may mention other regions only through exact entries;
  // keep them region-free to stay well-formed
  for (auto& [r, e] : g.rtypes) {
    auto saved = g.regions;
    g.regions.clear();  // no Reg types inside contents
    e.type = g.gen_vtype(cfg.max_depth - e.depth, 2);
    g.regions = saved;
  }

  Nat threads = 1 + (Nat)g.pick(std::max<Nat>(cfg.max_threads, 1));
  TermPtr prog = nullptr;
  for (Nat i = 0; i < threads; ++i) {
    auto ty = g.gen_vtype(cfg.max_depth, 3);
    auto t = g.typed_of(ty, 0, cfg.max_depth);
    prog = prog ? mk_par(prog, t) : t;
  }
  if (cfg.with_stores) {
    Nat stores = (Nat)g.pick(3);
    for (Nat i = 0; i < stores && !g.regions.empty(); ++i) {
      auto r = g.regions[g.pick(g.regions.size())];
      const auto& e = g.rtypes.at(r);
      auto v = g.typed_value_of(e.type, e.depth, cfg.max_depth - e.depth);
      prog = mk_par(prog, mk_store(RegionRef::mk_region(r), v));
    }
  }
  GeneratedProgram out{prog, g.rdepth, g.rtypes};
  auto res = check(out.term, out.region_types, {}, 0);
  if (!res.ok())
    throw EalError("GeneratorBug", "generated program is ill-typed: " + res.error->render() +
                                       " in " + print_term(out.term));
  return out;
}

namespace {

Nat redex_depth(const TermPtr& thread, const std::string& path) {
  Nat d = 0;
  TermPtr cur = thread;
  for (char c : path) {
    if (cur->kind == TermKind::Bang) ++d;
    cur = c == '0' ? cur->child0 : cur->child1;
  }
  return d;
}

// Substitution depth bound at a functional step: the redex at depth i with
// binder depth i (beta) or i+1 (let/copy) cannot push occurrences deeper
// than the deeper of the two sides.
std::optional<std::string> check_subst_bound(const MachineState& before, const RedexChoice& c,
                                             const MachineState& after) {
  if (c.rule != RuleTag::Beta && c.rule != RuleTag::LetBang && c.rule != RuleTag::GetCopy)
    return std::nullopt;
  const auto& thread = before.prog.threads[c.thread];
  auto redex = subterm_at(thread, c.path);
  Nat i = redex_depth(thread, c.path);
  Nat lhs, rhs;
  if (c.rule == RuleTag::Beta) {
    rhs = std::max(i + naive_depth(redex->child0->child0), i + naive_depth(redex->child1));
  } else if (c.rule == RuleTag::LetBang) {
    rhs = std::max(i + naive_depth(redex->child1), i + 1 + naive_depth(redex->child0->child0));
  } else {
    auto stored = before.prog.store[*c.entry].value;  // !V
    rhs = std::max(i + naive_depth(redex->child1), i + 1 + naive_depth(stored->child0));
  }
  // the rewritten thread sits at the same index; skip when the step split
  // the thread and moved the paths around
  try {
    TermPtr result_container = after.prog.threads.at(c.thread);
    lhs = i + naive_depth(subterm_at(result_container, c.path));
  } catch (...) {
    return std::nullopt;
  }
  if (lhs > rhs)
    return "substitution pushed occurrences to depth " + std::to_string(lhs) +
           " > bound " + std::to_string(rhs);
  return std::nullopt;
}

}  // namespace

OracleReport run_oracles(const GeneratedProgram& gp, const OracleConfig& cfg) {
  OracleReport rep;
  auto violate = [&](const std::string& msg) {
    rep.ok = false;
    rep.violations.push_back(msg);
  };

  TypePtr alpha0;
  if (cfg.typed) {
    auto t0 = check(gp.term, gp.region_types, {}, 0);
    if (!t0.ok()) {
      violate("initial program ill-typed: " + t0.error->render());
      return rep;
    }
    alpha0 = t0.type;
  } else {
    auto d0 = check_depth(gp.term, gp.regions, {}, 0);
    if (!d0.ok()) {
      violate("initial program ill-formed: " + d0.error->message);
      return rep;
    }
  }

  auto st0 = MachineState::load(gp.term, /*keep_annotations=*/cfg.typed);
  Nat n = revised_depth(gp.term, gp.regions);

  auto check_edge = [&](const MachineState& before, const RedexChoice& c,
                        const MachineState& after) {
    ++rep.steps_checked;
    auto pb = before.program();
    auto pa = after.program();
    // preservation of the judgement
    if (cfg.typed) {
      auto t = check(pa, gp.region_types, {}, 0, alpha0);
      if (!t.ok())
        violate("subject reduction failed after " + rule_tag_name(c.rule) + ": " +
                t.error->render());
    }
    auto d = check_depth(pa, gp.regions, {}, 0);
    if (!d.ok())
      violate("well-formedness lost after " + rule_tag_name(c.rule) + ": " + d.error->message);
    // depth non-increase
    Nat db = revised_depth(pb, gp.regions), da = revised_depth(pa, gp.regions);
    if (da > db)
      violate("depth increased " + std::to_string(db) + " -> " + std::to_string(da));
    // substitution bound
    if (auto msg = check_subst_bound(before, c, after)) violate(*msg);
    // measure strictly decreases
    try {
      auto mb = mu(pb, gp.regions, n);
      auto ma = mu(pa, gp.regions, n);
      if (lex_compare(ma, mb) >= 0)
        violate("measure did not decrease: " + mb.render() + " -> " + ma.render());
      auto tb = tower(std::max<Nat>(n, 1), {mb.omega.rbegin(), mb.omega.rend()}, cfg.digit_cap);
      auto ta = tower(std::max<Nat>(n, 1), {ma.omega.rbegin(), ma.omega.rend()}, cfg.digit_cap);
      if (tower_exact(tb) && tower_exact(ta)) {
        ++rep.tower_checked;
        if (std::get<BigInt>(ta) >= std::get<BigInt>(tb)) violate("tower did not decrease");
      }
    } catch (const EalError& e) {
      violate(std::string("measure computation failed: ") + e.what());
    }
    // size remark
    std::uint64_t omega_sum = 0;
    for (Nat i = 0; i <= n; ++i) omega_sum += omega(pa, gp.regions, i);
    if (term_size(pa) > 2 * omega_sum) violate("size exceeded twice the occurrence sum");
  };

  // seeded (or deterministic) trace
  auto tr = run(st0, cfg.policy, cfg.step_budget);
  {
    MachineState prev = tr.initial;
    for (const auto& s : tr.steps) {
      check_edge(prev, s.choice, s.after);
      prev = s.after;
    }
    if (tr.status != RunStatus::BudgetExceeded) {
      const auto& fin = tr.steps.empty() ? tr.initial : tr.steps.back().after;
      auto stuck = classify_stuck(fin, cfg.typed);
      if (cfg.typed && stuck.progress_violation)
        violate("progress violation: a typed closed thread is stuck in an unexpected shape");
    }
  }
  // exhaustive edges, with progress classification of every final state
  if (cfg.also_exhaustive) {
    auto res = explore(st0, cfg.explore_budget, check_edge);
    for (const auto& fin : res.finals) {
      auto stuck = classify_stuck(fin, cfg.typed);
      if (cfg.typed && stuck.progress_violation)
        violate("progress violation in an exhaustively reached final state");
    }
  }

  if (!rep.ok) {
    auto still_fails = [&](const TermPtr& cand) {
      GeneratedProgram g2{cand, gp.regions, gp.region_types};
      if (cfg.typed) {
        if (!check(cand, gp.region_types, {}, 0).ok()) return false;
      } else {
        if (!check_depth(cand, gp.regions, {}, 0).ok()) return false;
      }
      auto r = [&] {
        OracleReport inner;
        // cheap re-run: seeded trace only
        auto st = MachineState::load(cand, cfg.typed);
        auto t = run(st, cfg.policy, cfg.step_budget);
        MachineState prev = t.initial;
        Nat nn = revised_depth(cand, gp.regions);
        for (const auto& s : t.steps) {
          auto mb = mu(prev.program(), gp.regions, nn);
          try {
            auto ma = mu(s.after.program(), gp.regions, nn);
            if (lex_compare(ma, mb) >= 0) return true;
          } catch (const EalError&) {
            return true;
          }
          prev = s.after;
        }
        return false;
      }();
      return r;
    };
    rep.counterexample = shrink(gp.term, still_fails);
  }
  return rep;
}

TermPtr shrink(const TermPtr& term, const std::function<bool(const TermPtr&)>& still_interesting,
               int max_rounds) {
  TermPtr cur = term;
  for (int round = 0; round < max_rounds; ++round) {
    bool improved = false;
    for (const auto& o : occurrences(cur)) {
      if (o.path.empty() || o.kind == TermKind::Unit) continue;
      TermPtr cand;
      try {
        cand = replace_at(cur, o.path, mk_unit());
      } catch (const EalError&) {
        continue;
      }
      if (still_interesting(cand)) {
        cur = cand;
        improved = true;
        break;
      }
    }
    if (!improved) break;
  }
  return cur;
}

}  // namespace eal
