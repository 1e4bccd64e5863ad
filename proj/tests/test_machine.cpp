#include <doctest.h>

#include "eal/gen.hpp"
#include "eal/machine.hpp"
#include "eal/reader.hpp"
#include "eal/stdlib.hpp"

using namespace eal;

namespace {

MachineState load_corpus(const char* name) {
  auto u = parse_unit(read_file(corpus_dir() + "/" + std::string(name)));
  return MachineState::load(StdlibCatalog::get().resolve(u.body));
}

}  // namespace

TEST_CASE("redex enumeration on the two-rule read") {
  auto st = load_corpus("example2.eal");
  auto cs = enumerate_redexes(st);
  REQUIRE(cs.size() == 2);
  CHECK(cs[0].rule == RuleTag::GetCopy);
  CHECK(cs[0].path == "");
  CHECK(cs[1].rule == RuleTag::GetConsume);
  CHECK(cs[1].path == "0");
  CHECK(*cs[0].entry == 0);
}

TEST_CASE("values and blocked reads have no redexes") {
  CHECK(enumerate_redexes(MachineState::load(parse_term("!(\\x. x)"))).empty());
  auto blocked = MachineState::load(parse_term("get(r)"));
  CHECK(enumerate_redexes(blocked).empty());
  auto rep = classify_stuck(blocked);
  REQUIRE(rep.blocked.size() == 1);
  CHECK(rep.blocked[0].cell == "r");
}

TEST_CASE("the copy path reproduces the two-step reduction") {
  auto st = load_corpus("example2.eal");
  auto tr = run(st, {PolicyMode::Deterministic, 0, CopyPreference::Copy}, 100);
  REQUIRE(tr.steps.size() == 2);
  CHECK(tr.steps[0].choice.rule == RuleTag::GetCopy);
  CHECK(tr.steps[1].choice.rule == RuleTag::SetWrite);
  auto want = parse_unit("region r : 0; * | r <= !(\\x. x *) | r <= !(\\x. x *)");
  CHECK(canonical_equal(tr.steps.back().after.prog, canonicalize(want.body)));
  CHECK(tr.status == RunStatus::Value);
}

TEST_CASE("the consume path takes three steps and keeps one copy") {
  auto st = load_corpus("example2.eal");
  auto tr = run(st, {PolicyMode::Deterministic, 0, CopyPreference::Consume}, 100);
  REQUIRE(tr.steps.size() == 3);
  CHECK(tr.steps[0].choice.rule == RuleTag::GetConsume);
  auto want = parse_unit("region r : 0; * | r <= !(\\x. x *)");
  CHECK(canonical_equal(tr.steps.back().after.prog, canonicalize(want.body)));
}

TEST_CASE("functional steps") {
  auto beta = MachineState::load(parse_term("(\\x. x) *"));
  auto cs = enumerate_redexes(beta);
  REQUIRE(cs.size() == 1);
  CHECK(cs[0].rule == RuleTag::Beta);
  auto after = step(beta, cs[0]);
  CHECK(alpha_equal(after.program(), mk_unit()));

  auto lb = MachineState::load(parse_term("let !x = !(\\w. w) in !(x x)"));
  auto cs2 = enumerate_redexes(lb);
  REQUIRE(cs2.size() == 1);
  CHECK(cs2[0].rule == RuleTag::LetBang);
  auto after2 = step(lb, cs2[0]);
  CHECK(alpha_equal(after2.program(), parse_term("!((\\w. w) (\\w. w))")));
}

TEST_CASE("invalid choices are rejected") {
  auto st = MachineState::load(parse_term("(\\x. x) *"));
  RedexChoice bogus{5, "", RuleTag::Beta, std::nullopt};
  CHECK_THROWS_AS((void)step(st, bogus), EalError);
  RedexChoice wrong_rule{0, "", RuleTag::LetBang, std::nullopt};
  CHECK_THROWS_AS((void)step(st, wrong_rule), EalError);
}

TEST_CASE("set floats the store out of a bang") {
  auto u = parse_unit(read_file(corpus_dir() + "/prog_a.eal"));
  auto st = MachineState::load(u.body);
  auto cs = enumerate_redexes(st);
  REQUIRE(cs.size() == 1);
  CHECK(cs[0].rule == RuleTag::SetWrite);
  auto after = step(st, cs[0]);
  REQUIRE(after.prog.store.size() == 1);
  CHECK(after.prog.store[0].ref.name == "r");
  CHECK(alpha_equal(after.prog.threads[0], parse_term("!*")));
}

TEST_CASE("nu allocation substitutes a fresh region-tagged address") {
  auto st = load_corpus("nu_demo.eal");
  auto tr = run(st, {PolicyMode::Deterministic, 0, CopyPreference::Copy}, 20);
  REQUIRE(tr.steps.size() == 3);
  CHECK(tr.steps[0].choice.rule == RuleTag::NuAlloc);
  const auto& fin = tr.steps.back().after;
  REQUIRE(fin.prog.store.size() == 1);
  CHECK(fin.prog.store[0].ref.kind == RegionRef::Kind::Address);
  CHECK(fin.prog.store[0].ref.region == "r");
  CHECK(fin.prog.store[0].ref.name.find('#') != std::string::npos);
}

TEST_CASE("strong normalization computes representations") {
  const auto& cat = StdlibCatalog::get();
  auto mult = erase(cat.find("mult")->term);
  auto nf = strong_normalize(mk_app(mk_app(mult, numeral(2)), numeral(3)), 100000);
  REQUIRE(nf.has_value());
  CHECK(match_numeral(*nf) == Nat(6));

  auto n3 = numeral(3);
  auto nf2 = strong_normalize(n3, 10);
  REQUIRE(nf2.has_value());
  CHECK(alpha_equal(*nf2, n3));

  auto succ = erase(cat.find("succ")->term);
  auto nf3 = strong_normalize(mk_app(succ, numeral(0)), 1000);
  REQUIRE(nf3.has_value());
  CHECK(match_numeral(*nf3) == Nat(1));
}

TEST_CASE("strong normalization respects its budget") {
  auto omega = parse_term("(\\x. x x) (\\x. x x)");
  CHECK(!strong_normalize(omega, 200).has_value());
}

TEST_CASE("machine functional steps agree with the arbitrary-context relation") {
  GenConfig cfg;
  cfg.with_stores = false;
  cfg.region_count = 0;
  for (std::uint64_t s = 0; s < 120; ++s) {
    cfg.seed = s;
    auto gp = gen_well_formed(cfg);
    auto st = MachineState::load(gp.term);
    for (int steps = 0; steps < 10; ++steps) {
      auto cs = enumerate_redexes(st);
      if (cs.empty()) break;
      for (const auto& c : cs) {
        if (c.rule != RuleTag::Beta && c.rule != RuleTag::LetBang) continue;
        const auto& thread = st.prog.threads[c.thread];
        auto all = lambda_bang_redexes(thread);
        CHECK(std::find(all.begin(), all.end(), c.path) != all.end());
        auto via_machine = step(st, c);
        auto via_table2 = lambda_bang_step(thread, c.path);
        // compare the rewritten thread against the direct rewrite
        CanonicalProgram direct = canonicalize(via_table2);
        bool found = true;
        for (const auto& th : direct.threads) {
          bool any = false;
          for (const auto& th2 : via_machine.prog.threads) any = any || alpha_equal(th, th2);
          found = found && any;
        }
        CHECK(found);
      }
      st = step(st, cs[0]);
    }
  }
}

TEST_CASE("seeded runs are reproducible") {
  auto mk = [] { return load_corpus("run_demo.eal"); };
  auto t1 = run(mk(), {PolicyMode::Seeded, 42, CopyPreference::Copy}, 10000);
  auto t2 = run(mk(), {PolicyMode::Seeded, 42, CopyPreference::Copy}, 10000);
  REQUIRE(t1.steps.size() == t2.steps.size());
  for (std::size_t i = 0; i < t1.steps.size(); ++i) {
    CHECK(t1.steps[i].choice == t2.steps[i].choice);
    CHECK(t1.steps[i].after.key() == t2.steps[i].after.key());
  }
}

TEST_CASE("exhaustive exploration covers both read rules") {
  auto res = explore(load_corpus("example2.eal"), 10000);
  CHECK(res.states_visited >= 2);
  REQUIRE(res.finals.size() == 2);  // copy keeps the entry, consume spends it
  std::set<std::size_t> store_sizes;
  for (const auto& f : res.finals) store_sizes.insert(f.prog.store.size());
  CHECK(store_sizes == std::set<std::size_t>{1, 2});
}

namespace {

// Branches on every enabled choice with no reduction; used to validate the
// commuting-step optimization in explore().
std::optional<std::set<std::string>> explore_full(const MachineState& s0, std::size_t budget) {
  std::set<std::string> seen{s0.key()}, finals;
  std::vector<MachineState> work{s0};
  std::size_t visited = 0;
  while (!work.empty()) {
    if (++visited > budget) return std::nullopt;
    MachineState s = work.back();
    work.pop_back();
    auto cs = enumerate_redexes(s);
    if (cs.empty()) {
      finals.insert(s.key());
      continue;
    }
    for (const auto& c : cs) {
      auto nxt = step(s, c);
      if (seen.insert(nxt.key()).second) work.push_back(nxt);
    }
  }
  return finals;
}

}  // namespace

TEST_CASE("reduced exploration reaches exactly the brute-force final states") {
  int compared = 0;
  GenConfig cfg;
  cfg.max_size = 24;
  cfg.max_depth = 3;
  cfg.max_threads = 3;
  for (std::uint64_t s = 40000; s < 40400; ++s) {
    cfg.seed = s;
    auto gp = gen_well_formed(cfg);
    auto st = MachineState::load(gp.term);
    auto full = explore_full(st, 4000);
    if (!full) continue;  // too wide to brute force
    auto reduced = explore(st, 100000);
    REQUIRE(!reduced.budget_exceeded);
    std::set<std::string> rk;
    for (const auto& f : reduced.finals) rk.insert(f.key());
    CHECK_MESSAGE(rk == *full, print_term(gp.term));
    ++compared;
  }
  CHECK(compared >= 300);

  // and on the corpus programs with real interleavings
  for (const char* f : {"example2.eal", "nu_demo.eal"}) {
    auto u = parse_unit(read_file(corpus_dir() + "/" + std::string(f)));
    auto st = MachineState::load(u.body);
    auto full = explore_full(st, 100000);
    REQUIRE(full.has_value());
    auto reduced = explore(st, 100000);
    std::set<std::string> rk;
    for (const auto& fi : reduced.finals) rk.insert(fi.key());
    CHECK(rk == *full);
  }
}

TEST_CASE("stuck classification separates values from blocked reads") {
  auto st = MachineState::load(parse_term("* | get(r)"));
  REQUIRE(enumerate_redexes(st).empty());
  auto rep = classify_stuck(st, true);
  CHECK(rep.values.size() == 1);
  REQUIRE(rep.blocked.size() == 1);
  CHECK(rep.blocked[0].cell == "r");
  CHECK(rep.unclassified.empty());
  CHECK(!rep.progress_violation);

  auto v = classify_stuck(MachineState::load(parse_term("!(\\x. x)")), true);
  CHECK(v.values.size() == 1);
  CHECK(v.blocked.empty());

  auto u = parse_unit(read_file(corpus_dir() + "/deadlock.eal"));
  auto stuck = classify_stuck(MachineState::load(u.body), false);
  CHECK(stuck.unclassified.size() == 1);
  CHECK(!stuck.progress_violation);  // not typable, so no violation
}

TEST_CASE("reads choose among all matching store entries") {
  auto u = parse_unit("region r : 0; get(r) | r <= * | r <= !(\\w. w)");
  auto st = MachineState::load(u.body);
  auto cs = enumerate_redexes(st);
  REQUIRE(cs.size() == 2);
  CHECK(cs[0].rule == RuleTag::GetConsume);
  CHECK(cs[1].rule == RuleTag::GetConsume);
  CHECK(*cs[0].entry != *cs[1].entry);
  auto after0 = step(st, cs[0]);
  auto after1 = step(st, cs[1]);
  CHECK(after0.key() != after1.key());
  // copy applies only under a let-get and only to banged entries
  auto v = parse_unit("region r : 0; let !x = get(r) in x | r <= * | r <= !(\\w. w)");
  auto cs2 = enumerate_redexes(MachineState::load(v.body));
  int copies = 0, consumes = 0;
  for (const auto& c : cs2) (c.rule == RuleTag::GetCopy ? copies : consumes) += 1;
  CHECK(copies == 1);
  CHECK(consumes == 2);
}

TEST_CASE("progress violations are flagged only for typed states") {
  auto u = parse_unit(read_file(corpus_dir() + "/deadlock.eal"));
  auto st = MachineState::load(u.body);
  REQUIRE(enumerate_redexes(st).empty());
  CHECK(classify_stuck(st, false).progress_violation == false);
  CHECK(classify_stuck(st, true).progress_violation == true);
}

TEST_CASE("running a closed value produces the empty trace") {
  auto st = MachineState::load(parse_term("!(\\x. x)"));
  auto tr = run(st, {PolicyMode::Seeded, 3, CopyPreference::Copy}, 100);
  CHECK(tr.steps.empty());
  CHECK(tr.status == RunStatus::Value);
}

TEST_CASE("three threads multiply distinct cells by eight") {
  auto text = read_file(corpus_dir() + "/run_threads_demo.eal");
  auto pos = text.find("x <= 1");
  REQUIRE(pos != std::string::npos);
  text.replace(pos, 6, "x <= 2");
  auto u = parse_unit(text);
  auto res = explore(MachineState::load(StdlibCatalog::get().resolve(u.body)), 2000000);
  REQUIRE(!res.budget_exceeded);
  REQUIRE(!res.finals.empty());
  for (const auto& f : res.finals) {
    std::map<std::string, Nat> got;
    for (const auto& e : f.prog.store) got[e.ref.name] = *decode(e.value).value;
    CHECK(got.at("x") == 16);
    CHECK(got.at("y") == 8);
    CHECK(got.at("z") == 8);
  }
}

TEST_CASE("the rejected term really does push the depth up") {
  // P !!* where P duplicates one level too deep
  auto p = parse_term("\\x. let !y = x in !(y !(y z))");
  auto app = mk_app(p, parse_term("!!*"));
  CHECK(naive_depth(app) == 2);
  auto nf = strong_normalize(app, 100);
  REQUIRE(nf.has_value());
  CHECK(naive_depth(*nf) == 3);
  CHECK(alpha_equal(*nf, parse_term("!(!* !(!* z))")));
}
