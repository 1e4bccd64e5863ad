#include <doctest.h>

#include "eal/depth.hpp"
#include "eal/gen.hpp"
#include "eal/reader.hpp"
#include "eal/stdlib.hpp"

using namespace eal;

TEST_CASE("the duplication example is derivable at any current depth") {
  auto fig2 = parse_term("\\x. let !y = x in !(y y)");
  for (Nat d : {0u, 1u, 3u}) {
    auto r = check_depth(fig2, {}, {}, d);
    CHECK(r.ok());
    CHECK(derivation_replays(*r.derivation, fig2, {}, {}, d));
  }
}

TEST_CASE("one-level-too-deep variable is rejected at its occurrence") {
  auto p = parse_term("\\x. let !y = x in !(y !(y z))");
  auto r = check_depth(p, {}, {{"z", 2}}, 0);
  REQUIRE(!r.ok());
  CHECK(r.error->kind == "DepthMismatch");
  CHECK(r.error->path == "010100");
  CHECK(r.error->expected == Nat(1));
  CHECK(r.error->actual == Nat(2));
  auto j = r.error->to_json();
  CHECK(j["occurrencePath"] == "010100");
}

TEST_CASE("read and write pinned to different depths conflict") {
  auto u = parse_unit(read_file(corpus_dir() + "/prog_b.eal"));
  auto r0 = check_depth(u.body, {{"r", 0}}, {}, 0);
  REQUIRE(!r0.ok());
  CHECK(r0.error->kind == "RegionDepthConflict");
  auto r1 = check_depth(u.body, {{"r", 1}}, {}, 0);
  REQUIRE(!r1.ok());
  CHECK(r1.error->kind == "RegionDepthConflict");
}

TEST_CASE("stores are judged at depth zero only") {
  auto u = parse_unit("region r : 1; r <= !(\\x. x)");
  CHECK(check_depth(u.body, {{"r", 1}}, {}, 0).ok());
  auto r = check_depth(u.body, {{"r", 1}}, {}, 1);
  REQUIRE(!r.ok());
  CHECK(r.error->kind == "StoreDepth");
}

TEST_CASE("affinity violations name the binder") {
  auto r = check_depth(parse_term("\\x. x x"), {}, {}, 0);
  REQUIRE(!r.ok());
  CHECK(r.error->kind == "AffinityViolation");
}

TEST_CASE("weakening: unused hypotheses never hurt") {
  GenConfig cfg;
  for (std::uint64_t s = 0; s < 60; ++s) {
    cfg.seed = s;
    auto gp = gen_well_formed(cfg);
    CHECK(check_depth(gp.term, gp.regions, {}, 0).ok());
    CHECK(check_depth(gp.term, gp.regions, {{"unusedvar", 3}, {"another", 0}}, 0).ok());
  }
}

TEST_CASE("region depth inference on the example corpus") {
  auto c = parse_unit(read_file(corpus_dir() + "/prog_c.eal"));
  auto ric = infer_region_depths(c.body);
  REQUIRE(ric.ok());
  CHECK(ric.context->at("r") == 1);
  CHECK(ric.context->at("r'") == 2);
  CHECK(check_depth(c.body, *ric.context, {}, 0).ok());

  auto d = parse_unit(read_file(corpus_dir() + "/prog_d.eal"));
  auto rid = infer_region_depths(d.body);
  CHECK(!rid.ok());
  CHECK(!rid.conflict.empty());

  auto b = parse_unit(read_file(corpus_dir() + "/prog_b.eal"));
  CHECK(!infer_region_depths(b.body).ok());

  CHECK(infer_region_depths(parse_term("\\x. let !y = x in !(y y)")).context->empty());
}

TEST_CASE("write-under-bang example uses the store to park deep values") {
  auto a = parse_unit(read_file(corpus_dir() + "/prog_a.eal"));
  CHECK(check_depth(a.body, {{"r", 1}}, {}, 0).ok());
  auto inf = infer_region_depths(a.body);
  REQUIRE(inf.ok());
  CHECK(inf.context->at("r") == 1);
}

TEST_CASE("free variables occur exactly at their context depth") {
  // binder occurrences sit at relative depth 0 (lambda) or 1 (let !)
  std::function<void(const TermPtr&)> walk = [&](const TermPtr& t) {
    if (t->kind == TermKind::Lam || t->kind == TermKind::LetBang) {
      const auto& body = t->kind == TermKind::Lam ? t->child0 : t->child1;
      Nat want = t->kind == TermKind::Lam ? 0 : 1;
      for (const auto& o : occurrences(body)) {
        auto sub = subterm_at(body, o.path);
        bool hit = (sub->kind == TermKind::Var && sub->name == t->name);
        if ((sub->kind == TermKind::Get || sub->kind == TermKind::Set) && sub->ref.is_var() &&
            sub->ref.name == t->name)
          hit = true;
        if (hit && fo_count(t->name, subterm_at(body, o.path)) > 0) {
          // only occurrences still free here (canonical renaming makes
          // shadowing impossible in generated terms)
          CHECK(o.naive_depth == want);
        }
      }
    }
    if (t->child0) walk(t->child0);
    if (t->child1) walk(t->child1);
  };
  GenConfig cfg;
  cfg.with_stores = false;
  for (std::uint64_t s = 0; s < 60; ++s) {
    cfg.seed = s;
    auto gp = gen_well_formed(cfg);
    walk(gp.term);
  }
}

namespace {

// Independent transcription of the functional-fragment rules, used as a
// differential oracle for the production checker.
bool table3(const TermPtr& t, std::map<std::string, Nat>& gamma, Nat delta) {
  switch (t->kind) {
    case TermKind::Var: {
      auto it = gamma.find(t->name);
      return it != gamma.end() && it->second == delta;
    }
    case TermKind::Unit:
      return true;
    case TermKind::Lam: {
      if (fo_count(t->name, t->child0) > 1) return false;
      auto saved = gamma;
      gamma[t->name] = delta;
      bool r = table3(t->child0, gamma, delta);
      gamma = saved;
      return r;
    }
    case TermKind::App:
      return table3(t->child0, gamma, delta) && table3(t->child1, gamma, delta);
    case TermKind::Bang:
      return table3(t->child0, gamma, delta + 1);
    case TermKind::LetBang: {
      if (!table3(t->child0, gamma, delta)) return false;
      auto saved = gamma;
      gamma[t->name] = delta + 1;
      bool r = table3(t->child1, gamma, delta);
      gamma = saved;
      return r;
    }
    default:
      return false;  // not in the functional fragment
  }
}

}  // namespace

TEST_CASE("the checker agrees with a direct functional-fragment transcription") {
  GenConfig cfg;
  cfg.with_stores = false;
  cfg.region_count = 0;
  cfg.pure_functional = true;
  cfg.max_threads = 1;
  for (std::uint64_t s = 0; s < 200; ++s) {
    cfg.seed = s;
    auto gp = gen_well_formed(cfg);
    std::map<std::string, Nat> gamma;
    CHECK(table3(erase(gp.term), gamma, 0) == check_depth(gp.term, {}, {}, 0).ok());
  }
  // and on the two hand examples
  std::map<std::string, Nat> g1;
  CHECK(table3(parse_term("\\x. let !y = x in !(y y)"), g1, 0));
  std::map<std::string, Nat> g2{{"z", 2}};
  CHECK(!table3(parse_term("\\x. let !y = x in !(y !(y z))"), g2, 0));
}

TEST_CASE("derivations replay and render") {
  auto u = parse_unit(read_file(corpus_dir() + "/example2.eal"));
  auto r = check_depth(u.body, u.region_depths(), {}, 0);
  REQUIRE(r.ok());
  CHECK(derivation_replays(*r.derivation, u.body, u.region_depths(), {}, 0));
  auto rendered = render_derivation(*r.derivation, u.body);
  CHECK(rendered.find("[store]") != std::string::npos);
  CHECK(rendered.find("[get]") != std::string::npos);
}

TEST_CASE("nu-bound addresses check like region constants") {
  auto u = parse_unit(read_file(corpus_dir() + "/nu_demo.eal"));
  CHECK(check_depth(u.body, u.region_depths(), {}, 0).ok());
  // a get through the bound address at the wrong depth conflicts
  auto bad = parse_unit("region r : 1; new x:r in get(x)");
  auto res = check_depth(bad.body, {{"r", 1}}, {}, 0);
  REQUIRE(!res.ok());
  CHECK(res.error->kind == "RegionDepthConflict");
}

TEST_CASE("stdlib erasures are well-formed at their entry depths") {
  for (const auto& e : StdlibCatalog::get().entries()) {
    RegionDepthContext R = depth_projection(e.regions);
    CHECK_MESSAGE(check_depth(e.term, R, {}, e.delta).ok(), e.name);
  }
}
