#include <doctest.h>

#include "eal/depth.hpp"
#include "eal/gen.hpp"
#include "eal/reader.hpp"
#include "eal/stdlib.hpp"
#include "eal/typecheck.hpp"

using namespace eal;

TEST_CASE("generated programs always pass their target judgement") {
  GenConfig cfg;
  for (std::uint64_t s = 0; s < 300; ++s) {
    cfg.seed = s;
    auto gp = gen_well_formed(cfg);  // throws on generator bugs
    CHECK(check_depth(gp.term, gp.regions, {}, 0).ok());
    CHECK(free_vars(gp.term).empty());
  }
  cfg.typed = true;
  for (std::uint64_t s = 0; s < 200; ++s) {
    cfg.seed = s;
    auto gp = gen_typed(cfg);
    CHECK(check(gp.term, gp.region_types, {}, 0).ok());
    CHECK(free_vars(gp.term).empty());
  }
}

TEST_CASE("store-free configuration yields functional terms") {
  GenConfig cfg;
  cfg.region_count = 0;
  cfg.with_stores = false;
  for (std::uint64_t s = 0; s < 50; ++s) {
    cfg.seed = s;
    auto gp = gen_well_formed(cfg);
    CHECK(regions_of(gp.term).empty());
  }
}

TEST_CASE("generation is reproducible from the seed") {
  GenConfig cfg;
  cfg.seed = 1234;
  auto a = gen_well_formed(cfg);
  auto b = gen_well_formed(cfg);
  CHECK(alpha_equal(a.term, b.term));
  CHECK(a.regions == b.regions);
  cfg.typed = true;
  auto c = gen_typed(cfg);
  auto d = gen_typed(cfg);
  CHECK(alpha_equal(c.term, d.term));
}

TEST_CASE("oracles hold on fresh batches") {
  GenConfig cfg;
  OracleConfig oc;
  for (std::uint64_t s = 5000; s < 5120; ++s) {
    cfg.seed = s;
    oc.policy.seed = s;
    auto rep = run_oracles(gen_well_formed(cfg), oc);
    CHECK_MESSAGE(rep.ok, (rep.ok ? std::string() : rep.violations.front()));
  }
  cfg.typed = true;
  oc.typed = true;
  for (std::uint64_t s = 6000; s < 6080; ++s) {
    cfg.seed = s;
    oc.policy.seed = s;
    auto rep = run_oracles(gen_typed(cfg), oc);
    CHECK_MESSAGE(rep.ok, (rep.ok ? std::string() : rep.violations.front()));
  }
}

TEST_CASE("oracles run on the example corpus") {
  OracleConfig oc;
  {
    // the duplication example applied to a doubly banged unit
    GeneratedProgram gp;
    gp.term = mk_app(parse_term("\\x. let !y = x in !(y y)"), parse_term("!!*"));
    auto rep = run_oracles(gp, oc);
    CHECK_MESSAGE(rep.ok, (rep.ok ? std::string() : rep.violations.front()));
  }
  {
    auto u = parse_unit(read_file(corpus_dir() + "/prog_c.eal"));
    auto inf = infer_region_depths(u.body);
    REQUIRE(inf.ok());
    GeneratedProgram gp{u.body, *inf.context, {}};
    auto rep = run_oracles(gp, oc);
    CHECK_MESSAGE(rep.ok, (rep.ok ? std::string() : rep.violations.front()));
  }
  {
    // the diverging circular store is rejected before any oracle runs
    auto u = parse_unit(read_file(corpus_dir() + "/prog_d.eal"));
    CHECK(!infer_region_depths(u.body).ok());
  }
}

TEST_CASE("shrinking keeps the interesting bit") {
  auto u = parse_unit("region r : 0; (\\x. \\y. set(r, *)) * | r <= *");
  auto has_set = [](const TermPtr& t) {
    for (const auto& o : occurrences(t))
      if (o.kind == TermKind::Set) return true;
    return false;
  };
  auto small = shrink(u.body, has_set, 10);
  CHECK(has_set(small));
  CHECK(occurrences(small).size() <= occurrences(u.body).size());
}
