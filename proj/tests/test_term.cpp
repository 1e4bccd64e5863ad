#include <doctest.h>

#include <random>
#include <algorithm>

#include "eal/gen.hpp"
#include "eal/reader.hpp"
#include "eal/term.hpp"

using namespace eal;

TEST_CASE("free variables") {
  CHECK(free_vars(parse_term("\\x. let !y = x in !(y y)")).empty());
  CHECK(free_vars(parse_term("!(y !(y z))")) == std::set<std::string>{"y", "z"});
  CHECK(free_vars(parse_term("let !y = x in !(y y)")) == std::set<std::string>{"x"});
  // region-position occurrences count as free occurrences
  CHECK(free_vars(parse_term("set(a, *)")) == std::set<std::string>{});  // a parses as region
  CHECK(free_vars(parse_term("\\y. set(y, *)")).empty());
}

TEST_CASE("free occurrence counts") {
  CHECK(fo_count("y", parse_term("!(y y)")) == 2);
  CHECK(fo_count("x", parse_term("\\x. x")) == 0);
  CHECK(fo_count("y", parse_term("!(y !(y z))")) == 2);
  CHECK(fo_count("y", parse_term("\\z. set(z, *) y")) == 1);
}

TEST_CASE("substitution") {
  auto N = parse_term("\\w. w");
  auto r1 = subst(parse_term("!(y y)"), N, "y");
  CHECK(alpha_equal(r1, parse_term("!((\\w. w) (\\w. w))")));

  auto id = parse_term("\\z. z");
  CHECK(alpha_equal(subst(id, N, "x"), id));

  auto r2 = subst(parse_term("let !y = x in !(y y)"), parse_term("!(\\w. w)"), "x");
  CHECK(alpha_equal(r2, parse_term("let !y = !(\\w. w) in !(y y)")));
}

TEST_CASE("substitution avoids capture") {
  // [y/x](\y. x) must not capture the free y
  auto t = mk_lam("y", mk_var("x"));
  auto r = subst(t, mk_var("y"), "x");
  CHECK(alpha_equal(r, mk_lam("w", mk_var("y"))));
  CHECK(free_vars(r) == std::set<std::string>{"y"});
}

TEST_CASE("substitution identity when not free") {
  GenConfig cfg;
  for (std::uint64_t s = 0; s < 50; ++s) {
    cfg.seed = s;
    auto gp = gen_well_formed(cfg);
    auto vars = free_vars(gp.term);
    CHECK(!vars.count("fresh_unused"));
    CHECK(alpha_equal(subst(gp.term, mk_unit(), "fresh_unused"), gp.term));
  }
}

TEST_CASE("occurrence enumeration is a bijection onto nodes") {
  auto check_term = [](const TermPtr& t) {
    auto e = erase(t);
    auto occs = occurrences(e);
    std::set<std::string> paths;
    for (const auto& o : occs) {
      CHECK(paths.insert(o.path).second);
      auto sub = subterm_at(e, o.path);
      CHECK(sub->kind == o.kind);
      // recount the depth along the path
      Nat d = 0;
      TermPtr cur = e;
      for (char c : o.path) {
        if (cur->kind == TermKind::Bang) ++d;
        cur = c == '0' ? cur->child0 : cur->child1;
      }
      CHECK(d == o.naive_depth);
    }
    std::function<std::size_t(const TermPtr&)> count = [&](const TermPtr& u) {
      std::size_t n = 1;
      if (u->child0) n += count(u->child0);
      if (u->child1) n += count(u->child1);
      return n;
    };
    CHECK(occs.size() == count(e));
  };
  check_term(parse_term("\\x. let !y = x in !(y y)"));
  GenConfig cfg;
  for (std::uint64_t s = 100; s < 130; ++s) {
    cfg.seed = s;
    check_term(gen_well_formed(cfg).term);
  }
}

TEST_CASE("naive depth") {
  CHECK(naive_depth(parse_term("\\x. let !y = x in !(y y)")) == 1);
  CHECK(naive_depth(parse_term("x")) == 0);
  CHECK(naive_depth(parse_term("!(!n !(!n z))")) == 3);
}

TEST_CASE("revised depth on the two-thread store program") {
  auto u = parse_unit("region r : 0; (let !x = get(r) in set(r, !x)) | r <= !(\\x. x *)");
  RegionDepthContext R{{"r", 0}};
  std::map<std::string, Nat> at;
  for (const auto& o : occurrences(u.body)) at[o.path] = revised_depth_of(o, R);
  CHECK(at.at("10") == 0);     // the banged value's top node sits at R(r)
  CHECK(at.at("100") == 1);
  CHECK(at.at("1000") == 1);
  CHECK(at.at("10000") == 1);
  CHECK(at.at("10001") == 1);
  // with R(r) = 2 everything below the store shifts by two
  RegionDepthContext R2{{"r", 2}};
  CHECK(revised_depth_of(Occurrence{"10", TermKind::Bang, 0, std::string("r")}, R2) == 2);
}

TEST_CASE("revised depth equals naive depth on store-free terms") {
  GenConfig cfg;
  cfg.with_stores = false;
  cfg.region_count = 0;
  for (std::uint64_t s = 0; s < 40; ++s) {
    cfg.seed = s;
    auto gp = gen_well_formed(cfg);
    CHECK(revised_depth(gp.term, gp.regions) == naive_depth(gp.term));
  }
}

TEST_CASE("revised depth shifts store contents") {
  auto u = parse_unit("region r : 1; r <= !(\\x. x *)");
  CHECK(revised_depth(u.body, {{"r", 1}}) == 2);
  CHECK_THROWS_AS((void)revised_depth(u.body, RegionDepthContext{}), EalError);
}

TEST_CASE("canonical form is order independent") {
  auto m = parse_term("\\x. x");
  auto s1 = parse_term("r <= *");
  auto s2 = parse_term("q <= !(\\x. x)");
  auto a = canonicalize(mk_par(m, mk_par(s1, s2)));
  auto b = canonicalize(mk_par(mk_par(s2, m), s1));
  CHECK(canonical_equal(a, b));
  CHECK(canonical_equal(canonicalize(a.reassemble()), a));  // idempotent

  auto single = canonicalize(m);
  CHECK(single.threads.size() == 1);
  CHECK(single.store.empty());
}

TEST_CASE("stores outside static contexts are rejected") {
  auto t = parse_term("m (m' | r <= *)");
  CHECK_THROWS_AS((void)canonicalize(t), EalError);
  CHECK(ill_placed_store(t).has_value());
  CHECK(!ill_placed_store(parse_term("m | r <= *")).has_value());
}

TEST_CASE("canonicalization is invariant under random reassociation") {
  GenConfig cfg;
  std::mt19937_64 rng(7);
  for (std::uint64_t s = 200; s < 230; ++s) {
    cfg.seed = s;
    auto gp = gen_well_formed(cfg);
    auto canon = canonicalize(gp.term);
    // rebuild in a rotated order
    std::vector<TermPtr> parts;
    for (auto& t : canon.threads) parts.push_back(t);
    for (auto& e : canon.store) parts.push_back(mk_store(e.ref, e.value));
    if (parts.size() < 2) continue;
    std::shuffle(parts.begin(), parts.end(), rng);
    TermPtr re = parts[0];
    for (std::size_t i = 1; i < parts.size(); ++i)
      re = rng() % 2 ? mk_par(re, parts[i]) : mk_par(parts[i], re);
    CHECK(canonical_equal(canonicalize(re), canon));
  }
}

TEST_CASE("alpha equivalence") {
  CHECK(alpha_equal(parse_term("\\x. x"), parse_term("\\y. y")));
  CHECK(!alpha_equal(parse_term("\\x. y"), parse_term("\\x. x")));
  CHECK(alpha_equal(parse_term("\\x. let !y = x in !(y y)"),
                    parse_term("\\a. let !b = a in !(b b)")));
  // free variables match by name
  CHECK(!alpha_equal(parse_term("x"), parse_term("y")));
}
