#include <doctest.h>

#include <random>

#include "eal/gen.hpp"
#include "eal/reader.hpp"
#include "eal/stdlib.hpp"

using namespace eal;

namespace {

SourceUnit unit_for(const GeneratedProgram& gp) {
  SourceUnit u;
  for (const auto& [r, d] : gp.regions) u.regions.push_back({r, d, nullptr});
  u.body = gp.term;
  return u;
}

}  // namespace

TEST_CASE("parsing the running examples") {
  auto fig2 = parse_term("\\x. let !y = x in !(y y)");
  auto by_hand =
      mk_lam("x", mk_let_bang("y", mk_var("x"), mk_bang(mk_app(mk_var("y"), mk_var("y")))));
  CHECK(alpha_equal(fig2, by_hand));

  CHECK(parse_term("*")->kind == TermKind::Unit);

  auto u = parse_unit(
      "region r : 0 of !(1 -o 1); (let !x = get(r) in set(r, !x)) | r <= !(\\x. x *)");
  auto canon = canonicalize(u.body);
  REQUIRE(canon.threads.size() == 1);
  REQUIRE(canon.store.size() == 1);
  CHECK(canon.store[0].ref.name == "r");
  CHECK(alpha_equal(canon.store[0].value, parse_term("!(\\x. x *)")));
  CHECK(u.region_depths().at("r") == 0);
}

TEST_CASE("print fixpoints and shapes") {
  CHECK(print_term(parse_term("!(y y)")) == "!(y y)");
  CHECK(print_term(parse_term("\\x. \\y. x y")) == "\\x. \\y. x y");
  CHECK(print_term(mk_lam("x", mk_lam("y", mk_app(mk_var("x"), mk_var("y"))))) ==
        "\\x. \\y. x y");
}

TEST_CASE("sequencing sugar") {
  auto t = parse_term("set(r, *) ; !get(r)");
  REQUIRE(t->kind == TermKind::App);
  CHECK(t->child0->kind == TermKind::Lam);
  CHECK(t->child1->kind == TermKind::Set);
  CHECK(fo_count(t->child0->name, t->child0->child0) == 0);
}

TEST_CASE("fun arrow form") {
  CHECK(alpha_equal(parse_term("fun x -> x"), parse_term("\\x. x")));
}

TEST_CASE("round trip on the corpus") {
  for (const char* f : {"fig2.eal", "bad_depth.eal", "example2.eal", "prog_a.eal", "prog_b.eal",
                        "prog_c.eal", "prog_d.eal", "deadlock.eal", "nu_demo.eal",
                        "run_demo.eal", "run_threads_demo.eal"}) {
    auto u = parse_unit(read_file(corpus_dir() + "/" + f));
    auto again = parse_unit(print_unit(u));
    CHECK_MESSAGE(alpha_equal(u.body, again.body), f);
  }
}

TEST_CASE("round trip on the stdlib") {
  for (const auto& e : StdlibCatalog::get().entries()) {
    SourceUnit u;
    for (const auto& [r, ent] : e.regions) u.regions.push_back({r, ent.depth, ent.type});
    for (const auto& [a, r] : e.addresses) u.addresses.push_back({a, r});
    u.body = e.term;
    SourceUnit again;
    REQUIRE_NOTHROW(again = parse_unit(print_unit(u)));
    CHECK_MESSAGE(alpha_equal(again.body, e.term), e.name);
  }
}

TEST_CASE("round trip on generated programs") {
  GenConfig cfg;
  for (std::uint64_t s = 0; s < 200; ++s) {
    cfg.seed = s;
    auto gp = gen_well_formed(cfg);
    auto text = print_unit(unit_for(gp));
    auto again = parse_unit(text);
    CHECK_MESSAGE(alpha_equal(again.body, gp.term), text);
  }
}

TEST_CASE("located syntax errors") {
  try {
    parse_term("\\x. (x");
    CHECK(false);
  } catch (const SyntaxError& e) {
    CHECK(e.line == 1);
    CHECK(e.col >= 6);
  }
  CHECK_THROWS_AS(parse_term("let x = * in x"), SyntaxError);     // missing !
  CHECK_THROWS_AS(parse_term("! | x"), SyntaxError);
  CHECK_THROWS_AS(parse_unit("region r : 0; region r : 1; *"), EalError);  // duplicate
  CHECK_THROWS_AS(parse_unit("r <= *"), EalError);                // undeclared store target
  CHECK_THROWS_AS(parse_unit("get(q)"), EalError);                // undeclared region
  CHECK_THROWS_AS(parse_unit("new x:q in x"), EalError);          // undeclared region
  CHECK_THROWS_AS(parse_unit("region r : 0; r <= get(r)"), SyntaxError);  // store holds a value
}

TEST_CASE("parsing is total: garbage either parses or raises a located error") {
  std::mt19937_64 rng(5);
  const std::string alphabet = "\\.()!|;,*:=<-o xyzr09 \n";
  for (int i = 0; i < 500; ++i) {
    std::string s;
    for (int j = 0; j < 30; ++j) s += alphabet[rng() % alphabet.size()];
    try {
      parse_term(s);
    } catch (const SyntaxError&) {
    } catch (const EalError&) {
    }
  }
  CHECK(true);
}

TEST_CASE("type syntax round trip") {
  for (const char* s :
       {"1", "B", "forall t. !(t -o t) -o !(t -o t)", "!!(1 -o 1)",
        "forall t. forall t'. !(t -o t) -o (!(t -o t) -o t') -o t'",
        "(1 -o 1) -o forall s. s -o B"}) {
    auto t = parse_type(s);
    CHECK(alpha_equal_types(parse_type(print_type(t)), t));
  }
}

TEST_CASE("numeral literals parse to annotated numerals") {
  auto three = parse_term("3");
  CHECK(alpha_equal(erase(three), numeral(3)));
  CHECK(has_annotations(three));
}
