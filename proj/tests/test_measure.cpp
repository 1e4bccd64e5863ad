#include <doctest.h>

#include <boost/multiprecision/cpp_int.hpp>

#include "eal/gen.hpp"
#include "eal/measure.hpp"
#include "eal/reader.hpp"
#include "eal/stdlib.hpp"

#include "tower_support.hpp"

using namespace eal;

TEST_CASE("per-depth occurrence counts") {
  auto fig2 = parse_term("\\x. let !y = x in !(y y)");
  CHECK(omega(fig2, {}, 0) == 6);  // lambda, let, x, bang (+2)
  CHECK(omega(fig2, {}, 1) == 5);  // app, y, y (+2)
  CHECK(omega(fig2, {}, 3) == 2);  // no occurrences at that depth
  auto setu = parse_term("set(r, *)");
  CHECK(omega(setu, {{"r", 0}}, 0) == 5);  // set counts two, star one (+2)
  // parallel and store nodes weigh nothing
  auto u = parse_unit("region r : 0; * | r <= *");
  CHECK(omega(u.body, {{"r", 0}}, 0) == 4);  // two stars only (+2)
}

TEST_CASE("measure vectors") {
  auto fig2 = parse_term("\\x. let !y = x in !(y y)");
  auto m = mu(fig2, {}, 1);
  CHECK(m.render() == "(5, 6)");
  CHECK(mu(mk_unit(), {}, 0).render() == "(3)");
  auto padded = mu(fig2, {}, 3);
  CHECK(padded.render() == "(2, 2, 5, 6)");
  CHECK_THROWS_AS((void)mu(fig2, {}, 0), EalError);  // padding too small
}

TEST_CASE("right-to-left lexicographic order") {
  auto vec = [](std::vector<std::uint64_t> deepest_first) {
    MeasureVector v;
    v.n = (Nat)deepest_first.size() - 1;
    v.omega.assign(deepest_first.rbegin(), deepest_first.rend());
    return v;
  };
  CHECK(lex_compare(vec({9, 3}), vec({2, 4})) == -1);  // omega_0 decides
  CHECK(lex_compare(vec({2, 4}), vec({9, 3})) == 1);
  CHECK(lex_compare(vec({5, 6}), vec({5, 6})) == 0);
  CHECK(lex_compare(vec({2, 6}), vec({5, 6})) == -1);  // tie on omega_0, omega_1 decides
  CHECK_THROWS_AS(lex_compare(vec({2, 2}), vec({2, 2, 2})), EalError);
}

TEST_CASE("tower function values") {
  CHECK(tower_render(tower(1, {})) == "0");
  CHECK(tower_render(tower(3, {})) == "0");
  CHECK(tower_render(tower(2, {3})) == "6");
  CHECK(tower_render(tower(1, {2, 2})) == "16");
  using boost::multiprecision::cpp_int;
  auto t56 = tower(1, {5, 6});
  REQUIRE(tower_exact(t56));
  CHECK(std::get<BigInt>(t56) == boost::multiprecision::pow(cpp_int(5), 64));
  CHECK(!tower_exact(tower(2, {9, 9, 9, 9}, 1000)));
  CHECK_THROWS_AS(tower(0, {2}), EalError);
  CHECK_THROWS_AS(tower(1, {1}), EalError);
}

TEST_CASE("certificates") {
  auto fig2 = parse_term("\\x. let !y = x in !(y y)");
  auto c = certificate(fig2, {});
  CHECK(c.alpha == 1);
  CHECK(c.measure.render() == "(5, 6)");
  REQUIRE(tower_exact(c.value));
  CHECK(std::get<BigInt>(c.value) == boost::multiprecision::pow(BigInt(5), 64));
  auto j = c.to_json();
  CHECK(j["alpha"] == 1);

  auto cv = certificate(mk_unit(), {});
  CHECK(cv.alpha == 0);
  REQUIRE(tower_exact(cv.value));
  CHECK(std::get<BigInt>(cv.value) >= 0);
}

TEST_CASE("the certificate bounds the observed trace") {
  auto u = parse_unit(read_file(corpus_dir() + "/example2.eal"));
  auto R = u.region_depths();
  auto cert = certificate(u.body, R);
  auto tr = run(MachineState::load(u.body), {PolicyMode::Deterministic, 0, CopyPreference::Copy},
                1000);
  REQUIRE(tr.steps.size() == 2);
  REQUIRE(tower_exact(cert.value));
  CHECK(std::get<BigInt>(cert.value) > BigInt(tr.steps.size()));
}

TEST_CASE("trace monitoring") {
  auto u = parse_unit(read_file(corpus_dir() + "/example2.eal"));
  auto R = u.region_depths();
  auto tr = run(MachineState::load(u.body), {PolicyMode::Deterministic, 0, CopyPreference::Copy},
                1000);
  auto rep = monitor(tr, R);
  CHECK(rep.ok);
  CHECK(rep.tower_checked == 2);

  Trace empty;
  empty.initial = MachineState::load(parse_term("\\x. x"));
  empty.status = RunStatus::Value;
  CHECK(monitor(empty, {}).ok);

  // replaying a state twice is not a strict decrease
  Trace corrupted = tr;
  corrupted.steps.push_back(corrupted.steps.back());
  auto bad = monitor(corrupted, R);
  CHECK(!bad.ok);
  CHECK(bad.first_violation == 3);
}

TEST_CASE("shift lemma on sampled towers") {
  int checked = 0;
  for (Nat alpha = 1; alpha <= 2; ++alpha)
    for (std::uint64_t beta = 2; beta <= 3; ++beta)
      for (std::uint64_t x = 2; x <= 5; ++x)
        for (std::uint64_t xp = 2; xp <= 5; ++xp) {
          CHECK(testsupport::shift_leq(alpha, {beta * x, xp}, {x, beta * xp}));
          CHECK(testsupport::shift_leq(alpha, {beta * x, xp, 2}, {x, beta * xp, 2}));
          checked += 2;
        }
  CHECK(checked >= 100);
}

TEST_CASE("arithmetic inequalities behind the shift lemma") {
  using boost::multiprecision::cpp_int;
  auto p = [](std::uint64_t b, std::uint64_t e) -> cpp_int {
    return boost::multiprecision::pow(cpp_int(b), (unsigned)e);
  };
  int checked = 0;
  for (std::uint64_t x = 1; x <= 8; ++x)
    for (std::uint64_t y = 1; y <= 8; ++y)
      for (std::uint64_t z = 1; z <= 8; ++z)
        for (std::uint64_t k = 1; k <= 8; ++k) {
          if (x >= 2) CHECK(cpp_int(y + 1) <= p(x, y));
          if (x >= 2) CHECK(cpp_int(x * y) <= p(x, y));
          if (x >= 2) CHECK(p(x * y, z) <= p(x, y * z));
          if (x >= 2 && z >= 1) CHECK(p(x, z) * y <= p(x, y * z));
          if (x >= y) CHECK(p(x - y, k) <= p(x, k) - p(y, k));
          ++checked;
        }
  CHECK(checked == 8 * 8 * 8 * 8);
}

TEST_CASE("program size stays within twice the occurrence sum") {
  auto bound_holds = [](const TermPtr& t, const RegionDepthContext& R) {
    Nat d = revised_depth(t, R);
    std::uint64_t sum = 0;
    for (Nat i = 0; i <= d; ++i) sum += omega(t, R, i);
    return term_size(t) <= 2 * sum;
  };
  GenConfig cfg;
  for (std::uint64_t s = 0; s < 80; ++s) {
    cfg.seed = s;
    auto gp = gen_well_formed(cfg);
    CHECK(bound_holds(gp.term, gp.regions));
  }
  for (const auto& e : StdlibCatalog::get().entries())
    CHECK_MESSAGE(bound_holds(erase(e.term), depth_projection(e.regions)), e.name);
}

TEST_CASE("exact per-rule measure deltas on the store program") {
  // pins the counting convention: set weighs 2, unit 1, store/par 0, so a
  // write trades the set node for a star (-1); a copy removes let+get (-2);
  // a consume removes only the get (-1)
  auto u = parse_unit(read_file(corpus_dir() + "/example2.eal"));
  auto R = u.region_depths();
  auto st = MachineState::load(u.body);
  CHECK(mu(st.program(), R, 1).render() == "(7, 8)");

  auto copy_tr = run(st, {PolicyMode::Deterministic, 0, CopyPreference::Copy}, 10);
  REQUIRE(copy_tr.steps.size() == 2);
  CHECK(mu(copy_tr.steps[0].after.program(), R, 1).render() == "(10, 6)");   // GetCopy
  CHECK(mu(copy_tr.steps[1].after.program(), R, 1).render() == "(10, 5)");   // SetWrite

  auto cons_tr = run(st, {PolicyMode::Deterministic, 0, CopyPreference::Consume}, 10);
  REQUIRE(cons_tr.steps.size() == 3);
  CHECK(mu(cons_tr.steps[0].after.program(), R, 1).render() == "(7, 7)");    // GetConsume
}

TEST_CASE("trace json lines carry measures when asked") {
  auto u = parse_unit(read_file(corpus_dir() + "/example2.eal"));
  auto tr = run(MachineState::load(u.body), {PolicyMode::Deterministic, 0, CopyPreference::Copy},
                1000);
  auto lines = trace_json_lines(tr, u.region_depths(), true);
  REQUIRE(lines.size() == 3);
  CHECK(lines[0].find("\"measure\"") != std::string::npos);
  CHECK(lines[1].find("\"ruleTag\":\"GetCopy\"") != std::string::npos);
  auto plain = trace_json_lines(tr, u.region_depths(), false);
  CHECK(plain[0].find("\"measure\"") == std::string::npos);
}
