#include "eal/stdlib.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "eal/machine.hpp"
#include "eal/reader.hpp"
#include "eal/typecheck.hpp"

namespace eal {

std::string stdlib_dir() {
  if (const char* env = std::getenv("EAL_STDLIB_PATH")) return env;
  return EAL_STDLIB_DIR;
}

std::string corpus_dir() {
  if (const char* env = std::getenv("EAL_CORPUS_PATH")) return env;
  return EAL_CORPUS_DIR;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw EalError("IoError", "cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

namespace {

struct CatalogRow {
  const char* name;
  const char* file;  // null for generated entries
  const char* type;
  Nat delta;
  Nat arity;
  Nat result_bangs;
  const char* provenance;
};

constexpr const char* kNumTy = "forall t. !(t -o t) -o !(t -o t)";

const CatalogRow kRows[] = {
    {"zero", "zero.eal", kNumTy, 0, 0, 0, "empty numeral"},
    {"succ", "succ.eal", "N -o N", 0, 1, 0, "successor"},
    {"add", "add.eal", "N -o N -o N", 0, 2, 0, "addition"},
    {"mult", "mult.eal", "N -o N -o N", 0, 2, 0, "multiplication"},
    {"int_it", "int_it.eal", "N -o forall t. !(t -o t) -o !t -o !t", 0, 0, 0, "iteration"},
    {"int_git", "int_git.eal",
     "forall t. forall t'. !(t -o t) -o (!(t -o t) -o t') -o N -o t'", 0, 0, 0,
     "general iteration"},
    {"pair", "pair.eal", "forall t. forall t'. t -o t' -o forall s. (t -o t' -o s) -o s", 0, 0,
     0, "pairing"},
    {"fst", "fst.eal", "forall t. forall t'. (forall s. (t -o t' -o s) -o s) -o t", 0, 0, 0,
     "left projection"},
    {"snd", "snd.eal", "forall t. forall t'. (forall s. (t -o t' -o s) -o s) -o t'", 0, 0, 0,
     "right projection"},
    {"pred", "pred.eal", "N -o N", 0, 1, 0, "predecessor"},
    // s1..s4, c0..c4 are generated here
    {"sub_raw", "sub_raw.eal", "!N -o N -o !N", 0, 2, 1, "iterated predecessor"},
    {"sub", "sub.eal", "N -o N -o !N", 0, 2, 1, "positive subtraction"},
    {"add3", "add3.eal", "N -o N -o N -o N", 0, 3, 0, "ternary addition"},
    {"list_it", "list_it.eal",
     "forall u. forall t. !(u -o t -o t) -o (forall s. !(u -o s -o s) -o !(s -o s)) -o !t -o !t",
     0, 0, 0, "list iterator"},
    {"update", "update.eal", "!(Reg r N) -o !1 -o !1", 1, 0, 0, "store cell doubling"},
    {"run", "run.eal", "!!1", 0, 0, 0, "iterated update over three addresses"},
    {"F", "F.eal",
     "(forall s. !(!(Reg r N) -o s -o s) -o !(s -o s)) -o !!1", 0, 0, 0,
     "run, parametric in the list"},
    {"gen_threads", "gen_threads.eal", "forall t. forall t'. !(t -o t') -o !t -o B", 0, 0, 0,
     "three-thread spawner"},
    {"run_threads", "run_threads.eal", "B", 0, 0, 0, "three concurrent updates"},
};

constexpr Nat kCoercionCap = 4;

std::string bangs(Nat n, const std::string& s) {
  std::string out;
  for (Nat i = 0; i < n; ++i) out += "!";
  return out + s;
}

std::string gen_s_source(Nat i) {
  std::string prev = i == 1 ? "succ" : "s" + std::to_string(i - 1);
  std::string ty = bangs(i - 1, "N");
  return "type N = " + std::string(kNumTy) + ";\n\\(n : !" + ty +
         "). let !nv = n in !(" + prev + " nv)";
}

std::string gen_c_source(Nat i) {
  if (i == 0) return "type N = " + std::string(kNumTy) + ";\n\\(n : N). n";
  std::string step = i == 1 ? "succ" : "s" + std::to_string(i - 1);
  return "type N = " + std::string(kNumTy) + ";\n\\(n : N). int_it n [" +
         bangs(i - 1, "N") + "] !" + step + " " + bangs(i, "0");
}

TypePtr parse_entry_type(const std::string& s, const std::map<std::string, TypePtr>& aliases) {
  // entry types may use the N abbreviation
  std::string text;
  for (const auto& [name, ty] : aliases) text += "type " + name + " = " + print_type(ty) + ";\n";
  (void)text;
  // reuse the reader by wrapping in a unit with a dummy body
  std::string unit = "type N = " + std::string(kNumTy) + ";\nvar dummy : 0 of " + s + ";\n*";
  auto u = parse_unit(unit);
  return u.vars.at(0).type;
}

}  // namespace

const StdlibCatalog& StdlibCatalog::get() {
  static StdlibCatalog instance;
  return instance;
}

const StdlibEntry* StdlibCatalog::find(const std::string& name) const {
  for (const auto& e : entries_)
    if (e.name == name) return &e;
  return nullptr;
}

TermPtr StdlibCatalog::resolve(const TermPtr& t) const {
  TermPtr cur = t;
  for (const auto& x : free_vars(cur)) {
    if (const auto* e = find(x)) cur = subst(cur, e->term, x);
  }
  return cur;
}

namespace {

StdlibEntry load_entry(const std::vector<StdlibEntry>& earlier, const std::string& name,
                       const std::string& source, const std::string& type_text, Nat delta,
                       Nat arity, Nat result_bangs, const std::string& provenance) {
  StdlibEntry e;
  e.name = name;
  e.source = source;
  e.delta = delta;
  e.arity = arity;
  e.result_bangs = result_bangs;
  e.provenance = provenance;
  SourceUnit u;
  try {
    u = parse_unit(source);
  } catch (const EalError& err) {
    throw EalError("StdlibLoadError", "entry " + name + ": " + err.what());
  }
  e.regions = u.region_types();
  for (const auto& a : u.addresses) e.addresses.emplace_back(a.name, a.region);
  TermPtr term = u.body;
  for (const auto& x : free_vars(term)) {
    for (const auto& prev : earlier)
      if (prev.name == x) {
        term = subst(term, prev.term, x);
        break;
      }
  }
  e.term = term;
  e.type = parse_entry_type(type_text, u.aliases);
  return e;
}

}  // namespace

StdlibCatalog::StdlibCatalog() {
  auto dir = stdlib_dir();
  bool generated_emitted = false;
  for (const auto& row : kRows) {
    if (!generated_emitted && std::string(row.name) == "sub_raw") {
      // coercion families sit between pred and the entries that use them
      for (Nat i = 1; i <= kCoercionCap; ++i) {
        entries_.push_back(load_entry(entries_, "s" + std::to_string(i), gen_s_source(i),
                                      bangs(i, "N") + " -o " + bangs(i, "N"), 0, 1, i,
                                      "pointwise successor lift"));
      }
      for (Nat i = 0; i <= kCoercionCap; ++i) {
        entries_.push_back(load_entry(entries_, "c" + std::to_string(i), gen_c_source(i),
                                      "N -o " + bangs(i, "N"), 0, 1, i,
                                      "numeral coercion"));
      }
      generated_emitted = true;
    }
    entries_.push_back(load_entry(entries_, row.name, read_file(dir + "/" + row.file), row.type,
                                  row.delta, row.arity, row.result_bangs, row.provenance));
  }
}

std::vector<StdlibCatalog::CheckOutcome> StdlibCatalog::verify_all() const {
  std::vector<CheckOutcome> out;
  for (const auto& e : entries_) {
    CheckOutcome o;
    o.name = e.name;
    auto res = check(e.term, e.regions, {}, e.delta, e.type);
    o.ok = res.ok();
    if (!o.ok && res.error) o.error = res.error->render();
    out.push_back(std::move(o));
  }
  return out;
}

DecodeResult decode(const TermPtr& m, Nat budget) {
  auto nf = strong_normalize(m, budget);
  if (!nf) return {std::nullopt, "BudgetExceeded"};
  auto n = match_numeral(*nf);
  if (!n) return {std::nullopt, "NotANumeral"};
  return {n, ""};
}

namespace {

std::optional<TermPtr> strip_bangs(TermPtr t, Nat p) {
  for (Nat i = 0; i < p; ++i) {
    if (t->kind != TermKind::Bang) return std::nullopt;
    t = t->child0;
  }
  return t;
}

}  // namespace

RepReport verify_representation(const std::string& name, const TermPtr& term, Nat arity,
                                Nat result_bangs, const HostFn& host,
                                const std::vector<std::vector<std::uint64_t>>& samples,
                                Nat budget) {
  RepReport rep;
  rep.name = name;
  auto base = erase(term);
  for (const auto& inputs : samples) {
    RepSample s;
    s.inputs = inputs;
    s.want = host(inputs);
    if (inputs.size() != arity) {
      s.note = "arity mismatch";
      rep.pass = false;
      rep.samples.push_back(std::move(s));
      continue;
    }
    TermPtr app = base;
    for (auto v : inputs) app = mk_app(app, numeral((Nat)v));
    auto nf = strong_normalize(app, budget);
    if (!nf) {
      s.note = "BudgetExceeded";
      rep.pass = false;
      rep.samples.push_back(std::move(s));
      continue;
    }
    auto bare = strip_bangs(*nf, result_bangs);
    if (!bare) {
      s.note = "missing result bangs";
      rep.pass = false;
      rep.samples.push_back(std::move(s));
      continue;
    }
    s.got = match_numeral(*bare);
    s.pass = s.got && (std::uint64_t)*s.got == s.want;
    if (!s.got) s.note = "NotANumeral";
    if (!s.pass) rep.pass = false;
    rep.samples.push_back(std::move(s));
  }
  return rep;
}

RepReport verify_representation(const StdlibEntry& e, const HostFn& host,
                                const std::vector<std::vector<std::uint64_t>>& samples,
                                Nat budget) {
  return verify_representation(e.name, e.term, e.arity, e.result_bangs, host, samples, budget);
}

BuiltEntry built_from(const StdlibEntry& e) {
  BuiltEntry b;
  b.term = e.term;
  b.type = e.type;
  b.arity = e.arity;
  b.result_bangs = e.result_bangs;
  // read !^j N input shapes off the type
  TypePtr cur = e.type;
  for (Nat i = 0; i < e.arity; ++i) {
    Nat j = 0;
    TypePtr a = cur->a;
    while (a->kind == TypeKind::Bang) {
      ++j;
      a = a->a;
    }
    b.input_bangs.push_back(j);
    cur = cur->b;
  }
  return b;
}

TypePtr ty_list(const TypePtr& elem_type) {
  auto s = ty_var("s");
  return ty_forall("s", ty_arrow(ty_bang(ty_arrow(elem_type, ty_arrow(s, ty_var("s")))),
                                 ty_bang(ty_arrow(ty_var("s"), ty_var("s")))));
}

TermPtr list_of(const std::vector<TermPtr>& elems, const TypePtr& elem_type) {
  auto s = ty_var("s");
  TermPtr body = mk_var("x");
  for (std::size_t i = elems.size(); i-- > 0;) body = mk_app(mk_app(mk_var("f"), elems[i]), body);
  auto inner = mk_bang(mk_lam("x", body, s));
  auto lam = mk_lam("f", mk_let_bang("f", mk_var("f"), inner),
                    ty_bang(ty_arrow(elem_type, ty_arrow(s, ty_var("s")))));
  return mk_tyabs("s", lam);
}

namespace {

TypePtr numeral_ty() { return ty_numeral(); }

TypePtr built_type(const std::vector<Nat>& input_bangs, Nat result_bangs) {
  TypePtr t = ty_bangs(numeral_ty(), result_bangs);
  for (std::size_t i = input_bangs.size(); i-- > 0;)
    t = ty_arrow(ty_bangs(numeral_ty(), input_bangs[i]), t);
  return t;
}

}  // namespace

BuiltEntry lift_inputs(const BuiltEntry& base, Nat levels) {
  BuiltEntry cur = base;
  for (Nat l = 0; l < levels; ++l) {
    // \(x1 : !A1)...\(xk : !Ak). let !y1 = x1 in ... in !(T y1 ... yk)
    TermPtr app = cur.term;
    for (Nat i = 0; i < cur.arity; ++i) app = mk_app(app, mk_var("y" + std::to_string(i)));
    TermPtr body = mk_bang(app);
    for (Nat i = cur.arity; i-- > 0;)
      body = mk_let_bang("y" + std::to_string(i), mk_var("x" + std::to_string(i)), body);
    std::vector<Nat> nb;
    for (Nat i = cur.arity; i-- > 0;) {
      body = mk_lam("x" + std::to_string(i), body,
                    ty_bangs(numeral_ty(), cur.input_bangs[i] + 1));
    }
    for (auto j : cur.input_bangs) nb.push_back(j + 1);
    cur.term = body;
    cur.input_bangs = nb;
    cur.result_bangs += 1;
    cur.type = built_type(cur.input_bangs, cur.result_bangs);
  }
  return cur;
}

BuiltEntry coerce_inputs(const BuiltEntry& base) {
  const auto& cat = StdlibCatalog::get();
  TermPtr app = base.term;
  for (Nat i = 0; i < base.arity; ++i) {
    Nat j = base.input_bangs[i];
    const auto* c = cat.find("c" + std::to_string(j));
    if (!c) throw EalError("CoercionCap", "no coercion c" + std::to_string(j));
    app = mk_app(app, mk_app(c->term, mk_var("x" + std::to_string(i))));
  }
  BuiltEntry out;
  out.arity = base.arity;
  out.result_bangs = base.result_bangs;
  out.input_bangs.assign(base.arity, 0);
  TermPtr body = app;
  for (Nat i = base.arity; i-- > 0;) body = mk_lam("x" + std::to_string(i), body, numeral_ty());
  out.term = body;
  out.type = built_type(out.input_bangs, out.result_bangs);
  return out;
}

BuiltEntry compose_entries(const BuiltEntry& g, const std::vector<BuiltEntry>& fs) {
  if (fs.empty()) throw EalError("BadArgument", "composition needs inner functions");
  Nat k = fs.front().arity;
  for (const auto& f : fs)
    if (f.arity != k) throw EalError("BadArgument", "inner functions must share arity");
  Nat q = 0;
  for (const auto& f : fs) q = std::max(q, f.result_bangs);

  auto g_lift = lift_inputs(g, q + 1);
  // G^{q+1} !(<F_i^{q-q_i}> y1..yk) ...
  TermPtr app = g_lift.term;
  for (const auto& f : fs) {
    auto fc = coerce_inputs(lift_inputs(f, q - f.result_bangs));
    TermPtr call = fc.term;
    for (Nat i = 0; i < k; ++i) call = mk_app(call, mk_var("y" + std::to_string(i)));
    app = mk_app(app, mk_bang(call));
  }
  TermPtr body = app;
  for (Nat i = k; i-- > 0;)
    body = mk_let_bang("y" + std::to_string(i), mk_var("x" + std::to_string(i)), body);
  for (Nat i = k; i-- > 0;)
    body = mk_lam("x" + std::to_string(i), body, ty_bang(numeral_ty()));

  BuiltEntry mid;
  mid.term = body;
  mid.arity = k;
  mid.input_bangs.assign(k, 1);
  mid.result_bangs = g.result_bangs + q + 1;
  mid.type = built_type(mid.input_bangs, mid.result_bangs);
  return coerce_inputs(mid);
}

BuiltEntry bounded_entry(const BuiltEntry& f, bool product) {
  if (f.result_bangs != 0)
    throw EalError("BadArgument", "bounded iteration takes a bare-result function");
  for (auto j : f.input_bangs)
    if (j != 0) throw EalError("BadArgument", "bounded iteration takes bare inputs");
  if (f.arity < 1) throw EalError("BadArgument", "f needs a leading index argument");
  Nat k = f.arity - 1;

  const auto& cat = StdlibCatalog::get();
  TermPtr g = product ? cat.find("mult")->term : cat.find("add")->term;
  TermPtr unit_num = numeral(product ? 1 : 0, /*annotated=*/true);

  auto N = numeral_ty();
  auto bN = ty_bang(N);
  // TupT = forall w. (!N -o !N -o (!N -o)^k w) -o w
  auto sel_ty = [&](TypePtr tail) {
    for (Nat i = 0; i < k; ++i) tail = ty_arrow(bN, tail);
    return ty_arrow(bN, ty_arrow(bN, tail));
  };
  auto tup = ty_forall("w", ty_arrow(sel_ty(ty_var("w")), ty_var("w")));

  auto var_i = [](const char* base, Nat i) { return std::string(base) + std::to_string(i); };

  // step = \(z : TupT). z [TupT] (\i. \a. \q1..\qk. let-rebind; fresh tuple)
  TermPtr fresh_call = f.term;
  fresh_call = mk_app(fresh_call, mk_var("iv"));
  for (Nat i = 0; i < k; ++i) fresh_call = mk_app(fresh_call, mk_var(var_i("qv", i)));
  TermPtr acc_new = mk_app(mk_app(g, fresh_call), mk_var("av"));
  TermPtr count_new = mk_app(cat.find("succ")->term, mk_var("iv"));

  TermPtr sel_app = mk_app(mk_app(mk_var("sel"), mk_bang(count_new)), mk_bang(acc_new));
  for (Nat i = 0; i < k; ++i) sel_app = mk_app(sel_app, mk_bang(mk_var(var_i("qv", i))));
  TermPtr tuple_new = mk_tyabs("w", mk_lam("sel", sel_app, sel_ty(ty_var("w"))));

  TermPtr inner = tuple_new;
  for (Nat i = k; i-- > 0;)
    inner = mk_let_bang(var_i("qv", i), mk_var(var_i("q", i)), inner);
  inner = mk_let_bang("av", mk_var("a"), inner);
  inner = mk_let_bang("iv", mk_var("i"), inner);
  for (Nat i = k; i-- > 0;) inner = mk_lam(var_i("q", i), inner, bN);
  inner = mk_lam("a", inner, bN);
  inner = mk_lam("i", inner, bN);
  TermPtr step = mk_lam("z", mk_app(mk_tyapp(mk_var("z"), tup), inner), tup);

  // base tuple uses the let-rebound parameters p1..pk
  TermPtr base_sel = mk_app(mk_app(mk_var("sel"), mk_bang(numeral(0, true))),
                            mk_bang(unit_num));
  for (Nat i = 0; i < k; ++i) base_sel = mk_app(base_sel, mk_bang(mk_var(var_i("p", i))));
  TermPtr base_tuple = mk_tyabs("w", mk_lam("sel", base_sel, sel_ty(ty_var("w"))));

  // projection of the accumulator
  TermPtr selector = mk_var("a2");
  for (Nat i = k; i-- > 0;) selector = mk_lam(var_i("q2", i), selector, bN);
  selector = mk_lam("a2", selector, bN);
  selector = mk_lam("i2", selector, bN);

  TermPtr result = mk_app(mk_tyapp(mk_app(mk_var("y"), base_tuple), bN), selector);
  for (Nat i = k; i-- > 0;)
    result = mk_let_bang(var_i("p", i), mk_var(var_i("u", i)), result);
  TermPtr banged = mk_bang(result);

  TermPtr iter = mk_app(mk_tyapp(mk_app(cat.find("succ")->term, mk_var("n")), tup),
                        mk_bang(step));
  TermPtr core = mk_let_bang("y", iter, banged);
  for (Nat i = k; i-- > 0;) core = mk_let_bang(var_i("u", i), mk_var(var_i("x", i)), core);
  for (Nat i = k; i-- > 0;) core = mk_lam(var_i("x", i), core, ty_bang(bN));
  core = mk_lam("n", core, N);

  BuiltEntry mid;
  mid.term = core;
  mid.arity = k + 1;
  mid.input_bangs.assign(k + 1, 2);
  mid.input_bangs[0] = 0;  // n is consumed directly
  mid.result_bangs = 2;
  mid.type = built_type(mid.input_bangs, mid.result_bangs);
  return coerce_inputs(mid);
}

}  // namespace eal
