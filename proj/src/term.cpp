#include "eal/term.hpp"

#include <algorithm>
#include <cassert>
#include <functional>

namespace eal {

namespace {

TermPtr node(Term&& t) { return std::make_shared<Term>(std::move(t)); }

}  // namespace

TermPtr mk_unit() { return node({TermKind::Unit, {}, {}, {}, nullptr, nullptr, nullptr}); }

TermPtr mk_var(std::string x) {
  return node({TermKind::Var, std::move(x), {}, {}, nullptr, nullptr, nullptr});
}

TermPtr mk_region_val(RegionRef r) {
  return node({TermKind::RegionVal, {}, std::move(r), {}, nullptr, nullptr, nullptr});
}

TermPtr mk_lam(std::string x, TermPtr body, TypePtr ann) {
  return node({TermKind::Lam, std::move(x), {}, {}, std::move(ann), std::move(body), nullptr});
}

TermPtr mk_app(TermPtr f, TermPtr a) {
  return node({TermKind::App, {}, {}, {}, nullptr, std::move(f), std::move(a)});
}

TermPtr mk_bang(TermPtr m) {
  return node({TermKind::Bang, {}, {}, {}, nullptr, std::move(m), nullptr});
}

TermPtr mk_let_bang(std::string x, TermPtr scrutinee, TermPtr body, TypePtr ann) {
  return node({TermKind::LetBang, std::move(x), {}, {}, std::move(ann), std::move(scrutinee),
               std::move(body)});
}

TermPtr mk_get(RegionRef r) {
  return node({TermKind::Get, {}, std::move(r), {}, nullptr, nullptr, nullptr});
}

TermPtr mk_set(RegionRef r, TermPtr v) {
  return node({TermKind::Set, {}, std::move(r), {}, nullptr, std::move(v), nullptr});
}

TermPtr mk_store(RegionRef r, TermPtr v) {
  return node({TermKind::Store, {}, std::move(r), {}, nullptr, std::move(v), nullptr});
}

TermPtr mk_par(TermPtr l, TermPtr r) {
  return node({TermKind::Par, {}, {}, {}, nullptr, std::move(l), std::move(r)});
}

TermPtr mk_new(std::string x, std::string region, TermPtr body) {
  return node({TermKind::New, std::move(x), {}, std::move(region), nullptr, std::move(body),
               nullptr});
}

TermPtr mk_tyabs(std::string t, TermPtr body) {
  return node({TermKind::TyAbs, std::move(t), {}, {}, nullptr, std::move(body), nullptr});
}

TermPtr mk_tyapp(TermPtr body, TypePtr arg) {
  return node({TermKind::TyApp, {}, {}, {}, std::move(arg), std::move(body), nullptr});
}

bool is_value(const TermPtr& t) {
  switch (t->kind) {
    case TermKind::Unit:
    case TermKind::Var:
    case TermKind::RegionVal:
    case TermKind::Lam:
      return true;
    case TermKind::Bang:
      return is_value(t->child0);
    default:
      return false;
  }
}

TermPtr erase(const TermPtr& t) {
  switch (t->kind) {
    case TermKind::Unit:
    case TermKind::Var:
    case TermKind::RegionVal:
    case TermKind::Get:
      return t;
    case TermKind::Lam: {
      auto b = erase(t->child0);
      if (b == t->child0 && !t->ann) return t;
      return mk_lam(t->name, b);
    }
    case TermKind::App: {
      auto f = erase(t->child0), a = erase(t->child1);
      if (f == t->child0 && a == t->child1) return t;
      return mk_app(f, a);
    }
    case TermKind::Bang: {
      auto b = erase(t->child0);
      return b == t->child0 ? t : mk_bang(b);
    }
    case TermKind::LetBang: {
      auto s = erase(t->child0), b = erase(t->child1);
      if (s == t->child0 && b == t->child1 && !t->ann) return t;
      return mk_let_bang(t->name, s, b);
    }
    case TermKind::Set: {
      auto v = erase(t->child0);
      return v == t->child0 ? t : mk_set(t->ref, v);
    }
    case TermKind::Store: {
      auto v = erase(t->child0);
      return v == t->child0 ? t : mk_store(t->ref, v);
    }
    case TermKind::Par: {
      auto l = erase(t->child0), r = erase(t->child1);
      if (l == t->child0 && r == t->child1) return t;
      return mk_par(l, r);
    }
    case TermKind::New: {
      auto b = erase(t->child0);
      return b == t->child0 ? t : mk_new(t->name, t->region, b);
    }
    case TermKind::TyAbs:
    case TermKind::TyApp:
      return erase(t->child0);
  }
  return t;
}

bool has_annotations(const TermPtr& t) {
  switch (t->kind) {
    case TermKind::TyAbs:
    case TermKind::TyApp:
      return true;
    default:
      break;
  }
  if (t->ann) return true;
  if (t->child0 && has_annotations(t->child0)) return true;
  if (t->child1 && has_annotations(t->child1)) return true;
  return false;
}

namespace {

void free_vars_into(const TermPtr& t, std::set<std::string>& bound,
                    std::set<std::string>& out) {
  switch (t->kind) {
    case TermKind::Var:
      if (!bound.count(t->name)) out.insert(t->name);
      return;
    case TermKind::Unit:
    case TermKind::RegionVal:
      return;
    case TermKind::Get:
    case TermKind::Set:
    case TermKind::Store:
      if (t->ref.is_var() && !bound.count(t->ref.name)) out.insert(t->ref.name);
      if (t->child0) free_vars_into(t->child0, bound, out);
      return;
    case TermKind::Lam:
    case TermKind::New: {
      bool inserted = bound.insert(t->name).second;
      free_vars_into(t->child0, bound, out);
      if (inserted) bound.erase(t->name);
      return;
    }
    case TermKind::LetBang: {
      free_vars_into(t->child0, bound, out);
      bool inserted = bound.insert(t->name).second;
      free_vars_into(t->child1, bound, out);
      if (inserted) bound.erase(t->name);
      return;
    }
    case TermKind::App:
    case TermKind::Par:
      free_vars_into(t->child0, bound, out);
      free_vars_into(t->child1, bound, out);
      return;
    case TermKind::Bang:
    case TermKind::TyAbs:
    case TermKind::TyApp:
      free_vars_into(t->child0, bound, out);
      return;
  }
}

}  // namespace

std::set<std::string> free_vars(const TermPtr& t) {
  std::set<std::string> bound, out;
  free_vars_into(t, bound, out);
  return out;
}

Nat fo_count(const std::string& x, const TermPtr& t) {
  switch (t->kind) {
    case TermKind::Var:
      return t->name == x ? 1 : 0;
    case TermKind::Unit:
    case TermKind::RegionVal:
      return 0;
    case TermKind::Get:
      return (t->ref.is_var() && t->ref.name == x) ? 1 : 0;
    case TermKind::Set:
    case TermKind::Store: {
      Nat n = (t->ref.is_var() && t->ref.name == x) ? 1 : 0;
      return n + fo_count(x, t->child0);
    }
    case TermKind::Lam:
    case TermKind::New:
      return t->name == x ? 0 : fo_count(x, t->child0);
    case TermKind::LetBang: {
      Nat n = fo_count(x, t->child0);
      if (t->name != x) n += fo_count(x, t->child1);
      return n;
    }
    case TermKind::App:
    case TermKind::Par:
      return fo_count(x, t->child0) + fo_count(x, t->child1);
    case TermKind::Bang:
    case TermKind::TyAbs:
    case TermKind::TyApp:
      return fo_count(x, t->child0);
  }
  return 0;
}

namespace {

std::string fresh_name(const std::string& base, const std::set<std::string>& avoid) {
  if (!avoid.count(base)) return base;
  for (int i = 1;; ++i) {
    std::string cand = base + "'" + std::to_string(i);
    if (!avoid.count(cand)) return cand;
  }
}

RegionRef subst_ref(const RegionRef& ref, const TermPtr& v, const std::string& x) {
  if (!ref.is_var() || ref.name != x) return ref;
  switch (v->kind) {
    case TermKind::Var:
      return RegionRef::mk_var(v->name);
    case TermKind::RegionVal:
      return v->ref;
    default:
      throw EalError("InvalidSubstitution",
                     "cannot substitute a non-address value into region position");
  }
}

TermPtr subst_rec(const TermPtr& t, const TermPtr& v, const std::string& x,
                  const std::set<std::string>& fv_v) {
  switch (t->kind) {
    case TermKind::Var:
      return t->name == x ? v : t;
    case TermKind::Unit:
    case TermKind::RegionVal:
      return t;
    case TermKind::Get: {
      auto r = subst_ref(t->ref, v, x);
      return r.same_cell(t->ref) && r.kind == t->ref.kind ? t : mk_get(r);
    }
    case TermKind::Set:
      return mk_set(subst_ref(t->ref, v, x), subst_rec(t->child0, v, x, fv_v));
    case TermKind::Store:
      return mk_store(subst_ref(t->ref, v, x), subst_rec(t->child0, v, x, fv_v));
    case TermKind::Lam:
    case TermKind::New: {
      if (t->name == x) return t;
      std::string binder = t->name;
      TermPtr body = t->child0;
      if (fv_v.count(binder) && fo_count(x, body) > 0) {
        auto avoid = fv_v;
        auto fvb = free_vars(body);
        avoid.insert(fvb.begin(), fvb.end());
        avoid.insert(x);
        std::string nb = fresh_name(binder, avoid);
        body = subst_rec(body, mk_var(nb), binder, {});
        binder = nb;
      }
      auto nbody = subst_rec(body, v, x, fv_v);
      if (t->kind == TermKind::Lam) return mk_lam(binder, nbody, t->ann);
      return mk_new(binder, t->region, nbody);
    }
    case TermKind::LetBang: {
      auto scrut = subst_rec(t->child0, v, x, fv_v);
      if (t->name == x) return mk_let_bang(t->name, scrut, t->child1, t->ann);
      std::string binder = t->name;
      TermPtr body = t->child1;
      if (fv_v.count(binder) && fo_count(x, body) > 0) {
        auto avoid = fv_v;
        auto fvb = free_vars(body);
        avoid.insert(fvb.begin(), fvb.end());
        avoid.insert(x);
        std::string nb = fresh_name(binder, avoid);
        body = subst_rec(body, mk_var(nb), binder, {});
        binder = nb;
      }
      return mk_let_bang(binder, scrut, subst_rec(body, v, x, fv_v), t->ann);
    }
    case TermKind::App:
      return mk_app(subst_rec(t->child0, v, x, fv_v), subst_rec(t->child1, v, x, fv_v));
    case TermKind::Par:
      return mk_par(subst_rec(t->child0, v, x, fv_v), subst_rec(t->child1, v, x, fv_v));
    case TermKind::Bang:
      return mk_bang(subst_rec(t->child0, v, x, fv_v));
    case TermKind::TyAbs:
      return mk_tyabs(t->name, subst_rec(t->child0, v, x, fv_v));
    case TermKind::TyApp:
      return mk_tyapp(subst_rec(t->child0, v, x, fv_v), t->ann);
  }
  return t;
}

}  // namespace

TermPtr subst(const TermPtr& t, const TermPtr& v, const std::string& x) {
  if (fo_count(x, t) == 0) return t;
  return subst_rec(t, v, x, free_vars(v));
}

// defined in type.cpp
bool alpha_equal_types(const TypePtr& a, const TypePtr& b);

namespace {

bool alpha_rec(const TermPtr& a, const TermPtr& b, std::map<std::string, std::string>& m,
               std::map<std::string, std::string>& rm) {
  if (a->kind != b->kind) return false;
  auto var_eq = [&](const std::string& va, const std::string& vb) {
    auto it = m.find(va);
    auto rit = rm.find(vb);
    if (it == m.end() && rit == rm.end()) return va == vb;  // both free
    return it != m.end() && rit != rm.end() && it->second == vb && rit->second == va;
  };
  auto ref_eq = [&](const RegionRef& ra, const RegionRef& rb) {
    if (ra.kind != rb.kind) return false;
    if (ra.is_var()) return var_eq(ra.name, rb.name);
    return ra.name == rb.name;
  };
  auto bind = [&](const std::string& x, const std::string& y, auto&& k) {
    auto savem = m, saverm = rm;
    m[x] = y;
    rm[y] = x;
    bool r = k();
    m = std::move(savem);
    rm = std::move(saverm);
    return r;
  };
  switch (a->kind) {
    case TermKind::Unit:
      return true;
    case TermKind::Var:
      return var_eq(a->name, b->name);
    case TermKind::RegionVal:
      return ref_eq(a->ref, b->ref);
    case TermKind::Get:
      return ref_eq(a->ref, b->ref);
    case TermKind::Set:
    case TermKind::Store:
      return ref_eq(a->ref, b->ref) && alpha_rec(a->child0, b->child0, m, rm);
    case TermKind::Lam:
      return bind(a->name, b->name, [&] { return alpha_rec(a->child0, b->child0, m, rm); });
    case TermKind::New:
      return a->region == b->region &&
             bind(a->name, b->name, [&] { return alpha_rec(a->child0, b->child0, m, rm); });
    case TermKind::LetBang:
      return alpha_rec(a->child0, b->child0, m, rm) &&
             bind(a->name, b->name, [&] { return alpha_rec(a->child1, b->child1, m, rm); });
    case TermKind::App:
    case TermKind::Par:
      return alpha_rec(a->child0, b->child0, m, rm) && alpha_rec(a->child1, b->child1, m, rm);
    case TermKind::Bang:
      return alpha_rec(a->child0, b->child0, m, rm);
    case TermKind::TyAbs:
      // type binders compared nominally; stdlib sources use fixed tvar names
      return a->name == b->name && alpha_rec(a->child0, b->child0, m, rm);
    case TermKind::TyApp:
      return alpha_equal_types(a->ann, b->ann) && alpha_rec(a->child0, b->child0, m, rm);
  }
  return false;
}

}  // namespace

bool alpha_equal(const TermPtr& a, const TermPtr& b) {
  std::map<std::string, std::string> m, rm;
  return alpha_rec(a, b, m, rm);
}

namespace {

TermPtr rename_rec(const TermPtr& t, std::map<std::string, std::string>& env,
                   std::set<std::string>& used) {
  auto with_binder = [&](const std::string& x, auto&& k) -> TermPtr {
    std::string nx = fresh_name(x, used);
    used.insert(nx);
    auto old = env.find(x);
    std::optional<std::string> saved;
    if (old != env.end()) saved = old->second;
    env[x] = nx;
    TermPtr r = k(nx);
    if (saved)
      env[x] = *saved;
    else
      env.erase(x);
    return r;
  };
  auto ren_ref = [&](const RegionRef& r) {
    if (r.is_var()) {
      auto it = env.find(r.name);
      if (it != env.end()) return RegionRef::mk_var(it->second);
    }
    return r;
  };
  switch (t->kind) {
    case TermKind::Unit:
    case TermKind::RegionVal:
      return t;
    case TermKind::Var: {
      auto it = env.find(t->name);
      return it == env.end() ? t : mk_var(it->second);
    }
    case TermKind::Get:
      return mk_get(ren_ref(t->ref));
    case TermKind::Set:
      return mk_set(ren_ref(t->ref), rename_rec(t->child0, env, used));
    case TermKind::Store:
      return mk_store(ren_ref(t->ref), rename_rec(t->child0, env, used));
    case TermKind::Lam:
      return with_binder(t->name, [&](const std::string& nx) {
        return mk_lam(nx, rename_rec(t->child0, env, used), t->ann);
      });
    case TermKind::New:
      return with_binder(t->name, [&](const std::string& nx) {
        return mk_new(nx, t->region, rename_rec(t->child0, env, used));
      });
    case TermKind::LetBang: {
      auto scrut = rename_rec(t->child0, env, used);
      return with_binder(t->name, [&](const std::string& nx) {
        return mk_let_bang(nx, scrut, rename_rec(t->child1, env, used), t->ann);
      });
    }
    case TermKind::App:
      return mk_app(rename_rec(t->child0, env, used), rename_rec(t->child1, env, used));
    case TermKind::Par:
      return mk_par(rename_rec(t->child0, env, used), rename_rec(t->child1, env, used));
    case TermKind::Bang:
      return mk_bang(rename_rec(t->child0, env, used));
    case TermKind::TyAbs:
      return mk_tyabs(t->name, rename_rec(t->child0, env, used));
    case TermKind::TyApp:
      return mk_tyapp(rename_rec(t->child0, env, used), t->ann);
  }
  return t;
}

}  // namespace

TermPtr canonical_rename(const TermPtr& t) {
  std::map<std::string, std::string> env;
  std::set<std::string> used = free_vars(t);
  return rename_rec(t, env, used);
}

namespace {

void occ_rec(const TermPtr& t, std::string& path, Nat depth,
             const std::optional<std::string>& store_region, std::vector<Occurrence>& out) {
  out.push_back({path, t->kind, depth, store_region});
  auto child = [&](const TermPtr& c, char idx, Nat d, const std::optional<std::string>& sr) {
    path.push_back(idx);
    occ_rec(c, path, d, sr, out);
    path.pop_back();
  };
  switch (t->kind) {
    case TermKind::Unit:
    case TermKind::Var:
    case TermKind::RegionVal:
    case TermKind::Get:
      return;
    case TermKind::Lam:
    case TermKind::New:
    case TermKind::Set:
      child(t->child0, '0', depth, store_region);
      return;
    case TermKind::Bang:
      child(t->child0, '0', depth + 1, store_region);
      return;
    case TermKind::Store:
      child(t->child0, '0', depth, t->ref.region_name());
      return;
    case TermKind::App:
    case TermKind::LetBang:
    case TermKind::Par:
      child(t->child0, '0', depth, store_region);
      child(t->child1, '1', depth, store_region);
      return;
    case TermKind::TyAbs:
    case TermKind::TyApp:
      // transparent; erased before occurrence analysis
      child(t->child0, '0', depth, store_region);
      return;
  }
}

}  // namespace

std::vector<Occurrence> occurrences(const TermPtr& t) {
  std::vector<Occurrence> out;
  std::string path;
  occ_rec(erase(t), path, 0, std::nullopt, out);
  return out;
}

Nat naive_depth(const TermPtr& t) {
  Nat d = 0;
  for (const auto& o : occurrences(t)) d = std::max(d, o.naive_depth);
  return d;
}

Nat revised_depth_of(const Occurrence& o, const RegionDepthContext& R) {
  if (!o.store_region) return o.naive_depth;
  auto it = R.find(*o.store_region);
  if (it == R.end()) throw EalError("UnknownRegion", "no depth for region " + *o.store_region);
  return it->second + o.naive_depth;
}

Nat revised_depth(const TermPtr& t, const RegionDepthContext& R) {
  Nat d = 0;
  for (const auto& o : occurrences(t)) d = std::max(d, revised_depth_of(o, R));
  return d;
}

std::set<std::string> regions_of(const TermPtr& t) {
  std::set<std::string> out;
  std::function<void(const TermPtr&)> go = [&](const TermPtr& u) {
    switch (u->kind) {
      case TermKind::RegionVal:
      case TermKind::Get:
      case TermKind::Set:
      case TermKind::Store:
        if (!u->ref.is_var()) out.insert(u->ref.region_name());
        break;
      case TermKind::New:
        out.insert(u->region);
        break;
      default:
        break;
    }
    if (u->child0) go(u->child0);
    if (u->child1) go(u->child1);
  };
  go(t);
  return out;
}

namespace {

std::optional<std::string> ill_placed_rec(const TermPtr& t, std::string& path, bool static_pos) {
  if (t->kind == TermKind::Store && !static_pos) return path;
  bool child_static = static_pos && t->kind == TermKind::Par;
  if (t->kind == TermKind::Store) child_static = false;
  auto probe = [&](const TermPtr& c, char idx) -> std::optional<std::string> {
    path.push_back(idx);
    auto r = ill_placed_rec(c, path, child_static);
    path.pop_back();
    return r;
  };
  if (t->child0)
    if (auto r = probe(t->child0, '0')) return r;
  if (t->child1)
    if (auto r = probe(t->child1, '1')) return r;
  return std::nullopt;
}

void flatten(const TermPtr& t, CanonicalProgram& out) {
  if (t->kind == TermKind::Par) {
    flatten(t->child0, out);
    flatten(t->child1, out);
  } else if (t->kind == TermKind::Store) {
    out.store.push_back({t->ref, t->child0});
  } else {
    out.threads.push_back(t);
  }
}

}  // namespace

std::optional<std::string> ill_placed_store(const TermPtr& t) {
  std::string path;
  return ill_placed_rec(t, path, true);
}

CanonicalProgram canonicalize(const TermPtr& t) {
  if (auto p = ill_placed_store(t))
    throw EalError("IllPlacedStore", "store at occurrence '" + *p + "' is not in static position");
  CanonicalProgram out;
  flatten(t, out);
  return out;
}

TermPtr CanonicalProgram::reassemble() const {
  TermPtr acc = nullptr;
  for (const auto& th : threads) acc = acc ? mk_par(acc, th) : th;
  for (const auto& e : store) {
    auto s = mk_store(e.ref, e.value);
    acc = acc ? mk_par(acc, s) : s;
  }
  return acc ? acc : mk_unit();
}

bool canonical_equal(const CanonicalProgram& a, const CanonicalProgram& b) {
  if (a.threads.size() != b.threads.size() || a.store.size() != b.store.size()) return false;
  std::vector<bool> usedt(b.threads.size(), false);
  for (const auto& ta : a.threads) {
    bool found = false;
    for (size_t j = 0; j < b.threads.size(); ++j) {
      if (!usedt[j] && alpha_equal(ta, b.threads[j])) {
        usedt[j] = true;
        found = true;
        break;
      }
    }
    if (!found) return false;
  }
  std::vector<bool> useds(b.store.size(), false);
  for (const auto& ea : a.store) {
    bool found = false;
    for (size_t j = 0; j < b.store.size(); ++j) {
      if (!useds[j] && ea.ref.same_cell(b.store[j].ref) &&
          alpha_equal(ea.value, b.store[j].value)) {
        useds[j] = true;
        found = true;
        break;
      }
    }
    if (!found) return false;
  }
  return true;
}

TermPtr subterm_at(const TermPtr& t, const std::string& path) {
  TermPtr cur = t;
  for (char c : path) {
    cur = (c == '0') ? cur->child0 : cur->child1;
    if (!cur) throw EalError("BadPath", "no subterm at path " + path);
  }
  return cur;
}

namespace {

TermPtr replace_rec(const TermPtr& t, const std::string& path, std::size_t pos,
                    const TermPtr& repl) {
  if (pos == path.size()) return repl;
  auto sub = (path[pos] == '0') ? t->child0 : t->child1;
  if (!sub) throw EalError("BadPath", "no subterm at path " + path);
  auto nsub = replace_rec(sub, path, pos + 1, repl);
  Term copy = *t;
  if (path[pos] == '0')
    copy.child0 = nsub;
  else
    copy.child1 = nsub;
  return std::make_shared<Term>(std::move(copy));
}

}  // namespace

TermPtr replace_at(const TermPtr& t, const std::string& path, const TermPtr& repl) {
  return replace_rec(t, path, 0, repl);
}

}  // namespace eal
