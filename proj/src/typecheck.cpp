#include "eal/typecheck.hpp"

#include <variant>

namespace eal {

nlohmann::json TypeError::to_json() const {
  nlohmann::json j;
  j["kind"] = kind;
  j["occurrencePath"] = path;
  if (expected)
    j["expected"] = print_type(expected);
  else
    j["expected"] = nullptr;
  if (found)
    j["found"] = print_type(found);
  else
    j["found"] = nullptr;
  if (!message.empty()) j["message"] = message;
  return j;
}

std::string TypeError::render() const {
  std::string s = kind;
  if (!message.empty()) s += ": " + message;
  if (expected) s += " (expected " + print_type(expected) + ")";
  if (found) s += " (found " + print_type(found) + ")";
  if (!path.empty()) s += " at occurrence '" + path + "'";
  return s;
}

namespace {

struct VarEntry {
  Nat depth = 0;
  TypePtr type;      // null for address variables
  std::string alias; // region, for nu-bound address variables
  bool is_addr() const { return type == nullptr; }
};
using Env = std::map<std::string, VarEntry>;

struct Checker {
  const RegionTypeContext& R;
  std::optional<TypeError> err;

  TypePtr fail(TypeError e) {
    if (!err) err = std::move(e);
    return nullptr;
  }

  std::set<std::string> context_tvars(const Env& env) const {
    std::set<std::string> out;
    for (const auto& [r, e] : R)
      if (e.type) {
        auto f = free_tvars(e.type);
        out.insert(f.begin(), f.end());
      }
    for (const auto& [x, e] : env)
      if (e.type) {
        auto f = free_tvars(e.type);
        out.insert(f.begin(), f.end());
      }
    return out;
  }

  const RegionTypeEntry* region_entry(const std::string& r, const std::string& path) {
    auto it = R.find(r);
    if (it == R.end() || !it->second.type) {
      fail({"IllFormedType", path, nullptr, nullptr,
            "region " + r + " is not in the region context"});
      return nullptr;
    }
    return &it->second;
  }

  // get/set operand: yields the region entry, enforcing the depth pin and,
  // for variables, the occurrence discipline.
  const RegionTypeEntry* operand(const RegionRef& ref, Env& env, Nat delta,
                                 const std::string& path) {
    std::string region;
    if (!ref.is_var()) {
      region = ref.region_name();
    } else {
      auto it = env.find(ref.name);
      if (it == env.end()) {
        fail({"UnboundVariable", path, nullptr, nullptr, "unbound '" + ref.name + "'"});
        return nullptr;
      }
      if (it->second.is_addr()) {
        region = it->second.alias;
      } else {
        if (it->second.depth != delta) {
          fail({"DepthMismatch", path, nullptr, nullptr,
                "variable " + ref.name + " must occur at depth " +
                    std::to_string(it->second.depth) + ", used at " + std::to_string(delta)});
          return nullptr;
        }
        auto t = it->second.type;
        if (t->kind != TypeKind::Region) {
          fail({"TypeMismatch", path, nullptr, t,
                "operand " + ref.name + " must have a region type"});
          return nullptr;
        }
        region = t->name;
      }
    }
    auto* e = region_entry(region, path);
    if (!e) return nullptr;
    if (e->depth != delta) {
      fail({"DepthMismatch", path, nullptr, nullptr,
            "region " + region + " pins reads/writes to depth " + std::to_string(e->depth) +
                ", used at " + std::to_string(delta)});
      return nullptr;
    }
    return e;
  }

  static bool is_store_tree(const TermPtr& t) {
    if (t->kind == TermKind::Store) return true;
    if (t->kind == TermKind::Par) return is_store_tree(t->child0) && is_store_tree(t->child1);
    return false;
  }

  TypePtr synth(const TermPtr& t, Env& env, Nat delta, std::string& path);

  bool check_against(const TermPtr& t, const TypePtr& want, Env& env, Nat delta,
                     std::string& path) {
    switch (t->kind) {
      case TermKind::Lam: {
        if (want->kind != TypeKind::Arrow) break;
        Nat uses = fo_count(t->name, t->child0);
        if (uses > 1) {
          fail({"AffinityViolation", path, nullptr, nullptr,
                "lambda-bound " + t->name + " occurs " + std::to_string(uses) + " times"});
          return false;
        }
        if (t->ann && !alpha_equal_types(t->ann, want->a)) {
          fail({"TypeMismatch", path, want->a, t->ann, "binder annotation disagrees"});
          return false;
        }
        auto saved = save(env, t->name, {delta, want->a, {}});
        path.push_back('0');
        bool ok = check_against(t->child0, want->b, env, delta, path);
        path.pop_back();
        restore(env, t->name, saved);
        return ok;
      }
      case TermKind::Bang: {
        if (want->kind != TypeKind::Bang) break;
        path.push_back('0');
        bool ok = check_against(t->child0, want->a, env, delta + 1, path);
        path.pop_back();
        return ok;
      }
      case TermKind::TyAbs: {
        if (want->kind != TypeKind::Forall) break;
        auto ctx = context_tvars(env);
        if (ctx.count(t->name)) {
          fail({"EscapingTypeVariable", path, nullptr, nullptr,
                "type variable " + t->name + " occurs in the context"});
          return false;
        }
        TypePtr body_want;
        TermPtr body = t->child0;
        auto free_in_want = free_tvars(want->a);
        free_in_want.erase(want->name);
        if (free_in_want.count(t->name)) {
          // our binder collides with a free tvar of the goal: rename ours
          std::string fresh = t->name + "'";
          while (free_in_want.count(fresh) || ctx.count(fresh)) fresh += "'";
          body = subst_tvar_in_term(body, ty_var(fresh), t->name);
          body_want = type_subst(want->a, ty_var(fresh), want->name);
        } else {
          body_want = type_subst(want->a, ty_var(t->name), want->name);
        }
        path.push_back('0');
        bool ok = check_against(body, body_want, env, delta, path);
        path.pop_back();
        return ok;
      }
      case TermKind::LetBang: {
        path.push_back('0');
        auto st = synth(t->child0, env, delta, path);
        path.pop_back();
        if (!st) return false;
        if (st->kind != TypeKind::Bang) {
          fail({"TypeMismatch", path, nullptr, st, "let ! scrutinee must have a ! type"});
          return false;
        }
        if (t->ann && !alpha_equal_types(t->ann, st->a)) {
          fail({"TypeMismatch", path, st->a, t->ann, "binder annotation disagrees"});
          return false;
        }
        auto saved = save(env, t->name, {delta + 1, st->a, {}});
        path.push_back('1');
        bool ok = check_against(t->child1, want, env, delta, path);
        path.pop_back();
        restore(env, t->name, saved);
        return ok;
      }
      case TermKind::New: {
        auto* e = region_entry(t->region, path);
        if (!e) return false;
        auto saved = save(env, t->name, {0, nullptr, t->region});
        path.push_back('0');
        bool ok = check_against(t->child0, want, env, delta, path);
        path.pop_back();
        restore(env, t->name, saved);
        return ok;
      }
      default:
        break;
    }
    auto got = synth(t, env, delta, path);
    if (!got) return false;
    if (!alpha_equal_types(got, want)) {
      fail({"TypeMismatch", path, want, got, ""});
      return false;
    }
    return true;
  }

  static std::optional<VarEntry> save(Env& env, const std::string& x, VarEntry e) {
    std::optional<VarEntry> saved;
    auto it = env.find(x);
    if (it != env.end()) saved = it->second;
    env[x] = std::move(e);
    return saved;
  }
  static void restore(Env& env, const std::string& x, const std::optional<VarEntry>& saved) {
    if (saved)
      env[x] = *saved;
    else
      env.erase(x);
  }
};

TypePtr Checker::synth(const TermPtr& t, Env& env, Nat delta, std::string& path) {
  switch (t->kind) {
    case TermKind::Unit:
      return ty_unit();
    case TermKind::Var: {
      auto it = env.find(t->name);
      if (it == env.end())
        return fail({"UnboundVariable", path, nullptr, nullptr, "unbound '" + t->name + "'"});
      if (it->second.is_addr()) {
        auto* e = region_entry(it->second.alias, path);
        if (!e) return nullptr;
        return ty_region(it->second.alias, e->type);
      }
      if (it->second.depth != delta)
        return fail({"DepthMismatch", path, nullptr, it->second.type,
                     "variable " + t->name + " must occur at depth " +
                         std::to_string(it->second.depth) + ", used at " +
                         std::to_string(delta)});
      return it->second.type;
    }
    case TermKind::RegionVal: {
      auto* e = region_entry(t->ref.region_name(), path);
      if (!e) return nullptr;
      return ty_region(t->ref.region_name(), e->type);
    }
    case TermKind::Lam: {
      if (!t->ann)
        return fail({"CannotSynthesize", path, nullptr, nullptr,
                     "unannotated lambda binder " + t->name});
      auto wf = wf_type(R, t->ann);
      if (!wf.ok) return fail({"IllFormedType", path, nullptr, t->ann, wf.failing});
      Nat uses = fo_count(t->name, t->child0);
      if (uses > 1)
        return fail({"AffinityViolation", path, nullptr, nullptr,
                     "lambda-bound " + t->name + " occurs " + std::to_string(uses) + " times"});
      auto saved = save(env, t->name, {delta, t->ann, {}});
      path.push_back('0');
      auto body = synth(t->child0, env, delta, path);
      path.pop_back();
      restore(env, t->name, saved);
      if (!body) return nullptr;
      return ty_arrow(t->ann, body);
    }
    case TermKind::App: {
      path.push_back('0');
      auto f = synth(t->child0, env, delta, path);
      path.pop_back();
      if (!f) return nullptr;
      if (f->kind != TypeKind::Arrow)
        return fail({"TypeMismatch", path, nullptr, f, "application head is not a function"});
      path.push_back('1');
      bool ok = check_against(t->child1, f->a, env, delta, path);
      path.pop_back();
      if (!ok) return nullptr;
      return f->b;
    }
    case TermKind::Bang: {
      path.push_back('0');
      auto a = synth(t->child0, env, delta + 1, path);
      path.pop_back();
      if (!a) return nullptr;
      if (!is_value_type(a))
        return fail({"TypeMismatch", path, nullptr, a, "! applies to value-types"});
      return ty_bang(a);
    }
    case TermKind::LetBang: {
      path.push_back('0');
      auto st = synth(t->child0, env, delta, path);
      path.pop_back();
      if (!st) return nullptr;
      if (st->kind != TypeKind::Bang)
        return fail({"TypeMismatch", path, nullptr, st, "let ! scrutinee must have a ! type"});
      if (t->ann && !alpha_equal_types(t->ann, st->a))
        return fail({"TypeMismatch", path, st->a, t->ann, "binder annotation disagrees"});
      auto saved = save(env, t->name, {delta + 1, st->a, {}});
      path.push_back('1');
      auto body = synth(t->child1, env, delta, path);
      path.pop_back();
      restore(env, t->name, saved);
      return body;
    }
    case TermKind::Get: {
      auto* e = operand(t->ref, env, delta, path);
      if (!e) return nullptr;
      return e->type;
    }
    case TermKind::Set: {
      auto* e = operand(t->ref, env, delta, path);
      if (!e) return nullptr;
      if (!is_value(erase(t->child0)))
        return fail({"MalformedTerm", path, nullptr, nullptr, "set takes a value"});
      path.push_back('0');
      bool ok = check_against(t->child0, e->type, env, delta, path);
      path.pop_back();
      if (!ok) return nullptr;
      return ty_unit();
    }
    case TermKind::Store: {
      if (delta != 0)
        return fail({"DepthMismatch", path, nullptr, nullptr,
                     "stores are judged at depth 0, found " + std::to_string(delta)});
      if (t->ref.is_var())
        return fail({"MalformedTerm", path, nullptr, nullptr, "store target must be concrete"});
      auto* e = region_entry(t->ref.region_name(), path);
      if (!e) return nullptr;
      if (!is_value(erase(t->child0)))
        return fail({"MalformedTerm", path, nullptr, nullptr, "a store holds a value"});
      path.push_back('0');
      bool ok = check_against(t->child0, e->type, env, e->depth, path);
      path.pop_back();
      if (!ok) return nullptr;
      return ty_behaviour();
    }
    case TermKind::Par: {
      bool ls = is_store_tree(t->child0), rs = is_store_tree(t->child1);
      path.push_back('0');
      auto l = synth(t->child0, env, delta, path);
      path.pop_back();
      if (!l) return nullptr;
      path.push_back('1');
      auto r = synth(t->child1, env, delta, path);
      path.pop_back();
      if (!r) return nullptr;
      if (ls && rs) return ty_behaviour();
      if (rs) return l;  // P | S keeps the program's type
      if (ls) return r;
      return ty_behaviour();  // two non-stores
    }
    case TermKind::New: {
      auto* e = region_entry(t->region, path);
      if (!e) return nullptr;
      auto saved = save(env, t->name, {0, nullptr, t->region});
      path.push_back('0');
      auto body = synth(t->child0, env, delta, path);
      path.pop_back();
      restore(env, t->name, saved);
      return body;
    }
    case TermKind::TyAbs: {
      auto ctx = context_tvars(env);
      if (ctx.count(t->name))
        return fail({"EscapingTypeVariable", path, nullptr, nullptr,
                     "type variable " + t->name + " occurs in the context"});
      path.push_back('0');
      auto body = synth(t->child0, env, delta, path);
      path.pop_back();
      if (!body) return nullptr;
      if (!is_value_type(body))
        return fail({"TypeMismatch", path, nullptr, body, "forall quantifies value-types"});
      return ty_forall(t->name, body);
    }
    case TermKind::TyApp: {
      auto wf = wf_type(R, t->ann);
      if (!wf.ok) return fail({"IllFormedType", path, nullptr, t->ann, wf.failing});
      if (!is_value_type(t->ann))
        return fail({"IllFormedType", path, nullptr, t->ann,
                     "type application takes a value-type"});
      path.push_back('0');
      auto f = synth(t->child0, env, delta, path);
      path.pop_back();
      if (!f) return nullptr;
      if (f->kind != TypeKind::Forall)
        return fail({"TypeMismatch", path, nullptr, f, "type application needs a forall type"});
      return type_subst(f->a, t->ann, f->name);
    }
  }
  return fail({"CannotSynthesize", path, nullptr, nullptr, "unsupported term"});
}

}  // namespace

TypeCheckResult check(const TermPtr& p, const RegionTypeContext& R, const TypedVarContext& gamma,
                      Nat delta, const TypePtr& expected) {
  auto rwf = wf_region_context(R);
  if (!rwf.ok) return {nullptr, TypeError{"IllFormedType", "", nullptr, nullptr, rwf.failing}};
  auto gwf = wf_var_context(R, gamma);
  if (!gwf.ok) return {nullptr, TypeError{"IllFormedType", "", nullptr, nullptr, gwf.failing}};

  Checker c{R, std::nullopt};
  Env env;
  for (const auto& [x, e] : gamma) env[x] = {e.depth, e.type, {}};
  std::string path;
  if (expected) {
    auto wf = wf_type(R, expected);
    if (!wf.ok) return {nullptr, TypeError{"IllFormedType", "", nullptr, expected, wf.failing}};
    if (c.check_against(p, expected, env, delta, path)) return {expected, std::nullopt};
    return {nullptr, std::move(c.err)};
  }
  auto t = c.synth(p, env, delta, path);
  if (t) return {t, std::nullopt};
  return {nullptr, std::move(c.err)};
}

ClassifyResult classify_value(const TermPtr& v, const TypePtr& a) {
  auto e = erase(v);
  if (!is_value(e)) return {std::nullopt, "not a value"};
  switch (a->kind) {
    case TypeKind::Arrow:
      if (e->kind != TermKind::Lam)
        return {std::nullopt, "arrow-typed value is not an abstraction"};
      return {ValueShape::Abstraction, ""};
    case TypeKind::Bang:
      if (e->kind != TermKind::Bang) return {std::nullopt, "bang-typed value is not banged"};
      return {ValueShape::Banged, ""};
    default:
      return {ValueShape::Atomic, ""};
  }
}

TermPtr subst_tvar_in_term(const TermPtr& t, const TypePtr& b, const std::string& tv) {
  auto sub_ty = [&](const TypePtr& ty) { return ty ? type_subst(ty, b, tv) : ty; };
  switch (t->kind) {
    case TermKind::Unit:
    case TermKind::Var:
    case TermKind::RegionVal:
    case TermKind::Get:
      return t;
    case TermKind::Lam:
      return mk_lam(t->name, subst_tvar_in_term(t->child0, b, tv), sub_ty(t->ann));
    case TermKind::App:
      return mk_app(subst_tvar_in_term(t->child0, b, tv), subst_tvar_in_term(t->child1, b, tv));
    case TermKind::Bang:
      return mk_bang(subst_tvar_in_term(t->child0, b, tv));
    case TermKind::LetBang:
      return mk_let_bang(t->name, subst_tvar_in_term(t->child0, b, tv),
                         subst_tvar_in_term(t->child1, b, tv), sub_ty(t->ann));
    case TermKind::Set:
      return mk_set(t->ref, subst_tvar_in_term(t->child0, b, tv));
    case TermKind::Store:
      return mk_store(t->ref, subst_tvar_in_term(t->child0, b, tv));
    case TermKind::Par:
      return mk_par(subst_tvar_in_term(t->child0, b, tv), subst_tvar_in_term(t->child1, b, tv));
    case TermKind::New:
      return mk_new(t->name, t->region, subst_tvar_in_term(t->child0, b, tv));
    case TermKind::TyAbs:
      if (t->name == tv) return t;
      return mk_tyabs(t->name, subst_tvar_in_term(t->child0, b, tv));
    case TermKind::TyApp:
      return mk_tyapp(subst_tvar_in_term(t->child0, b, tv), sub_ty(t->ann));
  }
  return t;
}

}  // namespace eal
