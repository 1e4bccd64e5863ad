#include "eal/type.hpp"

#include <functional>

namespace eal {

namespace {
TypePtr tnode(Type&& t) { return std::make_shared<Type>(std::move(t)); }
}  // namespace

TypePtr ty_var(std::string t) { return tnode({TypeKind::Var, std::move(t), nullptr, nullptr}); }
TypePtr ty_unit() { return tnode({TypeKind::Unit, {}, nullptr, nullptr}); }
TypePtr ty_behaviour() { return tnode({TypeKind::Behaviour, {}, nullptr, nullptr}); }
TypePtr ty_arrow(TypePtr a, TypePtr b) {
  return tnode({TypeKind::Arrow, {}, std::move(a), std::move(b)});
}
TypePtr ty_bang(TypePtr a) { return tnode({TypeKind::Bang, {}, std::move(a), nullptr}); }
TypePtr ty_bangs(TypePtr a, Nat n) {
  for (Nat i = 0; i < n; ++i) a = ty_bang(a);
  return a;
}
TypePtr ty_forall(std::string t, TypePtr a) {
  return tnode({TypeKind::Forall, std::move(t), std::move(a), nullptr});
}
TypePtr ty_region(std::string r, TypePtr a) {
  return tnode({TypeKind::Region, std::move(r), std::move(a), nullptr});
}

bool is_value_type(const TypePtr& t) { return t->kind != TypeKind::Behaviour; }

namespace {

bool ty_alpha_rec(const TypePtr& a, const TypePtr& b, std::map<std::string, std::string>& m,
                  std::map<std::string, std::string>& rm) {
  if (a->kind != b->kind) return false;
  switch (a->kind) {
    case TypeKind::Unit:
    case TypeKind::Behaviour:
      return true;
    case TypeKind::Var: {
      auto it = m.find(a->name);
      auto rit = rm.find(b->name);
      if (it == m.end() && rit == rm.end()) return a->name == b->name;
      return it != m.end() && rit != rm.end() && it->second == b->name &&
             rit->second == a->name;
    }
    case TypeKind::Arrow:
      return ty_alpha_rec(a->a, b->a, m, rm) && ty_alpha_rec(a->b, b->b, m, rm);
    case TypeKind::Bang:
      return ty_alpha_rec(a->a, b->a, m, rm);
    case TypeKind::Region:
      return a->name == b->name && ty_alpha_rec(a->a, b->a, m, rm);
    case TypeKind::Forall: {
      auto savem = m, saverm = rm;
      m[a->name] = b->name;
      rm[b->name] = a->name;
      bool r = ty_alpha_rec(a->a, b->a, m, rm);
      m = std::move(savem);
      rm = std::move(saverm);
      return r;
    }
  }
  return false;
}

}  // namespace

bool alpha_equal_types(const TypePtr& a, const TypePtr& b) {
  if (!a || !b) return a == b;
  std::map<std::string, std::string> m, rm;
  return ty_alpha_rec(a, b, m, rm);
}

std::set<std::string> free_tvars(const TypePtr& t) {
  std::set<std::string> out;
  std::function<void(const TypePtr&, std::set<std::string>&)> go =
      [&](const TypePtr& u, std::set<std::string>& bound) {
        switch (u->kind) {
          case TypeKind::Var:
            if (!bound.count(u->name)) out.insert(u->name);
            return;
          case TypeKind::Forall: {
            bool ins = bound.insert(u->name).second;
            go(u->a, bound);
            if (ins) bound.erase(u->name);
            return;
          }
          case TypeKind::Arrow:
            go(u->a, bound);
            go(u->b, bound);
            return;
          case TypeKind::Bang:
          case TypeKind::Region:
            go(u->a, bound);
            return;
          default:
            return;
        }
      };
  std::set<std::string> bound;
  go(t, bound);
  return out;
}

namespace {

std::string fresh_tvar(const std::string& base, const std::set<std::string>& avoid) {
  if (!avoid.count(base)) return base;
  for (int i = 1;; ++i) {
    std::string cand = base + "'" + std::to_string(i);
    if (!avoid.count(cand)) return cand;
  }
}

}  // namespace

TypePtr type_subst(const TypePtr& a, const TypePtr& b, const std::string& t) {
  switch (a->kind) {
    case TypeKind::Var:
      return a->name == t ? b : a;
    case TypeKind::Unit:
    case TypeKind::Behaviour:
      return a;
    case TypeKind::Arrow:
      return ty_arrow(type_subst(a->a, b, t), type_subst(a->b, b, t));
    case TypeKind::Bang:
      return ty_bang(type_subst(a->a, b, t));
    case TypeKind::Region:
      return ty_region(a->name, type_subst(a->a, b, t));
    case TypeKind::Forall: {
      if (a->name == t) return a;
      auto fvb = free_tvars(b);
      if (fvb.count(a->name)) {
        auto avoid = fvb;
        auto fva = free_tvars(a->a);
        avoid.insert(fva.begin(), fva.end());
        avoid.insert(t);
        std::string nb = fresh_tvar(a->name, avoid);
        auto renamed = type_subst(a->a, ty_var(nb), a->name);
        return ty_forall(nb, type_subst(renamed, b, t));
      }
      return ty_forall(a->name, type_subst(a->a, b, t));
    }
  }
  return a;
}

namespace {

// Precedence: forall < arrow < bang < atom.
void print_rec(const TypePtr& t, int prec, std::string& out) {
  switch (t->kind) {
    case TypeKind::Var:
      out += t->name;
      return;
    case TypeKind::Unit:
      out += "1";
      return;
    case TypeKind::Behaviour:
      out += "B";
      return;
    case TypeKind::Forall: {
      if (prec > 0) out += "(";
      out += "forall " + t->name + ". ";
      print_rec(t->a, 0, out);
      if (prec > 0) out += ")";
      return;
    }
    case TypeKind::Arrow: {
      if (prec > 1) out += "(";
      print_rec(t->a, 2, out);
      out += " -o ";
      print_rec(t->b, 0, out);  // right side extends maximally
      if (prec > 1) out += ")";
      return;
    }
    case TypeKind::Bang:
      if (prec > 3) out += "(";
      out += "!";
      print_rec(t->a, 3, out);
      if (prec > 3) out += ")";
      return;
    case TypeKind::Region:
      if (prec > 2) out += "(";
      out += "Reg " + t->name + " ";
      print_rec(t->a, 4, out);  // the argument slot only admits atoms
      if (prec > 2) out += ")";
      return;
  }
}

}  // namespace

std::string print_type(const TypePtr& t) {
  if (!t) return "<none>";
  std::string out;
  print_rec(t, 0, out);
  return out;
}

namespace {

WfResult wf_rec(const RegionTypeContext& R, const TypePtr& t, std::set<std::string>& bound) {
  switch (t->kind) {
    case TypeKind::Var:
    case TypeKind::Unit:
    case TypeKind::Behaviour:
      return {};
    case TypeKind::Arrow: {
      auto l = wf_rec(R, t->a, bound);
      if (!l.ok) return l;
      return wf_rec(R, t->b, bound);
    }
    case TypeKind::Bang:
      return wf_rec(R, t->a, bound);
    case TypeKind::Forall: {
      // R |- forall t.A needs t not to occur in R
      for (const auto& [r, e] : R) {
        if (e.type && free_tvars(e.type).count(t->name) && !bound.count(t->name))
          return {false, "bound variable " + t->name + " occurs in region context entry " + r};
      }
      bool ins = bound.insert(t->name).second;
      auto r = wf_rec(R, t->a, bound);
      if (ins) bound.erase(t->name);
      return r;
    }
    case TypeKind::Region: {
      auto it = R.find(t->name);
      if (it == R.end()) return {false, "region " + t->name + " not in region context"};
      if (!it->second.type)
        return {false, "region " + t->name + " carries no value-type in the region context"};
      if (!alpha_equal_types(it->second.type, t->a))
        return {false, "Reg " + t->name + " " + print_type(t->a) + " conflicts with " +
                           t->name + " : " + print_type(it->second.type)};
      return {};
    }
  }
  return {};
}

}  // namespace

WfResult wf_type(const RegionTypeContext& R, const TypePtr& t) {
  std::set<std::string> bound;
  return wf_rec(R, t, bound);
}

WfResult wf_region_context(const RegionTypeContext& R) {
  for (const auto& [r, e] : R) {
    if (!e.type) continue;
    auto w = wf_type(R, e.type);
    if (!w.ok) return {false, "entry " + r + ": " + w.failing};
    if (!is_value_type(e.type)) return {false, "entry " + r + " holds the behaviour type"};
  }
  return {};
}

WfResult wf_var_context(const RegionTypeContext& R, const TypedVarContext& G) {
  for (const auto& [x, e] : G) {
    auto w = wf_type(R, e.type);
    if (!w.ok) return {false, "hypothesis " + x + ": " + w.failing};
    if (!is_value_type(e.type)) return {false, "hypothesis " + x + " holds the behaviour type"};
  }
  return {};
}

RegionDepthContext depth_projection(const RegionTypeContext& R) {
  RegionDepthContext out;
  for (const auto& [r, e] : R) out[r] = e.depth;
  return out;
}

}  // namespace eal
