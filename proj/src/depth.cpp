#include "eal/depth.hpp"

#include <deque>

#include "eal/reader.hpp"

namespace eal {

nlohmann::json DepthError::to_json() const {
  nlohmann::json j;
  j["rule"] = rule;
  j["kind"] = kind;
  j["occurrencePath"] = path;
  if (expected) j["expectedDepth"] = *expected;
  if (actual) j["actualDepth"] = *actual;
  if (!message.empty()) j["message"] = message;
  return j;
}

namespace {

// A variable is either an ordinary hypothesis x:delta or a nu-bound address
// variable aliasing a region.
using Entry = std::variant<Nat, std::string>;
using Env = std::map<std::string, Entry>;

struct Checker {
  const RegionDepthContext& R;
  std::optional<DepthError> err;

  bool fail(DepthError e) {
    if (!err) err = std::move(e);
    return false;
  }

  std::optional<Nat> region_depth(const std::string& r, const std::string& rule,
                                  const std::string& path) {
    auto it = R.find(r);
    if (it == R.end()) {
      fail({"UnknownRegion", rule, path, {}, {}, "region " + r + " has no declared depth"});
      return std::nullopt;
    }
    return it->second;
  }

  // Resolves a get/set operand: returns the pinned depth the operation must
  // run at, or nullopt for "same as a variable occurrence" / failure.
  bool check_operand(const RegionRef& ref, Env& env, Nat delta, const std::string& rule,
                     const std::string& path) {
    if (!ref.is_var()) {
      auto rd = region_depth(ref.region_name(), rule, path);
      if (!rd) return false;
      if (*rd != delta)
        return fail({"RegionDepthConflict", rule, path, *rd, delta,
                     "operation on region " + ref.region_name() + " is pinned to depth " +
                         std::to_string(*rd)});
      return true;
    }
    auto it = env.find(ref.name);
    if (it == env.end())
      return fail({"UnboundVariable", rule, path, {}, {}, "unbound '" + ref.name + "'"});
    if (auto* alias = std::get_if<std::string>(&it->second)) {
      auto rd = region_depth(*alias, rule, path);
      if (!rd) return false;
      if (*rd != delta)
        return fail({"RegionDepthConflict", rule, path, *rd, delta,
                     "address variable " + ref.name + " of region " + *alias});
      return true;
    }
    Nat want = std::get<Nat>(it->second);
    if (want != delta)
      return fail({"DepthMismatch", rule, path, want, delta,
                   "variable " + ref.name + " must occur at depth " + std::to_string(want)});
    return true;
  }

  bool check(const TermPtr& t, Env& env, Nat delta, std::string& path, DepthDerivation& out) {
    out.delta = delta;
    out.path = path;
    auto premise = [&](const TermPtr& c, char idx, Env& e, Nat d) {
      out.premises.emplace_back();
      path.push_back(idx);
      bool ok = check(c, e, d, path, out.premises.back());
      path.pop_back();
      return ok;
    };
    auto bind = [&](Env& e, const std::string& x, Entry v, auto&& k) {
      auto it = e.find(x);
      std::optional<Entry> saved;
      if (it != e.end()) saved = it->second;
      e[x] = std::move(v);
      bool r = k();
      if (saved)
        e[x] = *saved;
      else
        e.erase(x);
      return r;
    };
    switch (t->kind) {
      case TermKind::Unit:
        out.rule = "unit";
        return true;
      case TermKind::RegionVal: {
        out.rule = "region";
        return region_depth(t->ref.region_name(), out.rule, path).has_value();
      }
      case TermKind::Var: {
        out.rule = "var";
        auto it = env.find(t->name);
        if (it == env.end())
          return fail({"UnboundVariable", out.rule, path, {}, {}, "unbound '" + t->name + "'"});
        if (std::holds_alternative<std::string>(it->second)) return true;  // address variable
        Nat want = std::get<Nat>(it->second);
        if (want != delta)
          return fail({"DepthMismatch", out.rule, path, want, delta,
                       "variable " + t->name + " must occur at depth " + std::to_string(want)});
        return true;
      }
      case TermKind::Lam: {
        out.rule = "lam";
        Nat uses = fo_count(t->name, t->child0);
        if (uses > 1)
          return fail({"AffinityViolation", out.rule, path, 1, uses,
                       "lambda-bound " + t->name + " occurs " + std::to_string(uses) + " times"});
        return bind(env, t->name, Entry{delta},
                    [&] { return premise(t->child0, '0', env, delta); });
      }
      case TermKind::App:
        out.rule = "app";
        return premise(t->child0, '0', env, delta) && premise(t->child1, '1', env, delta);
      case TermKind::Bang:
        out.rule = "bang";
        return premise(t->child0, '0', env, delta + 1);
      case TermKind::LetBang: {
        out.rule = "let";
        if (!premise(t->child0, '0', env, delta)) return false;
        return bind(env, t->name, Entry{delta + 1},
                    [&] { return premise(t->child1, '1', env, delta); });
      }
      case TermKind::Get:
        out.rule = "get";
        return check_operand(t->ref, env, delta, out.rule, path);
      case TermKind::Set: {
        out.rule = "set";
        if (!check_operand(t->ref, env, delta, out.rule, path)) return false;
        if (!is_value(t->child0))
          return fail({"MalformedTerm", out.rule, path, {}, {}, "set takes a value"});
        return premise(t->child0, '0', env, delta);
      }
      case TermKind::Store: {
        out.rule = "store";
        if (delta != 0)
          return fail({"StoreDepth", out.rule, path, 0, delta, "stores are judged at depth 0"});
        if (t->ref.is_var())
          return fail({"MalformedTerm", out.rule, path, {}, {}, "store target must be concrete"});
        if (!is_value(t->child0))
          return fail({"MalformedTerm", out.rule, path, {}, {}, "a store holds a value"});
        auto rd = region_depth(t->ref.region_name(), out.rule, path);
        if (!rd) return false;
        return premise(t->child0, '0', env, *rd);
      }
      case TermKind::Par:
        out.rule = "par";
        return premise(t->child0, '0', env, delta) && premise(t->child1, '1', env, delta);
      case TermKind::New: {
        out.rule = "new";
        if (R.find(t->region) == R.end())
          return fail({"UnknownRegion", out.rule, path, {}, {},
                       "region " + t->region + " has no declared depth"});
        return bind(env, t->name, Entry{t->region},
                    [&] { return premise(t->child0, '0', env, delta); });
      }
      case TermKind::TyAbs:
      case TermKind::TyApp:
        // unreachable: checking runs on the erased tree
        out.rule = "erased";
        return premise(t->child0, '0', env, delta);
    }
    return false;
  }
};

}  // namespace

DepthResult check_depth(const TermPtr& p, const RegionDepthContext& R,
                        const VarDepthContext& gamma, Nat delta) {
  Checker c{R, std::nullopt};
  Env env;
  for (const auto& [x, d] : gamma) env[x] = Entry{d};
  DepthDerivation root;
  std::string path;
  bool ok = c.check(erase(p), env, delta, path, root);
  if (ok) return {std::move(root), std::nullopt};
  return {std::nullopt, std::move(c.err)};
}

namespace {

bool deriv_eq(const DepthDerivation& a, const DepthDerivation& b) {
  if (a.rule != b.rule || a.delta != b.delta || a.path != b.path) return false;
  if (a.premises.size() != b.premises.size()) return false;
  for (size_t i = 0; i < a.premises.size(); ++i)
    if (!deriv_eq(a.premises[i], b.premises[i])) return false;
  return true;
}

}  // namespace

bool derivation_replays(const DepthDerivation& d, const TermPtr& p, const RegionDepthContext& R,
                        const VarDepthContext& gamma, Nat delta) {
  auto res = check_depth(p, R, gamma, delta);
  return res.ok() && deriv_eq(d, *res.derivation);
}

namespace {

void render_rec(const DepthDerivation& d, const TermPtr& erased, int indent, std::string& out) {
  out.append(static_cast<size_t>(indent) * 2, ' ');
  auto sub = subterm_at(erased, d.path);
  std::string text = print_term(sub);
  if (text.size() > 60) text = text.substr(0, 57) + "...";
  out += "[" + d.rule + "] |-^" + std::to_string(d.delta) + "  " + text + "\n";
  for (const auto& pr : d.premises) render_rec(pr, erased, indent + 1, out);
}

}  // namespace

std::string render_derivation(const DepthDerivation& d, const TermPtr& p) {
  std::string out;
  render_rec(d, erase(p), 0, out);
  return out;
}

namespace {

struct ConstraintCollector {
  std::vector<DepthConstraint> out;
  std::set<std::string> regions;

  void add(const std::string& region, const std::optional<std::string>& base, Nat off,
           const std::string& path) {
    out.push_back({region, base, off, path});
    regions.insert(region);
    if (base) regions.insert(*base);
  }

  void region_of_ref(const RegionRef& ref, std::optional<std::string>& dst) {
    if (!ref.is_var()) dst = ref.region_name();
  }

  // nu-bound address variables alias their region for constraint purposes.
  void walk(const TermPtr& t, Nat depth, const std::optional<std::string>& store_base,
            std::map<std::string, std::string>& nu, std::string& path) {
    auto child = [&](const TermPtr& c, char idx, Nat d, const std::optional<std::string>& b) {
      path.push_back(idx);
      walk(c, d, b, nu, path);
      path.pop_back();
    };
    auto op_region = [&](const RegionRef& ref) -> std::optional<std::string> {
      if (!ref.is_var()) return ref.region_name();
      auto it = nu.find(ref.name);
      if (it != nu.end()) return it->second;
      return std::nullopt;  // lambda-bound address variable: unconstrained
    };
    switch (t->kind) {
      case TermKind::RegionVal:
        regions.insert(t->ref.region_name());
        return;
      case TermKind::Get:
      case TermKind::Set: {
        if (auto r = op_region(t->ref)) add(*r, store_base, depth, path);
        if (t->child0) child(t->child0, '0', depth, store_base);
        return;
      }
      case TermKind::Store: {
        auto r = t->ref.region_name();
        regions.insert(r);
        child(t->child0, '0', 0, r);
        return;
      }
      case TermKind::Bang:
        child(t->child0, '0', depth + 1, store_base);
        return;
      case TermKind::New: {
        regions.insert(t->region);
        auto saved = nu;
        nu[t->name] = t->region;
        child(t->child0, '0', depth, store_base);
        nu = std::move(saved);
        return;
      }
      default:
        if (t->child0) child(t->child0, '0', depth, store_base);
        if (t->child1) child(t->child1, '1', depth, store_base);
        return;
    }
  }
};

}  // namespace

InferResult infer_region_depths(const TermPtr& p) {
  ConstraintCollector cc;
  std::map<std::string, std::string> nu;
  std::string path;
  cc.walk(erase(p), 0, std::nullopt, nu, path);

  RegionDepthContext solved;
  auto describe = [&](const DepthConstraint& c) {
    std::string s = "R(" + c.region + ") = ";
    if (c.base) s += "R(" + *c.base + ") + ";
    s += std::to_string(c.offset) + " (at occurrence '" + c.path + "')";
    return s;
  };

  // Fixpoint propagation over difference constraints with offsets >= 0.
  std::vector<bool> applied(cc.out.size(), false);
  std::optional<std::string> conflict;
  auto propagate = [&] {
    bool progress = true;
    while (progress && !conflict) {
      progress = false;
      for (size_t i = 0; i < cc.out.size(); ++i) {
        const auto& c = cc.out[i];
        std::optional<Nat> value;
        if (!c.base) {
          value = c.offset;
        } else if (auto it = solved.find(*c.base); it != solved.end()) {
          value = it->second + c.offset;
        }
        if (!value) continue;
        auto it = solved.find(c.region);
        if (it == solved.end()) {
          solved[c.region] = *value;
          progress = true;
          applied[i] = true;
        } else if (it->second != *value) {
          std::string other = "R(" + c.region + ") = " + std::to_string(it->second);
          for (size_t j = 0; j < cc.out.size(); ++j) {
            if (j != i && applied[j] && cc.out[j].region == c.region) {
              other = describe(cc.out[j]);
              break;
            }
          }
          conflict = describe(c) + " conflicts with " + other;
          return;
        } else {
          applied[i] = true;
        }
      }
    }
  };
  propagate();
  // A constraint whose base region never gets anchored forms a free chain;
  // ground the base at 0 and resume.
  for (bool grounded = true; grounded && !conflict;) {
    grounded = false;
    for (const auto& c : cc.out) {
      if (c.base && !solved.count(*c.base)) {
        solved[*c.base] = 0;
        grounded = true;
        propagate();
        break;
      }
    }
  }
  if (conflict) {
    InferResult r;
    r.constraints = cc.out;
    r.conflict = *conflict;
    return r;
  }
  for (const auto& r : cc.regions)
    if (!solved.count(r)) solved[r] = 0;

  InferResult res;
  res.context = std::move(solved);
  res.constraints = std::move(cc.out);
  return res;
}

}  // namespace eal
