#include "eal/church.hpp"

namespace eal {

TypePtr ty_numeral() {
  auto t = ty_var("t");
  auto tt = ty_arrow(t, ty_var("t"));
  return ty_forall("t", ty_arrow(ty_bang(tt), ty_bang(ty_arrow(ty_var("t"), ty_var("t")))));
}

TermPtr numeral(Nat n, bool annotated) {
  TermPtr body = mk_var("x");
  for (Nat i = 0; i < n; ++i) body = mk_app(mk_var("f"), body);
  if (!annotated) {
    auto inner = mk_bang(mk_lam("x", body));
    return mk_lam("f", mk_let_bang("f", mk_var("f"), inner));
  }
  auto t = ty_var("t");
  auto inner = mk_bang(mk_lam("x", body, t));
  auto lam = mk_lam("f", mk_let_bang("f", mk_var("f"), inner, ty_arrow(t, ty_var("t"))),
                    ty_bang(ty_arrow(t, ty_var("t"))));
  return mk_tyabs("t", lam);
}

std::optional<Nat> match_numeral(const TermPtr& raw) {
  auto t = erase(raw);
  if (t->kind != TermKind::Lam) return std::nullopt;
  const std::string& f_outer = t->name;
  auto inner = t->child0;

  std::string f;
  TermPtr banged;
  if (inner->kind == TermKind::LetBang) {
    if (inner->child0->kind != TermKind::Var || inner->child0->name != f_outer)
      return std::nullopt;
    f = inner->name;
    banged = inner->child1;
  } else {
    // Table 11 zero: \f. !(\x. x)
    f = f_outer;
    banged = inner;
  }
  if (banged->kind != TermKind::Bang) return std::nullopt;
  auto lam = banged->child0;
  if (lam->kind != TermKind::Lam) return std::nullopt;
  const std::string& x = lam->name;

  Nat n = 0;
  auto cur = lam->child0;
  while (cur->kind == TermKind::App) {
    if (cur->child0->kind != TermKind::Var || cur->child0->name != f) return std::nullopt;
    ++n;
    cur = cur->child1;
  }
  if (cur->kind != TermKind::Var || cur->name != x) return std::nullopt;
  if (inner->kind != TermKind::LetBang && n != 0) return std::nullopt;
  return n;
}

}  // namespace eal
