#include "eal/reader.hpp"

#include <cctype>
#include <functional>

#include "eal/church.hpp"

namespace eal {

namespace {

enum class Tok : std::uint8_t {
  Ident, Num, Lambda, TyLambda, Dot, LParen, RParen, LBracket, RBracket, Bang, Bar,
  Semi, Comma, Star, Colon, Equals, Lolli, FunArrow, StoreArrow, KwLet, KwIn, KwNew,
  KwFun, KwGet, KwSet, KwRegion, KwAddress, KwVar, KwType, KwOf, KwForall, KwReg, End,
};

struct Token {
  Tok tok;
  std::string text;
  Nat num = 0;
  int line = 1, col = 1;
};

struct Lexer {
  const std::string& src;
  size_t pos = 0;
  int line = 1, col = 1;

  explicit Lexer(const std::string& s) : src(s) {}

  void advance(size_t n = 1) {
    for (size_t i = 0; i < n && pos < src.size(); ++i, ++pos) {
      if (src[pos] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
  }

  static bool ident_start(char c) { return std::isalpha((unsigned char)c) || c == '_'; }
  static bool ident_cont(char c) {
    return std::isalnum((unsigned char)c) || c == '_' || c == '\'' || c == '#';
  }

  std::vector<Token> run() {
    std::vector<Token> out;
    while (pos < src.size()) {
      char c = src[pos];
      if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
        advance();
        continue;
      }
      if (c == '-' && pos + 1 < src.size() && src[pos + 1] == '-') {
        while (pos < src.size() && src[pos] != '\n') advance();
        continue;
      }
      int l = line, co = col;
      auto push = [&](Tok t, std::string text, size_t len) {
        out.push_back({t, std::move(text), 0, l, co});
        advance(len);
      };
      if (ident_start(c)) {
        size_t j = pos;
        while (j < src.size() && ident_cont(src[j])) ++j;
        std::string word = src.substr(pos, j - pos);
        Tok t = Tok::Ident;
        if (word == "let") t = Tok::KwLet;
        else if (word == "in") t = Tok::KwIn;
        else if (word == "new") t = Tok::KwNew;
        else if (word == "fun") t = Tok::KwFun;
        else if (word == "get") t = Tok::KwGet;
        else if (word == "set") t = Tok::KwSet;
        else if (word == "region") t = Tok::KwRegion;
        else if (word == "address") t = Tok::KwAddress;
        else if (word == "var") t = Tok::KwVar;
        else if (word == "type") t = Tok::KwType;
        else if (word == "of") t = Tok::KwOf;
        else if (word == "forall") t = Tok::KwForall;
        else if (word == "Reg") t = Tok::KwReg;
        push(t, word, word.size());
        continue;
      }
      if (std::isdigit((unsigned char)c)) {
        size_t j = pos;
        while (j < src.size() && std::isdigit((unsigned char)src[j])) ++j;
        Token t{Tok::Num, src.substr(pos, j - pos), 0, l, co};
        t.num = (Nat)std::stoul(t.text);
        out.push_back(t);
        advance(j - pos);
        continue;
      }
      if (c == '-' && pos + 1 < src.size() && src[pos + 1] == 'o') {
        push(Tok::Lolli, "-o", 2);
        continue;
      }
      if (c == '-' && pos + 1 < src.size() && src[pos + 1] == '>') {
        push(Tok::FunArrow, "->", 2);
        continue;
      }
      if (c == '<' && pos + 1 < src.size() && src[pos + 1] == '=') {
        push(Tok::StoreArrow, "<=", 2);
        continue;
      }
      if (c == '/' && pos + 1 < src.size() && src[pos + 1] == '\\') {
        push(Tok::TyLambda, "/\\", 2);
        continue;
      }
      switch (c) {
        case '\\': push(Tok::Lambda, "\\", 1); break;
        case '.': push(Tok::Dot, ".", 1); break;
        case '(': push(Tok::LParen, "(", 1); break;
        case ')': push(Tok::RParen, ")", 1); break;
        case '[': push(Tok::LBracket, "[", 1); break;
        case ']': push(Tok::RBracket, "]", 1); break;
        case '!': push(Tok::Bang, "!", 1); break;
        case '|': push(Tok::Bar, "|", 1); break;
        case ';': push(Tok::Semi, ";", 1); break;
        case ',': push(Tok::Comma, ",", 1); break;
        case '*': push(Tok::Star, "*", 1); break;
        case ':': push(Tok::Colon, ":", 1); break;
        case '=': push(Tok::Equals, "=", 1); break;
        default:
          throw SyntaxError(l, co, std::string("unexpected character '") + c + "'");
      }
    }
    out.push_back({Tok::End, "", 0, line, col});
    return out;
  }
};

struct Parser {
  std::vector<Token> toks;
  size_t i = 0;
  const std::map<std::string, TypePtr>* aliases = nullptr;
  int fresh_seq = 0;

  const Token& cur() const { return toks[i]; }
  bool at(Tok t) const { return cur().tok == t; }
  Token eat() { return toks[i++]; }
  Token expect(Tok t, const std::string& what) {
    if (!at(t)) throw SyntaxError(cur().line, cur().col, "expected " + what);
    return eat();
  }
  [[noreturn]] void fail(const std::string& msg) const {
    throw SyntaxError(cur().line, cur().col, msg);
  }

  // ---- types ----

  TypePtr type() {
    if (at(Tok::KwForall)) {
      eat();
      auto t = expect(Tok::Ident, "type variable").text;
      expect(Tok::Dot, "'.'");
      return ty_forall(t, type());
    }
    return arrow_type();
  }

  TypePtr arrow_type() {
    auto lhs = bang_type();
    if (at(Tok::Lolli)) {
      eat();
      if (!is_value_type(lhs))
        fail("the left of -o must be a value-type");
      return ty_arrow(lhs, type());  // right side admits forall
    }
    return lhs;
  }

  TypePtr bang_type() {
    if (at(Tok::Bang)) {
      eat();
      auto t = bang_type();
      if (!is_value_type(t)) fail("! applies to value-types");
      return ty_bang(t);
    }
    return atom_type();
  }

  TypePtr atom_type() {
    if (at(Tok::Num)) {
      auto t = eat();
      if (t.num != 1) fail("the only numeric type is 1");
      return ty_unit();
    }
    if (at(Tok::KwReg)) {
      eat();
      auto r = expect(Tok::Ident, "region name").text;
      auto a = atom_type();
      if (!is_value_type(a)) fail("Reg holds value-types");
      return ty_region(r, a);
    }
    if (at(Tok::LParen)) {
      eat();
      auto t = type();
      expect(Tok::RParen, "')'");
      return t;
    }
    if (at(Tok::Ident)) {
      auto t = eat();
      if (t.text == "B") return ty_behaviour();
      if (aliases) {
        auto it = aliases->find(t.text);
        if (it != aliases->end()) return it->second;
      }
      return ty_var(t.text);
    }
    fail("expected a type");
  }

  // ---- terms ----
  // par > seq(;) > lam-likes > app > bang > atom

  TermPtr par_term() {
    auto lhs = par_item();
    while (at(Tok::Bar)) {
      eat();
      lhs = mk_par(lhs, par_item());
    }
    return lhs;
  }

  TermPtr par_item() {
    if (at(Tok::Ident) && toks[i + 1].tok == Tok::StoreArrow) {
      auto name = eat().text;
      eat();
      auto pos = cur();
      auto v = seq_term();
      if (!is_value(erase(v)))
        throw SyntaxError(pos.line, pos.col, "a store holds a value");
      return mk_store(RegionRef::mk_var(name), v);
    }
    return seq_term();
  }

  TermPtr seq_term() {
    auto lhs = lam_term();
    if (at(Tok::Semi)) {
      eat();
      auto rhs = seq_term();
      // M ; N desugars to (\z. N) M with z fresh
      std::string z = "_seq" + std::to_string(fresh_seq++);
      return mk_app(mk_lam(z, rhs), lhs);
    }
    return lhs;
  }

  TermPtr lam_term() {
    if (at(Tok::Lambda)) {
      eat();
      std::string x;
      TypePtr ann = nullptr;
      if (at(Tok::LParen)) {
        eat();
        x = expect(Tok::Ident, "binder").text;
        expect(Tok::Colon, "':'");
        ann = type();
        expect(Tok::RParen, "')'");
      } else {
        x = expect(Tok::Ident, "binder").text;
      }
      expect(Tok::Dot, "'.'");
      return mk_lam(x, seq_term(), ann);
    }
    if (at(Tok::KwFun)) {
      eat();
      auto x = expect(Tok::Ident, "binder").text;
      expect(Tok::FunArrow, "'->'");
      return mk_lam(x, seq_term());
    }
    if (at(Tok::TyLambda)) {
      eat();
      auto t = expect(Tok::Ident, "type variable").text;
      expect(Tok::Dot, "'.'");
      return mk_tyabs(t, seq_term());
    }
    if (at(Tok::KwLet)) {
      eat();
      expect(Tok::Bang, "'!'");
      std::string x;
      TypePtr ann = nullptr;
      if (at(Tok::LParen)) {
        eat();
        x = expect(Tok::Ident, "binder").text;
        expect(Tok::Colon, "':'");
        ann = type();
        expect(Tok::RParen, "')'");
      } else {
        x = expect(Tok::Ident, "binder").text;
      }
      expect(Tok::Equals, "'='");
      auto scrut = seq_term();
      expect(Tok::KwIn, "'in'");
      return mk_let_bang(x, scrut, seq_term(), ann);
    }
    if (at(Tok::KwNew)) {
      eat();
      auto x = expect(Tok::Ident, "binder").text;
      expect(Tok::Colon, "':'");
      auto r = expect(Tok::Ident, "region name").text;
      expect(Tok::KwIn, "'in'");
      return mk_new(x, r, seq_term());
    }
    return app_term();
  }

  TermPtr app_term() {
    auto lhs = prefix_term();
    for (;;) {
      if (at(Tok::LBracket)) {
        eat();
        auto ty = type();
        expect(Tok::RBracket, "']'");
        lhs = mk_tyapp(lhs, ty);
        continue;
      }
      if (starts_prefix()) {
        lhs = mk_app(lhs, prefix_term());
        continue;
      }
      return lhs;
    }
  }

  bool starts_prefix() const {
    switch (cur().tok) {
      case Tok::Bang:
      case Tok::Star:
      case Tok::Ident:
      case Tok::Num:
      case Tok::KwGet:
      case Tok::KwSet:
      case Tok::LParen:
        return true;
      default:
        return false;
    }
  }

  TermPtr prefix_term() {
    if (at(Tok::Bang)) {
      eat();
      return mk_bang(prefix_term());
    }
    return atom_term();
  }

  TermPtr atom_term() {
    switch (cur().tok) {
      case Tok::Star:
        eat();
        return mk_unit();
      case Tok::Num: {
        auto t = eat();
        return numeral(t.num, /*annotated=*/true);
      }
      case Tok::Ident:
        return mk_var(eat().text);
      case Tok::KwGet: {
        eat();
        expect(Tok::LParen, "'('");
        auto r = expect(Tok::Ident, "region").text;
        expect(Tok::RParen, "')'");
        return mk_get(RegionRef::mk_var(r));
      }
      case Tok::KwSet: {
        eat();
        expect(Tok::LParen, "'('");
        auto r = expect(Tok::Ident, "region").text;
        expect(Tok::Comma, "','");
        auto v = par_term();
        expect(Tok::RParen, "')'");
        return mk_set(RegionRef::mk_var(r), v);
      }
      case Tok::LParen: {
        eat();
        auto t = par_term();
        expect(Tok::RParen, "')'");
        return t;
      }
      default:
        fail("expected a term");
    }
  }
};

// Scope-aware rebinding of parsed identifiers against the declarations:
// free occurrences of declared region/address names become constants.
struct Resolver {
  std::map<std::string, RegionRef> consts;  // region + address names
  std::set<std::string> regions;
  bool assume_regions = false;

  RegionRef resolve_ref(const RegionRef& ref, const std::set<std::string>& bound) const {
    if (!ref.is_var()) return ref;
    if (bound.count(ref.name)) return ref;
    auto it = consts.find(ref.name);
    if (it != consts.end()) return it->second;
    if (assume_regions) return RegionRef::mk_region(ref.name);
    throw EalError("UndeclaredRegion", "undeclared region or address '" + ref.name + "'");
  }

  TermPtr go(const TermPtr& t, std::set<std::string>& bound) const {
    switch (t->kind) {
      case TermKind::Unit:
      case TermKind::RegionVal:
        return t;
      case TermKind::Var: {
        if (bound.count(t->name)) return t;
        auto it = consts.find(t->name);
        if (it != consts.end()) return mk_region_val(it->second);
        return t;
      }
      case TermKind::Get:
        return mk_get(resolve_ref(t->ref, bound));
      case TermKind::Set:
        return mk_set(resolve_ref(t->ref, bound), go(t->child0, bound));
      case TermKind::Store: {
        auto r = resolve_ref(t->ref, bound);
        if (r.is_var()) throw EalError("UndeclaredRegion", "store target '" + r.name + "'");
        return mk_store(r, go(t->child0, bound));
      }
      case TermKind::Lam:
      case TermKind::New: {
        if (t->kind == TermKind::New && !regions.count(t->region) && !assume_regions)
          throw EalError("UndeclaredRegion", "undeclared region '" + t->region + "'");
        bool ins = bound.insert(t->name).second;
        auto b = go(t->child0, bound);
        if (ins) bound.erase(t->name);
        if (t->kind == TermKind::Lam) return mk_lam(t->name, b, t->ann);
        return mk_new(t->name, t->region, b);
      }
      case TermKind::LetBang: {
        auto s = go(t->child0, bound);
        bool ins = bound.insert(t->name).second;
        auto b = go(t->child1, bound);
        if (ins) bound.erase(t->name);
        return mk_let_bang(t->name, s, b, t->ann);
      }
      case TermKind::App:
        return mk_app(go(t->child0, bound), go(t->child1, bound));
      case TermKind::Par:
        return mk_par(go(t->child0, bound), go(t->child1, bound));
      case TermKind::Bang:
        return mk_bang(go(t->child0, bound));
      case TermKind::TyAbs:
        return mk_tyabs(t->name, go(t->child0, bound));
      case TermKind::TyApp:
        return mk_tyapp(go(t->child0, bound), t->ann);
    }
    return t;
  }
};

}  // namespace

RegionDepthContext SourceUnit::region_depths() const {
  RegionDepthContext out;
  for (const auto& r : regions) out[r.name] = r.depth.value_or(0);
  return out;
}

RegionTypeContext SourceUnit::region_types() const {
  RegionTypeContext out;
  for (const auto& r : regions) out[r.name] = {r.depth.value_or(0), r.type};
  return out;
}

TypedVarContext SourceUnit::var_types() const {
  TypedVarContext out;
  for (const auto& v : vars)
    if (v.type) out[v.name] = {v.depth, v.type};
  return out;
}

std::map<std::string, Nat> SourceUnit::var_depths() const {
  std::map<std::string, Nat> out;
  for (const auto& v : vars) out[v.name] = v.depth;
  return out;
}

SourceUnit parse_unit(const std::string& text) {
  Lexer lex(text);
  Parser p{lex.run()};
  SourceUnit u;
  p.aliases = &u.aliases;

  for (;;) {
    if (p.at(Tok::KwRegion)) {
      p.eat();
      RegionDecl d;
      d.name = p.expect(Tok::Ident, "region name").text;
      if (p.at(Tok::Colon)) {
        p.eat();
        d.depth = p.expect(Tok::Num, "depth").num;
      }
      if (p.at(Tok::KwOf)) {
        p.eat();
        d.type = p.type();
      }
      p.expect(Tok::Semi, "';'");
      for (const auto& r : u.regions)
        if (r.name == d.name)
          throw EalError("DuplicateRegion", "region '" + d.name + "' declared twice");
      u.regions.push_back(std::move(d));
      continue;
    }
    if (p.at(Tok::KwAddress)) {
      p.eat();
      AddressDecl d;
      d.name = p.expect(Tok::Ident, "address name").text;
      p.expect(Tok::Colon, "':'");
      d.region = p.expect(Tok::Ident, "region name").text;
      p.expect(Tok::Semi, "';'");
      u.addresses.push_back(std::move(d));
      continue;
    }
    // `var` is a declaration only when followed by IDENT ':'; `type` only
    // when followed by IDENT '='. Otherwise they are ordinary identifiers.
    if (p.at(Tok::KwVar)) {
      p.eat();
      VarDecl d;
      d.name = p.expect(Tok::Ident, "variable name").text;
      p.expect(Tok::Colon, "':'");
      d.depth = p.expect(Tok::Num, "depth").num;
      if (p.at(Tok::KwOf)) {
        p.eat();
        d.type = p.type();
      }
      p.expect(Tok::Semi, "';'");
      u.vars.push_back(std::move(d));
      continue;
    }
    if (p.at(Tok::KwType)) {
      p.eat();
      auto name = p.expect(Tok::Ident, "type name").text;
      p.expect(Tok::Equals, "'='");
      auto ty = p.type();
      p.expect(Tok::Semi, "';'");
      u.aliases[name] = ty;
      continue;
    }
    break;
  }

  auto body = p.par_term();
  if (!p.at(Tok::End)) p.fail("trailing input after program body");

  Resolver res;
  for (const auto& r : u.regions) {
    res.consts[r.name] = RegionRef::mk_region(r.name);
    res.regions.insert(r.name);
  }
  for (const auto& a : u.addresses) {
    if (res.consts.count(a.name))
      throw EalError("DuplicateRegion", "name '" + a.name + "' declared twice");
    if (!res.regions.count(a.region))
      throw EalError("UndeclaredRegion", "address '" + a.name + "' uses undeclared region '" +
                                             a.region + "'");
    res.consts[a.name] = RegionRef::mk_address(a.name, a.region);
  }
  std::set<std::string> bound;
  u.body = canonical_rename(res.go(body, bound));
  return u;
}

TermPtr parse_term(const std::string& text) {
  Lexer lex(text);
  Parser p{lex.run()};
  auto body = p.par_term();
  if (!p.at(Tok::End)) p.fail("trailing input after term");
  Resolver res;
  res.assume_regions = true;
  std::set<std::string> bound;
  return canonical_rename(res.go(body, bound));
}

TypePtr parse_type(const std::string& text) {
  Lexer lex(text);
  Parser p{lex.run()};
  auto t = p.type();
  if (!p.at(Tok::End)) p.fail("trailing input after type");
  return t;
}

namespace {

// Node precedences: Par 0, binder forms and stores 1, application 2,
// bang 3, atoms 4. A node is parenthesised when its precedence is below
// the context's.
int node_prec(const TermPtr& t) {
  switch (t->kind) {
    case TermKind::Par:
      return 0;
    case TermKind::Lam:
    case TermKind::LetBang:
    case TermKind::New:
    case TermKind::TyAbs:
    case TermKind::Store:
      return 1;
    case TermKind::App:
    case TermKind::TyApp:
      return 2;
    case TermKind::Bang:
      return 3;
    default:
      return 4;
  }
}

void print_rec(const TermPtr& t, int prec, std::string& out) {
  bool paren = node_prec(t) < prec;
  if (paren) out += "(";
  switch (t->kind) {
    case TermKind::Unit:
      out += "*";
      break;
    case TermKind::Var:
      out += t->name;
      break;
    case TermKind::RegionVal:
      out += t->ref.name;
      break;
    case TermKind::Get:
      out += "get(" + t->ref.name + ")";
      break;
    case TermKind::Set:
      out += "set(" + t->ref.name + ", ";
      print_rec(t->child0, 0, out);
      out += ")";
      break;
    case TermKind::Store:
      out += t->ref.name + " <= ";
      print_rec(t->child0, 1, out);
      break;
    case TermKind::Par:
      print_rec(t->child0, 0, out);
      out += " | ";
      print_rec(t->child1, 1, out);
      break;
    case TermKind::Lam:
      if (t->ann) {
        out += "\\(" + t->name + " : " + print_type(t->ann) + "). ";
      } else {
        out += "\\" + t->name + ". ";
      }
      print_rec(t->child0, 1, out);
      break;
    case TermKind::TyAbs:
      out += "/\\" + t->name + ". ";
      print_rec(t->child0, 1, out);
      break;
    case TermKind::New:
      out += "new " + t->name + ":" + t->region + " in ";
      print_rec(t->child0, 1, out);
      break;
    case TermKind::LetBang:
      if (t->ann) {
        out += "let !(" + t->name + " : " + print_type(t->ann) + ") = ";
      } else {
        out += "let !" + t->name + " = ";
      }
      print_rec(t->child0, 1, out);
      out += " in ";
      print_rec(t->child1, 1, out);
      break;
    case TermKind::App:
      print_rec(t->child0, 2, out);
      out += " ";
      print_rec(t->child1, 3, out);
      break;
    case TermKind::TyApp:
      print_rec(t->child0, 2, out);
      out += " [" + print_type(t->ann) + "]";
      break;
    case TermKind::Bang:
      out += "!";
      print_rec(t->child0, 3, out);
      break;
  }
  if (paren) out += ")";
}

}  // namespace

std::string print_term(const TermPtr& t) {
  std::string out;
  print_rec(t, 0, out);
  return out;
}

std::string print_unit(const SourceUnit& u) {
  std::string out;
  for (const auto& [name, ty] : u.aliases) out += "type " + name + " = " + print_type(ty) + ";\n";
  for (const auto& r : u.regions) {
    out += "region " + r.name;
    if (r.depth) out += " : " + std::to_string(*r.depth);
    if (r.type) out += " of " + print_type(r.type);
    out += ";\n";
  }
  for (const auto& a : u.addresses) out += "address " + a.name + " : " + a.region + ";\n";
  for (const auto& v : u.vars) {
    out += "var " + v.name + " : " + std::to_string(v.depth);
    if (v.type) out += " of " + print_type(v.type);
    out += ";\n";
  }
  out += print_term(u.body);
  out += "\n";
  return out;
}

namespace {

TermPtr key_rename(const TermPtr& t, std::map<std::string, std::string>& env, int& next) {
  auto bind = [&](const std::string& x, auto&& k) -> TermPtr {
    std::string nx = "$" + std::to_string(next++);
    auto it = env.find(x);
    std::optional<std::string> saved;
    if (it != env.end()) saved = it->second;
    env[x] = nx;
    auto r = k(nx);
    if (saved)
      env[x] = *saved;
    else
      env.erase(x);
    return r;
  };
  auto ref = [&](const RegionRef& r) {
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
      return mk_get(ref(t->ref));
    case TermKind::Set:
      return mk_set(ref(t->ref), key_rename(t->child0, env, next));
    case TermKind::Store:
      return mk_store(ref(t->ref), key_rename(t->child0, env, next));
    case TermKind::Lam:
      return bind(t->name,
                  [&](const std::string& nx) { return mk_lam(nx, key_rename(t->child0, env, next)); });
    case TermKind::New:
      return bind(t->name, [&](const std::string& nx) {
        return mk_new(nx, t->region, key_rename(t->child0, env, next));
      });
    case TermKind::LetBang: {
      auto s = key_rename(t->child0, env, next);
      return bind(t->name, [&](const std::string& nx) {
        return mk_let_bang(nx, s, key_rename(t->child1, env, next));
      });
    }
    case TermKind::App:
      return mk_app(key_rename(t->child0, env, next), key_rename(t->child1, env, next));
    case TermKind::Par:
      return mk_par(key_rename(t->child0, env, next), key_rename(t->child1, env, next));
    case TermKind::Bang:
      return mk_bang(key_rename(t->child0, env, next));
    case TermKind::TyAbs:
      return mk_tyabs(t->name, key_rename(t->child0, env, next));
    case TermKind::TyApp:
      return mk_tyapp(key_rename(t->child0, env, next), t->ann);
  }
  return t;
}

}  // namespace

std::string canonical_key(const TermPtr& t) {
  std::map<std::string, std::string> env;
  int next = 0;
  return print_term(key_rename(erase(t), env, next));
}

}  // namespace eal
