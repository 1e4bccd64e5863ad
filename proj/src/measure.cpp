#include "eal/measure.hpp"

#include <cmath>
#include <cstdlib>

#include "eal/reader.hpp"

namespace eal {

namespace {

std::uint64_t node_weight(TermKind k) {
  switch (k) {
    case TermKind::Par:
    case TermKind::Store:
      return 0;
    case TermKind::Set:
      return 2;
    default:
      return 1;
  }
}

}  // namespace

std::string MeasureVector::render() const {
  std::string out = "(";
  for (std::size_t i = omega.size(); i-- > 0;) {
    out += std::to_string(omega[i]);
    if (i != 0) out += ", ";
  }
  out += ")";
  return out;
}

std::uint64_t omega(const TermPtr& p, const RegionDepthContext& R, Nat i) {
  std::uint64_t count = 2;
  for (const auto& o : occurrences(p))
    if (revised_depth_of(o, R) == i) count += node_weight(o.kind);
  return count;
}

MeasureVector mu(const TermPtr& p, const RegionDepthContext& R, Nat n) {
  MeasureVector v;
  v.n = n;
  v.omega.assign(n + 1, 2);
  for (const auto& o : occurrences(p)) {
    Nat d = revised_depth_of(o, R);
    if (d > n) throw EalError("PaddingTooSmall", "occurrence at depth " + std::to_string(d) +
                                                     " exceeds padding " + std::to_string(n));
    v.omega[d] += node_weight(o.kind);
  }
  return v;
}

std::uint64_t term_size(const TermPtr& p) {
  std::uint64_t total = 0;
  for (const auto& o : occurrences(p)) total += node_weight(o.kind);
  return total;
}

int lex_compare(const MeasureVector& a, const MeasureVector& b) {
  if (a.n != b.n) throw EalError("LengthMismatch", "measure vectors of different padding");
  for (Nat d = 0; d <= a.n; ++d) {
    if (a.omega[d] < b.omega[d]) return -1;
    if (a.omega[d] > b.omega[d]) return 1;
  }
  return 0;
}

bool tower_exact(const TowerValue& v) { return std::holds_alternative<BigInt>(v); }

std::string tower_render(const TowerValue& v) {
  if (auto* b = std::get_if<BigInt>(&v)) return b->str();
  return "TooLarge";
}

std::uint64_t default_digit_cap() {
  static std::uint64_t cap = [] {
    if (const char* env = std::getenv("EAL_DIGIT_CAP")) {
      char* end = nullptr;
      auto v = std::strtoull(env, &end, 10);
      if (end && *end == '\0' && v > 0) return (std::uint64_t)v;
    }
    return (std::uint64_t)1'000'000;
  }();
  return cap;
}

TowerValue tower(Nat alpha, const std::vector<std::uint64_t>& xs, std::uint64_t digit_cap) {
  if (alpha < 1) throw EalError("BadArgument", "tower needs alpha >= 1");
  for (auto x : xs)
    if (x < 2) throw EalError("BadArgument", "tower entries must be >= 2");

  BigInt acc = 0;
  for (std::size_t k = xs.size(); k-- > 0;) {
    std::uint64_t base = alpha * xs[k];
    // exponent 2^acc must stay representable and the result under the cap
    if (acc > 62) return TooLarge{digit_cap};
    std::uint64_t e = (std::uint64_t)1 << acc.convert_to<unsigned>();
    double digits = (double)e * std::log10((double)base);
    if (digits > (double)digit_cap) return TooLarge{digit_cap};
    acc = boost::multiprecision::pow(BigInt(base), (unsigned)e);
  }
  return acc;
}

nlohmann::json BoundCertificate::to_json() const {
  nlohmann::json j;
  j["alpha"] = alpha;
  nlohmann::json m = nlohmann::json::array();
  for (std::size_t i = measure.omega.size(); i-- > 0;) m.push_back(measure.omega[i]);
  j["mu"] = m;
  if (auto* b = std::get_if<BigInt>(&value))
    j["tower"] = b->str();
  else
    j["tower"] = "TooLarge";
  return j;
}

BoundCertificate certificate(const TermPtr& p, const RegionDepthContext& R,
                             std::uint64_t digit_cap) {
  BoundCertificate c;
  c.alpha = revised_depth(p, R);
  c.measure = mu(p, R, c.alpha);
  if (c.alpha == 0) {
    // t_alpha is defined for alpha >= 1; depth-0 programs use alpha = 1,
    // which still bounds the single component.
    c.value = tower(1, {c.measure.omega[0]}, digit_cap);
  } else {
    std::vector<std::uint64_t> xs(c.measure.omega.rbegin(), c.measure.omega.rend());
    c.value = tower(c.alpha, xs, digit_cap);
  }
  return c;
}

MonitorReport monitor(const Trace& trace, const RegionDepthContext& R,
                      std::uint64_t digit_cap) {
  MonitorReport rep;
  TermPtr prev = trace.initial.program();
  Nat n = revised_depth(prev, R);
  Nat alpha = std::max<Nat>(n, 1);

  MeasureVector mprev = mu(prev, R, n);
  auto tprev = tower(alpha, {mprev.omega.rbegin(), mprev.omega.rend()}, digit_cap);

  for (std::size_t i = 0; i < trace.steps.size(); ++i) {
    TermPtr curp = trace.steps[i].after.program();
    MeasureVector mcur;
    try {
      mcur = mu(curp, R, n);
    } catch (const EalError&) {
      rep.ok = false;
      rep.first_violation = i + 1;
      rep.reason = "depth exceeded the initial program's depth";
      return rep;
    }
    if (lex_compare(mcur, mprev) >= 0) {
      rep.ok = false;
      rep.first_violation = i + 1;
      rep.reason = "measure did not strictly decrease: " + mprev.render() + " -> " +
                   mcur.render();
      return rep;
    }
    auto tcur = tower(alpha, {mcur.omega.rbegin(), mcur.omega.rend()}, digit_cap);
    if (tower_exact(tprev) && tower_exact(tcur)) {
      ++rep.tower_checked;
      if (std::get<BigInt>(tcur) >= std::get<BigInt>(tprev)) {
        rep.ok = false;
        rep.first_violation = i + 1;
        rep.reason = "tower value did not strictly decrease";
        return rep;
      }
    }
    mprev = std::move(mcur);
    tprev = std::move(tcur);
  }
  return rep;
}

std::vector<std::string> trace_json_lines(const Trace& trace, const RegionDepthContext& R,
                                          bool with_measure, std::uint64_t digit_cap) {
  std::vector<std::string> out;
  Nat n = with_measure ? revised_depth(trace.initial.program(), R) : 0;
  Nat alpha = std::max<Nat>(n, 1);

  auto line = [&](std::size_t stepno, const MachineState& st, const RedexChoice* c) {
    nlohmann::json j;
    j["step"] = stepno;
    if (c) {
      j["ruleTag"] = rule_tag_name(c->rule);
      j["threadIndex"] = c->thread;
      j["occurrencePath"] = c->path;
    } else {
      j["ruleTag"] = nullptr;
    }
    j["programText"] = print_term(st.program());
    if (with_measure) {
      auto m = mu(st.program(), R, n);
      nlohmann::json marr = nlohmann::json::array();
      for (std::size_t i = m.omega.size(); i-- > 0;) marr.push_back(m.omega[i]);
      j["measure"] = marr;
      j["tower"] = tower_render(tower(alpha, {m.omega.rbegin(), m.omega.rend()}, digit_cap));
    }
    out.push_back(j.dump());
  };

  line(0, trace.initial, nullptr);
  for (std::size_t i = 0; i < trace.steps.size(); ++i)
    line(i + 1, trace.steps[i].after, &trace.steps[i].choice);
  return out;
}

}  // namespace eal
