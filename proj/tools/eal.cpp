#include <CLI11.hpp>
#include <iostream>
#include <json.hpp>
#include <sstream>

#include "eal/church.hpp"
#include "eal/depth.hpp"
#include "eal/gen.hpp"
#include "eal/machine.hpp"
#include "eal/measure.hpp"
#include "eal/reader.hpp"
#include "eal/stdlib.hpp"
#include "eal/typecheck.hpp"

using namespace eal;
using nlohmann::json;

namespace {

constexpr int kOk = 0, kNegative = 1, kUsage = 2;

std::string slurp(const std::string& path) {
  if (path == "-") {
    std::ostringstream ss;
    ss << std::cin.rdbuf();
    return ss.str();
  }
  return read_file(path);
}

struct LoadedUnit {
  SourceUnit unit;
  TermPtr body;  // stdlib-resolved
};

LoadedUnit load(const std::string& path, bool use_stdlib) {
  LoadedUnit out;
  out.unit = parse_unit(slurp(path));
  out.body = use_stdlib ? StdlibCatalog::get().resolve(out.unit.body) : out.unit.body;
  return out;
}

RegionDepthContext depths_for(const LoadedUnit& lu, bool infer) {
  if (infer) {
    auto res = infer_region_depths(lu.body);
    if (!res.ok()) throw EalError("Unsatisfiable", res.conflict);
    auto ctx = *res.context;
    for (const auto& [r, d] : lu.unit.region_depths())
      if (!ctx.count(r)) ctx[r] = d;
    return ctx;
  }
  return lu.unit.region_depths();
}

int cmd_check(const std::string& file, bool infer, bool derivation, bool json_out, Nat delta,
              bool use_stdlib) {
  auto lu = load(file, use_stdlib);
  RegionDepthContext R;
  try {
    R = depths_for(lu, infer);
  } catch (const EalError& e) {
    if (json_out) {
      json j{{"verdict", "unsatisfiable"}, {"error", e.what()}};
      std::cout << j.dump() << "\n";
    } else {
      std::cout << "region depths unsatisfiable: " << e.what() << "\n";
    }
    return kNegative;
  }
  VarDepthContext gamma;
  for (const auto& [x, d] : lu.unit.var_depths()) gamma[x] = d;
  auto res = check_depth(lu.body, R, gamma, delta);
  if (res.ok()) {
    Nat d = revised_depth(lu.body, R);
    if (json_out) {
      json j{{"verdict", "well-formed"}, {"depth", d}};
      json rj = json::object();
      for (const auto& [r, dep] : R) rj[r] = dep;
      j["regions"] = rj;
      std::cout << j.dump() << "\n";
    } else {
      std::cout << "well-formed at depth " << d << "\n";
      if (infer) {
        for (const auto& [r, dep] : R) std::cout << "  region " << r << " : " << dep << "\n";
      }
      if (derivation) std::cout << render_derivation(*res.derivation, lu.body);
    }
    return kOk;
  }
  if (json_out) {
    std::cout << res.error->to_json().dump() << "\n";
  } else {
    std::cout << "ill-formed: " << res.error->kind << " at occurrence '" << res.error->path
              << "'";
    if (!res.error->message.empty()) std::cout << " (" << res.error->message << ")";
    std::cout << "\n";
  }
  return kNegative;
}

int cmd_type(const std::string& file, const std::string& expect, bool json_out,
             bool use_stdlib) {
  auto lu = load(file, use_stdlib);
  auto R = lu.unit.region_types();
  auto gamma = lu.unit.var_types();
  TypePtr want = expect.empty() ? nullptr : parse_type(expect);
  auto res = check(lu.body, R, gamma, 0, want);
  if (res.ok()) {
    if (json_out) {
      json j{{"verdict", "well-typed"}, {"type", print_type(res.type)}};
      std::cout << j.dump() << "\n";
    } else {
      std::cout << "well-typed : " << print_type(res.type) << "\n";
    }
    return kOk;
  }
  if (json_out)
    std::cout << res.error->to_json().dump() << "\n";
  else
    std::cout << "ill-typed: " << res.error->render() << "\n";
  return kNegative;
}

int cmd_run(const std::string& file, const std::string& mode, std::uint64_t seed,
            Nat max_steps, bool trace_flag, bool trace_measure, const std::string& copy_pref,
            bool json_out, bool use_stdlib) {
  auto lu = load(file, use_stdlib);
  auto R = lu.unit.region_depths();
  auto st = MachineState::load(lu.body);

  if (mode == "exhaustive") {
    auto res = explore(st, max_steps == 0 ? 1'000'000 : (std::size_t)max_steps * 100);
    if (json_out) {
      json j;
      j["finalStates"] = json::array();
      for (const auto& f : res.finals) j["finalStates"].push_back(print_term(f.program()));
      j["statesVisited"] = res.states_visited;
      j["budgetExceeded"] = res.budget_exceeded;
      std::cout << j.dump() << "\n";
    } else {
      std::cout << res.finals.size() << " final state(s), " << res.states_visited
                << " state(s) visited\n";
      for (const auto& f : res.finals) std::cout << "  " << print_term(f.program()) << "\n";
    }
    return res.budget_exceeded ? kNegative : kOk;
  }

  SchedulerPolicy policy;
  policy.mode = mode == "seeded" ? PolicyMode::Seeded : PolicyMode::Deterministic;
  policy.seed = seed;
  policy.copy_pref = copy_pref == "consume" ? CopyPreference::Consume : CopyPreference::Copy;
  auto tr = run(st, policy, max_steps == 0 ? 10000 : max_steps);

  if (trace_flag || trace_measure) {
    if (json_out) {
      for (const auto& line : trace_json_lines(tr, R, trace_measure)) std::cout << line << "\n";
    } else {
      std::cout << "0: " << print_term(tr.initial.program()) << "\n";
      for (std::size_t i = 0; i < tr.steps.size(); ++i) {
        const auto& s = tr.steps[i];
        std::cout << (i + 1) << ": [" << rule_tag_name(s.choice.rule) << " t"
                  << s.choice.thread << "] " << print_term(s.after.program()) << "\n";
      }
    }
  }
  const auto& fin = tr.steps.empty() ? tr.initial : tr.steps.back().after;
  std::string status = tr.status == RunStatus::Value      ? "value"
                       : tr.status == RunStatus::Stuck    ? "stuck"
                                                          : "budget-exceeded";
  if (json_out && !trace_flag && !trace_measure) {
    json j{{"status", status}, {"steps", tr.steps.size()},
           {"final", print_term(fin.program())}};
    std::cout << j.dump() << "\n";
  } else if (!json_out) {
    std::cout << status << " after " << tr.steps.size() << " step(s): "
              << print_term(fin.program()) << "\n";
  }
  return tr.status == RunStatus::BudgetExceeded ? kNegative : kOk;
}

int cmd_bound(const std::string& file, bool infer, bool json_out, bool use_stdlib) {
  auto lu = load(file, use_stdlib);
  auto R = depths_for(lu, infer);
  VarDepthContext gamma;
  for (const auto& [x, d] : lu.unit.var_depths()) gamma[x] = d;
  auto chk = check_depth(lu.body, R, gamma, 0);
  if (!chk.ok()) {
    if (json_out)
      std::cout << json{{"error", "NotWellFormed"}}.dump() << "\n";
    else
      std::cout << "not well-formed: no certificate\n";
    return kNegative;
  }
  auto cert = certificate(lu.body, R);
  if (json_out) {
    std::cout << cert.to_json().dump() << "\n";
  } else {
    std::cout << "alpha = " << cert.alpha << "\nmu = " << cert.measure.render()
              << "\ntower = " << tower_render(cert.value) << "\n";
  }
  return kOk;
}

int cmd_enumerate(const std::string& file, bool json_out, bool use_stdlib) {
  auto lu = load(file, use_stdlib);
  auto st = MachineState::load(lu.body);
  auto cs = enumerate_redexes(st);
  if (json_out) {
    json arr = json::array();
    for (const auto& c : cs) {
      json j{{"rule", rule_tag_name(c.rule)},
             {"threadIndex", c.thread},
             {"occurrencePath", c.path}};
      if (c.entry) j["storeEntry"] = *c.entry;
      arr.push_back(j);
    }
    std::cout << arr.dump() << "\n";
  } else {
    if (cs.empty()) std::cout << "no redex (value or stuck)\n";
    for (const auto& c : cs) {
      std::cout << rule_tag_name(c.rule) << " thread=" << c.thread << " path='" << c.path
                << "'";
      if (c.entry) std::cout << " entry=" << *c.entry;
      std::cout << "\n";
    }
  }
  return kOk;
}

int cmd_stdlib(const std::string& action, const std::string& name, bool json_out) {
  const auto& cat = StdlibCatalog::get();
  if (action == "list") {
    if (json_out) {
      json arr = json::array();
      for (const auto& e : cat.entries())
        arr.push_back(json{{"name", e.name},
                           {"type", print_type(e.type)},
                           {"provenance", e.provenance}});
      std::cout << arr.dump() << "\n";
    } else {
      for (const auto& e : cat.entries())
        std::cout << e.name << " : " << print_type(e.type) << "    -- " << e.provenance
                  << "\n";
    }
    return kOk;
  }
  if (action == "show") {
    const auto* e = cat.find(name);
    if (!e) {
      std::cerr << "no stdlib entry '" << name << "'\n";
      return kUsage;
    }
    std::cout << e->source << "\n";
    return kOk;
  }
  if (action == "check") {
    bool all = true;
    for (const auto& o : cat.verify_all()) {
      all = all && o.ok;
      if (json_out) continue;
      std::cout << (o.ok ? "ok   " : "FAIL ") << o.name;
      if (!o.ok) std::cout << " : " << o.error;
      std::cout << "\n";
    }
    if (json_out) std::cout << json{{"allOk", all}}.dump() << "\n";
    return all ? kOk : kNegative;
  }
  std::cerr << "unknown stdlib action '" << action << "'\n";
  return kUsage;
}

int cmd_fuzz(std::uint64_t seed, Nat count, Nat max_depth, Nat max_size, bool typed,
             bool json_out) {
  std::size_t violations = 0, steps = 0;
  std::vector<std::string> reports;
  for (Nat i = 0; i < count; ++i) {
    GenConfig gc;
    gc.seed = seed + i;
    gc.max_depth = max_depth;
    gc.max_size = max_size;
    gc.typed = typed;
    auto gp = typed ? gen_typed(gc) : gen_well_formed(gc);
    OracleConfig oc;
    oc.typed = typed;
    oc.policy.seed = seed + i;
    auto rep = run_oracles(gp, oc);
    steps += rep.steps_checked;
    if (!rep.ok) {
      ++violations;
      std::string what = rep.violations.empty() ? "?" : rep.violations.front();
      reports.push_back("seed " + std::to_string(seed + i) + ": " + what +
                        (rep.counterexample
                             ? "; minimized: " + print_term(rep.counterexample)
                             : ""));
    }
  }
  if (json_out) {
    json j{{"count", count},
           {"typed", typed},
           {"stepsChecked", steps},
           {"violations", violations},
           {"reports", reports}};
    std::cout << j.dump() << "\n";
  } else {
    std::cout << count << " program(s), " << steps << " step(s) checked, " << violations
              << " violation(s)\n";
    for (const auto& r : reports) std::cout << "  " << r << "\n";
  }
  return violations == 0 ? kOk : kNegative;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"toolchain for the modal lambda-calculus with regions"};
  app.require_subcommand(1);
  bool json_out = false;

  std::string file, expect, mode = "deterministic", copy_pref = "copy", stdlib_action,
              stdlib_name;
  bool infer = false, derivation = false, trace_flag = false, trace_measure = false,
       no_stdlib = false, typed = false, exhaustive = false, deterministic = false;
  std::uint64_t seed = 0;
  bool seeded = false;
  Nat max_steps = 0, delta = 0, count = 100, max_depth = 3, max_size = 40;

  auto* c_check = app.add_subcommand("check", "depth-check a program");
  c_check->add_option("file", file)->required();
  c_check->add_flag("--infer-regions", infer);
  c_check->add_flag("--derivation", derivation);
  c_check->add_option("--delta", delta);
  c_check->add_flag("--no-stdlib", no_stdlib);

  auto* c_type = app.add_subcommand("type", "type-check a program");
  c_type->add_option("file", file)->required();
  c_type->add_option("--expect", expect, "check against this type");
  c_type->add_flag("--no-stdlib", no_stdlib);

  auto* c_run = app.add_subcommand("run", "evaluate a program");
  c_run->add_option("file", file)->required();
  auto* seed_opt = c_run->add_option("--seed", seed, "seeded scheduling");
  c_run->add_flag("--exhaustive", exhaustive, "explore all interleavings");
  c_run->add_flag("--deterministic", deterministic, "deterministic scheduling (default)");
  c_run->add_option("--max-steps", max_steps);
  c_run->add_flag("--trace", trace_flag);
  c_run->add_flag("--trace-measure", trace_measure);
  c_run->add_option("--copy-preference", copy_pref)
      ->check(CLI::IsMember({"copy", "consume"}));
  c_run->add_flag("--no-stdlib", no_stdlib);

  auto* c_bound = app.add_subcommand("bound", "print the elementary bound certificate");
  c_bound->add_option("file", file)->required();
  c_bound->add_flag("--infer-regions", infer);
  c_bound->add_flag("--no-stdlib", no_stdlib);

  auto* c_enum = app.add_subcommand("enumerate", "list the redex choices of the initial state");
  c_enum->add_option("file", file)->required();
  c_enum->add_flag("--no-stdlib", no_stdlib);

  auto* c_stdlib = app.add_subcommand("stdlib", "standard library catalog");
  c_stdlib->add_option("action", stdlib_action)->required()
      ->check(CLI::IsMember({"list", "show", "check"}));
  c_stdlib->add_option("name", stdlib_name);

  auto* c_fuzz = app.add_subcommand("fuzz", "generate programs and run the property oracles");
  c_fuzz->add_option("--seed", seed);
  c_fuzz->add_option("--count", count);
  c_fuzz->add_option("--max-depth", max_depth);
  c_fuzz->add_option("--max-size", max_size);
  c_fuzz->add_flag("--typed", typed);

  for (auto* sub : app.get_subcommands(nullptr))
    sub->add_flag("--json", json_out, "machine-readable output");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*c_check) return cmd_check(file, infer, derivation, json_out, delta, !no_stdlib);
    if (*c_type) return cmd_type(file, expect, json_out, !no_stdlib);
    if (*c_run) {
      if (exhaustive)
        mode = "exhaustive";
      else if (seed_opt->count() > 0 || seeded)
        mode = "seeded";
      else
        mode = "deterministic";
      (void)deterministic;
      return cmd_run(file, mode, seed, max_steps, trace_flag, trace_measure, copy_pref,
                     json_out, !no_stdlib);
    }
    if (*c_bound) return cmd_bound(file, infer, json_out, !no_stdlib);
    if (*c_enum) return cmd_enumerate(file, json_out, !no_stdlib);
    if (*c_stdlib) return cmd_stdlib(stdlib_action, stdlib_name, json_out);
    if (*c_fuzz) return cmd_fuzz(seed, count, max_depth, max_size, typed, json_out);
  } catch (const SyntaxError& e) {
    std::cerr << e.what() << "\n";
    return kNegative;
  } catch (const EalError& e) {
    std::cerr << e.kind << ": " << e.what() << "\n";
    return e.kind == "IoError" ? kUsage : kNegative;
  }
  return kUsage;
}
