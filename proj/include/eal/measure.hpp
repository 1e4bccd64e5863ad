#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>
#include <json.hpp>

#include "eal/machine.hpp"
#include "eal/term.hpp"

namespace eal {

using BigInt = boost::multiprecision::cpp_int;

// Per-depth occurrence counts omega_n..omega_0, each >= 2. omega[d] is the
// count at depth d; the rightmost (most significant) lexicographic position
// is omega_0.
struct MeasureVector {
  Nat n = 0;
  std::vector<std::uint64_t> omega;  // indexed by depth, size n+1

  std::string render() const;  // "(omega_n, ..., omega_0)"
  bool operator==(const MeasureVector& o) const { return n == o.n && omega == o.omega; }
};

// Counting convention: `|` and `r <=` weigh 0, set(r) weighs 2, every other
// constructor 1; annotations are erased first.
std::uint64_t omega(const TermPtr& p, const RegionDepthContext& R, Nat i);
MeasureVector mu(const TermPtr& p, const RegionDepthContext& R, Nat n);

// Total number of counted nodes.
std::uint64_t term_size(const TermPtr& p);

// Right-to-left lexicographic order: omega_0 first. -1 when a < b.
int lex_compare(const MeasureVector& a, const MeasureVector& b);

struct TooLarge {
  std::uint64_t digit_cap = 0;
  bool operator==(const TooLarge&) const = default;
};
using TowerValue = std::variant<BigInt, TooLarge>;

bool tower_exact(const TowerValue& v);
std::string tower_render(const TowerValue& v);

std::uint64_t default_digit_cap();  // 10^6 decimal digits, EAL_DIGIT_CAP overrides

// t_alpha() = 0, t_alpha(x1,...,xn) = (alpha*x1)^(2^t_alpha(x2,...,xn)).
// `xs` is given deepest-first, i.e. (omega_alpha, ..., omega_0).
TowerValue tower(Nat alpha, const std::vector<std::uint64_t>& xs,
                 std::uint64_t digit_cap = default_digit_cap());

struct BoundCertificate {
  Nat alpha = 0;
  MeasureVector measure;
  TowerValue value;

  nlohmann::json to_json() const;
};

// Requires the program to be well-formed (checked by the caller via
// check_depth); throws EalError("NotWellFormed") otherwise.
BoundCertificate certificate(const TermPtr& p, const RegionDepthContext& R,
                             std::uint64_t digit_cap = default_digit_cap());

struct MonitorReport {
  bool ok = true;
  std::size_t first_violation = 0;   // step index (1-based) when !ok
  std::string reason;
  std::size_t tower_checked = 0;     // steps where both towers were exact
};

// Verifies strict lexicographic mu decrease at every step and, where exact,
// strict tower decrease.
MonitorReport monitor(const Trace& trace, const RegionDepthContext& R,
                      std::uint64_t digit_cap = default_digit_cap());

std::vector<std::string> trace_json_lines(const Trace& trace, const RegionDepthContext& R,
                                          bool with_measure,
                                          std::uint64_t digit_cap = default_digit_cap());

}  // namespace eal
