#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <vector>

#include "eal/measure.hpp"

namespace eal::testsupport {

// Exact comparison (alpha*a0)^(2^A) <= (alpha*b0)^(2^B) where A and B are the
// towers of the tails. Taking 2^A-th roots is exact on naturals, so the
// comparison reduces to a0' <= b0'^(2^(B-A)). Requires computable tails with
// B >= A and a small head (<= 255).
inline bool shift_leq(Nat alpha, const std::vector<std::uint64_t>& xs,
                      const std::vector<std::uint64_t>& ys) {
  using boost::multiprecision::cpp_int;
  auto tail_tower = [&](const std::vector<std::uint64_t>& v) -> cpp_int {
    std::vector<std::uint64_t> tail(v.begin() + 1, v.end());
    auto t = tower(alpha, tail, 10'000'000);
    if (!tower_exact(t)) throw EalError("TestSetup", "tail tower not computable");
    return std::get<BigInt>(t);
  };
  cpp_int A = tail_tower(xs), B = tail_tower(ys);
  std::uint64_t a0 = alpha * xs[0], b0 = alpha * ys[0];
  if (a0 > 255 || b0 < 2) throw EalError("TestSetup", "head out of range");
  if (B < A) return false;  // monotonicity would be broken upstream
  cpp_int D = B - A;
  if (D >= 3) return true;  // b0^(2^3) >= 256 > a0
  unsigned e = 1u << D.convert_to<unsigned>();
  return cpp_int(a0) <= boost::multiprecision::pow(cpp_int(b0), e);
}

}  // namespace eal::testsupport
