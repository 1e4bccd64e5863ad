#pragma once

#include <optional>

#include "eal/term.hpp"
#include "eal/type.hpp"

namespace eal {

// N = forall t. !(t -o t) -o !(t -o t)
TypePtr ty_numeral();

// Church numeral under bang discipline:
//   <n> = \f. let !f = f in !(\x. f(...(f x)...))
// With annotations: /\t. \(f : !(t -o t)). let !f = f in !(\(x : t). ...).
TermPtr numeral(Nat n, bool annotated = false);

// Structural recogniser on the erased term: accepts the uniform scheme and
// the let-free zero (\f. !(\x. x)). Does not normalize.
std::optional<Nat> match_numeral(const TermPtr& t);

}  // namespace eal
