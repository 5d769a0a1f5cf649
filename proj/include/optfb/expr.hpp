#pragma once

#include <string>

#include "optfb/fock.hpp"

namespace optfb {

// Parses a sum of scalar-weighted symbols over {a, adag, x, y, n, I} into an
// operator on the given atomic space, e.g. "-0.5*y + 2*n" or "x".
// Coefficients are real; terms are separated by + or -.
Op parse_operator_expr(const std::string& text, const Space& space);

} // namespace optfb
