#pragma once
// Expression grammar parser and deterministic printer.
//
// Grammar: infix + - * / ^ with ^ tightest and right-associative (integer
// exponents only), unary minus, integer and p/q rational literals, identifiers
// [A-Za-z_][A-Za-z0-9_]*, applications f(a,b), derivative atoms D(f,i,j,...)
// (optionally followed by an explicit argument list) or the shorthand f_ij
// using the function's declared argument names.

#include "lred/expr.hpp"

namespace lred {

// parses and returns the canonical Expr
Expr parse(const std::string& text, Context& ctx);

// deterministic rendering; parse(print(e)) re-canonicalizes to e
std::string print(const Expr& e, const Context& ctx);

}  // namespace lred
