#pragma once
// Differentiation and substitution on expression trees.

#include "lred/canonical.hpp"

namespace lred {

// partial derivative treating all other symbols as independent; opaque
// applications produce derivative atoms via the chain rule through their
// arguments
Expr diff(const Expr& e, int sym, Context& ctx);

// chart-aware derivative: additionally applies the implicit chain rule for
// dependent rewrite rules (s^k -> rhs with s a chart function of the rhs
// symbols), then reduces modulo the rules
Expr diff_chart(const Expr& e, int sym, const std::vector<RewriteRule>& rules, Context& ctx);

// simultaneous substitution of symbols, then simplify
Expr substitute(const Expr& e, const std::map<int, Expr>& bindings, Context& ctx);

// replace opaque functions by closed forms written in their declared argument
// symbols; derivative atoms become (chart-aware) derivatives of the closed
// form, and arguments are composed in
Expr substitute_functions(const Expr& e, const std::map<int, Expr>& closed,
                          const std::vector<RewriteRule>& rules, Context& ctx);

}  // namespace lred
