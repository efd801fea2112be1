#pragma once
// Canonical form: every expression normalizes to a pair of expanded
// polynomials num/den over the context's atoms, with jointly content-normalized
// integer coefficients, gcd(num,den)=1, and positive leading denominator
// coefficient.  Zero testing in the rational fragment is therefore decidable.

#include "lred/expr.hpp"
#include "lred/poly.hpp"

namespace lred {

struct RatFunc {
    Poly num;
    Poly den;  // never zero
    bool is_zero() const { return num.is_zero(); }
};

RatFunc rf_normalize(Poly num, Poly den);
RatFunc rf_add(const RatFunc& a, const RatFunc& b);
RatFunc rf_sub(const RatFunc& a, const RatFunc& b);
RatFunc rf_neg(const RatFunc& a);
RatFunc rf_mul(const RatFunc& a, const RatFunc& b);
RatFunc rf_div(const RatFunc& a, const RatFunc& b);
RatFunc rf_pow(const RatFunc& a, long k);
RatFunc rf_const(const Rat& c);
RatFunc rf_var(int atom);
bool rf_eq(const RatFunc& a, const RatFunc& b);

// expression <-> canonical form
RatFunc to_ratfunc(const Expr& e, Context& ctx);
Expr from_ratfunc(const RatFunc& r, const Context& ctx);
Expr simplify(const Expr& e, Context& ctx);
bool is_zero(const Expr& e, Context& ctx);   // exact rational-fragment zero test
bool expr_equal(const Expr& a, const Expr& b, Context& ctx);

// reduction modulo constraint rewrite rules (normal form on the variety)
RatFunc rf_reduce(const RatFunc& r, const std::vector<RewriteRule>& rules, Context& ctx);
Expr reduce_mod(const Expr& e, const std::vector<RewriteRule>& rules, Context& ctx);
bool is_zero_mod(const Expr& e, const std::vector<RewriteRule>& rules, Context& ctx);

// rule construction with the termination check
RewriteRule make_rule(const Expr& atom, int power, const Expr& rhs, bool dependent, Context& ctx);

}  // namespace lred
