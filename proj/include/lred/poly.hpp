#pragma once
// Sparse multivariate polynomials over exact rationals, with variables being
// interned atom ids.  Terms are kept sorted in descending graded-lex order
// (total degree first, then lexicographic on exponent vectors with the lower
// atom id more significant).  This is the canonical-form workhorse.

#include "lred/expr.hpp"

namespace lred {

struct Mono {
    // (atom id, exponent) pairs, sorted by atom id, exponents > 0
    std::vector<std::pair<int, int>> f;
    int deg() const;
    int deg_in(int var) const;
    bool is_one() const { return f.empty(); }
};

bool mono_eq(const Mono& a, const Mono& b);
// strict "greater in graded-lex" used for the descending term order
bool mono_gl_greater(const Mono& a, const Mono& b);
Mono mono_mul(const Mono& a, const Mono& b);
// exact division; caller guarantees divisibility
Mono mono_div(const Mono& a, const Mono& b);
bool mono_divides(const Mono& a, const Mono& b);  // a | b

struct Poly {
    // nonzero terms, descending graded-lex
    std::vector<std::pair<Mono, Rat>> t;

    bool is_zero() const { return t.empty(); }
    bool is_constant() const;
    int deg() const;
    int deg_in(int var) const;
    bool has_var(int var) const;
    static Poly zero() { return {}; }
    static Poly constant(const Rat& c);
    static Poly variable(int var);
};

Poly padd(const Poly& a, const Poly& b);
Poly pneg(const Poly& a);
Poly psub(const Poly& a, const Poly& b);
Poly pmul(const Poly& a, const Poly& b);
Poly pmul(const Poly& a, const Rat& c);
Poly ppow(const Poly& a, int k);
// partial derivative with respect to an atom, treating atoms as independent
Poly pderiv(const Poly& a, int var);
// exact division (throws LredError("InternalError") if not exact)
Poly pdiv_exact(const Poly& a, const Poly& b);
Poly pgcd(const Poly& a, const Poly& b);
bool poly_eq(const Poly& a, const Poly& b);
// all atom ids occurring in the polynomial
std::vector<int> poly_vars(const Poly& a);

}  // namespace lred
