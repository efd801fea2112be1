#include "lred/canonical.hpp"

#include <algorithm>

namespace lred {

namespace {

// joint content normalization: integer coefficients, overall gcd 1, leading
// denominator coefficient positive
void joint_normalize(Poly& num, Poly& den) {
    Int gn = 0, ld = 1;
    auto scan = [&](const Poly& p) {
        for (auto& [m, c] : p.t) {
            Int n = boost::multiprecision::abs(numerator(c));
            Int d = denominator(c);
            gn = gn == 0 ? n : gcd(gn, n);
            ld = ld / gcd(ld, d) * d;
        }
    };
    scan(num);
    scan(den);
    if (gn == 0) gn = 1;
    Rat scale(ld, gn);
    if (den.t.front().second < 0) scale = -scale;
    for (auto& [m, c] : num.t) c *= scale;
    for (auto& [m, c] : den.t) c *= scale;
}

}  // namespace

RatFunc rf_normalize(Poly num, Poly den) {
    if (den.is_zero()) throw LredError("DivisionByZeroExpr", "denominator is identically zero");
    if (num.is_zero()) return RatFunc{Poly::zero(), Poly::constant(1)};
    if (num.is_constant() || den.is_constant()) {
        joint_normalize(num, den);
        return RatFunc{std::move(num), std::move(den)};
    }
    Poly g = pgcd(num, den);
    if (!g.is_constant() || (g.t.size() == 1 && g.t[0].second != 1)) {
        num = pdiv_exact(num, g);
        den = pdiv_exact(den, g);
    }
    joint_normalize(num, den);
    return RatFunc{std::move(num), std::move(den)};
}

RatFunc rf_const(const Rat& c) { return rf_normalize(Poly::constant(c), Poly::constant(1)); }
RatFunc rf_var(int atom) { return RatFunc{Poly::variable(atom), Poly::constant(1)}; }

namespace {

Poly div_if(const Poly& p, const Poly& g) {
    return g.is_constant() ? p : pdiv_exact(p, g);
}

RatFunc finish(Poly num, Poly den) {
    // inputs already coprime by construction
    if (num.is_zero()) return RatFunc{Poly::zero(), Poly::constant(1)};
    joint_normalize(num, den);
    return RatFunc{std::move(num), std::move(den)};
}

}  // namespace

// operands are normalized (coprime) pairs, so cancellation can be targeted at
// small structured gcds instead of one giant gcd of the combined num/den
RatFunc rf_add(const RatFunc& a, const RatFunc& b) {
    Poly g = pgcd(a.den, b.den);
    if (g.is_constant())
        return finish(padd(pmul(a.num, b.den), pmul(b.num, a.den)), pmul(a.den, b.den));
    Poly num = padd(pmul(a.num, pdiv_exact(b.den, g)), pmul(b.num, pdiv_exact(a.den, g)));
    Poly den = pmul(pdiv_exact(a.den, g), b.den);
    // any common factor of num/den divides g; peel by multiplicity, stopping
    // once den has no copy of the factor left (num may retain higher powers)
    Poly h = pgcd(num, g);
    while (!h.is_constant() && !num.is_zero()) {
        Poly hd = pgcd(h, den);
        if (hd.is_constant()) break;
        num = pdiv_exact(num, hd);
        den = pdiv_exact(den, hd);
        h = pgcd(num, hd);
    }
    return finish(std::move(num), std::move(den));
}

RatFunc rf_neg(const RatFunc& a) { return RatFunc{pneg(a.num), a.den}; }
RatFunc rf_sub(const RatFunc& a, const RatFunc& b) { return rf_add(a, rf_neg(b)); }

RatFunc rf_mul(const RatFunc& a, const RatFunc& b) {
    Poly g1 = pgcd(a.num, b.den), g2 = pgcd(b.num, a.den);
    return finish(pmul(div_if(a.num, g1), div_if(b.num, g2)),
                  pmul(div_if(a.den, g2), div_if(b.den, g1)));
}

RatFunc rf_div(const RatFunc& a, const RatFunc& b) {
    if (b.num.is_zero()) throw LredError("DivisionByZeroExpr", "division by zero expression");
    return rf_mul(a, RatFunc{b.den, b.num});
}

RatFunc rf_pow(const RatFunc& a, long k) {
    if (k == 0) return rf_const(1);
    if (k < 0) {
        if (a.num.is_zero()) throw LredError("DivisionByZeroExpr", "negative power of zero");
        return rf_pow(RatFunc{a.den, a.num}, -k);
    }
    // powers of a coprime pair stay coprime
    return finish(ppow(a.num, static_cast<int>(k)), ppow(a.den, static_cast<int>(k)));
}

bool rf_eq(const RatFunc& a, const RatFunc& b) {
    return poly_eq(a.num, b.num) && poly_eq(a.den, b.den);
}

RatFunc to_ratfunc(const Expr& e, Context& ctx) {
    switch (e->kind) {
        case ExprKind::Num:
            return rf_const(e->value);
        case ExprKind::Sym:
            return rf_var(ctx.intern_atom(esym(e->sym)));
        case ExprKind::Add: {
            RatFunc r = rf_const(0);
            for (const auto& k : e->kids) r = rf_add(r, to_ratfunc(k, ctx));
            return r;
        }
        case ExprKind::Mul: {
            RatFunc r = rf_const(1);
            for (const auto& k : e->kids) r = rf_mul(r, to_ratfunc(k, ctx));
            return r;
        }
        case ExprKind::Pow:
            return rf_pow(to_ratfunc(e->base, ctx), e->expo);
        case ExprKind::Fn: {
            std::vector<Expr> cargs;
            cargs.reserve(e->kids.size());
            for (const auto& a : e->kids) cargs.push_back(simplify(a, ctx));
            return rf_var(ctx.intern_atom(efn(e->fn, e->deriv, std::move(cargs))));
        }
    }
    throw LredError("InternalError", "unreachable expr kind");
}

namespace {

Expr poly_to_expr(const Poly& p, const Context& ctx) {
    if (p.is_zero()) return eint(0);
    std::vector<Expr> terms;
    for (auto& [m, c] : p.t) {
        std::vector<Expr> factors;
        if (c != 1 || m.is_one()) factors.push_back(enum_(c));
        for (auto& [v, e] : m.f) factors.push_back(epow(ctx.atom(v), e));
        terms.push_back(emul(std::move(factors)));
    }
    return eadd(std::move(terms));
}

}  // namespace

Expr from_ratfunc(const RatFunc& r, const Context& ctx) {
    Expr num = poly_to_expr(r.num, ctx);
    if (r.den.is_constant() && !r.den.is_zero() && r.den.t[0].second == 1) return num;
    return ediv(num, poly_to_expr(r.den, ctx));
}

Expr simplify(const Expr& e, Context& ctx) { return from_ratfunc(to_ratfunc(e, ctx), ctx); }

bool is_zero(const Expr& e, Context& ctx) { return to_ratfunc(e, ctx).is_zero(); }

bool expr_equal(const Expr& a, const Expr& b, Context& ctx) {
    return is_zero(esub(a, b), ctx);
}

RewriteRule make_rule(const Expr& atom, int power, const Expr& rhs, bool dependent, Context& ctx) {
    if (power < 1) throw LredError("NonTerminatingRule", "rule power must be >= 1");
    Expr catom;
    if (atom->kind == ExprKind::Sym) {
        catom = atom;
    } else if (atom->kind == ExprKind::Fn) {
        std::vector<Expr> cargs;
        for (const auto& a : atom->kids) cargs.push_back(simplify(a, ctx));
        catom = efn(atom->fn, atom->deriv, std::move(cargs));
    } else {
        throw LredError("NonTerminatingRule", "rule lhs must be a symbol or opaque application");
    }
    int var = ctx.intern_atom(catom);
    Expr crhs = simplify(rhs, ctx);
    RatFunc rr = to_ratfunc(crhs, ctx);
    if (rr.num.deg_in(var) >= power || rr.den.has_var(var))
        throw LredError("NonTerminatingRule",
                        "rule rhs must have lower degree in the ruled atom");
    return RewriteRule{catom, power, crhs, dependent};
}

namespace {

// rewrite every a^j (j >= k) in p using a^k = R; exact rational-function result
RatFunc poly_reduce_rule(const Poly& p, int var, int k, const RatFunc& R, Context& ctx) {
    // group terms by quotient j / k
    std::map<int, Poly> groups;  // q -> sum of terms with a-degree j, a replaced by a^(j%k)
    for (auto& [m, c] : p.t) {
        int j = m.deg_in(var);
        int q = j / k, rem = j % k;
        Mono m2;
        for (auto& [v, e] : m.f) {
            if (v == var) {
                if (rem > 0) m2.f.emplace_back(v, rem);
            } else {
                m2.f.emplace_back(v, e);
            }
        }
        Poly term;
        term.t.emplace_back(m2, c);
        groups[q] = padd(groups[q], term);
    }
    RatFunc out = rf_const(0);
    RatFunc Rq = rf_const(1);
    int cur = 0;
    for (auto& [q, pq] : groups) {
        while (cur < q) {
            Rq = rf_mul(Rq, R);
            ++cur;
        }
        out = rf_add(out, rf_mul(RatFunc{pq, Poly::constant(1)}, Rq));
    }
    return out;
}

}  // namespace

RatFunc rf_reduce(const RatFunc& r, const std::vector<RewriteRule>& rules, Context& ctx) {
    if (rules.empty()) return r;
    struct Compiled {
        int var;
        int power;
        RatFunc rhs;
    };
    std::vector<Compiled> cs;
    cs.reserve(rules.size());
    for (const auto& rule : rules)
        cs.push_back({ctx.intern_atom(rule.atom), rule.power, to_ratfunc(rule.rhs, ctx)});
    RatFunc cur = r;
    for (int pass = 0; pass < 64; ++pass) {
        bool changed = false;
        for (const auto& c : cs) {
            if (cur.num.deg_in(c.var) >= c.power || cur.den.deg_in(c.var) >= c.power) {
                RatFunc nn = poly_reduce_rule(cur.num, c.var, c.power, c.rhs, ctx);
                RatFunc dd = poly_reduce_rule(cur.den, c.var, c.power, c.rhs, ctx);
                cur = rf_div(nn, dd);
                changed = true;
            }
        }
        if (!changed) return cur;
    }
    throw LredError("NonTerminatingRule", "rule set failed to reach a normal form");
}

Expr reduce_mod(const Expr& e, const std::vector<RewriteRule>& rules, Context& ctx) {
    return from_ratfunc(rf_reduce(to_ratfunc(e, ctx), rules, ctx), ctx);
}

bool is_zero_mod(const Expr& e, const std::vector<RewriteRule>& rules, Context& ctx) {
    return rf_reduce(to_ratfunc(e, ctx), rules, ctx).is_zero();
}

}  // namespace lred
