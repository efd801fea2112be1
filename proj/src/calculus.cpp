#include "lred/calculus.hpp"

namespace lred {

namespace {

Expr diff_raw(const Expr& e, int sym) {
    switch (e->kind) {
        case ExprKind::Num:
            return eint(0);
        case ExprKind::Sym:
            return eint(e->sym == sym ? 1 : 0);
        case ExprKind::Add: {
            std::vector<Expr> kids;
            for (const auto& k : e->kids) kids.push_back(diff_raw(k, sym));
            return eadd(std::move(kids));
        }
        case ExprKind::Mul: {
            std::vector<Expr> terms;
            for (size_t i = 0; i < e->kids.size(); ++i) {
                std::vector<Expr> fac;
                for (size_t j = 0; j < e->kids.size(); ++j)
                    fac.push_back(i == j ? diff_raw(e->kids[j], sym) : e->kids[j]);
                terms.push_back(emul(std::move(fac)));
            }
            return eadd(std::move(terms));
        }
        case ExprKind::Pow:
            return emul({eint(e->expo), epow(e->base, e->expo - 1), diff_raw(e->base, sym)});
        case ExprKind::Fn: {
            std::vector<Expr> terms;
            for (size_t i = 0; i < e->kids.size(); ++i) {
                Expr da = diff_raw(e->kids[i], sym);
                if (is_zero_node(da)) continue;
                std::vector<int> d = e->deriv;
                d[i] += 1;
                terms.push_back(emul({efn(e->fn, std::move(d), e->kids), da}));
            }
            return eadd(std::move(terms));
        }
    }
    throw LredError("InternalError", "unreachable expr kind");
}

}  // namespace

Expr diff(const Expr& e, int sym, Context& ctx) { return simplify(diff_raw(e, sym), ctx); }

Expr diff_chart(const Expr& e, int sym, const std::vector<RewriteRule>& rules, Context& ctx) {
    Expr total = diff_raw(e, sym);
    for (const auto& rule : rules) {
        if (!rule.dependent || rule.atom->kind != ExprKind::Sym) continue;
        int y = rule.atom->sym;
        if (y == sym) continue;
        // de/dy chains through opaque-function arguments as well, so no
        // shortcut on the canonical form: let simplification kill zero terms
        Expr dedy = diff_raw(e, y);
        if (is_zero_node(dedy)) continue;
        // implicit: d y / d sym = (d rhs / d sym) / (power * y^(power-1))
        Expr dy = ediv(diff_raw(rule.rhs, sym),
                       emul({eint(rule.power), epow(rule.atom, rule.power - 1)}));
        total = eadd({total, emul({dedy, dy})});
    }
    return reduce_mod(total, rules, ctx);
}

namespace {

Expr subst_raw(const Expr& e, const std::map<int, Expr>& b) {
    switch (e->kind) {
        case ExprKind::Num:
            return e;
        case ExprKind::Sym: {
            auto it = b.find(e->sym);
            return it == b.end() ? e : it->second;
        }
        case ExprKind::Pow:
            return epow(subst_raw(e->base, b), e->expo);
        case ExprKind::Fn: {
            std::vector<Expr> args;
            for (const auto& a : e->kids) args.push_back(subst_raw(a, b));
            return efn(e->fn, e->deriv, std::move(args));
        }
        case ExprKind::Add:
        case ExprKind::Mul: {
            std::vector<Expr> kids;
            for (const auto& k : e->kids) kids.push_back(subst_raw(k, b));
            return e->kind == ExprKind::Add ? eadd(std::move(kids)) : emul(std::move(kids));
        }
    }
    throw LredError("InternalError", "unreachable expr kind");
}

}  // namespace

Expr substitute(const Expr& e, const std::map<int, Expr>& bindings, Context& ctx) {
    // simultaneous substitution is well-defined for self-referencing bindings;
    // cross-symbol dependency cycles are rejected per the contract
    std::map<int, std::vector<int>> edges;
    for (const auto& [s, ex] : bindings) {
        for (int t : free_symbols(ex, ctx))
            if (t != s && bindings.count(t)) edges[s].push_back(t);
    }
    std::map<int, int> state;  // 0 unvisited, 1 in stack, 2 done
    std::function<void(int)> visit = [&](int s) {
        state[s] = 1;
        for (int t : edges[s]) {
            if (state[t] == 1)
                throw LredError("CyclicSubstitution", "cyclic bindings involving " +
                                                          ctx.sym(s).name + " and " + ctx.sym(t).name);
            if (state[t] == 0) visit(t);
        }
        state[s] = 2;
    };
    for (const auto& [s, ex] : bindings)
        if (state[s] == 0) visit(s);
    return simplify(subst_raw(e, bindings), ctx);
}

namespace {

Expr subst_fns_raw(const Expr& e, const std::map<int, Expr>& closed,
                   const std::vector<RewriteRule>& rules, Context& ctx) {
    switch (e->kind) {
        case ExprKind::Num:
        case ExprKind::Sym:
            return e;
        case ExprKind::Pow:
            return epow(subst_fns_raw(e->base, closed, rules, ctx), e->expo);
        case ExprKind::Add:
        case ExprKind::Mul: {
            std::vector<Expr> kids;
            for (const auto& k : e->kids) kids.push_back(subst_fns_raw(k, closed, rules, ctx));
            return e->kind == ExprKind::Add ? eadd(std::move(kids)) : emul(std::move(kids));
        }
        case ExprKind::Fn: {
            std::vector<Expr> args;
            for (const auto& a : e->kids) args.push_back(subst_fns_raw(a, closed, rules, ctx));
            auto it = closed.find(e->fn);
            if (it == closed.end()) return efn(e->fn, e->deriv, std::move(args));
            Expr body = subst_fns_raw(it->second, closed, rules, ctx);
            const auto& decl = ctx.fn(e->fn).args;
            for (size_t i = 0; i < e->deriv.size(); ++i)
                for (int d = 0; d < e->deriv[i]; ++d)
                    body = diff_chart(body, decl[i], rules, ctx);
            std::map<int, Expr> bind;
            for (size_t i = 0; i < decl.size(); ++i) bind[decl[i]] = args[i];
            return subst_raw(body, bind);
        }
    }
    throw LredError("InternalError", "unreachable expr kind");
}

}  // namespace

Expr substitute_functions(const Expr& e, const std::map<int, Expr>& closed,
                          const std::vector<RewriteRule>& rules, Context& ctx) {
    return reduce_mod(subst_fns_raw(e, closed, rules, ctx), rules, ctx);
}

}  // namespace lred
