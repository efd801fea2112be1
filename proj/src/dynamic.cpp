#include "lred/dynamic.hpp"

#include <algorithm>

#include "lred/io.hpp"

namespace lred {

Ansatz build_ansatz(const KinematicBundle& kb, const InvariantSet& inv, const BundleSpec& b,
                    Context& ctx) {
    Ansatz a;
    for (const auto& i : inv.base_invariants) {
        int s;
        if (i.expr->kind == ExprKind::Sym) {
            s = i.expr->sym;
        } else {
            s = ctx.declare(i.name, SymKind::Base);
        }
        a.reduced_base.push_back(s);
        a.reduced_base_defs[s] = i.expr;
    }
    size_t nf = static_cast<size_t>(kb.fiber_dim);
    if (inv.fiber_invariants.size() < nf)
        throw LredError("InsufficientInvariants",
                        "need " + std::to_string(nf) +
                            " fiber invariants to parametrize the section but only " +
                            std::to_string(inv.fiber_invariants.size()) + " are available");
    // placeholders stand for the invariant values while inverting the affine
    // system W(v) = value for the fiber coordinates v
    std::vector<int> placeholders;
    std::map<int, Expr> apps;
    for (size_t q = 0; q < nf; ++q) {
        const auto& w = inv.fiber_invariants[q];
        placeholders.push_back(ctx.declare(w.name + "__val", SymKind::ReducedFiber));
        int fn = ctx.declare_fn(w.name, a.reduced_base);
        a.unknown_fns.push_back(fn);
        std::vector<Expr> args;
        for (int s : a.reduced_base) args.push_back(a.reduced_base_defs.at(s));
        Expr app = efn(fn, std::vector<int>(a.reduced_base.size(), 0), std::move(args));
        a.unknown_apps.push_back(app);
        apps[placeholders.back()] = app;
    }
    std::map<int, Expr> vzero;
    for (int v : kb.reduced_fiber) vzero[v] = eint(0);
    ExprMat m;
    std::vector<Expr> rhs;
    for (size_t q = 0; q < nf; ++q) {
        const Expr& w = inv.fiber_invariants[q].expr;
        std::vector<Expr> row;
        for (int v : kb.reduced_fiber) {
            Expr coef = reduce_mod(diff(w, v, ctx), b.rules, ctx);
            for (int s : free_symbols(coef, ctx))
                if (std::find(kb.reduced_fiber.begin(), kb.reduced_fiber.end(), s) !=
                    kb.reduced_fiber.end())
                    throw LredError("InsufficientInvariants",
                                    "fiber invariant " + inv.fiber_invariants[q].name +
                                        " is not affine in the fiber coordinates");
            row.push_back(coef);
        }
        m.m.push_back(std::move(row));
        rhs.push_back(reduce_mod(esub(esym(placeholders[q]), substitute(w, vzero, ctx)), b.rules,
                                 ctx));
    }
    AffineSolution sol = solve_affine(m, rhs, b.rules, ctx);
    if (!sol.consistent || !sol.free_cols.empty())
        throw LredError("InsufficientInvariants",
                        "fiber invariants do not parametrize the invariant fiber");
    for (size_t j = 0; j < nf; ++j) {
        Expr v = substitute(sol.particular[j], apps, ctx);
        a.v_subst[kb.reduced_fiber[j]] = v;
    }
    for (const auto& [fsym, iota] : kb.inclusion)
        a.section[fsym] = reduce_mod(substitute(iota, a.v_subst, ctx), b.rules, ctx);
    a.jets = a.section;
    a.order = 0;
    return a;
}

void prolong_ansatz(Ansatz& a, int order, const JetContext& jc, const BundleSpec& b,
                    Context& ctx) {
    if (order > jc.order) throw LredError("OrderOverflow", "jet context order too small");
    auto items = jc.ordered();
    std::sort(items.begin(), items.end(), [](const auto& l, const auto& r) {
        int dl = 0, dr = 0;
        for (int k : l.first.second) dl += k;
        for (int k : r.first.second) dr += k;
        if (dl != dr) return dl < dr;
        return l < r;
    });
    for (const auto& [key, sym] : items) {
        const auto& [f, multi] = key;
        int total = 0;
        for (int k : multi) total += k;
        if (total == 0 || total > order) continue;
        size_t xi = 0;
        while (multi[xi] == 0) ++xi;
        std::vector<int> prev = multi;
        prev[xi] -= 1;
        int lower = jc.jet(f, prev);
        a.jets[sym] =
            reduce_mod(diff_chart(a.jets.at(lower), jc.base[xi], b.rules, ctx), b.rules, ctx);
    }
    a.order = order;
}

std::map<std::string, Expr> restrict_operator(const OperatorSpec& op, const Ansatz& a,
                                              const BundleSpec& b, Context& ctx) {
    if (a.order < op.order)
        throw LredError("OrderOverflow", "ansatz prolonged below the operator order");
    std::map<std::string, Expr> out;
    for (const auto& [name, comp] : op.components)
        out[name] = reduce_mod(substitute(comp, a.jets, ctx), b.rules, ctx);
    return out;
}

InvariantFrame invariant_frame(const OperatorSpec& op, const std::vector<VectorField>& gens,
                               const KinematicBundle& kb, int max_degree, Context& ctx) {
    const BundleSpec& rb = kb.reduced_bundle;
    size_t nA = op.frame.size();
    // candidate coefficient monomials over base, chart, parameters and the
    // kinematic fiber coordinates; the enumeration below emits monomials on
    // later symbols first, so list fiber coordinates first to make sections
    // with base/chart coefficients win the independence filter over
    // fiber-coordinate multiples of the same section
    std::vector<int> syms = rb.fiber;
    for (int s : rb.params) syms.push_back(s);
    for (int s : rb.chart) syms.push_back(s);
    for (int s : rb.base) syms.push_back(s);
    std::vector<Expr> monos{eint(1)};
    {
        std::vector<int> expo(syms.size(), 0);
        std::function<void(size_t, int)> rec = [&](size_t pos, int remaining) {
            if (pos == syms.size()) {
                int total = 0;
                for (int e : expo) total += e;
                if (total == 0) return;
                std::vector<Expr> factors;
                for (size_t i = 0; i < syms.size(); ++i)
                    if (expo[i] > 0) factors.push_back(epow(esym(syms[i]), expo[i]));
                monos.push_back(emul(std::move(factors)));
                return;
            }
            for (int e = 0; e <= remaining; ++e) {
                expo[pos] = e;
                rec(pos + 1, remaining - e);
            }
            expo[pos] = 0;
        };
        rec(0, max_degree);
    }
    // compose frame actions and constraints with the inclusion
    std::vector<std::vector<std::vector<Expr>>> acts;  // per generator: [A][B]
    for (const auto& g : gens) {
        std::vector<std::vector<Expr>> m(nA, std::vector<Expr>(nA, eint(0)));
        auto it = op.frame_action.find(g.name);
        if (it != op.frame_action.end()) {
            if (it->second.size() != nA)
                throw LredError("SchemaError", "frame action of " + g.name + " has wrong shape");
            for (size_t i = 0; i < nA; ++i)
                for (size_t j = 0; j < nA; ++j)
                    m[i][j] = reduce_mod(substitute(it->second[i][j], kb.inclusion, ctx),
                                         rb.rules, ctx);
        }
        acts.push_back(std::move(m));
    }
    std::vector<std::vector<Expr>> cons;
    for (const auto& row : op.frame_constraints) {
        std::vector<Expr> r;
        for (const auto& e : row)
            r.push_back(reduce_mod(substitute(e, kb.inclusion, ctx), rb.rules, ctx));
        cons.push_back(std::move(r));
    }
    size_t neq = gens.size() * nA + cons.size();
    std::vector<std::vector<Expr>> F;  // unknown index (A, m)
    for (size_t A = 0; A < nA; ++A) {
        for (const auto& mono : monos) {
            std::vector<Expr> col;
            for (size_t g = 0; g < gens.size(); ++g) {
                Expr vm = apply(gens[g], mono, rb, ctx);
                for (size_t B = 0; B < nA; ++B) {
                    Expr entry = acts[g][A][B];
                    Expr term = is_zero_node(entry) ? eint(0) : emul({entry, mono});
                    if (A == B) term = eadd({term, vm});
                    col.push_back(term);
                }
            }
            for (const auto& row : cons) col.push_back(emul({row[A], mono}));
            (void)neq;
            F.push_back(std::move(col));
        }
    }
    InvariantFrame out;
    out.frame = op.frame;
    std::vector<std::vector<Expr>> raw;
    for (const auto& q : q_span_nullspace(F, rb.rules, ctx)) {
        std::vector<Expr> section(nA, eint(0));
        bool nonzero = false;
        size_t idx = 0;
        for (size_t A = 0; A < nA; ++A) {
            std::vector<Expr> terms;
            for (const auto& mono : monos) {
                if (q[idx] != 0) terms.push_back(emul({enum_(q[idx]), mono}));
                ++idx;
            }
            section[A] = reduce_mod(eadd(std::move(terms)), rb.rules, ctx);
            if (!is_zero(section[A], ctx)) nonzero = true;
        }
        if (nonzero) raw.push_back(std::move(section));
    }
    // keep an independent subset over the expression field
    ExprMat kept;
    for (auto& s : raw) {
        ExprMat trial = kept;
        trial.m.push_back(s);
        if (generic_rank(trial, rb.rules, ctx) > static_cast<int>(kept.m.size())) {
            kept = std::move(trial);
            out.sections.push_back(s);
        }
    }
    return out;
}

ReducedOperator factor_through_frame(const std::map<std::string, Expr>& restricted,
                                     const InvariantFrame& frame, const Ansatz& a,
                                     const std::vector<VectorField>& residual_gens,
                                     const std::map<int, Expr>& cross_section,
                                     const BundleSpec& b, Context& ctx) {
    ReducedOperator out;
    out.frame = frame;
    size_t nA = frame.frame.size();
    auto comp_of = [&](size_t A) {
        auto it = restricted.find(frame.frame[A]);
        return it == restricted.end() ? eint(0) : it->second;
    };
    if (frame.sections.empty()) {
        for (size_t A = 0; A < nA; ++A)
            if (!is_zero_mod(comp_of(A), b.rules, ctx))
                throw LredError("InsufficientFrame",
                                "restricted operator is nonzero but the invariant frame is empty");
        return out;
    }
    ExprMat m;
    std::vector<Expr> rhs;
    for (size_t A = 0; A < nA; ++A) {
        std::vector<Expr> row;
        for (const auto& sec : frame.sections) row.push_back(sec[A]);
        m.m.push_back(std::move(row));
        rhs.push_back(comp_of(A));
    }
    AffineSolution sol = solve_affine(m, rhs, b.rules, ctx);
    if (!sol.consistent)
        throw LredError("FactorizationFailure",
                        "restricted operator is outside the invariant-frame span; "
                        "the operator may not be invariant or the frame degree bound too low");
    if (!sol.free_cols.empty())
        throw LredError("FactorizationFailure", "invariant frame is linearly dependent");
    // rules that survive on the cross-section (their symbols are untouched)
    std::vector<RewriteRule> section_rules;
    for (const auto& r : b.rules) {
        bool touched = false;
        for (const auto& [s, e] : cross_section) {
            if (contains_symbol(r.atom, s) || contains_symbol(r.rhs, s)) touched = true;
            if (r.atom->kind == ExprKind::Sym && r.atom->sym == s) touched = true;
        }
        if (!touched) section_rules.push_back(r);
    }
    std::set<int> allowed(a.reduced_base.begin(), a.reduced_base.end());
    for (int s : b.params) allowed.insert(s);
    for (const auto& sym : ctx.symbols)
        if (sym.kind == SymKind::Constant || sym.kind == SymKind::Parameter)
            allowed.insert(sym.id);
    for (size_t q = 0; q < frame.sections.size(); ++q) {
        Expr comp = reduce_mod(sol.particular[q], b.rules, ctx);
        out.components_ambient.push_back(comp);
        for (const auto& g : residual_gens)
            if (!is_zero_mod(apply(g, comp, b, ctx), b.rules, ctx))
                throw LredError("IndependenceFailure",
                                "reduced component " + std::to_string(q + 1) +
                                    " is not invariant under " + g.name +
                                    "; the algebra is not a symmetry of the operator");
        Expr red = reduce_mod(substitute(comp, cross_section, ctx), section_rules, ctx);
        for (int s : free_symbols(red, ctx))
            if (!allowed.count(s))
                throw LredError("IndependenceFailure",
                                "reduced component " + std::to_string(q + 1) +
                                    " retains parametric dependence on " + ctx.sym(s).name);
        out.components.push_back(red);
    }
    return out;
}

SolutionCheck verify_components(const std::vector<std::pair<std::string, Expr>>& components,
                                const std::map<int, Expr>& closed,
                                const std::vector<RewriteRule>& rules, Context& ctx) {
    SolutionCheck out;
    for (const auto& [label, e] : components) {
        Expr r = substitute_functions(e, closed, rules, ctx);
        bool zero = is_zero_mod(r, rules, ctx);
        out.parts.emplace_back(label, zero);
        out.residuals.push_back(r);
        if (!zero) out.all_zero = false;
    }
    return out;
}

}  // namespace lred
