#include "lred/kinematic.hpp"

#include <algorithm>

#include "lred/calculus.hpp"
#include "lred/io.hpp"

namespace lred {

namespace {

// evaluates an expression matrix at a probe point
std::vector<std::vector<double>> eval_matrix(const ExprMat& a, Probe& p) {
    std::vector<std::vector<double>> out;
    for (const auto& row : a.m) {
        std::vector<double> r;
        for (const auto& e : row) r.push_back(p.eval(e));
        out.push_back(std::move(r));
    }
    return out;
}

// symbolic generic rank certified by a numeric rank at sample points
int certified_rank(const ExprMat& a, const BundleSpec& b, Context& ctx, uint64_t seed,
                   const char* what) {
    int rank = generic_rank(a, b.rules, ctx);
    for (int attempt = 0; attempt < 50; ++attempt) {
        Probe p = sample_point(b.rules, b.positive, ctx, seed + static_cast<uint64_t>(attempt));
        try {
            if (numeric_rank(eval_matrix(a, p)) == rank) return rank;
        } catch (const LredError&) {
            continue;
        }
    }
    throw LredError("ChartDegenerate",
                    std::string("could not certify the generic rank of the ") + what +
                        " matrix at a sample point");
}

ExprMat coefficient_matrix(const LieAlgebra& alg, const std::vector<int>& cols) {
    ExprMat a;
    for (const auto& g : alg.gens) {
        std::vector<Expr> row;
        for (int s : cols) row.push_back(g.coeff(s));
        a.m.push_back(std::move(row));
    }
    return a;
}

// clears denominators and integer content from a combo of rational expressions
std::vector<Expr> clear_denominators(const std::vector<Expr>& combo, Context& ctx) {
    Poly den = Poly::constant(1);
    std::vector<RatFunc> rfs;
    for (const auto& e : combo) {
        rfs.push_back(to_ratfunc(e, ctx));
        den = pdiv_exact(pmul(den, rfs.back().den), pgcd(den, rfs.back().den));
    }
    std::vector<Poly> nums;
    Poly content = Poly::zero();
    for (const auto& r : rfs) {
        nums.push_back(pmul(r.num, pdiv_exact(den, r.den)));
        content = content.is_zero() ? nums.back() : pgcd(content, nums.back());
    }
    std::vector<Expr> out;
    for (auto& n : nums) {
        RatFunc r{content.is_zero() || content.is_constant() ? n : pdiv_exact(n, content),
                  Poly::constant(1)};
        out.push_back(from_ratfunc(r, ctx));
    }
    return out;
}

}  // namespace

TransversalityReport transversality_report(const LieAlgebra& alg, const BundleSpec& b,
                                           Context& ctx, uint64_t seed) {
    TransversalityReport rep;
    std::vector<int> total_cols = b.base;
    for (int f : b.fiber) total_cols.push_back(f);
    rep.rank_base = certified_rank(coefficient_matrix(alg, b.base), b, ctx, seed, "base action");
    rep.rank_total = certified_rank(coefficient_matrix(alg, total_cols), b, ctx, seed, "full action");
    rep.holds = rep.rank_base == rep.rank_total;
    if (!rep.holds)
        rep.witness = "the action drops rank when projected to the base: " +
                      std::to_string(rep.rank_base) + " < " + std::to_string(rep.rank_total);
    return rep;
}

IsotropyConstraintSet isotropy_constraints(const LieAlgebra& alg, const BundleSpec& b,
                                           const std::vector<DiscreteConstraint>& discrete,
                                           Context& ctx) {
    IsotropyConstraintSet out;
    // columns are generators, rows are base coordinates: null vectors are the
    // coefficient combos whose base parts cancel
    ExprMat a;
    for (int s : b.base) {
        std::vector<Expr> row;
        for (const auto& g : alg.gens) row.push_back(g.coeff(s));
        a.m.push_back(std::move(row));
    }
    for (auto& combo : expr_nullspace(a, b.rules, ctx))
        out.kernel_combos.push_back(clear_denominators(combo, ctx));
    for (const auto& combo : out.kernel_combos) {
        for (int f : b.fiber) {
            std::vector<Expr> terms;
            for (size_t g = 0; g < alg.gens.size(); ++g)
                terms.push_back(emul({combo[g], alg.gens[g].coeff(f)}));
            Expr c = reduce_mod(eadd(std::move(terms)), b.rules, ctx);
            if (!is_zero(c, ctx)) out.constraint_exprs.push_back(c);
        }
    }
    for (const auto& d : discrete) {
        for (int f : b.fiber) {
            auto it = d.map.find(f);
            Expr img = it == d.map.end() ? esym(f) : it->second;
            Expr c = reduce_mod(esub(img, esym(f)), b.rules, ctx);
            if (!is_zero(c, ctx)) out.constraint_exprs.push_back(c);
        }
    }
    return out;
}

KinematicBundle solve_kinematic_fiber(const IsotropyConstraintSet& cs, const LieAlgebra& alg,
                                      const BundleSpec& b, Context& ctx,
                                      const std::vector<std::string>& fiber_names, uint64_t seed) {
    KinematicBundle kb;
    kb.constraints = cs;
    size_t nf = b.fiber.size();
    ExprMat a;
    std::vector<Expr> rhs;
    std::map<int, Expr> zeros;
    for (int f : b.fiber) zeros[f] = eint(0);
    for (const auto& c : cs.constraint_exprs) {
        std::vector<Expr> row;
        for (int f : b.fiber) {
            Expr coef = reduce_mod(diff(c, f, ctx), b.rules, ctx);
            for (int s : free_symbols(coef, ctx))
                if (b.is_fiber(s))
                    throw LredError("AdmissibilityError",
                                    "constraint is not affine in the fiber symbols: " +
                                        print(c, ctx));
            row.push_back(coef);
        }
        a.m.push_back(std::move(row));
        rhs.push_back(reduce_mod(eneg(substitute(c, zeros, ctx)), b.rules, ctx));
    }
    AffineSolution sol =
        a.m.empty() ? AffineSolution{} : solve_affine(a, rhs, b.rules, ctx);
    if (a.m.empty()) {
        // transversal case: no constraints, every fiber direction is free
        sol.particular.assign(nf, eint(0));
        for (size_t j = 0; j < nf; ++j) {
            std::vector<Expr> e(nf, eint(0));
            e[j] = eint(1);
            sol.free_cols.push_back(static_cast<int>(j));
            sol.basis.push_back(std::move(e));
        }
    }
    if (!sol.consistent) {
        kb.empty = true;
        kb.certificate = "inconsistent constraint: " +
                         print(cs.constraint_exprs[sol.inconsistent_row], ctx) + " = 0";
        return kb;
    }
    // rank stability between two independent sample points
    if (!a.m.empty()) {
        int symbolic = static_cast<int>(sol.pivot_cols.size());
        for (uint64_t s : {seed + 101, seed + 202}) {
            Probe p = sample_point(b.rules, b.positive, ctx, s);
            if (numeric_rank(eval_matrix(a, p)) != symbolic)
                throw LredError("RankJump",
                                "constraint matrix rank differs between sample points");
        }
    }
    kb.fiber_dim = static_cast<int>(sol.free_cols.size());
    for (int k = 0; k < kb.fiber_dim; ++k) {
        std::string name = k < static_cast<int>(fiber_names.size())
                               ? fiber_names[static_cast<size_t>(k)]
                               : "v" + std::to_string(k + 1);
        kb.reduced_fiber.push_back(ctx.declare(name, SymKind::ReducedFiber));
    }
    for (size_t j = 0; j < nf; ++j) {
        std::vector<Expr> terms{sol.particular[j]};
        for (int k = 0; k < kb.fiber_dim; ++k)
            terms.push_back(emul({esym(kb.reduced_fiber[static_cast<size_t>(k)]),
                                  sol.basis[static_cast<size_t>(k)][j]}));
        kb.inclusion[b.fiber[j]] = reduce_mod(eadd(std::move(terms)), b.rules, ctx);
    }
    // the parametrization must be an embedding: basis columns independent
    if (kb.fiber_dim > 0) {
        ExprMat jac;
        for (size_t j = 0; j < nf; ++j) {
            std::vector<Expr> row;
            for (int k = 0; k < kb.fiber_dim; ++k)
                row.push_back(sol.basis[static_cast<size_t>(k)][j]);
            jac.m.push_back(std::move(row));
        }
        Probe p = sample_point(b.rules, b.positive, ctx, seed + 7);
        if (numeric_rank(eval_matrix(jac, p)) != kb.fiber_dim)
            throw LredError("InternalError", "fiber parametrization is not an embedding");
    }
    kb.reduced_bundle = b;
    kb.reduced_bundle.fiber = kb.reduced_fiber;
    // chart rules whose right side mentions original fiber symbols must be
    // rewritten through the inclusion so the reduced bundle is self-contained;
    // when the ruled symbol itself reappears (the inclusion involves it), the
    // relation is affine in the ruled power and is solved for it
    {
        std::vector<RewriteRule> clean;  // rules already free of fiber symbols
        for (const auto& r2 : b.rules) {
            bool touches = false;
            for (int s : free_symbols(r2.rhs, ctx))
                if (b.is_fiber(s)) touches = true;
            if (!touches) clean.push_back(r2);
        }
        for (auto& rule : kb.reduced_bundle.rules) {
            bool touches = false;
            for (int s : free_symbols(rule.rhs, ctx))
                if (b.is_fiber(s)) touches = true;
            if (!touches) continue;
            Expr sub = reduce_mod(substitute(rule.rhs, kb.inclusion, ctx), clean, ctx);
            if (rule.atom->kind == ExprKind::Sym && contains_symbol(sub, rule.atom->sym)) {
                int s = rule.atom->sym;
                Expr r0 = substitute(sub, {{s, eint(0)}}, ctx);
                Expr r1 = esub(substitute(sub, {{s, eint(1)}}, ctx), r0);
                Expr model = eadd({r0, emul({r1, epow(esym(s), rule.power)})});
                Expr denom = esub(eint(1), r1);
                if (is_zero_mod(esub(sub, model), clean, ctx) && !is_zero(denom, ctx))
                    sub = reduce_mod(ediv(r0, denom), clean, ctx);
            }
            rule.rhs = sub;
        }
    }
    // restrict each generator: solve for its action on the v-coordinates
    for (const auto& g : alg.gens) {
        VectorField base_part;
        base_part.name = g.name;
        for (int s : b.base)
            if (!is_zero_node(g.coeff(s))) base_part.coeffs[s] = g.coeff(s);
        ExprMat bm;
        std::vector<Expr> brhs;
        for (size_t j = 0; j < nf; ++j) {
            std::vector<Expr> row;
            for (int k = 0; k < kb.fiber_dim; ++k)
                row.push_back(sol.basis[static_cast<size_t>(k)][j]);
            bm.m.push_back(std::move(row));
            Expr eta = substitute(g.coeff(b.fiber[j]), kb.inclusion, ctx);
            Expr moved = apply(base_part, kb.inclusion.at(b.fiber[j]), b, ctx);
            brhs.push_back(reduce_mod(esub(eta, moved), b.rules, ctx));
        }
        VectorField res = base_part;
        if (kb.fiber_dim > 0) {
            AffineSolution vs = solve_affine(bm, brhs, b.rules, ctx);
            if (!vs.consistent)
                throw LredError("InternalError",
                                "generator " + g.name + " is not tangent to the invariant fiber");
            for (int k = 0; k < kb.fiber_dim; ++k) {
                Expr c = vs.particular[static_cast<size_t>(k)];
                if (!is_zero(c, ctx)) res.coeffs[kb.reduced_fiber[static_cast<size_t>(k)]] = c;
            }
        }
        kb.residual_generators.push_back(std::move(res));
    }
    return kb;
}

namespace {

// all monomials of total degree 1..max_degree over the given symbols
void monomials(const std::vector<int>& syms, int max_degree, std::vector<Expr>& out) {
    std::vector<int> expo(syms.size(), 0);
    std::function<void(size_t, int)> rec = [&](size_t pos, int remaining) {
        if (pos == syms.size()) {
            int total = 0;
            for (int e : expo) total += e;
            if (total == 0) return;
            std::vector<Expr> factors;
            for (size_t i = 0; i < syms.size(); ++i)
                if (expo[i] > 0) factors.push_back(epow(esym(syms[i]), expo[i]));
            out.push_back(emul(std::move(factors)));
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

int expr_degree(const Expr& e, Context& ctx) {
    RatFunc r = to_ratfunc(e, ctx);
    return std::max(r.num.deg(), r.den.deg());
}

// incremental functional-independence filter based on numeric gradients
struct IndependenceFilter {
    std::vector<int> wrt;  // symbols to differentiate against
    const BundleSpec& b;
    Context& ctx;
    Probe p1, p2;
    std::vector<std::vector<double>> rows1, rows2;
    int rank1 = 0, rank2 = 0;

    IndependenceFilter(std::vector<int> w, const BundleSpec& bb, Context& c, uint64_t seed)
        : wrt(std::move(w)),
          b(bb),
          ctx(c),
          p1(sample_point(bb.rules, bb.positive, c, seed + 11)),
          p2(sample_point(bb.rules, bb.positive, c, seed + 23)) {}

    bool accept(const Expr& e) {
        std::vector<double> r1, r2;
        for (int s : wrt) {
            Expr d = diff_chart(e, s, b.rules, ctx);
            r1.push_back(p1.eval(d));
            r2.push_back(p2.eval(d));
        }
        auto grown = [&](std::vector<std::vector<double>>& rows, int& rank,
                         const std::vector<double>& r) {
            rows.push_back(r);
            int nr = numeric_rank(rows, 1e-7);
            if (nr > rank) {
                rank = nr;
                return true;
            }
            rows.pop_back();
            return false;
        };
        bool g1 = grown(rows1, rank1, r1);
        bool g2 = grown(rows2, rank2, r2);
        if (g1 != g2) {
            // disagreement between points: keep the candidate in both tables
            if (!g1) { rows1.push_back(r1); rank1 = numeric_rank(rows1, 1e-7); }
            if (!g2) { rows2.push_back(r2); rank2 = numeric_rank(rows2, 1e-7); }
            return true;
        }
        return g1;
    }
};

// linear method over one candidate family: polynomials over `syms` divided by
// `den` (1 for plain polynomials), annihilated by every generator
std::vector<Expr> annihilated_candidates(const std::vector<VectorField>& gens,
                                         const std::vector<int>& syms, int max_degree,
                                         const Expr& den, const BundleSpec& b, Context& ctx) {
    std::vector<Expr> monos;
    monomials(syms, max_degree, monos);
    std::vector<std::vector<Expr>> F;
    for (const auto& m : monos) {
        Expr cand = is_one_node(den) ? m : ediv(m, den);
        std::vector<Expr> col;
        for (const auto& g : gens) col.push_back(apply(g, cand, b, ctx));
        F.push_back(std::move(col));
    }
    std::vector<Expr> out;
    for (const auto& c : q_span_nullspace(F, b.rules, ctx)) {
        std::vector<Expr> terms;
        for (size_t m = 0; m < monos.size(); ++m)
            if (c[m] != 0) terms.push_back(emul({enum_(c[m]), monos[m]}));
        Expr e = eadd(std::move(terms));
        if (!is_one_node(den)) e = ediv(e, den);
        e = reduce_mod(e, b.rules, ctx);
        if (is_zero(e, ctx) || free_symbols(e, ctx).empty()) continue;
        out.push_back(e);
    }
    return out;
}

}  // namespace

InvariantSet compute_invariants(const KinematicBundle& kb, const LieAlgebra& alg,
                                const BundleSpec& b, int max_degree, const InvariantHints& hints,
                                Context& ctx, uint64_t seed) {
    InvariantSet out;
    std::vector<Expr> denominators{eint(1)};
    for (const auto& d : hints.denominators) denominators.push_back(d);

    // candidate symbol pools: base invariants over base+chart, fiber
    // invariants additionally over the reduced fiber coordinates.  A chart
    // symbol whose reduced-bundle rule involves the fiber coordinates is not
    // a function on the base, so it may only feed fiber candidates.
    std::vector<int> base_syms = b.base;
    for (int s : b.chart) {
        bool fiber_bound = false;
        for (const auto& r : kb.reduced_bundle.rules) {
            if (!(r.atom->kind == ExprKind::Sym && r.atom->sym == s)) continue;
            for (int q : free_symbols(r.rhs, ctx))
                if (std::find(kb.reduced_fiber.begin(), kb.reduced_fiber.end(), q) !=
                    kb.reduced_fiber.end())
                    fiber_bound = true;
        }
        if (!fiber_bound) base_syms.push_back(s);
    }
    for (int s : b.params) base_syms.push_back(s);
    std::vector<int> fiber_syms = base_syms;
    for (int s : kb.reduced_fiber) fiber_syms.push_back(s);

    std::vector<int> wrt = b.base;
    for (int s : kb.reduced_fiber) wrt.push_back(s);
    IndependenceFilter filter(wrt, kb.reduced_bundle, ctx, seed);

    auto verify = [&](const std::vector<VectorField>& gens, const Expr& e, const BundleSpec& bb,
                      const std::string& name) {
        for (const auto& g : gens)
            if (!is_zero_mod(apply(g, e, bb, ctx), bb.rules, ctx))
                throw LredError("SchemaError",
                                "supplied invariant " + name + " is not annihilated by " + g.name);
    };

    // ---- base invariants (full generators, base parts act) ----
    std::vector<VectorField> base_gens;
    for (const auto& g : alg.gens) {
        VectorField v;
        v.name = g.name;
        for (int s : b.base)
            if (!is_zero_node(g.coeff(s))) v.coeffs[s] = g.coeff(s);
        base_gens.push_back(std::move(v));
    }
    // base functions live on the kinematic bundle: a dependent chart rule may
    // only become base-resolvable after the fiber reduction, so annihilation
    // must be checked with the reduced rules
    const BundleSpec& base_bundle = kb.empty ? b : kb.reduced_bundle;
    for (const auto& [name, e] : hints.base) {
        verify(base_gens, e, base_bundle, name);
        if (filter.accept(e))
            out.base_invariants.push_back(
                {name, e, InvariantOrigin::UserVerified, expr_degree(e, ctx)});
    }
    std::vector<std::pair<int, Expr>> computed;
    for (const auto& den : denominators)
        for (Expr& e :
             annihilated_candidates(base_gens, base_syms, max_degree, den, base_bundle, ctx))
            computed.emplace_back(expr_degree(e, ctx), e);
    std::stable_sort(computed.begin(), computed.end(),
                     [](const auto& x, const auto& y) { return x.first < y.first; });
    int base_count = static_cast<int>(out.base_invariants.size());
    for (auto& [deg, e] : computed) {
        if (filter.accept(e)) {
            out.base_invariants.push_back(
                {"I" + std::to_string(++base_count), e, InvariantOrigin::Computed, deg});
        }
    }
    int rank_base = certified_rank(coefficient_matrix(alg, b.base), b, ctx, seed, "base action");
    int needed = static_cast<int>(b.base.size()) - rank_base;
    if (static_cast<int>(out.base_invariants.size()) < needed)
        throw LredError("InsufficientInvariants",
                        "found " + std::to_string(out.base_invariants.size()) +
                            " independent base invariants but " + std::to_string(needed) +
                            " are required; raise the degree bound or supply closed forms");

    if (kb.empty) return out;

    // ---- fiber invariants (residual generators on the reduced bundle) ----
    // hints are written on the ambient fiber; compose with the inclusion so
    // they are insensitive to the pivot choice of the fiber parametrization
    for (const auto& [name, raw] : hints.fiber) {
        Expr e = reduce_mod(substitute(raw, kb.inclusion, ctx), b.rules, ctx);
        verify(kb.residual_generators, e, kb.reduced_bundle, name);
        if (filter.accept(e))
            out.fiber_invariants.push_back(
                {name, e, InvariantOrigin::UserVerified, expr_degree(e, ctx)});
    }
    std::vector<std::pair<int, Expr>> fcomputed;
    for (const auto& den : denominators)
        for (Expr& e : annihilated_candidates(kb.residual_generators, fiber_syms, max_degree, den,
                                              kb.reduced_bundle, ctx)) {
            // keep only candidates that genuinely involve the fiber coordinates
            bool touches_fiber = false;
            for (int s : free_symbols(e, ctx))
                if (std::find(kb.reduced_fiber.begin(), kb.reduced_fiber.end(), s) !=
                    kb.reduced_fiber.end())
                    touches_fiber = true;
            if (touches_fiber) fcomputed.emplace_back(expr_degree(e, ctx), e);
        }
    std::stable_sort(fcomputed.begin(), fcomputed.end(),
                     [](const auto& x, const auto& y) { return x.first < y.first; });
    int fiber_count = static_cast<int>(out.fiber_invariants.size());
    for (auto& [deg, e] : fcomputed) {
        if (filter.accept(e)) {
            out.fiber_invariants.push_back(
                {"W" + std::to_string(++fiber_count), e, InvariantOrigin::Computed, deg});
        }
    }
    return out;
}

KinematicDiagram kinematic_diagram(const KinematicBundle& kb, const InvariantSet& inv,
                                   const BundleSpec& b, const Context& ctx) {
    KinematicDiagram d;
    for (int s : b.base) d.base_coordinates.push_back(ctx.sym(s).name);
    for (const auto& i : inv.base_invariants) d.reduced_coordinates.push_back(i.name);
    for (const auto& i : inv.fiber_invariants) d.reduced_coordinates.push_back(i.name);
    for (int f : b.fiber) {
        auto it = kb.inclusion.find(f);
        d.inclusion.emplace_back(ctx.sym(f).name,
                                 it == kb.inclusion.end() ? "-" : print(it->second, ctx));
    }
    d.fiber_dim = kb.fiber_dim;
    return d;
}

}  // namespace lred
