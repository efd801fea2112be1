#include "lred/fields.hpp"

#include <algorithm>
#include <functional>

#include "lred/io.hpp"
#include "lred/linsolve.hpp"

namespace lred {

bool BundleSpec::is_base(int s) const {
    return std::find(base.begin(), base.end(), s) != base.end();
}
bool BundleSpec::is_fiber(int s) const {
    return std::find(fiber.begin(), fiber.end(), s) != fiber.end();
}

Expr VectorField::coeff(int s) const {
    auto it = coeffs.find(s);
    return it == coeffs.end() ? eint(0) : it->second;
}

void check_admissible(const VectorField& v, const BundleSpec& b, Context& ctx) {
    auto allowed_base = [&](int s) {
        return b.is_base(s) ||
               std::find(b.chart.begin(), b.chart.end(), s) != b.chart.end() ||
               std::find(b.params.begin(), b.params.end(), s) != b.params.end();
    };
    for (const auto& [s, e] : v.coeffs) {
        if (b.is_base(s)) {
            for (int fs : free_symbols(e, ctx))
                if (!allowed_base(fs))
                    throw LredError("AdmissibilityError",
                                    "base coefficient of " + v.name + " for " + ctx.sym(s).name +
                                        " depends on non-base symbol " + ctx.sym(fs).name);
        } else if (b.is_fiber(s)) {
            for (int f : b.fiber) {
                Expr d = diff(e, f, ctx);
                for (int fs : free_symbols(d, ctx))
                    if (b.is_fiber(fs))
                        throw LredError("AdmissibilityError",
                                        "fiber coefficient of " + v.name + " for " +
                                            ctx.sym(s).name + " is not affine in the fibers");
            }
        } else {
            throw LredError("AdmissibilityError",
                            v.name + " has a coefficient on non-bundle symbol " + ctx.sym(s).name);
        }
    }
}

Expr apply(const VectorField& v, const Expr& e, const BundleSpec& b, Context& ctx) {
    std::vector<Expr> terms;
    for (const auto& [s, c] : v.coeffs) {
        if (is_zero_node(c)) continue;
        terms.push_back(emul({c, diff_chart(e, s, b.rules, ctx)}));
    }
    return reduce_mod(eadd(std::move(terms)), b.rules, ctx);
}

VectorField lie_bracket(const VectorField& v, const VectorField& w, const BundleSpec& b,
                        Context& ctx) {
    VectorField out;
    out.name = "[" + v.name + "," + w.name + "]";
    std::vector<int> coords;
    for (const auto& [s, c] : v.coeffs) coords.push_back(s);
    for (const auto& [s, c] : w.coeffs)
        if (std::find(coords.begin(), coords.end(), s) == coords.end()) coords.push_back(s);
    for (int s : coords) {
        Expr c = esub(apply(v, w.coeff(s), b, ctx), apply(w, v.coeff(s), b, ctx));
        c = reduce_mod(c, b.rules, ctx);
        if (!is_zero(c, ctx)) out.coeffs[s] = c;
    }
    return out;
}

void check_closure(const LieAlgebra& alg, const BundleSpec& b, Context& ctx) {
    // coordinates: all symbols any generator touches
    std::vector<int> coords;
    for (const auto& g : alg.gens)
        for (const auto& [s, c] : g.coeffs)
            if (std::find(coords.begin(), coords.end(), s) == coords.end()) coords.push_back(s);
    std::sort(coords.begin(), coords.end());
    for (size_t i = 0; i < alg.gens.size(); ++i)
        for (size_t j = i + 1; j < alg.gens.size(); ++j) {
            VectorField br = lie_bracket(alg.gens[i], alg.gens[j], b, ctx);
            // solve br = sum_a c_a * gens[a] for constant structure coefficients
            std::vector<std::vector<Expr>> F;
            std::vector<Expr> rhs;
            for (const auto& g : alg.gens) {
                std::vector<Expr> col;
                for (int s : coords) col.push_back(g.coeff(s));
                F.push_back(std::move(col));
            }
            for (int s : coords) rhs.push_back(br.coeff(s));
            if (!q_solve_span(F, rhs, b.rules, ctx))
                throw LredError("SchemaError",
                                "algebra not closed: [" + alg.gens[i].name + "," +
                                    alg.gens[j].name + "] is outside the generator span");
        }
}

int JetContext::jet(int fiber, const std::vector<int>& multi) const {
    auto it = jets.find({fiber, multi});
    return it == jets.end() ? -1 : it->second;
}

std::vector<std::pair<std::pair<int, std::vector<int>>, int>> JetContext::ordered() const {
    std::vector<std::pair<std::pair<int, std::vector<int>>, int>> out(jets.begin(), jets.end());
    return out;
}

namespace {

void enumerate_multis(int nb, int order, std::vector<std::vector<int>>& out) {
    // all multi-indices with 1 <= |I| <= order, graded, lexicographic within a grade
    std::vector<int> cur(static_cast<size_t>(nb), 0);
    std::vector<std::vector<int>> all;
    for (int total = 1; total <= order; ++total) {
        std::function<void(int, int)> rec2 = [&](int pos, int remaining) {
            if (pos == nb) {
                if (remaining == 0) all.push_back(cur);
                return;
            }
            for (int k = remaining; k >= 0; --k) {
                cur[static_cast<size_t>(pos)] = k;
                rec2(pos + 1, remaining - k);
            }
            cur[static_cast<size_t>(pos)] = 0;
        };
        rec2(0, total);
    }
    out = std::move(all);
}

}  // namespace

JetContext make_jet_context(Context& ctx, const std::vector<int>& base,
                            const std::vector<int>& fibers, int order) {
    JetContext jc;
    jc.order = order;
    jc.base = base;
    jc.fibers = fibers;
    for (int f : fibers) jc.jets[{f, std::vector<int>(base.size(), 0)}] = f;
    std::vector<std::vector<int>> multis;
    enumerate_multis(static_cast<int>(base.size()), order, multis);
    for (int f : fibers) {
        for (const auto& m : multis) {
            std::string name = ctx.sym(f).name + "_";
            for (size_t i = 0; i < m.size(); ++i)
                for (int k = 0; k < m[i]; ++k) name += ctx.sym(base[i]).name;
            int existing = ctx.find_symbol(name);
            int id;
            std::map<int, int> mm;
            for (size_t i = 0; i < m.size(); ++i)
                if (m[i]) mm[base[i]] = m[i];
            if (existing >= 0) {
                // shared across jet contexts of the same bundle
                id = existing;
            } else {
                id = ctx.declare_jet(name, f, mm);
            }
            jc.jets[{f, m}] = id;
        }
    }
    return jc;
}

Expr total_derivative(const Expr& e, int x, const JetContext& jc,
                      const std::vector<RewriteRule>& rules, Context& ctx) {
    size_t xi = 0;
    while (xi < jc.base.size() && jc.base[xi] != x) ++xi;
    if (xi == jc.base.size())
        throw LredError("InternalError", "total derivative along a non-base symbol");
    std::vector<Expr> terms{diff_chart(e, x, rules, ctx)};
    for (const auto& [key, sym] : jc.jets) {
        Expr de = diff(e, sym, ctx);
        if (is_zero_node(de) || is_zero(de, ctx)) continue;
        std::vector<int> up = key.second;
        up[xi] += 1;
        int next = jc.jet(key.first, up);
        if (next < 0)
            throw LredError("OrderOverflow",
                            "total derivative needs jets beyond order " +
                                std::to_string(jc.order));
        terms.push_back(emul({esym(next), de}));
    }
    return reduce_mod(eadd(std::move(terms)), rules, ctx);
}

VectorField prolong_field(const VectorField& v, const JetContext& jc, const BundleSpec& b,
                          Context& ctx) {
    VectorField out = v;
    out.name = v.name;
    // phi_I for |I| = k computed from phi_{I - e_j} with the recursive formula
    // phi_{I,x} = D_x phi_I - (D_x xi^j) u_{I + e_j}
    std::map<std::pair<int, std::vector<int>>, Expr> phi;
    for (int f : jc.fibers) phi[{f, std::vector<int>(jc.base.size(), 0)}] = v.coeff(f);
    std::vector<std::pair<std::pair<int, std::vector<int>>, int>> items = jc.ordered();
    std::sort(items.begin(), items.end(), [](const auto& a, const auto& bb) {
        int da = 0, db = 0;
        for (int k : a.first.second) da += k;
        for (int k : bb.first.second) db += k;
        if (da != db) return da < db;
        return a < bb;
    });
    for (const auto& [key, sym] : items) {
        const auto& [f, multi] = key;
        int total = 0;
        for (int k : multi) total += k;
        if (total == 0) continue;
        // decompose I = I' + e_x with the first positive slot
        size_t xi = 0;
        while (multi[xi] == 0) ++xi;
        std::vector<int> prev = multi;
        prev[xi] -= 1;
        int x = jc.base[xi];
        Expr p = total_derivative(phi.at({f, prev}), x, jc, b.rules, ctx);
        for (size_t j = 0; j < jc.base.size(); ++j) {
            Expr dxi = total_derivative(v.coeff(jc.base[j]), x, jc, b.rules, ctx);
            if (is_zero(dxi, ctx)) continue;
            std::vector<int> up = prev;
            up[j] += 1;
            int us = jc.jet(f, up);
            if (us < 0) throw LredError("OrderOverflow", "prolongation exceeded the jet order");
            p = esub(p, emul({dxi, esym(us)}));
        }
        p = reduce_mod(p, b.rules, ctx);
        phi[key] = p;
        if (!is_zero(p, ctx)) out.coeffs[sym] = p;
    }
    return out;
}

}  // namespace lred
