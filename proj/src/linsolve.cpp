#include "lred/linsolve.hpp"

namespace lred {

std::vector<int> q_rref(QMat& m) {
    std::vector<int> pivots;
    size_t rows = m.size();
    if (rows == 0) return pivots;
    size_t cols = m[0].size();
    size_t r = 0;
    for (size_t c = 0; c < cols && r < rows; ++c) {
        size_t p = r;
        while (p < rows && m[p][c] == 0) ++p;
        if (p == rows) continue;
        std::swap(m[p], m[r]);
        Rat inv = m[r][c];
        for (size_t j = c; j < cols; ++j) m[r][j] /= inv;
        for (size_t i = 0; i < rows; ++i) {
            if (i == r || m[i][c] == 0) continue;
            Rat f = m[i][c];
            for (size_t j = c; j < cols; ++j) m[i][j] -= f * m[r][j];
        }
        pivots.push_back(static_cast<int>(c));
        ++r;
    }
    return pivots;
}

std::vector<std::vector<Rat>> q_nullspace(const QMat& m_in, size_t cols) {
    QMat m = m_in;
    for (auto& row : m) row.resize(cols, Rat(0));
    std::vector<int> pivots = q_rref(m);
    std::vector<bool> is_pivot(cols, false);
    for (int p : pivots) is_pivot[static_cast<size_t>(p)] = true;
    std::vector<std::vector<Rat>> basis;
    for (size_t f = 0; f < cols; ++f) {
        if (is_pivot[f]) continue;
        std::vector<Rat> v(cols, Rat(0));
        v[f] = 1;
        for (size_t k = 0; k < pivots.size(); ++k) {
            // row k has pivot at pivots[k]
            v[static_cast<size_t>(pivots[k])] = -m[k][f];
        }
        basis.push_back(std::move(v));
    }
    return basis;
}

namespace {

// stacks identities sum_a c_a F[a][k] (= G[k]) into one Q-linear system by
// clearing denominators and matching monomial coefficients per equation k;
// column layout: c_0 .. c_{n-1} (plus rhs column when G is given)
QMat span_rows(const std::vector<std::vector<Expr>>& F, const std::vector<Expr>* G, size_t neq,
               const std::vector<RewriteRule>& rules, Context& ctx) {
    size_t n = F.size();
    size_t width = n + (G ? 1 : 0);
    struct Key {
        size_t k;
        Mono m;
        bool operator<(const Key& o) const {
            if (k != o.k) return k < o.k;
            if (mono_eq(m, o.m)) return false;
            return mono_gl_greater(m, o.m);
        }
    };
    std::map<Key, std::vector<Rat>> rows;
    auto row = [&](const Key& key) -> std::vector<Rat>& {
        auto it = rows.find(key);
        if (it == rows.end()) it = rows.emplace(key, std::vector<Rat>(width, Rat(0))).first;
        return it->second;
    };
    for (size_t k = 0; k < neq; ++k) {
        std::vector<RatFunc> fs;
        for (size_t a = 0; a < n; ++a) fs.push_back(rf_reduce(to_ratfunc(F[a][k], ctx), rules, ctx));
        RatFunc g = G ? rf_reduce(to_ratfunc((*G)[k], ctx), rules, ctx) : RatFunc{Poly::zero(), Poly::constant(1)};
        Poly den = g.den;
        for (const auto& f : fs) den = pdiv_exact(pmul(den, f.den), pgcd(den, f.den));
        for (size_t a = 0; a < n; ++a) {
            Poly p = pmul(fs[a].num, pdiv_exact(den, fs[a].den));
            for (const auto& [m, c] : p.t) row({k, m})[a] = c;
        }
        if (G) {
            Poly pg = pmul(g.num, pdiv_exact(den, g.den));
            for (const auto& [m, c] : pg.t) row({k, m})[n] = c;
        }
    }
    QMat out;
    for (auto& [key, r] : rows) out.push_back(std::move(r));
    return out;
}

}  // namespace

std::optional<std::vector<Rat>> q_solve_span(const std::vector<std::vector<Expr>>& F,
                                             const std::vector<Expr>& G,
                                             const std::vector<RewriteRule>& rules, Context& ctx) {
    size_t n = F.size();
    QMat aug = span_rows(F, &G, G.size(), rules, ctx);
    if (aug.empty()) return std::vector<Rat>(n, Rat(0));
    std::vector<int> pivots = q_rref(aug);
    std::vector<Rat> sol(n, Rat(0));
    for (size_t k = 0; k < pivots.size(); ++k) {
        if (pivots[k] == static_cast<int>(n)) return std::nullopt;  // inconsistent
        sol[static_cast<size_t>(pivots[k])] = aug[k][n];
    }
    return sol;
}

std::vector<std::vector<Rat>> q_span_nullspace(const std::vector<std::vector<Expr>>& F,
                                               const std::vector<RewriteRule>& rules,
                                               Context& ctx) {
    size_t n = F.size();
    size_t neq = n == 0 ? 0 : F[0].size();
    QMat m = span_rows(F, nullptr, neq, rules, ctx);
    return q_nullspace(m, n);
}

namespace {

struct Field {
    const std::vector<RewriteRule>& rules;
    Context& ctx;
    Expr red(const Expr& e) const { return reduce_mod(e, rules, ctx); }
    bool zero(const Expr& e) const { return is_zero_mod(e, rules, ctx); }
    Expr add(const Expr& a, const Expr& b) const { return red(eadd({a, b})); }
    Expr sub(const Expr& a, const Expr& b) const { return red(esub(a, b)); }
    Expr mul(const Expr& a, const Expr& b) const { return red(emul({a, b})); }
    Expr div(const Expr& a, const Expr& b) const { return red(ediv(a, b)); }
};

size_t expr_size(const Expr& e) {
    size_t s = 1;
    if (e->kind == ExprKind::Pow) return 1 + expr_size(e->base);
    for (const auto& k : e->kids) s += expr_size(k);
    return s;
}

// forward elimination; returns pivot (row,col) pairs and modifies a,b in place
struct Elim {
    std::vector<std::pair<size_t, int>> pivots;  // row index after swap, column
};

Elim eliminate(ExprMat& a, std::vector<Expr>* b, const Field& F) {
    Elim out;
    size_t rows = a.rows(), cols = a.cols();
    for (auto& row : a.m)
        for (auto& e : row) e = F.red(e);
    if (b)
        for (auto& e : *b) e = F.red(e);
    size_t r = 0;
    for (size_t c = 0; c < cols && r < rows; ++c) {
        // choose the structurally smallest nonzero pivot in this column
        size_t best = rows;
        size_t best_sz = 0;
        for (size_t i = r; i < rows; ++i) {
            if (F.zero(a.m[i][static_cast<size_t>(c)])) continue;
            size_t sz = expr_size(a.m[i][static_cast<size_t>(c)]);
            if (best == rows || sz < best_sz) {
                best = i;
                best_sz = sz;
            }
        }
        if (best == rows) continue;
        std::swap(a.m[best], a.m[r]);
        if (b) std::swap((*b)[best], (*b)[r]);
        const Expr piv = a.m[r][c];
        for (size_t i = r + 1; i < rows; ++i) {
            if (F.zero(a.m[i][c])) {
                a.m[i][c] = eint(0);
                continue;
            }
            Expr f = F.div(a.m[i][c], piv);
            for (size_t j = c; j < cols; ++j)
                a.m[i][j] = F.sub(a.m[i][j], emul({f, a.m[r][j]}));
            if (b) (*b)[i] = F.sub((*b)[i], emul({f, (*b)[r]}));
        }
        out.pivots.emplace_back(r, static_cast<int>(c));
        ++r;
    }
    return out;
}

}  // namespace

int generic_rank(const ExprMat& a_in, const std::vector<RewriteRule>& rules, Context& ctx) {
    Field F{rules, ctx};
    ExprMat a = a_in;
    return static_cast<int>(eliminate(a, nullptr, F).pivots.size());
}

std::vector<std::vector<Expr>> expr_nullspace(const ExprMat& a_in,
                                              const std::vector<RewriteRule>& rules, Context& ctx) {
    Field F{rules, ctx};
    ExprMat a = a_in;
    Elim el = eliminate(a, nullptr, F);
    size_t cols = a.cols();
    std::vector<bool> is_pivot(cols, false);
    for (auto& [r, c] : el.pivots) is_pivot[static_cast<size_t>(c)] = true;
    std::vector<std::vector<Expr>> basis;
    for (size_t f = 0; f < cols; ++f) {
        if (is_pivot[f]) continue;
        std::vector<Expr> v(cols, eint(0));
        v[f] = eint(1);
        // back-substitute in reverse pivot order
        for (size_t k = el.pivots.size(); k-- > 0;) {
            auto [pr, pc] = el.pivots[k];
            Expr s = a.m[pr][f];
            for (size_t j = static_cast<size_t>(pc) + 1; j < cols; ++j) {
                if (is_pivot[j]) s = F.add(s, emul({a.m[pr][j], v[j]}));
            }
            v[static_cast<size_t>(pc)] = F.red(eneg(F.div(s, a.m[pr][static_cast<size_t>(pc)])));
        }
        basis.push_back(std::move(v));
    }
    return basis;
}

AffineSolution solve_affine(const ExprMat& a_in, const std::vector<Expr>& b_in,
                            const std::vector<RewriteRule>& rules, Context& ctx) {
    Field F{rules, ctx};
    ExprMat a = a_in;
    std::vector<Expr> b = b_in;
    Elim el = eliminate(a, &b, F);
    size_t rows = a.rows(), cols = a.cols();
    AffineSolution sol;
    // inconsistency: zero row with nonzero rhs
    size_t rank = el.pivots.size();
    for (size_t i = rank; i < rows; ++i) {
        if (!F.zero(b[i])) {
            sol.consistent = false;
            sol.inconsistent_row = i;
            return sol;
        }
    }
    std::vector<bool> is_pivot(cols, false);
    for (auto& [r, c] : el.pivots) {
        is_pivot[static_cast<size_t>(c)] = true;
        sol.pivot_cols.push_back(c);
    }
    for (size_t j = 0; j < cols; ++j)
        if (!is_pivot[j]) sol.free_cols.push_back(static_cast<int>(j));
    // particular solution with free unknowns set to 0
    sol.particular.assign(cols, eint(0));
    for (size_t k = el.pivots.size(); k-- > 0;) {
        auto [pr, pc] = el.pivots[k];
        Expr s = b[pr];
        for (size_t j = static_cast<size_t>(pc) + 1; j < cols; ++j)
            s = F.sub(s, emul({a.m[pr][j], sol.particular[j]}));
        sol.particular[static_cast<size_t>(pc)] = F.div(s, a.m[pr][static_cast<size_t>(pc)]);
    }
    // homogeneous basis via the same elimination
    for (int f : sol.free_cols) {
        std::vector<Expr> v(cols, eint(0));
        v[static_cast<size_t>(f)] = eint(1);
        for (size_t k = el.pivots.size(); k-- > 0;) {
            auto [pr, pc] = el.pivots[k];
            Expr s = eint(0);
            for (size_t j = static_cast<size_t>(pc) + 1; j < cols; ++j)
                s = F.add(s, emul({a.m[pr][j], v[j]}));
            v[static_cast<size_t>(pc)] = F.red(eneg(F.div(s, a.m[pr][static_cast<size_t>(pc)])));
        }
        sol.basis.push_back(std::move(v));
    }
    return sol;
}

}  // namespace lred
