#pragma once
// Exact linear algebra: over the rationals (undetermined-coefficient solves)
// and over the field of rational expressions modulo rewrite rules (rank,
// null spaces, affine solves with symbolic pivots).

#include <optional>

#include "lred/canonical.hpp"

namespace lred {

// ---- over Q ----
using QMat = std::vector<std::vector<Rat>>;

// reduced row echelon form in place; returns pivot column list
std::vector<int> q_rref(QMat& m);
// null space basis (column vectors) of m (solutions of m x = 0)
std::vector<std::vector<Rat>> q_nullspace(const QMat& m, size_t cols);

// solves sum_a c_a F[a][k] = G[k] for rational constants c_a, as identities in
// the remaining symbols (modulo the rules); k indexes the stacked equations.
// Returns no value when no constant combination exists.
std::optional<std::vector<Rat>> q_solve_span(const std::vector<std::vector<Expr>>& F,
                                             const std::vector<Expr>& G,
                                             const std::vector<RewriteRule>& rules, Context& ctx);

// rational-constant null space of sum_a c_a F[a][k] = 0 (identities in the
// remaining symbols modulo the rules); returns a basis of coefficient vectors
std::vector<std::vector<Rat>> q_span_nullspace(const std::vector<std::vector<Expr>>& F,
                                               const std::vector<RewriteRule>& rules, Context& ctx);

// ---- over the expression field ----
struct ExprMat {
    std::vector<std::vector<Expr>> m;
    size_t rows() const { return m.size(); }
    size_t cols() const { return m.empty() ? 0 : m[0].size(); }
};

int generic_rank(const ExprMat& a, const std::vector<RewriteRule>& rules, Context& ctx);

// null space basis of a x = 0 over the expression field
std::vector<std::vector<Expr>> expr_nullspace(const ExprMat& a,
                                              const std::vector<RewriteRule>& rules, Context& ctx);

struct AffineSolution {
    bool consistent = true;
    size_t inconsistent_row = 0;           // witness when inconsistent
    std::vector<int> pivot_cols;           // solved unknowns
    std::vector<int> free_cols;            // parametrizing unknowns
    // solution x = particular + nullbasis * free parameters; expressed per column:
    // x[j] = particular[j] + sum_k basis[k][j] * t_k
    std::vector<Expr> particular;
    std::vector<std::vector<Expr>> basis;
};

// solves a x = b exactly over the expression field modulo rules
AffineSolution solve_affine(const ExprMat& a, const std::vector<Expr>& b,
                            const std::vector<RewriteRule>& rules, Context& ctx);

}  // namespace lred
