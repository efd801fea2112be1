#pragma once
// Bundles, projectable vector fields, Lie algebras, jet contexts,
// prolongation and total derivatives.

#include "lred/calculus.hpp"

namespace lred {

struct BundleSpec {
    std::vector<int> base;    // base symbol ids (x^i)
    std::vector<int> fiber;   // fiber symbol ids (u^alpha)
    std::vector<int> chart;   // auxiliary chart symbols bound by dependent rules (e.g. r)
    std::vector<RewriteRule> rules;
    std::vector<int> positive;  // symbols assumed > 0 in this chart
    std::vector<int> params;    // parameter/constant symbols

    bool is_base(int s) const;
    bool is_fiber(int s) const;
};

struct VectorField {
    std::string name;
    std::map<int, Expr> coeffs;  // coordinate symbol -> coefficient Expr (missing = 0)

    Expr coeff(int s) const;
};

// admissibility gate: base coefficients depend on base/chart/parameter symbols
// only; fiber coefficients are affine in the fiber symbols
void check_admissible(const VectorField& v, const BundleSpec& b, Context& ctx);

// V applied to a function: sum of coeff * (chart-aware) partial, reduced
Expr apply(const VectorField& v, const Expr& e, const BundleSpec& b, Context& ctx);

VectorField lie_bracket(const VectorField& v, const VectorField& w, const BundleSpec& b,
                        Context& ctx);

struct LieAlgebra {
    std::vector<VectorField> gens;
};

// verifies each pairwise bracket lies in the Expr-span of the generators
void check_closure(const LieAlgebra& alg, const BundleSpec& b, Context& ctx);

struct JetContext {
    int order = 0;
    std::vector<int> base;
    std::vector<int> fibers;
    // (fiber symbol, multi-index aligned with base) -> jet symbol id;
    // the empty multi-index maps to the fiber symbol itself
    std::map<std::pair<int, std::vector<int>>, int> jets;

    int jet(int fiber, const std::vector<int>& multi) const;  // -1 when absent
    std::vector<std::pair<std::pair<int, std::vector<int>>, int>> ordered() const;
};

// declares jet symbols u_x, u_xy, ... for each fiber up to the given order
JetContext make_jet_context(Context& ctx, const std::vector<int>& base,
                            const std::vector<int>& fibers, int order);

// D_x within the jet context; raises OrderOverflow if a needed jet exceeds it
Expr total_derivative(const Expr& e, int base_symbol, const JetContext& jc,
                      const std::vector<RewriteRule>& rules, Context& ctx);

// standard prolongation: coefficient of u^a_I is D_I(eta - xi^j u^a_j) + xi^j u^a_{I,j}
VectorField prolong_field(const VectorField& v, const JetContext& jc, const BundleSpec& b,
                          Context& ctx);

}  // namespace lred
