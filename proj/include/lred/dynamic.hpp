#pragma once
// Invariant-section ansatz, jet prolongation of the ansatz, restriction of a
// differential operator, invariant-frame construction, and factorization of
// the restricted operator through the frame.

#include "lred/kinematic.hpp"

namespace lred {

struct OperatorSpec {
    int order = 0;
    std::vector<std::string> frame;  // target frame section names f^A
    // L_{V} f^A = sum_B act[A][B] f^B, per generator name; absent = trivial
    std::map<std::string, std::vector<std::vector<Expr>>> frame_action;
    // optional linear conditions sum_A k_A c_A = 0 restricting admissible
    // frame combinations (e.g. tangency to a target manifold)
    std::vector<std::vector<Expr>> frame_constraints;
    std::map<std::string, Expr> components;  // frame name -> expr over jets
};

struct Ansatz {
    // reduced base coordinates: one symbol per base invariant, with its
    // defining expression in the original base symbols
    std::vector<int> reduced_base;
    std::map<int, Expr> reduced_base_defs;
    // reduced unknowns: opaque functions of the reduced base, one per fiber
    // invariant, applied to the invariant defining expressions
    std::vector<int> unknown_fns;
    std::vector<Expr> unknown_apps;  // the applied forms W(x~)
    // kinematic fiber coordinates expressed through the unknowns
    std::map<int, Expr> v_subst;
    // the invariant section: original fiber symbol -> s^alpha(x)
    std::map<int, Expr> section;
    // jet substitution map, filled by prolong_ansatz
    std::map<int, Expr> jets;
    int order = 0;
};

// composes the inclusion with unknown functions of the base invariants; the
// fiber invariants (affine in the fiber coordinates) name the unknowns
Ansatz build_ansatz(const KinematicBundle& kb, const InvariantSet& inv, const BundleSpec& b,
                    Context& ctx);

// extends the jet substitution map to the given order with chart-aware total
// derivatives of the section
void prolong_ansatz(Ansatz& a, int order, const JetContext& jc, const BundleSpec& b, Context& ctx);

// substitutes the ansatz jets into every operator component
std::map<std::string, Expr> restrict_operator(const OperatorSpec& op, const Ansatz& a,
                                              const BundleSpec& b, Context& ctx);

struct InvariantFrame {
    std::vector<std::string> frame;           // ambient frame names (columns)
    std::vector<std::vector<Expr>> sections;  // rows: M^Q_A coefficient vectors
};

// degree-bounded search for frame combinations c_A(x, v) annihilated by every
// generator acting on frame-valued sections over the kinematic bundle
InvariantFrame invariant_frame(const OperatorSpec& op, const std::vector<VectorField>& gens,
                               const KinematicBundle& kb, int max_degree, Context& ctx);

struct ReducedOperator {
    std::vector<Expr> components;             // one per frame section, reduced coords
    std::vector<Expr> components_ambient;     // before the cross-section rewrite
    InvariantFrame frame;
};

// solves restricted_A = sum_Q M^Q_A * component_Q exactly, certifies each
// component invariant under the residual generators, and rewrites it in
// reduced coordinates via the orbit cross-section
ReducedOperator factor_through_frame(const std::map<std::string, Expr>& restricted,
                                     const InvariantFrame& frame, const Ansatz& a,
                                     const std::vector<VectorField>& residual_gens,
                                     const std::map<int, Expr>& cross_section,
                                     const BundleSpec& b, Context& ctx);

struct SolutionCheck {
    std::vector<std::pair<std::string, bool>> parts;  // component label -> residual is 0
    std::vector<Expr> residuals;
    bool all_zero = true;
};

// substitutes closed forms for the unknown functions into the given
// components and reports the symbolic residuals
SolutionCheck verify_components(const std::vector<std::pair<std::string, Expr>>& components,
                                const std::map<int, Expr>& closed,
                                const std::vector<RewriteRule>& rules, Context& ctx);

}  // namespace lred
