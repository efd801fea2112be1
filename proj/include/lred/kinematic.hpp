#pragma once
// Rank tests for the symmetry action, isotropy constraint generation, the
// exact solve for the invariant fiber, and invariant computation.

#include "lred/fields.hpp"
#include "lred/linsolve.hpp"
#include "lred/probe.hpp"

namespace lred {

struct TransversalityReport {
    int rank_base = 0;
    int rank_total = 0;
    bool holds = false;
    std::string witness;  // evidence when the condition fails
};

// generic ranks of the base-coefficient matrix and the full coefficient
// matrix, certified numerically at a sample point on the chart variety
TransversalityReport transversality_report(const LieAlgebra& alg, const BundleSpec& b,
                                           Context& ctx, uint64_t seed = 42);

// a finite fiber-linear map, given by its substitution on fiber symbols
struct DiscreteConstraint {
    std::string name;
    std::map<int, Expr> map;  // fiber symbol -> image expression
};

struct IsotropyConstraintSet {
    // coefficient vectors phi^a(x) with sum_a phi^a xi_a = 0 on the base
    std::vector<std::vector<Expr>> kernel_combos;
    // affine equations in the fiber symbols cutting out the invariant fiber
    std::vector<Expr> constraint_exprs;
};

IsotropyConstraintSet isotropy_constraints(const LieAlgebra& alg, const BundleSpec& b,
                                           const std::vector<DiscreteConstraint>& discrete,
                                           Context& ctx);

struct KinematicBundle {
    bool empty = false;
    std::string certificate;           // witness description when empty
    std::vector<int> reduced_fiber;    // fresh fiber coordinate symbols v^a
    std::map<int, Expr> inclusion;     // original fiber symbol -> iota(x, v)
    int fiber_dim = 0;
    std::vector<VectorField> residual_generators;  // generators in v-coordinates
    BundleSpec reduced_bundle;         // same base/chart, fiber = reduced_fiber
    IsotropyConstraintSet constraints;
};

// exact affine solve of the constraints for the fiber symbols; fresh reduced
// fiber symbols are named from fiber_names (fallback v1, v2, ...)
KinematicBundle solve_kinematic_fiber(const IsotropyConstraintSet& cs, const LieAlgebra& alg,
                                      const BundleSpec& b, Context& ctx,
                                      const std::vector<std::string>& fiber_names = {},
                                      uint64_t seed = 42);

enum class InvariantOrigin { Computed, UserVerified };

struct Invariant {
    std::string name;
    Expr expr;
    InvariantOrigin origin = InvariantOrigin::Computed;
    int degree = 0;
};

struct InvariantSet {
    std::vector<Invariant> base_invariants;
    std::vector<Invariant> fiber_invariants;
};

struct InvariantHints {
    std::vector<std::pair<std::string, Expr>> base;   // named closed forms
    std::vector<std::pair<std::string, Expr>> fiber;
    std::vector<Expr> denominators;  // extra candidate denominators
};

// invariants by the linear method: undetermined-coefficient polynomials of
// bounded degree (optionally over supplied denominators) annihilated by every
// generator; hints are verified, merged first, and keep their names
InvariantSet compute_invariants(const KinematicBundle& kb, const LieAlgebra& alg,
                                const BundleSpec& b, int max_degree, const InvariantHints& hints,
                                Context& ctx, uint64_t seed = 42);

struct KinematicDiagram {
    std::vector<std::string> base_coordinates;
    std::vector<std::string> reduced_coordinates;   // invariant names then fiber coordinates
    std::vector<std::pair<std::string, std::string>> inclusion;  // fiber name -> iota expr
    int fiber_dim = 0;
};

KinematicDiagram kinematic_diagram(const KinematicBundle& kb, const InvariantSet& inv,
                                   const BundleSpec& b, const Context& ctx);

}  // namespace lred
