#pragma once
// Membership tests for symmetries surviving a kinematic reduction: restriction
// of candidate fields to the kinematic bundle, exact span tests against the
// restricted generators (isotropy) and against their bracket module
// (automorphisms), and the universal-solution detector.

#include "lred/dynamic.hpp"

namespace lred {

enum class Membership { InIsotropy, InAutomorphismOnly, Outside, NotTangent };

const char* membership_name(Membership m);

struct MembershipCertificate {
    std::string candidate;  // field name
    Membership verdict = Membership::Outside;
    // restriction of the candidate to the kinematic bundle (when tangent)
    VectorField restricted;
    // for membership: the expression coefficients realizing the span
    // inclusion; for failure: the violated equation and a sample-point value
    std::string witness;
};

// restriction of an admissible field to the kinematic bundle; ok=false with a
// witness when the field does not preserve the bundle
struct Restriction {
    bool ok = false;
    VectorField field;
    std::string witness;
};
Restriction restrict_to_bundle(const VectorField& y, const KinematicBundle& kb,
                               const BundleSpec& b, Context& ctx, uint64_t seed = 42);

// does the restricted candidate equal an expression-coefficient combination
// of the restricted generators?
MembershipCertificate check_isotropy_member(const VectorField& y, const LieAlgebra& alg,
                                            const KinematicBundle& kb, const BundleSpec& b,
                                            Context& ctx, uint64_t seed = 42);

// do all brackets of the restricted candidate with the restricted generators
// stay inside their expression-coefficient span?
MembershipCertificate check_automorphism_member(const VectorField& y, const LieAlgebra& alg,
                                                const KinematicBundle& kb, const BundleSpec& b,
                                                Context& ctx, uint64_t seed = 42);

// runs the isotropy test first, then the automorphism test
MembershipCertificate classify_candidate(const VectorField& y, const LieAlgebra& alg,
                                         const KinematicBundle& kb, const BundleSpec& b,
                                         Context& ctx, uint64_t seed = 42);

struct UniversalReport {
    bool universal = false;
    InvariantFrame frame;  // the (possibly empty) frame that decides the verdict
    std::string note;
};

// a reduction is universal for an operator type when no invariant frame
// combination exists over the kinematic bundle: every invariant section then
// solves every invariant operator of that type identically. The declared
// automorphism generators are ambient fields and are restricted first.
UniversalReport universal_check(const OperatorSpec& op,
                                const std::vector<VectorField>& automorphism_gens,
                                const KinematicBundle& kb, const BundleSpec& b, int max_degree,
                                Context& ctx);

}  // namespace lred
