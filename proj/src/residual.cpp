#include "lred/residual.hpp"

#include <sstream>

#include "lred/io.hpp"

namespace lred {

const char* membership_name(Membership m) {
    switch (m) {
        case Membership::InIsotropy: return "in_isotropy";
        case Membership::InAutomorphismOnly: return "in_automorphism_only";
        case Membership::Outside: return "outside";
        case Membership::NotTangent: return "not_tangent";
    }
    return "outside";
}

namespace {

std::string sample_value(const Expr& e, const BundleSpec& b, Context& ctx, uint64_t seed) {
    try {
        Probe p = sample_point(b.rules, b.positive, ctx, seed);
        std::ostringstream os;
        os << p.eval(e);
        return os.str();
    } catch (const LredError&) {
        return "(no regular sample point found)";
    }
}

// solves target = sum_a c_a(x) gens[a] coordinate-wise over the expression
// field; on failure reports the first obstructed coordinate
struct SpanResult {
    bool member = false;
    std::vector<Expr> coefficients;
    int obstructed = -1;  // coordinate symbol
    Expr obstruction = eint(0);
};

SpanResult in_span(const std::vector<VectorField>& gens, const VectorField& target,
                   const BundleSpec& rb, Context& ctx) {
    std::vector<int> coords = rb.base;
    for (int s : rb.chart) coords.push_back(s);
    for (int s : rb.fiber) coords.push_back(s);
    ExprMat m;
    std::vector<Expr> rhs;
    for (int s : coords) {
        std::vector<Expr> row;
        for (const auto& g : gens) row.push_back(g.coeff(s));
        m.m.push_back(std::move(row));
        rhs.push_back(target.coeff(s));
    }
    SpanResult out;
    AffineSolution sol = solve_affine(m, rhs, rb.rules, ctx);
    if (!sol.consistent) {
        out.obstructed = coords[sol.inconsistent_row];
        out.obstruction = rhs[sol.inconsistent_row];
        return out;
    }
    out.member = true;
    for (auto& c : sol.particular) out.coefficients.push_back(reduce_mod(c, rb.rules, ctx));
    return out;
}

std::string coefficient_witness(const std::vector<VectorField>& gens,
                                const std::vector<Expr>& coeffs, Context& ctx) {
    std::ostringstream os;
    for (size_t a = 0; a < gens.size(); ++a) {
        if (a) os << ", ";
        os << "c[" << gens[a].name << "] = " << print(coeffs[a], ctx);
    }
    return os.str();
}

}  // namespace

Restriction restrict_to_bundle(const VectorField& y, const KinematicBundle& kb,
                               const BundleSpec& b, Context& ctx, uint64_t seed) {
    check_admissible(y, b, ctx);
    Restriction out;
    // tangency: applying the field to each defining constraint must vanish
    // identically on the bundle
    for (const auto& c : kb.constraints.constraint_exprs) {
        Expr viol =
            reduce_mod(substitute(apply(y, c, b, ctx), kb.inclusion, ctx), b.rules, ctx);
        if (!is_zero(viol, ctx)) {
            out.witness = "field " + y.name + " moves points off the bundle: applying it to " +
                          print(c, ctx) + " leaves " + print(viol, ctx) +
                          " (sample value " + sample_value(viol, kb.reduced_bundle, ctx, seed) +
                          ")";
            return out;
        }
    }
    VectorField r;
    r.name = y.name;
    for (int s : b.base)
        if (!is_zero_node(y.coeff(s))) r.coeffs[s] = y.coeff(s);
    if (kb.fiber_dim > 0) {
        VectorField base_part = r;
        ExprMat m;
        std::vector<Expr> rhs;
        for (size_t j = 0; j < b.fiber.size(); ++j) {
            const Expr& iota = kb.inclusion.at(b.fiber[j]);
            std::vector<Expr> row;
            for (int v : kb.reduced_fiber)
                row.push_back(reduce_mod(diff(iota, v, ctx), b.rules, ctx));
            m.m.push_back(std::move(row));
            Expr eta = substitute(y.coeff(b.fiber[j]), kb.inclusion, ctx);
            rhs.push_back(reduce_mod(esub(eta, apply(base_part, iota, b, ctx)), b.rules, ctx));
        }
        AffineSolution sol = solve_affine(m, rhs, b.rules, ctx);
        if (!sol.consistent) {
            out.witness = "field " + y.name +
                          " has no tangent action on the invariant fiber (obstruction " +
                          print(rhs[sol.inconsistent_row], ctx) + ")";
            return out;
        }
        for (size_t k = 0; k < kb.reduced_fiber.size(); ++k) {
            Expr c = reduce_mod(sol.particular[k], b.rules, ctx);
            if (!is_zero(c, ctx)) r.coeffs[kb.reduced_fiber[k]] = c;
        }
    }
    out.ok = true;
    out.field = std::move(r);
    return out;
}

MembershipCertificate check_isotropy_member(const VectorField& y, const LieAlgebra& alg,
                                            const KinematicBundle& kb, const BundleSpec& b,
                                            Context& ctx, uint64_t seed) {
    (void)alg;
    MembershipCertificate cert;
    cert.candidate = y.name;
    Restriction r = restrict_to_bundle(y, kb, b, ctx, seed);
    if (!r.ok) {
        cert.verdict = Membership::NotTangent;
        cert.witness = r.witness;
        return cert;
    }
    cert.restricted = r.field;
    SpanResult sp = in_span(kb.residual_generators, r.field, kb.reduced_bundle, ctx);
    if (sp.member) {
        cert.verdict = Membership::InIsotropy;
        cert.witness = coefficient_witness(kb.residual_generators, sp.coefficients, ctx);
    } else {
        cert.verdict = Membership::Outside;
        cert.witness = "no expression coefficients match the " + ctx.sym(sp.obstructed).name +
                       " component " + print(sp.obstruction, ctx) + " (sample value " +
                       sample_value(sp.obstruction, kb.reduced_bundle, ctx, seed) + ")";
    }
    return cert;
}

MembershipCertificate check_automorphism_member(const VectorField& y, const LieAlgebra& alg,
                                                const KinematicBundle& kb, const BundleSpec& b,
                                                Context& ctx, uint64_t seed) {
    (void)alg;
    MembershipCertificate cert;
    cert.candidate = y.name;
    Restriction r = restrict_to_bundle(y, kb, b, ctx, seed);
    if (!r.ok) {
        cert.verdict = Membership::NotTangent;
        cert.witness = r.witness;
        return cert;
    }
    cert.restricted = r.field;
    std::ostringstream wit;
    for (const auto& v : kb.residual_generators) {
        VectorField bkt = lie_bracket(v, r.field, kb.reduced_bundle, ctx);
        SpanResult sp = in_span(kb.residual_generators, bkt, kb.reduced_bundle, ctx);
        if (!sp.member) {
            cert.verdict = Membership::Outside;
            cert.witness = "bracket with " + v.name + " escapes the generator span at the " +
                           ctx.sym(sp.obstructed).name + " component " +
                           print(sp.obstruction, ctx) + " (sample value " +
                           sample_value(sp.obstruction, kb.reduced_bundle, ctx, seed) + ")";
            return cert;
        }
        wit << "[" << v.name << ", " << y.name << "]: "
            << coefficient_witness(kb.residual_generators, sp.coefficients, ctx) << "; ";
    }
    cert.verdict = Membership::InAutomorphismOnly;
    cert.witness = wit.str();
    return cert;
}

MembershipCertificate classify_candidate(const VectorField& y, const LieAlgebra& alg,
                                         const KinematicBundle& kb, const BundleSpec& b,
                                         Context& ctx, uint64_t seed) {
    MembershipCertificate iso = check_isotropy_member(y, alg, kb, b, ctx, seed);
    if (iso.verdict == Membership::InIsotropy || iso.verdict == Membership::NotTangent) return iso;
    return check_automorphism_member(y, alg, kb, b, ctx, seed);
}

UniversalReport universal_check(const OperatorSpec& op,
                                const std::vector<VectorField>& automorphism_gens,
                                const KinematicBundle& kb, const BundleSpec& b, int max_degree,
                                Context& ctx) {
    std::vector<VectorField> restricted;
    for (const auto& g : automorphism_gens) {
        Restriction r = restrict_to_bundle(g, kb, b, ctx);
        if (!r.ok)
            throw LredError("NotTangent", "declared automorphism generator " + g.name +
                                              " does not preserve the bundle: " + r.witness);
        restricted.push_back(std::move(r.field));
    }
    UniversalReport out;
    out.frame = invariant_frame(op, restricted, kb, max_degree, ctx);
    out.universal = out.frame.sections.empty();
    out.note = out.universal
                   ? "no invariant frame combination exists up to degree " +
                         std::to_string(max_degree) +
                         ": every invariant section solves every such invariant operator"
                   : "an invariant frame of dimension " + std::to_string(out.frame.sections.size()) +
                         " exists; invariant sections are not automatically solutions";
    return out;
}

}  // namespace lred
