#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "lred/io.hpp"
#include "lred/kinematic.hpp"
#include "testutil.hpp"

using namespace lred;

namespace {

// incompressible-flow style setup: diagonal rotations on space and velocity,
// a scalar pressure, time untouched; radius chart symbol r
struct Rotational {
    Context ctx;
    int t, x, y, z, r, u, v, w, p;
    BundleSpec b;
    LieAlgebra alg;
    Rotational() {
        t = ctx.declare("t", SymKind::Base);
        x = ctx.declare("x", SymKind::Base);
        y = ctx.declare("y", SymKind::Base);
        z = ctx.declare("z", SymKind::Base);
        r = ctx.declare("r", SymKind::Base);
        u = ctx.declare("u", SymKind::Fiber);
        v = ctx.declare("v", SymKind::Fiber);
        w = ctx.declare("w", SymKind::Fiber);
        p = ctx.declare("p", SymKind::Fiber);
        b.base = {t, x, y, z};
        b.fiber = {u, v, w, p};
        b.chart = {r};
        b.rules = {make_rule(esym(r), 2, parse("x^2+y^2+z^2", ctx), true, ctx)};
        b.positive = {r};
        auto diag = [&](const char* name, int a1, int a2, int f1, int f2) {
            VectorField g;
            g.name = name;
            g.coeffs[a1] = eneg(esym(a2));
            g.coeffs[a2] = esym(a1);
            g.coeffs[f1] = eneg(esym(f2));
            g.coeffs[f2] = esym(f1);
            return g;
        };
        alg.gens = {diag("J1", y, z, v, w), diag("J2", z, x, w, u), diag("J3", x, y, u, v)};
        for (const auto& g : alg.gens) check_admissible(g, b, ctx);
        check_closure(alg, b, ctx);
    }
    Expr P(const std::string& s) { return parse(s, ctx); }
};

}  // namespace

TEST_CASE("rank test: rotational action drops rank on the base") {
    Rotational f;
    TransversalityReport rep = transversality_report(f.alg, f.b, f.ctx);
    CHECK(rep.rank_base == 2);
    CHECK(rep.rank_total == 3);
    CHECK(!rep.holds);
    CHECK(!rep.witness.empty());
}

TEST_CASE("rank test: a single translation is transversal") {
    Context ctx;
    int x = ctx.declare("x", SymKind::Base);
    int u = ctx.declare("u", SymKind::Fiber);
    BundleSpec b;
    b.base = {x};
    b.fiber = {u};
    VectorField tr;
    tr.name = "Tx";
    tr.coeffs[x] = eint(1);
    TransversalityReport rep = transversality_report(LieAlgebra{{tr}}, b, ctx);
    CHECK(rep.rank_base == 1);
    CHECK(rep.rank_total == 1);
    CHECK(rep.holds);
}

TEST_CASE("isotropy constraints of the rotational action are the cross-product equations") {
    Rotational f;
    IsotropyConstraintSet cs = isotropy_constraints(f.alg, f.b, {}, f.ctx);
    REQUIRE(cs.kernel_combos.size() == 1);
    // the combo is proportional to (x, y, z): check it kills all base columns
    const auto& c = cs.kernel_combos[0];
    for (int s : f.b.base) {
        std::vector<Expr> terms;
        for (size_t a = 0; a < 3; ++a) terms.push_back(emul({c[a], f.alg.gens[a].coeff(s)}));
        CHECK(is_zero_mod(eadd(std::move(terms)), f.b.rules, f.ctx));
    }
    REQUIRE(cs.constraint_exprs.size() == 3);
    // constraints cut out exactly u parallel to x: y*w - z*v etc.
    std::vector<Expr> expect = {f.P("y*w - z*v"), f.P("z*u - x*w"), f.P("x*v - y*u")};
    for (const auto& want : expect) {
        bool found = false;
        for (const auto& got : cs.constraint_exprs)
            if (is_zero(esub(got, want), f.ctx) || is_zero(eadd({got, want}), f.ctx)) found = true;
        CHECK(found);
    }
}

TEST_CASE("kinematic fiber of the rotational action: radial velocity plus free pressure") {
    Rotational f;
    IsotropyConstraintSet cs = isotropy_constraints(f.alg, f.b, {}, f.ctx);
    KinematicBundle kb = solve_kinematic_fiber(cs, f.alg, f.b, f.ctx, {"a1", "a2"});
    CHECK(!kb.empty);
    CHECK(kb.fiber_dim == 2);
    // inclusion satisfies every constraint
    for (const auto& c : cs.constraint_exprs)
        CHECK(is_zero_mod(substitute(c, kb.inclusion, f.ctx), f.b.rules, f.ctx));
    // the velocity part is parallel to the position: u*y = v*x etc.
    Expr iu = kb.inclusion.at(f.u), iv = kb.inclusion.at(f.v), iw = kb.inclusion.at(f.w);
    CHECK(is_zero_mod(esub(emul({iu, esym(f.y)}), emul({iv, esym(f.x)})), f.b.rules, f.ctx));
    CHECK(is_zero_mod(esub(emul({iu, esym(f.z)}), emul({iw, esym(f.x)})), f.b.rules, f.ctx));
    // pressure passes through unchanged as one of the fiber coordinates
    Expr ip = kb.inclusion.at(f.p);
    bool pressure_is_coordinate = false;
    for (int s : kb.reduced_fiber)
        if (is_zero(esub(ip, esym(s)), f.ctx)) pressure_is_coordinate = true;
    CHECK(pressure_is_coordinate);
    // residual generators stay tangent: their fiber parts satisfy the
    // constraint variety identically (spot-check by applying to a constraint)
    REQUIRE(kb.residual_generators.size() == 3);
    for (const auto& g : kb.residual_generators) check_admissible(g, kb.reduced_bundle, f.ctx);
}

TEST_CASE("invariants of the rotational action: time and radius, then fiber coordinates") {
    Rotational f;
    IsotropyConstraintSet cs = isotropy_constraints(f.alg, f.b, {}, f.ctx);
    KinematicBundle kb = solve_kinematic_fiber(cs, f.alg, f.b, f.ctx, {"a1", "a2"});
    InvariantHints hints;
    hints.denominators = {esym(f.z)};
    InvariantSet inv = compute_invariants(kb, f.alg, f.b, 2, hints, f.ctx);
    REQUIRE(inv.base_invariants.size() == 2);
    // both degree-1 invariants appear: time and the radius chart symbol
    for (int want : {f.t, f.r}) {
        bool found = false;
        for (const auto& i : inv.base_invariants)
            if (is_zero(esub(i.expr, esym(want)), f.ctx)) found = true;
        CHECK(found);
    }
    // every invariant is annihilated by every residual generator
    for (const auto& set : {inv.base_invariants, inv.fiber_invariants})
        for (const auto& i : set)
            for (const auto& g : kb.residual_generators)
                CHECK(is_zero_mod(apply(g, i.expr, kb.reduced_bundle, f.ctx),
                                  f.b.rules, f.ctx));
    REQUIRE(inv.fiber_invariants.size() == 2);
    // the invariants separate the fiber: pressure coordinate and the radial
    // velocity ratio (equal to u/x composed with the inclusion)
    Expr iu = kb.inclusion.at(f.u);
    bool ratio_found = false, pressure_found = false;
    for (const auto& i : inv.fiber_invariants) {
        if (is_zero_mod(esub(emul({i.expr, esym(f.x)}), iu), f.b.rules, f.ctx)) ratio_found = true;
        if (is_zero(esub(i.expr, kb.inclusion.at(f.p)), f.ctx)) pressure_found = true;
    }
    CHECK(ratio_found);
    CHECK(pressure_found);
}

TEST_CASE("named closed-form hints are verified and take precedence") {
    Rotational f;
    IsotropyConstraintSet cs = isotropy_constraints(f.alg, f.b, {}, f.ctx);
    KinematicBundle kb = solve_kinematic_fiber(cs, f.alg, f.b, f.ctx, {"a1", "a2"});
    InvariantHints hints;
    hints.base = {{"time", esym(f.t)}, {"radius", esym(f.r)}};
    InvariantSet inv = compute_invariants(kb, f.alg, f.b, 2, hints, f.ctx);
    REQUIRE(inv.base_invariants.size() == 2);
    CHECK(inv.base_invariants[0].name == "time");
    CHECK(inv.base_invariants[1].name == "radius");
    CHECK(inv.base_invariants[0].origin == InvariantOrigin::UserVerified);

    InvariantHints bad;
    bad.base = {{"notinv", esym(f.x)}};
    CHECK_THROWS_WITH_AS(compute_invariants(kb, f.alg, f.b, 2, bad, f.ctx),
                         doctest::Contains("notinv"), LredError);
}

TEST_CASE("transversal algebra: no constraints, full fiber, coordinates invariant") {
    Context ctx;
    int x = ctx.declare("x", SymKind::Base);
    int u = ctx.declare("u", SymKind::Fiber);
    BundleSpec b;
    b.base = {x};
    b.fiber = {u};
    VectorField tr;
    tr.name = "Tx";
    tr.coeffs[x] = eint(1);
    LieAlgebra alg{{tr}};
    IsotropyConstraintSet cs = isotropy_constraints(alg, b, {}, ctx);
    CHECK(cs.kernel_combos.empty());
    CHECK(cs.constraint_exprs.empty());
    KinematicBundle kb = solve_kinematic_fiber(cs, alg, b, ctx, {"U"});
    CHECK(kb.fiber_dim == 1);
    CHECK(is_zero(esub(kb.inclusion.at(u), esym(kb.reduced_fiber[0])), ctx));
}

TEST_CASE("purely vertical translation empties the invariant fiber") {
    Context ctx;
    int t = ctx.declare("t", SymKind::Base);
    int q = ctx.declare("q", SymKind::Fiber);
    BundleSpec b;
    b.base = {t};
    b.fiber = {q};
    VectorField sh;
    sh.name = "S";
    sh.coeffs[q] = eint(1);
    LieAlgebra alg{{sh}};
    IsotropyConstraintSet cs = isotropy_constraints(alg, b, {}, ctx);
    REQUIRE(cs.constraint_exprs.size() == 1);
    KinematicBundle kb = solve_kinematic_fiber(cs, alg, b, ctx);
    CHECK(kb.empty);
    CHECK(!kb.certificate.empty());
}

TEST_CASE("discrete fiber-linear maps add constraints: a reflection kills a component") {
    Context ctx;
    int x = ctx.declare("x", SymKind::Base);
    int u = ctx.declare("u", SymKind::Fiber);
    int v = ctx.declare("v", SymKind::Fiber);
    BundleSpec b;
    b.base = {x};
    b.fiber = {u, v};
    LieAlgebra alg;  // no continuous part
    DiscreteConstraint refl;
    refl.name = "reflection";
    refl.map = {{v, eneg(esym(v))}};
    IsotropyConstraintSet cs = isotropy_constraints(alg, b, {refl}, ctx);
    REQUIRE(cs.constraint_exprs.size() == 1);
    KinematicBundle kb = solve_kinematic_fiber(cs, alg, b, ctx, {"U"});
    CHECK(kb.fiber_dim == 1);
    CHECK(is_zero(kb.inclusion.at(v), ctx));
    CHECK(is_zero(esub(kb.inclusion.at(u), esym(kb.reduced_fiber[0])), ctx));
}

TEST_CASE("insufficient invariants at too low a degree bound is reported") {
    Rotational f;
    IsotropyConstraintSet cs = isotropy_constraints(f.alg, f.b, {}, f.ctx);
    KinematicBundle kb = solve_kinematic_fiber(cs, f.alg, f.b, f.ctx, {"a1", "a2"});
    // degree 0 admits no nonconstant polynomial invariants at all
    CHECK_THROWS_WITH_AS(compute_invariants(kb, f.alg, f.b, 0, {}, f.ctx),
                         doctest::Contains("InsufficientInvariants"), LredError);
}

TEST_CASE("diagram assembly lists coordinates, invariants and the inclusion") {
    Rotational f;
    IsotropyConstraintSet cs = isotropy_constraints(f.alg, f.b, {}, f.ctx);
    KinematicBundle kb = solve_kinematic_fiber(cs, f.alg, f.b, f.ctx, {"a1", "a2"});
    InvariantHints hints;
    hints.denominators = {esym(f.z)};
    InvariantSet inv = compute_invariants(kb, f.alg, f.b, 2, hints, f.ctx);
    KinematicDiagram d = kinematic_diagram(kb, inv, f.b, f.ctx);
    CHECK(d.base_coordinates == std::vector<std::string>{"t", "x", "y", "z"});
    CHECK(d.fiber_dim == 2);
    CHECK(d.reduced_coordinates.size() == 4);
    CHECK(d.inclusion.size() == 4);
}
