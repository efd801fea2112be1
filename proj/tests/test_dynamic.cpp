#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "lred/dynamic.hpp"
#include "lred/io.hpp"
#include "testutil.hpp"

using namespace lred;

namespace {

// full rotationally-equivariant fluid setup: velocity + pressure over space,
// rotations acting diagonally; the classic test bed for the whole pipeline
struct Fluid {
    Context ctx;
    int t, x, y, z, r, u, v, w, p;
    BundleSpec b;
    LieAlgebra alg;
    JetContext jc;
    KinematicBundle kb;
    InvariantSet inv;
    Ansatz ansatz;
    OperatorSpec op;

    Fluid() : jc() {
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
        jc = make_jet_context(ctx, b.base, b.fiber, 1);
        IsotropyConstraintSet cs = isotropy_constraints(alg, b, {}, ctx);
        kb = solve_kinematic_fiber(cs, alg, b, ctx, {"a1", "a2"});
        InvariantHints hints;
        hints.base = {{"t", esym(t)}, {"r", esym(r)}};
        hints.fiber = {{"A", parse("(x*u+y*v+z*w)/r^2", ctx)}, {"B", esym(p)}};
        inv = compute_invariants(kb, alg, b, 2, hints, ctx);
        ansatz = build_ansatz(kb, inv, b, ctx);
        prolong_ansatz(ansatz, 1, jc, b, ctx);

        op.order = 1;
        op.frame = {"fu", "fv", "fw", "fdiv"};
        op.components = {{"fu", parse("u_t + u*u_x + v*u_y + w*u_z + p_x", ctx)},
                         {"fv", parse("v_t + u*v_x + v*v_y + w*v_z + p_y", ctx)},
                         {"fw", parse("w_t + u*w_x + v*w_y + w*w_z + p_z", ctx)},
                         {"fdiv", parse("u_x + v_y + w_z", ctx)}};
        // the momentum frame rows co-rotate with the velocity components
        auto act = [&](size_t i, size_t j) {
            std::vector<std::vector<Expr>> m(4, std::vector<Expr>(4, eint(0)));
            m[i][j] = eint(-1);
            m[j][i] = eint(1);
            return m;
        };
        op.frame_action = {{"J1", act(1, 2)}, {"J2", act(2, 0)}, {"J3", act(0, 1)}};
    }
    Expr P(const std::string& s) { return parse(s, ctx); }
    std::map<int, Expr> cross_section() {
        return {{x, esym(r)}, {y, eint(0)}, {z, eint(0)}};
    }
};

}  // namespace

TEST_CASE("ansatz: radial velocity profile times position, free pressure profile") {
    Fluid f;
    // unknowns are named by the fiber invariants and depend on (t, r)
    REQUIRE(f.ansatz.unknown_fns.size() == 2);
    CHECK(f.ctx.fn(f.ansatz.unknown_fns[0]).name == "A");
    CHECK(f.ctx.fn(f.ansatz.unknown_fns[1]).name == "B");
    CHECK(expr_equal(f.ansatz.section.at(f.u), f.P("A*x"), f.ctx));
    CHECK(expr_equal(f.ansatz.section.at(f.v), f.P("A*y"), f.ctx));
    CHECK(expr_equal(f.ansatz.section.at(f.w), f.P("A*z"), f.ctx));
    CHECK(expr_equal(f.ansatz.section.at(f.p), f.P("B"), f.ctx));
}

TEST_CASE("prolonged ansatz jets match the hand-computed chain rule") {
    Fluid f;
    int ux = f.ctx.find_symbol("u_x");
    int uy = f.ctx.find_symbol("u_y");
    int ut = f.ctx.find_symbol("u_t");
    int px = f.ctx.find_symbol("p_x");
    REQUIRE(ux >= 0);
    CHECK(expr_equal(f.ansatz.jets.at(ux), f.P("A + A_r*x^2/r"), f.ctx));
    CHECK(expr_equal(f.ansatz.jets.at(uy), f.P("A_r*x*y/r"), f.ctx));
    CHECK(expr_equal(f.ansatz.jets.at(ut), f.P("A_t*x"), f.ctx));
    CHECK(expr_equal(f.ansatz.jets.at(px), f.P("B_r*x/r"), f.ctx));
}

TEST_CASE("restricted operator: divergence row becomes the radial profile law") {
    Fluid f;
    auto restricted = restrict_operator(f.op, f.ansatz, f.b, f.ctx);
    CHECK(is_zero_mod(esub(restricted.at("fdiv"), f.P("3*A + r*A_r")), f.b.rules, f.ctx));
    // momentum rows are position times a common invariant scalar
    Expr scalar = f.P("A_t + A^2 + r*A*A_r + B_r/r");
    CHECK(is_zero_mod(esub(restricted.at("fu"), emul({scalar, esym(f.x)})), f.b.rules, f.ctx));
    CHECK(is_zero_mod(esub(restricted.at("fv"), emul({scalar, esym(f.y)})), f.b.rules, f.ctx));
}

TEST_CASE("invariant frame: radial momentum row and the scalar row") {
    Fluid f;
    InvariantFrame fr = invariant_frame(f.op, f.kb.residual_generators, f.kb, 1, f.ctx);
    REQUIRE(fr.sections.size() == 2);
    // the span contains (x, y, z, 0) and (0, 0, 0, 1)
    std::vector<std::vector<Expr>> F;
    for (const auto& sec : fr.sections) F.push_back(sec);
    std::vector<Expr> radial{esym(f.x), esym(f.y), esym(f.z), eint(0)};
    std::vector<Expr> scalar{eint(0), eint(0), eint(0), eint(1)};
    CHECK(q_solve_span(F, radial, f.b.rules, f.ctx).has_value());
    CHECK(q_solve_span(F, scalar, f.b.rules, f.ctx).has_value());
}

TEST_CASE("factorization yields the reduced radial system") {
    Fluid f;
    auto restricted = restrict_operator(f.op, f.ansatz, f.b, f.ctx);
    InvariantFrame fr = invariant_frame(f.op, f.kb.residual_generators, f.kb, 1, f.ctx);
    ReducedOperator red = factor_through_frame(restricted, fr, f.ansatz,
                                               f.kb.residual_generators, f.cross_section(), f.b,
                                               f.ctx);
    REQUIRE(red.components.size() == 2);
    // factorization identity: sum_Q component_Q * M^Q_A == restricted_A
    for (size_t A = 0; A < 4; ++A) {
        std::vector<Expr> terms;
        for (size_t q = 0; q < 2; ++q)
            terms.push_back(emul({red.components_ambient[q], fr.sections[q][A]}));
        CHECK(is_zero_mod(esub(eadd(std::move(terms)), restricted.at(f.op.frame[A])), f.b.rules,
                          f.ctx));
    }
    // components span the expected reduced system (constant recombination)
    Expr e1 = f.P("A_t + A^2 + r*A*A_r + B_r/r");
    Expr e2 = f.P("3*A + r*A_r");
    std::vector<std::vector<Expr>> F;
    for (const auto& c : red.components) F.push_back({c});
    CHECK(q_solve_span(F, {e1}, {}, f.ctx).has_value());
    CHECK(q_solve_span(F, {e2}, {}, f.ctx).has_value());
    // and conversely each component lies in span{e1, e2}
    std::vector<std::vector<Expr>> E{{e1}, {e2}};
    for (const auto& c : red.components) CHECK(q_solve_span(E, {c}, {}, f.ctx).has_value());
    // reduced components only mention invariant symbols
    for (const auto& c : red.components)
        for (int s : free_symbols(c, f.ctx)) CHECK((s == f.t || s == f.r));
}

TEST_CASE("closed-form profile solves both the reduced and the original system") {
    Fluid f;
    auto restricted = restrict_operator(f.op, f.ansatz, f.b, f.ctx);
    InvariantFrame fr = invariant_frame(f.op, f.kb.residual_generators, f.kb, 1, f.ctx);
    ReducedOperator red = factor_through_frame(restricted, fr, f.ansatz,
                                               f.kb.residual_generators, f.cross_section(), f.b,
                                               f.ctx);
    int fa = f.ctx.declare_fn("a", {f.t});
    int fb = f.ctx.declare_fn("bfun", {f.t});
    (void)fa;
    (void)fb;
    std::map<int, Expr> closed = {
        {f.ansatz.unknown_fns[0], f.P("a/r^3")},
        {f.ansatz.unknown_fns[1], f.P("D(a,t)/r - a^2/(2*r^4) + bfun")}};
    std::vector<std::pair<std::string, Expr>> reduced_comps;
    for (size_t q = 0; q < red.components.size(); ++q)
        reduced_comps.emplace_back("reduced" + std::to_string(q + 1), red.components[q]);
    SolutionCheck rc = verify_components(reduced_comps, closed, {}, f.ctx);
    CHECK(rc.all_zero);
    std::vector<std::pair<std::string, Expr>> original_comps;
    for (const auto& [name, e] : restricted) original_comps.emplace_back(name, e);
    SolutionCheck oc = verify_components(original_comps, closed, f.b.rules, f.ctx);
    CHECK(oc.all_zero);
    // a perturbed profile is detected
    std::map<int, Expr> wrong = closed;
    wrong[f.ansatz.unknown_fns[0]] = f.P("a/r^2");
    SolutionCheck bad = verify_components(reduced_comps, wrong, {}, f.ctx);
    CHECK(!bad.all_zero);
}

TEST_CASE("non-invariant operator is rejected with a parametric-dependence diagnostic") {
    Fluid f;
    OperatorSpec op = f.op;
    // add x * (radial frame row): stays in the frame span but is not invariant
    op.components["fu"] = eadd({op.components.at("fu"), f.P("x*x")});
    op.components["fv"] = eadd({op.components.at("fv"), f.P("x*y")});
    op.components["fw"] = eadd({op.components.at("fw"), f.P("x*z")});
    auto restricted = restrict_operator(op, f.ansatz, f.b, f.ctx);
    InvariantFrame fr = invariant_frame(op, f.kb.residual_generators, f.kb, 1, f.ctx);
    CHECK_THROWS_WITH_AS(factor_through_frame(restricted, fr, f.ansatz, f.kb.residual_generators,
                                              f.cross_section(), f.b, f.ctx),
                         doctest::Contains("IndependenceFailure"), LredError);
}

TEST_CASE("operator outside the frame span is a factorization failure") {
    Fluid f;
    auto restricted = restrict_operator(f.op, f.ansatz, f.b, f.ctx);
    // corrupt one momentum row so no common invariant scalar exists
    restricted["fu"] = eadd({restricted.at("fu"), f.P("y")});
    InvariantFrame fr = invariant_frame(f.op, f.kb.residual_generators, f.kb, 1, f.ctx);
    CHECK_THROWS_WITH_AS(factor_through_frame(restricted, fr, f.ansatz, f.kb.residual_generators,
                                              f.cross_section(), f.b, f.ctx),
                         doctest::Contains("FactorizationFailure"), LredError);
}

TEST_CASE("transversal scalar equation degenerates to the classical reduction") {
    Context ctx;
    int t = ctx.declare("t", SymKind::Base);
    int x = ctx.declare("x", SymKind::Base);
    int u = ctx.declare("u", SymKind::Fiber);
    BundleSpec b;
    b.base = {t, x};
    b.fiber = {u};
    VectorField tr;
    tr.name = "Tx";
    tr.coeffs[x] = eint(1);
    LieAlgebra alg{{tr}};
    JetContext jc = make_jet_context(ctx, b.base, b.fiber, 2);
    IsotropyConstraintSet cs = isotropy_constraints(alg, b, {}, ctx);
    KinematicBundle kb = solve_kinematic_fiber(cs, alg, b, ctx, {"s"});
    InvariantHints hints;
    hints.base = {{"t", esym(t)}};
    hints.fiber = {{"U", esym(u)}};
    InvariantSet inv = compute_invariants(kb, alg, b, 2, hints, ctx);
    Ansatz a = build_ansatz(kb, inv, b, ctx);
    prolong_ansatz(a, 2, jc, b, ctx);
    CHECK(expr_equal(a.section.at(u), parse("U", ctx), ctx));
    OperatorSpec op;
    op.order = 2;
    op.frame = {"e"};
    op.components = {{"e", parse("u_t - u_xx", ctx)}};
    auto restricted = restrict_operator(op, a, b, ctx);
    InvariantFrame fr = invariant_frame(op, kb.residual_generators, kb, 1, ctx);
    REQUIRE(fr.sections.size() == 1);
    ReducedOperator red = factor_through_frame(restricted, fr, a, kb.residual_generators,
                                               {{x, eint(0)}}, b, ctx);
    REQUIRE(red.components.size() == 1);
    CHECK(expr_equal(red.components[0], parse("U_t", ctx), ctx));
}

TEST_CASE("traveling-wave symmetry: compound base invariant becomes the wave coordinate") {
    Context ctx;
    int t = ctx.declare("t", SymKind::Base);
    int x = ctx.declare("x", SymKind::Base);
    int c = ctx.declare("c", SymKind::Parameter);
    int u = ctx.declare("u", SymKind::Fiber);
    BundleSpec b;
    b.base = {t, x};
    b.fiber = {u};
    b.params = {c};
    VectorField wave;
    wave.name = "W";
    wave.coeffs[t] = eint(1);
    wave.coeffs[x] = esym(c);
    LieAlgebra alg{{wave}};
    JetContext jc = make_jet_context(ctx, b.base, b.fiber, 1);
    IsotropyConstraintSet cs = isotropy_constraints(alg, b, {}, ctx);
    KinematicBundle kb = solve_kinematic_fiber(cs, alg, b, ctx, {"s"});
    InvariantHints hints;
    hints.base = {{"xi", parse("x - c*t", ctx)}};
    hints.fiber = {{"U", esym(u)}};
    InvariantSet inv = compute_invariants(kb, alg, b, 2, hints, ctx);
    Ansatz a = build_ansatz(kb, inv, b, ctx);
    prolong_ansatz(a, 1, jc, b, ctx);
    // u(t,x) = U(x - c t): u_t = -c U', u_x = U'
    int ut = ctx.find_symbol("u_t");
    int ux = ctx.find_symbol("u_x");
    Expr uprime = a.jets.at(ux);
    CHECK(expr_equal(a.jets.at(ut), emul({eneg(esym(c)), uprime}), ctx));
    OperatorSpec op;
    op.order = 1;
    op.frame = {"e"};
    op.components = {{"e", parse("u_t + u*u_x", ctx)}};
    auto restricted = restrict_operator(op, a, b, ctx);
    InvariantFrame fr = invariant_frame(op, kb.residual_generators, kb, 1, ctx);
    REQUIRE(fr.sections.size() == 1);
    // on the cross-section t = 0 the wave coordinate is just x renamed
    std::map<int, Expr> section_map{{t, eint(0)}, {x, esym(a.reduced_base[0])}};
    ReducedOperator red = factor_through_frame(restricted, fr, a, kb.residual_generators,
                                               section_map, b, ctx);
    REQUIRE(red.components.size() == 1);
    // (U - c) U' up to the frame normalization
    Expr expect = substitute(emul({esub(parse("U", ctx), esym(c)), uprime}), section_map, ctx);
    std::vector<std::vector<Expr>> F{{red.components[0]}};
    CHECK(q_solve_span(F, {expect}, {}, ctx).has_value());
}
