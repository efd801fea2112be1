#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "lred/io.hpp"
#include "lred/numcheck.hpp"
#include "testutil.hpp"

using namespace lred;

TEST_CASE("sample streams are deterministic in the seed and respect assumptions") {
    Context ctx;
    int x = ctx.declare("x", SymKind::Base);
    int y = ctx.declare("y", SymKind::Base);
    SamplePlan plan;
    plan.count = 30;
    plan.denominators = {esym(x)};
    plan.exclusion = 0.5;
    auto a = sample_stream(plan, {x, y}, {}, {y}, ctx);
    auto b = sample_stream(plan, {x, y}, {}, {y}, ctx);
    CHECK(a == b);
    SamplePlan other = plan;
    other.seed = 7;
    CHECK(a != sample_stream(other, {x, y}, {}, {y}, ctx));
    for (const auto& pt : a) {
        CHECK(pt.at(y) > 0.0);
        CHECK(std::fabs(pt.at(x)) >= 0.5);
    }
}

TEST_CASE("ruled chart symbols are resolved as roots on every sample") {
    Context ctx;
    int x = ctx.declare("x", SymKind::Base);
    int y = ctx.declare("y", SymKind::Base);
    int r = ctx.declare("r", SymKind::Base);
    auto rule = make_rule(esym(r), 2, parse("x^2+y^2", ctx), true, ctx);
    SamplePlan plan;
    for (const auto& pt : sample_stream(plan, {x, y, r}, {rule}, {r}, ctx)) {
        double expect = std::sqrt(pt.at(x) * pt.at(x) + pt.at(y) * pt.at(y));
        CHECK(pt.at(r) == doctest::Approx(expect).epsilon(1e-12));
    }
}

TEST_CASE("flow drift separates invariants from non-invariants of a rotation") {
    Context ctx;
    int x = ctx.declare("x", SymKind::Base);
    int y = ctx.declare("y", SymKind::Base);
    BundleSpec b;
    b.base = {x, y};
    VectorField rot;
    rot.name = "R";
    rot.coeffs[x] = eneg(esym(y));
    rot.coeffs[y] = esym(x);
    SamplePlan plan;
    plan.count = 10;
    CHECK(flow_invariance(parse("x^2+y^2", ctx), rot, plan, 3.0, b, ctx) < 1e-7);
    CHECK(flow_invariance(esym(x), rot, plan, 3.0, b, ctx) > 1e-2);
}

TEST_CASE("flow drift of a chart symbol tracks its defining rule") {
    Context ctx;
    int x = ctx.declare("x", SymKind::Base);
    int y = ctx.declare("y", SymKind::Base);
    int z = ctx.declare("z", SymKind::Base);
    int r = ctx.declare("r", SymKind::Base);
    BundleSpec b;
    b.base = {x, y, z};
    b.chart = {r};
    b.rules = {make_rule(esym(r), 2, parse("x^2+y^2+z^2", ctx), true, ctx)};
    b.positive = {r};
    VectorField rot;
    rot.name = "J3";
    rot.coeffs[x] = eneg(esym(y));
    rot.coeffs[y] = esym(x);
    SamplePlan plan;
    plan.count = 10;
    CHECK(flow_invariance(esym(r), rot, plan, 2.0, b, ctx) < 1e-6);
}

TEST_CASE("finite differences confirm symbolic derivatives") {
    Context ctx;
    int x = ctx.declare("x", SymKind::Base);
    int y = ctx.declare("y", SymKind::Base);
    SamplePlan plan;
    plan.count = 15;
    CHECK(fd_crosscheck(parse("x^3*y - 2*x*y^2 + 5", ctx), x, plan, {}, {}, ctx) < 1e-9);
    SamplePlan guarded = plan;
    guarded.denominators = {parse("x - y", ctx)};
    guarded.exclusion = 0.2;
    CHECK(fd_crosscheck(parse("(x^2+1)/(x - y)", ctx), x, guarded, {}, {}, ctx) < 1e-6);
}

TEST_CASE("finite differences see through chart symbols and opaque functions") {
    Context ctx;
    int t = ctx.declare("t", SymKind::Base);
    int x = ctx.declare("x", SymKind::Base);
    int y = ctx.declare("y", SymKind::Base);
    int r = ctx.declare("r", SymKind::Base);
    auto rules = std::vector<RewriteRule>{
        make_rule(esym(r), 2, parse("x^2+y^2", ctx), true, ctx)};
    SamplePlan plan;
    plan.count = 10;
    // d r / d x = x / r via the implicit rule
    CHECK(fd_crosscheck(esym(r), x, plan, rules, {r}, ctx) < 1e-6);
    // an opaque profile evaluated through the chart: A(t, r) = sin(t)/r^3
    int A = ctx.declare_fn("A", {t, r});
    FnTable tbl;
    tbl.rules[{A, {0, 0}}] = [](const std::vector<double>& a) {
        return std::sin(a[0]) / std::pow(a[1], 3);
    };
    tbl.rules[{A, {1, 0}}] = [](const std::vector<double>& a) {
        return std::cos(a[0]) / std::pow(a[1], 3);
    };
    tbl.rules[{A, {0, 1}}] = [](const std::vector<double>& a) {
        return -3.0 * std::sin(a[0]) / std::pow(a[1], 4);
    };
    Expr e = parse("x*A", ctx);
    CHECK(fd_crosscheck(e, x, plan, rules, {r}, ctx, tbl) < 1e-5);
    CHECK(fd_crosscheck(e, t, plan, rules, {r}, ctx, tbl) < 1e-5);
}

TEST_CASE("residual scan: exact radial profile vanishes, perturbed one is flagged") {
    Context ctx;
    int t = ctx.declare("t", SymKind::Base);
    int r = ctx.declare("r", SymKind::Base);
    int A = ctx.declare_fn("A", {t, r});
    int B = ctx.declare_fn("B", {t, r});
    (void)B;
    std::vector<std::pair<std::string, Expr>> comps = {
        {"momentum", parse("D(A,t) + A^2 + r*A*D(A,r) + D(B,r)/r", ctx)},
        {"profile", parse("3*A + r*D(A,r)", ctx)}};
    // A = sin(t)/r^3, B = cos(t)/r - sin(t)^2/(2 r^4): an exact solution
    auto a_ = [](double tt) { return std::sin(tt); };
    auto da = [](double tt) { return std::cos(tt); };
    FnTable tbl;
    tbl.rules[{A, {0, 0}}] = [=](const std::vector<double>& v) {
        return a_(v[0]) / std::pow(v[1], 3);
    };
    tbl.rules[{A, {1, 0}}] = [=](const std::vector<double>& v) {
        return da(v[0]) / std::pow(v[1], 3);
    };
    tbl.rules[{A, {0, 1}}] = [=](const std::vector<double>& v) {
        return -3.0 * a_(v[0]) / std::pow(v[1], 4);
    };
    tbl.rules[{B, {0, 1}}] = [=](const std::vector<double>& v) {
        return -da(v[0]) / std::pow(v[1], 2) + 2.0 * a_(v[0]) * a_(v[0]) / std::pow(v[1], 5);
    };
    SamplePlan plan;
    plan.count = 15;
    auto res = residual_scan(comps, tbl, plan, {}, {r}, ctx);
    REQUIRE(res.size() == 2);
    CHECK(res[0].second < 1e-8);
    CHECK(res[1].second < 1e-8);
    // scale the profile by 1.001: the nonlinear component must light up
    FnTable bad = tbl;
    for (auto key : {std::vector<int>{0, 0}, std::vector<int>{1, 0}, std::vector<int>{0, 1}}) {
        auto f = tbl.rules.at({A, key});
        bad.rules[{A, key}] = [f](const std::vector<double>& v) { return 1.001 * f(v); };
    }
    auto worse = residual_scan(comps, bad, plan, {}, {r}, ctx);
    CHECK(worse[0].second > 1e-5);
}

TEST_CASE("missing numeric bindings are reported as unbound functions") {
    Context ctx;
    int t = ctx.declare("t", SymKind::Base);
    int g = ctx.declare_fn("g", {t});
    (void)g;
    SamplePlan plan;
    plan.count = 2;
    CHECK_THROWS_WITH_AS(
        residual_scan({{"c", parse("g + t", ctx)}}, {}, plan, {}, {}, ctx),
        doctest::Contains("UnboundFunction"), LredError);
}
