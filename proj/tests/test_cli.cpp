#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <fstream>

#include "lred/cli.hpp"

using namespace lred;
using nlohmann::json;

namespace {

std::string fixture(const std::string& name) {
    return corpus_root() + "/" + name + ".lred.json";
}

json golden_for(const std::string& name) {
    std::ifstream in(corpus_root() + "/golden/" + name + ".json");
    REQUIRE(in.good());
    return json::parse(in);
}

json minimal_doc() {
    return json{
        {"name", "tiny"},
        {"symbols", {{"base", {"t", "x"}}, {"fiber", {"u"}}}},
        {"generators", {{{"name", "X"}, {"coeffs", {{"x", "1"}}}}}},
    };
}

std::string thrown_code(const std::function<void()>& f) {
    try {
        f();
    } catch (const LredError& e) {
        return e.code;
    }
    return "";
}

}  // namespace

TEST_CASE("a document with an unknown top-level key is rejected") {
    json doc = minimal_doc();
    doc["surprise"] = 1;
    CHECK(thrown_code([&] { problem_from_json(doc, doc.dump()); }) == "SchemaError");
}

TEST_CASE("an undeclared symbol inside an expression is a syntax error") {
    json doc = minimal_doc();
    doc["generators"][0]["coeffs"]["x"] = "1 + nope";
    CHECK(thrown_code([&] { problem_from_json(doc, doc.dump()); }) == "SyntaxError");
}

TEST_CASE("a generator quadratic in the fiber is rejected") {
    json doc = minimal_doc();
    doc["generators"][0]["coeffs"]["u"] = "u^2";
    CHECK(thrown_code([&] { problem_from_json(doc, doc.dump()); }) == "AdmissibilityError");
}

TEST_CASE("a function rule with the wrong arity is rejected") {
    json doc = minimal_doc();
    doc["functions"] = json::array({json{{"name", "f"}, {"args", {"t"}}}});
    doc["function_rules"] =
        json::array({json{{"fn", "f"}, {"orders", {1, 1}}, {"rhs", "t"}}});
    CHECK(thrown_code([&] { problem_from_json(doc, doc.dump()); }) == "SchemaError");
}

TEST_CASE("loading a missing file reports the path") {
    try {
        load_problem(corpus_root() + "/does_not_exist.lred.json");
        CHECK(false);
    } catch (const LredError& e) {
        CHECK(std::string(e.what()).find("does_not_exist") != std::string::npos);
    }
}

TEST_CASE("save after load round-trips the validated document") {
    Problem p = load_problem(fixture("heat_translation"));
    json saved = save_problem(p);
    Problem again = problem_from_json(saved, saved.dump());
    CHECK(save_problem(again) == saved);
    CHECK(again.name == p.name);
}

TEST_CASE("every corpus problem loads") {
    for (const char* name :
         {"heat_translation", "burgers_traveling_wave", "mech_translation",
          "mech_central_force", "euler_rotational", "euler_new_reduction",
          "schwarzschild_stationary", "static_metric_reflection", "plane_wave",
          "harmonic_s2s4_caseI", "harmonic_s2s4_caseII", "harmonic_s2s4_caseIII"}) {
        CAPTURE(name);
        Problem p = load_problem(fixture(name));
        CHECK(p.name == name);
    }
}

TEST_CASE("check command succeeds and reports ranks") {
    Problem p = load_problem(fixture("heat_translation"));
    RunResult r = run_command("check", p);
    CHECK(r.exit_code == 0);
    CHECK(r.report["transversality"]["rank_base"] == 1);
    CHECK(r.report["closure"] == "ok");
}

TEST_CASE("an empty kinematic bundle is a structural finding, exit code 2") {
    Problem p = load_problem(fixture("mech_translation"));
    RunResult r = run_command("kinematic", p);
    CHECK(r.exit_code == 2);
    CHECK(r.report["kinematic"]["empty"] == true);
    bool mentioned = false;
    for (const auto& f : r.report["findings"])
        if (f.get<std::string>().find("EmptyKinematic") != std::string::npos) mentioned = true;
    CHECK(mentioned);
}

TEST_CASE("an unknown command is an error, exit code 1") {
    Problem p = load_problem(fixture("heat_translation"));
    RunResult r = run_command("frobnicate", p);
    CHECK(r.exit_code == 1);
    CHECK(r.report.contains("error"));
}

TEST_CASE("reduce emits the translated heat equation in reduced coordinates") {
    Problem p = load_problem(fixture("heat_translation"));
    RunResult r = run_command("reduce", p);
    REQUIRE(r.exit_code == 0);
    auto comps = r.report["reduced"]["components"];
    REQUIRE(comps.size() == 1);
    Context ctx;
    std::vector<RewriteRule> rules;
    context_from_report(r.report, ctx, rules);
    CHECK(expr_equal(parse(comps[0].get<std::string>(), ctx), parse("U_t", ctx), ctx));
}

TEST_CASE("text rendering carries the verdict lines") {
    Problem p = load_problem(fixture("heat_translation"));
    RunResult r = run_command("all", p);
    CHECK(r.text.find("transversality") != std::string::npos);
    CHECK(r.text.find("fiber dimension") != std::string::npos);
}

TEST_CASE("two runs of the same problem produce byte-identical reports") {
    Problem p1 = load_problem(fixture("euler_rotational"));
    Problem p2 = load_problem(fixture("euler_rotational"));
    RunResult a = run_command("all", p1);
    RunResult b = run_command("all", p2);
    CHECK(a.report.dump() == b.report.dump());
}

TEST_CASE("fresh reports match their frozen golden counterparts") {
    for (const char* name : {"heat_translation", "burgers_traveling_wave", "euler_rotational",
                             "mech_central_force", "plane_wave"}) {
        CAPTURE(name);
        Problem p = load_problem(fixture(name));
        RunResult r = run_command("all", p);
        GoldenDiff d = compare_golden(r.report, golden_for(name));
        for (const auto& msg : d.diffs) CAPTURE(msg);
        CHECK(d.pass);
    }
}

TEST_CASE("golden comparison tolerates constant recombination of components") {
    json golden = golden_for("heat_translation");
    json mutated = golden;
    mutated["reduced"]["components"][0] = "2*U_t";
    GoldenDiff d = compare_golden(mutated, golden);
    CHECK(d.pass);
}

TEST_CASE("golden comparison flags a genuinely different component") {
    json golden = golden_for("heat_translation");
    json mutated = golden;
    mutated["reduced"]["components"][0] = "U_t + U";
    GoldenDiff d = compare_golden(mutated, golden);
    CHECK_FALSE(d.pass);
    REQUIRE(!d.diffs.empty());
    bool localized = false;
    for (const auto& msg : d.diffs)
        if (msg.find("component") != std::string::npos) localized = true;
    CHECK(localized);
}

TEST_CASE("golden comparison flags a transversality rank change") {
    json golden = golden_for("schwarzschild_stationary");
    json mutated = golden;
    mutated["transversality"]["rank_total"] = 2;
    GoldenDiff d = compare_golden(mutated, golden);
    CHECK_FALSE(d.pass);
}

TEST_CASE("golden comparison accepts an affine change of invariant basis") {
    json golden = golden_for("euler_rotational");
    json mutated = golden;
    // replace B by a unit-triangular mix of the two fiber invariants
    std::string a = golden["invariants"]["fiber"][0]["expr"].get<std::string>();
    std::string b = golden["invariants"]["fiber"][1]["expr"].get<std::string>();
    mutated["invariants"]["fiber"][1]["expr"] = "(" + b + ") + 3*(" + a + ") - 5";
    GoldenDiff d = compare_golden(mutated, golden);
    for (const auto& msg : d.diffs) CAPTURE(msg);
    CHECK(d.pass);
}

TEST_CASE("stored certificates re-verify from the serialized report alone") {
    for (const char* name : {"heat_translation", "euler_rotational", "euler_new_reduction"}) {
        CAPTURE(name);
        Problem p = load_problem(fixture(name));
        RunResult r = run_command("all", p);
        auto problems = reverify_report(r.report);
        for (const auto& msg : problems) CAPTURE(msg);
        CHECK(problems.empty());
    }
}

TEST_CASE("reverification catches a tampered factorization") {
    Problem p = load_problem(fixture("heat_translation"));
    RunResult r = run_command("all", p);
    json tampered = r.report;
    tampered["reduced"]["components"][0] = "U_t + 1";
    CHECK_FALSE(reverify_report(tampered).empty());
}

TEST_CASE("the report embeds the input hash") {
    Problem p = load_problem(fixture("heat_translation"));
    RunResult r = run_command("check", p);
    std::string h = r.report["input_hash"].get<std::string>();
    CHECK(h.rfind("fnv1a64:", 0) == 0);
    CHECK(h.size() > 8);
}
