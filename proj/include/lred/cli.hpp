#pragma once
// Problem-file ingestion, pipeline commands, report rendering (text and
// JSON), golden comparison, and deterministic numeric bindings for opaque
// functions.

#include <json.hpp>

#include "lred/dynamic.hpp"
#include "lred/io.hpp"
#include "lred/numcheck.hpp"
#include "lred/residual.hpp"

namespace lred {

struct ProblemOptions {
    int max_degree = 4;
    uint64_t seed = 42;
    double tol_num = 1e-6;
    double tol_fd = 1e-5;
    double flow_time = 1.0;
};

// deterministic smooth profile f(x1..xn) = amp * trig(freq * (x1+..+xn) + phase)
// whose derivatives of every order are exact
struct NumericProfile {
    std::string form = "sin";  // "sin" or "cos"
    double freq = 1.0;
    double amp = 1.0;
    double phase = 0.0;
};

struct Problem {
    std::string name;
    Context ctx;
    BundleSpec bundle;
    LieAlgebra alg;
    std::vector<DiscreteConstraint> discrete;
    bool has_operator = false;
    OperatorSpec op;
    JetContext jc;  // jets declared at load when the operator has components
    InvariantHints hints;
    std::vector<std::string> fiber_names;
    // parsed lazily, after the reduction declares unknown functions
    std::map<std::string, std::string> cross_section_text;
    std::map<std::string, std::string> closed_form_text;
    std::vector<VectorField> candidates;      // residual classification inputs
    std::vector<VectorField> automorphism;    // universal-check generators
    std::map<std::string, NumericProfile> profiles;  // numeric fn bindings
    std::map<std::string, double> param_values;
    ProblemOptions options;
    std::string source_text;  // raw bytes, hashed into every report
    nlohmann::json raw;       // validated document, for round-tripping
};

// load and validate; SchemaError / SyntaxError / AdmissibilityError on bad input
Problem load_problem(const std::string& path);
Problem problem_from_json(const nlohmann::json& doc, const std::string& source_text);
nlohmann::json save_problem(const Problem& p);

struct RunResult {
    int exit_code = 0;  // 0 success, 2 structural finding, 1 error
    nlohmann::json report;
    std::string text;
};

// command in {check, kinematic, invariants, reduce, verify, residual,
// universal, all}; never throws: errors become exit code 1 with a diagnostic
RunResult run_command(const std::string& command, Problem& p);

struct GoldenDiff {
    bool pass = true;
    std::vector<std::string> diffs;  // localized mismatch descriptions
};

// equality of two reports up to invertible constant recombination of reduced
// components and affine change of invariant basis, via exact symbolic solves
GoldenDiff compare_golden(const nlohmann::json& report, const nlohmann::json& golden);

// rebuilds a parsing context (symbols, functions, rules) from a report's
// serialized context section, so every expression in the report re-parses
void context_from_report(const nlohmann::json& report, Context& ctx,
                         std::vector<RewriteRule>& rules);

// re-checks every symbolic certificate stored in a serialized report
// (factorization identity, component invariance, verified residuals)
std::vector<std::string> reverify_report(const nlohmann::json& report);

// binds every opaque-function derivative appearing in the expressions to the
// named profile (or a hash-derived default), with analytically exact
// derivatives of all orders
void bind_functions(FnTable& tbl, const std::vector<Expr>& exprs,
                    const std::map<std::string, NumericProfile>& profiles, const Context& ctx);

uint64_t fnv1a64(const std::string& bytes);

// fixture root: LRED_CORPUS env var, else "fixtures"
std::string corpus_root();

}  // namespace lred
