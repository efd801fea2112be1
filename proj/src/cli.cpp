#include "lred/cli.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

namespace lred {

using nlohmann::json;

uint64_t fnv1a64(const std::string& bytes) {
    uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string corpus_root() {
    const char* env = std::getenv("LRED_CORPUS");
    return env ? std::string(env) : std::string("fixtures");
}

namespace {

std::string hex64(uint64_t h) {
    std::ostringstream os;
    os << std::hex << h;
    return os.str();
}

[[noreturn]] void schema_fail(const std::string& where, const std::string& what) {
    throw LredError("SchemaError", where + ": " + what);
}

Expr parse_at(const std::string& text, Context& ctx, const std::string& where) {
    try {
        return parse(text, ctx);
    } catch (const LredError& e) {
        throw LredError("SyntaxError", where + ": " + e.what() + " in \"" + text + "\"");
    }
}

int symbol_at(const json& j, Context& ctx, const std::string& where) {
    if (!j.is_string()) schema_fail(where, "expected a symbol name string");
    int id = ctx.find_symbol(j.get<std::string>());
    if (id < 0) schema_fail(where, "undeclared symbol " + j.get<std::string>());
    return id;
}

VectorField field_from_json(const json& j, Context& ctx, const std::string& where) {
    VectorField v;
    v.name = j.value("name", "");
    if (v.name.empty()) schema_fail(where, "generator needs a name");
    if (!j.contains("coeffs") || !j.at("coeffs").is_object())
        schema_fail(where, "generator " + v.name + " needs a coeffs object");
    for (const auto& [key, val] : j.at("coeffs").items()) {
        int s = ctx.find_symbol(key);
        if (s < 0) schema_fail(where, "undeclared coordinate " + key + " in " + v.name);
        v.coeffs[s] = parse_at(val.get<std::string>(), ctx, where + "/" + v.name + "/" + key);
    }
    return v;
}

json field_to_json(const VectorField& v, const Context& ctx) {
    json coeffs = json::object();
    for (const auto& [s, e] : v.coeffs) coeffs[ctx.sym(s).name] = print(e, ctx);
    return json{{"name", v.name}, {"coeffs", coeffs}};
}

const std::set<std::string> top_keys = {
    "name",       "symbols",      "functions",          "function_rules",
    "generators", "discrete_constraints", "operator",   "invariants",
    "fiber_names", "cross_section", "closed_forms",     "residual_candidates",
    "automorphism_generators", "numerics", "options"};

}  // namespace

Problem problem_from_json(const json& doc, const std::string& source_text) {
    Problem p;
    p.raw = doc;
    p.source_text = source_text;
    if (!doc.is_object()) schema_fail("document", "problem file must be a JSON object");
    for (const auto& [key, val] : doc.items())
        if (!top_keys.count(key)) schema_fail("document", "unknown key \"" + key + "\"");
    p.name = doc.value("name", "");
    if (p.name.empty()) schema_fail("document", "missing problem name");

    if (!doc.contains("symbols")) schema_fail(p.name, "missing symbols section");
    const json& sy = doc.at("symbols");
    for (const auto& n : sy.value("base", json::array()))
        p.bundle.base.push_back(p.ctx.declare(n.get<std::string>(), SymKind::Base));
    for (const auto& n : sy.value("fiber", json::array()))
        p.bundle.fiber.push_back(p.ctx.declare(n.get<std::string>(), SymKind::Fiber));
    // chart symbols are declared before their rules parse (rules may be mutually
    // referencing); parameters next so rule right sides can mention them
    const json& chart = sy.value("chart", json::array());
    for (const auto& c : chart)
        p.bundle.chart.push_back(p.ctx.declare(c.at("symbol").get<std::string>(), SymKind::Base));
    for (const auto& n : sy.value("params", json::array()))
        p.bundle.params.push_back(p.ctx.declare(n.get<std::string>(), SymKind::Parameter));
    for (const auto& f : doc.value("functions", json::array())) {
        std::vector<int> args;
        for (const auto& a : f.value("args", json::array()))
            args.push_back(symbol_at(a, p.ctx, p.name + "/functions"));
        p.ctx.declare_fn(f.at("name").get<std::string>(), args);
    }
    for (size_t i = 0; i < chart.size(); ++i) {
        const json& c = chart[i];
        Expr rhs = parse_at(c.at("rhs").get<std::string>(), p.ctx, p.name + "/chart");
        int power = c.value("power", 2);
        bool dependent = c.value("dependent", true);
        p.bundle.rules.push_back(
            make_rule(esym(p.bundle.chart[i]), power, rhs, dependent, p.ctx));
        if (c.value("positive", false)) p.bundle.positive.push_back(p.bundle.chart[i]);
    }
    for (const auto& n : sy.value("positive", json::array()))
        p.bundle.positive.push_back(symbol_at(n, p.ctx, p.name + "/symbols/positive"));
    for (const auto& r : doc.value("function_rules", json::array())) {
        int fn = p.ctx.find_fn(r.at("fn").get<std::string>());
        if (fn < 0) schema_fail(p.name, "function rule for undeclared function");
        std::vector<int> orders = r.at("orders").get<std::vector<int>>();
        if (orders.size() != p.ctx.fn(fn).args.size())
            schema_fail(p.name, "function rule orders must match the argument count");
        std::vector<Expr> args;
        for (int a : p.ctx.fn(fn).args) args.push_back(esym(a));
        Expr atom = efn(fn, orders, args);
        Expr rhs = parse_at(r.at("rhs").get<std::string>(), p.ctx, p.name + "/function_rules");
        p.bundle.rules.push_back(make_rule(atom, 1, rhs, false, p.ctx));
    }

    if (!doc.contains("generators")) schema_fail(p.name, "missing generators");
    for (const auto& g : doc.at("generators")) {
        VectorField v = field_from_json(g, p.ctx, p.name + "/generators");
        check_admissible(v, p.bundle, p.ctx);  // AdmissibilityError on failure
        p.alg.gens.push_back(std::move(v));
    }
    for (const auto& d : doc.value("discrete_constraints", json::array())) {
        DiscreteConstraint dc;
        dc.name = d.value("name", "b");
        for (const auto& [key, val] : d.at("map").items()) {
            int s = p.ctx.find_symbol(key);
            if (s < 0 || !p.bundle.is_fiber(s))
                schema_fail(p.name, "discrete constraint must map fiber symbols, got " + key);
            dc.map[s] = parse_at(val.get<std::string>(), p.ctx,
                                 p.name + "/discrete_constraints/" + key);
        }
        p.discrete.push_back(std::move(dc));
    }

    if (doc.contains("operator")) {
        const json& op = doc.at("operator");
        p.has_operator = true;
        p.op.order = op.value("order", 1);
        for (const auto& f : op.value("frame", json::array()))
            p.op.frame.push_back(f.get<std::string>());
        const json frame_action = op.value("frame_action", json::object());
        for (const auto& [gen, rows] : frame_action.items()) {
            std::vector<std::vector<Expr>> m;
            for (const auto& row : rows) {
                std::vector<Expr> r;
                for (const auto& e : row)
                    r.push_back(parse_at(e.get<std::string>(), p.ctx,
                                         p.name + "/operator/frame_action/" + gen));
                m.push_back(std::move(r));
            }
            if (m.size() != p.op.frame.size())
                schema_fail(p.name, "frame_action for " + gen + " must be square over the frame");
            p.op.frame_action[gen] = std::move(m);
        }
        for (const auto& row : op.value("frame_constraints", json::array())) {
            std::vector<Expr> r;
            for (const auto& e : row)
                r.push_back(parse_at(e.get<std::string>(), p.ctx,
                                     p.name + "/operator/frame_constraints"));
            p.op.frame_constraints.push_back(std::move(r));
        }
        if (op.contains("components")) {
            p.jc = make_jet_context(p.ctx, p.bundle.base, p.bundle.fiber, p.op.order);
            for (const auto& [frame, text] : op.at("components").items()) {
                bool known = false;
                for (const auto& f : p.op.frame) known = known || f == frame;
                if (!known) schema_fail(p.name, "component for unknown frame name " + frame);
                p.op.components[frame] = parse_at(text.get<std::string>(), p.ctx,
                                                  p.name + "/operator/components/" + frame);
            }
        }
    }

    if (doc.contains("invariants")) {
        const json& iv = doc.at("invariants");
        for (const auto& h : iv.value("base", json::array()))
            p.hints.base.emplace_back(h.at("name").get<std::string>(),
                                      parse_at(h.at("expr").get<std::string>(), p.ctx,
                                               p.name + "/invariants/base"));
        for (const auto& h : iv.value("fiber", json::array()))
            p.hints.fiber.emplace_back(h.at("name").get<std::string>(),
                                       parse_at(h.at("expr").get<std::string>(), p.ctx,
                                                p.name + "/invariants/fiber"));
        for (const auto& d : iv.value("denominators", json::array()))
            p.hints.denominators.push_back(
                parse_at(d.get<std::string>(), p.ctx, p.name + "/invariants/denominators"));
    }
    for (const auto& n : doc.value("fiber_names", json::array()))
        p.fiber_names.push_back(n.get<std::string>());
    const json cross = doc.value("cross_section", json::object());
    for (const auto& [key, val] : cross.items()) p.cross_section_text[key] = val.get<std::string>();
    const json closed = doc.value("closed_forms", json::object());
    for (const auto& [key, val] : closed.items()) p.closed_form_text[key] = val.get<std::string>();
    for (const auto& g : doc.value("residual_candidates", json::array()))
        p.candidates.push_back(field_from_json(g, p.ctx, p.name + "/residual_candidates"));
    for (const auto& g : doc.value("automorphism_generators", json::array())) {
        VectorField v = field_from_json(g, p.ctx, p.name + "/automorphism_generators");
        check_admissible(v, p.bundle, p.ctx);
        p.automorphism.push_back(std::move(v));
    }
    if (doc.contains("numerics")) {
        const json& nm = doc.at("numerics");
        const json fprofiles = nm.value("functions", json::object());
        for (const auto& [fn, prof] : fprofiles.items()) {
            NumericProfile np;
            np.form = prof.value("form", "sin");
            np.freq = prof.value("freq", 1.0);
            np.amp = prof.value("amp", 1.0);
            np.phase = prof.value("phase", 0.0);
            p.profiles[fn] = np;
        }
        const json pvals = nm.value("params", json::object());
        for (const auto& [name, val] : pvals.items())
            p.param_values[name] = val.get<double>();
    }
    if (doc.contains("options")) {
        const json& o = doc.at("options");
        p.options.max_degree = o.value("max_degree", p.options.max_degree);
        p.options.seed = o.value("seed", p.options.seed);
        p.options.tol_num = o.value("tol_num", p.options.tol_num);
        p.options.tol_fd = o.value("tol_fd", p.options.tol_fd);
        p.options.flow_time = o.value("flow_time", p.options.flow_time);
    }
    return p;
}

Problem load_problem(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw LredError("SchemaError", "cannot open problem file " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    json doc;
    try {
        doc = json::parse(buf.str());
    } catch (const std::exception& e) {
        throw LredError("SyntaxError", path + ": " + e.what());
    }
    try {
        return problem_from_json(doc, buf.str());
    } catch (const LredError& e) {
        throw LredError(e.code, path + ": " + std::string(e.what()).substr(e.code.size() + 2));
    }
}

json save_problem(const Problem& p) { return p.raw; }

// ---------------------------------------------------------------- numerics

namespace {

void collect_fn_atoms(const Expr& e, std::set<int>& fns) {
    if (!e) return;
    switch (e->kind) {
        case ExprKind::Fn:
            fns.insert(e->fn);
            for (const auto& a : e->kids) collect_fn_atoms(a, fns);
            break;
        case ExprKind::Add:
        case ExprKind::Mul:
            for (const auto& k : e->kids) collect_fn_atoms(k, fns);
            break;
        case ExprKind::Pow:
            collect_fn_atoms(e->base, fns);
            break;
        default:
            break;
    }
}

void all_multis(size_t nargs, int budget, std::vector<int>& cur,
                std::vector<std::vector<int>>& out) {
    if (cur.size() == nargs) {
        out.push_back(cur);
        return;
    }
    for (int k = 0; k <= budget; ++k) {
        cur.push_back(k);
        all_multis(nargs, budget - k, cur, out);
        cur.pop_back();
    }
}

}  // namespace

void bind_functions(FnTable& tbl, const std::vector<Expr>& exprs,
                    const std::map<std::string, NumericProfile>& profiles, const Context& ctx) {
    std::set<int> fns;
    for (const auto& e : exprs) collect_fn_atoms(e, fns);
    const double half_pi = std::acos(0.0);
    for (int fn : fns) {
        const std::string& name = ctx.fn(fn).name;
        NumericProfile prof;
        auto it = profiles.find(name);
        if (it != profiles.end()) {
            prof = it->second;
        } else {  // deterministic default from the name
            uint64_t h = fnv1a64(name);
            prof.freq = 0.5 + 0.7 * static_cast<double>(h % 997) / 997.0;
            prof.amp = 0.6 + 0.9 * static_cast<double>((h / 997) % 991) / 991.0;
            prof.phase = 0.3 + static_cast<double>((h / 997 / 991) % 983) / 983.0;
        }
        if (prof.form == "cos") prof.phase += half_pi;
        size_t nargs = ctx.fn(fn).args.size();
        std::vector<std::vector<int>> multis;
        std::vector<int> cur;
        all_multis(nargs, 4, cur, multis);
        for (const auto& deriv : multis) {
            int total = 0;
            for (int d : deriv) total += d;
            double scale = prof.amp * std::pow(prof.freq, total);
            double shift = prof.phase + half_pi * total;
            double freq = prof.freq;
            tbl.rules[{fn, deriv}] = [scale, shift, freq](const std::vector<double>& args) {
                double s = 0.0;
                for (double a : args) s += a;
                return scale * std::sin(freq * s + shift);
            };
        }
    }
}

// ---------------------------------------------------------------- pipeline

namespace {

struct Pipeline {
    Problem& p;
    json rep;
    std::vector<std::string> findings;
    bool stopped = false;  // a structural finding ended the pipeline

    IsotropyConstraintSet cs;
    KinematicBundle kb;
    InvariantSet inv;
    Ansatz an;
    std::map<std::string, Expr> restricted;
    InvariantFrame frame;
    ReducedOperator red;
    bool have_kb = false, have_inv = false, have_red = false;

    explicit Pipeline(Problem& prob) : p(prob) {
        rep["schema_version"] = 1;
        rep["problem"] = p.name;
        rep["input_hash"] = "fnv1a64:" + hex64(fnv1a64(p.source_text));
        rep["options"] = {{"max_degree", p.options.max_degree},
                          {"seed", p.options.seed},
                          {"tol_num", p.options.tol_num},
                          {"tol_fd", p.options.tol_fd}};
    }

    std::string pr(const Expr& e) const { return print(e, p.ctx); }

    void stage_check() {
        check_closure(p.alg, p.bundle, p.ctx);
        rep["closure"] = "ok";
        TransversalityReport tr =
            transversality_report(p.alg, p.bundle, p.ctx, p.options.seed);
        rep["transversality"] = {{"rank_base", tr.rank_base},
                                 {"rank_total", tr.rank_total},
                                 {"holds", tr.holds},
                                 {"witness", tr.witness}};
    }

    void stage_kinematic() {
        cs = isotropy_constraints(p.alg, p.bundle, p.discrete, p.ctx);
        kb = solve_kinematic_fiber(cs, p.alg, p.bundle, p.ctx, p.fiber_names, p.options.seed);
        json k;
        json combos = json::array();
        for (const auto& combo : cs.kernel_combos) {
            json row = json::array();
            for (const auto& e : combo) row.push_back(pr(e));
            combos.push_back(row);
        }
        k["kernel_combos"] = combos;
        json cons = json::array();
        for (const auto& c : cs.constraint_exprs) cons.push_back(pr(c));
        k["constraints"] = cons;
        k["empty"] = kb.empty;
        if (kb.empty) {
            k["certificate"] = kb.certificate;
            rep["kinematic"] = k;
            findings.push_back("EmptyKinematic: " + kb.certificate);
            stopped = true;
            return;
        }
        k["fiber_dim"] = kb.fiber_dim;
        json rf = json::array();
        for (int s : kb.reduced_fiber) rf.push_back(p.ctx.sym(s).name);
        k["reduced_fiber"] = rf;
        json inc = json::object();
        for (const auto& [s, e] : kb.inclusion) inc[p.ctx.sym(s).name] = pr(e);
        k["inclusion"] = inc;
        json rg = json::array();
        for (const auto& g : kb.residual_generators) rg.push_back(field_to_json(g, p.ctx));
        k["residual_generators"] = rg;
        json rrules = json::array();
        for (const auto& r : kb.reduced_bundle.rules)
            rrules.push_back(json{{"atom", pr(r.atom)},
                                  {"power", r.power},
                                  {"rhs", pr(r.rhs)},
                                  {"dependent", r.dependent}});
        k["reduced_rules"] = rrules;
        rep["kinematic"] = k;
        have_kb = true;
    }

    void stage_invariants() {
        inv = compute_invariants(kb, p.alg, p.bundle, p.options.max_degree, p.hints, p.ctx,
                                 p.options.seed);
        auto ser = [&](const std::vector<Invariant>& list) {
            json arr = json::array();
            for (const auto& i : list)
                arr.push_back(json{{"name", i.name},
                                   {"expr", pr(i.expr)},
                                   {"origin", i.origin == InvariantOrigin::UserVerified
                                                  ? "user_verified"
                                                  : "computed"}});
            return arr;
        };
        json v;
        v["base"] = ser(inv.base_invariants);
        v["fiber"] = ser(inv.fiber_invariants);
        KinematicDiagram dia = kinematic_diagram(kb, inv, p.bundle, p.ctx);
        json dj;
        dj["base_coordinates"] = dia.base_coordinates;
        dj["reduced_coordinates"] = dia.reduced_coordinates;
        json incl = json::array();
        for (const auto& [n, e] : dia.inclusion) incl.push_back(json::array({n, e}));
        dj["inclusion"] = incl;
        dj["fiber_dim"] = dia.fiber_dim;
        v["diagram"] = dj;
        rep["invariants"] = v;
        have_inv = true;
    }

    std::map<int, Expr> parse_cross_section() {
        std::map<int, Expr> m;
        for (const auto& [key, text] : p.cross_section_text) {
            int s = p.ctx.find_symbol(key);
            if (s < 0) throw LredError("SchemaError", "cross_section names unknown symbol " + key);
            m[s] = parse_at(text, p.ctx, p.name + "/cross_section/" + key);
        }
        return m;
    }

    void stage_reduce() {
        if (!p.has_operator || p.op.components.empty())
            throw LredError("SchemaError", "reduce requires an operator with components");
        an = build_ansatz(kb, inv, p.bundle, p.ctx);
        prolong_ansatz(an, p.op.order, p.jc, p.bundle, p.ctx);
        restricted = restrict_operator(p.op, an, p.bundle, p.ctx);
        frame = invariant_frame(p.op, kb.residual_generators, kb, p.options.max_degree, p.ctx);
        red = factor_through_frame(restricted, frame, an, kb.residual_generators,
                                   parse_cross_section(), p.bundle, p.ctx);
        json aj;
        json rb = json::array();
        for (int s : an.reduced_base)
            rb.push_back(json{{"symbol", p.ctx.sym(s).name},
                              {"def", pr(an.reduced_base_defs.at(s))}});
        aj["reduced_base"] = rb;
        json un = json::array();
        for (size_t i = 0; i < an.unknown_fns.size(); ++i)
            un.push_back(json{{"fn", p.ctx.fn(an.unknown_fns[i]).name},
                              {"applied", pr(an.unknown_apps[i])}});
        aj["unknowns"] = un;
        json sec = json::object();
        for (const auto& [s, e] : an.section) sec[p.ctx.sym(s).name] = pr(e);
        aj["section"] = sec;
        json jets = json::object();
        for (const auto& [s, e] : an.jets) jets[p.ctx.sym(s).name] = pr(e);
        aj["jets"] = jets;
        aj["order"] = an.order;
        rep["ansatz"] = aj;
        json rj = json::object();
        for (const auto& [f, e] : restricted) rj[f] = pr(e);
        rep["restricted"] = rj;
        json fj;
        fj["names"] = frame.frame;
        json secs = json::array();
        for (const auto& row : frame.sections) {
            json r = json::array();
            for (const auto& e : row) r.push_back(pr(e));
            secs.push_back(r);
        }
        fj["sections"] = secs;
        rep["frame"] = fj;
        json cj = json::array(), caj = json::array();
        for (const auto& e : red.components) cj.push_back(pr(e));
        for (const auto& e : red.components_ambient) caj.push_back(pr(e));
        rep["reduced"] = {{"components", cj}, {"components_ambient", caj}};
        // re-checkable certificates
        json allowed = json::array();
        for (int s : an.reduced_base) allowed.push_back(p.ctx.sym(s).name);
        for (int s : p.bundle.params) allowed.push_back(p.ctx.sym(s).name);
        json xsec = json::object();
        for (const auto& [s, e] : parse_cross_section()) xsec[p.ctx.sym(s).name] = pr(e);
        rep["certificates"] = {
            {"factorization",
             "for each frame name A: restricted[A] == sum_Q sections[Q][A] * "
             "components_ambient[Q] modulo the chart rules"},
            {"cross_section", xsec},
            {"independence", {{"allowed_symbols", allowed}}}};
        have_red = true;
    }

    void stage_verify() {
        if (p.closed_form_text.empty())
            throw LredError("SchemaError", "verify requires closed_forms in the problem file");
        std::map<int, Expr> closed;
        for (const auto& [name, text] : p.closed_form_text) {
            int fn = p.ctx.find_fn(name);
            if (fn < 0)
                throw LredError("SchemaError", "closed form for unknown function " + name);
            closed[fn] = parse_at(text, p.ctx, p.name + "/closed_forms/" + name);
        }
        std::vector<std::pair<std::string, Expr>> comps;
        for (size_t i = 0; i < red.components.size(); ++i)
            comps.emplace_back("reduced[" + std::to_string(i) + "]", red.components[i]);
        SolutionCheck reduced_chk =
            verify_components(comps, closed, kb.reduced_bundle.rules, p.ctx);
        comps.clear();
        for (const auto& [f, e] : restricted) comps.emplace_back("restricted[" + f + "]", e);
        SolutionCheck ambient_chk = verify_components(comps, closed, p.bundle.rules, p.ctx);
        auto ser = [&](const SolutionCheck& c) {
            json parts = json::array();
            for (size_t i = 0; i < c.parts.size(); ++i)
                parts.push_back(json{{"label", c.parts[i].first},
                                     {"zero", c.parts[i].second},
                                     {"residual", pr(c.residuals[i])}});
            return json{{"all_zero", c.all_zero}, {"parts", parts}};
        };
        rep["verify"] = {{"reduced", ser(reduced_chk)}, {"original", ser(ambient_chk)}};
        if (!reduced_chk.all_zero || !ambient_chk.all_zero)
            findings.push_back("ResidualNonzero: the closed form does not solve the system");
    }

    void stage_residual() {
        json out = json::array();
        for (const auto& y : p.candidates) {
            MembershipCertificate cert =
                classify_candidate(y, p.alg, kb, p.bundle, p.ctx, p.options.seed);
            out.push_back(json{{"candidate", cert.candidate},
                               {"verdict", membership_name(cert.verdict)},
                               {"witness", cert.witness},
                               {"restricted", field_to_json(cert.restricted, p.ctx)}});
        }
        rep["residual"] = out;
    }

    void stage_universal() {
        if (!p.has_operator || p.op.frame.empty())
            throw LredError("SchemaError", "universal requires an operator frame");
        const std::vector<VectorField>& gens =
            p.automorphism.empty() ? p.alg.gens : p.automorphism;
        UniversalReport ur =
            universal_check(p.op, gens, kb, p.bundle, p.options.max_degree, p.ctx);
        json secs = json::array();
        for (const auto& row : ur.frame.sections) {
            json r = json::array();
            for (const auto& e : row) r.push_back(pr(e));
            secs.push_back(r);
        }
        rep["universal"] = {{"universal", ur.universal},
                            {"note", ur.note},
                            {"frame_sections", secs}};
    }

    void stage_numeric() {
        std::vector<Expr> pool;
        for (const auto& g : p.alg.gens)
            for (const auto& [s, e] : g.coeffs) pool.push_back(e);
        for (const auto& r : p.bundle.rules) pool.push_back(r.rhs);
        if (have_inv) {
            for (const auto& i : inv.base_invariants) pool.push_back(i.expr);
            for (const auto& i : inv.fiber_invariants) pool.push_back(i.expr);
        }
        if (have_red)
            for (const auto& [s, e] : an.section) pool.push_back(e);
        for (const auto& d : p.hints.denominators) pool.push_back(d);
        FnTable tbl;
        bind_functions(tbl, pool, p.profiles, p.ctx);
        SamplePlan plan;
        plan.seed = p.options.seed;
        plan.count = 6;
        plan.denominators = p.hints.denominators;
        for (const auto& [name, value] : p.param_values) {
            int s = p.ctx.find_symbol(name);
            if (s >= 0) plan.box[s] = {value, value};
        }
        json nj;
        double worst_flow = 0.0;
        json flows = json::array();
        if (have_inv) {
            std::vector<Invariant> all = inv.base_invariants;
            all.insert(all.end(), inv.fiber_invariants.begin(), inv.fiber_invariants.end());
            // invariant expressions live on the kinematic bundle, so the
            // drift is measured along the residual generators' flows there
            for (const auto& i : all)
                for (const auto& g : kb.residual_generators) {
                    double drift = flow_invariance(i.expr, g, plan, p.options.flow_time,
                                                   kb.reduced_bundle, p.ctx, tbl);
                    worst_flow = std::max(worst_flow, drift);
                    flows.push_back(json{{"invariant", i.name},
                                         {"generator", g.name},
                                         {"drift", drift}});
                }
        }
        nj["flow_drift"] = flows;
        nj["flow_within_tol"] = worst_flow < p.options.tol_num;
        double worst_fd = 0.0;
        json fds = json::array();
        if (have_red) {
            for (const auto& [s, e] : an.section)
                for (int b : p.bundle.base) {
                    double err = fd_crosscheck(e, b, plan, p.bundle.rules, p.bundle.positive,
                                               p.ctx, tbl);
                    worst_fd = std::max(worst_fd, err);
                    fds.push_back(json{{"section", p.ctx.sym(s).name},
                                       {"symbol", p.ctx.sym(b).name},
                                       {"error", err}});
                }
        }
        nj["fd"] = fds;
        nj["fd_within_tol"] = worst_fd < p.options.tol_fd;
        rep["numeric"] = nj;
        if (worst_flow >= p.options.tol_num || worst_fd >= p.options.tol_fd)
            findings.push_back("NumericDisagreement: a cross-check exceeded its tolerance");
    }

    void serialize_context() {
        json c;
        json syms = json::array();
        for (const auto& s : p.ctx.symbols)
            syms.push_back(json{{"name", s.name}, {"kind", kind_name(s.kind)}});
        c["symbols"] = syms;
        json fns = json::array();
        for (const auto& f : p.ctx.fns) {
            json args = json::array();
            for (int a : f.args) args.push_back(p.ctx.sym(a).name);
            fns.push_back(json{{"name", f.name}, {"args", args}});
        }
        c["functions"] = fns;
        json rules = json::array();
        for (const auto& r : p.bundle.rules)
            rules.push_back(json{{"atom", pr(r.atom)},
                                 {"power", r.power},
                                 {"rhs", pr(r.rhs)},
                                 {"dependent", r.dependent}});
        c["rules"] = rules;
        rep["context"] = c;
    }
};

void render_text(const json& rep, double ms, std::ostream& os) {
    os << "problem " << rep.value("problem", "?") << "  [" << rep.value("command", "")
       << "]\n";
    if (rep.contains("error")) {
        os << "error " << rep["error"].value("code", "") << ": "
           << rep["error"].value("message", "") << "\n";
        return;
    }
    if (rep.contains("transversality")) {
        const json& t = rep["transversality"];
        os << "transversality: rank_base=" << t["rank_base"] << " rank_total="
           << t["rank_total"] << " holds=" << (t["holds"].get<bool>() ? "true" : "false")
           << "\n";
    }
    if (rep.contains("kinematic")) {
        const json& k = rep["kinematic"];
        if (k.value("empty", false)) {
            os << "kinematic bundle: EMPTY — " << k.value("certificate", "") << "\n";
        } else {
            os << "kinematic bundle: fiber dimension=" << k["fiber_dim"] << " coordinates=[";
            bool first = true;
            for (const auto& n : k["reduced_fiber"]) {
                if (!first) os << ", ";
                os << n.get<std::string>();
                first = false;
            }
            os << "]\n";
            for (const auto& [key, val] : k["inclusion"].items())
                os << "  iota(" << key << ") = " << val.get<std::string>() << "\n";
        }
    }
    if (rep.contains("invariants")) {
        os << "invariants:\n";
        for (const char* cls : {"base", "fiber"})
            for (const auto& i : rep["invariants"][cls])
                os << "  " << i["name"].get<std::string>() << " = "
                   << i["expr"].get<std::string>() << "\n";
    }
    if (rep.contains("ansatz")) {
        os << "ansatz:\n";
        for (const auto& [key, val] : rep["ansatz"]["section"].items())
            os << "  " << key << " = " << val.get<std::string>() << "\n";
    }
    if (rep.contains("reduced")) {
        os << "reduced components:\n";
        for (const auto& c : rep["reduced"]["components"])
            os << "  " << c.get<std::string>() << " = 0\n";
    }
    if (rep.contains("verify")) {
        os << "verify: reduced all_zero="
           << (rep["verify"]["reduced"]["all_zero"].get<bool>() ? "true" : "false")
           << " original all_zero="
           << (rep["verify"]["original"]["all_zero"].get<bool>() ? "true" : "false") << "\n";
    }
    if (rep.contains("residual"))
        for (const auto& r : rep["residual"])
            os << "residual candidate " << r["candidate"].get<std::string>() << ": "
               << r["verdict"].get<std::string>() << "\n";
    if (rep.contains("universal"))
        os << "universal: "
           << (rep["universal"]["universal"].get<bool>() ? "true" : "false") << " — "
           << rep["universal"]["note"].get<std::string>() << "\n";
    if (rep.contains("numeric"))
        os << "numeric cross-checks: flow_within_tol="
           << (rep["numeric"]["flow_within_tol"].get<bool>() ? "true" : "false")
           << " fd_within_tol="
           << (rep["numeric"]["fd_within_tol"].get<bool>() ? "true" : "false") << "\n";
    if (rep.contains("findings"))
        for (const auto& f : rep["findings"]) os << "finding: " << f.get<std::string>() << "\n";
    os << "(completed in " << ms << " ms)\n";
}

}  // namespace

RunResult run_command(const std::string& command, Problem& original) {
    auto t0 = std::chrono::steady_clock::now();
    Problem p = original;  // the pipeline declares symbols; keep the input reusable
    Pipeline pl(p);
    pl.rep["command"] = command;
    RunResult out;
    try {
        static const std::set<std::string> known{"check",  "kinematic", "invariants",
                                                 "reduce", "verify",    "residual",
                                                 "universal", "all"};
        if (!known.count(command))
            throw LredError("SchemaError", "unknown command " + command);
        bool want_kin = command != "check";
        pl.stage_check();
        if (want_kin) pl.stage_kinematic();
        if (!pl.stopped) {
            if (command == "invariants" || command == "reduce" || command == "verify" ||
                command == "all")
                pl.stage_invariants();
            if (command == "reduce" || command == "verify" ||
                (command == "all" && p.has_operator && !p.op.components.empty()))
                pl.stage_reduce();
            if (command == "verify" || (command == "all" && !p.closed_form_text.empty()))
                pl.stage_verify();
            if (command == "residual" || (command == "all" && !p.candidates.empty()))
                pl.stage_residual();
            if (command == "universal" ||
                (command == "all" && p.has_operator && !p.op.frame.empty() &&
                 !p.automorphism.empty()))
                pl.stage_universal();
            if (command == "all") pl.stage_numeric();
        }
        pl.serialize_context();
        if (!pl.findings.empty()) {
            pl.rep["findings"] = pl.findings;
            out.exit_code = 2;
        }
    } catch (const LredError& e) {
        std::string msg = e.what();
        pl.rep["error"] = {{"code", e.code},
                           {"message", msg.substr(std::min(msg.size(), e.code.size() + 2))}};
        out.exit_code = 1;
    } catch (const std::exception& e) {
        pl.rep["error"] = {{"code", "InternalError"}, {"message", e.what()}};
        out.exit_code = 1;
    }
    out.report = std::move(pl.rep);
    double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
                    .count();
    std::ostringstream os;
    render_text(out.report, ms, os);
    out.text = os.str();
    return out;
}

// ------------------------------------------------------- report re-loading

void context_from_report(const json& report, Context& ctx, std::vector<RewriteRule>& rules) {
    const json& c = report.at("context");
    for (const auto& s : c.at("symbols")) ctx.declare(s.at("name").get<std::string>(),
                                                      SymKind::Base);
    for (const auto& f : c.at("functions")) {
        std::vector<int> args;
        for (const auto& a : f.at("args")) args.push_back(ctx.find_symbol(a.get<std::string>()));
        ctx.declare_fn(f.at("name").get<std::string>(), args);
    }
    for (const auto& r : c.at("rules"))
        rules.push_back(make_rule(parse(r.at("atom").get<std::string>(), ctx),
                                  r.at("power").get<int>(),
                                  parse(r.at("rhs").get<std::string>(), ctx),
                                  r.value("dependent", false), ctx));
}

std::vector<std::string> reverify_report(const json& report) {
    std::vector<std::string> failures;
    Context ctx;
    std::vector<RewriteRule> rules;
    context_from_report(report, ctx, rules);
    if (report.contains("restricted") && report.contains("frame") &&
        report.contains("reduced")) {
        const json& names = report["frame"]["names"];
        const json& sections = report["frame"]["sections"];
        const json& ambient = report["reduced"]["components_ambient"];
        for (size_t a = 0; a < names.size(); ++a) {
            const std::string& fname = names[a].get_ref<const std::string&>();
            Expr lhs = parse(report["restricted"].at(fname).get<std::string>(), ctx);
            std::vector<Expr> terms{eneg(lhs)};
            for (size_t q = 0; q < sections.size(); ++q)
                terms.push_back(emul({parse(sections[q][a].get<std::string>(), ctx),
                                      parse(ambient[q].get<std::string>(), ctx)}));
            if (!is_zero_mod(eadd(std::move(terms)), rules, ctx))
                failures.push_back("factorization identity fails for frame " + fname);
        }
        // the reduced components must be the ambient ones rewritten through
        // the stored cross-section, modulo the rules the rewrite leaves intact
        if (report.contains("kinematic") && report["kinematic"].contains("reduced_rules") &&
            report["certificates"].contains("cross_section")) {
            std::map<int, Expr> xsec;
            std::set<int> moved;
            for (const auto& [key, val] : report["certificates"]["cross_section"].items()) {
                int s = ctx.find_symbol(key);
                xsec[s] = parse(val.get<std::string>(), ctx);
                moved.insert(s);
            }
            std::vector<RewriteRule> kept;
            for (const auto& r : report["kinematic"]["reduced_rules"]) {
                Expr atom = parse(r.at("atom").get<std::string>(), ctx);
                Expr rhs = parse(r.at("rhs").get<std::string>(), ctx);
                bool touched = false;
                for (int s : free_symbols(rhs, ctx))
                    if (moved.count(s)) touched = true;
                if (atom->kind == ExprKind::Sym && moved.count(atom->sym)) touched = true;
                if (!touched)
                    kept.push_back(
                        make_rule(atom, r.at("power").get<int>(), rhs,
                                  r.value("dependent", false), ctx));
            }
            const json& cj = report["reduced"]["components"];
            const json& caj = report["reduced"]["components_ambient"];
            for (size_t q = 0; q < cj.size() && q < caj.size(); ++q) {
                Expr lhs = parse(cj[q].get<std::string>(), ctx);
                Expr rhs = substitute(parse(caj[q].get<std::string>(), ctx), xsec, ctx);
                if (!is_zero_mod(esub(lhs, rhs), kept, ctx))
                    failures.push_back("reduced component " + std::to_string(q) +
                                       " does not match its ambient form under the "
                                       "cross-section");
            }
        }
        std::set<std::string> allowed;
        for (const auto& s : report["certificates"]["independence"]["allowed_symbols"])
            allowed.insert(s.get<std::string>());
        for (const auto& comp : report["reduced"]["components"]) {
            Expr e = parse(comp.get<std::string>(), ctx);
            for (int s : free_symbols(e, ctx))
                if (!allowed.count(ctx.sym(s).name))
                    failures.push_back("reduced component depends on disallowed symbol " +
                                       ctx.sym(s).name);
        }
    }
    if (report.contains("verify")) {
        std::vector<RewriteRule> rrules;
        if (report.contains("kinematic") && report["kinematic"].contains("reduced_rules"))
            for (const auto& r : report["kinematic"]["reduced_rules"])
                rrules.push_back(make_rule(parse(r.at("atom").get<std::string>(), ctx),
                                           r.at("power").get<int>(),
                                           parse(r.at("rhs").get<std::string>(), ctx),
                                           r.value("dependent", false), ctx));
        for (const char* side : {"reduced", "original"}) {
            const std::vector<RewriteRule>& rs =
                std::string(side) == "reduced" ? rrules : rules;
            for (const auto& part : report["verify"][side]["parts"])
                if (part["zero"].get<bool>() &&
                    !is_zero_mod(parse(part["residual"].get<std::string>(), ctx), rs, ctx))
                    failures.push_back("claimed-zero residual is not zero: " +
                                       part["label"].get<std::string>());
        }
    }
    return failures;
}

// ----------------------------------------------------------------- goldens

namespace {

// true when target is a rational-constant combination of {1} + basis
bool in_affine_span(const std::vector<Expr>& basis, const Expr& target,
                    const std::vector<RewriteRule>& rules, Context& ctx) {
    std::vector<std::vector<Expr>> F{{eint(1)}};
    for (const auto& b : basis) F.push_back({b});
    return q_solve_span(F, {target}, rules, ctx).has_value();
}

}  // namespace

GoldenDiff compare_golden(const json& report, const json& golden) {
    GoldenDiff out;
    auto miss = [&](const std::string& msg) {
        out.pass = false;
        out.diffs.push_back(msg);
    };
    if (report.contains("transversality") && golden.contains("transversality")) {
        for (const char* key : {"rank_base", "rank_total"})
            if (report["transversality"][key] != golden["transversality"][key])
                miss(std::string("transversality ") + key + " differs");
        if (report["transversality"]["holds"] != golden["transversality"]["holds"])
            miss("transversality verdict differs");
    }
    if (report.contains("kinematic") && golden.contains("kinematic")) {
        if (report["kinematic"].value("empty", false) != golden["kinematic"].value("empty", false))
            miss("kinematic emptiness differs");
        else if (!report["kinematic"].value("empty", false) &&
                 report["kinematic"]["fiber_dim"] != golden["kinematic"]["fiber_dim"])
            miss("kinematic fiber dimension differs");
    }
    Context ctx;
    std::vector<RewriteRule> rules;
    context_from_report(report, ctx, rules);
    if (report.contains("reduced") && golden.contains("reduced")) {
        std::vector<Expr> mine, theirs;
        for (const auto& c : report["reduced"]["components"])
            mine.push_back(parse(c.get<std::string>(), ctx));
        for (const auto& c : golden["reduced"]["components"])
            theirs.push_back(parse(c.get<std::string>(), ctx));
        if (mine.size() != theirs.size()) {
            miss("reduced component count differs");
        } else {
            std::vector<std::vector<Expr>> fm, ft;
            for (const auto& e : mine) fm.push_back({e});
            for (const auto& e : theirs) ft.push_back({e});
            for (size_t i = 0; i < theirs.size(); ++i)
                if (!q_solve_span(fm, {theirs[i]}, rules, ctx))
                    miss("golden component " + std::to_string(i) +
                         " is not a constant combination of the report components: " +
                         golden["reduced"]["components"][i].get<std::string>());
            for (size_t i = 0; i < mine.size(); ++i)
                if (!q_solve_span(ft, {mine[i]}, rules, ctx))
                    miss("report component " + std::to_string(i) +
                         " is not a constant combination of the golden components: " +
                         report["reduced"]["components"][i].get<std::string>());
        }
    }
    if (report.contains("invariants") && golden.contains("invariants")) {
        for (const char* cls : {"base", "fiber"}) {
            std::vector<Expr> mine, theirs;
            for (const auto& i : report["invariants"][cls])
                mine.push_back(parse(i["expr"].get<std::string>(), ctx));
            for (const auto& i : golden["invariants"][cls])
                theirs.push_back(parse(i["expr"].get<std::string>(), ctx));
            if (mine.size() != theirs.size()) {
                miss(std::string(cls) + " invariant count differs");
                continue;
            }
            for (size_t i = 0; i < theirs.size(); ++i)
                if (!in_affine_span(mine, theirs[i], rules, ctx))
                    miss("golden " + std::string(cls) + " invariant " + std::to_string(i) +
                         " is outside the affine span of the report invariants");
            for (size_t i = 0; i < mine.size(); ++i)
                if (!in_affine_span(theirs, mine[i], rules, ctx))
                    miss("report " + std::string(cls) + " invariant " + std::to_string(i) +
                         " is outside the affine span of the golden invariants");
        }
    }
    if (report.contains("universal") && golden.contains("universal") &&
        report["universal"]["universal"] != golden["universal"]["universal"])
        miss("universality verdict differs");
    return out;
}

}  // namespace lred
