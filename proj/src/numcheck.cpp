#include "lred/numcheck.hpp"

#include <algorithm>
#include <boost/numeric/odeint.hpp>
#include <cmath>
#include <set>

namespace lred {

namespace {

uint64_t splitmix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

double unit_interval(uint64_t h) { return static_cast<double>(h >> 11) * 0x1.0p-53; }

struct ChartSampler {
    std::vector<int> drawn;                // symbols assigned from the box
    std::map<int, const RewriteRule*> ruled;  // symbol -> defining rule
    const SamplePlan& plan;
    std::set<int> positive;
    const FnTable& fns;

    ChartSampler(const SamplePlan& p, const std::vector<int>& syms,
                 const std::vector<RewriteRule>& rules, const std::vector<int>& pos,
                 const Context& ctx, const FnTable& f)
        : plan(p), positive(pos.begin(), pos.end()), fns(f) {
        std::set<int> all(syms.begin(), syms.end());
        for (const auto& r : rules) {
            if (r.atom->kind != ExprKind::Sym) continue;
            ruled[r.atom->sym] = &r;
            for (int s : free_symbols(r.rhs, ctx)) all.insert(s);
        }
        for (const auto& d : plan.denominators)
            for (int s : free_symbols(d, ctx)) all.insert(s);
        for (int s : all)
            if (!ruled.count(s)) drawn.push_back(s);
        std::sort(drawn.begin(), drawn.end());
    }

    // resolves every ruled symbol as a root of its rule; false on a domain
    // failure (even root of a negative value); clamp treats a negative
    // radicand as zero instead, for flows tangent to a bounded chart where
    // trial integration steps may overshoot the boundary
    bool resolve(Point& pt, bool clamp = false) const {
        size_t unresolved = ruled.size();
        for (size_t pass = 0; pass <= ruled.size() && unresolved; ++pass) {
            for (const auto& [s, rule] : ruled) {
                if (pt.count(s)) continue;
                double rhs;
                try {
                    rhs = eval_numeric(rule->rhs, pt, fns);
                } catch (const LredError&) {
                    continue;  // depends on a not-yet-resolved symbol
                }
                int k = rule->power;
                double v;
                if (k % 2 == 0) {
                    if (rhs < 0) {
                        if (!clamp && rhs < -1e-9) return false;
                        rhs = 0;
                    }
                    v = std::pow(rhs, 1.0 / k);
                    if (!positive.count(s) && (splitmix64(plan.seed ^ (uint64_t)s) & 1)) v = -v;
                } else {
                    v = std::copysign(std::pow(std::fabs(rhs), 1.0 / k), rhs);
                }
                pt[s] = v;
                --unresolved;
            }
        }
        return unresolved == 0;
    }

    bool admissible(const Point& pt) const {
        for (const auto& d : plan.denominators) {
            try {
                if (std::fabs(eval_numeric(d, pt, fns)) < plan.exclusion) return false;
            } catch (const LredError&) {
                return false;
            }
        }
        return true;
    }

    // deterministic draw: attempt index and symbol id feed the hash
    Point draw(uint64_t attempt) const {
        Point pt;
        for (int s : drawn) {
            uint64_t h = splitmix64(plan.seed ^ splitmix64(attempt * 0x10001ULL + (uint64_t)s));
            double u = unit_interval(h);
            auto it = plan.box.find(s);
            double v;
            if (it != plan.box.end()) {
                v = it->second.first + u * (it->second.second - it->second.first);
            } else {
                // magnitude in [0.4, 2], shrinking toward zero on late
                // attempts so charts that bound the coordinates stay reachable
                double sc = 1.0 / (1.0 + static_cast<double>(attempt) / 200.0);
                v = sc * (0.4 + u * 1.6);
                if (!positive.count(s) && (h & 1)) v = -v;
            }
            pt[s] = v;
        }
        return pt;
    }
};

}  // namespace

std::vector<Point> sample_stream(const SamplePlan& plan, const std::vector<int>& syms,
                                 const std::vector<RewriteRule>& rules,
                                 const std::vector<int>& positive, Context& ctx,
                                 const FnTable& fns) {
    ChartSampler sampler(plan, syms, rules, positive, ctx, fns);
    std::vector<Point> out;
    uint64_t attempt = 0;
    uint64_t budget = 1000ULL * static_cast<uint64_t>(std::max(plan.count, 1));
    while (static_cast<int>(out.size()) < plan.count && attempt < budget) {
        Point pt = sampler.draw(attempt++);
        if (!sampler.resolve(pt)) continue;
        if (!sampler.admissible(pt)) continue;
        out.push_back(std::move(pt));
    }
    if (static_cast<int>(out.size()) < plan.count)
        throw LredError("ChartDegenerate",
                        "could not draw enough admissible sample points within the budget");
    return out;
}

double flow_invariance(const Expr& invariant, const VectorField& field, const SamplePlan& plan,
                       double t_final, const BundleSpec& b, Context& ctx, const FnTable& fns) {
    std::vector<int> syms = free_symbols(invariant, ctx);
    for (const auto& [s, e] : field.coeffs) {
        syms.push_back(s);
        for (int q : free_symbols(e, ctx)) syms.push_back(q);
    }
    ChartSampler sampler(plan, syms, b.rules, b.positive, ctx, fns);
    std::vector<Point> pts = sample_stream(plan, syms, b.rules, b.positive, ctx, fns);

    const std::vector<int>& state_syms = sampler.drawn;
    auto complete = [&](const std::vector<double>& s) {
        Point pt;
        for (size_t i = 0; i < state_syms.size(); ++i) pt[state_syms[i]] = s[i];
        if (!sampler.resolve(pt, /*clamp=*/true))
            throw LredError("IntegrationFailure", "trajectory left the chart domain");
        return pt;
    };
    auto rhs = [&](const std::vector<double>& s, std::vector<double>& dsdt, double) {
        Point pt = complete(s);
        for (size_t i = 0; i < state_syms.size(); ++i) {
            Expr c = field.coeff(state_syms[i]);
            dsdt[i] = is_zero_node(c) ? 0.0 : eval_numeric(c, pt, fns);
        }
    };

    namespace ode = boost::numeric::odeint;
    double worst = 0.0;
    for (const auto& pt : pts) {
        std::vector<double> s;
        for (int q : state_syms) s.push_back(pt.at(q));
        double before = eval_numeric(invariant, complete(s), fns);
        try {
            auto stepper =
                ode::make_controlled(1e-12, 1e-9,
                                     ode::runge_kutta_dopri5<std::vector<double>>());
            ode::integrate_adaptive(stepper, rhs, s, 0.0, t_final,
                                    t_final / 64.0);
        } catch (const std::exception& ex) {
            throw LredError("IntegrationFailure", ex.what());
        }
        double after = eval_numeric(invariant, complete(s), fns);
        worst = std::max(worst, std::fabs(after - before) / (1.0 + std::fabs(before)));
    }
    return worst;
}

double fd_crosscheck(const Expr& e, int sym, const SamplePlan& plan,
                     const std::vector<RewriteRule>& rules, const std::vector<int>& positive,
                     Context& ctx, const FnTable& fns) {
    Expr symbolic = diff_chart(e, sym, rules, ctx);
    std::vector<int> syms = free_symbols(e, ctx);
    syms.push_back(sym);
    ChartSampler sampler(plan, syms, rules, positive, ctx, fns);
    std::vector<Point> pts = sample_stream(plan, syms, rules, positive, ctx, fns);
    double worst = 0.0;
    for (const auto& pt : pts) {
        double x0 = pt.at(sym);
        double h = 1e-4 * std::max(1.0, std::fabs(x0));
        auto at = [&](double offset) {
            Point shifted;
            for (int s : sampler.drawn) shifted[s] = pt.at(s);
            shifted[sym] = x0 + offset;
            if (!sampler.resolve(shifted))
                throw LredError("NumericDomain", "shifted point left the chart domain");
            return eval_numeric(e, shifted, fns);
        };
        double fd = (-at(2 * h) + 8 * at(h) - 8 * at(-h) + at(-2 * h)) / (12 * h);
        double sv = eval_numeric(symbolic, pt, fns);
        worst = std::max(worst, std::fabs(fd - sv) / (1.0 + std::fabs(sv)));
    }
    return worst;
}

std::vector<std::pair<std::string, double>> residual_scan(
    const std::vector<std::pair<std::string, Expr>>& components, const FnTable& fns,
    const SamplePlan& plan, const std::vector<RewriteRule>& rules,
    const std::vector<int>& positive, Context& ctx) {
    std::vector<int> syms;
    for (const auto& [label, e] : components)
        for (int s : free_symbols(e, ctx)) syms.push_back(s);
    std::vector<Point> pts = sample_stream(plan, syms, rules, positive, ctx, fns);
    std::vector<std::pair<std::string, double>> out;
    for (const auto& [label, e] : components) {
        double worst = 0.0;
        for (const auto& pt : pts)
            worst = std::max(worst, std::fabs(eval_numeric(e, pt, fns)));
        out.emplace_back(label, worst);
    }
    return out;
}

}  // namespace lred
