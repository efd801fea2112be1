#pragma once
// Independent numerical oracle: deterministic chart-respecting sample
// streams, flow integration for invariance drift, finite-difference
// validation of symbolic derivatives, and residual scans of candidate
// solutions.  Everything here evaluates raw expression trees; no
// simplification-based zero test is ever consulted.

#include "lred/eval.hpp"
#include "lred/fields.hpp"

namespace lred {

struct SamplePlan {
    uint64_t seed = 42;
    int count = 20;
    // per-symbol closed interval overrides; defaults keep magnitudes in
    // [0.4, 2] (sign fixed for symbols declared positive)
    std::map<int, std::pair<double, double>> box;
    // every listed expression is kept at least this far from zero
    double exclusion = 1e-3;
    std::vector<Expr> denominators;
};

using Point = std::map<int, double>;

// deterministic stream of points assigning every symbol in `syms` (and every
// symbol feeding a rewrite rule or excluded denominator); symbols bound by a
// rule s^k -> rhs are resolved as roots, not drawn
std::vector<Point> sample_stream(const SamplePlan& plan, const std::vector<int>& syms,
                                 const std::vector<RewriteRule>& rules,
                                 const std::vector<int>& positive, Context& ctx,
                                 const FnTable& fns = {});

// integrates the flow of the field from each sample to t_final with an
// adaptive embedded Runge-Kutta scheme and returns the maximum relative
// drift of the expression along the trajectories
double flow_invariance(const Expr& invariant, const VectorField& field, const SamplePlan& plan,
                       double t_final, const BundleSpec& b, Context& ctx,
                       const FnTable& fns = {});

// compares the chart-aware symbolic derivative against a 4th-order centered
// difference (chart symbols are re-resolved at the shifted points); returns
// the maximum relative error over the stream
double fd_crosscheck(const Expr& e, int sym, const SamplePlan& plan,
                     const std::vector<RewriteRule>& rules, const std::vector<int>& positive,
                     Context& ctx, const FnTable& fns = {});

// maximum absolute value of each labelled component over the stream; all
// opaque functions must be bound numerically in the table
std::vector<std::pair<std::string, double>> residual_scan(
    const std::vector<std::pair<std::string, Expr>>& components, const FnTable& fns,
    const SamplePlan& plan, const std::vector<RewriteRule>& rules,
    const std::vector<int>& positive, Context& ctx);

}  // namespace lred
