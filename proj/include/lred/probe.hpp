#pragma once
// Deterministic numeric sample points on the chart variety.  Used to certify
// symbolic generic-rank computations at concrete points, to detect rank jumps
// between independent points, and for functional-independence checks.
//
// A probe assigns a double value to every atom (symbol or opaque application).
// Symbols ruled by rewrite rules receive values satisfying atom^k = rhs
// exactly (up to roundoff); unruled atoms receive pseudo-random values from a
// seeded hash, so distinct atoms are generically independent.

#include <set>
#include <vector>

#include "lred/canonical.hpp"

namespace lred {

class Probe {
public:
    // scale shrinks the draw box toward zero; retries use it to find points
    // on charts that constrain coordinates to a bounded region
    Probe(const std::vector<RewriteRule>& rules, const std::vector<int>& positive, Context& ctx,
          uint64_t seed, double scale = 1.0);

    // value of an atom id; unruled atoms are assigned lazily from the hash
    double atom_value(int atom);
    // evaluates a canonical expression tree
    double eval(const Expr& e);

    Context& ctx;

private:
    uint64_t seed_;
    double scale_;
    std::map<int, double> values_;
    std::set<int> pending_;  // ruled atoms awaiting resolution
    double fresh(int atom) const;
};

// probe at a point where all ruled symbols are resolvable; retries seeds and
// raises ChartDegenerate after the given number of failed draws
Probe sample_point(const std::vector<RewriteRule>& rules, const std::vector<int>& positive,
                   Context& ctx, uint64_t seed, int max_draws = 1000);

// rank of a numeric matrix by Gaussian elimination with partial pivoting
int numeric_rank(std::vector<std::vector<double>> m, double tol = 1e-9);

}  // namespace lred
