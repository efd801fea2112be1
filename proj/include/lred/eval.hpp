#pragma once
// Numeric evaluation of raw expression trees (no canonicalization involved:
// this is the independent side of the symbolic/numeric cross-check).

#include <functional>

#include "lred/expr.hpp"

namespace lred {

// numeric rules for opaque functions: (fn id, derivative multi-index) -> callable
struct FnTable {
    std::map<std::pair<int, std::vector<int>>, std::function<double(const std::vector<double>&)>> rules;
    double call(int fn, const std::vector<int>& deriv, const std::vector<double>& args) const;
};

double eval_numeric(const Expr& e, const std::map<int, double>& point, const FnTable& fns);

}  // namespace lred
