#include "lred/eval.hpp"

#include <cmath>

namespace lred {

double FnTable::call(int fn, const std::vector<int>& deriv, const std::vector<double>& args) const {
    auto it = rules.find({fn, deriv});
    if (it == rules.end())
        throw LredError("UnboundFunction",
                        "no numeric rule for function id " + std::to_string(fn));
    return it->second(args);
}

double eval_numeric(const Expr& e, const std::map<int, double>& point, const FnTable& fns) {
    switch (e->kind) {
        case ExprKind::Num:
            return e->value.convert_to<double>();
        case ExprKind::Sym: {
            auto it = point.find(e->sym);
            if (it == point.end())
                throw LredError("UnboundSymbol", "symbol id " + std::to_string(e->sym));
            return it->second;
        }
        case ExprKind::Add: {
            double s = 0;
            for (const auto& k : e->kids) s += eval_numeric(k, point, fns);
            return s;
        }
        case ExprKind::Mul: {
            double s = 1;
            for (const auto& k : e->kids) s *= eval_numeric(k, point, fns);
            return s;
        }
        case ExprKind::Pow: {
            double b = eval_numeric(e->base, point, fns);
            if (e->expo < 0 && std::fabs(b) < 1e-250)
                throw LredError("NumericDomain", "division by a value too close to zero");
            double r = 1, bb = b;
            long k = e->expo < 0 ? -e->expo : e->expo;
            while (k) {
                if (k & 1) r *= bb;
                bb *= bb;
                k >>= 1;
            }
            return e->expo < 0 ? 1.0 / r : r;
        }
        case ExprKind::Fn: {
            std::vector<double> args;
            args.reserve(e->kids.size());
            for (const auto& a : e->kids) args.push_back(eval_numeric(a, point, fns));
            return fns.call(e->fn, e->deriv, args);
        }
    }
    throw LredError("InternalError", "unreachable expr kind");
}

}  // namespace lred
