#pragma once
// shared helpers for the test suites: deterministic rng and random expression
// generation used by the property checks

#include <cstdint>
#include <vector>

#include "lred/expr.hpp"

namespace testutil {

struct Rng {
    uint64_t s;
    explicit Rng(uint64_t seed) : s(seed) {}
    uint64_t next() {
        // splitmix64
        s += 0x9e3779b97f4a7c15ULL;
        uint64_t z = s;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }
    int range(int lo, int hi) {  // inclusive
        return lo + static_cast<int>(next() % static_cast<uint64_t>(hi - lo + 1));
    }
    double uniform(double lo, double hi) {
        return lo + (hi - lo) * (static_cast<double>(next() >> 11) / 9007199254740992.0);
    }
};

// random rational-fragment expression over the given symbols
inline lred::Expr random_expr(Rng& rng, const std::vector<int>& syms, int depth) {
    using namespace lred;
    if (depth <= 0 || rng.range(0, 4) == 0) {
        if (rng.range(0, 2) == 0) return eint(rng.range(-4, 4));
        return esym(syms[static_cast<size_t>(rng.range(0, static_cast<int>(syms.size()) - 1))]);
    }
    switch (rng.range(0, 4)) {
        case 0:
            return eadd({random_expr(rng, syms, depth - 1), random_expr(rng, syms, depth - 1)});
        case 1:
            return emul({random_expr(rng, syms, depth - 1), random_expr(rng, syms, depth - 1)});
        case 2:
            return esub(random_expr(rng, syms, depth - 1), random_expr(rng, syms, depth - 1));
        case 3:
            return epow(random_expr(rng, syms, depth - 1), rng.range(1, 3));
        default:
            return ediv(random_expr(rng, syms, depth - 1),
                        eadd({random_expr(rng, syms, depth - 1), eint(rng.range(1, 5))}));
    }
}

}  // namespace testutil
