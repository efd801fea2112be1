#include "lred/probe.hpp"

#include <cmath>

namespace lred {

namespace {

uint64_t mix(uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

double hash_uniform(uint64_t seed, uint64_t salt) {
    uint64_t z = mix(seed ^ mix(salt));
    return static_cast<double>(z >> 11) / 9007199254740992.0;
}

}  // namespace

Probe::Probe(const std::vector<RewriteRule>& rules, const std::vector<int>& positive, Context& c,
             uint64_t seed, double scale)
    : ctx(c), seed_(seed), scale_(scale) {
    std::vector<int> ruled;
    for (const auto& r : rules) {
        int a = ctx.intern_atom(r.atom);
        ruled.push_back(a);
        pending_.insert(a);
    }
    // resolve ruled atoms from their rule right-hand sides; iterate to settle
    // chains where one rule's rhs mentions another ruled atom
    for (size_t pass = 0; pass <= rules.size(); ++pass) {
        bool progress = false;
        for (size_t i = 0; i < rules.size(); ++i) {
            int a = ruled[i];
            if (values_.count(a)) continue;
            double rhs;
            try {
                rhs = eval(rules[i].rhs);
            } catch (const LredError&) {
                continue;  // depends on a not-yet-resolved ruled atom
            }
            int k = rules[i].power;
            double v;
            if (k % 2 == 0) {
                if (rhs < 0)
                    throw LredError("ChartDegenerate",
                                    "no real root for a ruled symbol at this draw");
                v = std::pow(rhs, 1.0 / k);
            } else {
                v = (rhs < 0 ? -1.0 : 1.0) * std::pow(std::fabs(rhs), 1.0 / k);
            }
            (void)positive;  // even roots are taken positive, matching the assumptions
            values_[a] = v;
            pending_.erase(a);
            progress = true;
        }
        if (!progress) break;
    }
    for (size_t i = 0; i < rules.size(); ++i)
        if (!values_.count(ruled[i]))
            throw LredError("ChartDegenerate", "cyclic rule dependencies in the chart");
}

double Probe::fresh(int atom) const {
    return scale_ * (0.6 + 1.5 * hash_uniform(seed_, static_cast<uint64_t>(atom) + 1));
}

double Probe::atom_value(int atom) {
    auto it = values_.find(atom);
    if (it != values_.end()) return it->second;
    if (pending_.count(atom))
        throw LredError("NumericDomain", "ruled atom not yet resolved");
    double v = fresh(atom);
    values_[atom] = v;
    return v;
}

double Probe::eval(const Expr& e) {
    switch (e->kind) {
        case ExprKind::Num:
            return static_cast<double>(e->value);
        case ExprKind::Sym:
            return atom_value(ctx.intern_atom(esym(e->sym)));
        case ExprKind::Add: {
            double s = 0;
            for (const auto& k : e->kids) s += eval(k);
            return s;
        }
        case ExprKind::Mul: {
            double s = 1;
            for (const auto& k : e->kids) s *= eval(k);
            return s;
        }
        case ExprKind::Pow: {
            double b = eval(e->base);
            if (e->expo < 0 && std::fabs(b) < 1e-250)
                throw LredError("NumericDomain", "near-zero base raised to a negative power");
            return std::pow(b, static_cast<double>(e->expo));
        }
        case ExprKind::Fn: {
            std::vector<Expr> kids(e->kids);
            return atom_value(ctx.intern_atom(efn(e->fn, e->deriv, std::move(kids))));
        }
    }
    throw LredError("InternalError", "unreachable expr kind");
}

Probe sample_point(const std::vector<RewriteRule>& rules, const std::vector<int>& positive,
                   Context& ctx, uint64_t seed, int max_draws) {
    for (int d = 0; d < max_draws; ++d) {
        // later draws shrink the box toward zero so that charts constraining
        // coordinates to a bounded region (spheres and the like) get hit
        double scale = 1.0 / (1.0 + d / 4);
        try {
            return Probe(rules, positive, ctx, seed + static_cast<uint64_t>(d) * 0x51ed2701ULL,
                         scale);
        } catch (const LredError& e) {
            if (e.code != "ChartDegenerate" && e.code != "NumericDomain") throw;
        }
    }
    throw LredError("ChartDegenerate", "no valid sample point found");
}

int numeric_rank(std::vector<std::vector<double>> m, double tol) {
    if (m.empty() || m[0].empty()) return 0;
    size_t rows = m.size(), cols = m[0].size();
    double scale = 0;
    for (auto& row : m)
        for (double v : row) scale = std::max(scale, std::fabs(v));
    if (scale == 0) return 0;
    double cut = tol * scale;
    size_t r = 0;
    for (size_t c = 0; c < cols && r < rows; ++c) {
        size_t best = r;
        for (size_t i = r + 1; i < rows; ++i)
            if (std::fabs(m[i][c]) > std::fabs(m[best][c])) best = i;
        if (std::fabs(m[best][c]) <= cut) continue;
        std::swap(m[best], m[r]);
        for (size_t i = r + 1; i < rows; ++i) {
            double f = m[i][c] / m[r][c];
            for (size_t j = c; j < cols; ++j) m[i][j] -= f * m[r][j];
        }
        ++r;
    }
    return static_cast<int>(r);
}

}  // namespace lred
