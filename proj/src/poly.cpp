#include "lred/poly.hpp"

#include <algorithm>
#include <map>

namespace lred {

int Mono::deg() const {
    int d = 0;
    for (auto& [v, e] : f) d += e;
    return d;
}

int Mono::deg_in(int var) const {
    for (auto& [v, e] : f)
        if (v == var) return e;
    return 0;
}

bool mono_eq(const Mono& a, const Mono& b) { return a.f == b.f; }

bool mono_gl_greater(const Mono& a, const Mono& b) {
    int da = a.deg(), db = b.deg();
    if (da != db) return da > db;
    // lex: smaller atom id is more significant, larger exponent wins
    size_t i = 0, j = 0;
    while (i < a.f.size() && j < b.f.size()) {
        if (a.f[i].first != b.f[j].first) return a.f[i].first < b.f[j].first;
        if (a.f[i].second != b.f[j].second) return a.f[i].second > b.f[j].second;
        ++i;
        ++j;
    }
    return i < a.f.size();
}

Mono mono_mul(const Mono& a, const Mono& b) {
    Mono r;
    size_t i = 0, j = 0;
    while (i < a.f.size() || j < b.f.size()) {
        if (j == b.f.size() || (i < a.f.size() && a.f[i].first < b.f[j].first))
            r.f.push_back(a.f[i++]);
        else if (i == a.f.size() || b.f[j].first < a.f[i].first)
            r.f.push_back(b.f[j++]);
        else {
            r.f.emplace_back(a.f[i].first, a.f[i].second + b.f[j].second);
            ++i;
            ++j;
        }
    }
    return r;
}

bool mono_divides(const Mono& a, const Mono& b) {
    size_t j = 0;
    for (auto& [v, e] : a.f) {
        while (j < b.f.size() && b.f[j].first < v) ++j;
        if (j == b.f.size() || b.f[j].first != v || b.f[j].second < e) return false;
    }
    return true;
}

Mono mono_div(const Mono& b, const Mono& a) {
    // b / a
    Mono r;
    size_t i = 0;
    for (auto& [v, e] : b.f) {
        int sub = 0;
        while (i < a.f.size() && a.f[i].first < v) ++i;
        if (i < a.f.size() && a.f[i].first == v) sub = a.f[i].second;
        if (e - sub > 0) r.f.emplace_back(v, e - sub);
        if (e - sub < 0) throw LredError("InternalError", "monomial division not exact");
    }
    return r;
}

bool Poly::is_constant() const {
    return t.empty() || (t.size() == 1 && t[0].first.is_one());
}

int Poly::deg() const {
    int d = 0;
    for (auto& [m, c] : t) d = std::max(d, m.deg());
    return d;
}

int Poly::deg_in(int var) const {
    int d = 0;
    for (auto& [m, c] : t) d = std::max(d, m.deg_in(var));
    return d;
}

bool Poly::has_var(int var) const {
    for (auto& [m, c] : t)
        if (m.deg_in(var) > 0) return true;
    return false;
}

Poly Poly::constant(const Rat& c) {
    Poly p;
    if (c != 0) p.t.emplace_back(Mono{}, c);
    return p;
}

Poly Poly::variable(int var) {
    Poly p;
    Mono m;
    m.f.emplace_back(var, 1);
    p.t.emplace_back(m, Rat(1));
    return p;
}

Poly padd(const Poly& a, const Poly& b) {
    Poly r;
    size_t i = 0, j = 0;
    while (i < a.t.size() || j < b.t.size()) {
        if (j == b.t.size() || (i < a.t.size() && mono_gl_greater(a.t[i].first, b.t[j].first)))
            r.t.push_back(a.t[i++]);
        else if (i == a.t.size() || mono_gl_greater(b.t[j].first, a.t[i].first))
            r.t.push_back(b.t[j++]);
        else {
            Rat c = a.t[i].second + b.t[j].second;
            if (c != 0) r.t.emplace_back(a.t[i].first, c);
            ++i;
            ++j;
        }
    }
    return r;
}

Poly pneg(const Poly& a) {
    Poly r = a;
    for (auto& [m, c] : r.t) c = -c;
    return r;
}

Poly psub(const Poly& a, const Poly& b) { return padd(a, pneg(b)); }

struct MonoLessDesc {
    bool operator()(const Mono& a, const Mono& b) const { return mono_gl_greater(a, b); }
};

Poly pmul(const Poly& a, const Poly& b) {
    std::map<Mono, Rat, MonoLessDesc> acc;
    for (auto& [ma, ca] : a.t)
        for (auto& [mb, cb] : b.t) {
            Mono m = mono_mul(ma, mb);
            auto [it, fresh] = acc.emplace(m, ca * cb);
            if (!fresh) it->second += ca * cb;
        }
    Poly r;
    for (auto& [m, c] : acc)
        if (c != 0) r.t.emplace_back(m, c);
    return r;
}

Poly pmul(const Poly& a, const Rat& c) {
    if (c == 0) return Poly::zero();
    Poly r = a;
    for (auto& [m, cc] : r.t) cc *= c;
    return r;
}

Poly ppow(const Poly& a, int k) {
    Poly r = Poly::constant(1);
    Poly base = a;
    int e = k;
    while (e > 0) {
        if (e & 1) r = pmul(r, base);
        base = pmul(base, base);
        e >>= 1;
    }
    return r;
}

Poly pderiv(const Poly& a, int var) {
    Poly r;
    for (auto& [m, c] : a.t) {
        int e = m.deg_in(var);
        if (e == 0) continue;
        Mono m2;
        for (auto& [v, ee] : m.f) {
            int ne = (v == var) ? ee - 1 : ee;
            if (ne > 0) m2.f.emplace_back(v, ne);
        }
        r = padd(r, [&] {
            Poly p;
            p.t.emplace_back(m2, c * e);
            return p;
        }());
    }
    return r;
}

bool poly_eq(const Poly& a, const Poly& b) {
    if (a.t.size() != b.t.size()) return false;
    for (size_t i = 0; i < a.t.size(); ++i)
        if (!mono_eq(a.t[i].first, b.t[i].first) || a.t[i].second != b.t[i].second) return false;
    return true;
}

std::vector<int> poly_vars(const Poly& a) {
    std::vector<int> vs;
    for (auto& [m, c] : a.t)
        for (auto& [v, e] : m.f)
            if (std::find(vs.begin(), vs.end(), v) == vs.end()) vs.push_back(v);
    std::sort(vs.begin(), vs.end());
    return vs;
}

Poly pdiv_exact(const Poly& a, const Poly& b) {
    if (b.is_zero()) throw LredError("InternalError", "division by zero polynomial");
    Poly rem = a, q;
    while (!rem.is_zero()) {
        const auto& lr = rem.t.front();
        const auto& lb = b.t.front();
        if (!mono_divides(lb.first, lr.first))
            throw LredError("InternalError", "polynomial division not exact");
        Poly term;
        term.t.emplace_back(mono_div(lr.first, lb.first), lr.second / lb.second);
        q = padd(q, term);
        rem = psub(rem, pmul(term, b));
    }
    return q;
}

// ---- gcd ----

namespace {

// rational content: gcd of numerators over lcm of denominators (positive)
Rat rat_content(const Poly& p) {
    Int gn = 0, ld = 1;
    for (auto& [m, c] : p.t) {
        Int n = boost::multiprecision::abs(numerator(c));
        Int d = denominator(c);
        gn = gn == 0 ? n : gcd(gn, n);
        ld = ld / gcd(ld, d) * d;
    }
    if (gn == 0) return Rat(1);
    return Rat(gn, ld);
}

// scale to integer coefficients with overall content 1; sign of the leading
// (graded-lex greatest) coefficient made positive
Poly normalize_unit(const Poly& p) {
    if (p.is_zero()) return p;
    Rat c = rat_content(p);
    if (p.t.front().second < 0) c = -c;
    Poly r = p;
    for (auto& [m, cc] : r.t) cc /= c;
    return r;
}

// univariate view in main var: dense coefficient vector (degree ascending)
std::vector<Poly> to_uni(const Poly& p, int x) {
    std::vector<Poly> co(static_cast<size_t>(p.deg_in(x)) + 1);
    for (auto& [m, c] : p.t) {
        int e = m.deg_in(x);
        Mono m2;
        for (auto& [v, ee] : m.f)
            if (v != x) m2.f.emplace_back(v, ee);
        Poly term;
        term.t.emplace_back(m2, c);
        co[static_cast<size_t>(e)] = padd(co[static_cast<size_t>(e)], term);
    }
    return co;
}

Poly from_uni(const std::vector<Poly>& co, int x) {
    Poly r;
    for (size_t e = 0; e < co.size(); ++e) {
        Poly xe = e == 0 ? Poly::constant(1) : ppow(Poly::variable(x), static_cast<int>(e));
        r = padd(r, pmul(co[e], xe));
    }
    return r;
}

int udeg(const std::vector<Poly>& a) {
    for (int i = static_cast<int>(a.size()) - 1; i >= 0; --i)
        if (!a[static_cast<size_t>(i)].is_zero()) return i;
    return -1;
}

// pseudo-remainder of univariate polys with Poly coefficients
std::vector<Poly> uprem(std::vector<Poly> a, const std::vector<Poly>& b) {
    int db = udeg(b);
    const Poly& lb = b[static_cast<size_t>(db)];
    int da = udeg(a);
    while (da >= db && da >= 0) {
        Poly la = a[static_cast<size_t>(da)];
        // a = lb*a - la * x^(da-db) * b
        for (auto& c : a) c = pmul(c, lb);
        for (int i = 0; i <= db; ++i) {
            size_t k = static_cast<size_t>(da - db + i);
            a[k] = psub(a[k], pmul(la, b[static_cast<size_t>(i)]));
        }
        int nda = udeg(a);
        if (nda == da) throw LredError("InternalError", "pseudo-division failed to reduce degree");
        da = nda;
    }
    a.resize(static_cast<size_t>(std::max(da, 0)) + 1);
    if (da < 0) a.clear();
    return a;
}

Poly uni_content(const std::vector<Poly>& a) {
    Poly g;
    for (auto& c : a) g = pgcd(g, c);
    return g;
}

// ---- fast coprimality probe (modular univariate images) ----

uint64_t mod_pow(uint64_t b, uint64_t e, uint64_t p) {
    uint64_t r = 1;
    b %= p;
    while (e) {
        if (e & 1) r = r * b % p;
        b = b * b % p;
        e >>= 1;
    }
    return r;
}

// coefficient image mod p; false if a denominator vanishes mod p
bool rat_mod(const Rat& c, uint64_t p, uint64_t& out) {
    Int n = numerator(c) % Int(p);
    Int d = denominator(c) % Int(p);
    if (d == 0) return false;
    uint64_t nn = static_cast<uint64_t>(n < 0 ? n + Int(p) : n);
    uint64_t dd = static_cast<uint64_t>(d);
    out = nn * mod_pow(dd, p - 2, p) % p;
    return true;
}

// univariate image of poly in var v, other vars evaluated at small ints
bool uni_image(const Poly& a, int v, uint64_t p, uint64_t salt, std::vector<uint64_t>& img) {
    img.assign(static_cast<size_t>(a.deg_in(v)) + 1, 0);
    for (auto& [m, c] : a.t) {
        uint64_t cv;
        if (!rat_mod(c, p, cv)) return false;
        for (auto& [var, e] : m.f) {
            if (var == v) continue;
            uint64_t pt = 2 + (static_cast<uint64_t>(var) * 37 + salt * 101) % 61;
            cv = cv * mod_pow(pt, static_cast<uint64_t>(e), p) % p;
        }
        size_t d = static_cast<size_t>(m.deg_in(v));
        img[d] = (img[d] + cv) % p;
    }
    // degree must not drop (unlucky evaluation otherwise)
    return img.back() != 0;
}

int uni_gcd_deg(std::vector<uint64_t> a, std::vector<uint64_t> b, uint64_t p) {
    auto deg = [](const std::vector<uint64_t>& x) {
        for (int i = static_cast<int>(x.size()) - 1; i >= 0; --i)
            if (x[static_cast<size_t>(i)]) return i;
        return -1;
    };
    while (true) {
        int db = deg(b);
        if (db < 0) return deg(a);
        int da = deg(a);
        if (da < db) {
            std::swap(a, b);
            continue;
        }
        uint64_t inv = mod_pow(b[static_cast<size_t>(db)], p - 2, p);
        uint64_t f = a[static_cast<size_t>(da)] % p * inv % p;
        for (int i = 0; i <= db; ++i) {
            size_t k = static_cast<size_t>(da - db + i);
            a[k] = (a[k] + p - f * b[static_cast<size_t>(i)] % p) % p;
        }
        if (deg(a) == da) a[static_cast<size_t>(da)] = 0;
    }
}

// true only if gcd(a,b) is provably constant
bool coprime_probe(const Poly& a, const Poly& b) {
    std::vector<int> va = poly_vars(a), vb = poly_vars(b), common;
    for (int v : va)
        if (std::find(vb.begin(), vb.end(), v) != vb.end()) common.push_back(v);
    if (common.empty()) return true;
    const uint64_t primes[3] = {2147483647ULL, 2147483629ULL, 2147483587ULL};
    for (int v : common) {
        bool proven = false;
        for (uint64_t trial = 0; trial < 6 && !proven; ++trial) {
            uint64_t p = primes[trial % 3];
            std::vector<uint64_t> ia, ib;
            if (!uni_image(a, v, p, trial, ia)) continue;
            if (!uni_image(b, v, p, trial, ib)) continue;
            int d = uni_gcd_deg(ia, ib, p);
            if (d > 0) return false;  // plausibly nontrivial: let the PRS decide
            proven = true;
        }
        if (!proven) return false;
    }
    return true;
}

}  // namespace

Poly pgcd(const Poly& a, const Poly& b) {
    if (a.is_zero()) return normalize_unit(b);
    if (b.is_zero()) return normalize_unit(a);
    if (a.is_constant() || b.is_constant()) return Poly::constant(1);
    if (coprime_probe(a, b)) return Poly::constant(1);
    // main variable: lowest atom id present in either
    std::vector<int> va = poly_vars(a), vb = poly_vars(b);
    int x = std::min(va.front(), vb.front());
    if (!a.has_var(x) || !b.has_var(x)) {
        // x appears in only one: gcd divides the other's content w.r.t. ... fall
        // back: gcd(content-free part) — a poly free of x contributes via content
        const Poly& with = a.has_var(x) ? a : b;
        const Poly& without = a.has_var(x) ? b : a;
        return pgcd(uni_content(to_uni(with, x)), without);
    }
    auto ua = to_uni(a, x), ub = to_uni(b, x);
    Poly ca = uni_content(ua), cb = uni_content(ub);
    Poly cg = pgcd(ca, cb);
    for (auto& c : ua) c = ca.is_zero() ? c : pdiv_exact(c, ca);
    for (auto& c : ub) c = cb.is_zero() ? c : pdiv_exact(c, cb);
    // primitive PRS
    if (udeg(ua) < udeg(ub)) std::swap(ua, ub);
    while (true) {
        if (udeg(ub) < 0) break;
        auto r = uprem(ua, ub);
        if (udeg(r) < 0) {
            ua = ub;
            ub = r;
            break;
        }
        Poly cr = uni_content(r);
        for (auto& c : r) c = pdiv_exact(c, cr);
        ua = ub;
        ub = r;
    }
    if (udeg(ua) == 0) return normalize_unit(cg);
    Poly prim = from_uni(ua, x);
    Poly cp = uni_content(to_uni(prim, x));
    prim = pdiv_exact(prim, cp);
    return normalize_unit(pmul(cg, prim));
}

}  // namespace lred
