#include "lred/expr.hpp"

#include <algorithm>

namespace lred {

std::string kind_name(SymKind k) {
    switch (k) {
        case SymKind::Base: return "base";
        case SymKind::Fiber: return "fiber";
        case SymKind::Jet: return "jet";
        case SymKind::ReducedFiber: return "reduced-fiber";
        case SymKind::ReducedJet: return "reduced-jet";
        case SymKind::Parameter: return "parameter";
        case SymKind::Constant: return "constant";
    }
    return "?";
}

Expr enum_(const Rat& v) {
    auto n = std::make_shared<ExprNode>();
    n->kind = ExprKind::Num;
    n->value = v;
    return n;
}

Expr esym(int id) {
    auto n = std::make_shared<ExprNode>();
    n->kind = ExprKind::Sym;
    n->sym = id;
    return n;
}

Expr eadd(std::vector<Expr> kids) {
    if (kids.empty()) return eint(0);
    if (kids.size() == 1) return kids[0];
    auto n = std::make_shared<ExprNode>();
    n->kind = ExprKind::Add;
    n->kids = std::move(kids);
    return n;
}

Expr emul(std::vector<Expr> kids) {
    if (kids.empty()) return eint(1);
    if (kids.size() == 1) return kids[0];
    auto n = std::make_shared<ExprNode>();
    n->kind = ExprKind::Mul;
    n->kids = std::move(kids);
    return n;
}

Expr epow(Expr base, long k) {
    if (k == 1) return base;
    auto n = std::make_shared<ExprNode>();
    n->kind = ExprKind::Pow;
    n->base = std::move(base);
    n->expo = k;
    return n;
}

Expr efn(int fn, std::vector<int> deriv, std::vector<Expr> args) {
    auto n = std::make_shared<ExprNode>();
    n->kind = ExprKind::Fn;
    n->fn = fn;
    n->deriv = std::move(deriv);
    n->kids = std::move(args);
    if (n->deriv.size() != n->kids.size())
        throw LredError("InternalError", "derivative multi-index arity mismatch");
    return n;
}

Expr eneg(const Expr& e) { return emul({eint(-1), e}); }
Expr esub(const Expr& a, const Expr& b) { return eadd({a, eneg(b)}); }
Expr ediv(const Expr& a, const Expr& b) { return emul({a, epow(b, -1)}); }

bool is_zero_node(const Expr& e) { return e->kind == ExprKind::Num && e->value == 0; }
bool is_one_node(const Expr& e) { return e->kind == ExprKind::Num && e->value == 1; }

int expr_cmp(const Expr& a, const Expr& b) {
    if (a.get() == b.get()) return 0;
    if (a->kind != b->kind) return a->kind < b->kind ? -1 : 1;
    switch (a->kind) {
        case ExprKind::Num:
            return a->value == b->value ? 0 : (a->value < b->value ? -1 : 1);
        case ExprKind::Sym:
            return a->sym == b->sym ? 0 : (a->sym < b->sym ? -1 : 1);
        case ExprKind::Pow: {
            if (a->expo != b->expo) return a->expo < b->expo ? -1 : 1;
            return expr_cmp(a->base, b->base);
        }
        case ExprKind::Fn: {
            if (a->fn != b->fn) return a->fn < b->fn ? -1 : 1;
            if (a->deriv != b->deriv) return a->deriv < b->deriv ? -1 : 1;
            [[fallthrough]];
        }
        case ExprKind::Add:
        case ExprKind::Mul: {
            if (a->kids.size() != b->kids.size())
                return a->kids.size() < b->kids.size() ? -1 : 1;
            for (size_t i = 0; i < a->kids.size(); ++i)
                if (int c = expr_cmp(a->kids[i], b->kids[i])) return c;
            return 0;
        }
    }
    return 0;
}

int Context::declare(const std::string& name, SymKind kind) {
    if (sym_by_name.count(name))
        throw LredError("SchemaError", "symbol redeclared: " + name);
    if (fn_by_name.count(name))
        throw LredError("SchemaError", "name collides with a function: " + name);
    Symbol s;
    s.id = static_cast<int>(symbols.size());
    s.name = name;
    s.kind = kind;
    symbols.push_back(s);
    sym_by_name[name] = s.id;
    // symbols occupy the leading atom slots in declaration order, so the
    // graded-lex order follows the declared symbol order
    int v = intern_atom(esym(s.id));
    (void)v;
    return s.id;
}

int Context::declare_jet(const std::string& name, int fiber, const std::map<int, int>& multi) {
    int id = declare(name, SymKind::Jet);
    symbols[static_cast<size_t>(id)].jet_of = fiber;
    symbols[static_cast<size_t>(id)].multi = multi;
    return id;
}

int Context::declare_fn(const std::string& name, const std::vector<int>& arg_syms) {
    if (fn_by_name.count(name))
        throw LredError("SchemaError", "function redeclared: " + name);
    if (sym_by_name.count(name))
        throw LredError("SchemaError", "name collides with a symbol: " + name);
    OpaqueFn f;
    f.id = static_cast<int>(fns.size());
    f.name = name;
    f.args = arg_syms;
    fns.push_back(f);
    fn_by_name[name] = f.id;
    return f.id;
}

int Context::find_symbol(const std::string& name) const {
    auto it = sym_by_name.find(name);
    return it == sym_by_name.end() ? -1 : it->second;
}

int Context::find_fn(const std::string& name) const {
    auto it = fn_by_name.find(name);
    return it == fn_by_name.end() ? -1 : it->second;
}

int Context::intern_atom(const Expr& a) {
    for (size_t i = 0; i < atoms.size(); ++i)
        if (expr_cmp(atoms[i], a) == 0) return static_cast<int>(i);
    atoms.push_back(a);
    return static_cast<int>(atoms.size() - 1);
}

void collect_symbols(const Expr& e, std::vector<bool>& seen) {
    switch (e->kind) {
        case ExprKind::Num: return;
        case ExprKind::Sym:
            if (e->sym >= 0 && static_cast<size_t>(e->sym) < seen.size())
                seen[static_cast<size_t>(e->sym)] = true;
            return;
        case ExprKind::Pow:
            collect_symbols(e->base, seen);
            return;
        default:
            for (const auto& k : e->kids) collect_symbols(k, seen);
            return;
    }
}

std::vector<int> free_symbols(const Expr& e, const Context& ctx) {
    std::vector<bool> seen(ctx.symbols.size(), false);
    collect_symbols(e, seen);
    std::vector<int> out;
    for (size_t i = 0; i < seen.size(); ++i)
        if (seen[i]) out.push_back(static_cast<int>(i));
    return out;
}

bool contains_symbol(const Expr& e, int sym) {
    switch (e->kind) {
        case ExprKind::Num: return false;
        case ExprKind::Sym: return e->sym == sym;
        case ExprKind::Pow: return contains_symbol(e->base, sym);
        default:
            for (const auto& k : e->kids)
                if (contains_symbol(k, sym)) return true;
            return false;
    }
}

}  // namespace lred
