#pragma once
// Core symbolic types: symbols, opaque functions, expression trees, contexts.
//
// Exprs are immutable trees shared by pointer.  A Context owns the symbol and
// function tables plus the atom interning table used by the canonical form
// (an "atom" is a symbol or an opaque-function application, the variables of
// the polynomial layer).

#include <boost/multiprecision/cpp_int.hpp>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace lred {

using Int = boost::multiprecision::cpp_int;
using Rat = boost::multiprecision::cpp_rational;

struct LredError : std::runtime_error {
    std::string code;
    LredError(std::string c, const std::string& msg)
        : std::runtime_error(c + ": " + msg), code(std::move(c)) {}
};

enum class SymKind { Base, Fiber, Jet, ReducedFiber, ReducedJet, Parameter, Constant };

std::string kind_name(SymKind k);

struct Symbol {
    int id = -1;
    std::string name;
    SymKind kind = SymKind::Constant;
    // jet metadata: the fiber symbol this is a jet of, and the multi-index
    // (base symbol id -> differentiation count)
    int jet_of = -1;
    std::map<int, int> multi;
};

struct OpaqueFn {
    int id = -1;
    std::string name;
    std::vector<int> args;  // declared argument symbol ids (display + shorthand)
};

enum class ExprKind { Num, Sym, Add, Mul, Pow, Fn };

struct ExprNode;
using Expr = std::shared_ptr<const ExprNode>;

struct ExprNode {
    ExprKind kind;
    Rat value;               // Num
    int sym = -1;            // Sym
    std::vector<Expr> kids;  // Add/Mul factors, Fn arguments
    Expr base;               // Pow
    long expo = 0;           // Pow (integer, may be negative)
    int fn = -1;             // Fn
    std::vector<int> deriv;  // Fn: per-argument derivative counts
};

// ---- node builders (raw trees, no canonicalization) ----
Expr enum_(const Rat& v);
Expr esym(int id);
Expr eadd(std::vector<Expr> kids);
Expr emul(std::vector<Expr> kids);
Expr epow(Expr base, long k);
Expr efn(int fn, std::vector<int> deriv, std::vector<Expr> args);

inline Expr eint(long v) { return enum_(Rat(v)); }
Expr eneg(const Expr& e);
Expr esub(const Expr& a, const Expr& b);
Expr ediv(const Expr& a, const Expr& b);

// total order on trees (structural); 0 = equal
int expr_cmp(const Expr& a, const Expr& b);
bool is_zero_node(const Expr& e);     // literal 0 (not a zero test)
bool is_one_node(const Expr& e);

struct Context {
    std::vector<Symbol> symbols;
    std::map<std::string, int> sym_by_name;
    std::vector<OpaqueFn> fns;
    std::map<std::string, int> fn_by_name;

    // atom interning: atom id -> defining Expr (Sym or Fn node with canonical args)
    std::vector<Expr> atoms;

    int declare(const std::string& name, SymKind kind);
    int declare_jet(const std::string& name, int fiber, const std::map<int, int>& multi);
    int declare_fn(const std::string& name, const std::vector<int>& arg_syms);

    int find_symbol(const std::string& name) const;   // -1 if absent
    int find_fn(const std::string& name) const;

    const Symbol& sym(int id) const { return symbols.at(static_cast<size_t>(id)); }
    const OpaqueFn& fn(int id) const { return fns.at(static_cast<size_t>(id)); }

    // interns a Sym node or a Fn node whose arguments are already canonical
    int intern_atom(const Expr& a);
    const Expr& atom(int v) const { return atoms.at(static_cast<size_t>(v)); }
};

// free symbols of a tree (including symbols inside opaque-function arguments)
void collect_symbols(const Expr& e, std::vector<bool>& seen);
std::vector<int> free_symbols(const Expr& e, const Context& ctx);
bool contains_symbol(const Expr& e, int sym);

// rewrite rule: atom^power -> rhs on the constraint variety
struct RewriteRule {
    Expr atom;   // Sym node or Fn node
    int power = 1;
    Expr rhs;
    bool dependent = false;  // ruled symbol is a chart function of the rhs symbols
};

}  // namespace lred
