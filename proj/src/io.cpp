#include "lred/io.hpp"

#include <cctype>
#include <sstream>

#include "lred/canonical.hpp"

namespace lred {

// ---------------- printer ----------------

namespace {

// precedence levels: 1 sum, 2 product, 3 power-base/exponent operand
std::string pr(const Expr& e, int prec, const Context& ctx);

std::string rat_str(const Rat& v) {
    std::ostringstream os;
    os << numerator(v);
    if (denominator(v) != 1) os << "/" << denominator(v);
    return os.str();
}

std::string fn_str(const Expr& e, const Context& ctx) {
    const OpaqueFn& f = ctx.fn(e->fn);
    bool declared_args = e->kids.size() == f.args.size();
    if (declared_args)
        for (size_t i = 0; i < e->kids.size(); ++i)
            if (!(e->kids[i]->kind == ExprKind::Sym && e->kids[i]->sym == f.args[i]))
                declared_args = false;
    bool has_deriv = false;
    for (int d : e->deriv)
        if (d) has_deriv = true;
    std::string args;
    if (!declared_args) {
        args = "(";
        for (size_t i = 0; i < e->kids.size(); ++i) {
            if (i) args += ", ";
            args += pr(e->kids[i], 1, ctx);
        }
        args += ")";
    }
    if (!has_deriv) return declared_args ? f.name : f.name + args;
    // shorthand f_xy when the suffix is unambiguous against declared arg names
    std::string suffix;
    for (size_t i = 0; i < e->deriv.size(); ++i)
        for (int d = 0; d < e->deriv[i]; ++d) suffix += ctx.sym(f.args[i]).name;
    if (declared_args) return f.name + "_" + suffix;
    std::string head = "D(" + f.name;
    for (size_t i = 0; i < e->deriv.size(); ++i)
        for (int d = 0; d < e->deriv[i]; ++d) head += ", " + ctx.sym(f.args[i]).name;
    head += ")";
    return head + args;
}

// splits a product into sign, numerator factors, denominator factors
struct ProdParts {
    bool neg = false;
    std::vector<std::string> num, den;
};

void add_factor(const Expr& f, ProdParts& p, const Context& ctx) {
    if (f->kind == ExprKind::Num) {
        Rat v = f->value;
        if (v < 0) {
            p.neg = !p.neg;
            v = -v;
        }
        if (numerator(v) != 1 || denominator(v) == 1 || p.num.empty()) {
            std::ostringstream os;
            os << numerator(v);
            if (numerator(v) != 1 || denominator(v) == 1) p.num.push_back(os.str());
        }
        if (denominator(v) != 1) {
            std::ostringstream os;
            os << denominator(v);
            p.den.push_back(os.str());
        }
        return;
    }
    if (f->kind == ExprKind::Pow && f->expo < 0) {
        p.den.push_back(pr(epow(f->base, -f->expo), 2, ctx));
        return;
    }
    p.num.push_back(pr(f, 2, ctx));
}

std::string join(const std::vector<std::string>& v, const char* sep) {
    std::string s;
    for (size_t i = 0; i < v.size(); ++i) {
        if (i) s += sep;
        s += v[i];
    }
    return s;
}

std::string prod_str(const std::vector<Expr>& kids, const Context& ctx, bool& neg) {
    ProdParts p;
    for (const auto& k : kids) add_factor(k, p, ctx);
    neg = p.neg;
    std::string num = p.num.empty() ? "1" : join(p.num, "*");
    if (p.den.empty()) return num;
    std::string den = p.den.size() == 1 && p.den[0].find_first_of("*+- ") == std::string::npos
                          ? p.den[0]
                          : "(" + join(p.den, "*") + ")";
    return num + "/" + den;
}

std::string pr(const Expr& e, int prec, const Context& ctx) {
    switch (e->kind) {
        case ExprKind::Num: {
            std::string s = rat_str(e->value);
            bool paren = (e->value < 0 && prec >= 2) || (denominator(e->value) != 1 && prec >= 3);
            return paren ? "(" + s + ")" : s;
        }
        case ExprKind::Sym:
            return ctx.sym(e->sym).name;
        case ExprKind::Fn:
            return fn_str(e, ctx);
        case ExprKind::Add: {
            std::string s;
            for (size_t i = 0; i < e->kids.size(); ++i) {
                const Expr& t = e->kids[i];
                bool neg = false;
                std::string ts;
                if (t->kind == ExprKind::Mul) {
                    ts = prod_str(t->kids, ctx, neg);
                } else if (t->kind == ExprKind::Num && t->value < 0) {
                    neg = true;
                    ts = rat_str(-t->value);
                } else {
                    ts = pr(t, 2, ctx);
                }
                if (i == 0)
                    s += neg ? "-" + ts : ts;
                else
                    s += neg ? " - " + ts : " + " + ts;
            }
            return prec >= 2 ? "(" + s + ")" : s;
        }
        case ExprKind::Mul: {
            bool neg = false;
            std::string s = prod_str(e->kids, ctx, neg);
            if (neg) s = "-" + s;
            return (prec >= 3 || (neg && prec >= 2)) ? "(" + s + ")" : s;
        }
        case ExprKind::Pow: {
            if (e->expo < 0) {
                std::string s = "1/" + pr(epow(e->base, -e->expo), 3, ctx);
                return prec >= 3 ? "(" + s + ")" : s;
            }
            std::ostringstream os;
            os << pr(e->base, 3, ctx) << "^" << e->expo;
            return os.str();
        }
    }
    throw LredError("InternalError", "unreachable expr kind");
}

}  // namespace

std::string print(const Expr& e, const Context& ctx) { return pr(e, 1, ctx); }

// ---------------- parser ----------------

namespace {

struct Token {
    enum Kind { Num, Ident, Op, End } kind;
    std::string text;
    size_t pos;
};

struct Lexer {
    std::vector<Token> toks;
    size_t i = 0;
    explicit Lexer(const std::string& s) {
        size_t p = 0;
        while (p < s.size()) {
            char c = s[p];
            if (std::isspace(static_cast<unsigned char>(c))) {
                ++p;
                continue;
            }
            if (std::isdigit(static_cast<unsigned char>(c))) {
                size_t q = p;
                while (q < s.size() && std::isdigit(static_cast<unsigned char>(s[q]))) ++q;
                toks.push_back({Token::Num, s.substr(p, q - p), p});
                p = q;
                continue;
            }
            if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
                size_t q = p;
                while (q < s.size() && (std::isalnum(static_cast<unsigned char>(s[q])) || s[q] == '_')) ++q;
                toks.push_back({Token::Ident, s.substr(p, q - p), p});
                p = q;
                continue;
            }
            if (std::string("+-*/^(),").find(c) != std::string::npos) {
                toks.push_back({Token::Op, std::string(1, c), p});
                ++p;
                continue;
            }
            throw LredError("SyntaxError", "unexpected character '" + std::string(1, c) +
                                               "' at position " + std::to_string(p));
        }
        toks.push_back({Token::End, "", s.size()});
    }
    const Token& peek() const { return toks[i]; }
    Token next() { return toks[i++]; }
    bool accept(const std::string& op) {
        if (toks[i].kind == Token::Op && toks[i].text == op) {
            ++i;
            return true;
        }
        return false;
    }
    void expect(const std::string& op) {
        if (!accept(op))
            throw LredError("SyntaxError", "expected '" + op + "' at position " +
                                               std::to_string(toks[i].pos));
    }
};

struct Parser {
    Lexer lx;
    Context& ctx;
    Parser(const std::string& s, Context& c) : lx(s), ctx(c) {}

    Expr parse_expr() {
        Expr e = parse_term();
        while (true) {
            if (lx.accept("+"))
                e = eadd({e, parse_term()});
            else if (lx.accept("-"))
                e = esub(e, parse_term());
            else
                return e;
        }
    }

    Expr parse_term() {
        Expr e = parse_unary();
        while (true) {
            if (lx.accept("*"))
                e = emul({e, parse_unary()});
            else if (lx.accept("/"))
                e = ediv(e, parse_unary());
            else
                return e;
        }
    }

    Expr parse_unary() {
        if (lx.accept("-")) return eneg(parse_unary());
        return parse_power();
    }

    long parse_exponent() {
        bool paren = lx.accept("(");
        bool neg = lx.accept("-");
        const Token& t = lx.peek();
        if (t.kind != Token::Num)
            throw LredError("SyntaxError",
                            "integer exponent expected at position " + std::to_string(t.pos));
        long v = std::stol(lx.next().text);
        if (paren) lx.expect(")");
        return neg ? -v : v;
    }

    Expr parse_power() {
        Expr base = parse_atom();
        if (lx.accept("^")) return epow(base, parse_exponent());
        return base;
    }

    std::vector<Expr> parse_call() {
        std::vector<Expr> args;
        lx.expect("(");
        if (!lx.accept(")")) {
            args.push_back(parse_expr());
            while (lx.accept(",")) args.push_back(parse_expr());
            lx.expect(")");
        }
        return args;
    }

    Expr fn_application(int fnid, std::vector<int> deriv) {
        const OpaqueFn& f = ctx.fn(fnid);
        std::vector<Expr> args;
        if (lx.peek().kind == Token::Op && lx.peek().text == "(") {
            args = parse_call();
            if (args.size() != f.args.size())
                throw LredError("SyntaxError", "arity mismatch for " + f.name);
        } else {
            for (int a : f.args) args.push_back(esym(a));
        }
        return efn(fnid, std::move(deriv), std::move(args));
    }

    Expr parse_atom() {
        Token t = lx.next();
        if (t.kind == Token::Num) return eint(std::stol(t.text));
        if (t.kind == Token::Op && t.text == "(") {
            Expr e = parse_expr();
            lx.expect(")");
            return e;
        }
        if (t.kind != Token::Ident)
            throw LredError("SyntaxError", "unexpected token at position " + std::to_string(t.pos));
        // D(f, x, y, ...) derivative atoms
        if (t.text == "D" && lx.peek().kind == Token::Op && lx.peek().text == "(") {
            size_t save = lx.i;
            lx.next();  // consume '('
            if (lx.peek().kind == Token::Ident && ctx.find_fn(lx.peek().text) >= 0) {
                int fnid = ctx.find_fn(lx.next().text);
                const OpaqueFn& f = ctx.fn(fnid);
                std::vector<int> deriv(f.args.size(), 0);
                while (lx.accept(",")) {
                    const Token& a = lx.peek();
                    if (a.kind != Token::Ident)
                        throw LredError("SyntaxError", "argument name expected in D(...)");
                    int sid = ctx.find_symbol(lx.next().text);
                    bool found = false;
                    for (size_t i = 0; i < f.args.size(); ++i)
                        if (f.args[i] == sid) {
                            deriv[i] += 1;
                            found = true;
                        }
                    if (!found)
                        throw LredError("SyntaxError",
                                        "D(...) argument is not a declared argument of " + f.name);
                }
                lx.expect(")");
                return fn_application(fnid, std::move(deriv));
            }
            lx.i = save;  // a plain identifier named D
        }
        int sid = ctx.find_symbol(t.text);
        if (sid >= 0) return esym(sid);
        int fnid = ctx.find_fn(t.text);
        if (fnid >= 0) return fn_application(fnid, std::vector<int>(ctx.fn(fnid).args.size(), 0));
        // shorthand f_xy
        size_t us = t.text.find('_');
        if (us != std::string::npos) {
            std::string head = t.text.substr(0, us), suffix = t.text.substr(us + 1);
            int fid = ctx.find_fn(head);
            if (fid >= 0) {
                const OpaqueFn& f = ctx.fn(fid);
                std::vector<int> deriv(f.args.size(), 0);
                size_t p = 0;
                while (p < suffix.size()) {
                    // greedy longest declared-argument-name match
                    size_t best = 0;
                    int slot = -1;
                    for (size_t i = 0; i < f.args.size(); ++i) {
                        const std::string& an = ctx.sym(f.args[i]).name;
                        if (an.size() > best && suffix.compare(p, an.size(), an) == 0) {
                            best = an.size();
                            slot = static_cast<int>(i);
                        }
                    }
                    if (slot < 0)
                        throw LredError("UnknownSymbol", t.text);
                    deriv[static_cast<size_t>(slot)] += 1;
                    p += best;
                }
                return fn_application(fid, std::move(deriv));
            }
        }
        throw LredError("UnknownSymbol", t.text);
    }
};

}  // namespace

Expr parse(const std::string& text, Context& ctx) {
    Parser p(text, ctx);
    Expr e = p.parse_expr();
    if (p.lx.peek().kind != Token::End)
        throw LredError("SyntaxError",
                        "trailing input at position " + std::to_string(p.lx.peek().pos));
    return simplify(e, ctx);
}

}  // namespace lred
