#include "folia/expr.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <string>

#include "folia/errors.hpp"

namespace folia {

namespace {

enum class Op : unsigned char {
    Num, X, Y, Neg, Add, Sub, Mul, Div, Pow, PowInt,
    Sin, Cos, Tanh, Sech, Exp, Ln,
};

struct Instr {
    Op op;
    int n = 0;
    double v = 0.0;
};

const char* function_name(Op op) {
    switch (op) {
        case Op::Sin: return "sin";
        case Op::Cos: return "cos";
        case Op::Tanh: return "tanh";
        case Op::Sech: return "sech";
        case Op::Exp: return "exp";
        case Op::Ln: return "ln";
        default: return "?";
    }
}

double sech(double v) {
    const double e = std::exp(-std::fabs(v));
    return 2.0 * e / (1.0 + e * e);
}

double ipow(double b, int n) {
    double r = 1.0;
    const bool inv = n < 0;
    unsigned m = static_cast<unsigned>(inv ? -n : n);
    double base = b;
    while (m) {
        if (m & 1U) r *= base;
        base *= base;
        m >>= 1U;
    }
    return inv ? 1.0 / r : r;
}

std::string format_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

struct Expr::Node {
    Op op;
    double value = 0.0;
    std::shared_ptr<const Node> a;
    std::shared_ptr<const Node> b;
};

struct Expr::Program {
    std::vector<Instr> code;
    int max_depth = 0;
};

namespace {

using NodePtr = std::shared_ptr<const Expr::Node>;

NodePtr make_node(Op op, NodePtr a = nullptr, NodePtr b = nullptr, double v = 0.0) {
    auto n = std::make_shared<Expr::Node>();
    n->op = op;
    n->a = std::move(a);
    n->b = std::move(b);
    n->value = v;
    return n;
}

void emit(const Expr::Node& n, std::vector<Instr>& out) {
    switch (n.op) {
        case Op::Num: out.push_back({Op::Num, 0, n.value}); return;
        case Op::X: out.push_back({Op::X}); return;
        case Op::Y: out.push_back({Op::Y}); return;
        case Op::Pow:
            if (n.b->op == Op::Num) {
                const double e = n.b->value;
                if (e == std::nearbyint(e) && std::fabs(e) <= 16.0) {
                    emit(*n.a, out);
                    out.push_back({Op::PowInt, static_cast<int>(e)});
                    return;
                }
            }
            emit(*n.a, out);
            emit(*n.b, out);
            out.push_back({Op::Pow});
            return;
        default:
            break;
    }
    if (n.a) emit(*n.a, out);
    if (n.b) emit(*n.b, out);
    out.push_back({n.op});
}

int stack_depth(const std::vector<Instr>& code) {
    int d = 0, m = 0;
    for (const auto& in : code) {
        switch (in.op) {
            case Op::Num: case Op::X: case Op::Y: ++d; break;
            case Op::Add: case Op::Sub: case Op::Mul: case Op::Div: case Op::Pow: --d; break;
            default: break;
        }
        if (d > m) m = d;
    }
    return m;
}

std::string print_node(const Expr::Node& n) {
    switch (n.op) {
        case Op::Num: return format_number(n.value);
        case Op::X: return "x";
        case Op::Y: return "y";
        case Op::Neg: return "(-" + print_node(*n.a) + ")";
        case Op::Add: return "(" + print_node(*n.a) + " + " + print_node(*n.b) + ")";
        case Op::Sub: return "(" + print_node(*n.a) + " - " + print_node(*n.b) + ")";
        case Op::Mul: return "(" + print_node(*n.a) + " * " + print_node(*n.b) + ")";
        case Op::Div: return "(" + print_node(*n.a) + " / " + print_node(*n.b) + ")";
        case Op::Pow: return "(" + print_node(*n.a) + " ^ " + print_node(*n.b) + ")";
        default: return std::string(function_name(n.op)) + "(" + print_node(*n.a) + ")";
    }
}

}  // namespace

class ExprParser {
public:
    ExprParser(std::string_view src) : s_(src) {}

    NodePtr expr() {
        NodePtr lhs = term();
        for (;;) {
            skip();
            if (peek('+')) { ++i_; lhs = make_node(Op::Add, lhs, term()); }
            else if (peek('-')) { ++i_; lhs = make_node(Op::Sub, lhs, term()); }
            else return lhs;
        }
    }

    void expect(char c) {
        skip();
        if (i_ >= s_.size()) throw SyntaxError(std::string("expected '") + c + "', found end of input", i_);
        if (s_[i_] != c) throw SyntaxError(std::string("expected '") + c + "'", i_);
        ++i_;
    }

    void expect_end() {
        skip();
        if (i_ != s_.size()) throw SyntaxError("unexpected trailing input", i_);
    }

private:
    NodePtr term() {
        NodePtr lhs = unary();
        for (;;) {
            skip();
            if (peek('*')) { ++i_; lhs = make_node(Op::Mul, lhs, unary()); }
            else if (peek('/')) { ++i_; lhs = make_node(Op::Div, lhs, unary()); }
            else return lhs;
        }
    }

    NodePtr unary() {
        skip();
        if (peek('-')) { ++i_; return make_node(Op::Neg, unary()); }
        if (peek('+')) { ++i_; return unary(); }
        return power();
    }

    NodePtr power() {
        NodePtr base = primary();
        skip();
        if (peek('^')) {
            ++i_;
            return make_node(Op::Pow, base, unary());
        }
        return base;
    }

    NodePtr primary() {
        skip();
        if (i_ >= s_.size()) throw SyntaxError("unexpected end of input", i_);
        const char c = s_[i_];
        if (c == '(') {
            ++i_;
            NodePtr e = expr();
            expect(')');
            return e;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return identifier();
        throw SyntaxError(std::string("unexpected character '") + c + "'", i_);
    }

    NodePtr number() {
        const std::size_t start = i_;
        while (i_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[i_]))) ++i_;
        if (i_ < s_.size() && s_[i_] == '.') {
            ++i_;
            while (i_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[i_]))) ++i_;
        }
        if (i_ < s_.size() && (s_[i_] == 'e' || s_[i_] == 'E')) {
            std::size_t j = i_ + 1;
            if (j < s_.size() && (s_[j] == '+' || s_[j] == '-')) ++j;
            if (j < s_.size() && std::isdigit(static_cast<unsigned char>(s_[j]))) {
                i_ = j;
                while (i_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[i_]))) ++i_;
            }
        }
        const std::string text(s_.substr(start, i_ - start));
        if (text == ".") throw SyntaxError("malformed number", start);
        return make_node(Op::Num, nullptr, nullptr, std::strtod(text.c_str(), nullptr));
    }

    NodePtr identifier() {
        const std::size_t start = i_;
        while (i_ < s_.size() &&
               (std::isalnum(static_cast<unsigned char>(s_[i_])) || s_[i_] == '_'))
            ++i_;
        const std::string_view name = s_.substr(start, i_ - start);
        if (name == "x") return make_node(Op::X);
        if (name == "y") return make_node(Op::Y);
        Op f;
        if (name == "sin") f = Op::Sin;
        else if (name == "cos") f = Op::Cos;
        else if (name == "tanh") f = Op::Tanh;
        else if (name == "sech") f = Op::Sech;
        else if (name == "exp") f = Op::Exp;
        else if (name == "ln") f = Op::Ln;
        else
            throw UnknownIdentifier("unknown identifier '" + std::string(name) + "' at offset " +
                                    std::to_string(start));
        expect('(');
        NodePtr arg = expr();
        expect(')');
        return make_node(f, arg);
    }

    void skip() {
        while (i_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[i_]))) ++i_;
    }
    bool peek(char c) const { return i_ < s_.size() && s_[i_] == c; }

    std::string_view s_;
    std::size_t i_ = 0;

    friend Expr;
    friend FieldExpr parse_field(std::string_view);

public:
    static Expr wrap(NodePtr root) { return Expr(std::move(root)); }
};

Expr::Expr() : Expr(make_node(Op::Num)) {}

Expr::Expr(std::shared_ptr<const Node> root) : root_(std::move(root)) {
    auto prog = std::make_shared<Program>();
    emit(*root_, prog->code);
    prog->max_depth = stack_depth(prog->code);
    program_ = std::move(prog);
}

Expr Expr::parse(std::string_view src) {
    ExprParser p(src);
    NodePtr root = p.expr();
    p.expect_end();
    return Expr(std::move(root));
}

Expr Expr::constant(double v) { return Expr(make_node(Op::Num, nullptr, nullptr, v)); }

double Expr::eval(Vec2 p) const {
    double small[32] = {};
    std::vector<double> big;
    double* st = small;
    if (program_->max_depth > 32) {
        big.resize(static_cast<std::size_t>(program_->max_depth));
        st = big.data();
    }
    int sp = 0;
    for (const Instr& in : program_->code) {
        switch (in.op) {
            case Op::Num: st[sp++] = in.v; break;
            case Op::X: st[sp++] = p.x; break;
            case Op::Y: st[sp++] = p.y; break;
            case Op::Neg: st[sp - 1] = -st[sp - 1]; break;
            case Op::Add: --sp; st[sp - 1] += st[sp]; break;
            case Op::Sub: --sp; st[sp - 1] -= st[sp]; break;
            case Op::Mul: --sp; st[sp - 1] *= st[sp]; break;
            case Op::Div:
                --sp;
                if (st[sp] == 0.0) throw DomainError("division by zero");
                st[sp - 1] /= st[sp];
                break;
            case Op::Pow: {
                --sp;
                if (st[sp - 1] == 0.0 && st[sp] < 0.0) throw DomainError("division by zero");
                const double r = std::pow(st[sp - 1], st[sp]);
                if (std::isnan(r) && !std::isnan(st[sp - 1]) && !std::isnan(st[sp]))
                    throw DomainError("power of negative base with non-integer exponent");
                st[sp - 1] = r;
                break;
            }
            case Op::PowInt:
                if (in.n < 0 && st[sp - 1] == 0.0) throw DomainError("division by zero");
                st[sp - 1] = ipow(st[sp - 1], in.n);
                break;
            case Op::Sin: st[sp - 1] = std::sin(st[sp - 1]); break;
            case Op::Cos: st[sp - 1] = std::cos(st[sp - 1]); break;
            case Op::Tanh: st[sp - 1] = std::tanh(st[sp - 1]); break;
            case Op::Sech: st[sp - 1] = sech(st[sp - 1]); break;
            case Op::Exp: st[sp - 1] = std::exp(st[sp - 1]); break;
            case Op::Ln:
                if (!(st[sp - 1] > 0.0)) throw DomainError("ln of non-positive argument");
                st[sp - 1] = std::log(st[sp - 1]);
                break;
        }
    }
    return st[0];
}

std::string Expr::print() const { return print_node(*root_); }

std::string FieldExpr::print() const { return "(" + vx_.print() + ", " + vy_.print() + ")"; }

FieldExpr parse_field(std::string_view src) {
    ExprParser p(src);
    p.expect('(');
    Expr vx = ExprParser::wrap(p.expr());
    p.expect(',');
    Expr vy = ExprParser::wrap(p.expr());
    p.expect(')');
    p.expect_end();
    return FieldExpr(std::move(vx), std::move(vy));
}

}  // namespace folia
