#include "flift/expr.hpp"

#include <cctype>
#include <cmath>
#include <stdexcept>

namespace flift {

enum class Op { constant, variable, add, sub, mul, div, neg, fmin, fmax, fabs, ftanh };

struct Expr::Node {
    Op op = Op::constant;
    double value = 0.0;
    int var = 0;
    std::shared_ptr<const Node> a, b;
};

namespace {

using NodePtr = std::shared_ptr<const Expr::Node>;

NodePtr make_const(double v) {
    auto n = std::make_shared<Expr::Node>();
    n->op = Op::constant;
    n->value = v;
    return n;
}

NodePtr make_var(int i) {
    auto n = std::make_shared<Expr::Node>();
    n->op = Op::variable;
    n->var = i;
    return n;
}

NodePtr make_node(Op op, NodePtr a, NodePtr b = nullptr) {
    auto n = std::make_shared<Expr::Node>();
    n->op = op;
    n->a = std::move(a);
    n->b = std::move(b);
    return n;
}

bool is_zero(const NodePtr& n) { return n->op == Op::constant && n->value == 0.0; }

double eval_node(const Expr::Node& n, const Vec& x) {
    switch (n.op) {
        case Op::constant: return n.value;
        case Op::variable:
            if (n.var >= x.size()) throw std::invalid_argument("expression variable beyond dimension");
            return x(n.var);
        case Op::add: return eval_node(*n.a, x) + eval_node(*n.b, x);
        case Op::sub: return eval_node(*n.a, x) - eval_node(*n.b, x);
        case Op::mul: return eval_node(*n.a, x) * eval_node(*n.b, x);
        case Op::div: return eval_node(*n.a, x) / eval_node(*n.b, x);
        case Op::neg: return -eval_node(*n.a, x);
        case Op::fmin: return std::min(eval_node(*n.a, x), eval_node(*n.b, x));
        case Op::fmax: return std::max(eval_node(*n.a, x), eval_node(*n.b, x));
        case Op::fabs: return std::abs(eval_node(*n.a, x));
        case Op::ftanh: return std::tanh(eval_node(*n.a, x));
    }
    throw std::logic_error("unreachable");
}

NodePtr diff_node(const NodePtr& n, int var);

NodePtr diff_binary(Op op, const NodePtr& a, const NodePtr& b, int var) {
    const NodePtr da = diff_node(a, var);
    const NodePtr db = diff_node(b, var);
    switch (op) {
        case Op::add: return make_node(Op::add, da, db);
        case Op::sub: return make_node(Op::sub, da, db);
        case Op::mul:
            return make_node(Op::add, make_node(Op::mul, da, b), make_node(Op::mul, a, db));
        case Op::div: {
            // (a'b - ab') / b^2
            auto num = make_node(Op::sub, make_node(Op::mul, da, b), make_node(Op::mul, a, db));
            return make_node(Op::div, num, make_node(Op::mul, b, b));
        }
        default: throw std::logic_error("diff_binary");
    }
}

int max_var(const Expr::Node& n) {
    switch (n.op) {
        case Op::constant: return -1;
        case Op::variable: return n.var;
        case Op::neg:
        case Op::fabs:
        case Op::ftanh: return max_var(*n.a);
        default: return std::max(max_var(*n.a), max_var(*n.b));
    }
}

struct Parser {
    const std::string& s;
    std::size_t pos = 0;

    explicit Parser(const std::string& text) : s(text) {}

    void skip_ws() {
        while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
    }

    bool consume(char c) {
        skip_ws();
        if (pos < s.size() && s[pos] == c) { ++pos; return true; }
        return false;
    }

    [[noreturn]] void fail(const std::string& msg) {
        throw std::invalid_argument("expression parse error at position " +
                                    std::to_string(pos) + ": " + msg + " in \"" + s + "\"");
    }

    NodePtr parse_expression() {
        NodePtr lhs = parse_term();
        while (true) {
            skip_ws();
            if (consume('+')) lhs = make_node(Op::add, lhs, parse_term());
            else if (consume('-')) lhs = make_node(Op::sub, lhs, parse_term());
            else return lhs;
        }
    }

    NodePtr parse_term() {
        NodePtr lhs = parse_unary();
        while (true) {
            skip_ws();
            if (consume('*')) lhs = make_node(Op::mul, lhs, parse_unary());
            else if (consume('/')) lhs = make_node(Op::div, lhs, parse_unary());
            else return lhs;
        }
    }

    NodePtr parse_unary() {
        skip_ws();
        if (consume('-')) return make_node(Op::neg, parse_unary());
        if (consume('+')) return parse_unary();
        return parse_primary();
    }

    NodePtr parse_primary() {
        skip_ws();
        if (pos >= s.size()) fail("unexpected end");
        if (consume('(')) {
            NodePtr e = parse_expression();
            if (!consume(')')) fail("expected ')'");
            return e;
        }
        const char c = s[pos];
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            char* end = nullptr;
            const double v = std::strtod(s.c_str() + pos, &end);
            pos = end - s.c_str();
            return make_const(v);
        }
        if (std::isalpha(static_cast<unsigned char>(c))) {
            std::size_t start = pos;
            while (pos < s.size() &&
                   (std::isalnum(static_cast<unsigned char>(s[pos])) || s[pos] == '_'))
                ++pos;
            const std::string name = s.substr(start, pos - start);
            if (name == "min" || name == "max") {
                if (!consume('(')) fail("expected '(' after " + name);
                NodePtr a = parse_expression();
                if (!consume(',')) fail("expected ',' in " + name);
                NodePtr b = parse_expression();
                if (!consume(')')) fail("expected ')' in " + name);
                return make_node(name == "min" ? Op::fmin : Op::fmax, a, b);
            }
            if (name == "abs" || name == "tanh") {
                if (!consume('(')) fail("expected '(' after " + name);
                NodePtr a = parse_expression();
                if (!consume(')')) fail("expected ')' in " + name);
                return make_node(name == "abs" ? Op::fabs : Op::ftanh, a);
            }
            if (name == "x") return make_var(0);
            if (name.size() >= 2 && name[0] == 'x') {
                int idx = 0;
                for (std::size_t i = 1; i < name.size(); ++i) {
                    if (!std::isdigit(static_cast<unsigned char>(name[i])))
                        fail("unknown identifier " + name);
                    idx = idx * 10 + (name[i] - '0');
                }
                if (idx < 1) fail("variables are x1, x2, ...");
                return make_var(idx - 1);
            }
            fail("unknown identifier " + name);
        }
        fail(std::string("unexpected character '") + c + "'");
    }
};

NodePtr diff_node(const NodePtr& n, int var) {
    switch (n->op) {
        case Op::constant: return make_const(0.0);
        case Op::variable: return make_const(n->var == var ? 1.0 : 0.0);
        case Op::neg: return make_node(Op::neg, diff_node(n->a, var));
        case Op::add:
        case Op::sub:
        case Op::mul:
        case Op::div: return diff_binary(n->op, n->a, n->b, var);
        case Op::fmin: {
            // d/dx min(a,b) = da + (db - da) * H(a - b) with H a hard step;
            // the kink itself takes the first branch
            auto da = diff_node(n->a, var);
            auto db = diff_node(n->b, var);
            if (is_zero(da) && is_zero(db)) return da;
            constexpr double kBig = 1e12;
            auto t = make_node(Op::sub, n->a, n->b);
            auto h = make_node(Op::fmax,
                               make_node(Op::fmin, make_node(Op::mul, t, make_const(kBig)),
                                         make_const(1.0)),
                               make_const(0.0));
            return make_node(Op::add, da, make_node(Op::mul, make_node(Op::sub, db, da), h));
        }
        case Op::fmax: {
            auto da = diff_node(n->a, var);
            auto db = diff_node(n->b, var);
            constexpr double kBig = 1e12;
            auto t = make_node(Op::sub, n->b, n->a);
            auto h = make_node(Op::fmax,
                               make_node(Op::fmin, make_node(Op::mul, t, make_const(kBig)),
                                         make_const(1.0)),
                               make_const(0.0));
            return make_node(Op::add, da, make_node(Op::mul, make_node(Op::sub, db, da), h));
        }
        case Op::fabs: {
            // |u|' = sign(u) u'; sign via u/abs(u), taking 0 at the kink
            auto sign = make_node(Op::div, n->a,
                                  make_node(Op::fmax, make_node(Op::fabs, n->a),
                                            make_const(1e-300)));
            return make_node(Op::mul, sign, diff_node(n->a, var));
        }
        case Op::ftanh: {
            auto th = make_node(Op::ftanh, n->a);
            auto sech2 = make_node(Op::sub, make_const(1.0), make_node(Op::mul, th, th));
            return make_node(Op::mul, sech2, diff_node(n->a, var));
        }
    }
    throw std::logic_error("unreachable");
}

std::string to_string_node(const Expr::Node& n) {
    switch (n.op) {
        case Op::constant: {
            char buf[40];
            std::snprintf(buf, sizeof(buf), "%.17g", n.value);
            return buf;
        }
        case Op::variable: return "x" + std::to_string(n.var + 1);
        case Op::add: return "(" + to_string_node(*n.a) + " + " + to_string_node(*n.b) + ")";
        case Op::sub: return "(" + to_string_node(*n.a) + " - " + to_string_node(*n.b) + ")";
        case Op::mul: return "(" + to_string_node(*n.a) + " * " + to_string_node(*n.b) + ")";
        case Op::div: return "(" + to_string_node(*n.a) + " / " + to_string_node(*n.b) + ")";
        case Op::neg: return "(-" + to_string_node(*n.a) + ")";
        case Op::fmin: return "min(" + to_string_node(*n.a) + ", " + to_string_node(*n.b) + ")";
        case Op::fmax: return "max(" + to_string_node(*n.a) + ", " + to_string_node(*n.b) + ")";
        case Op::fabs: return "abs(" + to_string_node(*n.a) + ")";
        case Op::ftanh: return "tanh(" + to_string_node(*n.a) + ")";
    }
    throw std::logic_error("unreachable");
}

} // namespace

Expr Expr::parse(const std::string& text) {
    Parser p(text);
    NodePtr root = p.parse_expression();
    p.skip_ws();
    if (p.pos != text.size()) p.fail("trailing characters");
    return Expr(std::move(root));
}

double Expr::eval(const Vec& x) const { return eval_node(*root_, x); }

Expr Expr::derivative(int var) const { return Expr(diff_node(root_, var)); }

int Expr::min_dimension() const { return max_var(*root_) + 1; }

std::string Expr::to_string() const { return to_string_node(*root_); }

} // namespace flift
