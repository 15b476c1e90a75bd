#pragma once

// Recursive-descent parser and evaluator for the expression language used in
// system definitions: variables {t, x, y}, arithmetic with ^ right
// associative, a fixed function set, constants pi and e. Supports symbolic
// differentiation (exact gradients for expression Hamiltonians) and printing
// (parse of print reproduces the tree).

#include <cctype>
#include <cmath>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "pbm/core.hpp"

namespace pbm::expr {

class ParseError : public Error {
public:
    ParseError(std::size_t offset, const std::string& msg)
        : Error(ErrorClass::config,
                "parse error at offset " + std::to_string(offset) + ": " + msg),
          offset_(offset) {}
    std::size_t offset() const noexcept { return offset_; }

private:
    std::size_t offset_;
};

enum class Fn { sin, cos, tan, exp, log, sqrt, tanh, atan, abs };

inline const char* fn_name(Fn f) {
    switch (f) {
        case Fn::sin: return "sin";
        case Fn::cos: return "cos";
        case Fn::tan: return "tan";
        case Fn::exp: return "exp";
        case Fn::log: return "log";
        case Fn::sqrt: return "sqrt";
        case Fn::tanh: return "tanh";
        case Fn::atan: return "atan";
        case Fn::abs: return "abs";
    }
    return "?";
}

class Expression {
public:
    // variables: the permitted identifier list; index in this list is the
    // index into the values passed to eval().
    static Expression parse(std::string_view src, std::vector<std::string> variables) {
        Expression e;
        e.vars_ = std::move(variables);
        Parser p{src, e};
        e.root_ = p.parse_expr();
        p.skip_ws();
        if (p.pos != src.size()) throw ParseError(p.pos, "unexpected trailing input");
        return e;
    }

    double eval(const std::vector<double>& values) const { return eval_node(root_, values); }

    Expression derivative(std::size_t var) const {
        Expression out;
        out.vars_ = vars_;
        Builder b{out};
        out.root_ = diff(b, root_, var);
        return out;
    }

    std::string print() const { return print_node(root_, 0); }

    const std::vector<std::string>& variables() const { return vars_; }

private:
    enum class Op { num, var, add, sub, mul, div, pow, neg, call };

    struct Node {
        Op op;
        double value = 0.0;
        int var = -1;
        Fn fn = Fn::sin;
        int a = -1, b = -1;
    };

    std::vector<Node> nodes_;
    int root_ = -1;
    std::vector<std::string> vars_;

    struct Builder {
        Expression& e;
        int num(double v) {
            e.nodes_.push_back({Op::num, v, -1, Fn::sin, -1, -1});
            return static_cast<int>(e.nodes_.size()) - 1;
        }
        int var(int idx) {
            e.nodes_.push_back({Op::var, 0.0, idx, Fn::sin, -1, -1});
            return static_cast<int>(e.nodes_.size()) - 1;
        }
        int node(Op op, int a, int b = -1) {
            e.nodes_.push_back({op, 0.0, -1, Fn::sin, a, b});
            return static_cast<int>(e.nodes_.size()) - 1;
        }
        int call(Fn f, int a) {
            e.nodes_.push_back({Op::call, 0.0, -1, f, a, -1});
            return static_cast<int>(e.nodes_.size()) - 1;
        }
        bool is_const(int i, double v) const {
            return e.nodes_[i].op == Op::num && e.nodes_[i].value == v;
        }
        bool both_num(int a, int b) const {
            return e.nodes_[a].op == Op::num && e.nodes_[b].op == Op::num;
        }
        double val(int i) const { return e.nodes_[i].value; }

        // constructors with constant folding and unit elimination
        int add(int a, int b) {
            if (is_const(a, 0.0)) return b;
            if (is_const(b, 0.0)) return a;
            if (both_num(a, b)) return num(val(a) + val(b));
            return node(Op::add, a, b);
        }
        int sub(int a, int b) {
            if (is_const(b, 0.0)) return a;
            if (both_num(a, b)) return num(val(a) - val(b));
            return node(Op::sub, a, b);
        }
        int mul(int a, int b) {
            if (is_const(a, 0.0) || is_const(b, 0.0)) return num(0.0);
            if (is_const(a, 1.0)) return b;
            if (is_const(b, 1.0)) return a;
            if (both_num(a, b)) return num(val(a) * val(b));
            return node(Op::mul, a, b);
        }
        int div(int a, int b) {
            if (is_const(a, 0.0)) return num(0.0);
            if (is_const(b, 1.0)) return a;
            return node(Op::div, a, b);
        }
        int pow(int a, int b) {
            if (is_const(b, 1.0)) return a;
            if (is_const(b, 0.0)) return num(1.0);
            return node(Op::pow, a, b);
        }
        int neg(int a) {
            if (e.nodes_[a].op == Op::num) return num(-val(a));
            return node(Op::neg, a);
        }
    };

    struct Parser {
        std::string_view src;
        Expression& e;
        std::size_t pos = 0;

        void skip_ws() {
            while (pos < src.size() && std::isspace(static_cast<unsigned char>(src[pos]))) ++pos;
        }
        bool peek_is(char c) {
            skip_ws();
            return pos < src.size() && src[pos] == c;
        }
        bool consume(char c) {
            if (peek_is(c)) {
                ++pos;
                return true;
            }
            return false;
        }

        int parse_expr() {
            Builder b{e};
            int lhs = parse_term();
            for (;;) {
                if (consume('+'))
                    lhs = b.node(Op::add, lhs, parse_term());
                else if (consume('-'))
                    lhs = b.node(Op::sub, lhs, parse_term());
                else
                    return lhs;
            }
        }
        int parse_term() {
            Builder b{e};
            int lhs = parse_unary();
            for (;;) {
                if (consume('*'))
                    lhs = b.node(Op::mul, lhs, parse_unary());
                else if (consume('/'))
                    lhs = b.node(Op::div, lhs, parse_unary());
                else
                    return lhs;
            }
        }
        int parse_unary() {
            Builder b{e};
            if (consume('-')) return b.node(Op::neg, parse_unary());
            if (consume('+')) return parse_unary();
            return parse_power();
        }
        int parse_power() {
            Builder b{e};
            int base = parse_atom();
            if (consume('^')) return b.node(Op::pow, base, parse_unary());
            return base;
        }
        int parse_atom() {
            Builder b{e};
            skip_ws();
            if (pos >= src.size()) throw ParseError(pos, "expected a value");
            char c = src[pos];
            if (c == '(') {
                ++pos;
                int inner = parse_expr();
                if (!consume(')')) throw ParseError(pos, "expected ')'");
                return inner;
            }
            if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
            if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return parse_ident();
            throw ParseError(pos, std::string("unexpected character '") + c + "'");
        }
        int parse_number() {
            Builder b{e};
            std::size_t start = pos;
            while (pos < src.size() &&
                   (std::isdigit(static_cast<unsigned char>(src[pos])) || src[pos] == '.'))
                ++pos;
            if (pos < src.size() && (src[pos] == 'e' || src[pos] == 'E')) {
                std::size_t mark = pos++;
                if (pos < src.size() && (src[pos] == '+' || src[pos] == '-')) ++pos;
                if (pos < src.size() && std::isdigit(static_cast<unsigned char>(src[pos]))) {
                    while (pos < src.size() && std::isdigit(static_cast<unsigned char>(src[pos])))
                        ++pos;
                } else {
                    pos = mark;  // 'e' was the constant, not an exponent
                }
            }
            try {
                return b.num(std::stod(std::string(src.substr(start, pos - start))));
            } catch (const std::exception&) {
                throw ParseError(start, "malformed number");
            }
        }
        int parse_ident() {
            Builder b{e};
            std::size_t start = pos;
            while (pos < src.size() && (std::isalnum(static_cast<unsigned char>(src[pos])) ||
                                        src[pos] == '_'))
                ++pos;
            std::string name(src.substr(start, pos - start));
            static const std::pair<const char*, Fn> fns[] = {
                {"sin", Fn::sin},   {"cos", Fn::cos},   {"tan", Fn::tan},
                {"exp", Fn::exp},   {"log", Fn::log},   {"sqrt", Fn::sqrt},
                {"tanh", Fn::tanh}, {"atan", Fn::atan}, {"abs", Fn::abs}};
            for (const auto& [fname, fv] : fns) {
                if (name == fname) {
                    if (!consume('(')) throw ParseError(pos, "expected '(' after function name");
                    int arg = parse_expr();
                    if (!consume(')')) throw ParseError(pos, "expected ')'");
                    return b.call(fv, arg);
                }
            }
            if (name == "pi") return b.num(kPi);
            if (name == "e") return b.num(std::exp(1.0));
            for (std::size_t i = 0; i < e.vars_.size(); ++i)
                if (e.vars_[i] == name) return b.var(static_cast<int>(i));
            throw ParseError(start, "unknown identifier '" + name + "'");
        }
    };

    double eval_node(int i, const std::vector<double>& v) const {
        const Node& n = nodes_[static_cast<std::size_t>(i)];
        switch (n.op) {
            case Op::num: return n.value;
            case Op::var: return v.at(static_cast<std::size_t>(n.var));
            case Op::add: return eval_node(n.a, v) + eval_node(n.b, v);
            case Op::sub: return eval_node(n.a, v) - eval_node(n.b, v);
            case Op::mul: return eval_node(n.a, v) * eval_node(n.b, v);
            case Op::div: return eval_node(n.a, v) / eval_node(n.b, v);
            case Op::pow: return std::pow(eval_node(n.a, v), eval_node(n.b, v));
            case Op::neg: return -eval_node(n.a, v);
            case Op::call: {
                double x = eval_node(n.a, v);
                switch (n.fn) {
                    case Fn::sin: return std::sin(x);
                    case Fn::cos: return std::cos(x);
                    case Fn::tan: return std::tan(x);
                    case Fn::exp: return std::exp(x);
                    case Fn::log: return std::log(x);
                    case Fn::sqrt: return std::sqrt(x);
                    case Fn::tanh: return std::tanh(x);
                    case Fn::atan: return std::atan(x);
                    case Fn::abs: return std::fabs(x);
                }
            }
        }
        throw Error(ErrorClass::internal, "expression: corrupt node");
    }

    // Copies the subtree at i (from this expression) into builder b's tree.
    int clone(Builder& b, int i) const {
        const Node& n = nodes_[static_cast<std::size_t>(i)];
        switch (n.op) {
            case Op::num: return b.num(n.value);
            case Op::var: return b.var(n.var);
            case Op::neg: return b.neg(clone(b, n.a));
            case Op::call: return b.call(n.fn, clone(b, n.a));
            case Op::add: return b.add(clone(b, n.a), clone(b, n.b));
            case Op::sub: return b.sub(clone(b, n.a), clone(b, n.b));
            case Op::mul: return b.mul(clone(b, n.a), clone(b, n.b));
            case Op::div: return b.div(clone(b, n.a), clone(b, n.b));
            case Op::pow: return b.pow(clone(b, n.a), clone(b, n.b));
        }
        throw Error(ErrorClass::internal, "expression: corrupt node");
    }

    int diff(Builder& b, int i, std::size_t var) const {
        const Node& n = nodes_[static_cast<std::size_t>(i)];
        switch (n.op) {
            case Op::num: return b.num(0.0);
            case Op::var: return b.num(n.var == static_cast<int>(var) ? 1.0 : 0.0);
            case Op::add: return b.add(diff(b, n.a, var), diff(b, n.b, var));
            case Op::sub: return b.sub(diff(b, n.a, var), diff(b, n.b, var));
            case Op::neg: return b.neg(diff(b, n.a, var));
            case Op::mul:
                return b.add(b.mul(diff(b, n.a, var), clone(b, n.b)),
                             b.mul(clone(b, n.a), diff(b, n.b, var)));
            case Op::div: {
                int da = diff(b, n.a, var), db = diff(b, n.b, var);
                int num = b.sub(b.mul(da, clone(b, n.b)), b.mul(clone(b, n.a), db));
                return b.div(num, b.pow(clone(b, n.b), b.num(2.0)));
            }
            case Op::pow: {
                const Node& exp_node = nodes_[static_cast<std::size_t>(n.b)];
                int da = diff(b, n.a, var);
                if (exp_node.op == Op::num) {  // a^c: c a^(c-1) a'
                    double c = exp_node.value;
                    return b.mul(b.mul(b.num(c), b.pow(clone(b, n.a), b.num(c - 1.0))), da);
                }
                // general a^b: a^b (b' log a + b a' / a)
                int db = diff(b, n.b, var);
                int t1 = b.mul(db, b.call(Fn::log, clone(b, n.a)));
                int t2 = b.div(b.mul(clone(b, n.b), da), clone(b, n.a));
                return b.mul(b.pow(clone(b, n.a), clone(b, n.b)), b.add(t1, t2));
            }
            case Op::call: {
                int da = diff(b, n.a, var);
                int u = clone(b, n.a);
                int outer;
                switch (n.fn) {
                    case Fn::sin: outer = b.call(Fn::cos, u); break;
                    case Fn::cos: outer = b.neg(b.call(Fn::sin, u)); break;
                    case Fn::tan: {
                        int c = b.call(Fn::cos, u);
                        outer = b.div(b.num(1.0), b.mul(c, clone_of(b, c)));
                        break;
                    }
                    case Fn::exp: outer = b.call(Fn::exp, u); break;
                    case Fn::log: outer = b.div(b.num(1.0), u); break;
                    case Fn::sqrt: outer = b.div(b.num(0.5), b.call(Fn::sqrt, u)); break;
                    case Fn::tanh: {
                        int t = b.call(Fn::tanh, u);
                        outer = b.sub(b.num(1.0), b.mul(t, clone_of(b, t)));
                        break;
                    }
                    case Fn::atan:
                        outer = b.div(b.num(1.0), b.add(b.num(1.0), b.mul(u, clone_of(b, u))));
                        break;
                    case Fn::abs: outer = b.div(u, b.call(Fn::abs, clone_of(b, u))); break;
                }
                return b.mul(outer, da);
            }
        }
        throw Error(ErrorClass::internal, "expression: corrupt node");
    }

    // clone of a node already living in builder b's expression
    static int clone_of(Builder& b, int i) {
        const Node& n = b.e.nodes_[static_cast<std::size_t>(i)];
        switch (n.op) {
            case Op::num: return b.num(n.value);
            case Op::var: return b.var(n.var);
            case Op::neg: return b.node(Op::neg, clone_of(b, n.a));
            case Op::call: return b.call(n.fn, clone_of(b, n.a));
            default:
                return b.node(n.op, clone_of(b, n.a), n.b >= 0 ? clone_of(b, n.b) : -1);
        }
    }

    static int precedence(Op op) {
        switch (op) {
            case Op::add:
            case Op::sub: return 1;
            case Op::mul:
            case Op::div: return 2;
            case Op::neg: return 3;
            case Op::pow: return 4;
            default: return 5;
        }
    }

    std::string print_node(int i, int parent_prec) const {
        const Node& n = nodes_[static_cast<std::size_t>(i)];
        std::string s;
        int prec = precedence(n.op);
        switch (n.op) {
            case Op::num: {
                char buf[40];
                std::snprintf(buf, sizeof buf, "%.17g", n.value);
                s = buf;
                if (n.value < 0.0) prec = 3;  // negative literal prints as unary minus
                break;
            }
            case Op::var: s = vars_.at(static_cast<std::size_t>(n.var)); break;
            case Op::add: s = print_node(n.a, prec) + " + " + print_node(n.b, prec + 1); break;
            case Op::sub: s = print_node(n.a, prec) + " - " + print_node(n.b, prec + 1); break;
            case Op::mul: s = print_node(n.a, prec) + "*" + print_node(n.b, prec + 1); break;
            case Op::div: s = print_node(n.a, prec) + "/" + print_node(n.b, prec + 1); break;
            case Op::pow: s = print_node(n.a, prec + 1) + "^" + print_node(n.b, prec); break;
            case Op::neg: s = "-" + print_node(n.a, prec); break;
            case Op::call:
                s = std::string(fn_name(n.fn)) + "(" + print_node(n.a, 0) + ")";
                break;
        }
        if (prec < parent_prec) s = "(" + s + ")";
        return s;
    }
};

}  // namespace pbm::expr
