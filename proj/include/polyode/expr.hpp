#pragma once

// Closed-form coefficient expressions: a tiny recursive-descent parser and
// evaluator for functions of the single variable t.
//
// Grammar:
//   expr   := term { ("+"|"-") term }
//   term   := factor { ("*"|"/") factor }
//   factor := [ "-" ] atom [ "^" factor ]        (unary minus binds looser than ^)
//   atom   := NUMBER | "t" | "pi" | FUNC "(" expr ")" | "(" expr ")"
//   FUNC   := sin | cos | tan | exp | ln | abs | arctan | sign

#include <cctype>
#include <cmath>
#include <cstddef>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>

namespace polyode {

struct ParseError : std::runtime_error {
    std::size_t offset;
    ParseError(const std::string& what, std::size_t off)
        : std::runtime_error(what + " (at byte " + std::to_string(off) + ")"), offset(off) {}
};

struct EvalError : std::runtime_error {
    std::string subexpr;
    EvalError(const std::string& what, std::string sub)
        : std::runtime_error(what + " in `" + sub + "`"), subexpr(std::move(sub)) {}
};

enum class UnaryOp { Neg, Abs, Sin, Cos, Tan, Exp, Ln, Arctan, Sign };
enum class BinaryOp { Add, Sub, Mul, Div, Pow };

class Expr {
  public:
    struct Node;
    using NodePtr = std::shared_ptr<const Node>;

    struct Node {
        enum class Kind { Constant, Variable, Pi, Unary, Binary };
        Kind kind;
        double value = 0.0;   // Constant only
        UnaryOp uop{};        // Unary only
        BinaryOp bop{};       // Binary only
        NodePtr a, b;         // Unary uses a; Binary uses a, b
    };

    Expr() : root_(make_const(0.0)) {}

    static Expr parse(std::string_view text);

    static Expr constant(double v) { return Expr(make_const(v)); }
    static Expr variable() {
        auto n = std::make_shared<Node>();
        n->kind = Node::Kind::Variable;
        return Expr(std::move(n));
    }
    static Expr pi() {
        auto n = std::make_shared<Node>();
        n->kind = Node::Kind::Pi;
        return Expr(std::move(n));
    }
    static Expr unary(UnaryOp op, const Expr& e) {
        auto n = std::make_shared<Node>();
        n->kind = Node::Kind::Unary;
        n->uop = op;
        n->a = e.root_;
        return Expr(std::move(n));
    }
    static Expr binary(BinaryOp op, const Expr& lhs, const Expr& rhs) {
        auto n = std::make_shared<Node>();
        n->kind = Node::Kind::Binary;
        n->bop = op;
        n->a = lhs.root_;
        n->b = rhs.root_;
        return Expr(std::move(n));
    }

    Expr negated() const { return unary(UnaryOp::Neg, *this); }

    // Structural substitution t -> -t (used by the reflected equation).
    Expr reflected_in_t() const { return Expr(reflect_node(root_)); }

    double operator()(double t) const { return eval_node(*root_, t); }

    std::string str() const {
        std::ostringstream os;
        print_node(os, *root_, 0);
        return os.str();
    }

    const Node& root() const { return *root_; }

    // True when the expression is a literal constant equal to v.
    bool is_constant(double v) const {
        return root_->kind == Node::Kind::Constant && root_->value == v;
    }

  private:
    explicit Expr(NodePtr r) : root_(std::move(r)) {}

    static NodePtr make_const(double v) {
        auto n = std::make_shared<Node>();
        n->kind = Node::Kind::Constant;
        n->value = v;
        return n;
    }

    static NodePtr reflect_node(const NodePtr& n) {
        switch (n->kind) {
            case Node::Kind::Constant:
            case Node::Kind::Pi: return n;
            case Node::Kind::Variable: {
                auto neg = std::make_shared<Node>();
                neg->kind = Node::Kind::Unary;
                neg->uop = UnaryOp::Neg;
                neg->a = n;
                return neg;
            }
            case Node::Kind::Unary: {
                auto m = std::make_shared<Node>(*n);
                m->a = reflect_node(n->a);
                return m;
            }
            case Node::Kind::Binary: {
                auto m = std::make_shared<Node>(*n);
                m->a = reflect_node(n->a);
                m->b = reflect_node(n->b);
                return m;
            }
        }
        return n;
    }

    static double eval_node(const Node& n, double t);
    static void print_node(std::ostream& os, const Node& n, int parent_prec);

    class Parser;

    NodePtr root_;
};

// ---------------------------------------------------------------------------
// evaluation

inline double Expr::eval_node(const Node& n, double t) {
    auto subexpr = [&n]() {
        std::ostringstream os;
        print_node(os, n, 0);
        return os.str();
    };
    double r = 0.0;
    switch (n.kind) {
        case Node::Kind::Constant: return n.value;
        case Node::Kind::Variable: return t;
        case Node::Kind::Pi: return 3.14159265358979323846;
        case Node::Kind::Unary: {
            const double x = eval_node(*n.a, t);
            switch (n.uop) {
                case UnaryOp::Neg: return -x;
                case UnaryOp::Abs: return std::fabs(x);
                case UnaryOp::Sin: r = std::sin(x); break;
                case UnaryOp::Cos: r = std::cos(x); break;
                case UnaryOp::Tan: r = std::tan(x); break;
                case UnaryOp::Exp: r = std::exp(x); break;
                case UnaryOp::Ln:
                    if (x <= 0.0) throw EvalError("log of non-positive value", subexpr());
                    r = std::log(x);
                    break;
                case UnaryOp::Arctan: return std::atan(x);
                case UnaryOp::Sign: return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0);
            }
            break;
        }
        case Node::Kind::Binary: {
            const double x = eval_node(*n.a, t);
            const double y = eval_node(*n.b, t);
            switch (n.bop) {
                case BinaryOp::Add: r = x + y; break;
                case BinaryOp::Sub: r = x - y; break;
                case BinaryOp::Mul: r = x * y; break;
                case BinaryOp::Div:
                    if (y == 0.0) throw EvalError("division by zero", subexpr());
                    r = x / y;
                    break;
                case BinaryOp::Pow: {
                    // Exact repeated multiplication for small integer exponents,
                    // so negative bases behave predictably.
                    double yi;
                    if (std::modf(y, &yi) == 0.0 && std::fabs(yi) <= 64.0) {
                        long e = static_cast<long>(yi);
                        double base = x, acc = 1.0;
                        bool inv = e < 0;
                        for (long i = 0; i < (inv ? -e : e); ++i) acc *= base;
                        if (inv) {
                            if (acc == 0.0) throw EvalError("division by zero", subexpr());
                            acc = 1.0 / acc;
                        }
                        r = acc;
                    } else {
                        r = std::pow(x, y);
                    }
                    break;
                }
            }
            break;
        }
    }
    if (!std::isfinite(r)) throw EvalError("non-finite result", subexpr());
    return r;
}

// ---------------------------------------------------------------------------
// printing (round-trip stable: prints in the same grammar it parses)

inline void Expr::print_node(std::ostream& os, const Node& n, int parent_prec) {
    // precedence: 1 add/sub, 2 mul/div, 3 unary minus, 4 pow, 5 atom
    switch (n.kind) {
        case Node::Kind::Constant: {
            char buf[32];
            std::snprintf(buf, sizeof(buf), "%.17g", n.value);
            if (n.value < 0.0) {
                if (parent_prec >= 2) os << '(' << buf << ')';
                else os << buf;
            } else {
                os << buf;
            }
            return;
        }
        case Node::Kind::Variable: os << 't'; return;
        case Node::Kind::Pi: os << "pi"; return;
        case Node::Kind::Unary: {
            if (n.uop == UnaryOp::Neg) {
                const bool paren = parent_prec >= 2;
                if (paren) os << '(';
                os << '-';
                print_node(os, *n.a, 3);
                if (paren) os << ')';
                return;
            }
            const char* name = nullptr;
            switch (n.uop) {
                case UnaryOp::Abs: name = "abs"; break;
                case UnaryOp::Sin: name = "sin"; break;
                case UnaryOp::Cos: name = "cos"; break;
                case UnaryOp::Tan: name = "tan"; break;
                case UnaryOp::Exp: name = "exp"; break;
                case UnaryOp::Ln: name = "ln"; break;
                case UnaryOp::Arctan: name = "arctan"; break;
                case UnaryOp::Sign: name = "sign"; break;
                default: break;
            }
            os << name << '(';
            print_node(os, *n.a, 0);
            os << ')';
            return;
        }
        case Node::Kind::Binary: {
            int prec = 0;
            const char* op = nullptr;
            switch (n.bop) {
                case BinaryOp::Add: prec = 1; op = "+"; break;
                case BinaryOp::Sub: prec = 1; op = "-"; break;
                case BinaryOp::Mul: prec = 2; op = "*"; break;
                case BinaryOp::Div: prec = 2; op = "/"; break;
                case BinaryOp::Pow: prec = 4; op = "^"; break;
            }
            const bool paren = prec < parent_prec || (n.bop == BinaryOp::Pow && parent_prec == 4);
            if (paren) os << '(';
            // Parenthesize same-precedence children on the non-associating
            // side so a reparse reproduces the tree exactly (floating-point
            // arithmetic is order-sensitive).
            print_node(os, *n.a, n.bop == BinaryOp::Pow ? prec + 1 : prec);
            os << op;
            print_node(os, *n.b, n.bop == BinaryOp::Pow ? prec : prec + 1);
            if (paren) os << ')';
            return;
        }
    }
}

// ---------------------------------------------------------------------------
// parsing

class Expr::Parser {
  public:
    explicit Parser(std::string_view s) : s_(s) {}

    NodePtr run() {
        NodePtr e = parse_expr();
        skip_ws();
        if (pos_ != s_.size()) throw ParseError("unexpected trailing input", pos_);
        return e;
    }

  private:
    std::string_view s_;
    std::size_t pos_ = 0;

    void skip_ws() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }
    bool peek(char c) {
        skip_ws();
        return pos_ < s_.size() && s_[pos_] == c;
    }
    bool accept(char c) {
        if (peek(c)) { ++pos_; return true; }
        return false;
    }
    void expect(char c) {
        if (!accept(c))
            throw ParseError(std::string("expected '") + c + "'", pos_);
    }

    NodePtr parse_expr() {
        NodePtr lhs = parse_term();
        for (;;) {
            if (accept('+')) lhs = bin(BinaryOp::Add, lhs, parse_term());
            else if (accept('-')) lhs = bin(BinaryOp::Sub, lhs, parse_term());
            else return lhs;
        }
    }

    NodePtr parse_term() {
        NodePtr lhs = parse_factor();
        for (;;) {
            if (accept('*')) lhs = bin(BinaryOp::Mul, lhs, parse_factor());
            else if (accept('/')) lhs = bin(BinaryOp::Div, lhs, parse_factor());
            else return lhs;
        }
    }

    // factor := ["-"] atom ["^" factor]; the leading minus applies to the
    // whole power, and "^" is right-associative.
    NodePtr parse_factor() {
        const bool neg = accept('-');
        NodePtr base = parse_atom();
        if (accept('^')) base = bin(BinaryOp::Pow, base, parse_factor());
        if (neg) base = un(UnaryOp::Neg, base);
        return base;
    }

    NodePtr parse_atom() {
        skip_ws();
        if (pos_ >= s_.size()) throw ParseError("unexpected end of input", pos_);
        const char c = s_[pos_];
        if (c == '(') {
            ++pos_;
            NodePtr e = parse_expr();
            expect(')');
            return e;
        }
        if (std::isdigit(static_cast<unsigned char>(c))) return parse_number();
        if (std::isalpha(static_cast<unsigned char>(c))) return parse_ident();
        throw ParseError("unexpected character", pos_);
    }

    NodePtr parse_number() {
        const std::size_t start = pos_;
        while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
        if (pos_ < s_.size() && s_[pos_] == '.') {
            ++pos_;
            while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
        }
        if (pos_ < s_.size() && (s_[pos_] == 'e' || s_[pos_] == 'E')) {
            std::size_t save = pos_;
            ++pos_;
            if (pos_ < s_.size() && (s_[pos_] == '+' || s_[pos_] == '-')) ++pos_;
            if (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) {
                while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
            } else {
                pos_ = save;  // 'e' belonged to something else
            }
        }
        const std::string text(s_.substr(start, pos_ - start));
        try {
            return make_const(std::stod(text));
        } catch (const std::exception&) {
            throw ParseError("malformed number", start);
        }
    }

    NodePtr parse_ident() {
        const std::size_t start = pos_;
        while (pos_ < s_.size() && std::isalpha(static_cast<unsigned char>(s_[pos_]))) ++pos_;
        const std::string_view id = s_.substr(start, pos_ - start);
        if (id == "t") {
            auto n = std::make_shared<Node>();
            n->kind = Node::Kind::Variable;
            return n;
        }
        if (id == "pi") {
            auto n = std::make_shared<Node>();
            n->kind = Node::Kind::Pi;
            return n;
        }
        UnaryOp op;
        if (id == "sin") op = UnaryOp::Sin;
        else if (id == "cos") op = UnaryOp::Cos;
        else if (id == "tan") op = UnaryOp::Tan;
        else if (id == "exp") op = UnaryOp::Exp;
        else if (id == "ln") op = UnaryOp::Ln;
        else if (id == "abs") op = UnaryOp::Abs;
        else if (id == "arctan") op = UnaryOp::Arctan;
        else if (id == "sign") op = UnaryOp::Sign;
        else throw ParseError("unknown identifier '" + std::string(id) + "'", start);
        expect('(');
        NodePtr arg = parse_expr();
        expect(')');
        return un(op, arg);
    }

    static NodePtr bin(BinaryOp op, NodePtr a, NodePtr b) {
        auto n = std::make_shared<Node>();
        n->kind = Node::Kind::Binary;
        n->bop = op;
        n->a = std::move(a);
        n->b = std::move(b);
        return n;
    }
    static NodePtr un(UnaryOp op, NodePtr a) {
        auto n = std::make_shared<Node>();
        n->kind = Node::Kind::Unary;
        n->uop = op;
        n->a = std::move(a);
        return n;
    }
};

inline Expr Expr::parse(std::string_view text) { return Expr(Parser(text).run()); }

}  // namespace polyode
