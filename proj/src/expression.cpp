#include "plastafem/expression.hpp"

#include <cctype>
#include <cmath>
#include <charconv>
#include <cstdio>
#include <numbers>

namespace plastafem {

class ExpressionParser {
public:
    ExpressionParser(std::string_view text, std::size_t offset, Expression& out)
        : text_(text), offset_(offset), out_(out) {}

    int parse_all() {
        const int root = parse_sum();
        skip_space();
        if (pos_ < text_.size()) fail("unexpected '" + std::string(1, text_[pos_]) + "'");
        return root;
    }

    int parse_sum() {
        int lhs = parse_product();
        for (;;) {
            skip_space();
            if (accept('+')) {
                lhs = add(Expression::Op::Add, lhs, parse_product());
            } else if (accept('-')) {
                lhs = add(Expression::Op::Sub, lhs, parse_product());
            } else {
                return lhs;
            }
        }
    }

    std::size_t position() const { return pos_; }

private:
    using Op = Expression::Op;

    int parse_product() {
        int lhs = parse_unary();
        for (;;) {
            skip_space();
            if (accept('*')) {
                lhs = add(Op::Mul, lhs, parse_unary());
            } else if (accept('/')) {
                lhs = add(Op::Div, lhs, parse_unary());
            } else {
                return lhs;
            }
        }
    }

    int parse_unary() {
        skip_space();
        if (accept('-')) return add(Op::Neg, parse_unary(), -1);
        if (accept('+')) return parse_unary();
        return parse_power();
    }

    int parse_power() {
        const int base = parse_primary();
        skip_space();
        if (accept('^')) return add(Op::Pow, base, parse_unary());
        return base;
    }

    int parse_primary() {
        skip_space();
        if (pos_ >= text_.size()) fail("unexpected end of expression");
        const char c = text_[pos_];
        if (c == '(') {
            ++pos_;
            const int inner = parse_sum();
            skip_space();
            if (!accept(')')) fail("expected ')'");
            return inner;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
        if (std::isalpha(static_cast<unsigned char>(c))) {
            const std::size_t start = pos_;
            while (pos_ < text_.size() && std::isalnum(static_cast<unsigned char>(text_[pos_]))) ++pos_;
            const std::string_view name = text_.substr(start, pos_ - start);
            if (name == "x1") return add(Op::X1, -1, -1);
            if (name == "x2") return add(Op::X2, -1, -1);
            if (name == "pi") return number(std::numbers::pi);
            if (name == "e") return number(std::numbers::e);
            Op fn;
            if (name == "sin") {
                fn = Op::Sin;
            } else if (name == "cos") {
                fn = Op::Cos;
            } else if (name == "exp") {
                fn = Op::Exp;
            } else {
                pos_ = start;
                fail("unknown identifier '" + std::string(name) + "'");
            }
            skip_space();
            if (!accept('(')) fail("expected '(' after " + std::string(name));
            const int arg = parse_sum();
            skip_space();
            if (!accept(')')) fail("expected ')'");
            return add(fn, arg, -1);
        }
        fail("unexpected '" + std::string(1, c) + "'");
    }

    int parse_number() {
        const std::size_t start = pos_;
        while (pos_ < text_.size() && (std::isdigit(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '.')) ++pos_;
        if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
            std::size_t p = pos_ + 1;
            if (p < text_.size() && (text_[p] == '+' || text_[p] == '-')) ++p;
            if (p < text_.size() && std::isdigit(static_cast<unsigned char>(text_[p]))) {
                pos_ = p;
                while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
            }
        }
        double v = 0.0;
        const auto [ptr, ec] = std::from_chars(text_.data() + start, text_.data() + pos_, v);
        if (ec != std::errc() || ptr != text_.data() + pos_) {
            pos_ = start;
            fail("malformed number");
        }
        return number(v);
    }

    int number(double v) {
        const int id = add(Op::Number, -1, -1);
        out_.nodes_[static_cast<std::size_t>(id)].value = v;
        return id;
    }

    int add(Op op, int lhs, int rhs) {
        out_.nodes_.push_back({op, 0.0, lhs, rhs});
        return static_cast<int>(out_.nodes_.size()) - 1;
    }

    void skip_space() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }

    bool accept(char c) {
        if (pos_ < text_.size() && text_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    [[noreturn]] void fail(const std::string& msg) const {
        throw ExpressionError(msg + " at column " + std::to_string(offset_ + pos_ + 1), offset_ + pos_ + 1);
    }

    std::string_view text_;
    std::size_t offset_;
    std::size_t pos_ = 0;
    Expression& out_;
};

Expression Expression::parse(std::string_view text) {
    Expression e;
    ExpressionParser p(text, 0, e);
    e.root_ = p.parse_all();
    e.text_ = std::string(text);
    return e;
}

Expression Expression::constant(double value) {
    Expression e;
    e.nodes_.push_back({Op::Number, value, -1, -1});
    e.root_ = 0;
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", value);
    e.text_ = buf;
    return e;
}

bool Expression::is_constant() const {
    for (const Node& n : nodes_) {
        if (n.op == Op::X1 || n.op == Op::X2) return false;
    }
    return true;
}

double Expression::operator()(double x1, double x2) const {
    if (root_ < 0) return 0.0;
    return eval(root_, x1, x2);
}

double Expression::eval(int node, double x1, double x2) const {
    const Node& n = nodes_[static_cast<std::size_t>(node)];
    switch (n.op) {
        case Op::Number: return n.value;
        case Op::X1: return x1;
        case Op::X2: return x2;
        case Op::Neg: return -eval(n.lhs, x1, x2);
        case Op::Add: return eval(n.lhs, x1, x2) + eval(n.rhs, x1, x2);
        case Op::Sub: return eval(n.lhs, x1, x2) - eval(n.rhs, x1, x2);
        case Op::Mul: return eval(n.lhs, x1, x2) * eval(n.rhs, x1, x2);
        case Op::Div: return eval(n.lhs, x1, x2) / eval(n.rhs, x1, x2);
        case Op::Pow: return std::pow(eval(n.lhs, x1, x2), eval(n.rhs, x1, x2));
        case Op::Sin: return std::sin(eval(n.lhs, x1, x2));
        case Op::Cos: return std::cos(eval(n.lhs, x1, x2));
        case Op::Exp: return std::exp(eval(n.lhs, x1, x2));
    }
    return 0.0;
}

namespace {

/// Index of the top-level comma inside the outer parentheses, or npos.
std::size_t split_point(std::string_view s, std::size_t open, std::size_t close) {
    int depth = 0;
    for (std::size_t i = open + 1; i < close; ++i) {
        if (s[i] == '(') ++depth;
        if (s[i] == ')') --depth;
        if (s[i] == ',' && depth == 0) return i;
    }
    return std::string_view::npos;
}

Expression parse_part(std::string_view whole, std::size_t begin, std::size_t end) {
    Expression e;
    try {
        e = Expression::parse(whole.substr(begin, end - begin));
    } catch (const ExpressionError& err) {
        const std::size_t col = begin + err.column();
        std::string msg = err.what();
        msg = msg.substr(0, msg.rfind(" at column ")) + " at column " + std::to_string(col);
        throw ExpressionError(msg, col);
    }
    return e;
}

}  // namespace

VectorExpression VectorExpression::parse(std::string_view text) {
    std::size_t open = 0;
    while (open < text.size() && std::isspace(static_cast<unsigned char>(text[open]))) ++open;
    std::size_t close = text.size();
    while (close > open && std::isspace(static_cast<unsigned char>(text[close - 1]))) --close;
    if (open >= close || text[open] != '(') throw ExpressionError("vector expression must start with '('", open + 1);
    if (text[close - 1] != ')') throw ExpressionError("vector expression must end with ')'", close);
    --close;
    const std::size_t comma = split_point(text, open, close);
    if (comma == std::string_view::npos) {
        throw ExpressionError("vector expression needs two components separated by ','", close + 1);
    }
    return {parse_part(text, open + 1, comma), parse_part(text, comma + 1, close)};
}

}  // namespace plastafem
