#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "plastafem/error.hpp"
#include "plastafem/tensor.hpp"

namespace plastafem {

/// Syntax error in an expression; column is 1-based.
class ExpressionError : public Error {
public:
    ExpressionError(const std::string& what, std::size_t column) : Error(what), column_(column) {}
    std::size_t column() const { return column_; }

private:
    std::size_t column_;
};

/// Scalar expression over x1, x2 with + - * / ^, sin, cos, exp and the
/// constants pi and e. ^ binds tighter than unary minus and is right
/// associative.
class Expression {
public:
    static Expression parse(std::string_view text);
    static Expression constant(double value);

    double operator()(double x1, double x2) const;
    double operator()(Vec2 x) const { return (*this)(x.x, x.y); }
    const std::string& text() const { return text_; }
    bool is_constant() const;

private:
    enum class Op { Number, X1, X2, Neg, Add, Sub, Mul, Div, Pow, Sin, Cos, Exp };
    struct Node {
        Op op;
        double value = 0.0;
        int lhs = -1;
        int rhs = -1;
    };
    friend class ExpressionParser;

    double eval(int node, double x1, double x2) const;

    std::vector<Node> nodes_;
    int root_ = -1;
    std::string text_;
};

/// "(e1, e2)" with two scalar expressions.
struct VectorExpression {
    Expression first;
    Expression second;

    static VectorExpression parse(std::string_view text);
    Vec2 operator()(Vec2 x) const { return {first(x), second(x)}; }
    std::string text() const { return "(" + first.text() + ", " + second.text() + ")"; }
};

}  // namespace plastafem
