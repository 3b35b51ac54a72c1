#pragma once

#include "flift/linalg.hpp"

#include <memory>
#include <string>

namespace flift {

/// Expression tree over {+, -, *, /, min, max, abs, tanh, const, x_i},
/// parsed from infix text ("0.15 + 0.1/(1 + x1*x1)"). Serializable and
/// language-agnostic; used for custom volatility entries and payoffs.
class Expr {
public:
    /// Parse an infix expression. Variables are x1..xd (or plain x == x1).
    static Expr parse(const std::string& text);

    double eval(const Vec& x) const;

    /// Symbolic derivative with respect to x_{var} (0-based). min/max/abs
    /// differentiate piecewise; the kink itself takes the left branch.
    Expr derivative(int var) const;

    /// Highest variable index referenced, plus one (0 for constants).
    int min_dimension() const;

    std::string to_string() const;

    struct Node;
    explicit Expr(std::shared_ptr<const Node> root) : root_(std::move(root)) {}

private:
    std::shared_ptr<const Node> root_;
};

} // namespace flift
