#pragma once

#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "folia/geometry.hpp"

namespace folia {

// Scalar expression in x and y. Immutable; copies share the compiled program.
class Expr {
public:
    Expr();

    static Expr parse(std::string_view src);
    static Expr constant(double v);

    double eval(Vec2 p) const;
    double eval(double x, double y) const { return eval(Vec2{x, y}); }
    std::string print() const;

    struct Node;
    struct Program;

private:
    friend class ExprParser;
    explicit Expr(std::shared_ptr<const Node> root);

    std::shared_ptr<const Node> root_;
    std::shared_ptr<const Program> program_;
};

class FieldExpr {
public:
    FieldExpr() = default;
    FieldExpr(Expr vx, Expr vy) : vx_(std::move(vx)), vy_(std::move(vy)) {}

    Vec2 eval(Vec2 p) const { return {vx_.eval(p), vy_.eval(p)}; }
    std::string print() const;
    const Expr& component_x() const { return vx_; }
    const Expr& component_y() const { return vy_; }

private:
    Expr vx_;
    Expr vy_;
};

// Grammar: "(" expr "," expr ")". Offsets in errors are bytes into src.
FieldExpr parse_field(std::string_view src);

}  // namespace folia
