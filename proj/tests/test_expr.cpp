#include <doctest.h>

#include <cmath>
#include <random>
#include <string>

#include "folia/errors.hpp"
#include "folia/expr.hpp"
#include "folia/field.hpp"

using namespace folia;

namespace {

// Random well-formed source text over the closed grammar.
std::string random_expr(std::mt19937_64& rng, int depth) {
    std::uniform_int_distribution<int> pick(0, depth <= 0 ? 2 : 11);
    std::uniform_real_distribution<double> num(0.1, 3.0);
    switch (pick(rng)) {
        case 0: return "x";
        case 1: return "y";
        case 2: return std::to_string(num(rng));
        case 3: return random_expr(rng, depth - 1) + " + " + random_expr(rng, depth - 1);
        case 4: return random_expr(rng, depth - 1) + " - " + random_expr(rng, depth - 1);
        case 5: return random_expr(rng, depth - 1) + "*" + random_expr(rng, depth - 1);
        case 6: return "(" + random_expr(rng, depth - 1) + ")/(2 + " + random_expr(rng, depth - 1) + "^2)";
        case 7: return "-" + random_expr(rng, depth - 1);
        case 8: return "(" + random_expr(rng, depth - 1) + ")^2";
        case 9: return "sin(" + random_expr(rng, depth - 1) + ")";
        case 10: return "tanh(" + random_expr(rng, depth - 1) + ")*sech(" + random_expr(rng, depth - 1) + ")";
        default: return "exp(cos(" + random_expr(rng, depth - 1) + "))";
    }
}

// Either the value or NaN when evaluation raises a domain error.
double eval_or_nan(const Expr& e, Vec2 p) {
    try {
        return e.eval(p);
    } catch (const DomainError&) {
        return std::nan("");
    }
}

bool same(double a, double b) { return (std::isnan(a) && std::isnan(b)) || a == b; }

}  // namespace

TEST_CASE("field examples evaluate by hand substitution") {
    CHECK(parse_field("(1, 0)").eval({7, -3}) == Vec2{1, 0});
    const auto reeb = parse_field("(2*y, (1-y^2)^2)");
    CHECK(reeb.eval({0, 1}) == Vec2{2, 0});
    CHECK(reeb.eval({3, 0}) == Vec2{0, 1});
    const auto saddle = builtin_field("linear-saddle");
    const Vec2 v = eval_field(saddle, {1, 1});
    CHECK(v.x == doctest::Approx(std::log(2.0)).epsilon(1e-15));
    CHECK(v.y == doctest::Approx(-std::log(2.0)).epsilon(1e-15));
}

TEST_CASE("syntax errors carry byte offsets") {
    try {
        parse_field("(x,");
        FAIL("expected SyntaxError");
    } catch (const SyntaxError& e) {
        CHECK(e.offset() == 3);
    }
    try {
        parse_field("(x, y))");
        FAIL("expected SyntaxError");
    } catch (const SyntaxError& e) {
        CHECK(e.offset() == 6);
    }
    try {
        parse_field("(x * , y)");
        FAIL("expected SyntaxError");
    } catch (const SyntaxError& e) {
        CHECK(e.offset() == 5);
    }
    CHECK_THROWS_AS(parse_field("x, y"), SyntaxError);
    CHECK_THROWS_AS(parse_field("(sin x, y)"), SyntaxError);
}

TEST_CASE("unknown identifiers are rejected") {
    CHECK_THROWS_AS(parse_field("(z, 1)"), UnknownIdentifier);
    CHECK_THROWS_AS(parse_field("(pi*x, 1)"), UnknownIdentifier);
    CHECK_THROWS_AS(parse_field("(log(x), 1)"), UnknownIdentifier);
    CHECK_THROWS_AS(parse_field("(ln2*x, 1)"), UnknownIdentifier);
}

TEST_CASE("operator precedence and associativity") {
    auto val = [](const char* s, Vec2 p = {3, 2}) { return Expr::parse(s).eval(p); };
    CHECK(val("-x^2") == -9.0);
    CHECK(val("2^3^2") == 512.0);
    CHECK(val("1 - 2 - 3") == -4.0);
    CHECK(val("8/2/2") == 2.0);
    CHECK(val("2*3 + 4*5") == 26.0);
    CHECK(val("2^-1") == 0.5);
    CHECK(val("-2^2") == -4.0);
    CHECK(val("x*y^2") == 12.0);
    CHECK(val("1.5e1 + .5") == 15.5);
    CHECK(val("x^0.5") == doctest::Approx(std::sqrt(3.0)));
}

TEST_CASE("domain errors") {
    CHECK_THROWS_AS(Expr::parse("1/x").eval({0, 1}), DomainError);
    CHECK_THROWS_AS(Expr::parse("ln(x)").eval({-1, 1}), DomainError);
    CHECK_THROWS_AS(Expr::parse("ln(x)").eval({0, 1}), DomainError);
    CHECK_THROWS_AS(Expr::parse("x^-2").eval({0, 1}), DomainError);
    CHECK(Expr::parse("ln(x)").eval({1, 0}) == 0.0);
}

TEST_CASE("sech stays finite for large arguments") {
    const auto e = Expr::parse("sech(x)");
    CHECK(e.eval({800, 0}) == 0.0);
    CHECK(e.eval({0, 0}) == 1.0);
    CHECK(e.eval({2, 0}) == doctest::Approx(1.0 / std::cosh(2.0)).epsilon(1e-15));
}

TEST_CASE("print then parse evaluates identically on random expressions") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> coord(-3.0, 3.0);
    for (int k = 0; k < 200; ++k) {
        const std::string src = random_expr(rng, 4);
        const Expr a = Expr::parse(src);
        const Expr b = Expr::parse(a.print());
        const Expr c = Expr::parse(b.print());
        CHECK(b.print() == c.print());
        for (int i = 0; i < 100; ++i) {
            const Vec2 p{coord(rng), coord(rng)};
            REQUIRE_MESSAGE(same(eval_or_nan(a, p), eval_or_nan(b, p)), src);
        }
    }
}

TEST_CASE("built-in corpus round-trips through the printer") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> coord(-0.9, 0.9);
    for (const auto& name : builtin_names()) {
        const auto h = builtin_field(name);
        const auto again = parse_field(h.expr.print());
        for (int i = 0; i < 100; ++i) {
            const Vec2 p{coord(rng) * 5, coord(rng)};
            CHECK(h.expr.eval(p) == again.eval(p));
        }
    }
}

TEST_CASE("registry holds exactly the five named flows") {
    const auto& names = builtin_names();
    REQUIRE(names.size() == 5);
    for (const char* n : {"translation", "reeb", "linear-saddle", "shear-saddle", "shear-flow"})
        CHECK(is_builtin(n));
    CHECK_THROWS_AS(builtin_field("nope"), InvalidInput);
    CHECK(builtin_field("linear-saddle").fixed_points->size() == 1);
    CHECK(builtin_field("shear-saddle").ground_truth.has_value());
    CHECK(builtin_field("reeb").fixed_points->empty());
}

TEST_CASE("reeb first integral has zero derivative along the field") {
    // grad H = (1, -2y/(1-y^2)^2); grad H . (2y, (1-y^2)^2) = 2y - 2y.
    const auto h = builtin_field("reeb");
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> ux(-15, 15), uy(-0.95, 0.95);
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const Vec2 p{ux(rng), uy(rng)};
        const double w = 1.0 - p.y * p.y;
        const Vec2 grad{1.0, -2.0 * p.y / (w * w)};
        worst = std::max(worst, std::fabs(dot(grad, h.eval(p))));
    }
    CHECK(worst < 1e-9);
}

TEST_CASE("shear-saddle equals the chain-rule push-forward of the linear saddle") {
    // V(psi(q)) = Dpsi(q) W(q) with psi(x,y) = (x + 0.3 tanh y, y), W = ln2 (x, -y).
    const auto h = builtin_field("shear-saddle");
    const double l2 = std::log(2.0);
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-4, 4);
    for (int i = 0; i < 200; ++i) {
        const Vec2 q{u(rng), u(rng)};
        const double s = 1.0 / std::cosh(q.y);
        const Vec2 w{l2 * q.x, -l2 * q.y};
        const Vec2 expect{w.x + 0.3 * s * s * w.y, w.y};
        const Vec2 at{q.x + 0.3 * std::tanh(q.y), q.y};
        const Vec2 got = h.eval(at);
        CHECK(got.x == doctest::Approx(expect.x).epsilon(1e-13));
        CHECK(got.y == doctest::Approx(expect.y).epsilon(1e-13));
    }
}

TEST_CASE("declared fixed-point-free fields do not vanish on their windows") {
    for (const char* n : {"translation", "reeb", "shear-flow"}) {
        const auto h = builtin_field(n);
        const Window w = *h.window;
        double least = 1e300;
        for (int j = 0; j <= 200; ++j)
            for (int i = 0; i <= 200; ++i) {
                const Vec2 p{w.xmin + w.width() * i / 200.0, w.ymin + w.height() * j / 200.0};
                least = std::min(least, norm(h.eval(p)));
            }
        CHECK(least > 0.0);
    }
}
