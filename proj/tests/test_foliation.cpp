#include <doctest.h>

#include <cmath>
#include <random>

#include "folia/foliation.hpp"

using namespace folia;

namespace {

FlowMap flow_of(const char* name) {
    return FlowMap(std::make_shared<const VectorFieldHandle>(builtin_field(name)));
}

// The reeb leaf with first integral H crossing the vertical line at x.
Vec2 reeb_point(double H, double x) {
    // x - 1/(1-y^2) = H  =>  y^2 = 1 - 1/(x - H)
    return {x, std::sqrt(1.0 - 1.0 / (x - H))};
}

Polyline vertical(double x, double y0, double y1) { return {{x, y0}, {x, y1}}; }

}  // namespace

TEST_CASE("transversality of straight segments") {
    const FlowMap t = flow_of("translation");
    CHECK(transversality(t, vertical(0, -1, 1)) == doctest::Approx(1.0));
    CHECK(transversality(t, {{0, 0}, {1, 0}}) == 0.0);
    CHECK_THROWS_AS(check_transversal(t, Transversal{{{0, 0}, {1, 0}}}), NotTransverse);
    CHECK_NOTHROW(check_transversal(t, Transversal{vertical(0, 0, 1)}));
}

TEST_CASE("window leaves span and carry the leaf value") {
    const FlowMap reeb = flow_of("reeb");
    const Window w{-6, 6, -3, 3};
    const WindowLeaf l = trace_window_leaf(reeb, {0, 0}, w);
    CHECK(l.spans);
    const auto& H = *reeb.field().first_integral;
    for (const auto& s : l.arc.samples) CHECK(std::fabs(H.eval(s.p) + 1.0) < 1e-6);
    CHECK(leaf_distance(reeb, l, reeb_point(-1.0, 3.0)) < 1e-8);
    CHECK(leaf_distance(reeb, l, {0.0, 0.01}) > 1e-5);
    CHECK_THROWS_AS(trace_window_leaf(reeb, {7, 0}, w), InvalidInput);
}

TEST_CASE("leaf order on the translation flow") {
    const FlowMap t = flow_of("translation");
    const OrderedRegion r{{-5, 5, -5, 5}, {0, 0}, {0, 0.5}, {}};
    CHECK(leaf_compare(t, r, {0, 1}, {0, 2}) == LeafOrder::Less);
    CHECK(leaf_compare(t, r, {0, 2}, {0, 1}) == LeafOrder::Greater);
    CHECK(leaf_compare(t, r, {0, 1}, {4, 1}) == LeafOrder::SameLeaf);
    CHECK(leaf_compare(t, r, {1, -2}, {-3, -1}) == LeafOrder::Less);
    CHECK(leaf_compare(t, r, {1, -2}, {3, 3}) == LeafOrder::Less);
}

TEST_CASE("leaf order inside the reeb U-region") {
    const FlowMap reeb = flow_of("reeb");
    const Window w{-6, 6, -3, 3};
    const OrderedRegion r{w, {0, 0}, {2, 0}, {}};
    // H = 0 has vertex (1, 0); H = 1 has vertex (2, 0) and lies deeper inside.
    CHECK(leaf_compare(reeb, r, {1, 0}, {2, 0}) == LeafOrder::Less);
    CHECK(leaf_compare(reeb, r, {2, 0}, {1, 0}) == LeafOrder::Greater);
    CHECK(leaf_compare(reeb, r, {1, 0}, reeb_point(0.0, 4.0)) == LeafOrder::SameLeaf);
}

TEST_CASE("leaf order is a strict total order on sampled leaves") {
    std::mt19937_64 rng(41);
    const FlowMap saddle = flow_of("linear-saddle");
    const Window w{0.5, 4, 0.5, 4};
    LeafOrderer order(saddle, OrderedRegion{w, {2, 2}, {1.5, 1.5}, {}});
    std::uniform_real_distribution<double> u(0.6, 3.9);
    std::vector<Vec2> pts;
    for (int i = 0; i < 8; ++i) pts.push_back({u(rng), u(rng)});
    for (const Vec2 a : pts)
        for (const Vec2 b : pts) {
            const LeafOrder ab = order.compare(a, b);
            const double ca = a.x * a.y, cb = b.x * b.y;
            // Positive side is toward smaller xy.
            if (a == b) CHECK(ab == LeafOrder::SameLeaf);
            else CHECK(ab == (ca > cb ? LeafOrder::Less : LeafOrder::Greater));
            if (ab == LeafOrder::Less) CHECK(order.compare(b, a) == LeafOrder::Greater);
        }
}

TEST_CASE("separation triples") {
    const FlowMap t = flow_of("translation");
    const Window w{-5, 5, -5, 5};
    CHECK(separation_triple(t, {0, 0}, {0, 1}, {0, 2}, w) == 2);
    CHECK(separation_triple(t, {0, 1}, {3, 0}, {-2, 2}, w) == 1);
    CHECK_THROWS_AS(separation_triple(t, {0, 1}, {3, 1}, {0, 2}, w), InvalidInput);

    const FlowMap reeb = flow_of("reeb");
    const Window r{-6, 6, -3, 3};
    CHECK_FALSE(separation_triple(reeb, {0, -1}, {1, 0}, {0, 1}, r).has_value());
    CHECK(separation_triple(reeb, {1, 0}, {2, 0}, {0, 1}, r) == 1);
}

TEST_CASE("occupancy grid blocks diagonal lines without leaking") {
    OccupancyGrid g({0, 1, 0, 1}, 50);
    g.block({{0, 0}, {1, 1}});
    CHECK_FALSE(g.connected({0.9, 0.1}, {0.1, 0.9}));
    CHECK(g.connected({0.9, 0.1}, {0.7, 0.05}));
}

TEST_CASE("G-box over a translation arc") {
    const FlowMap t = flow_of("translation");
    const GArc arc = t.trace_leaf({0, 0}, 0, 2);
    const GBox box = gbox_build(t, arc, Transversal{vertical(0, 0, 1)}, Transversal{vertical(2, 0, 1)});
    CHECK(box.leaves.size() == 33);
    CHECK(box.inner_len == doctest::Approx(2.0).epsilon(1e-9));
    CHECK(box.outer_len == doctest::Approx(2.0).epsilon(1e-9));
    CHECK(box.height == doctest::Approx(1.0));
    CHECK(gbox_reentries(t, box, {1, 0.5}, 20) == 0);

    CHECK_THROWS_AS(gbox_build(t, arc, Transversal{{{0, 0}, {1, 0}}}, Transversal{vertical(2, 0, 1)}),
                    NotTransverse);
    CHECK_THROWS_AS(gbox_build(t, arc, Transversal{vertical(0, 0, 1)}, Transversal{vertical(-2, 0, 1)}),
                    Degenerate);
}

TEST_CASE("G-box lengths on the linear saddle") {
    // Leaves xy = c from x = 1 to x = 2 take exactly one time unit.
    const FlowMap s = flow_of("linear-saddle");
    const GArc arc = s.trace_leaf({1, 1}, 0, 1);
    const GBox box = gbox_build(s, arc, Transversal{vertical(1, 1, 2)}, Transversal{vertical(2, 0.4, 1.1)});
    CHECK(box.inner_len == doctest::Approx(1.0).epsilon(1e-7));
    CHECK(box.outer_len == doctest::Approx(1.0).epsilon(1e-7));
}

TEST_CASE("cross section along the translation y-axis") {
    const FlowMap t = flow_of("translation");
    std::vector<Vec2> chain;
    for (int k = -4; k <= 4; ++k) chain.push_back({0.3 * k, static_cast<double>(k)});
    const auto res = build_cross_section(t, {-5, 5, -5, 5}, chain);
    REQUIRE(std::holds_alternative<CrossSection>(res));
    const auto& cs = std::get<CrossSection>(res);
    CHECK(cs.covered_seeds.size() == 9);
    CHECK(transversality(t, cs.polyline.polyline) > 0.05);
}

TEST_CASE("cross section of reeb leaves between the arms") {
    const FlowMap reeb = flow_of("reeb");
    const Window w{-6, 12, -3, 3};
    std::vector<Vec2> chain;
    for (int k = -8; k <= 8; ++k) chain.push_back({10, 0.1 * k});
    const auto res = build_cross_section(reeb, w, chain);
    REQUIRE(std::holds_alternative<CrossSection>(res));
    // (10, y) and (10, -y) lie on one leaf, so only one half is kept.
    CHECK(std::get<CrossSection>(res).covered_seeds.size() == 9);
}

TEST_CASE("reeb chain through both arms fails with a witness") {
    const FlowMap reeb = flow_of("reeb");
    const Window w{-6, 6, -3, 3};
    std::vector<Vec2> chain;
    for (int k = -14; k <= 14; ++k) chain.push_back({0, 0.2 * k + (k == 0 ? 0.0 : 0.01)});
    const auto res = build_cross_section(reeb, w, chain);
    REQUIRE(std::holds_alternative<FailureReport>(res));
    const auto& f = std::get<FailureReport>(res);
    REQUIRE(f.witness.has_value());
    const auto& s = f.witness->seeds;
    CHECK(s[0].y < -0.9);
    CHECK(std::fabs(s[1].y) < 1.0);
    CHECK(s[2].y > 0.9);
    CHECK_FALSE(separation_triple(reeb, s[0], s[1], s[2], w).has_value());
}

TEST_CASE("perimeter chain runs counterclockwise") {
    const auto c = perimeter_chain({0, 1, 0, 1}, 4, 0.1);
    REQUIRE(c.size() == 16);
    CHECK(c[0] == Vec2{0.1, 0.1});
    CHECK(c[4] == Vec2{0.9, 0.1});
    CHECK(c[8] == Vec2{0.9, 0.9});
}

TEST_CASE("perimeter chains yield sections for parallel flows") {
    for (const char* name : {"translation", "shear-flow"}) {
        const FlowMap f = flow_of(name);
        const Window w{-10, 10, -10, 10};
        const auto res = build_cross_section(f, w, perimeter_chain(w, 16, 0.02));
        INFO(std::string(name));
        if (auto* fr = std::get_if<FailureReport>(&res)) MESSAGE(fr->reason);
        CHECK(std::holds_alternative<CrossSection>(res));
    }
    const FlowMap s = flow_of("linear-saddle");
    const Window q{0.5, 4, 0.5, 4};
    CHECK(std::holds_alternative<CrossSection>(build_cross_section(s, q, perimeter_chain(q, 16, 0.0035))));
}
