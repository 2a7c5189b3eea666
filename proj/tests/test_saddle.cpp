#include <doctest.h>

#include <cmath>

#include "folia/verify.hpp"

using namespace folia;

namespace {

const Window square4{-4, 4, -4, 4};

struct ShearSaddle {
    FlowPtr flow = std::make_shared<const FlowMap>(
        std::make_shared<const VectorFieldHandle>(builtin_field("shear-saddle")));
    FoliationOracle fs = canonical_stable_oracle("shear-saddle");
    FoliationOracle fu = canonical_unstable_oracle("shear-saddle");
    SaddleChart chart = build_saddle_chart(*flow, fs, fu, 1.0);
};

// Shared across cases; construction takes a few seconds.
const ShearSaddle& shear() {
    static const ShearSaddle s;
    return s;
}

const HomeoHandle& shear_homeo() {
    static const HomeoHandle h = saddle_conjugacy(shear().flow, shear().fs, shear().fu, shear().chart, square4);
    return h;
}

Vec2 psi_inv(Vec2 p) { return {p.x - 0.3 * std::tanh(p.y), p.y}; }

}  // namespace

TEST_CASE("saddle_conjugacy on L_A with the canonical chart is exact") {
    const FlowPtr flow = std::make_shared<const LinearSaddleFlow>();
    const auto fs = vertical_lines(LeafType::Stable);
    const auto fu = horizontal_lines(LeafType::Unstable);
    const SaddleChart c = build_saddle_chart(*flow, fs, fu, 1.0);
    const HomeoHandle h = saddle_conjugacy(flow, fs, fu, c, square4);
    const ResidualReport r = conjugacy_residual(
        h, [&](Vec2 p) { return flow->time_one(p); }, linear_la, {square4, 20, 20});
    CHECK(r.max_residual < 1e-9);
    CHECK(r.excluded == 0);
    for (const Vec2 p : GridSpec{square4, 9, 9}.points()) CHECK(dist(h.forward(p), p) < 1e-9);
    CHECK(h.provenance["quadrants"] == "closed-form flow, not classified");
}

TEST_CASE("saddle_conjugacy on shear-saddle conjugates to L_A") {
    const HomeoHandle& h = shear_homeo();
    const auto& s = shear();
    const ResidualReport r = conjugacy_residual(
        h, [&](Vec2 p) { return s.flow->time_one(p); }, linear_la, {square4, 20, 20});
    CHECK(r.max_residual < 1e-3);
    CHECK(r.excluded == 0);
    const HomeoDiagnostics d = homeo_diagnostics(h, {square4, 50, 50});
    CHECK(d.passes());
    for (const auto& q : h.provenance["quadrants"]) CHECK(q == "trivial");
}

TEST_CASE("the shear-saddle conjugacy recovers the known coordinate change") {
    // With oracles carried by psi, h is psi inverse.
    for (const Vec2 p : GridSpec{square4, 15, 15}.points()) CHECK(dist(shear_homeo().forward(p), psi_inv(p)) < 1e-6);
}

TEST_CASE("each open quadrant of the cross maps into one open quadrant") {
    const auto& s = shear();
    const HomeoHandle& h = shear_homeo();
    for (int i = 0; i < 4; ++i) {
        const Vec2 seed = s.chart.quadrant_seeds[static_cast<std::size_t>(i)];
        const Vec2 img = h.forward(seed);
        for (double t : {-1.5, -0.5, 0.5, 1.5}) {
            const Vec2 p = s.flow->integrate(seed, t);
            const Vec2 hp = h.forward(p);
            CHECK((hp.x > 0) == (img.x > 0));
            CHECK((hp.y > 0) == (img.y > 0));
        }
    }
}

TEST_CASE("the conjugacy is continuous across the separatrices") {
    const HomeoHandle& h = shear_homeo();
    for (double x : {-3.0, -1.0, 0.5, 2.0}) {
        const Vec2 on = h.forward({x + 0.3 * std::tanh(0.0), 0.0});
        for (double e : {1e-4, -1e-4}) CHECK(dist(h.forward({x, e}), on) < 1e-3);
    }
    CHECK(dist(h.forward({0, 0}), {0, 0}) < 1e-9);
}

TEST_CASE("canonical oracles are invariant under the time-one map") {
    const auto& s = shear();
    const std::vector<Vec2> pts{{0.5, 0.5}, {-1, 0.3}, {1.2, -0.7}, {-0.4, -1.1}, {0.1, 1.5}};
    CHECK(oracle_invariance_error(*s.flow, s.fs, pts) < 1e-4);
    CHECK(oracle_invariance_error(*s.flow, s.fu, pts) < 1e-4);
}

TEST_CASE("the experimental Lyapunov oracle finds the L_A eigendirections") {
    const FlowPtr flow = std::make_shared<const LinearSaddleFlow>();
    const FoliationOracle fs = lyapunov_oracle(flow, LeafType::Stable);
    const FoliationOracle fu = lyapunov_oracle(flow, LeafType::Unstable);
    CHECK(fs.experimental);
    const Vec2 a = fs.at({0.7, 0.2}, 0.5), b = fu.at({0.7, 0.2}, 0.5);
    CHECK(std::fabs(a.x - 0.7) < 1e-3);
    CHECK(std::fabs(b.y - 0.2) < 1e-3);
}
