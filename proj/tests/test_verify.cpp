#include <doctest.h>

#include <cmath>

#include "folia/verify.hpp"

using namespace folia;

namespace {

const Window unit{-1, 1, -1, 1};

HomeoHandle folded() {
    HomeoHandle h;
    h.forward = [](Vec2 p) { return Vec2{p.x, std::fabs(p.y)}; };
    h.inverse = [](Vec2 p) { return p; };
    h.window = unit;
    return h;
}

}  // namespace

TEST_CASE("grid samples include the window corners") {
    const GridSpec g{{-2, 3, 1, 4}, 6, 4};
    const auto pts = g.points();
    CHECK(pts.size() == 24);
    CHECK(dist(pts.front(), {-2, 1}) == 0);
    CHECK(dist(pts.back(), {3, 4}) == 0);
}

TEST_CASE("identity residual and diagnostics") {
    const HomeoHandle id = identity_homeo(unit);
    const ResidualReport r = conjugacy_residual(id, linear_la, linear_la, {unit, 20, 20});
    CHECK(r.max_residual == 0);
    CHECK(r.n_samples == 400);
    const HomeoDiagnostics d = homeo_diagnostics(id, {unit, 50, 50});
    CHECK(d.round_trip_max == 0);
    CHECK(d.collisions == 0);
    CHECK(d.single_orientation());
    CHECK(d.positive == 49 * 49);
    CHECK(d.passes());
}

TEST_CASE("a folded map is caught by the collision count") {
    const HomeoDiagnostics d = homeo_diagnostics(folded(), {unit, 50, 50});
    CHECK(d.collisions > 0);
    CHECK_FALSE(d.single_orientation());
    CHECK_FALSE(d.passes());
}

TEST_CASE("residual report bookkeeping") {
    // h = identity, f = L_A, g = identity: residual |L_A p - p|.
    const GridSpec g{unit, 13, 7};
    const ResidualReport r = conjugacy_residual(identity_homeo(unit), linear_la, [](Vec2 p) { return p; }, g);
    CHECK(r.max_residual >= r.mean_residual);
    CHECK(r.samples.size() == r.n_samples);
    CHECK(std::fabs(dist(linear_la(r.worst_point), r.worst_point) - r.max_residual) == 0);
    double worst = 0;
    for (const Vec2 p : g.points()) worst = std::max(worst, dist(linear_la(p), p));
    CHECK(worst == r.max_residual);
}

TEST_CASE("evaluation failures are excluded, not fatal") {
    HomeoHandle h = identity_homeo(unit);
    h.forward = [](Vec2 p) {
        if (p.x > 0.5) throw DomainError("outside");
        return p;
    };
    const ResidualReport r = conjugacy_residual(h, [](Vec2 p) { return p; }, [](Vec2 p) { return p; }, {unit, 5, 5});
    CHECK(r.excluded == 5);
    CHECK(r.n_samples == 20);
    CHECK_THROWS_AS(conjugacy_residual(h, linear_la, linear_la, {{1, 0, 0, 1}, 3, 3}), InvalidInput);
}
