#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "folia/errors.hpp"
#include "folia/flow.hpp"
#include "folia/foliation.hpp"
#include "folia/geometry.hpp"

namespace folia {

using MapFn = std::function<Vec2(Vec2)>;
using FlowPtr = std::shared_ptr<const PlaneFlow>;

struct HomeoHandle {
    MapFn forward;
    MapFn inverse;
    Window window;
    nlohmann::json provenance = nlohmann::json::object();

    Vec2 operator()(Vec2 p) const { return forward(p); }
};

HomeoHandle identity_homeo(const Window& window);

// L_A = diag(2, 1/2).
constexpr Vec2 linear_la(Vec2 p) { return {2.0 * p.x, 0.5 * p.y}; }
constexpr Vec2 linear_la_inv(Vec2 p) { return {0.5 * p.x, 2.0 * p.y}; }

// Closed-form flow of V = ln2 (x, -y); its time-one map is L_A.
class LinearSaddleFlow final : public PlaneFlow {
public:
    Vec2 velocity(Vec2 p) const override;
    Vec2 integrate(Vec2 p, double t) const override;
};

// ---------------------------------------------------------------------------
// Trivialization

// A section of the flow with a parametrization sigma.
struct SectionCurve {
    Polyline poly;                          // sampled section; empty when `level` alone brackets crossings
    std::function<double(Vec2)> level;      // zero on the section, changes sign across it
    std::function<double(Vec2)> sigma;      // parameter of a section point
    std::function<Vec2(double)> point;      // inverse of sigma
};

// Sigma is arc length from the first vertex.
SectionCurve arclength_section(const Polyline& poly);
// Sigma is a caller-supplied function, strictly monotone along the polyline.
SectionCurve section_with_sigma(const Polyline& poly, std::function<double(Vec2)> sigma);

struct TrivializeOptions {
    double t_max = 200.0;  // crossing search horizon in each direction
};

struct SectionHit {
    double t = 0.0;  // phi^t(q) = p
    Vec2 q;
    double sigma = 0.0;
};

// The unique (q, t) with q on the section and phi^t(q) = p.
SectionHit section_coordinates(const PlaneFlow& flow, const SectionCurve& section, Vec2 p,
                               const TrivializeOptions& opts = {});

// h(p) = (t, sigma(q)); h^-1(t, s) = phi^t(sigma^-1(s)).
HomeoHandle trivialize(FlowPtr flow, SectionCurve section, const Window& window,
                       const TrivializeOptions& opts = {});
HomeoHandle trivialize(FlowPtr flow, const CrossSection& section, const Window& window,
                       std::function<double(Vec2)> sigma = {}, const TrivializeOptions& opts = {});

// Cross-section assembled on the window padded by pad * diameter, then trivialize over the window.
struct WindowTrivialization {
    SectionResult section;
    std::optional<HomeoHandle> homeo;  // empty when the section failed
};
WindowTrivialization trivialize_window(std::shared_ptr<const FlowMap> flow, const Window& window, double pad = 0.05,
                                       const TrivializeOptions& opts = {});

// ---------------------------------------------------------------------------
// Fundamental domains

inline double point_distance(double a, double b) { return std::fabs(a - b); }
inline double point_distance(Vec2 a, Vec2 b) { return dist(a, b); }
inline double point_size(double a) { return std::fabs(a); }
inline double point_size(Vec2 a) { return norm(a); }

template <class P>
struct FundamentalDomain {
    std::function<bool(const P&)> contains;  // closed domain D
    std::function<bool(const P&)> on_plus;   // gamma_plus = g(gamma_minus)
};

template <class P>
struct ExtendSpec {
    std::function<P(const P&)> g, g_inv;    // source map
    std::function<P(const P&)> gt, gt_inv;  // target map
    FundamentalDomain<P> domain, target;
    std::function<P(const P&)> h0, h0_inv;  // D -> D_t
    std::vector<P> minus_samples;           // points of gamma_minus for the arc check
    int k_max = 64;
    double arc_tol = 1e-9;
};

// h(g^k(x)) = g_t^k(h0(x)) for x in D.
template <class P>
class FundamentalExtension {
public:
    explicit FundamentalExtension(ExtendSpec<P> spec) : s_(std::move(spec)) {
        for (const P& x : s_.minus_samples) {
            const P a = s_.h0(s_.g(x));
            const P b = s_.gt(s_.h0(x));
            if (point_distance(a, b) > s_.arc_tol * std::max(1.0, point_size(b)))
                throw MismatchedArcs("h0 does not carry g(gamma_minus) to g_t(h0(gamma_minus))");
        }
    }

    P forward(const P& p) const {
        return extend(p, s_.g, s_.g_inv, s_.gt, s_.gt_inv, s_.domain, s_.h0);
    }
    P inverse(const P& p) const {
        return extend(p, s_.gt, s_.gt_inv, s_.g, s_.g_inv, s_.target, s_.h0_inv);
    }
    // The k with g^-k(p) in D minus gamma_plus.
    int level(const P& p) const { return locate(p, s_.g, s_.g_inv, s_.domain).first; }

    const ExtendSpec<P>& spec() const { return s_; }

private:
    using Fn = std::function<P(const P&)>;

    std::pair<int, P> locate(const P& p, const Fn& g, const Fn& g_inv, const FundamentalDomain<P>& d) const {
        auto inside = [&](const P& q) { return d.contains(q) && !d.on_plus(q); };
        if (inside(p)) return {0, p};
        P back = p, fwd = p;
        for (int k = 1; k <= s_.k_max; ++k) {
            back = g_inv(back);
            if (inside(back)) return {k, back};
            fwd = g(fwd);
            if (inside(fwd)) return {-k, fwd};
        }
        throw NotInSaturation("no iterate within k_max lands in the fundamental domain");
    }

    P extend(const P& p, const Fn& g, const Fn& g_inv, const Fn& gt, const Fn& gt_inv,
             const FundamentalDomain<P>& d, const Fn& h0) const {
        const auto [k, q] = locate(p, g, g_inv, d);
        auto push = [&](P v, int n) {
            for (int i = 0; i < n; ++i) v = gt(v);
            for (int i = 0; i > n; --i) v = gt_inv(v);
            return v;
        };
        const P out = push(h0(q), k);
        // On gamma_minus the point also has the representative g(q) on gamma_plus.
        const P gq = g(q);
        if (d.on_plus(gq)) {
            const P alt = push(h0(gq), k - 1);
            if (point_distance(alt, out) > s_.arc_tol * std::max(1.0, point_size(out)))
                throw MismatchedArcs("extension disagrees on gamma_minus");
        }
        return out;
    }

    ExtendSpec<P> s_;
};

template <class P>
FundamentalExtension<P> fundamental_extend(ExtendSpec<P> spec) {
    return FundamentalExtension<P>(std::move(spec));
}

HomeoHandle to_homeo(const FundamentalExtension<Vec2>& ext, const Window& window);

// ---------------------------------------------------------------------------
// Saddle case

enum class LeafType { Stable, Unstable };
const char* to_string(LeafType t);

struct FoliationOracle {
    LeafType type = LeafType::Stable;
    std::function<Vec2(Vec2, double)> leaf;  // point at parameter s on the leaf through p; leaf(p, 0) = p
    bool experimental = false;
    std::string name;

    Vec2 at(Vec2 p, double s) const { return leaf(p, s); }
    Polyline leaf_through(Vec2 p, double s0, double s1, int n = 64) const;
};

FoliationOracle vertical_lines(LeafType type);
FoliationOracle horizontal_lines(LeafType type);
// Leaves of `base` carried by psi.
FoliationOracle pushforward(const FoliationOracle& base, MapFn psi, MapFn psi_inv);
// Experimental: integrates the most contracted (stable) or most expanded
// (unstable) direction of D f^n.
FoliationOracle lyapunov_oracle(FlowPtr flow, LeafType type, int n = 6);

// Largest Hausdorff distance between f(leaf through p) and the leaf through f(p).
double oracle_invariance_error(const PlaneFlow& flow, const FoliationOracle& oracle,
                               const std::vector<Vec2>& points, double half_length = 0.5);

// Intersection of the stable leaf through a with the unstable leaf through b,
// as parameters on each.
struct LeafIntersection {
    Vec2 point;
    double s_stable = 0.0;
    double s_unstable = 0.0;
};
LeafIntersection intersect_leaves(const FoliationOracle& fs, Vec2 a, const FoliationOracle& fu, Vec2 b);

// Damped Newton on f(p) - p with a finite-difference Jacobian.
Vec2 find_fixed_point(const MapFn& f, Vec2 guess = {0, 0}, double tol = 1e-12);

struct SaddleChart {
    Vec2 fixed_point;
    double scale = 1.0;
    // Stable +, unstable +, stable -, unstable -, as oracle parameter ranges from the fixed point.
    std::array<GArc, 4> separatrices;
    std::array<Vec2, 4> q;      // corners of R
    std::array<Vec2, 4> p;      // edge crossings with the cross
    std::array<Polyline, 4> edges;   // E^u_1 = [q1,q2], E^s_1 = [q2,q3], E^u_2 = [q3,q4], E^s_2 = [q4,q1]
    std::array<Polyline, 4> g_arcs;  // [q_i, f(q_i)] along the flow
    Polyline octagon;                // closed boundary of V0, first vertex not repeated
    std::array<Vec2, 4> quadrant_seeds;  // q_i, one per open quadrant

    // Closed region: boundary points count as inside.
    bool in_v0(Vec2 x) const;
};

SaddleChart build_saddle_chart(const PlaneFlow& flow, const FoliationOracle& fs, const FoliationOracle& fu,
                               double scale, std::optional<Vec2> guess = std::nullopt);

// L_A's region V0 from the canonical chart.
bool canonical_v0_contains(Vec2 x);

struct SaddleOptions {
    bool check_quadrants = true;  // classify each quadrant before construction
    double quadrant_extent = 4.0; // quadrant window reaches this multiple of the corner offset
    int quadrant_resolution = 128;
    int g_samples = 256;          // table size along each G-arc
};

HomeoHandle saddle_conjugacy(FlowPtr flow, const FoliationOracle& fs, const FoliationOracle& fu,
                             const SaddleChart& chart, const Window& window, const SaddleOptions& opts = {});

// Canonical oracles for the registry saddles.
FoliationOracle canonical_stable_oracle(const std::string& field_name);
FoliationOracle canonical_unstable_oracle(const std::string& field_name);

}  // namespace folia
