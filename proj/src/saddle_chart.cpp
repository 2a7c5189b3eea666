#include <algorithm>
#include <cmath>

#include "folia/conjugacy.hpp"
#include "folia/field.hpp"

namespace folia {

const char* to_string(LeafType t) { return t == LeafType::Stable ? "stable" : "unstable"; }

Polyline FoliationOracle::leaf_through(Vec2 p, double s0, double s1, int n) const {
    Polyline out;
    out.reserve(static_cast<std::size_t>(n) + 1);
    for (int i = 0; i <= n; ++i) out.push_back(leaf(p, s0 + (s1 - s0) * i / n));
    return out;
}

FoliationOracle vertical_lines(LeafType type) {
    return {type, [](Vec2 p, double s) { return Vec2{p.x, p.y + s}; }, false, "vertical lines"};
}

FoliationOracle horizontal_lines(LeafType type) {
    return {type, [](Vec2 p, double s) { return Vec2{p.x + s, p.y}; }, false, "horizontal lines"};
}

FoliationOracle pushforward(const FoliationOracle& base, MapFn psi, MapFn psi_inv) {
    FoliationOracle o;
    o.type = base.type;
    o.experimental = base.experimental;
    o.name = "pushforward of " + base.name;
    auto leaf = base.leaf;
    o.leaf = [leaf, psi, psi_inv](Vec2 p, double s) { return psi(leaf(psi_inv(p), s)); };
    return o;
}

namespace {

// Unit direction least stretched by D(phi^t) at p.
Vec2 contracted_direction(const PlaneFlow& flow, Vec2 p, double t) {
    const double h = 1e-6 * std::max(1.0, norm(p));
    const Vec2 cx = (flow.integrate(p + Vec2{h, 0}, t) - flow.integrate(p - Vec2{h, 0}, t)) / (2 * h);
    const Vec2 cy = (flow.integrate(p + Vec2{0, h}, t) - flow.integrate(p - Vec2{0, h}, t)) / (2 * h);
    // Smallest eigenvector of J^T J.
    const double a = dot(cx, cx), b = dot(cx, cy), c = dot(cy, cy);
    const double lmin = 0.5 * (a + c) - std::sqrt(0.25 * (a - c) * (a - c) + b * b);
    Vec2 d = std::fabs(b) > 1e-300 ? Vec2{b, lmin - a} : (a <= c ? Vec2{1, 0} : Vec2{0, 1});
    return d / norm(d);
}

}  // namespace

FoliationOracle lyapunov_oracle(FlowPtr flow, LeafType type, int n) {
    FoliationOracle o;
    o.type = type;
    o.experimental = true;
    o.name = std::string("lyapunov ") + to_string(type);
    const double t = type == LeafType::Stable ? n : -n;
    auto field = [flow, t, type](Vec2 p, Vec2 prev) {
        Vec2 d = contracted_direction(*flow, p, t);
        if (prev.x == 0.0 && prev.y == 0.0) {
            const double key = type == LeafType::Stable ? d.y : d.x;
            if (key < 0.0) d = -d;
        } else if (dot(d, prev) < 0.0) {
            d = -d;
        }
        return d;
    };
    o.leaf = [field](Vec2 p, double s) {
        const int steps = std::max(1, static_cast<int>(std::ceil(std::fabs(s) / 0.02)));
        const double h = s / steps;
        Vec2 x = p, dir = field(p, {0, 0});
        for (int i = 0; i < steps; ++i) {
            const Vec2 k1 = field(x, dir);
            const Vec2 k2 = field(x + k1 * (0.5 * h), k1);
            x += k2 * h;
            dir = k2;
        }
        return x;
    };
    return o;
}

double oracle_invariance_error(const PlaneFlow& flow, const FoliationOracle& oracle,
                               const std::vector<Vec2>& points, double half_length) {
    double worst = 0.0;
    for (const Vec2 p : points) {
        const Polyline target = oracle.leaf_through(flow.time_one(p), -8 * half_length, 8 * half_length, 1024);
        for (const Vec2 x : oracle.leaf_through(p, -half_length, half_length, 32))
            worst = std::max(worst, project_to_polyline(flow.time_one(x), target).distance);
    }
    return worst;
}

LeafIntersection intersect_leaves(const FoliationOracle& fs, Vec2 a, const FoliationOracle& fu, Vec2 b) {
    auto F = [&](double s, double u) { return fs.at(a, s) - fu.at(b, u); };
    double s = 0.0, u = 0.0;
    Vec2 r = F(s, u);
    for (int it = 0; it < 80; ++it) {
        const double scale = std::max(1.0, norm(fs.at(a, s)));
        if (norm(r) <= 1e-13 * scale) return {fs.at(a, s), s, u};
        const double h = 1e-7 * std::max(1.0, std::max(std::fabs(s), std::fabs(u)));
        const Vec2 ds = (fs.at(a, s + h) - fs.at(a, s - h)) / (2 * h);
        const Vec2 du = (fu.at(b, u - h) - fu.at(b, u + h)) / (2 * h);
        const double det = cross(ds, du);
        if (std::fabs(det) < 1e-14) break;
        const double step_s = -cross(r, du) / det;
        const double step_u = -cross(ds, r) / det;
        double lambda = 1.0;
        for (int k = 0; k < 30; ++k, lambda *= 0.5) {
            const Vec2 rn = F(s + lambda * step_s, u + lambda * step_u);
            if (norm(rn) < norm(r) || k == 29) {
                s += lambda * step_s;
                u += lambda * step_u;
                r = rn;
                break;
            }
        }
    }
    if (norm(r) <= 1e-9 * std::max(1.0, norm(fs.at(a, s)))) return {fs.at(a, s), s, u};
    throw ProductStructureFailure("stable and unstable leaves do not meet");
}

Vec2 find_fixed_point(const MapFn& f, Vec2 guess, double tol) {
    Vec2 p = guess;
    try {
        Vec2 r = f(p) - p;
        for (int it = 0; it < 100; ++it) {
            if (norm(r) <= tol * std::max(1.0, norm(p))) return p;
            const double h = 1e-6 * std::max(1.0, norm(p));
            const Vec2 cx = (f(p + Vec2{h, 0}) - f(p - Vec2{h, 0})) / (2 * h) - Vec2{1, 0};
            const Vec2 cy = (f(p + Vec2{0, h}) - f(p - Vec2{0, h})) / (2 * h) - Vec2{0, 1};
            const double det = cross(cx, cy);
            if (std::fabs(det) < 1e-10) throw NoFixedPoint("f - id has a singular Jacobian");
            const Vec2 step{-cross(r, cy) / det, -cross(cx, r) / det};
            double lambda = 1.0;
            for (int k = 0; k < 40; ++k, lambda *= 0.5) {
                const Vec2 pn = p + step * lambda;
                const Vec2 rn = f(pn) - pn;
                if (norm(rn) < norm(r) || k == 39) {
                    p = pn;
                    r = rn;
                    break;
                }
            }
            if (norm(p) > 1e6) break;
        }
    } catch (const IntegrationError&) {
    }
    throw NoFixedPoint("Newton iteration on f(p) - p did not converge");
}

namespace {

void append(Polyline& ring, const Polyline& part, bool reversed) {
    if (reversed) {
        for (auto it = part.rbegin() + 1; it != part.rend(); ++it) ring.push_back(*it);
    } else {
        for (auto it = part.begin() + 1; it != part.end(); ++it) ring.push_back(*it);
    }
}

}  // namespace

SaddleChart build_saddle_chart(const PlaneFlow& flow, const FoliationOracle& fs, const FoliationOracle& fu,
                               double scale, std::optional<Vec2> guess) {
    if (!(scale > 0.0)) throw InvalidInput("chart scale must be positive");
    if (fs.type != LeafType::Stable || fu.type != LeafType::Unstable)
        throw InvalidInput("oracles must be stable and unstable respectively");
    const MapFn f = [&flow](Vec2 x) { return flow.time_one(x); };

    SaddleChart c;
    c.scale = scale;
    c.fixed_point = find_fixed_point(f, guess.value_or(Vec2{0, 0}));
    const Vec2 o = c.fixed_point;

    c.p[0] = fs.at(o, scale);
    c.p[1] = fu.at(o, scale);
    c.p[2] = fs.at(o, -scale);
    c.p[3] = fu.at(o, -scale);
    const LeafIntersection i1 = intersect_leaves(fs, c.p[3], fu, c.p[0]);
    const LeafIntersection i2 = intersect_leaves(fs, c.p[1], fu, c.p[0]);
    const LeafIntersection i3 = intersect_leaves(fs, c.p[1], fu, c.p[2]);
    const LeafIntersection i4 = intersect_leaves(fs, c.p[3], fu, c.p[2]);
    c.q = {i1.point, i2.point, i3.point, i4.point};
    c.quadrant_seeds = c.q;

    constexpr int n = 64;
    c.edges[0] = fu.leaf_through(c.p[0], i1.s_unstable, i2.s_unstable, n);
    c.edges[1] = fs.leaf_through(c.p[1], i2.s_stable, i3.s_stable, n);
    c.edges[2] = fu.leaf_through(c.p[2], i3.s_unstable, i4.s_unstable, n);
    c.edges[3] = fs.leaf_through(c.p[3], i4.s_stable, i1.s_stable, n);
    // Pin edge ends to the corners.
    c.edges[0].front() = c.q[0], c.edges[0].back() = c.q[1];
    c.edges[1].front() = c.q[1], c.edges[1].back() = c.q[2];
    c.edges[2].front() = c.q[2], c.edges[2].back() = c.q[3];
    c.edges[3].front() = c.q[3], c.edges[3].back() = c.q[0];

    const double span = 4.0 * scale;
    const std::array<const FoliationOracle*, 4> sep_oracle{&fs, &fu, &fs, &fu};
    for (int k = 0; k < 4; ++k) {
        GArc a;
        const double sign = k < 2 ? 1.0 : -1.0;
        for (int i = 0; i <= n; ++i) {
            const double s = sign * span * i / n;
            a.samples.push_back({s, sep_oracle[static_cast<std::size_t>(k)]->at(o, s)});
        }
        c.separatrices[static_cast<std::size_t>(k)] = std::move(a);
    }

    for (int k = 0; k < 4; ++k) {
        Polyline g;
        for (int i = 0; i <= 32; ++i) g.push_back(flow.integrate(c.q[static_cast<std::size_t>(k)], i / 32.0));
        c.g_arcs[static_cast<std::size_t>(k)] = std::move(g);
    }
    auto image = [&](const Polyline& e) {
        Polyline out;
        for (const Vec2 x : e) out.push_back(f(x));
        return out;
    };
    // Ends pinned to the G-arc ends so the ring closes exactly.
    Polyline fe1 = image(c.edges[1]), fe3 = image(c.edges[3]);
    fe1.front() = c.g_arcs[1].back();
    fe1.back() = c.g_arcs[2].back();
    fe3.front() = c.g_arcs[3].back();
    fe3.back() = c.g_arcs[0].back();

    Polyline ring = c.edges[0];
    append(ring, c.g_arcs[1], false);
    append(ring, fe1, false);
    append(ring, c.g_arcs[2], true);
    append(ring, c.edges[2], false);
    append(ring, c.g_arcs[3], false);
    append(ring, fe3, false);
    append(ring, c.g_arcs[0], true);
    ring.pop_back();
    c.octagon = std::move(ring);

    // Product structure near the fixed point.
    std::vector<Polyline> s_arcs, u_arcs;
    for (int i = -3; i <= 3; ++i) {
        const double t = 1.5 * scale * i / 3.0;
        s_arcs.push_back(fs.leaf_through(fu.at(o, t), -1.5 * scale, 1.5 * scale, 48));
        u_arcs.push_back(fu.leaf_through(fs.at(o, t), -1.5 * scale, 1.5 * scale, 48));
    }
    for (const auto& a : s_arcs)
        for (const auto& b : u_arcs)
            if (count_polyline_intersections(a, b) > 1)
                throw ProductStructureFailure("a stable arc meets an unstable arc more than once");

    if (polyline_self_intersects(c.octagon, true)) throw ScaleTooLarge("boundary of V0 self-intersects");

    // R is an F^s-box and an F^u-box.
    for (int i = 1; i < 8; ++i) {
        const Vec2 top = point_at_arclength(c.edges[0], polyline_length(c.edges[0]) * i / 8.0);
        if (count_polyline_intersections(fs.leaf_through(top, -span, span, 256), c.edges[2]) != 1)
            throw ProductStructureFailure("R is not a stable box");
        const Vec2 right = point_at_arclength(c.edges[1], polyline_length(c.edges[1]) * i / 8.0);
        if (count_polyline_intersections(fu.leaf_through(right, -span, span, 256), c.edges[3]) != 1)
            throw ProductStructureFailure("R is not an unstable box");
    }

    // Each edge crosses the cross exactly once.
    Polyline stable_line, unstable_line;
    for (auto it = c.separatrices[2].samples.rbegin(); it != c.separatrices[2].samples.rend(); ++it)
        stable_line.push_back(it->p);
    for (std::size_t i = 1; i < c.separatrices[0].samples.size(); ++i) stable_line.push_back(c.separatrices[0].samples[i].p);
    for (auto it = c.separatrices[3].samples.rbegin(); it != c.separatrices[3].samples.rend(); ++it)
        unstable_line.push_back(it->p);
    for (std::size_t i = 1; i < c.separatrices[1].samples.size(); ++i) unstable_line.push_back(c.separatrices[1].samples[i].p);
    for (int k = 0; k < 4; ++k) {
        const Polyline& e = c.edges[static_cast<std::size_t>(k)];
        const int hits = count_polyline_intersections(e, stable_line) + count_polyline_intersections(e, unstable_line);
        if (hits != 1) throw ProductStructureFailure("an edge of R does not cross the cross exactly once");
    }

    // V0 contains R and f(R).
    for (int i = -2; i <= 2; ++i)
        for (int j = -2; j <= 2; ++j) {
            const Vec2 x = intersect_leaves(fs, fu.at(o, 0.45 * scale * i), fu, fs.at(o, 0.45 * scale * j)).point;
            if (!c.in_v0(x) || !c.in_v0(f(x))) throw ScaleTooLarge("V0 does not contain R and f(R)");
        }
    return c;
}

bool SaddleChart::in_v0(Vec2 x) const {
    if (point_in_polygon(x, octagon)) return true;
    Polyline ring = octagon;
    ring.push_back(octagon.front());
    return project_to_polyline(x, ring).distance <= 1e-12 * std::max(scale, norm(x));
}

bool canonical_v0_contains(Vec2 x) {
    static const SaddleChart chart =
        build_saddle_chart(LinearSaddleFlow{}, vertical_lines(LeafType::Stable), horizontal_lines(LeafType::Unstable), 1.0);
    return chart.in_v0(x);
}

FoliationOracle canonical_stable_oracle(const std::string& field_name) {
    const auto base = vertical_lines(LeafType::Stable);
    if (field_name == "linear-saddle") return base;
    const VectorFieldHandle h = builtin_field(field_name);
    if (!h.ground_truth) throw InvalidInput("field has no known conjugacy to build oracles from");
    const auto gt = *h.ground_truth;
    return pushforward(base, [gt](Vec2 p) { return gt.forward.eval(p); }, [gt](Vec2 p) { return gt.inverse.eval(p); });
}

FoliationOracle canonical_unstable_oracle(const std::string& field_name) {
    const auto base = horizontal_lines(LeafType::Unstable);
    if (field_name == "linear-saddle") return base;
    const VectorFieldHandle h = builtin_field(field_name);
    if (!h.ground_truth) throw InvalidInput("field has no known conjugacy to build oracles from");
    const auto gt = *h.ground_truth;
    return pushforward(base, [gt](Vec2 p) { return gt.forward.eval(p); }, [gt](Vec2 p) { return gt.inverse.eval(p); });
}

}  // namespace folia
