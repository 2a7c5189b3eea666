#include "folia/conjugacy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace folia {

HomeoHandle identity_homeo(const Window& window) {
    HomeoHandle h;
    h.forward = [](Vec2 p) { return p; };
    h.inverse = [](Vec2 p) { return p; };
    h.window = window;
    h.provenance = {{"construction", "identity"}};
    return h;
}

Vec2 LinearSaddleFlow::velocity(Vec2 p) const { return {std::numbers::ln2 * p.x, -std::numbers::ln2 * p.y}; }

Vec2 LinearSaddleFlow::integrate(Vec2 p, double t) const { return {p.x * std::exp2(t), p.y * std::exp2(-t)}; }

// ---------------------------------------------------------------------------
// Sections

namespace {

struct Box {
    double xmin, xmax, ymin, ymax;
    bool overlaps(Vec2 a, Vec2 b) const {
        return std::max(a.x, b.x) >= xmin && std::min(a.x, b.x) <= xmax && std::max(a.y, b.y) >= ymin &&
               std::min(a.y, b.y) <= ymax;
    }
};

Box bounding_box(const Polyline& poly) {
    Box b{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity(),
          std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
    for (const Vec2 p : poly) {
        b.xmin = std::min(b.xmin, p.x);
        b.xmax = std::max(b.xmax, p.x);
        b.ymin = std::min(b.ymin, p.y);
        b.ymax = std::max(b.ymax, p.y);
    }
    return b;
}

// Index of a section segment crossed by the chord [a, b], or -1.
int chord_hit(const Polyline& poly, const Box& box, Vec2 a, Vec2 b) {
    if (!box.overlaps(a, b)) return -1;
    for (std::size_t j = 0; j + 1 < poly.size(); ++j)
        if (intersect_segments(a, b, poly[j], poly[j + 1])) return static_cast<int>(j);
    return -1;
}

double step_for(const PlaneFlow& flow, Vec2 p) {
    const double v = norm(flow.velocity(p));
    return std::clamp(v > 0.0 ? 0.05 / v : 0.25, 1e-3, 0.25);
}

// Regula falsi with the Illinois modification, falling back to bisection.
double refine_root(const std::function<double(double)>& g, double a, double b, double ga, double gb) {
    int side = 0;
    for (int it = 0; it < 200; ++it) {
        if (std::fabs(b - a) <= 1e-14 * std::max(1.0, std::fabs(a))) break;
        double m = (a * gb - b * ga) / (gb - ga);
        if (!std::isfinite(m) || m <= std::min(a, b) || m >= std::max(a, b) || it % 8 == 7) m = 0.5 * (a + b);
        const double gm = g(m);
        if (gm == 0.0) return m;
        if ((gm > 0) == (gb > 0)) {
            b = m;
            gb = gm;
            if (side == -1) ga *= 0.5;
            side = -1;
        } else {
            a = m;
            ga = gm;
            if (side == 1) gb *= 0.5;
            side = 1;
        }
    }
    return std::fabs(ga) < std::fabs(gb) ? a : b;
}

}  // namespace

SectionCurve arclength_section(const Polyline& poly) {
    if (poly.size() < 2) throw InvalidInput("section needs at least two vertices");
    SectionCurve c;
    c.poly = poly;
    c.sigma = [poly](Vec2 q) { return arclength_at(poly, project_to_polyline(q, poly)); };
    c.point = [poly](double s) {
        if (s < -1e-12 || s > polyline_length(poly) + 1e-12) throw InvalidInput("sigma outside the section");
        return point_at_arclength(poly, s);
    };
    return c;
}

SectionCurve section_with_sigma(const Polyline& poly, std::function<double(Vec2)> sigma) {
    if (poly.size() < 2) throw InvalidInput("section needs at least two vertices");
    SectionCurve c;
    c.poly = poly;
    c.sigma = sigma;
    const double len = polyline_length(poly);
    c.point = [poly, sigma, len](double s) {
        double a = 0.0, b = len;
        const double sa = sigma(poly.front()) - s, sb = sigma(poly.back()) - s;
        if (sa == 0.0) return poly.front();
        if (sb == 0.0) return poly.back();
        if ((sa > 0) == (sb > 0)) throw InvalidInput("sigma outside the section");
        for (int it = 0; it < 200 && b - a > 1e-15 * std::max(1.0, len); ++it) {
            const double m = 0.5 * (a + b);
            if ((sigma(point_at_arclength(poly, m)) - s > 0) == (sa > 0)) a = m;
            else b = m;
        }
        return point_at_arclength(poly, 0.5 * (a + b));
    };
    return c;
}

SectionHit section_coordinates(const PlaneFlow& flow, const SectionCurve& section, Vec2 p,
                               const TrivializeOptions& opts) {
    const bool use_poly = section.poly.size() >= 2;
    if (!use_poly && !section.level) throw InvalidInput("section needs a polyline or a level function");
    const Box box = use_poly ? bounding_box(section.poly) : Box{};

    struct Walker {
        double s = 0.0;
        Vec2 x;
        double level = 0.0;
    };
    const double l0 = section.level ? section.level(p) : 0.0;
    if (section.level && l0 == 0.0) return {0.0, p, section.sigma(p)};
    std::array<Walker, 2> w{Walker{0.0, p, l0}, Walker{0.0, p, l0}};
    const std::array<double, 2> dir{1.0, -1.0};

    while (std::min(std::fabs(w[0].s), std::fabs(w[1].s)) < opts.t_max) {
        const int k = std::fabs(w[0].s) <= std::fabs(w[1].s) ? 0 : 1;
        Walker& cur = w[static_cast<std::size_t>(k)];
        const double h = dir[static_cast<std::size_t>(k)] * step_for(flow, cur.x);
        Walker nxt{cur.s + h, flow.integrate(cur.x, h), 0.0};
        if (!finite(nxt.x)) break;

        std::function<double(Vec2)> level = section.level;
        bool bracket = false;
        if (use_poly) {
            const int j = chord_hit(section.poly, box, cur.x, nxt.x);
            if (j >= 0) {
                bracket = true;
                if (!level) {
                    const Vec2 a = section.poly[static_cast<std::size_t>(j)];
                    const Vec2 d = section.poly[static_cast<std::size_t>(j) + 1] - a;
                    const double n = norm(d);
                    level = [a, d, n](Vec2 x) { return cross(d, x - a) / n; };
                }
            }
        }
        if (level) nxt.level = level(nxt.x);
        if (!use_poly) bracket = (nxt.level > 0) != (cur.level > 0) || nxt.level == 0.0;
        if (bracket) {
            const Vec2 base = cur.x;
            const double s0 = cur.s;
            const auto g = [&](double s) { return level(flow.integrate(base, s - s0)); };
            const double ga = level(cur.x), gb = nxt.level;
            double s = nxt.s;
            if (ga == 0.0) s = cur.s;
            else if (gb != 0.0) {
                if ((ga > 0) == (gb > 0)) throw NoCrossing("orbit touches the section without changing side");
                s = refine_root(g, cur.s, nxt.s, ga, gb);
            }
            const Vec2 q = flow.integrate(base, s - s0);
            return {-s, q, section.sigma(q)};
        }
        cur = nxt;
    }
    throw NoCrossing("orbit does not meet the section within the search horizon");
}

HomeoHandle trivialize(FlowPtr flow, SectionCurve section, const Window& window, const TrivializeOptions& opts) {
    if (!flow) throw InvalidInput("trivialize needs a flow");
    HomeoHandle h;
    h.window = window;
    auto sec = std::make_shared<const SectionCurve>(std::move(section));
    h.forward = [flow, sec, opts](Vec2 p) {
        const SectionHit hit = section_coordinates(*flow, *sec, p, opts);
        return Vec2{hit.t, hit.sigma};
    };
    h.inverse = [flow, sec](Vec2 ts) { return flow->integrate(sec->point(ts.y), ts.x); };
    h.provenance = {{"construction", "trivialize"},
                    {"section_vertices", sec->poly.size()},
                    {"t_max", opts.t_max}};
    return h;
}

HomeoHandle trivialize(FlowPtr flow, const CrossSection& section, const Window& window,
                       std::function<double(Vec2)> sigma, const TrivializeOptions& opts) {
    const Polyline& poly = section.polyline.polyline;
    const bool custom = static_cast<bool>(sigma);
    HomeoHandle h = trivialize(std::move(flow), custom ? section_with_sigma(poly, std::move(sigma))
                                                       : arclength_section(poly),
                               window, opts);
    h.provenance["sigma"] = custom ? "custom" : "arclength";
    h.provenance["covered_leaves"] = section.covered_leaves.size();
    return h;
}

WindowTrivialization trivialize_window(std::shared_ptr<const FlowMap> flow, const Window& window, double pad,
                                       const TrivializeOptions& opts) {
    if (!flow) throw InvalidInput("trivialize needs a flow");
    if (!window.valid()) throw InvalidInput("window is empty");
    const double d = pad * window.diameter();
    const Window big{window.xmin - d, window.xmax + d, window.ymin - d, window.ymax + d};
    WindowTrivialization out{build_cross_section(*flow, big, perimeter_chain(big, 16, 1e-3 * big.diameter())), {}};
    if (const auto* cs = std::get_if<CrossSection>(&out.section)) out.homeo = trivialize(flow, *cs, window, {}, opts);
    return out;
}

HomeoHandle to_homeo(const FundamentalExtension<Vec2>& ext, const Window& window) {
    auto e = std::make_shared<const FundamentalExtension<Vec2>>(ext);
    HomeoHandle h;
    h.window = window;
    h.forward = [e](Vec2 p) { return e->forward(p); };
    h.inverse = [e](Vec2 p) { return e->inverse(p); };
    h.provenance = {{"construction", "fundamental_extend"}, {"k_max", ext.spec().k_max}};
    return h;
}

}  // namespace folia
