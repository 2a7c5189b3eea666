#include "folia/flow.hpp"

#include <algorithm>
#include <cstdio>
#include <ostream>
#include <sstream>

namespace folia {

Polyline GArc::points() const {
    Polyline out;
    out.reserve(samples.size());
    for (const auto& s : samples) out.push_back(s.p);
    return out;
}

FlowMap::FlowMap(FieldPtr field, FlowOptions opts) : field_(std::move(field)), opts_(opts) {
    if (!field_) throw InvalidInput("null field");
    if (!(opts_.abs_tol > 0 && opts_.rel_tol > 0 && opts_.max_step > 0 && opts_.guard_radius > 0))
        throw InvalidInput("flow tolerances must be positive");
}

double FlowMap::initial_step(Vec2 y, Vec2 f, double dir, double max_h) const {
    const double sx = opts_.abs_tol + opts_.rel_tol * std::fabs(y.x);
    const double sy = opts_.abs_tol + opts_.rel_tol * std::fabs(y.y);
    const double d0 = std::hypot(y.x / sx, y.y / sy) / std::sqrt(2.0);
    const double d1 = std::hypot(f.x / sx, f.y / sy) / std::sqrt(2.0);
    double h = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
    h = std::min({h, max_h, 0.01});
    return dir * std::max(h, 1e-10);
}

Vec2 FlowMap::integrate(Vec2 p, double t) const {
    return sweep(p, 0.0, t, [](const StepInfo&) { return true; }).p;
}

namespace {

// Last point of the orbit inside the window on a step that leaves it.
Vec2 boundary_point(const FlowMap& flow, const StepInfo& s, const Window& w, double& t_out) {
    double lo = 0.0, hi = s.t1 - s.t0;
    Vec2 best = s.y0;
    for (int it = 0; it < 60; ++it) {
        const double mid = 0.5 * (lo + hi);
        const Vec2 q = flow.integrate(s.y0, mid);
        if (w.contains(q)) {
            lo = mid;
            best = q;
        } else {
            hi = mid;
        }
        if (std::fabs(hi - lo) < 1e-13) break;
    }
    t_out = s.t0 + lo;
    return best;
}

// Samples phi^t(p) for t from 0 toward `t_end`. Returns true if clipped.
bool trace_leg(const FlowMap& flow, Vec2 p, double t_end, const TraceOptions& opts,
               std::vector<ArcSample>& out) {
    bool clipped = false;
    SweepLimits lim{opts.max_dt, opts.max_chord};
    flow.sweep(
        p, 0.0, t_end,
        [&](const StepInfo& s) {
            if (opts.clip && !opts.clip->contains(s.y1)) {
                double tb = s.t0;
                const Vec2 b = boundary_point(flow, s, *opts.clip, tb);
                if (tb != s.t0) out.push_back({tb, b});
                clipped = true;
                return false;
            }
            out.push_back({s.t1, s.y1});
            return true;
        },
        lim);
    return clipped;
}

}  // namespace

GArc FlowMap::trace_leaf(Vec2 p, double a, double b, const TraceOptions& opts) const {
    if (!(a < b)) throw InvalidInput("trace_leaf needs a < b");
    GArc arc;
    arc.leaf_id = point_tag(p);
    if (opts.clip && !opts.clip->contains(p)) {
        arc.samples.push_back({0.0, p});
        arc.clipped = true;
        return arc;
    }
    if (a <= 0.0 && b >= 0.0) {
        std::vector<ArcSample> back;
        if (a < 0.0) arc.clipped |= trace_leg(*this, p, a, opts, back);
        std::reverse(back.begin(), back.end());
        arc.samples = std::move(back);
        arc.samples.push_back({0.0, p});
        if (b > 0.0) arc.clipped |= trace_leg(*this, p, b, opts, arc.samples);
        return arc;
    }
    const Vec2 q = integrate(p, a);
    arc.samples.push_back({a, q});
    std::vector<ArcSample> fwd;
    arc.clipped = trace_leg(*this, q, b - a, opts, fwd);
    for (auto& s : fwd) arc.samples.push_back({s.t + a, s.p});
    return arc;
}

void write_csv(std::ostream& out, const GArc& arc) {
    out << "t,x,y\n";
    char buf[96];
    for (const auto& s : arc.samples) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", s.t, s.p.x, s.p.y);
        out << buf;
    }
}

namespace {

struct Canvas {
    Window w;
    int width, height;
    double px(double x) const { return (x - w.xmin) / w.width() * width; }
    double py(double y) const { return (w.ymax - y) / w.height() * height; }
};

void emit_path(std::ostringstream& svg, const Canvas& c, const GArc& arc, const char* stroke,
               double stroke_width) {
    if (arc.samples.size() < 2) return;
    svg << "<path fill=\"none\" stroke=\"" << stroke << "\" stroke-width=\"" << stroke_width
        << "\" d=\"";
    char buf[64];
    bool first = true;
    for (const auto& s : arc.samples) {
        std::snprintf(buf, sizeof buf, "%s%.2f %.2f ", first ? "M" : "L", c.px(s.p.x), c.py(s.p.y));
        svg << buf;
        first = false;
    }
    svg << "\"/>\n";

    // Arrowhead at the sample nearest the middle of the arc, pointing along the flow.
    const std::size_t m = arc.samples.size() / 2;
    const Vec2 a{c.px(arc.samples[m - 1].p.x), c.py(arc.samples[m - 1].p.y)};
    const Vec2 b{c.px(arc.samples[m].p.x), c.py(arc.samples[m].p.y)};
    const Vec2 d = b - a;
    const double L = norm(d);
    if (L <= 0.0) return;
    const Vec2 u = d / L;
    const Vec2 n = perp(u);
    const double s = 4.0 + stroke_width;
    const Vec2 tip = b;
    const Vec2 l = tip - u * (2 * s) + n * s;
    const Vec2 r = tip - u * (2 * s) - n * s;
    std::snprintf(buf, sizeof buf, "%.2f,%.2f ", tip.x, tip.y);
    svg << "<polygon fill=\"" << stroke << "\" points=\"" << buf;
    std::snprintf(buf, sizeof buf, "%.2f,%.2f ", l.x, l.y);
    svg << buf;
    std::snprintf(buf, sizeof buf, "%.2f,%.2f", r.x, r.y);
    svg << buf << "\"/>\n";
}

}  // namespace

std::string portrait_svg(const std::vector<GArc>& arcs, const Window& window,
                         const PortraitStyle& style) {
    Canvas c{window, style.width, style.height};
    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << style.width << "\" height=\""
        << style.height << "\" viewBox=\"0 0 " << style.width << ' ' << style.height << "\">\n";
    svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    for (const auto& a : arcs) emit_path(svg, c, a, "#4060a0", 1.0);
    for (const auto& a : style.heavy) emit_path(svg, c, a, "#b02020", 3.0);
    svg << "</svg>\n";
    return svg.str();
}

std::vector<GArc> portrait_arcs(const FlowMap& flow, const Window& window, int n_seeds,
                                double half_span) {
    std::vector<GArc> arcs;
    const int n = std::max(2, n_seeds);
    TraceOptions opts;
    opts.clip = window;
    opts.max_chord = window.diameter() / 200.0;
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
            const Vec2 p{window.xmin + window.width() * (i + 0.5) / n,
                         window.ymin + window.height() * (j + 0.5) / n};
            try {
                arcs.push_back(flow.trace_leaf(p, -half_span, half_span, opts));
            } catch (const Error&) {
                // seeds whose orbit diverges are omitted from the picture
            }
        }
    }
    return arcs;
}

double first_integral_drift(const FlowMap& flow, const std::vector<Vec2>& points, double t_max) {
    const auto& H = flow.field().first_integral;
    if (!H) throw InvalidInput("field declares no first integral");
    double worst = 0.0;
    for (const Vec2 p : points) {
        const double h0 = H->eval(p);
        for (double dir : {1.0, -1.0}) {
            try {
                flow.sweep(p, 0.0, dir * t_max, [&](const StepInfo& s) {
                    worst = std::max(worst, std::fabs(H->eval(s.y1) - h0));
                    return true;
                });
            } catch (const DomainError&) {
            } catch (const IntegrationError&) {
            }
        }
    }
    return worst;
}

}  // namespace folia
