#include "folia/reeb.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <utility>

namespace folia {

namespace {

// Window exit and entry events along an orbit, in order.
struct Fate {
    std::array<signed char, 8> events{};
    int n = 0;
    bool inside_at_end = false;
    bool blew_up = false;

    bool operator==(const Fate&) const = default;
};

// 0..3 for left, right, bottom, top: the side the outside point q lies beyond.
signed char side_of(const Window& w, Vec2 q) {
    const double v[4] = {w.xmin - q.x, q.x - w.xmax, w.ymin - q.y, q.y - w.ymax};
    return static_cast<signed char>(std::max_element(v, v + 4) - v);
}

Fate fate_of(const FlowMap& flow, Vec2 p, double t_end, const Window& w) {
    Fate f;
    bool inside = w.contains(p);
    try {
        flow.sweep(p, 0.0, t_end, [&](const StepInfo& s) {
            const bool in = w.contains(s.y1);
            if (in == inside) return true;
            f.events[static_cast<std::size_t>(f.n++)] =
                static_cast<signed char>(in ? 4 + side_of(w, s.y0) : side_of(w, s.y1));
            inside = in;
            return f.n < static_cast<int>(f.events.size());
        });
    } catch (const IntegrationError&) {
        f.blew_up = true;
    }
    f.inside_at_end = inside;
    return f;
}

// Shrinks [a, b] around a change of fate; the endpoints keep their fates.
std::pair<Vec2, Vec2> bisect_fate(const FlowMap& flow, Vec2 a, Vec2 b, const Fate& fa, double t_end, const Window& w,
                                  double min_len) {
    for (int it = 0; it < 60 && dist(a, b) > min_len; ++it) {
        const Vec2 m = (a + b) * 0.5;
        if (fate_of(flow, m, t_end, w) == fa) a = m;
        else b = m;
    }
    return {a, b};
}

struct Candidate {
    Vec2 seed;
    Vec2 probe_a, probe_b;
    WindowLeaf leaf;
};

// Leaves across which the long-time fate of nearby orbits changes.
std::vector<Candidate> fate_tears(const FlowMap& flow, const Window& w, int g, double t_end,
                                  const FoliationOptions& fopts) {
    const double hx = w.width() / g, hy = w.height() / g;
    auto node = [&](int i, int j) { return Vec2{w.xmin + (i + 0.5) * hx, w.ymin + (j + 0.5) * hy}; };
    std::vector<Fate> fates(static_cast<std::size_t>(g) * g);
    for (int j = 0; j < g; ++j)
        for (int i = 0; i < g; ++i) fates[static_cast<std::size_t>(j * g + i)] = fate_of(flow, node(i, j), t_end, w);

    std::vector<Candidate> out;
    const double min_len = 1e-9 * w.diameter();
    const double same_tol = 1e-3 * std::min(hx, hy);
    auto known = [&](Vec2 s) {
        for (const auto& c : out)
            if (project_to_polyline(s, c.leaf.poly).distance < same_tol) return true;
        return false;
    };
    // Walks the probe from a towards b, collecting every tear met on the way.
    auto probe = [&](Vec2 a, Fate fa, Vec2 b, const Fate& fb) {
        for (int depth = 0; depth < 8 && !(fa == fb); ++depth) {
            const auto [lo, hi] = bisect_fate(flow, a, b, fa, t_end, w, min_len);
            const Vec2 s = (lo + hi) * 0.5;
            if (!known(s)) out.push_back({s, a, b, trace_window_leaf(flow, s, w, fopts)});
            a = hi;
            fa = fate_of(flow, a, t_end, w);
        }
    };
    auto at = [&](int i, int j) -> const Fate& { return fates[static_cast<std::size_t>(j * g + i)]; };
    for (int j = 0; j < g; ++j)
        for (int i = 0; i < g; ++i) {
            if (i + 1 < g) probe(node(i, j), at(i, j), node(i + 1, j), at(i + 1, j));
            if (j + 1 < g) probe(node(i, j), at(i, j), node(i, j + 1), at(i, j + 1));
        }
    return out;
}

// Re-bisects the original probe with a longer fate horizon.
Candidate refine(const FlowMap& flow, const Candidate& c, double t_end, const Window& w,
                 const FoliationOptions& fopts) {
    if (fate_of(flow, c.probe_a, t_end, w) == fate_of(flow, c.probe_b, t_end, w)) return c;
    Candidate r = c;
    const auto [lo, hi] =
        bisect_fate(flow, c.probe_a, c.probe_b, fate_of(flow, c.probe_a, t_end, w), t_end, w, 1e-9 * w.diameter());
    r.seed = (lo + hi) * 0.5;
    r.leaf = trace_window_leaf(flow, r.seed, w, fopts);
    return r;
}

double share_near(const std::vector<Vec2>& pts, const Polyline& leaf, double tol) {
    if (pts.empty() || leaf.size() < 2) return 0.0;
    std::size_t n = 0;
    for (const Vec2 p : pts)
        if (project_to_polyline(p, leaf).distance <= tol) ++n;
    return static_cast<double>(n) / static_cast<double>(pts.size());
}

}  // namespace

std::vector<ReebComponentReport> detect_reeb(const FlowMap& flow, const Window& window, int resolution,
                                             const DetectOptions& opts) {
    if (!window.valid()) throw InvalidInput("window is empty");
    if (resolution < 16) throw InvalidInput("resolution must be at least 16");
    const auto& fp = flow.field().fixed_points;
    if (fp)
        for (const Vec2 p : *fp)
            if (window.contains(p)) throw InvalidInput("detect_reeb needs a fixed-point-free window");

    const double delta = window.diameter() / resolution;
    const int g = std::clamp(resolution / 16, 8, 32);
    FoliationOptions fopts;
    fopts.leaf_time_cap = 2.0 * opts.fate_time;

    auto minus = fate_tears(flow, window, g, opts.fate_time, fopts);
    auto plus = fate_tears(flow, window, g, -opts.fate_time, fopts);

    CloudParams screen;
    screen.eps = opts.screen_eps;
    screen.t_max = cloud_horizon(opts.screen_eps);
    screen.delta = delta;
    screen.window = window;
    screen.n_seeds = opts.certify.n_seeds;
    screen.seed = opts.certify.seed;

    std::vector<ReebComponentReport> reports;
    std::vector<char> plus_refined(plus.size(), 0);
    for (const auto& cand : minus) {
        if (prolongation_flow(flow, cand.seed, screen).size() == 0) continue;
        const Candidate m = refine(flow, cand, opts.refine_time, window, fopts);
        const CertifiedCloud cloud = certify_cloud(flow, m.seed, window, delta, Direction::Forward, opts.certify);
        const auto pts = cloud.points();
        if (pts.empty()) continue;

        ReebComponentReport r;
        r.minus_seed = m.seed;
        r.gamma_minus = m.leaf.arc;
        r.certified_cells = pts.size();
        std::size_t best = plus.size();
        for (std::size_t k = 0; k < plus.size(); ++k) {
            const double s = share_near(pts, plus[k].leaf.poly, 2.0 * delta);
            if (s > r.coverage) {
                r.coverage = s;
                best = k;
            }
        }
        if (best == plus.size() || r.coverage < opts.match_share) {
            r.orientation_certificate = "forward prolongation nonempty but no edge leaf matched";
            r.region_seed = m.seed;
            reports.push_back(std::move(r));
            continue;
        }
        if (!plus_refined[best]) {
            plus[best] = refine(flow, plus[best], -opts.refine_time, window, fopts);
            plus_refined[best] = 1;
        }
        const Candidate& p = plus[best];
        r.certified = true;
        r.plus_seed = p.seed;
        r.gamma_plus = p.leaf.arc;
        r.region_seed = (m.seed + project_to_polyline(m.seed, p.leaf.poly).point) * 0.5;
        r.orientation_certificate = "gamma_plus in forward prolongation of gamma_minus";

        // Mutual prolongation: the plus edge also reaches the minus edge.
        if (prolongation_flow(flow, p.seed, screen).size() > 0) {
            const CertifiedCloud back = certify_cloud(flow, p.seed, window, delta, Direction::Forward, opts.certify);
            if (share_near(back.points(), m.leaf.poly, 2.0 * delta) >= opts.match_share) {
                r.bidirectional = true;
                ReebComponentReport mirror = r;
                std::swap(mirror.gamma_minus, mirror.gamma_plus);
                std::swap(mirror.minus_seed, mirror.plus_seed);
                mirror.orientation_certificate = "gamma_plus in forward prolongation of gamma_minus (mutual)";
                reports.push_back(std::move(r));
                reports.push_back(std::move(mirror));
                continue;
            }
        }
        reports.push_back(std::move(r));
    }
    return reports;
}

const char* to_string(Verdict v) {
    switch (v) {
        case Verdict::Trivial: return "trivial";
        case Verdict::Nontrivial: return "nontrivial";
        default: return "inconclusive";
    }
}

std::size_t Classification::components() const {
    return static_cast<std::size_t>(
        std::count_if(reports.begin(), reports.end(), [](const auto& r) { return r.certified; }));
}

Classification classify_triviality(const FlowMap& flow, const Window& window, int resolution,
                                   const DetectOptions& opts) {
    Classification c;
    try {
        c.reports = detect_reeb(flow, window, resolution, opts);
    } catch (const Error& e) {
        c.detail = e.what();
        return c;
    }
    if (c.components() > 0) {
        c.verdict = Verdict::Nontrivial;
        c.detail = "certified Reeb component";
        return c;
    }
    if (!c.reports.empty()) {
        c.detail = "uncertified prolongation candidates";
        return c;
    }
    const auto chain = perimeter_chain(window, 16, 1e-3 * window.diameter());
    try {
        const auto res = build_cross_section(flow, window, chain);
        if (std::holds_alternative<CrossSection>(res)) {
            c.verdict = Verdict::Trivial;
            c.detail = "no Reeb component and a cross section exists";
        } else {
            c.detail = "no Reeb component found but the cross section failed: " + std::get<FailureReport>(res).reason;
        }
    } catch (const Error& e) {
        c.detail = std::string("cross section failed: ") + e.what();
    }
    return c;
}

bool free_arc_check(const FlowMap& flow, const ReebComponentReport& report, const Polyline& arc,
                    double tube_tol) {
    if (arc.size() < 2) throw BadArc("arc needs at least two points");
    auto on_edge = [&](Vec2 e, const GArc& edge, Vec2 edge_seed) {
        if (edge.samples.size() >= 2 && project_to_polyline(e, edge.points()).distance < tube_tol) return true;
        try {
            TraceOptions t;
            t.max_chord = 0.05;
            const GArc l = flow.trace_leaf(e, -200.0, 200.0, t);
            return project_to_polyline(edge_seed, l.points()).distance < tube_tol;
        } catch (const Error&) {
            return false;
        }
    };
    const Vec2 a = arc.front(), b = arc.back();
    const bool a_minus = on_edge(a, report.gamma_minus, report.minus_seed);
    const bool a_plus = on_edge(a, report.gamma_plus, report.plus_seed);
    const bool b_minus = on_edge(b, report.gamma_minus, report.minus_seed);
    const bool b_plus = on_edge(b, report.gamma_plus, report.plus_seed);
    if (!((a_minus && b_plus) || (a_plus && b_minus)))
        throw BadArc("arc endpoints must lie on the two edges of the component");

    Polyline dense{arc.front()};
    for (std::size_t k = 0; k + 1 < arc.size(); ++k) {
        const int n = std::max(1, static_cast<int>(std::ceil(dist(arc[k], arc[k + 1]) / 0.02)));
        for (int i = 1; i <= n; ++i) dense.push_back(arc[k] + (arc[k + 1] - arc[k]) * (static_cast<double>(i) / n));
    }
    Polyline image;
    image.reserve(dense.size());
    for (const Vec2 p : dense) image.push_back(flow.time_one(p));
    return count_polyline_intersections(dense, image) > 0;
}

}  // namespace folia
