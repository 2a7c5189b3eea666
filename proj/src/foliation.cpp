#include "folia/foliation.hpp"

#include <algorithm>
#include <deque>
#include <limits>

namespace folia {

double transversality(const PlaneFlow& flow, const Polyline& line) {
    double worst = 1.0;
    auto sine = [&](Vec2 p, Vec2 tangent) {
        const Vec2 v = flow.velocity(p);
        const double d = norm(tangent) * norm(v);
        return d > 0.0 ? std::fabs(cross(tangent, v)) / d : 0.0;
    };
    for (std::size_t i = 0; i + 1 < line.size(); ++i) {
        const Vec2 t = line[i + 1] - line[i];
        if (norm(t) == 0.0) continue;
        worst = std::min(worst, sine(line[i], t));
        worst = std::min(worst, sine((line[i] + line[i + 1]) * 0.5, t));
        worst = std::min(worst, sine(line[i + 1], t));
    }
    return worst;
}

void check_transversal(const PlaneFlow& flow, const Transversal& t, double margin) {
    if (t.polyline.size() < 2) throw NotTransverse("transversal needs at least two points");
    const double s = transversality(flow, t.polyline);
    if (!(s > margin))
        throw NotTransverse("polyline is tangent to the field (|sin angle| = " + std::to_string(s) + ")");
}

namespace {

bool on_boundary(const Window& w, Vec2 p) {
    const double tol = 1e-9 * std::max(1.0, w.diameter());
    return std::fabs(p.x - w.xmin) < tol || std::fabs(p.x - w.xmax) < tol ||
           std::fabs(p.y - w.ymin) < tol || std::fabs(p.y - w.ymax) < tol;
}

}  // namespace

WindowLeaf trace_window_leaf(const FlowMap& flow, Vec2 seed, const Window& window,
                             const FoliationOptions& opts) {
    if (!window.contains(seed)) throw InvalidInput("leaf seed lies outside the window");
    WindowLeaf leaf;
    leaf.seed = seed;
    leaf.id = point_tag(seed);
    TraceOptions t;
    t.max_dt = 0.1;
    t.max_chord = opts.chord;
    t.clip = window;
    try {
        leaf.arc = flow.trace_leaf(seed, -opts.leaf_time_cap, opts.leaf_time_cap, t);
        leaf.spans = on_boundary(window, leaf.arc.front()) && on_boundary(window, leaf.arc.back());
    } catch (const IntegrationError&) {
        leaf.arc.samples = {{0.0, seed}};
        leaf.spans = false;
    }
    leaf.arc.leaf_id = leaf.id;
    leaf.poly = leaf.arc.points();
    return leaf;
}

double leaf_distance(const FlowMap& flow, const WindowLeaf& leaf, Vec2 p) {
    const auto proj = project_to_polyline(p, leaf.poly);
    if (proj.distance > 1e-2 || leaf.arc.samples.size() < 2) return proj.distance;
    const auto& s = leaf.arc.samples;
    const std::size_t k = std::min(proj.segment, s.size() - 2);
    const Vec2 a = s[k].p;
    double tau = proj.s * (s[k + 1].t - s[k].t);
    double best = proj.distance;
    for (int it = 0; it < 6; ++it) {
        const Vec2 q = flow.integrate(a, tau);
        const Vec2 v = flow.velocity(q);
        best = std::min(best, dist(q, p));
        const double vv = dot(v, v);
        if (vv == 0.0) break;
        const double step = dot(q - p, v) / vv;
        tau -= step;
        if (std::fabs(step) < 1e-14) break;
    }
    return best;
}

bool same_side(const WindowLeaf& leaf, Vec2 p, Vec2 q) {
    return count_crossings(p, q, leaf.poly) % 2 == 0;
}

GBox gbox_build(const FlowMap& flow, const GArc& arc, const Transversal& left,
                const Transversal& right, int n_leaves) {
    check_transversal(flow, left);
    check_transversal(flow, right);
    if (n_leaves < 2) throw InvalidInput("a G-box needs at least two sampled leaves");
    const Polyline& rp = right.polyline;
    const double L = polyline_length(left.polyline);
    const double cap = 10.0 * (arc.phi_length() + 1.0);

    GBox box;
    box.left_edge = left;
    box.right_edge = right;
    box.height = std::max(L, polyline_length(rp));
    box.inner_len = std::numeric_limits<double>::infinity();
    box.outer_len = 0.0;

    for (int k = 0; k < n_leaves; ++k) {
        const Vec2 seed = point_at_arclength(left.polyline, L * k / (n_leaves - 1));
        GArc leaf;
        leaf.leaf_id = point_tag(seed);
        leaf.samples.push_back({0.0, seed});
        double t_cross = -1.0;
        try {
        flow.sweep(
            seed, 0.0, cap,
            [&](const StepInfo& s) {
                for (std::size_t j = 0; j + 1 < rp.size(); ++j) {
                    auto hit = intersect_segments(s.y0, s.y1, rp[j], rp[j + 1]);
                    if (hit && hit->s > 0.0) {
                        const Vec2 c = rp[j], e = rp[j + 1] - rp[j];
                        auto side = [&](Vec2 q) { return cross(e, q - c); };
                        const double f0 = side(s.y0);
                        double lo = 0.0, hi = s.t1 - s.t0;
                        Vec2 at = s.y1;
                        for (int it = 0; it < 60 && hi - lo > 1e-15 * std::max(1.0, s.t1); ++it) {
                            const double mid = 0.5 * (lo + hi);
                            const Vec2 q = flow.integrate(s.y0, mid);
                            if ((side(q) > 0.0) == (f0 > 0.0)) lo = mid;
                            else { hi = mid; at = q; }
                        }
                        t_cross = s.t0 + hi;
                        leaf.samples.push_back({t_cross, at});
                        return false;
                    }
                }
                leaf.samples.push_back({s.t1, s.y1});
                return true;
            },
            SweepLimits{0.1, 0.02});
        } catch (const IntegrationError&) {
        }
        if (t_cross <= 0.0) throw Degenerate("a sampled leaf does not reach the right edge");
        box.inner_len = std::min(box.inner_len, t_cross);
        box.outer_len = std::max(box.outer_len, t_cross);
        box.leaves.push_back(std::move(leaf));
    }
    box.bottom_arc = box.leaves.front();
    box.top_arc = box.leaves.back();
    return box;
}

int gbox_reentries(const FlowMap& flow, const GBox& box, Vec2 seed, double span) {
    Polyline ring = box.left_edge.polyline;
    for (const auto& s : box.top_arc.samples) ring.push_back(s.p);
    for (auto it = box.right_edge.polyline.rbegin(); it != box.right_edge.polyline.rend(); ++it)
        ring.push_back(*it);
    for (auto it = box.bottom_arc.samples.rbegin(); it != box.bottom_arc.samples.rend(); ++it)
        ring.push_back(it->p);
    TraceOptions t;
    t.max_chord = 0.02;
    const GArc arc = flow.trace_leaf(seed, -span, span, t);
    int runs = 0;
    bool inside = false;
    for (const auto& s : arc.samples) {
        const bool in = point_in_polygon(s.p, ring);
        if (in && !inside) ++runs;
        inside = in;
    }
    return std::max(0, runs - 1);
}

const char* to_string(LeafOrder o) {
    switch (o) {
        case LeafOrder::Less: return "Less";
        case LeafOrder::Greater: return "Greater";
        default: return "SameLeaf";
    }
}

LeafOrderer::LeafOrderer(const FlowMap& flow, OrderedRegion region, FoliationOptions opts)
    : flow_(flow), region_(std::move(region)), opts_(opts) {}

const WindowLeaf& LeafOrderer::leaf(Vec2 p) {
    const auto key = std::make_pair(p.x, p.y);
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
    WindowLeaf l = trace_window_leaf(flow_, p, region_.window, opts_);
    if (!l.spans) throw WindowTooSmall("leaf does not span the window");
    region_.leaf_index.emplace(l.id, p);
    return cache_.emplace(key, std::move(l)).first->second;
}

bool LeafOrderer::same_leaf(Vec2 a, Vec2 b) {
    if (a == b) return true;
    return leaf_distance(flow_, leaf(a), b) < opts_.tube_tol;
}

bool LeafOrderer::positive_of(const WindowLeaf& l, Vec2 p) {
    const WindowLeaf& base = leaf(region_.base_seed);
    if (l.id == base.id || same_leaf(region_.base_seed, l.seed))
        return same_side(base, p, region_.positive_side);
    const bool l_positive = same_side(base, l.seed, region_.positive_side);
    const bool with_base = same_side(l, p, region_.base_seed);
    return l_positive ? !with_base : with_base;
}

LeafOrder LeafOrderer::compare(Vec2 a, Vec2 b) {
    if (same_leaf(a, b)) return LeafOrder::SameLeaf;
    const bool b_above_a = positive_of(leaf(a), b);
    const bool a_above_b = positive_of(leaf(b), a);
    if (b_above_a && !a_above_b) return LeafOrder::Less;
    if (a_above_b && !b_above_a) return LeafOrder::Greater;
    throw OrderUndefined("leaf order undefined: the region lacks separation for this pair",
                         WitnessTriple{{region_.base_seed, a, b}});
}

LeafOrder leaf_compare(const FlowMap& flow, const OrderedRegion& region, Vec2 a, Vec2 b,
                       const FoliationOptions& opts) {
    LeafOrderer o(flow, region, opts);
    return o.compare(a, b);
}

OccupancyGrid::OccupancyGrid(const Window& w, int n)
    : w_(w), n_(n), blocked_(static_cast<std::size_t>(n) * n, 0) {}

std::pair<int, int> OccupancyGrid::cell(Vec2 p) const {
    int i = static_cast<int>(std::floor((p.x - w_.xmin) / w_.width() * n_));
    int j = static_cast<int>(std::floor((p.y - w_.ymin) / w_.height() * n_));
    return {std::clamp(i, 0, n_ - 1), std::clamp(j, 0, n_ - 1)};
}

void OccupancyGrid::mark(int i, int j) {
    if (i >= 0 && j >= 0 && i < n_ && j < n_) blocked_[static_cast<std::size_t>(j) * n_ + i] = 1;
}

void OccupancyGrid::block(const Polyline& line) {
    labelled_ = false;
    const double cw = w_.width() / n_, ch = w_.height() / n_;
    for (std::size_t k = 0; k + 1 < line.size(); ++k) {
        // Grid traversal stepping one axis at a time yields a 4-connected path.
        const Vec2 a{(line[k].x - w_.xmin) / cw, (line[k].y - w_.ymin) / ch};
        const Vec2 b{(line[k + 1].x - w_.xmin) / cw, (line[k + 1].y - w_.ymin) / ch};
        int i = static_cast<int>(std::floor(a.x)), j = static_cast<int>(std::floor(a.y));
        const int i1 = static_cast<int>(std::floor(b.x)), j1 = static_cast<int>(std::floor(b.y));
        const Vec2 d = b - a;
        const int si = d.x > 0 ? 1 : -1, sj = d.y > 0 ? 1 : -1;
        const double inf = std::numeric_limits<double>::infinity();
        double tx = d.x != 0 ? ((si > 0 ? i + 1 : i) - a.x) / d.x : inf;
        double ty = d.y != 0 ? ((sj > 0 ? j + 1 : j) - a.y) / d.y : inf;
        const double dx = d.x != 0 ? si / d.x : inf, dy = d.y != 0 ? sj / d.y : inf;
        mark(i, j);
        int guard = std::abs(i1 - i) + std::abs(j1 - j) + 2;
        while ((i != i1 || j != j1) && guard-- > 0) {
            if (tx < ty) { i += si; tx += dx; }
            else { j += sj; ty += dy; }
            mark(i, j);
        }
    }
}

void OccupancyGrid::label() {
    labels_.assign(blocked_.size(), -1);
    int next = 0;
    std::deque<int> queue;
    for (std::size_t s = 0; s < blocked_.size(); ++s) {
        if (blocked_[s] || labels_[s] >= 0) continue;
        labels_[s] = next;
        queue.push_back(static_cast<int>(s));
        while (!queue.empty()) {
            const int c = queue.front();
            queue.pop_front();
            const int ci = c % n_, cj = c / n_;
            for (int dj = -1; dj <= 1; ++dj)
                for (int di = -1; di <= 1; ++di) {
                    const int ni = ci + di, nj = cj + dj;
                    if (ni < 0 || nj < 0 || ni >= n_ || nj >= n_) continue;
                    const std::size_t q = static_cast<std::size_t>(nj) * n_ + ni;
                    if (blocked_[q] || labels_[q] >= 0) continue;
                    labels_[q] = next;
                    queue.push_back(static_cast<int>(q));
                }
        }
        ++next;
    }
    labelled_ = true;
}

int OccupancyGrid::component_of(Vec2 p) {
    if (!labelled_) label();
    const auto [i, j] = cell(p);
    for (int r = 0; r <= 2; ++r)
        for (int dj = -r; dj <= r; ++dj)
            for (int di = -r; di <= r; ++di) {
                const int ni = i + di, nj = j + dj;
                if (ni < 0 || nj < 0 || ni >= n_ || nj >= n_) continue;
                const int l = labels_[static_cast<std::size_t>(nj) * n_ + ni];
                if (l >= 0) return l;
            }
    return -1;
}

bool OccupancyGrid::connected(Vec2 p, Vec2 q) {
    const int a = component_of(p), b = component_of(q);
    return a >= 0 && a == b;
}

std::optional<int> separation_triple(const FlowMap& flow, Vec2 p1, Vec2 p2, Vec2 p3,
                                     const Window& window, const FoliationOptions& opts) {
    const Vec2 pts[3] = {p1, p2, p3};
    std::vector<WindowLeaf> leaves;
    for (const Vec2 p : pts) {
        leaves.push_back(trace_window_leaf(flow, p, window, opts));
        if (!leaves.back().spans) throw WindowTooSmall("leaf does not span the window");
    }
    for (int a = 0; a < 3; ++a)
        for (int b = a + 1; b < 3; ++b)
            if (leaf_distance(flow, leaves[a], pts[b]) < opts.tube_tol)
                throw InvalidInput("separation_triple needs three distinct leaves");
    for (int i = 0; i < 3; ++i) {
        OccupancyGrid grid(window, opts.grid);
        grid.block(leaves[i].poly);
        const Vec2 a = pts[(i + 1) % 3], b = pts[(i + 2) % 3];
        if (!grid.connected(a, b)) return i + 1;
    }
    return std::nullopt;
}

std::vector<Vec2> perimeter_chain(const Window& window, int per_side, double inset) {
    const Window w = window.inset(inset);
    std::vector<Vec2> out;
    const Vec2 corners[4] = {{w.xmin, w.ymin}, {w.xmax, w.ymin}, {w.xmax, w.ymax}, {w.xmin, w.ymax}};
    for (int e = 0; e < 4; ++e) {
        const Vec2 a = corners[e], b = corners[(e + 1) % 4];
        for (int k = 0; k < per_side; ++k) out.push_back(a + (b - a) * (static_cast<double>(k) / per_side));
    }
    return out;
}

}  // namespace folia
