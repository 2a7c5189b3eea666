#include <algorithm>
#include <cmath>
#include <optional>

#include "folia/foliation.hpp"

namespace folia {

namespace {

struct Extraction {
    std::vector<Vec2> points;  // section order, lowest leaf first
};

// Starts at the lowest seed and keeps each seed whose leaf lies strictly above
// the last kept one, wrapping around the chain once.
Extraction extract_monotone(LeafOrderer& order, const std::vector<Vec2>& chain) {
    std::size_t lo = 0;
    for (std::size_t j = 1; j < chain.size(); ++j)
        if (order.compare(chain[j], chain[lo]) == LeafOrder::Less) lo = j;
    Extraction ex;
    ex.points.push_back(chain[lo]);
    for (std::size_t k = 1; k < chain.size(); ++k) {
        const Vec2 p = chain[(lo + k) % chain.size()];
        if (order.compare(ex.points.back(), p) == LeafOrder::Less) ex.points.push_back(p);
    }
    return ex;
}

bool straight_transverse(const FlowMap& flow, Vec2 a, Vec2 b, double margin) {
    Polyline fine;
    for (int k = 0; k <= 16; ++k) fine.push_back(a + (b - a) * (k / 16.0));
    return transversality(flow, fine) > margin;
}

// Follows the unit normal field from `start` in direction `sgn` until it
// crosses `target`.
bool walk_to_leaf(const FlowMap& flow, Vec2 start, double sgn, const WindowLeaf& target,
                  const Window& window, double h, Polyline& path) {
    auto normal = [&](Vec2 p) {
        const Vec2 v = flow.velocity(p);
        const double n = norm(v);
        return n > 0.0 ? perp(v) * (1.0 / n) : Vec2{0, 0};
    };
    const Polyline& L = target.poly;
    Vec2 p = start;
    const int max_steps = static_cast<int>(4.0 * window.diameter() / h) + 10;
    for (int k = 0; k < max_steps; ++k) {
        const Vec2 mid = p + normal(p) * (0.5 * h * sgn);
        const Vec2 q = p + normal(mid) * (h * sgn);
        if (norm(normal(mid)) == 0.0) return false;
        for (std::size_t j = 0; j + 1 < L.size(); ++j) {
            const auto hit = intersect_segments(p, q, L[j], L[j + 1]);
            if (hit && hit->s > 0.0) {
                path.push_back(p + (q - p) * hit->s);
                return true;
            }
        }
        if (!window.contains(q)) return false;
        path.push_back(q);
        p = q;
    }
    return false;
}

// Crossings of the section with a leaf. Vertices lying on the leaf count once
// when the section passes through and twice when it only touches.
int section_crossings(const Polyline& sec, const WindowLeaf& leaf, double tol) {
    const Polyline& L = leaf.poly;
    std::vector<char> on(sec.size());
    for (std::size_t i = 0; i < sec.size(); ++i)
        on[i] = project_to_polyline(sec[i], L).distance < tol;
    int n = 0;
    for (std::size_t i = 0; i + 1 < sec.size(); ++i)
        for (double s : crossing_params(sec[i], sec[i + 1], L)) {
            if (s >= 1.0 && i + 2 < sec.size()) continue;
            const Vec2 x = sec[i] + (sec[i + 1] - sec[i]) * s;
            if ((on[i] && dist(x, sec[i]) < 1e3 * tol) || (on[i + 1] && dist(x, sec[i + 1]) < 1e3 * tol))
                continue;
            ++n;
        }
    for (std::size_t i = 0; i < sec.size(); ++i) {
        if (!on[i]) continue;
        if (i == 0 || i + 1 == sec.size()) {
            ++n;
            continue;
        }
        const double e = 1e3 * tol;
        const Vec2 a = sec[i - 1] - sec[i], b = sec[i + 1] - sec[i];
        const Vec2 p = sec[i] + a * (e / norm(a));
        const Vec2 q = sec[i] + b * (e / norm(b));
        n += count_crossings(p, q, L) % 2 == 1 ? 1 : 2;
    }
    return n;
}

}  // namespace

SectionResult build_cross_section(const FlowMap& flow, const Window& window,
                                  const std::vector<Vec2>& seed_chain, const FoliationOptions& opts) {
    FailureReport fail;
    fail.window = window;
    fail.grid = opts.grid;
    if (seed_chain.size() < 2) {
        fail.reason = "seed chain needs at least two points";
        return fail;
    }
    const std::size_t i0 = seed_chain.size() / 2;
    const Vec2 base = seed_chain[i0];
    OrderedRegion region{window, base, base, {}};
    LeafOrderer order(flow, region, opts);

    Extraction ex;
    try {
        // The positive side is taken from the first later seed off the base leaf.
        std::optional<Vec2> positive;
        for (std::size_t j = i0 + 1; j < seed_chain.size() && !positive; ++j)
            if (!order.same_leaf(base, seed_chain[j])) positive = seed_chain[j];
        for (std::size_t j = i0; j-- > 0 && !positive;)
            if (!order.same_leaf(base, seed_chain[j])) positive = seed_chain[j];
        if (!positive) {
            fail.reason = "all seeds lie on one leaf";
            return fail;
        }
        order.set_positive_side(*positive);
        ex = extract_monotone(order, seed_chain);
    } catch (const OrderUndefined& e) {
        // Reported as (earlier seed, base, later seed) in chain order.
        auto seeds = e.witness().seeds;
        auto idx = [&](Vec2 p) { return std::find(seed_chain.begin(), seed_chain.end(), p) - seed_chain.begin(); };
        if (idx(seeds[2]) < idx(seeds[1])) std::swap(seeds[1], seeds[2]);
        fail.reason = e.what();
        fail.witness = WitnessTriple{{seeds[1], seeds[0], seeds[2]}};
        return fail;
    } catch (const WindowTooSmall& e) {
        fail.reason = e.what();
        return fail;
    }

    const double h = std::min(opts.chord, window.diameter() / 1000.0);
    Polyline sec{ex.points.front()};
    for (std::size_t k = 1; k < ex.points.size(); ++k) {
        const Vec2 a = sec.back(), b = ex.points[k];
        if (straight_transverse(flow, a, b, opts.transverse_margin)) {
            sec.push_back(b);
            continue;
        }
        // Both normal directions are tried; the shorter successful path wins.
        Polyline best;
        for (double sgn : {1.0, -1.0}) {
            Polyline path;
            if (walk_to_leaf(flow, a, sgn, order.leaf(b), window, h, path) &&
                (best.empty() || path.size() < best.size()))
                best = std::move(path);
        }
        if (best.empty()) {
            fail.reason = "transverse path between consecutive leaves left the window";
            break;
        }
        sec.insert(sec.end(), best.begin(), best.end());
    }

    CrossSection out;
    out.polyline.polyline = sec;
    out.covered_seeds = ex.points;
    const double tol = 1e-9 * std::max(1.0, window.diameter());
    std::vector<Vec2> bad;
    for (const Vec2 p : seed_chain) {
        const WindowLeaf& l = order.leaf(p);
        if (section_crossings(sec, l, tol) != 1) bad.push_back(p);
    }
    if (bad.empty() && fail.reason.empty()) {
        for (const Vec2 p : ex.points) out.covered_leaves.push_back(order.leaf(p).id);
        return out;
    }

    if (fail.reason.empty())
        fail.reason = std::to_string(bad.size()) + " chain leaves are not crossed exactly once";
    auto chain_index = [&](Vec2 p) {
        return std::find(seed_chain.begin(), seed_chain.end(), p) - seed_chain.begin();
    };
    const auto base_idx = static_cast<std::ptrdiff_t>(i0);
    std::sort(bad.begin(), bad.end(), [&](Vec2 a, Vec2 b) {
        return std::abs(chain_index(a) - base_idx) < std::abs(chain_index(b) - base_idx);
    });
    // Candidates nearest the base leaf first.
    std::vector<Vec2> candidates = ex.points;
    std::stable_sort(candidates.begin(), candidates.end(), [&](Vec2 a, Vec2 b) {
        return std::abs(chain_index(a) - base_idx) < std::abs(chain_index(b) - base_idx);
    });
    for (std::size_t u = 0; u < std::min<std::size_t>(bad.size(), 3) && !fail.witness; ++u)
        for (const Vec2 e : candidates) {
            try {
                if (!separation_triple(flow, bad[u], base, e, window, opts)) {
                    fail.witness = WitnessTriple{{bad[u], base, e}};
                    break;
                }
            } catch (const Error&) {
            }
        }
    return fail;
}

}  // namespace folia
