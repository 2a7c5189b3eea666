#include "folia/invariants.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace folia {

bool InvariantReport::passed() const {
    return std::all_of(suites.begin(), suites.end(), [](const SuiteResult& s) { return s.skipped || s.passed; });
}

const SuiteResult* InvariantReport::suite(const std::string& name) const {
    for (const auto& s : suites)
        if (s.name == name) return &s;
    return nullptr;
}

namespace {

SuiteResult named(const char* name) {
    SuiteResult s;
    s.name = name;
    return s;
}

void finish(SuiteResult& s, double required_share = 1.0) {
    s.share = s.checked > 0 ? static_cast<double>(s.checked - s.failed) / s.checked : 1.0;
    s.skipped = s.checked == 0;
    s.passed = !s.skipped && s.share >= required_share;
}

// Up to n arc points inside the window, evenly spread along the arc.
std::vector<Vec2> spread(const GArc& arc, const Window& inner, int n) {
    std::vector<Vec2> in;
    for (const auto& s : arc.samples)
        if (inner.contains(s.p)) in.push_back(s.p);
    if (static_cast<int>(in.size()) <= n) return in;
    std::vector<Vec2> out;
    for (int k = 0; k < n; ++k) out.push_back(in[static_cast<std::size_t>((k + 0.5) * in.size() / n)]);
    return out;
}

// Golden-angle points filling the window.
std::vector<Vec2> golden_points(const Window& w, int n) {
    constexpr double phi = 0.6180339887498949;
    std::vector<Vec2> out;
    for (int k = 0; k < n; ++k) {
        const double u = (k + 0.5) / n;
        const double v = std::fmod(0.5 + k * phi, 1.0);
        out.push_back({w.xmin + w.width() * u, w.ymin + w.height() * v});
    }
    return out;
}

CloudParams cloud_params(const Window& w, double eps, double delta, std::uint64_t seed) {
    CloudParams p;
    p.eps = eps;
    p.t_max = cloud_horizon(eps);
    p.window = w;
    p.delta = delta;
    p.seed = seed;
    return p;
}

void check_containment(SuiteResult& s, const CloudPair& pair) {
    for (const Vec2 q : pair.map.points()) {
        ++s.checked;
        if (!pair.flow.near(q, 1)) ++s.failed;
    }
}

// A polyline from a point of gamma_minus to a point of gamma_plus with jittered interior vertices.
Polyline crossing_arc(const ReebComponentReport& r, const Window& inner, std::mt19937_64& rng) {
    const auto minus = spread(r.gamma_minus, inner, 200);
    const auto plus = spread(r.gamma_plus, inner, 200);
    if (minus.empty() || plus.empty()) return {};
    std::uniform_int_distribution<std::size_t> im(0, minus.size() - 1), ip(0, plus.size() - 1);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const Vec2 a = minus[im(rng)], b = plus[ip(rng)];
    const Vec2 d = b - a;
    const Vec2 n = perp(d / norm(d));
    std::vector<double> ts;
    for (int k = 0; k < 4; ++k) ts.push_back(0.1 + 0.8 * u(rng));
    std::sort(ts.begin(), ts.end());
    Polyline arc{a};
    for (const double t : ts) arc.push_back(a + d * t + n * ((u(rng) - 0.5) * 0.2 * norm(d)));
    arc.push_back(b);
    return arc;
}

}  // namespace

InvariantReport check_invariants(const FlowMap& flow, const Window& window, const InvariantOptions& opts) {
    if (!window.valid()) throw InvalidInput("window is empty");
    if (opts.resolution < 8) throw InvalidInput("resolution must be at least 8");
    if (opts.eps.empty()) throw InvalidInput("eps sweep is empty");
    InvariantReport rep;
    const double delta = window.diameter() / opts.resolution;
    const Window inner = window.inset(3 * delta);

    DetectOptions dopts;
    dopts.certify.eps = opts.eps;
    dopts.certify.seed = opts.seed;
    rep.detection = "ok";
    try {
        rep.components = detect_reeb(flow, window, opts.resolution, dopts);
    } catch (const InvalidInput& e) {
        rep.detection = e.what();
    }

    SuiteResult edge = named("edge_in_prolongation"), contain = named("map_in_flow"), sym = named("symmetry"),
                iter = named("iterate_arc"), free = named("free_arc");
    CertifyOptions copts;
    copts.eps = opts.eps;
    copts.seed = opts.seed;
    std::mt19937_64 rng(opts.seed + 0x5eed);

    for (const auto& c : rep.components) {
        if (!c.certified) continue;
        const CertifiedCloud cloud = certify_cloud(flow, c.minus_seed, window, delta, Direction::Forward, copts);

        for (const Vec2 y : spread(c.gamma_plus, inner, opts.edge_samples)) {
            ++edge.checked;
            if (!cloud.certified(y, 1)) ++edge.failed;
        }

        for (const auto& level : cloud.levels) check_containment(contain, level);

        // y in J+(x) should give x in J-(y), for certified cells met by gamma_plus.
        for (const Vec2 y : spread(c.gamma_plus, inner, opts.symmetry_cells)) {
            if (!cloud.certified(y)) continue;
            const auto back = prolongation_flow(flow, y, cloud_params(window, opts.eps.front(), delta, opts.seed),
                                                Direction::Backward);
            ++sym.checked;
            if (!back.near(c.minus_seed, 1)) ++sym.failed;
        }

        int used = 0;
        for (const Vec2 y : spread(c.gamma_plus, inner, 4 * opts.pairs)) {
            if (used >= opts.pairs) break;
            if (!cloud.certified(y, 1)) continue;
            ++used;
            ++iter.checked;
            if (!prolongation_arc_check(flow, cloud, y)) ++iter.failed;
        }

        int made = 0, rejected = 0;
        for (int attempt = 0; made < opts.arcs && attempt < 10 * opts.arcs; ++attempt) {
            const Polyline arc = crossing_arc(c, inner, rng);
            if (arc.empty()) break;
            try {
                const bool ok = free_arc_check(flow, c, arc);
                ++made;
                ++free.checked;
                if (!ok) ++free.failed;
            } catch (const BadArc&) {
                ++rejected;
            } catch (const IntegrationError&) {
                ++rejected;
            }
        }
        free.detail = std::to_string(rejected) + " draws left the region and were redrawn";
    }

    if (contain.checked == 0) {
        for (const Vec2 x : golden_points(inner, opts.generic_points)) {
            try {
                check_containment(contain,
                                  prolongation_clouds(flow, x, cloud_params(window, opts.eps.front(), delta, opts.seed)));
            } catch (const IntegrationError&) {
                // base points whose own orbit blows up have no cloud
            }
        }
        // Empty clouds are vacuously contained.
        if (contain.checked == 0) {
            contain.detail = "all clouds empty";
            contain.passed = true;
        }
    }

    finish(edge);
    if (contain.detail.empty()) finish(contain);
    finish(sym, opts.symmetry_share);
    finish(iter);
    finish(free);
    for (SuiteResult* s : {&edge, &sym, &iter, &free})
        if (s->checked == 0) s->detail = "no certified Reeb component";
    rep.suites = {edge, contain, sym, iter, free};
    return rep;
}

}  // namespace folia
