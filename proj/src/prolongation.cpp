#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "folia/reeb.hpp"

namespace folia {

const char* to_string(Direction d) { return d == Direction::Forward ? "forward" : "backward"; }

double cloud_horizon(double eps) { return std::max(50.0, 2.0 / eps); }

int ProlongationCloud::cell(Vec2 p) const {
    const Window& w = params.window;
    if (!w.contains(p)) return -1;
    const double d = params.delta_value();
    const int i = std::min(nx - 1, static_cast<int>((p.x - w.xmin) / d));
    const int j = std::min(ny - 1, static_cast<int>((p.y - w.ymin) / d));
    return j * nx + i;
}

Vec2 ProlongationCloud::center(int c) const {
    const double d = params.delta_value();
    return {params.window.xmin + (c % nx + 0.5) * d, params.window.ymin + (c / nx + 0.5) * d};
}

namespace {

template <class Pred>
bool any_near(const ProlongationCloud& g, Vec2 p, int radius, Pred&& occupied) {
    const double d = g.params.delta_value();
    const int i = static_cast<int>(std::floor((p.x - g.params.window.xmin) / d));
    const int j = static_cast<int>(std::floor((p.y - g.params.window.ymin) / d));
    for (int dj = -radius; dj <= radius; ++dj)
        for (int di = -radius; di <= radius; ++di) {
            const int a = i + di, b = j + dj;
            if (a < 0 || b < 0 || a >= g.nx || b >= g.ny) continue;
            if (occupied(b * g.nx + a)) return true;
        }
    return false;
}

ProlongationCloud empty_cloud(Vec2 x, const CloudParams& params, Direction dir) {
    if (!params.window.valid()) throw InvalidInput("cloud window is empty");
    if (!(params.eps > 0.0)) throw InvalidInput("perturbation radius must be positive");
    ProlongationCloud c;
    c.base_point = x;
    c.direction = dir;
    c.params = params;
    const double d = params.delta_value();
    c.nx = std::max(1, static_cast<int>(std::ceil(params.window.width() / d)));
    c.ny = std::max(1, static_cast<int>(std::ceil(params.window.height() / d)));
    c.weight.assign(static_cast<std::size_t>(c.nx) * c.ny, 0);
    return c;
}

// Golden-angle spiral in the eps-disc, rotated by an angle drawn from `seed`.
std::vector<Vec2> disc_seeds(Vec2 x, double eps, int n, std::uint64_t seed) {
    const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
    double rot = 0.0;
    if (seed != 0) {
        std::mt19937_64 rng(seed);
        rot = std::uniform_real_distribution<double>(0.0, 2.0 * std::numbers::pi)(rng);
    }
    std::vector<Vec2> out;
    out.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const double r = eps * std::sqrt((i + 0.5) / n);
        const double th = i * golden + rot;
        out.push_back({x.x + r * std::cos(th), x.y + r * std::sin(th)});
    }
    return out;
}

bool step_near_window(const StepInfo& s, const Window& w) {
    const double pad = dist(s.y0, s.y1);
    return std::max(s.y0.x, s.y1.x) + pad >= w.xmin && std::min(s.y0.x, s.y1.x) - pad <= w.xmax &&
           std::max(s.y0.y, s.y1.y) + pad >= w.ymin && std::min(s.y0.y, s.y1.y) - pad <= w.ymax;
}

// Cells within one cell of the orbit of x over |t| <= t_max.
std::vector<std::uint8_t> orbit_mask(const FlowMap& flow, Vec2 x, const ProlongationCloud& g) {
    std::vector<std::uint8_t> mask(g.weight.size(), 0);
    const double spacing = 0.5 * g.params.delta_value();
    auto mark = [&](Vec2 q) {
        const double d = g.params.delta_value();
        const int i = static_cast<int>(std::floor((q.x - g.params.window.xmin) / d));
        const int j = static_cast<int>(std::floor((q.y - g.params.window.ymin) / d));
        for (int dj = -1; dj <= 1; ++dj)
            for (int di = -1; di <= 1; ++di) {
                const int a = i + di, b = j + dj;
                if (a >= 0 && b >= 0 && a < g.nx && b < g.ny) mask[static_cast<std::size_t>(b * g.nx + a)] = 1;
            }
    };
    mark(x);
    for (double end : {g.params.t_max, -g.params.t_max}) {
        try {
            flow.sweep(x, 0.0, end, [&](const StepInfo& s) {
                if (step_near_window(s, g.params.window))
                    densify(s, spacing, [&](double, Vec2 q) { mark(q); });
                return true;
            });
        } catch (const IntegrationError&) {
        }
    }
    return mask;
}

}  // namespace

bool ProlongationCloud::near(Vec2 p, int radius) const {
    return any_near(*this, p, radius, [&](int c) { return occupied(c); });
}

std::size_t ProlongationCloud::size() const {
    return static_cast<std::size_t>(std::count_if(weight.begin(), weight.end(), [](auto w) { return w > 0; }));
}

std::vector<Vec2> ProlongationCloud::points() const {
    std::vector<Vec2> out;
    for (std::size_t c = 0; c < weight.size(); ++c)
        if (weight[c] > 0) out.push_back(center(static_cast<int>(c)));
    return out;
}

CloudPair prolongation_clouds(const FlowMap& flow, Vec2 x, const CloudParams& params, Direction dir) {
    if (!(params.t_max > 0.0)) throw InvalidInput("cloud horizon must be positive");
    CloudPair out{empty_cloud(x, params, dir), empty_cloud(x, params, dir)};
    const double sign = dir == Direction::Forward ? 1.0 : -1.0;
    const double t_max = params.t_max, t_min = params.t_min_value();
    const long k_min = std::max(1L, static_cast<long>(std::ceil(t_min)));
    const long k_end = static_cast<long>(std::ceil(t_max));
    const double spacing = 0.5 * params.delta_value();
    const Window& w = params.window;

    std::vector<int> flow_stamp(out.flow.weight.size(), -1), map_stamp(out.map.weight.size(), -1);
    const auto seeds = disc_seeds(x, params.eps, params.n_seeds, params.seed);
    for (int i = 0; i < static_cast<int>(seeds.size()); ++i) {
        auto bin = [&](ProlongationCloud& c, std::vector<int>& stamp, Vec2 q) {
            const int k = c.cell(q);
            if (k < 0 || stamp[static_cast<std::size_t>(k)] == i) return;
            stamp[static_cast<std::size_t>(k)] = i;
            ++c.weight[static_cast<std::size_t>(k)];
        };
        Vec2 p = seeds[static_cast<std::size_t>(i)];
        try {
            // Unit-time segments keep integer-time states exact for the map cloud.
            for (long k = 0; k < k_end; ++k) {
                const double b = std::min(t_max, static_cast<double>(k + 1));
                const auto res = flow.sweep(p, sign * static_cast<double>(k), sign * b, [&](const StepInfo& s) {
                    if (std::fabs(s.t1) < t_min || !step_near_window(s, w)) return true;
                    densify(s, spacing, [&](double t, Vec2 q) {
                        if (std::fabs(t) >= t_min) bin(out.flow, flow_stamp, q);
                    });
                    return true;
                });
                p = res.p;
                if (b == static_cast<double>(k + 1) && k + 1 >= k_min) bin(out.map, map_stamp, p);
            }
        } catch (const IntegrationError&) {
            ++out.flow.dropped;
            ++out.map.dropped;
        }
    }

    const auto mask = orbit_mask(flow, x, out.flow);
    for (std::size_t c = 0; c < mask.size(); ++c)
        if (mask[c]) out.flow.weight[c] = out.map.weight[c] = 0;
    return out;
}

ProlongationCloud prolongation_flow(const FlowMap& flow, Vec2 x, const CloudParams& params, Direction dir) {
    return prolongation_clouds(flow, x, params, dir).flow;
}

ProlongationCloud prolongation_map(const FlowMap& flow, Vec2 x, const CloudParams& params, Direction dir) {
    return prolongation_clouds(flow, x, params, dir).map;
}

bool CertifiedCloud::certified(Vec2 p, int radius) const {
    return any_near(grid(), p, radius, [&](int c) { return flow_cells[static_cast<std::size_t>(c)] != 0; });
}

bool CertifiedCloud::map_certified(Vec2 p, int radius) const {
    return any_near(grid(), p, radius, [&](int c) { return map_cells[static_cast<std::size_t>(c)] != 0; });
}

std::size_t CertifiedCloud::count() const {
    return static_cast<std::size_t>(std::count(flow_cells.begin(), flow_cells.end(), 1));
}

std::vector<Vec2> CertifiedCloud::points() const {
    std::vector<Vec2> out;
    for (std::size_t c = 0; c < flow_cells.size(); ++c)
        if (flow_cells[c]) out.push_back(grid().center(static_cast<int>(c)));
    return out;
}

std::vector<Vec2> CertifiedCloud::map_points() const {
    std::vector<Vec2> out;
    for (std::size_t c = 0; c < map_cells.size(); ++c)
        if (map_cells[c]) out.push_back(grid().center(static_cast<int>(c)));
    return out;
}

int CertifiedCloud::dropped() const {
    int n = 0;
    for (const auto& l : levels) n += l.flow.dropped;
    return n;
}

CertifiedCloud certify_cloud(const FlowMap& flow, Vec2 x, const Window& window, double delta, Direction dir,
                             const CertifyOptions& opts) {
    if (opts.eps.size() < 2) throw InvalidInput("certification needs at least two perturbation radii");
    CertifiedCloud out;
    out.base_point = x;
    out.direction = dir;
    for (double eps : opts.eps) {
        CloudParams p;
        p.eps = eps;
        p.t_max = opts.t_max.value_or(cloud_horizon(eps));
        p.t_min = opts.t_min;
        p.delta = delta;
        p.window = window;
        p.n_seeds = opts.n_seeds;
        p.seed = opts.seed;
        out.levels.push_back(prolongation_clouds(flow, x, p, dir));
    }
    const std::size_t n = out.levels.front().flow.weight.size();
    out.flow_cells.assign(n, 0);
    out.map_cells.assign(n, 0);
    for (std::size_t k = 0; k + 1 < out.levels.size(); ++k) {
        const auto& a = out.levels[k];
        const auto& b = out.levels[k + 1];
        for (std::size_t c = 0; c < n; ++c) {
            if (a.flow.weight[c] && b.flow.weight[c]) out.flow_cells[c] = 1;
            if (a.map.weight[c] && b.map.weight[c]) out.map_cells[c] = 1;
        }
    }
    return out;
}

bool prolongation_arc_check(const FlowMap& flow, const CertifiedCloud& cloud_of_x, Vec2 y) {
    if (!cloud_of_x.certified(y, 1)) throw NotCertified("y is not certified in the flow cloud of x");
    const double spacing = 0.5 * cloud_of_x.grid().params.delta_value();
    bool hit = cloud_of_x.map_certified(y, 1);
    flow.sweep(y, 0.0, 1.0, [&](const StepInfo& s) {
        densify(s, spacing, [&](double, Vec2 q) { hit = hit || cloud_of_x.map_certified(q, 1); });
        return !hit;
    });
    return hit;
}

bool prolongation_arc_check(const FlowMap& flow, Vec2 x, Vec2 y, const Window& window, double delta,
                            const CertifyOptions& opts) {
    return prolongation_arc_check(flow, certify_cloud(flow, x, window, delta, Direction::Forward, opts), y);
}

}  // namespace folia
