#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "folia/errors.hpp"
#include "folia/flow.hpp"
#include "folia/foliation.hpp"
#include "folia/geometry.hpp"

namespace folia {

enum class Direction { Forward, Backward };
const char* to_string(Direction d);

// Flow-time horizon used for a perturbation radius: max(50, 2/eps).
double cloud_horizon(double eps);

struct CloudParams {
    double eps = 1e-2;
    double t_max = 50.0;
    std::optional<double> t_min;  // defaults to t_max / 2
    double delta = 0.0;           // 0 selects window diameter / 400
    Window window;
    int n_seeds = 256;
    std::uint64_t seed = 0;

    double t_min_value() const { return t_min.value_or(0.5 * t_max); }
    double delta_value() const { return delta > 0.0 ? delta : window.diameter() / 400.0; }
};

// Occupied cells of a delta-grid over the window with per-cell seed counts.
struct ProlongationCloud {
    Vec2 base_point;
    Direction direction = Direction::Forward;
    CloudParams params;
    int nx = 0, ny = 0;
    std::vector<std::uint32_t> weight;
    int dropped = 0;  // seeds that blew up

    int cell(Vec2 p) const;  // -1 outside the window
    Vec2 center(int c) const;
    bool occupied(int c) const { return c >= 0 && weight[static_cast<std::size_t>(c)] > 0; }
    // Some occupied cell lies within `radius` cells of p.
    bool near(Vec2 p, int radius = 0) const;
    std::size_t size() const;
    std::vector<Vec2> points() const;
};

struct CloudPair {
    ProlongationCloud flow;  // all samples with |t| >= t_min
    ProlongationCloud map;   // samples at integer times k >= ceil(t_min)
};

// Both clouds from one sweep over the same seeds.
CloudPair prolongation_clouds(const FlowMap& flow, Vec2 x, const CloudParams& params,
                              Direction dir = Direction::Forward);
ProlongationCloud prolongation_flow(const FlowMap& flow, Vec2 x, const CloudParams& params,
                                    Direction dir = Direction::Forward);
ProlongationCloud prolongation_map(const FlowMap& flow, Vec2 x, const CloudParams& params,
                                   Direction dir = Direction::Forward);

struct CertifyOptions {
    std::vector<double> eps{1e-2, 1e-3, 1e-4};
    std::optional<double> t_max;  // per level; defaults to cloud_horizon(eps)
    std::optional<double> t_min;  // per level; defaults to t_max / 2
    int n_seeds = 256;
    std::uint64_t seed = 0;
};

// Cells occupied at two consecutive perturbation radii.
struct CertifiedCloud {
    Vec2 base_point;
    Direction direction = Direction::Forward;
    std::vector<CloudPair> levels;
    std::vector<std::uint8_t> flow_cells;
    std::vector<std::uint8_t> map_cells;

    const ProlongationCloud& grid() const { return levels.front().flow; }
    bool certified(Vec2 p, int radius = 0) const;
    bool map_certified(Vec2 p, int radius = 0) const;
    std::size_t count() const;
    std::vector<Vec2> points() const;
    std::vector<Vec2> map_points() const;
    int dropped() const;
};

CertifiedCloud certify_cloud(const FlowMap& flow, Vec2 x, const Window& window, double delta,
                             Direction dir = Direction::Forward, const CertifyOptions& opts = {});

// J+_f(x) meets the delta-dilated arc [y, y+1] of the flow line through y.
bool prolongation_arc_check(const FlowMap& flow, const CertifiedCloud& cloud_of_x, Vec2 y);
bool prolongation_arc_check(const FlowMap& flow, Vec2 x, Vec2 y, const Window& window,
                            double delta, const CertifyOptions& opts = {});

struct ReebComponentReport {
    GArc gamma_minus;
    GArc gamma_plus;
    Vec2 minus_seed;
    Vec2 plus_seed;
    Vec2 region_seed;
    std::string orientation_certificate;
    bool bidirectional = false;
    bool certified = false;  // false marks an inconclusive candidate
    double coverage = 0.0;   // share of certified cells near gamma_plus
    std::size_t certified_cells = 0;
};

struct DetectOptions {
    double fate_time = 500.0;
    double refine_time = 50000.0;
    double screen_eps = 1e-2;
    double match_share = 0.5;
    CertifyOptions certify;
};

std::vector<ReebComponentReport> detect_reeb(const FlowMap& flow, const Window& window, int resolution,
                                             const DetectOptions& opts = {});

enum class Verdict { Trivial, Nontrivial, Inconclusive };
const char* to_string(Verdict v);

struct Classification {
    Verdict verdict = Verdict::Inconclusive;
    std::vector<ReebComponentReport> reports;
    std::string detail;
    std::size_t components() const;  // certified reports
};

Classification classify_triviality(const FlowMap& flow, const Window& window, int resolution,
                                   const DetectOptions& opts = {});

// The arc and its time-one image intersect.
bool free_arc_check(const FlowMap& flow, const ReebComponentReport& report, const Polyline& arc,
                    double tube_tol = 1e-2);

}  // namespace folia
