#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "folia/errors.hpp"
#include "folia/flow.hpp"
#include "folia/geometry.hpp"

namespace folia {

struct FoliationOptions {
    double tube_tol = 1e-4;           // SameLeaf distance
    int grid = 400;                   // occupancy grid cells per side
    double transverse_margin = 0.05;  // lower bound on |sin angle|
    double leaf_time_cap = 500.0;     // per direction, when tracing a leaf in a window
    double chord = 0.02;              // Euclidean sample spacing along traced leaves
};

struct Transversal {
    Polyline polyline;
    int orientation = 1;
};

// Smallest |sin angle| between the polyline and the field, sampled at vertices
// and segment midpoints.
double transversality(const PlaneFlow& flow, const Polyline& line);
void check_transversal(const PlaneFlow& flow, const Transversal& t, double margin = 0.05);

// The connected component, inside the window, of the leaf through `seed`.
struct WindowLeaf {
    Vec2 seed;
    std::uint64_t id = 0;
    GArc arc;
    Polyline poly;
    bool spans = false;  // both ends reach the window boundary
};

WindowLeaf trace_window_leaf(const FlowMap& flow, Vec2 seed, const Window& window,
                             const FoliationOptions& opts = {});

// Distance from p to the true orbit through the polyline, refined by Newton on
// the flow time near the closest sample.
double leaf_distance(const FlowMap& flow, const WindowLeaf& leaf, Vec2 p);

// Segment pq meets the leaf an even number of times.
bool same_side(const WindowLeaf& leaf, Vec2 p, Vec2 q);

struct GBox {
    GArc bottom_arc;
    GArc top_arc;
    Transversal left_edge;
    Transversal right_edge;
    double height = 0.0;
    double inner_len = 0.0;
    double outer_len = 0.0;
    std::vector<GArc> leaves;  // sampled family, left edge to right edge
};

GBox gbox_build(const FlowMap& flow, const GArc& arc, const Transversal& left,
                const Transversal& right, int n_leaves = 33);

// Number of times the leaf through `seed`, traced for |t| <= span, enters the
// box after its first passage.
int gbox_reentries(const FlowMap& flow, const GBox& box, Vec2 seed, double span);

enum class LeafOrder { Less, Greater, SameLeaf };
const char* to_string(LeafOrder o);

struct OrderedRegion {
    Window window;
    Vec2 base_seed;
    Vec2 positive_side;
    std::map<std::uint64_t, Vec2> leaf_index;
};

// Caches traced leaves for repeated comparisons in one region.
class LeafOrderer {
public:
    LeafOrderer(const FlowMap& flow, OrderedRegion region, FoliationOptions opts = {});

    LeafOrder compare(Vec2 a, Vec2 b);
    bool same_leaf(Vec2 a, Vec2 b);
    const WindowLeaf& leaf(Vec2 p);
    const OrderedRegion& region() const { return region_; }
    void set_positive_side(Vec2 p) { region_.positive_side = p; }

private:
    bool positive_of(const WindowLeaf& l, Vec2 p);  // p lies on the positive side of l

    const FlowMap& flow_;
    OrderedRegion region_;
    FoliationOptions opts_;
    std::map<std::pair<double, double>, WindowLeaf> cache_;
};

LeafOrder leaf_compare(const FlowMap& flow, const OrderedRegion& region, Vec2 a, Vec2 b,
                       const FoliationOptions& opts = {});

// Cell grid over a window with leaves rasterised as blocked 4-connected paths.
class OccupancyGrid {
public:
    OccupancyGrid(const Window& w, int n);
    void block(const Polyline& line);
    // Labels 8-connected components of free cells; returns the label of p's
    // cell, or -1 if it is blocked and has no free neighbour.
    int component_of(Vec2 p);
    bool connected(Vec2 p, Vec2 q);
    int n() const { return n_; }

private:
    std::pair<int, int> cell(Vec2 p) const;
    void mark(int i, int j);
    void label();

    Window w_;
    int n_;
    std::vector<std::uint8_t> blocked_;
    std::vector<int> labels_;
    bool labelled_ = false;
};

// 1-based index of the leaf that separates the other two, if any.
std::optional<int> separation_triple(const FlowMap& flow, Vec2 p1, Vec2 p2, Vec2 p3,
                                     const Window& window, const FoliationOptions& opts = {});

struct CrossSection {
    Transversal polyline;
    std::vector<std::uint64_t> covered_leaves;
    std::vector<Vec2> covered_seeds;
};

struct FailureReport {
    std::string reason;
    std::optional<WitnessTriple> witness;
    Window window;
    int grid = 0;
};

using SectionResult = std::variant<CrossSection, FailureReport>;

SectionResult build_cross_section(const FlowMap& flow, const Window& window,
                                  const std::vector<Vec2>& seed_chain,
                                  const FoliationOptions& opts = {});

// Points along the window boundary inset by `inset`, counterclockwise from the
// bottom-left corner, `per_side` per edge.
std::vector<Vec2> perimeter_chain(const Window& window, int per_side, double inset);

}  // namespace folia
