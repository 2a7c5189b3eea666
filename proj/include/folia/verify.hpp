#pragma once

#include <cstddef>
#include <vector>

#include <json.hpp>

#include "folia/conjugacy.hpp"
#include "folia/geometry.hpp"

namespace folia {

// nx by ny samples including the window corners.
struct GridSpec {
    Window window;
    int nx = 20;
    int ny = 20;

    Vec2 at(int i, int j) const;
    std::vector<Vec2> points() const;
};

struct ResidualSample {
    Vec2 p;
    Vec2 hp;
    double residual;
};

struct ResidualReport {
    double max_residual = 0.0;
    double mean_residual = 0.0;
    std::size_t n_samples = 0;
    std::size_t excluded = 0;  // samples whose evaluation failed
    Window window;
    Vec2 worst_point;
    std::vector<ResidualSample> samples;
};

// residual(p) = |h(f(p)) - g(h(p))| over the grid.
ResidualReport conjugacy_residual(const HomeoHandle& h, const MapFn& f, const MapFn& g, const GridSpec& grid);

struct HomeoDiagnostics {
    double round_trip_max = 0.0;
    std::size_t collisions = 0;  // pairs of distinct grid points mapped within 1e-9
    std::size_t positive = 0, negative = 0, degenerate = 0;  // discrete Jacobian signs per cell
    std::size_t excluded = 0;
    std::size_t n_samples = 0;

    bool single_orientation() const { return degenerate == 0 && (positive == 0 || negative == 0); }
    bool passes(double round_trip_tol = 1e-6) const {
        return excluded == 0 && round_trip_max < round_trip_tol && collisions == 0 && single_orientation();
    }
};

HomeoDiagnostics homeo_diagnostics(const HomeoHandle& h, const GridSpec& grid);

nlohmann::json to_json(const ResidualReport& r);
nlohmann::json to_json(const HomeoDiagnostics& d);

}  // namespace folia
