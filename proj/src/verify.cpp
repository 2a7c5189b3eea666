#include "folia/verify.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>

namespace folia {

Vec2 GridSpec::at(int i, int j) const {
    const double fx = nx > 1 ? static_cast<double>(i) / (nx - 1) : 0.5;
    const double fy = ny > 1 ? static_cast<double>(j) / (ny - 1) : 0.5;
    return {window.xmin + window.width() * fx, window.ymin + window.height() * fy};
}

std::vector<Vec2> GridSpec::points() const {
    std::vector<Vec2> out;
    out.reserve(static_cast<std::size_t>(nx) * ny);
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) out.push_back(at(i, j));
    return out;
}

namespace {

// Compensated (Neumaier) running sum.
class NeumaierSum {
public:
    void add(double x) {
        const double t = sum_ + x;
        if (std::fabs(sum_) >= std::fabs(x)) comp_ += (sum_ - t) + x;
        else comp_ += (x - t) + sum_;
        sum_ = t;
    }
    double value() const { return sum_ + comp_; }

private:
    double sum_ = 0.0, comp_ = 0.0;
};

void check_grid(const GridSpec& grid) {
    if (!grid.window.valid()) throw InvalidInput("grid window is empty");
    if (grid.nx < 1 || grid.ny < 1) throw InvalidInput("grid needs at least one sample per side");
}

}  // namespace

ResidualReport conjugacy_residual(const HomeoHandle& h, const MapFn& f, const MapFn& g, const GridSpec& grid) {
    check_grid(grid);
    ResidualReport r;
    r.window = grid.window;
    NeumaierSum sum;
    for (const Vec2 p : grid.points()) {
        try {
            const Vec2 hp = h.forward(p);
            const double res = dist(h.forward(f(p)), g(hp));
            if (!std::isfinite(res)) throw DomainError("non-finite residual");
            r.samples.push_back({p, hp, res});
            sum.add(res);
            if (r.n_samples == 0 || res > r.max_residual) {
                r.max_residual = res;
                r.worst_point = p;
            }
            ++r.n_samples;
        } catch (const Error&) {
            ++r.excluded;
        }
    }
    if (r.n_samples > 0) r.mean_residual = sum.value() / static_cast<double>(r.n_samples);
    return r;
}

HomeoDiagnostics homeo_diagnostics(const HomeoHandle& h, const GridSpec& grid) {
    check_grid(grid);
    HomeoDiagnostics d;
    const int nx = grid.nx, ny = grid.ny;
    std::vector<std::optional<Vec2>> img(static_cast<std::size_t>(nx) * ny);
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
            const Vec2 p = grid.at(i, j);
            try {
                const Vec2 hp = h.forward(p);
                const Vec2 back = h.inverse(hp);
                if (!finite(hp) || !finite(back)) throw DomainError("non-finite image");
                d.round_trip_max = std::max(d.round_trip_max, dist(back, p));
                img[static_cast<std::size_t>(j * nx + i)] = hp;
                ++d.n_samples;
            } catch (const Error&) {
                ++d.excluded;
            }
        }

    // Collisions: sweep over images sorted by x.
    std::vector<std::size_t> idx;
    for (std::size_t k = 0; k < img.size(); ++k)
        if (img[k]) idx.push_back(k);
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return img[a]->x < img[b]->x; });
    constexpr double tol = 1e-9;
    for (std::size_t a = 0; a < idx.size(); ++a)
        for (std::size_t b = a + 1; b < idx.size() && img[idx[b]]->x - img[idx[a]]->x <= tol; ++b)
            if (dist(*img[idx[a]], *img[idx[b]]) <= tol) ++d.collisions;

    for (int j = 0; j + 1 < ny; ++j)
        for (int i = 0; i + 1 < nx; ++i) {
            const auto& o = img[static_cast<std::size_t>(j * nx + i)];
            const auto& ex = img[static_cast<std::size_t>(j * nx + i + 1)];
            const auto& ey = img[static_cast<std::size_t>((j + 1) * nx + i)];
            if (!o || !ex || !ey) continue;
            const double c = cross(*ex - *o, *ey - *o);
            if (c > 0) ++d.positive;
            else if (c < 0) ++d.negative;
            else ++d.degenerate;
        }
    return d;
}

nlohmann::json to_json(const ResidualReport& r) {
    return {{"max_residual", r.max_residual},
            {"mean_residual", r.mean_residual},
            {"n_samples", r.n_samples},
            {"excluded", r.excluded},
            {"window", {r.window.xmin, r.window.xmax, r.window.ymin, r.window.ymax}},
            {"worst_point", {r.worst_point.x, r.worst_point.y}}};
}

nlohmann::json to_json(const HomeoDiagnostics& d) {
    return {{"round_trip_max", d.round_trip_max},
            {"collisions", d.collisions},
            {"orientation", {{"positive", d.positive}, {"negative", d.negative}, {"degenerate", d.degenerate}}},
            {"excluded", d.excluded},
            {"n_samples", d.n_samples},
            {"passes", d.passes()}};
}

}  // namespace folia
