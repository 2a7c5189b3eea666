#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <iosfwd>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "folia/errors.hpp"
#include "folia/field.hpp"
#include "folia/geometry.hpp"

namespace folia {

struct FlowOptions {
    double abs_tol = 1e-9;
    double rel_tol = 1e-9;
    double max_step = 0.1;
    double guard_radius = 1e6;
};

struct ArcSample {
    double t;
    Vec2 p;
};

struct GArc {
    std::vector<ArcSample> samples;
    std::uint64_t leaf_id = 0;
    bool clipped = false;  // set when the arc was cut at a window boundary

    double phi_length() const {
        return samples.empty() ? 0.0 : samples.back().t - samples.front().t;
    }
    Polyline points() const;
    Vec2 front() const { return samples.front().p; }
    Vec2 back() const { return samples.back().p; }
};

// One accepted integrator step, with endpoint derivatives for cubic Hermite
// interpolation.
struct StepInfo {
    double t0, t1;
    Vec2 y0, y1, f0, f1;

    Vec2 hermite(double t) const {
        const double h = t1 - t0;
        const double s = (t - t0) / h;
        const double s2 = s * s, s3 = s2 * s;
        const double h00 = 2 * s3 - 3 * s2 + 1, h10 = s3 - 2 * s2 + s;
        const double h01 = -2 * s3 + 3 * s2, h11 = s3 - s2;
        return y0 * h00 + f0 * (h10 * h) + y1 * h01 + f1 * (h11 * h);
    }
};

struct SweepLimits {
    double max_h = std::numeric_limits<double>::infinity();
    double max_chord = std::numeric_limits<double>::infinity();
};

struct SweepResult {
    Vec2 p;
    double t;
    bool stopped;  // the callback asked to stop before t1
};

class PlaneFlow {
public:
    virtual ~PlaneFlow() = default;
    virtual Vec2 velocity(Vec2 p) const = 0;
    virtual Vec2 integrate(Vec2 p, double t) const = 0;
    Vec2 time_one(Vec2 p) const { return integrate(p, 1.0); }
};

struct TraceOptions {
    double max_dt = 0.1;
    double max_chord = 0.05;
    std::optional<Window> clip;
};

class FlowMap final : public PlaneFlow {
public:
    explicit FlowMap(FieldPtr field, FlowOptions opts = {});

    Vec2 velocity(Vec2 p) const override { return field_->eval(p); }
    Vec2 integrate(Vec2 p, double t) const override;

    // Integrates from (p, t0) toward t1, invoking on_step(const StepInfo&) after
    // each accepted step. The callback returns false to stop early.
    template <class OnStep>
    SweepResult sweep(Vec2 p, double t0, double t1, OnStep&& on_step,
                      const SweepLimits& lim = {}) const;

    GArc trace_leaf(Vec2 p, double a, double b, const TraceOptions& opts = {}) const;

    const VectorFieldHandle& field() const { return *field_; }
    const FieldPtr& field_ptr() const { return field_; }
    const FlowOptions& options() const { return opts_; }

private:
    struct Stage {
        Vec2 y5;
        Vec2 f5;
        double err;
    };
    Stage dp5(Vec2 y, Vec2 f, double h) const;
    double initial_step(Vec2 y, Vec2 f, double dir, double max_h) const;

    FieldPtr field_;
    FlowOptions opts_;
};

inline FlowMap::Stage FlowMap::dp5(Vec2 y, Vec2 k1, double h) const {
    constexpr double a21 = 1.0 / 5;
    constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                     a54 = -212.0 / 729;
    constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                     a64 = 49.0 / 176, a65 = -5103.0 / 18656;
    constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                     b5 = -2187.0 / 6784, b6 = 11.0 / 84;
    constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                     e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

    const Vec2 k2 = field_->eval(y + k1 * (h * a21));
    const Vec2 k3 = field_->eval(y + (k1 * a31 + k2 * a32) * h);
    const Vec2 k4 = field_->eval(y + (k1 * a41 + k2 * a42 + k3 * a43) * h);
    const Vec2 k5 = field_->eval(y + (k1 * a51 + k2 * a52 + k3 * a53 + k4 * a54) * h);
    const Vec2 k6 = field_->eval(y + (k1 * a61 + k2 * a62 + k3 * a63 + k4 * a64 + k5 * a65) * h);
    const Vec2 y5 = y + (k1 * b1 + k3 * b3 + k4 * b4 + k5 * b5 + k6 * b6) * h;
    const Vec2 k7 = field_->eval(y5);
    const Vec2 e = (k1 * e1 + k3 * e3 + k4 * e4 + k5 * e5 + k6 * e6 + k7 * e7) * h;

    const double sx = opts_.abs_tol + opts_.rel_tol * std::max(std::fabs(y.x), std::fabs(y5.x));
    const double sy = opts_.abs_tol + opts_.rel_tol * std::max(std::fabs(y.y), std::fabs(y5.y));
    const double ex = e.x / sx, ey = e.y / sy;
    return {y5, k7, std::sqrt(0.5 * (ex * ex + ey * ey))};
}

template <class OnStep>
SweepResult FlowMap::sweep(Vec2 p, double t0, double t1, OnStep&& on_step,
                           const SweepLimits& lim) const {
    if (!finite(p)) throw DomainError("non-finite initial point");
    if (t1 == t0) return {p, t0, false};
    const double dir = t1 > t0 ? 1.0 : -1.0;
    const double max_h = std::min(opts_.max_step, lim.max_h);
    constexpr double alpha = 0.17, beta = 0.04, safety = 0.9;

    Vec2 y = p;
    double t = t0;
    Vec2 f = field_->eval(y);
    double h = initial_step(y, f, dir, max_h);
    double err_old = 1e-4;
    bool rejected = false;

    while ((t1 - t) * dir > 0.0) {
        if ((t + h - t1) * dir > 0.0) h = t1 - t;
        const double hmin = 1e-14 * std::max(1.0, std::fabs(t));
        if (std::fabs(h) < hmin && std::fabs(t1 - t) >= hmin) throw StepFailure("step size underflow at t=" + std::to_string(t));

        const Stage st = dp5(y, f, h);
        const double chord = dist(st.y5, y);
        if (!(st.err <= 1.0) || !finite(st.y5)) {
            double fac = std::isfinite(st.err) ? safety * std::pow(st.err, -alpha) : 0.2;
            fac = std::clamp(fac, 0.2, 1.0);
            h *= fac;
            rejected = true;
            continue;
        }
        if (chord > lim.max_chord) {
            h *= std::max(0.1, 0.9 * lim.max_chord / chord);
            rejected = true;
            continue;
        }

        const double t_new = (std::fabs(t1 - (t + h)) <= 1e-15 * std::max(1.0, std::fabs(t1))) ? t1 : t + h;
        StepInfo info{t, t_new, y, st.y5, f, st.f5};
        if (norm(st.y5) > opts_.guard_radius)
            throw BlowUp("orbit left the guard radius at t=" + std::to_string(t_new));

        y = st.y5;
        f = st.f5;
        t = t_new;
        const bool go_on = on_step(static_cast<const StepInfo&>(info));

        const double e = std::max(st.err, 1e-10);
        double fac = safety * std::pow(e, -alpha) * std::pow(err_old, beta);
        fac = std::clamp(fac, 0.2, 10.0);
        if (rejected) fac = std::min(fac, 1.0);
        err_old = std::max(st.err, 1e-4);
        rejected = false;
        h = dir * std::min(std::fabs(h) * fac, max_h);
        if (!go_on) return {y, t, true};
    }
    return {y, t, false};
}

// Cubic Hermite points along each step so that consecutive points are at most
// `spacing` apart; the step end point is always included.
template <class OnPoint>
void densify(const StepInfo& s, double spacing, OnPoint&& on_point) {
    const double chord = dist(s.y0, s.y1);
    const int n = std::max(1, static_cast<int>(std::ceil(chord / spacing)));
    for (int k = 1; k < n; ++k) {
        const double t = s.t0 + (s.t1 - s.t0) * (static_cast<double>(k) / n);
        on_point(t, s.hermite(t));
    }
    on_point(s.t1, s.y1);
}

void write_csv(std::ostream& out, const GArc& arc);

struct PortraitStyle {
    int width = 800;
    int height = 600;
    std::vector<GArc> heavy;  // drawn with a heavy stroke, e.g. Reeb edges
};

std::string portrait_svg(const std::vector<GArc>& arcs, const Window& window,
                         const PortraitStyle& style = {});

// Seeds on a regular grid in the window whose traced leaves form a phase portrait.
std::vector<GArc> portrait_arcs(const FlowMap& flow, const Window& window, int n_seeds,
                                double half_span);

// Largest |H(phi^t p) - H(p)| over the given points and times, where H is the
// declared first integral.
double first_integral_drift(const FlowMap& flow, const std::vector<Vec2>& points, double t_max);

}  // namespace folia
