#include "folia/geometry.hpp"

#include <algorithm>
#include <bit>
#include <limits>

namespace folia {

std::optional<SegmentHit> intersect_segments(Vec2 a, Vec2 b, Vec2 c, Vec2 d) {
    const Vec2 r = b - a;
    const Vec2 q = d - c;
    const double den = cross(r, q);
    if (den == 0.0) return std::nullopt;
    const Vec2 ac = c - a;
    const double s = cross(ac, q) / den;
    const double t = cross(ac, r) / den;
    if (s < 0.0 || s > 1.0 || t < 0.0 || t > 1.0) return std::nullopt;
    return SegmentHit{s, t};
}

std::vector<double> crossing_params(Vec2 a, Vec2 b, const Polyline& line) {
    std::vector<double> out;
    if (line.size() < 2) return out;
    const Vec2 r = b - a;
    // Vertices on the line through a and b count as positive, so a shared
    // vertex produces exactly one sign change.
    auto side = [&](Vec2 v) { return cross(r, v - a) >= 0.0; };
    bool prev = side(line[0]);
    for (std::size_t i = 0; i + 1 < line.size(); ++i) {
        const bool next = side(line[i + 1]);
        if (next != prev) {
            const Vec2 c = line[i], q = line[i + 1] - line[i];
            const double den = cross(r, q);
            if (den != 0.0) {
                const double s = cross(c - a, q) / den;
                if (s >= 0.0 && s <= 1.0) out.push_back(s);
            }
        }
        prev = next;
    }
    return out;
}

int count_crossings(Vec2 a, Vec2 b, const Polyline& line) {
    int n = 0;
    for (double s : crossing_params(a, b, line))
        if (s > 0.0 && s < 1.0) ++n;
    return n;
}

int count_polyline_intersections(const Polyline& a, const Polyline& b) {
    int n = 0;
    for (std::size_t i = 0; i + 1 < a.size(); ++i) {
        const bool a_last = i + 2 == a.size();
        for (double s : crossing_params(a[i], a[i + 1], b))
            if (s < 1.0 || a_last) ++n;
    }
    return n;
}

PolylineProjection project_to_polyline(Vec2 p, const Polyline& line) {
    PolylineProjection best;
    best.distance = std::numeric_limits<double>::infinity();
    if (line.empty()) return best;
    if (line.size() == 1) {
        best.distance = dist(p, line[0]);
        best.point = line[0];
        return best;
    }
    for (std::size_t i = 0; i + 1 < line.size(); ++i) {
        const Vec2 a = line[i];
        const Vec2 d = line[i + 1] - a;
        const double len2 = dot(d, d);
        double s = len2 > 0.0 ? dot(p - a, d) / len2 : 0.0;
        s = std::clamp(s, 0.0, 1.0);
        const Vec2 q = a + d * s;
        const double dd = dist(p, q);
        if (dd < best.distance) {
            best = {dd, i, s, q};
        }
    }
    return best;
}

double polyline_length(const Polyline& line) {
    double L = 0.0;
    for (std::size_t i = 0; i + 1 < line.size(); ++i) L += dist(line[i], line[i + 1]);
    return L;
}

double arclength_at(const Polyline& line, const PolylineProjection& proj) {
    double L = 0.0;
    for (std::size_t i = 0; i < proj.segment; ++i) L += dist(line[i], line[i + 1]);
    if (proj.segment + 1 < line.size())
        L += proj.s * dist(line[proj.segment], line[proj.segment + 1]);
    return L;
}

Vec2 point_at_arclength(const Polyline& line, double s) {
    if (line.empty()) return {};
    if (s <= 0.0 || line.size() == 1) {
        if (line.size() == 1) return line[0];
        const Vec2 d = line[1] - line[0];
        const double l = norm(d);
        return l > 0.0 ? line[0] + d * (s / l) : line[0];
    }
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < line.size(); ++i) {
        const double l = dist(line[i], line[i + 1]);
        if (acc + l >= s || i + 2 == line.size()) {
            const double u = l > 0.0 ? (s - acc) / l : 0.0;
            return line[i] + (line[i + 1] - line[i]) * u;
        }
        acc += l;
    }
    return line.back();
}

bool point_in_polygon(Vec2 p, const Polyline& ring) {
    bool inside = false;
    const std::size_t n = ring.size();
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
        const Vec2 a = ring[i];
        const Vec2 b = ring[j];
        if ((a.y > p.y) != (b.y > p.y)) {
            const double xi = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
            if (p.x < xi) inside = !inside;
        }
    }
    return inside;
}

bool polyline_self_intersects(const Polyline& ring, bool closed) {
    const std::size_t n = ring.size();
    const std::size_t segs = closed ? n : n - 1;
    if (n < 4) return false;
    for (std::size_t i = 0; i < segs; ++i) {
        const Vec2 a = ring[i], b = ring[(i + 1) % n];
        for (std::size_t j = i + 2; j < segs; ++j) {
            if (closed && i == 0 && j == segs - 1) continue;
            const Vec2 c = ring[j], d = ring[(j + 1) % n];
            if (intersect_segments(a, b, c, d)) return true;
        }
    }
    return false;
}

std::uint64_t point_tag(Vec2 p) {
    std::uint64_t h = 1469598103934665603ULL;
    for (double v : {p.x, p.y}) {
        auto bits = std::bit_cast<std::uint64_t>(v);
        for (int k = 0; k < 8; ++k) {
            h ^= (bits >> (8 * k)) & 0xffU;
            h *= 1099511628211ULL;
        }
    }
    return h;
}

}  // namespace folia
