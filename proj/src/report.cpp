#include "folia/report.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <unistd.h>

namespace folia {

namespace {

using ojson = nlohmann::ordered_json;

void emit(std::string& out, const ojson& j, int depth) {
    const std::string pad(static_cast<std::size_t>(2 * (depth + 1)), ' ');
    const std::string close(static_cast<std::size_t>(2 * depth), ' ');
    switch (j.type()) {
        case ojson::value_t::object: {
            if (j.empty()) {
                out += "{}";
                return;
            }
            out += "{\n";
            bool first = true;
            for (auto it = j.begin(); it != j.end(); ++it) {
                if (!first) out += ",\n";
                first = false;
                out += pad + ojson(it.key()).dump() + ": ";
                emit(out, it.value(), depth + 1);
            }
            out += "\n" + close + "}";
            return;
        }
        case ojson::value_t::array: {
            if (j.empty()) {
                out += "[]";
                return;
            }
            // Arrays of scalars stay on one line.
            bool flat = true;
            for (const auto& v : j) flat = flat && !v.is_structured();
            out += flat ? "[" : "[\n";
            bool first = true;
            for (const auto& v : j) {
                if (!first) out += flat ? ", " : ",\n";
                first = false;
                if (!flat) out += pad;
                emit(out, v, depth + 1);
            }
            out += flat ? "]" : "\n" + close + "]";
            return;
        }
        case ojson::value_t::number_float: {
            const double v = j.get<double>();
            if (!std::isfinite(v)) {
                out += "null";
                return;
            }
            char buf[32];
            std::snprintf(buf, sizeof buf, "%.17g", v);
            out += buf;
            return;
        }
        default:
            out += j.dump();
    }
}

}  // namespace

std::string dump_json(const ojson& j) {
    std::string out;
    emit(out, j, 0);
    out += "\n";
    return out;
}

ojson point_json(Vec2 p) { return ojson::array({p.x, p.y}); }

ojson window_json(const Window& w) { return ojson::array({w.xmin, w.xmax, w.ymin, w.ymax}); }

ojson arc_summary(const GArc& arc) {
    ojson j;
    j["samples"] = arc.samples.size();
    if (!arc.samples.empty()) {
        j["front"] = point_json(arc.front());
        j["back"] = point_json(arc.back());
    }
    j["phi_length"] = arc.phi_length();
    j["clipped"] = arc.clipped;
    return j;
}

ojson to_ordered_json(const ReebComponentReport& r) {
    ojson j;
    j["certified"] = r.certified;
    j["minus_seed"] = point_json(r.minus_seed);
    j["plus_seed"] = point_json(r.plus_seed);
    j["region_seed"] = point_json(r.region_seed);
    j["gamma_minus"] = arc_summary(r.gamma_minus);
    j["gamma_plus"] = arc_summary(r.gamma_plus);
    j["orientation_certificate"] = r.orientation_certificate;
    j["bidirectional"] = r.bidirectional;
    j["coverage"] = r.coverage;
    j["certified_cells"] = r.certified_cells;
    return j;
}

ojson to_ordered_json(const Classification& c) {
    ojson j;
    std::string v = to_string(c.verdict);
    for (char& ch : v) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    j["verdict"] = v;
    j["components"] = c.components();
    j["detail"] = c.detail;
    ojson reps = ojson::array();
    for (const auto& r : c.reports) reps.push_back(to_ordered_json(r));
    j["reports"] = reps;
    return j;
}

ojson to_ordered_json(const SectionResult& r) {
    ojson j;
    if (const auto* cs = std::get_if<CrossSection>(&r)) {
        j["status"] = "cross_section";
        ojson poly = ojson::array();
        for (const Vec2 p : cs->polyline.polyline) poly.push_back(point_json(p));
        j["polyline"] = poly;
        j["orientation"] = cs->polyline.orientation;
        j["covered_leaves"] = cs->covered_leaves.size();
        return j;
    }
    const auto& f = std::get<FailureReport>(r);
    j["status"] = "failure";
    j["reason"] = f.reason;
    j["window"] = window_json(f.window);
    j["grid"] = f.grid;
    if (f.witness) {
        ojson w = ojson::array();
        for (const Vec2 p : f.witness->seeds) w.push_back(point_json(p));
        j["witness"] = w;
    }
    return j;
}

ojson to_ordered_json(const SaddleChart& c) {
    ojson j;
    j["fixed_point"] = point_json(c.fixed_point);
    j["scale"] = c.scale;
    ojson q = ojson::array(), p = ojson::array();
    for (const Vec2 v : c.q) q.push_back(point_json(v));
    for (const Vec2 v : c.p) p.push_back(point_json(v));
    j["q"] = q;
    j["p"] = p;
    j["octagon_vertices"] = c.octagon.size();
    return j;
}

void write_atomic(const std::string& path, const std::string& contents) {
    namespace fs = std::filesystem;
    const fs::path target(path);
    if (target.has_parent_path()) fs::create_directories(target.parent_path());
    const fs::path tmp = target.string() + ".tmp." + std::to_string(::getpid());
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw InvalidInput("cannot open " + tmp.string() + " for writing");
        out << contents;
        out.flush();
        if (!out) throw InvalidInput("failed writing " + tmp.string());
    }
    fs::rename(tmp, target);
}

}  // namespace folia
