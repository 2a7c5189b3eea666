#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "folia/invariants.hpp"
#include "folia/report.hpp"
#include "folia/verify.hpp"

using namespace folia;
using ojson = nlohmann::ordered_json;

namespace {

enum Exit { kOk = 0, kRuntime = 1, kFlags = 2, kInconclusive = 3, kInvariant = 4 };

struct RunConfig {
    std::string command;
    std::string field;
    std::vector<double> window;  // x0 x1 y0 y1
    std::optional<int> resolution;
    std::optional<double> tol;
    std::string out = "folia_out";
    std::vector<std::string> formats;
    std::uint64_t seed = 0;
    double scale = 1.0;
    std::string oracle = "canonical";
    bool edges = false;

    std::string window_source = "flag";
    Window win;
    std::string out_dir;

    bool wants(const std::string& f) const {
        return std::find(formats.begin(), formats.end(), f) != formats.end();
    }
    int res(int fallback) const { return resolution.value_or(fallback); }
    double tolerance(double fallback) const { return tol.value_or(fallback); }
};

ojson config_json(const RunConfig& c) {
    ojson j;
    j["command"] = c.command;
    j["field"] = c.field;
    j["window"] = window_json(c.win);
    j["window_source"] = c.window_source;
    j["resolution"] = c.resolution ? ojson(*c.resolution) : ojson(nullptr);
    j["tol"] = c.tol ? ojson(*c.tol) : ojson(nullptr);
    j["out"] = c.out_dir;
    j["formats"] = c.formats;
    j["seed"] = c.seed;
    if (c.command == "conjugate-saddle") {
        j["scale"] = c.scale;
        j["oracle"] = c.oracle;
    }
    if (c.command == "portrait") j["edges"] = c.edges;
    return j;
}

std::string utc_now() {
    const std::time_t t = std::time(nullptr);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
    return buf;
}

std::string artifact(const RunConfig& c, const std::string& ext) {
    return (std::filesystem::path(c.out_dir) / (c.command + "." + ext)).string();
}

// Writes the JSON document and echoes it on stdout.
void emit_json(const RunConfig& c, const ojson& result, int code) {
    ojson doc;
    doc["timestamp"] = utc_now();
    doc["run_config"] = config_json(c);
    doc["exit_code"] = code;
    doc["result"] = result;
    const std::string text = dump_json(doc);
    if (c.wants("json")) write_atomic(artifact(c, "json"), text);
    std::cout << text;
}

std::string fmt17(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string residual_csv(const ResidualReport& r) {
    std::ostringstream out;
    out << "px,py,hx,hy,residual\n";
    for (const auto& s : r.samples)
        out << fmt17(s.p.x) << ',' << fmt17(s.p.y) << ',' << fmt17(s.hp.x) << ',' << fmt17(s.hp.y)
            << ',' << fmt17(s.residual) << '\n';
    return out.str();
}

std::string arcs_csv(const std::vector<GArc>& arcs) {
    std::ostringstream out;
    out << "arc,t,x,y\n";
    for (std::size_t k = 0; k < arcs.size(); ++k)
        for (const auto& s : arcs[k].samples)
            out << k << ',' << fmt17(s.t) << ',' << fmt17(s.p.x) << ',' << fmt17(s.p.y) << '\n';
    return out.str();
}

ojson residual_json(const ResidualReport& r) { return ojson(to_json(r)); }

FlowMap flow_map(const RunConfig& c) { return FlowMap(resolve_field(c.field)); }

std::vector<GArc> edge_arcs(const std::vector<ReebComponentReport>& reps) {
    std::vector<GArc> out;
    for (const auto& r : reps) {
        out.push_back(r.gamma_minus);
        out.push_back(r.gamma_plus);
    }
    return out;
}

std::vector<GArc> write_portrait(const RunConfig& c, const FlowMap& flow, const std::vector<GArc>& heavy,
                                 int n_seeds = 16) {
    PortraitStyle style;
    style.heavy = heavy;
    auto arcs = portrait_arcs(flow, c.win, n_seeds, 0.5 * c.win.diameter());
    write_atomic(artifact(c, "svg"), portrait_svg(arcs, c.win, style));
    return arcs;
}

GArc polyline_arc(const Polyline& poly) {
    GArc a;
    for (std::size_t k = 0; k < poly.size(); ++k) a.samples.push_back({static_cast<double>(k), poly[k]});
    return a;
}

DetectOptions detect_options(const RunConfig& c) {
    DetectOptions o;
    o.certify.seed = c.seed;
    return o;
}

}  // namespace

namespace {

int cmd_portrait(const RunConfig& c) {
    const FlowMap flow = flow_map(c);
    std::vector<GArc> heavy;
    if (c.edges) heavy = edge_arcs(detect_reeb(flow, c.win, 128, detect_options(c)));
    const auto arcs = write_portrait(c, flow, heavy, c.res(16));
    if (c.wants("csv")) write_atomic(artifact(c, "csv"), arcs_csv(arcs));
    ojson r;
    r["arcs"] = arcs.size();
    r["heavy_arcs"] = heavy.size();
    emit_json(c, r, kOk);
    return kOk;
}

int cmd_classify(const RunConfig& c) {
    const FlowMap flow = flow_map(c);
    const Classification cl = classify_triviality(flow, c.win, c.res(400), detect_options(c));
    const auto edges = edge_arcs(cl.reports);
    if (c.wants("svg")) write_portrait(c, flow, edges);
    if (c.wants("csv")) write_atomic(artifact(c, "csv"), arcs_csv(edges));
    const int code = cl.verdict == Verdict::Inconclusive ? kInconclusive : kOk;
    emit_json(c, to_ordered_json(cl), code);
    return code;
}

int cmd_detect(const RunConfig& c) {
    const FlowMap flow = flow_map(c);
    const auto reps = detect_reeb(flow, c.win, c.res(400), detect_options(c));
    ojson r;
    std::size_t certified = 0;
    ojson list = ojson::array();
    for (const auto& rep : reps) {
        certified += rep.certified ? 1 : 0;
        list.push_back(to_ordered_json(rep));
    }
    r["components"] = certified;
    r["candidates"] = reps.size();
    r["reports"] = list;
    const auto edges = edge_arcs(reps);
    if (c.wants("svg")) write_portrait(c, flow, edges);
    if (c.wants("csv")) write_atomic(artifact(c, "csv"), arcs_csv(edges));
    const int code = certified < reps.size() ? kInconclusive : kOk;
    emit_json(c, r, code);
    return code;
}

SectionResult section_for(const FlowMap& flow, const Window& w, int grid) {
    FoliationOptions fo;
    fo.grid = grid;
    return build_cross_section(flow, w, perimeter_chain(w, 16, 1e-3 * w.diameter()), fo);
}

int cmd_cross_section(const RunConfig& c) {
    const FlowMap flow = flow_map(c);
    const SectionResult res = section_for(flow, c.win, c.res(400));
    if (const auto* cs = std::get_if<CrossSection>(&res)) {
        if (c.wants("svg")) write_portrait(c, flow, {polyline_arc(cs->polyline.polyline)});
        if (c.wants("csv")) {
            std::ostringstream out;
            out << "x,y\n";
            for (const Vec2 p : cs->polyline.polyline) out << fmt17(p.x) << ',' << fmt17(p.y) << '\n';
            write_atomic(artifact(c, "csv"), out.str());
        }
    }
    emit_json(c, to_ordered_json(res), kOk);
    return kOk;
}

int cmd_trivialize(const RunConfig& c) {
    const auto flow = std::make_shared<const FlowMap>(resolve_field(c.field));
    const WindowTrivialization wt = trivialize_window(flow, c.win);
    ojson r;
    r["section"] = to_ordered_json(wt.section);
    if (!wt.homeo) {
        r["passed"] = false;
        emit_json(c, r, kInvariant);
        return kInvariant;
    }
    const HomeoHandle& h = *wt.homeo;
    const auto& cs = std::get<CrossSection>(wt.section);
    const double tol = c.tolerance(1e-5);
    const int n = c.res(20);
    bool ok = true;
    ojson residuals = ojson::array();
    for (const double t : {0.25, 0.5, 1.0, 2.0}) {
        const ResidualReport rep = conjugacy_residual(
            h, [&](Vec2 p) { return flow->integrate(p, t); }, [t](Vec2 p) { return Vec2{p.x + t, p.y}; },
            {c.win, n, n});
        ok = ok && rep.max_residual < tol && rep.excluded == 0;
        ojson e;
        e["t"] = t;
        e["report"] = residual_json(rep);
        residuals.push_back(e);
        if (t == 1.0 && c.wants("csv")) write_atomic(artifact(c, "csv"), residual_csv(rep));
    }
    const HomeoDiagnostics d = homeo_diagnostics(h, {c.win, 50, 50});
    ok = ok && d.passes();
    r["provenance"] = ojson(h.provenance);
    r["residuals"] = residuals;
    r["diagnostics"] = ojson(to_json(d));
    r["tol"] = tol;
    r["passed"] = ok;
    if (c.wants("svg")) write_portrait(c, *flow, {polyline_arc(cs.polyline.polyline)});
    const int code = ok ? kOk : kInvariant;
    emit_json(c, r, code);
    return code;
}

int cmd_conjugate_saddle(const RunConfig& c) {
    const FieldPtr field = resolve_field(c.field);
    FlowPtr flow;
    if (field->name == "linear-saddle") flow = std::make_shared<const LinearSaddleFlow>();
    else flow = std::make_shared<const FlowMap>(field);
    FoliationOracle fs, fu;
    if (c.oracle == "lyapunov") {
        fs = lyapunov_oracle(flow, LeafType::Stable);
        fu = lyapunov_oracle(flow, LeafType::Unstable);
    } else {
        fs = canonical_stable_oracle(field->name);
        fu = canonical_unstable_oracle(field->name);
    }
    std::optional<Vec2> guess;
    if (field->fixed_points && !field->fixed_points->empty()) guess = field->fixed_points->front();
    const SaddleChart chart = build_saddle_chart(*flow, fs, fu, c.scale, guess);
    const HomeoHandle h = saddle_conjugacy(flow, fs, fu, chart, c.win);
    const int n = c.res(20);
    const ResidualReport rep =
        conjugacy_residual(h, [&](Vec2 p) { return flow->time_one(p); }, linear_la, {c.win, n, n});
    const HomeoDiagnostics d = homeo_diagnostics(h, {c.win, 50, 50});
    const double tol = c.tolerance(1e-3);
    const bool ok = rep.max_residual < tol && rep.excluded == 0 && d.passes();

    ojson table = ojson::array();
    for (const Vec2 p : GridSpec{c.win, 9, 9}.points()) {
        ojson row;
        row["p"] = point_json(p);
        try {
            row["h"] = point_json(h.forward(p));
        } catch (const Error&) {
            row["h"] = nullptr;
        }
        table.push_back(row);
    }
    ojson r;
    r["chart"] = to_ordered_json(chart);
    r["oracles"] = {fs.name, fu.name};
    r["experimental_oracle"] = fs.experimental || fu.experimental;
    r["provenance"] = ojson(h.provenance);
    r["residual"] = residual_json(rep);
    r["diagnostics"] = ojson(to_json(d));
    r["table"] = table;
    r["tol"] = tol;
    r["passed"] = ok;
    if (c.wants("csv")) write_atomic(artifact(c, "csv"), residual_csv(rep));
    if (c.wants("svg")) {
        if (const auto* fm = dynamic_cast<const FlowMap*>(flow.get())) {
            Polyline ring = chart.octagon;
            ring.push_back(chart.octagon.front());
            write_portrait(c, *fm, {polyline_arc(ring)});
        }
    }
    const int code = ok ? kOk : kInvariant;
    emit_json(c, r, code);
    return code;
}

int cmd_check_invariants(const RunConfig& c) {
    const FlowMap flow = flow_map(c);
    InvariantOptions io;
    io.resolution = c.res(128);
    io.seed = c.seed;
    const InvariantReport rep = check_invariants(flow, c.win, io);
    ojson r;
    r["detection"] = rep.detection;
    ojson comps = ojson::array();
    for (const auto& x : rep.components) comps.push_back(to_ordered_json(x));
    r["components"] = comps;
    ojson suites = ojson::array();
    for (const auto& s : rep.suites) {
        ojson j;
        j["name"] = s.name;
        j["passed"] = s.passed;
        j["skipped"] = s.skipped;
        j["checked"] = s.checked;
        j["failed"] = s.failed;
        j["share"] = s.share;
        j["detail"] = s.detail;
        suites.push_back(j);
    }
    r["suites"] = suites;
    r["passed"] = rep.passed();
    if (c.wants("svg")) write_portrait(c, flow, edge_arcs(rep.components));
    const int code = rep.passed() ? kOk : kInvariant;
    emit_json(c, r, code);
    return code;
}

// Fills the window and output directory; returns false on a flag error.
bool resolve_config(RunConfig& c, std::string& err) {
    if (c.window.empty()) {
        const FieldPtr f = resolve_field(c.field);
        if (!f->window) {
            err = "--window is required for fields without a declared window";
            return false;
        }
        c.win = *f->window;
        c.window_source = "field";
    } else {
        c.win = {c.window[0], c.window[1], c.window[2], c.window[3]};
    }
    if (!c.win.valid()) {
        err = "--window needs x0 < x1 and y0 < y1";
        return false;
    }
    if (c.resolution && *c.resolution < 2) {
        err = "--resolution must be at least 2";
        return false;
    }
    if (c.tol && !(*c.tol > 0)) {
        err = "--tol must be positive";
        return false;
    }
    if (!(c.scale > 0)) {
        err = "--scale must be positive";
        return false;
    }
    if (!c.resolution) {
        if (c.command == "portrait") c.resolution = 16;
        else if (c.command == "trivialize" || c.command == "conjugate-saddle") c.resolution = 20;
        else if (c.command == "check-invariants") c.resolution = 128;
        else c.resolution = 400;
    }
    if (!c.tol) {
        if (c.command == "trivialize") c.tol = 1e-5;
        else if (c.command == "conjugate-saddle") c.tol = 1e-3;
    }
    if (c.formats.empty()) {
        c.formats = {"json"};
        if (c.command == "portrait") c.formats.push_back("svg");
    }
    const char* env = std::getenv("FOLIA_OUT_DIR");
    c.out_dir = env && *env ? env : c.out;
    return true;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Plane flows and foliations: Reeb detection, triviality, conjugacies"};
    app.require_subcommand(1);
    RunConfig cfg;

    const std::vector<std::pair<std::string, std::string>> commands = {
        {"portrait", "SVG phase portrait of sampled leaves"},
        {"classify", "trivial / nontrivial / inconclusive verdict"},
        {"detect-reeb", "Reeb component reports"},
        {"cross-section", "cross-section polyline or failure report"},
        {"trivialize", "trivializing homeomorphism with residuals"},
        {"conjugate-saddle", "conjugacy of a saddle time-one map to L_A"},
        {"check-invariants", "prolongation and free-arc property suites"},
    };
    for (const auto& [name, help] : commands) {
        CLI::App* s = app.add_subcommand(name, help);
        s->add_option("--field", cfg.field, "built-in name or field definition file")->required();
        s->add_option("--window", cfg.window, "x0 x1 y0 y1")->expected(4);
        s->add_option("--resolution", cfg.resolution, "grid resolution");
        s->add_option("--tol", cfg.tol, "pass threshold for residual checks");
        s->add_option("--out", cfg.out, "output directory (FOLIA_OUT_DIR overrides)");
        s->add_option("--format", cfg.formats, "json,csv,svg")
            ->delimiter(',')
            ->check(CLI::IsMember({"json", "csv", "svg"}));
        s->add_option("--seed", cfg.seed, "seed for low-discrepancy sequences");
        if (name == "conjugate-saddle") {
            s->add_option("--scale", cfg.scale, "chart scale");
            s->add_option("--oracle", cfg.oracle, "canonical or lyapunov")
                ->check(CLI::IsMember({"canonical", "lyapunov"}));
        }
        if (name == "portrait") s->add_flag("--edges", cfg.edges, "draw detected Reeb edges in heavy stroke");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kOk : kFlags;
    }
    cfg.command = app.get_subcommands().front()->get_name();

    try {
        std::string err;
        if (!resolve_config(cfg, err)) {
            std::cerr << "error: " << err << "\n";
            return kFlags;
        }
        if (cfg.command == "portrait") return cmd_portrait(cfg);
        if (cfg.command == "classify") return cmd_classify(cfg);
        if (cfg.command == "detect-reeb") return cmd_detect(cfg);
        if (cfg.command == "cross-section") return cmd_cross_section(cfg);
        if (cfg.command == "trivialize") return cmd_trivialize(cfg);
        if (cfg.command == "conjugate-saddle") return cmd_conjugate_saddle(cfg);
        return cmd_check_invariants(cfg);
    } catch (const InvalidInput& e) {
        std::cerr << "error: " << e.kind() << ": " << e.what() << "\n";
        return kFlags;
    } catch (const SyntaxError& e) {
        std::cerr << "error: " << e.kind() << ": " << e.what() << "\n";
        return kFlags;
    } catch (const Error& e) {
        std::cerr << "error: " << e.kind() << ": " << e.what() << "\n";
        return kRuntime;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kRuntime;
    }
}
