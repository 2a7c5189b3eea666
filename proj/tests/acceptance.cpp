// One line per acceptance criterion. Usage: folia_acceptance <path to folia-cli>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <unistd.h>

#include "folia/invariants.hpp"
#include "folia/verify.hpp"

using namespace folia;

namespace {

// Pinned tolerances.
constexpr double kTimeOneTol = 1e-8;
constexpr double kGroupLawTol = 1e-6;     // relative to max(1, |image|)
constexpr double kDriftTol = 1e-6;
constexpr double kEdgeTol = 1e-2;
constexpr double kTrivialTol = 1e-5;
constexpr double kLinearSaddleTol = 1e-9;
constexpr double kShearSaddleTol = 1e-3;
constexpr double kRoundTripTol = 1e-6;
constexpr double kExtendTol = 1e-12;
constexpr double kSymmetryShare = 0.95;

struct Outcome {
    bool pass = false;
    std::string detail;
    bool known_conflict = false;  // fails because the stated target is inconsistent; see the decisions ledger
};

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

std::string sci(double v) { return fmt("%.2e", v); }

FlowMap flow_of(const char* name) { return FlowMap(std::make_shared<const VectorFieldHandle>(builtin_field(name))); }

// 1. Time-one exactness on the linear saddle.
Outcome time_one_exactness() {
    const FlowMap f = flow_of("linear-saddle");
    double worst = dist(f.time_one({1, 1}), {2, 0.5});
    const double at_one = worst;
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(-4, 4);
    for (int k = 0; k < 100; ++k) {
        const Vec2 p{u(rng), u(rng)};
        worst = std::max(worst, dist(f.time_one(p), linear_la(p)));
    }
    return {worst <= kTimeOneTol, "|phi1(1,1)-(2,0.5)| " + sci(at_one) + ", max over 100 points " + sci(worst) +
                                      " <= " + sci(kTimeOneTol)};
}

// 2. Group law, reversibility, first-integral drift.
Outcome flow_core() {
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> ut(-2, 2), u01(0, 1);
    double group = 0, rev = 0;
    for (const auto& name : builtin_names()) {
        const FlowMap f = flow_of(name.c_str());
        const Window w = *f.field().window;
        for (int k = 0; k < 30; ++k) {
            const Vec2 p{w.xmin + w.width() * u01(rng), w.ymin + w.height() * u01(rng)};
            const double s = ut(rng), t = ut(rng);
            try {
                const Vec2 a = f.integrate(f.integrate(p, s), t);
                const Vec2 b = f.integrate(p, s + t);
                group = std::max(group, dist(a, b) / std::max(1.0, norm(b)));
                const Vec2 back = f.integrate(f.integrate(p, t), -t);
                rev = std::max(rev, dist(back, p) / std::max(1.0, norm(p)));
            } catch (const IntegrationError&) {
                // orbits that blow up within |t| <= 4 have no group law to test
            }
        }
    }
    const FlowMap reeb = flow_of("reeb");
    std::vector<Vec2> pts;
    for (int k = 0; k < 100; ++k) pts.push_back({-15 + 30 * u01(rng), -3 + 6 * u01(rng)});
    const double drift = first_integral_drift(reeb, pts, 10.0);
    const bool ok = group <= kGroupLawTol && rev <= kGroupLawTol && drift < kDriftTol;
    return {ok, "group law " + sci(group) + ", reversibility " + sci(rev) + " <= " + sci(kGroupLawTol) +
                    "; reeb drift " + sci(drift) + " < " + sci(kDriftTol)};
}

// Largest distance from the arc samples inside the window to the line y = level.
double edge_error(const GArc& arc, const Window& w, double level) {
    double worst = 0;
    for (const auto& s : arc.samples)
        if (w.contains(s.p)) worst = std::max(worst, std::fabs(s.p.y - level));
    return worst;
}

// 3. Classifier verdicts.
Outcome classifier() {
    const Window wide{-10, 10, -10, 10};
    const Window strip{-15, 15, -3, 3};
    std::string detail;
    bool ok = true;
    for (const char* name : {"translation", "shear-flow"}) {
        for (int res : {400, 512, 640}) {
            const Classification c = classify_triviality(flow_of(name), wide, res);
            ok = ok && c.verdict == Verdict::Trivial;
            if (res == 400) detail += std::string(name) + " " + to_string(c.verdict);
        }
        detail += "; ";
    }
    const FlowMap reeb = flow_of("reeb");
    for (int res : {400, 512, 640}) {
        const Classification c = classify_triviality(reeb, strip, res);
        bool good = c.verdict == Verdict::Nontrivial && c.components() == 1;
        double err = 1;
        if (good) {
            const auto& r = c.reports.front();
            err = std::max(edge_error(r.gamma_minus, strip, -1.0), edge_error(r.gamma_plus, strip, 1.0));
            good = err < kEdgeTol;
        }
        ok = ok && good;
        detail += "reeb@" + std::to_string(res) + " " + to_string(c.verdict) + " x" +
                  std::to_string(c.components()) + " edge err " + sci(err) + (res == 640 ? "" : ", ");
    }
    return {ok, detail};
}

// 4. Prolongation invariants on the reeb strip.
Outcome prolongation() {
    InvariantOptions o;
    o.resolution = 128;
    o.eps = {1e-2, 1e-3, 1e-4};
    o.pairs = 10;
    o.arcs = 100;
    o.symmetry_share = kSymmetryShare;
    const InvariantReport rep = check_invariants(flow_of("reeb"), {-15, 15, -3, 3}, o);
    bool ok = rep.components.size() == 1;
    std::string detail = std::to_string(rep.components.size()) + " component(s)";
    for (const auto& s : rep.suites) {
        ok = ok && s.passed && !s.skipped;
        detail += "; " + s.name + " " + std::to_string(s.checked - s.failed) + "/" + std::to_string(s.checked);
    }
    if (const auto* p = rep.suite("iterate_arc")) ok = ok && p->checked >= 10;
    if (const auto* p = rep.suite("free_arc")) ok = ok && p->checked >= 100;
    return {ok, detail};
}

// 5. Trivialization equivariance.
Outcome trivialization() {
    const Window w{-5, 5, -5, 5};
    std::string detail;
    bool ok = true;
    const std::vector<std::pair<std::string, VectorFieldHandle>> fields = {
        {"translation", builtin_field("translation")},
        {"(2,0)", make_field("double-speed", "(2, 0)")},
        {"shear-flow", builtin_field("shear-flow")}};
    for (const auto& [label, field] : fields) {
        const auto flow = std::make_shared<const FlowMap>(std::make_shared<const VectorFieldHandle>(field));
        const WindowTrivialization wt = trivialize_window(flow, w);
        if (!wt.homeo) {
            ok = false;
            detail += label + " section failed; ";
            continue;
        }
        double worst = 0;
        std::size_t excluded = 0;
        for (double t : {0.25, 0.5, 1.0, 2.0}) {
            const ResidualReport r = conjugacy_residual(
                *wt.homeo, [&](Vec2 p) { return flow->integrate(p, t); },
                [t](Vec2 p) { return Vec2{p.x + t, p.y}; }, {w, 20, 20});
            worst = std::max(worst, r.max_residual);
            excluded += r.excluded;
        }
        const HomeoDiagnostics d = homeo_diagnostics(*wt.homeo, {w, 50, 50});
        ok = ok && worst < kTrivialTol && excluded == 0 && d.passes(kRoundTripTol);
        detail += label + " residual " + sci(worst) + (d.passes(kRoundTripTol) ? " diag ok" : " diag FAIL") + "; ";
    }
    return {ok, detail + "tol " + sci(kTrivialTol)};
}

bool paper_v0(Vec2 p) { return std::fabs(p.x * p.y) <= 1 && p.x * p.x <= 1 && p.y * p.y <= 1; }
bool wide_v0(Vec2 p) { return std::fabs(p.x * p.y) <= 1 && p.x * p.x <= 4 && p.y * p.y <= 1; }

// 6. Saddle conjugacy.
Outcome saddle() {
    const Window w{-4, 4, -4, 4};
    std::string detail;

    const FlowPtr la = std::make_shared<const LinearSaddleFlow>();
    const auto vs = vertical_lines(LeafType::Stable);
    const auto hs = horizontal_lines(LeafType::Unstable);
    const SaddleChart chart = build_saddle_chart(*la, vs, hs, 1.0);
    const HomeoHandle hla = saddle_conjugacy(la, vs, hs, chart, w);
    const ResidualReport rla = conjugacy_residual(hla, [&](Vec2 p) { return la->time_one(p); }, linear_la, {w, 20, 20});
    const bool la_ok = rla.max_residual < kLinearSaddleTol && rla.excluded == 0;
    detail += "L_A residual " + sci(rla.max_residual);

    // Corner and edge spot checks on the printed region.
    bool spots = true;
    for (const Vec2 q : chart.q) spots = spots && q.x * q.x == 1 && q.y * q.y == 1 && paper_v0(q) && chart.in_v0(q);
    for (const Vec2 p : chart.p) spots = spots && paper_v0(p) && chart.in_v0(p);
    // Whole-region comparison on a grid, against the printed inequalities and with x^2 <= 4.
    int differ = 0, differ_wide = 0, differ_elsewhere = 0, n = 0;
    for (int i = 0; i <= 240; ++i)
        for (int j = 0; j <= 240; ++j) {
            const Vec2 p{-3 + 6.0 * i / 240, -3 + 6.0 * j / 240};
            const bool in = chart.in_v0(p);
            differ += in != paper_v0(p);
            differ_elsewhere += in != paper_v0(p) && !(std::fabs(p.x) > 1 && std::fabs(p.x) <= 2);
            differ_wide += in != wide_v0(p);
            ++n;
        }
    detail += "; V0 spot checks " + std::string(spots ? "exact" : "FAIL") + ", grid cells differing from the printed region " +
              std::to_string(differ) + "/" + std::to_string(n) + " (" + std::to_string(differ_elsewhere) +
              " outside 1<|x|<=2), from x^2<=4 variant " +
              std::to_string(differ_wide);

    const auto sflow = std::make_shared<const FlowMap>(std::make_shared<const VectorFieldHandle>(builtin_field("shear-saddle")));
    const auto fs = canonical_stable_oracle("shear-saddle");
    const auto fu = canonical_unstable_oracle("shear-saddle");
    const SaddleChart sc = build_saddle_chart(*sflow, fs, fu, 1.0);
    const HomeoHandle hs_ = saddle_conjugacy(sflow, fs, fu, sc, w);
    const ResidualReport rs = conjugacy_residual(hs_, [&](Vec2 p) { return sflow->time_one(p); }, linear_la, {w, 20, 20});
    const HomeoDiagnostics d = homeo_diagnostics(hs_, {w, 50, 50});
    // Quadrants of the separatrix cross, from the known coordinate change.
    std::array<int, 4> sign_of{-1, -1, -1, -1};
    bool quads = true;
    for (const Vec2 p : GridSpec{w, 20, 20}.points()) {
        const double u = p.x - 0.3 * std::tanh(p.y);
        if (u == 0 || p.y == 0) continue;
        const int qi = (u > 0 ? 1 : 0) + (p.y > 0 ? 2 : 0);
        const Vec2 hp = hs_.forward(p);
        if (hp.x == 0 || hp.y == 0) {
            quads = false;
            continue;
        }
        const int img = (hp.x > 0 ? 1 : 0) + (hp.y > 0 ? 2 : 0);
        if (sign_of[static_cast<std::size_t>(qi)] < 0) sign_of[static_cast<std::size_t>(qi)] = img;
        quads = quads && sign_of[static_cast<std::size_t>(qi)] == img;
    }
    const bool shear_ok = rs.max_residual < kShearSaddleTol && rs.excluded == 0 && d.collisions == 0 &&
                          d.single_orientation() && d.round_trip_max < kRoundTripTol && quads;
    detail += "; shear-saddle residual " + sci(rs.max_residual) + ", collisions " + std::to_string(d.collisions) +
              ", orientation " + (d.single_orientation() ? "single" : "MIXED") + ", quadrants " +
              (quads ? "preserved" : "FAIL");

    Outcome o;
    o.pass = la_ok && spots && shear_ok && differ == 0;
    o.known_conflict = la_ok && spots && shear_ok && differ > 0 && differ_elsewhere == 0 && differ_wide == 0;
    o.detail = detail;
    return o;
}

// 7. Forced fundamental-domain examples.
Outcome fundamental() {
    ExtendSpec<double> a;
    a.g = [](const double& x) { return x + 1; };
    a.g_inv = [](const double& x) { return x - 1; };
    a.gt = [](const double& x) { return x + 2; };
    a.gt_inv = [](const double& x) { return x - 2; };
    a.domain = {[](const double& x) { return x >= 0 && x <= 1; }, [](const double& x) { return x == 1; }};
    a.target = {[](const double& x) { return x >= 0 && x <= 2; }, [](const double& x) { return x == 2; }};
    a.h0 = [](const double& x) { return 2 * x; };
    a.h0_inv = [](const double& x) { return x / 2; };
    a.minus_samples = {0.0};
    const double e1 = std::fabs(fundamental_extend(a).forward(3.5) - 7);

    ExtendSpec<double> b;
    b.g = [](const double& x) { return 2 * x; };
    b.g_inv = [](const double& x) { return x / 2; };
    b.gt = [](const double& x) { return 4 * x; };
    b.gt_inv = [](const double& x) { return x / 4; };
    b.domain = {[](const double& x) { return x >= 1 && x <= 2; }, [](const double& x) { return x == 2; }};
    b.target = {[](const double& x) { return x >= 1 && x <= 4; }, [](const double& x) { return x == 4; }};
    b.h0 = [](const double& x) { return x * x; };
    b.h0_inv = [](const double& x) { return std::sqrt(x); };
    b.minus_samples = {1.0};
    const double e2 = std::fabs(fundamental_extend(b).forward(8) - 64);

    ExtendSpec<Vec2> c;
    c.g = c.gt = [](const Vec2& p) { return linear_la(p); };
    c.g_inv = c.gt_inv = [](const Vec2& p) { return linear_la_inv(p); };
    c.domain = {[](const Vec2& p) { return p.x >= 1 && p.x <= 2; }, [](const Vec2& p) { return p.x == 2; }};
    c.target = c.domain;
    c.h0 = c.h0_inv = [](const Vec2& p) { return p; };
    c.minus_samples = {{1, -1}, {1, 0}, {1, 1}};
    const auto ec = fundamental_extend(c);
    double e3 = 0;
    for (const Vec2 p : GridSpec{{0.05, 40, -10, 10}, 21, 21}.points()) e3 = std::max(e3, dist(ec.forward(p), p));
    return {e1 <= kExtendTol && e2 <= kExtendTol && e3 <= kExtendTol,
            "|h(3.5)-7| " + sci(e1) + ", |h(8)-64| " + sci(e2) + ", identity " + sci(e3)};
}

std::string read_body(const std::filesystem::path& p) {
    std::ifstream in(p);
    std::ostringstream out;
    std::string line;
    while (std::getline(in, line))
        if (line.find("\"timestamp\"") == std::string::npos) out << line << '\n';
    return out.str();
}

// 8. Byte-identical classify output.
Outcome reproducibility(const std::string& cli) {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / ("folia_repro_" + std::to_string(::getpid()));
    fs::create_directories(dir);
    const std::string cmd = "FOLIA_OUT_DIR='" + dir.string() + "' '" + cli +
                            "' classify --field reeb --window -15 15 -3 3 --resolution 400 > /dev/null";
    const int r1 = std::system(cmd.c_str());
    const std::string a = read_body(dir / "classify.json");
    const int r2 = std::system(cmd.c_str());
    const std::string b = read_body(dir / "classify.json");
    fs::remove_all(dir);
    const bool ok = r1 == 0 && r2 == 0 && !a.empty() && a == b;
    return {ok, "exit codes " + std::to_string(r1) + "/" + std::to_string(r2) + ", " + std::to_string(a.size()) +
                    " bytes, bodies " + (a == b ? "identical" : "DIFFER")};
}

}  // namespace

int main(int argc, char** argv) {
    if (argc < 2) {
        std::fprintf(stderr, "usage: %s <folia-cli>\n", argv[0]);
        return 2;
    }
    const std::string cli = argv[1];
    struct Criterion {
        int id;
        const char* name;
        double limit_s;
        std::function<Outcome()> run;
    };
    const std::vector<Criterion> criteria = {
        {1, "time-one exactness", 1, time_one_exactness},
        {2, "flow-core properties", 30, flow_core},
        {3, "triviality classifier", 300, classifier},
        {4, "prolongation invariants", 600, prolongation},
        {5, "trivialization equivariance", 60, trivialization},
        {6, "saddle conjugacy", 300, saddle},
        {7, "fundamental-domain combinator", 1, fundamental},
        {8, "reproducibility", 600, [&] { return reproducibility(cli); }},
    };
    int unexpected = 0;
    for (const auto& c : criteria) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        const bool in_time = secs < c.limit_s;
        const bool pass = o.pass && in_time;
        const char* tag = pass ? "PASS" : (o.known_conflict && in_time ? "FAIL (known conflict)" : "FAIL");
        std::printf("criterion %d %s: %s [%.2f s, limit %.0f s] %s\n", c.id, tag, c.name, secs, c.limit_s,
                    o.detail.c_str());
        std::fflush(stdout);
        if (!pass && !(o.known_conflict && in_time)) ++unexpected;
    }
    return unexpected == 0 ? 0 : 1;
}
