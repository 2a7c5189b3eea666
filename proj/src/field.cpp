#include "folia/field.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "folia/errors.hpp"

namespace folia {

Vec2 eval_field(const VectorFieldHandle& field, Vec2 p) {
    if (!finite(p)) throw DomainError("non-finite evaluation point");
    return field.eval(p);
}

VectorFieldHandle make_field(std::string name, std::string_view src) {
    VectorFieldHandle h;
    h.name = std::move(name);
    h.expr = parse_field(src);
    h.source = std::string(src);
    return h;
}

const std::vector<std::string>& builtin_names() {
    static const std::vector<std::string> names = {"translation", "reeb", "linear-saddle",
                                                   "shear-saddle", "shear-flow"};
    return names;
}

bool is_builtin(std::string_view name) {
    for (const auto& n : builtin_names())
        if (n == name) return true;
    return false;
}

namespace {

void set_integral(VectorFieldHandle& h, std::string src) {
    h.first_integral = Expr::parse(src);
    h.first_integral_src = std::move(src);
}

}  // namespace

VectorFieldHandle builtin_field(std::string_view name) {
    if (name == "translation") {
        auto h = make_field("translation", "(1, 0)");
        set_integral(h, "y");
        h.fixed_points = std::vector<Vec2>{};
        h.window = Window{-10, 10, -10, 10};
        return h;
    }
    if (name == "reeb") {
        auto h = make_field("reeb", "(2*y, (1-y^2)^2)");
        set_integral(h, "x - 1/(1-y^2)");
        h.fixed_points = std::vector<Vec2>{};
        h.window = Window{-15, 15, -0.95, 0.95};
        return h;
    }
    if (name == "linear-saddle") {
        auto h = make_field("linear-saddle", "(ln(2)*x, -ln(2)*y)");
        set_integral(h, "x*y");
        h.fixed_points = std::vector<Vec2>{{0.0, 0.0}};
        h.ground_truth = GroundTruth{parse_field("(x, y)"), parse_field("(x, y)")};
        h.window = Window{-4, 4, -4, 4};
        return h;
    }
    if (name == "shear-saddle") {
        auto h = make_field("shear-saddle",
                            "(ln(2)*(x - 0.3*tanh(y)) - 0.3*ln(2)*y*sech(y)^2, -ln(2)*y)");
        set_integral(h, "(x - 0.3*tanh(y))*y");
        h.fixed_points = std::vector<Vec2>{{0.0, 0.0}};
        h.ground_truth = GroundTruth{parse_field("(x + 0.3*tanh(y), y)"),
                                     parse_field("(x - 0.3*tanh(y), y)")};
        h.window = Window{-4, 4, -4, 4};
        return h;
    }
    if (name == "shear-flow") {
        auto h = make_field("shear-flow", "(1, sin(y))");
        h.fixed_points = std::vector<Vec2>{};
        h.window = Window{-10, 10, -10, 10};
        return h;
    }
    throw InvalidInput("unknown built-in field '" + std::string(name) + "'");
}

VectorFieldHandle load_field_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidInput("cannot open field file '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw InvalidInput("field file '" + path + "': " + e.what());
    }
    if (!j.is_object() || !j.contains("vx") || !j.contains("vy"))
        throw InvalidInput("field file '" + path + "' needs keys vx and vy");
    const std::string vx = j.at("vx").get<std::string>();
    const std::string vy = j.at("vy").get<std::string>();
    auto h = make_field(j.value("name", path), "(" + vx + ", " + vy + ")");
    if (j.contains("first_integral")) set_integral(h, j.at("first_integral").get<std::string>());
    if (j.contains("fixed_points")) {
        std::vector<Vec2> pts;
        for (const auto& p : j.at("fixed_points")) pts.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
        h.fixed_points = std::move(pts);
    }
    if (j.contains("window")) {
        const auto& w = j.at("window");
        h.window = Window{w.at(0).get<double>(), w.at(1).get<double>(), w.at(2).get<double>(),
                          w.at(3).get<double>()};
        if (!h.window->valid()) throw InvalidInput("field file '" + path + "': empty window");
    }
    return h;
}

FieldPtr resolve_field(const std::string& name_or_path) {
    if (is_builtin(name_or_path))
        return std::make_shared<const VectorFieldHandle>(builtin_field(name_or_path));
    return std::make_shared<const VectorFieldHandle>(load_field_file(name_or_path));
}

}  // namespace folia
