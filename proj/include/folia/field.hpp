#pragma once

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "folia/expr.hpp"
#include "folia/geometry.hpp"

namespace folia {

// Known conjugacy psi with the flow written as psi * (model flow) * psi^-1.
struct GroundTruth {
    FieldExpr forward;
    FieldExpr inverse;
};

struct VectorFieldHandle {
    std::string name;
    FieldExpr expr;
    std::optional<Expr> first_integral;
    std::optional<std::string> first_integral_src;
    std::optional<std::vector<Vec2>> fixed_points;  // empty vector: declared fixed-point free
    std::optional<GroundTruth> ground_truth;
    std::optional<Window> window;                   // validity window for metadata
    std::string source;                             // original "(vx, vy)" text

    Vec2 eval(Vec2 p) const { return expr.eval(p); }
};

using FieldPtr = std::shared_ptr<const VectorFieldHandle>;

Vec2 eval_field(const VectorFieldHandle& field, Vec2 p);

VectorFieldHandle make_field(std::string name, std::string_view src);

const std::vector<std::string>& builtin_names();
bool is_builtin(std::string_view name);
VectorFieldHandle builtin_field(std::string_view name);

// JSON file with keys name, vx, vy and optional first_integral, fixed_points, window.
VectorFieldHandle load_field_file(const std::string& path);

// A registry name or a path to a field definition file.
FieldPtr resolve_field(const std::string& name_or_path);

}  // namespace folia
