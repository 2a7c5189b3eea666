#pragma once

#include <string>

#include <json.hpp>

#include "folia/conjugacy.hpp"
#include "folia/reeb.hpp"

namespace folia {

// Indented JSON with every number printed as %.17g; object keys keep insertion order.
std::string dump_json(const nlohmann::ordered_json& j);

nlohmann::ordered_json point_json(Vec2 p);
nlohmann::ordered_json window_json(const Window& w);
nlohmann::ordered_json arc_summary(const GArc& arc);
nlohmann::ordered_json to_ordered_json(const ReebComponentReport& r);
nlohmann::ordered_json to_ordered_json(const Classification& c);
nlohmann::ordered_json to_ordered_json(const SectionResult& r);
nlohmann::ordered_json to_ordered_json(const SaddleChart& c);

// Writes to a sibling temporary file and renames it over `path`.
void write_atomic(const std::string& path, const std::string& contents);

}  // namespace folia
