#pragma once

#include <cstdint>
#include <string>

#include <json.hpp>

#include "billiard/geometry.hpp"

namespace billiard::geometry {

/// Scene file:
///   { "dimension": n,
///     "obstacles": [ {"type":"sphere","center":[..],"radius":r}
///                  | {"type":"ellipsoid","center":[..],"semi_axes":[..],
///                     "rotation":[row-major n*n, optional]} ] }
/// Throws DomainError with a diagnostic on malformed input.
Scene parse_scene(const nlohmann::json& j);
Scene load_scene(const std::string& path);
nlohmann::json scene_to_json(const Scene& scene);

/// FNV-1a 64 of the canonical JSON dump, as 16 hex digits.
std::string scene_hash(const Scene& scene);

}  // namespace billiard::geometry
