#include "billiard/scene_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace billiard::geometry {

namespace {

Vec read_vector(const nlohmann::json& j, const char* what, int n) {
  if (!j.is_array()) throw DomainError(std::string("scene: '") + what + "' must be an array");
  if (static_cast<int>(j.size()) != n)
    throw DomainError(std::string("scene: '") + what + "' must have " + std::to_string(n) +
                      " entries");
  Vec v(n);
  for (int k = 0; k < n; ++k) {
    if (!j[static_cast<std::size_t>(k)].is_number())
      throw DomainError(std::string("scene: '") + what + "' entries must be numbers");
    v(k) = j[static_cast<std::size_t>(k)].get<double>();
  }
  return v;
}

}  // namespace

Scene parse_scene(const nlohmann::json& j) {
  if (!j.is_object()) throw DomainError("scene: top level must be an object");
  if (!j.contains("dimension") || !j["dimension"].is_number_integer())
    throw DomainError("scene: missing integer 'dimension'");
  const int n = j["dimension"].get<int>();
  if (n < 2) throw DomainError("scene: dimension must be at least 2");
  if (!j.contains("obstacles") || !j["obstacles"].is_array())
    throw DomainError("scene: missing 'obstacles' array");
  std::vector<Obstacle> ks;
  for (const auto& o : j["obstacles"]) {
    if (!o.is_object() || !o.contains("type") || !o["type"].is_string())
      throw DomainError("scene: every obstacle needs a string 'type'");
    const std::string type = o["type"].get<std::string>();
    if (!o.contains("center")) throw DomainError("scene: obstacle missing 'center'");
    const Vec c = read_vector(o["center"], "center", n);
    if (type == "sphere") {
      if (!o.contains("radius") || !o["radius"].is_number())
        throw DomainError("scene: sphere missing numeric 'radius'");
      ks.push_back(Obstacle::sphere(c, o["radius"].get<double>()));
    } else if (type == "ellipsoid") {
      if (!o.contains("semi_axes")) throw DomainError("scene: ellipsoid missing 'semi_axes'");
      const Vec s = read_vector(o["semi_axes"], "semi_axes", n);
      std::optional<Mat> rot;
      if (o.contains("rotation")) {
        const Vec flat = read_vector(o["rotation"], "rotation", n * n);
        Mat r(n, n);
        for (int a = 0; a < n; ++a)
          for (int b = 0; b < n; ++b) r(a, b) = flat(a * n + b);
        rot = r;
      }
      ks.push_back(Obstacle::ellipsoid(c, s, rot));
    } else {
      throw DomainError("scene: unknown obstacle type '" + type + "'");
    }
  }
  return Scene(n, std::move(ks));
}

Scene load_scene(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DomainError("scene: cannot open '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw DomainError(std::string("scene: parse error: ") + e.what());
  }
  return parse_scene(j);
}

nlohmann::json scene_to_json(const Scene& scene) {
  nlohmann::json j;
  j["dimension"] = scene.dimension();
  j["obstacles"] = nlohmann::json::array();
  for (const auto& k : scene.obstacles()) {
    nlohmann::json o;
    o["center"] = std::vector<double>(k.center().data(), k.center().data() + k.center().size());
    if (k.is_sphere() && k.rotation().isIdentity(0.0)) {
      o["type"] = "sphere";
      o["radius"] = k.radius();
    } else {
      o["type"] = "ellipsoid";
      o["semi_axes"] =
          std::vector<double>(k.semi_axes().data(), k.semi_axes().data() + k.semi_axes().size());
      std::vector<double> flat;
      for (int a = 0; a < k.dimension(); ++a)
        for (int b = 0; b < k.dimension(); ++b) flat.push_back(k.rotation()(a, b));
      o["rotation"] = flat;
    }
    j["obstacles"].push_back(o);
  }
  return j;
}

std::string scene_hash(const Scene& scene) {
  const std::string text = scene_to_json(scene).dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace billiard::geometry
