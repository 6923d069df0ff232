#include "rover/world/scene.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace rover {

namespace {

std::string where(const std::string& origin, const YAML::Node& node) {
  const auto mark = node.Mark();
  std::ostringstream os;
  os << origin;
  if (mark.line >= 0) {
    os << ":" << (mark.line + 1) << ":" << (mark.column + 1);
  }
  return os.str();
}

template <typename T>
T require(const YAML::Node& parent, const char* key, const std::string& origin,
          const std::string& context) {
  const YAML::Node node = parent[key];
  if (!node) {
    throw SceneError(where(origin, parent) + ": " + context + ": missing field '" + key + "'");
  }
  try {
    return node.as<T>();
  } catch (const YAML::Exception&) {
    throw SceneError(where(origin, node) + ": " + context + ": field '" + key +
                     "' has the wrong type");
  }
}

Vec2 require_vec(const YAML::Node& parent, const char* key, const std::string& origin,
                 const std::string& context) {
  const auto xy = require<std::vector<double>>(parent, key, origin, context);
  if (xy.size() != 2) {
    throw SceneError(where(origin, parent[key]) + ": " + context + ": field '" + key +
                     "' must be [x, y]");
  }
  return {xy[0], xy[1]};
}

bool finite(const Vec2& v) { return std::isfinite(v.x) && std::isfinite(v.y); }

}  // namespace

void WorldScene::validate() const {
  std::vector<std::string> problems;
  if (!(bounds.width() > 0.0) || !(bounds.height() > 0.0) || !finite(bounds.min) ||
      !finite(bounds.max)) {
    problems.push_back("bounds must have positive area");
  }
  if (!std::isfinite(start.theta) || !bounds.contains(start.position())) {
    problems.push_back("start pose lies outside the scene bounds");
  }
  for (const auto& ob : obstacles) {
    if (!(ob.height >= 0.0) || !std::isfinite(ob.height)) {
      problems.push_back("obstacle '" + ob.id + "' has negative height");
    }
    bool inside = true;
    if (const auto* c = std::get_if<Circle>(&ob.shape)) {
      if (!(c->radius > 0.0) || !finite(c->center)) {
        problems.push_back("obstacle '" + ob.id + "' has non-positive radius");
      }
      inside = bounds.contains({c->center.x - c->radius, c->center.y - c->radius}) &&
               bounds.contains({c->center.x + c->radius, c->center.y + c->radius});
    } else {
      const auto& b = std::get<Box>(ob.shape);
      if (!(b.max.x > b.min.x) || !(b.max.y > b.min.y) || !finite(b.min) || !finite(b.max)) {
        problems.push_back("obstacle '" + ob.id + "' has an empty box");
      }
      inside = bounds.contains(b.min) && bounds.contains(b.max);
    }
    if (!inside) {
      problems.push_back("obstacle '" + ob.id + "' lies outside the scene bounds");
    }
  }
  if (!problems.empty()) {
    std::string msg = "invalid scene '" + name + "':";
    for (const auto& p : problems) {
      msg += "\n  " + p;
    }
    throw SceneError(msg);
  }
}

WorldScene parse_scene(const std::string& text, const std::string& origin) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw SceneError(origin + ":" + std::to_string(e.mark.line + 1) + ":" +
                     std::to_string(e.mark.column + 1) + ": " + e.msg);
  }
  if (!root.IsMap()) {
    throw SceneError(origin + ": scene document must be a mapping");
  }

  WorldScene scene;
  scene.name = require<std::string>(root, "name", origin, "scene");
  const YAML::Node bounds = root["bounds"];
  if (!bounds) {
    throw SceneError(where(origin, root) + ": scene: missing field 'bounds'");
  }
  scene.bounds.min = require_vec(bounds, "min", origin, "bounds");
  scene.bounds.max = require_vec(bounds, "max", origin, "bounds");
  if (root["seed"]) {
    scene.seed = require<std::uint64_t>(root, "seed", origin, "scene");
  }
  if (root["start"]) {
    const auto s = require<std::vector<double>>(root, "start", origin, "scene");
    if (s.size() != 3) {
      throw SceneError(where(origin, root["start"]) + ": scene: field 'start' must be [x, y, theta]");
    }
    scene.start = {s[0], s[1], s[2]};
  }

  if (const YAML::Node obstacles = root["obstacles"]) {
    if (!obstacles.IsSequence()) {
      throw SceneError(where(origin, obstacles) + ": 'obstacles' must be a list");
    }
    std::size_t index = 0;
    for (const auto& node : obstacles) {
      Obstacle ob;
      const std::string ctx = "obstacle[" + std::to_string(index) + "]";
      ob.id = node["id"] ? require<std::string>(node, "id", origin, ctx) : ctx;
      const auto shape = require<std::string>(node, "shape", origin, ctx);
      ob.height = require<double>(node, "height_m", origin, ctx);
      if (shape == "circle") {
        ob.shape = Circle{require_vec(node, "center", origin, ctx),
                          require<double>(node, "radius", origin, ctx)};
      } else if (shape == "box") {
        ob.shape = Box{require_vec(node, "min", origin, ctx), require_vec(node, "max", origin, ctx)};
      } else {
        throw SceneError(where(origin, node["shape"]) + ": " + ctx + ": unknown shape '" + shape +
                         "'");
      }
      scene.obstacles.push_back(std::move(ob));
      ++index;
    }
  }
  scene.validate();
  return scene;
}

WorldScene load_scene(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw SceneError("cannot open scene file " + path.string());
  }
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_scene(buffer.str(), path.string());
}

std::string dump_scene(const WorldScene& scene) {
  YAML::Emitter out;
  out.SetDoublePrecision(17);
  out << YAML::BeginMap;
  out << YAML::Key << "name" << YAML::Value << scene.name;
  out << YAML::Key << "seed" << YAML::Value << scene.seed;
  out << YAML::Key << "start" << YAML::Value << YAML::Flow
      << std::vector<double>{scene.start.x, scene.start.y, scene.start.theta};
  out << YAML::Key << "bounds" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "min" << YAML::Value << YAML::Flow
      << std::vector<double>{scene.bounds.min.x, scene.bounds.min.y};
  out << YAML::Key << "max" << YAML::Value << YAML::Flow
      << std::vector<double>{scene.bounds.max.x, scene.bounds.max.y};
  out << YAML::EndMap;
  out << YAML::Key << "obstacles" << YAML::Value << YAML::BeginSeq;
  for (const auto& ob : scene.obstacles) {
    out << YAML::BeginMap << YAML::Key << "id" << YAML::Value << ob.id;
    if (const auto* c = std::get_if<Circle>(&ob.shape)) {
      out << YAML::Key << "shape" << YAML::Value << "circle";
      out << YAML::Key << "center" << YAML::Value << YAML::Flow
          << std::vector<double>{c->center.x, c->center.y};
      out << YAML::Key << "radius" << YAML::Value << c->radius;
    } else {
      const auto& b = std::get<Box>(ob.shape);
      out << YAML::Key << "shape" << YAML::Value << "box";
      out << YAML::Key << "min" << YAML::Value << YAML::Flow << std::vector<double>{b.min.x, b.min.y};
      out << YAML::Key << "max" << YAML::Value << YAML::Flow << std::vector<double>{b.max.x, b.max.y};
    }
    out << YAML::Key << "height_m" << YAML::Value << ob.height << YAML::EndMap;
  }
  out << YAML::EndSeq << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

std::optional<double> intersect_ray(const Obstacle& obstacle, const Vec2& origin, const Vec2& dir) {
  if (const auto* c = std::get_if<Circle>(&obstacle.shape)) {
    // |o + t d - c|^2 = r^2 with |d| = 1
    const Vec2 oc = origin - c->center;
    const double b = oc.dot(dir);
    const double cc = oc.dot(oc) - c->radius * c->radius;
    const double disc = b * b - cc;
    if (disc < 0.0) {
      return std::nullopt;
    }
    const double sq = std::sqrt(disc);
    const double t0 = -b - sq;
    const double t1 = -b + sq;
    if (t0 > 0.0) return t0;
    if (t1 > 0.0) return t1;
    return std::nullopt;
  }
  const auto& box = std::get<Box>(obstacle.shape);
  double tmin = -std::numeric_limits<double>::infinity();
  double tmax = std::numeric_limits<double>::infinity();
  const double o[2] = {origin.x, origin.y};
  const double d[2] = {dir.x, dir.y};
  const double lo[2] = {box.min.x, box.min.y};
  const double hi[2] = {box.max.x, box.max.y};
  for (int axis = 0; axis < 2; ++axis) {
    if (d[axis] == 0.0) {
      if (o[axis] < lo[axis] || o[axis] > hi[axis]) {
        return std::nullopt;
      }
      continue;
    }
    double t1 = (lo[axis] - o[axis]) / d[axis];
    double t2 = (hi[axis] - o[axis]) / d[axis];
    if (t1 > t2) std::swap(t1, t2);
    tmin = std::max(tmin, t1);
    tmax = std::min(tmax, t2);
  }
  if (tmin > tmax) {
    return std::nullopt;
  }
  if (tmin > 0.0) return tmin;
  if (tmax > 0.0) return tmax;
  return std::nullopt;
}

bool contains_point(const Obstacle& obstacle, const Vec2& p) {
  if (const auto* c = std::get_if<Circle>(&obstacle.shape)) {
    const Vec2 d = p - c->center;
    return d.dot(d) <= c->radius * c->radius;
  }
  const auto& b = std::get<Box>(obstacle.shape);
  return p.x >= b.min.x && p.x <= b.max.x && p.y >= b.min.y && p.y <= b.max.y;
}

bool overlaps_rect(const Obstacle& obstacle, const Vec2& lo, const Vec2& hi) {
  if (const auto* c = std::get_if<Circle>(&obstacle.shape)) {
    const double nx = std::clamp(c->center.x, lo.x, hi.x);
    const double ny = std::clamp(c->center.y, lo.y, hi.y);
    const Vec2 d = Vec2{nx, ny} - c->center;
    return d.dot(d) <= c->radius * c->radius;
  }
  const auto& b = std::get<Box>(obstacle.shape);
  return b.min.x <= hi.x && b.max.x >= lo.x && b.min.y <= hi.y && b.max.y >= lo.y;
}

}  // namespace rover
