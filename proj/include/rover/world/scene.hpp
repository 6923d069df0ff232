/**
 * @file scene.hpp
 * @brief 2.5D obstacle world loaded from YAML scene files.
 */
#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "rover/core/geometry.hpp"

namespace rover {

struct Circle {
  Vec2 center;
  double radius{0.0};
};

struct Box {
  Vec2 min;
  Vec2 max;
};

struct Bounds {
  Vec2 min;
  Vec2 max;

  double width() const { return max.x - min.x; }
  double height() const { return max.y - min.y; }
  bool contains(const Vec2& p) const {
    return p.x >= min.x && p.x <= max.x && p.y >= min.y && p.y <= max.y;
  }
};

struct Obstacle {
  std::string id;
  std::variant<Circle, Box> shape;
  double height{0.0};  ///< [m] above ground
};

struct WorldScene {
  std::string name;
  Bounds bounds;
  std::vector<Obstacle> obstacles;
  std::uint64_t seed{0};
  Pose2D start{};  ///< initial rover pose

  /// Throws SceneError listing every offending obstacle.
  void validate() const;
};

class SceneError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Parses a scene document. `origin` names the source in diagnostics.
WorldScene parse_scene(const std::string& text, const std::string& origin = "<scene>");

WorldScene load_scene(const std::filesystem::path& path);

std::string dump_scene(const WorldScene& scene);

/// Nearest ray intersection with positive parameter, if any.
std::optional<double> intersect_ray(const Obstacle& obstacle, const Vec2& origin, const Vec2& dir);

bool contains_point(const Obstacle& obstacle, const Vec2& p);

/// True if the obstacle overlaps the closed axis-aligned square [lo, hi].
bool overlaps_rect(const Obstacle& obstacle, const Vec2& lo, const Vec2& hi);

}  // namespace rover
