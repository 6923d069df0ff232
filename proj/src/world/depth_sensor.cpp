#include "rover/world/depth_sensor.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace rover {

double ray_azimuth(const DepthSensorConfig& cfg, int i) {
  return -cfg.fov / 2.0 + cfg.fov * static_cast<double>(i) / static_cast<double>(cfg.ray_count - 1);
}

DepthScan sense_depth(const RoverState& state, const WorldScene& scene,
                      const DepthSensorConfig& cfg, std::mt19937_64* rng) {
  if (cfg.ray_count < 2 || !(cfg.fov > 0.0) || cfg.fov > std::numbers::pi || !(cfg.max_range > 0.0)) {
    throw std::invalid_argument("sense_depth: invalid sensor configuration");
  }
  DepthScan scan;
  scan.origin = state.pose;
  scan.max_range = cfg.max_range;
  scan.fov = cfg.fov;
  scan.timestamp = state.time;
  scan.rays.reserve(static_cast<std::size_t>(cfg.ray_count));

  std::normal_distribution<double> noise(0.0, cfg.range_noise_sigma > 0.0 ? cfg.range_noise_sigma : 1.0);
  const Vec2 origin = state.pose.position();
  for (int i = 0; i < cfg.ray_count; ++i) {
    DepthRay ray;
    ray.azimuth = ray_azimuth(cfg, i);
    const double angle = state.pose.theta + ray.azimuth;
    const Vec2 dir{std::cos(angle), std::sin(angle)};
    double best = cfg.max_range;
    bool hit = false;
    for (const auto& ob : scene.obstacles) {
      if (!(ob.height > 0.0)) {
        continue;
      }
      const auto t = intersect_ray(ob, origin, dir);
      if (!t || *t > best) {
        continue;
      }
      if (hit && *t == best) {
        ray.hit_height = std::max(ray.hit_height, ob.height);
      } else {
        ray.hit_height = ob.height;
      }
      best = *t;
      hit = true;
    }
    if (hit) {
      double r = best;
      if (rng != nullptr && cfg.range_noise_sigma > 0.0) {
        r = std::clamp(r + noise(*rng), 1e-3, cfg.max_range);
      }
      ray.range = r;
    }
    scan.rays.push_back(ray);
  }
  return scan;
}

DepthSensor::DepthSensor(DepthSensorConfig cfg, std::uint64_t seed) : cfg_(cfg), rng_(seed) {}

DepthScan DepthSensor::sense(const RoverState& state, const WorldScene& scene) {
  return sense_depth(state, scene, cfg_, &rng_);
}

}  // namespace rover
