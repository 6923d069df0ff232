/**
 * @file depth_sensor.hpp
 * @brief Planar fan abstraction of the stereo depth product.
 */
#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "rover/core/geometry.hpp"
#include "rover/world/rover_model.hpp"
#include "rover/world/scene.hpp"

namespace rover {

struct DepthRay {
  double azimuth{0.0};  ///< relative to the rover heading [rad]
  std::optional<double> range;  ///< nullopt: max-range miss
  double hit_height{0.0};
};

struct DepthScan {
  Pose2D origin;
  std::vector<DepthRay> rays;
  double max_range{10.0};
  double fov{0.0};
  double timestamp{0.0};
};

struct DepthSensorConfig {
  double fov{1.5707963267948966};  ///< 90 deg
  int ray_count{180};
  double max_range{10.0};
  double range_noise_sigma{0.0};
  double rate_hz{4.0};
};

/// Seeded noise source so repeated runs produce identical scans.
class DepthSensor {
 public:
  explicit DepthSensor(DepthSensorConfig cfg, std::uint64_t seed = 0);

  DepthScan sense(const RoverState& state, const WorldScene& scene);

  const DepthSensorConfig& config() const { return cfg_; }

 private:
  DepthSensorConfig cfg_;
  std::mt19937_64 rng_;
};

/// Noise-free scan (sigma from cfg ignored unless an rng is supplied).
DepthScan sense_depth(const RoverState& state, const WorldScene& scene,
                      const DepthSensorConfig& cfg, std::mt19937_64* rng = nullptr);

/// Azimuth of ray i, evenly spaced over [-fov/2, +fov/2].
double ray_azimuth(const DepthSensorConfig& cfg, int i);

}  // namespace rover
