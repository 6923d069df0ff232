/**
 * @file camera.hpp
 * @brief Flat-shaded first-person navigation camera.
 */
#pragma once

#include <cstdint>
#include <vector>

#include "rover/world/rover_model.hpp"
#include "rover/world/scene.hpp"

namespace rover {

/// Interleaved 8-bit RGB raster, row-major, top row first.
struct Image {
  int width{0};
  int height{0};
  std::vector<std::uint8_t> rgb;

  std::uint8_t* pixel(int u, int v) {
    return rgb.data() + (static_cast<std::size_t>(v) * width + u) * 3;
  }
  const std::uint8_t* pixel(int u, int v) const {
    return rgb.data() + (static_cast<std::size_t>(v) * width + u) * 3;
  }
  bool operator==(const Image&) const = default;
};

struct CameraConfig {
  int width{1280};
  int height{720};
  double hfov{1.5707963267948966};
  double mount_height{0.6};  ///< [m] above ground

  /// Focal length in pixels.
  double focal() const;
};

Image render_camera(const RoverState& state, const WorldScene& scene, const CameraConfig& cfg = {});

}  // namespace rover
