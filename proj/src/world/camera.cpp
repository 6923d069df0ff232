#include "rover/world/camera.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace rover {

namespace {

struct Span {
  double depth;
  double height;
  std::size_t obstacle;
};

std::uint8_t shade(double base, double factor) {
  return static_cast<std::uint8_t>(std::clamp(base * factor, 0.0, 255.0));
}

}  // namespace

double CameraConfig::focal() const { return (width / 2.0) / std::tan(hfov / 2.0); }

Image render_camera(const RoverState& state, const WorldScene& scene, const CameraConfig& cfg) {
  if (cfg.width <= 0 || cfg.height <= 0) {
    throw std::invalid_argument("render_camera: image dimensions must be positive");
  }
  Image img;
  img.width = cfg.width;
  img.height = cfg.height;
  img.rgb.resize(static_cast<std::size_t>(cfg.width) * cfg.height * 3);

  const double f = cfg.focal();
  const double cx = cfg.width / 2.0;
  const double cy = cfg.height / 2.0;

  // Sky band above the horizon, ground below with distance falloff.
  for (int v = 0; v < cfg.height; ++v) {
    std::uint8_t r, g, b;
    if (v < cy) {
      const double t = v / cy;
      r = shade(40, 1.0 + t);
      g = shade(60, 1.0 + t);
      b = shade(110, 1.0 + 0.8 * t);
    } else {
      const double t = (v - cy + 1.0) / (cfg.height - cy);
      r = shade(150, 0.55 + 0.45 * t);
      g = shade(120, 0.55 + 0.45 * t);
      b = shade(90, 0.55 + 0.45 * t);
    }
    for (int u = 0; u < cfg.width; ++u) {
      auto* px = img.pixel(u, v);
      px[0] = r;
      px[1] = g;
      px[2] = b;
    }
  }

  const Vec2 origin = state.pose.position();
  const Vec2 forward{std::cos(state.pose.theta), std::sin(state.pose.theta)};
  const Vec2 right{forward.y, -forward.x};
  std::vector<Span> spans;
  for (int u = 0; u < cfg.width; ++u) {
    const double xc = (u + 0.5 - cx) / f;
    const Vec2 ray = forward + right * xc;
    const double len = ray.norm();
    const Vec2 dir = ray * (1.0 / len);

    spans.clear();
    for (std::size_t k = 0; k < scene.obstacles.size(); ++k) {
      const auto& ob = scene.obstacles[k];
      if (!(ob.height > 0.0)) continue;
      if (const auto t = intersect_ray(ob, origin, dir)) {
        spans.push_back({*t / len, ob.height, k});
      }
    }
    // Painter's order: far to near.
    std::sort(spans.begin(), spans.end(),
              [](const Span& a, const Span& b) { return a.depth > b.depth; });
    for (const auto& s : spans) {
      const double top = cy - f * (s.height - cfg.mount_height) / s.depth;
      const double bottom = cy + f * cfg.mount_height / s.depth;
      const int v0 = std::max(0, static_cast<int>(std::ceil(top - 0.5)));
      const int v1 = std::min(cfg.height - 1, static_cast<int>(std::floor(bottom - 0.5)));
      const double fade = std::clamp(1.4 - 0.08 * s.depth, 0.35, 1.2);
      const double hue = static_cast<double>((s.obstacle * 37) % 64);
      for (int v = v0; v <= v1; ++v) {
        const double grad = 0.85 + 0.15 * (v - v0) / std::max(1, v1 - v0);
        auto* px = img.pixel(u, v);
        px[0] = shade(120 + hue, fade * grad);
        px[1] = shade(95 + hue / 2, fade * grad);
        px[2] = shade(80, fade * grad);
      }
    }
  }
  return img;
}

}  // namespace rover
