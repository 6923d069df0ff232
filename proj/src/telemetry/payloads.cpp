#include "rover/telemetry/payloads.hpp"

#include <jpeglib.h>

#include <algorithm>
#include <cmath>
#include <csetjmp>
#include <cstdlib>
#include <stdexcept>

#include "rover/telemetry/bytes.hpp"

namespace rover {

namespace {

void put_poses(ByteWriter& w, std::span<const Pose2D> poses) {
  w.u32(static_cast<std::uint32_t>(poses.size()));
  for (const auto& p : poses) {
    w.f64(p.x);
    w.f64(p.y);
    w.f64(p.theta);
  }
}

std::vector<Pose2D> get_poses(ByteReader& r) {
  const std::uint32_t n = r.u32();
  if (n > r.remaining() / 24) throw TruncatedInput("pose list longer than payload");
  std::vector<Pose2D> poses(n);
  for (auto& p : poses) {
    p.x = r.f64();
    p.y = r.f64();
    p.theta = r.f64();
  }
  return poses;
}

std::uint32_t pack_rgb(int r, int g, int b) {
  auto c = [](int v) { return static_cast<std::uint32_t>(std::clamp(v, 0, 255)); };
  return (c(r) << 16) | (c(g) << 8) | c(b);
}

}  // namespace

std::vector<std::uint8_t> encode_pose(const RoverState& s) {
  std::vector<std::uint8_t> out;
  ByteWriter w(out);
  w.f64(s.time);
  w.f64(s.pose.x);
  w.f64(s.pose.y);
  w.f64(s.pose.theta);
  w.f64(s.twist.v);
  w.f64(s.twist.omega);
  return out;
}

RoverState decode_pose(std::span<const std::uint8_t> payload) {
  ByteReader r(payload);
  RoverState s;
  s.time = r.f64();
  s.pose.x = r.f64();
  s.pose.y = r.f64();
  s.pose.theta = r.f64();
  s.twist.v = r.f64();
  s.twist.omega = r.f64();
  return s;
}

std::vector<std::uint8_t> encode_costmap(const Costmap& cm) {
  const auto& g = cm.geometry();
  std::vector<std::uint8_t> out;
  out.reserve(40 + cm.costs().size());
  ByteWriter w(out);
  w.f64(g.resolution);
  w.u32(static_cast<std::uint32_t>(g.width));
  w.u32(static_cast<std::uint32_t>(g.height));
  w.f64(g.origin.x);
  w.f64(g.origin.y);
  w.f64(cm.stamp());
  w.bytes(cm.costs());
  return out;
}

Costmap decode_costmap(std::span<const std::uint8_t> payload) {
  ByteReader r(payload);
  GridGeometry g;
  g.resolution = r.f64();
  g.width = static_cast<int>(r.u32());
  g.height = static_cast<int>(r.u32());
  g.origin.x = r.f64();
  g.origin.y = r.f64();
  const double stamp = r.f64();
  const auto cells = r.bytes(g.size());
  return Costmap(g, std::vector<std::uint8_t>(cells.begin(), cells.end()), stamp);
}

std::vector<std::uint8_t> encode_path(const PathPayload& path) {
  std::vector<std::uint8_t> out;
  ByteWriter w(out);
  put_poses(w, path.poses);
  w.f64(path.cost);
  return out;
}

PathPayload decode_path(std::span<const std::uint8_t> payload) {
  ByteReader r(payload);
  PathPayload p;
  p.poses = get_poses(r);
  p.cost = r.f64();
  return p;
}

std::vector<std::uint8_t> encode_local_plan(const TebTrajectory& traj) {
  std::vector<std::uint8_t> out;
  ByteWriter w(out);
  put_poses(w, traj.poses);
  for (std::size_t i = 0; i < traj.segments(); ++i) w.f64(segment_velocity(traj, i));
  return out;
}

LocalPlanPayload decode_local_plan(std::span<const std::uint8_t> payload) {
  ByteReader r(payload);
  LocalPlanPayload p;
  p.poses = get_poses(r);
  if (!p.poses.empty()) {
    p.velocities.resize(p.poses.size() - 1);
    for (auto& v : p.velocities) v = r.f64();
  }
  return p;
}

std::vector<std::uint8_t> encode_cloud(std::span<const CloudPoint> points) {
  std::vector<std::uint8_t> out;
  out.reserve(4 + 16 * points.size());
  ByteWriter w(out);
  w.u32(static_cast<std::uint32_t>(points.size()));
  for (const auto& p : points) {
    w.f32(p.x);
    w.f32(p.y);
    w.f32(p.z);
    w.u32(p.rgb);
  }
  return out;
}

std::vector<CloudPoint> decode_cloud(std::span<const std::uint8_t> payload) {
  ByteReader r(payload);
  const std::uint32_t n = r.u32();
  if (n > r.remaining() / 16) throw TruncatedInput("cloud longer than payload");
  std::vector<CloudPoint> pts(n);
  for (auto& p : pts) {
    p.x = r.f32();
    p.y = r.f32();
    p.z = r.f32();
    p.rgb = r.u32();
  }
  return pts;
}

std::vector<CloudPoint> stereo_cloud(const DepthScan& scan) {
  std::vector<CloudPoint> pts;
  const Vec2 o = scan.origin.position();
  for (const auto& ray : scan.rays) {
    const double a = scan.origin.theta + ray.azimuth;
    const Vec2 d{std::cos(a), std::sin(a)};
    const double reach = ray.range.value_or(scan.max_range);
    for (double t = 0.5; t < reach; t += 0.25) {
      const Vec2 p = o + d * t;
      pts.push_back({static_cast<float>(p.x), static_cast<float>(p.y), 0.0f, pack_rgb(150, 130, 110)});
    }
    if (ray.range) {
      const Vec2 p = o + d * *ray.range;
      const int shade = static_cast<int>(200.0 - 12.0 * *ray.range);
      for (double z = 0.0; z <= ray.hit_height + 1e-9; z += 0.05) {
        pts.push_back({static_cast<float>(p.x), static_cast<float>(p.y), static_cast<float>(z),
                       pack_rgb(shade, shade - 20, shade - 40)});
      }
    }
  }
  return pts;
}

std::vector<CloudPoint> map_cloud(const OccupancyGrid& grid) {
  std::vector<CloudPoint> pts;
  const auto& g = grid.geometry();
  for (int y = 0; y < g.height; ++y) {
    for (int x = 0; x < g.width; ++x) {
      const auto state = grid.at({x, y});
      if (state == CellState::Unknown) continue;
      const Vec2 c = g.center_of({x, y});
      if (state == CellState::Free) {
        pts.push_back({static_cast<float>(c.x), static_cast<float>(c.y), 0.0f, pack_rgb(120, 120, 120)});
      } else {
        for (int k = 0; k < 4; ++k) {
          pts.push_back({static_cast<float>(c.x), static_cast<float>(c.y), 0.1f * k, pack_rgb(230, 200, 40)});
        }
      }
    }
  }
  return pts;
}

namespace {

struct JpegErrorManager {
  jpeg_error_mgr base;
  std::jmp_buf jump;
};

void on_jpeg_error(j_common_ptr cinfo) {
  auto* err = reinterpret_cast<JpegErrorManager*>(cinfo->err);
  std::longjmp(err->jump, 1);
}

}  // namespace

std::vector<std::uint8_t> encode_jpeg(const Image& image, int quality) {
  if (image.width <= 0 || image.height <= 0 ||
      image.rgb.size() != static_cast<std::size_t>(image.width) * image.height * 3) {
    throw std::invalid_argument("encode_jpeg: malformed image");
  }
  jpeg_compress_struct cinfo{};
  JpegErrorManager err{};
  cinfo.err = jpeg_std_error(&err.base);
  err.base.error_exit = on_jpeg_error;
  unsigned char* buffer = nullptr;
  unsigned long size = 0;
  if (setjmp(err.jump)) {
    jpeg_destroy_compress(&cinfo);
    std::free(buffer);
    throw std::runtime_error("JPEG compression failed");
  }
  jpeg_create_compress(&cinfo);
  jpeg_mem_dest(&cinfo, &buffer, &size);
  cinfo.image_width = static_cast<JDIMENSION>(image.width);
  cinfo.image_height = static_cast<JDIMENSION>(image.height);
  cinfo.input_components = 3;
  cinfo.in_color_space = JCS_RGB;
  jpeg_set_defaults(&cinfo);
  jpeg_set_quality(&cinfo, quality, TRUE);
  jpeg_start_compress(&cinfo, TRUE);
  while (cinfo.next_scanline < cinfo.image_height) {
    JSAMPROW row = const_cast<JSAMPROW>(image.pixel(0, static_cast<int>(cinfo.next_scanline)));
    jpeg_write_scanlines(&cinfo, &row, 1);
  }
  jpeg_finish_compress(&cinfo);
  std::vector<std::uint8_t> out(buffer, buffer + size);
  jpeg_destroy_compress(&cinfo);
  std::free(buffer);
  return out;
}

Image decode_jpeg(std::span<const std::uint8_t> jpeg) {
  jpeg_decompress_struct cinfo{};
  JpegErrorManager err{};
  cinfo.err = jpeg_std_error(&err.base);
  err.base.error_exit = on_jpeg_error;
  if (setjmp(err.jump)) {
    jpeg_destroy_decompress(&cinfo);
    throw std::runtime_error("JPEG decompression failed");
  }
  jpeg_create_decompress(&cinfo);
  jpeg_mem_src(&cinfo, jpeg.data(), static_cast<unsigned long>(jpeg.size()));
  jpeg_read_header(&cinfo, TRUE);
  cinfo.out_color_space = JCS_RGB;
  jpeg_start_decompress(&cinfo);
  Image img;
  img.width = static_cast<int>(cinfo.output_width);
  img.height = static_cast<int>(cinfo.output_height);
  img.rgb.resize(static_cast<std::size_t>(img.width) * img.height * 3);
  while (cinfo.output_scanline < cinfo.output_height) {
    JSAMPROW row = img.pixel(0, static_cast<int>(cinfo.output_scanline));
    jpeg_read_scanlines(&cinfo, &row, 1);
  }
  jpeg_finish_decompress(&cinfo);
  jpeg_destroy_decompress(&cinfo);
  return img;
}

std::vector<std::uint8_t> encode_goal_ack(const GoalAck& ack) {
  std::vector<std::uint8_t> out;
  ByteWriter w(out);
  w.str(ack.id);
  w.f64(ack.goal.x);
  w.f64(ack.goal.y);
  w.f64(ack.goal.theta);
  return out;
}

GoalAck decode_goal_ack(std::span<const std::uint8_t> payload) {
  ByteReader r(payload);
  GoalAck a;
  a.id = r.str();
  a.goal.x = r.f64();
  a.goal.y = r.f64();
  a.goal.theta = r.f64();
  return a;
}

std::vector<std::uint8_t> text_payload(const std::string& text) { return {text.begin(), text.end()}; }

std::string payload_text(std::span<const std::uint8_t> payload) { return {payload.begin(), payload.end()}; }

}  // namespace rover
