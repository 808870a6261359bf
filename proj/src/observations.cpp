#include "arena/observations.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <memory>

namespace arena {

namespace {

const Vec3 kLightDir = normalized(Vec3{-0.4, -1.0, -0.6});  // direction light travels

struct Color {
  double r = 0, g = 0, b = 0;
};

Color to_color(Rgb c) { return {double(c.r), double(c.g), double(c.b)}; }
Color scale(Color c, double s) { return {c.r * s, c.g * s, c.b * s}; }
Color mix(Color a, Color b, double t) { return {a.r + (b.r - a.r) * t, a.g + (b.g - a.g) * t, a.b + (b.b - a.b) * t}; }

double lambert(const Vec3& normal) { return kAmbient + (1.0 - kAmbient) * std::max(0.0, -dot(normal, kLightDir)); }

std::uint8_t to_byte(double v) { return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L)); }

Vec3 agent_eye(const WorldState& world, double height) {
  const Vec3& p = world.agent().body.pose.position;
  return {p.x, p.y + height, p.z};
}

// Alternating tint on unit squares.
double checker(double a, double b) {
  const long ia = static_cast<long>(std::floor(a)), ib = static_cast<long>(std::floor(b));
  return ((ia + ib) & 1) ? 0.92 : 1.0;
}

class CameraScene {
 public:
  explicit CameraScene(const WorldState& world) : world_(world) {
    for (const Entity& e : world.entities) {
      if (e.id == world.agent_id) continue;
      if (is_zone(e.kind)) {
        zones_.push_back(&e);
        continue;
      }
      if (is_transparent(e.kind)) any_transparent_ = true;
      targets_.push_back({e.id, static_cast<int>(ray_category(e.kind)), &e.body, &e.collider});
    }
    scene_.emplace(targets_, std::nullopt, world.params);
  }

  Color shade(const Vec3& o, const Vec3& d) const {
    // Background: floor, fence or sky.
    const double arena = world_.params.arena_size;
    double t_bg = kRayMaxRange * 4;
    Color bg = to_color(kSkyColor);
    if (d.y < 0.0) {
      const double t = -o.y / d.y;
      if (t < t_bg) {
        t_bg = t;
        const Vec3 p = o + d * t;
        bg = scale(to_color(kFloorColor), lambert({0, 1, 0}) * checker(p.x, p.z));
        for (const Entity* z : zones_) {
          if (inside_footprint(*z, p)) {
            bg = mix(bg, scale(to_color(z->color), lambert({0, 1, 0})), 0.6);
            break;
          }
        }
      }
    }
    double t_fence = 0.0;
    Vec3 fence_normal;
    if (fence_hit(arena, o, d, t_fence, fence_normal) && t_fence < t_bg) {
      const Vec3 p = o + d * t_fence;
      if (p.y <= kFenceHeight) {
        t_bg = t_fence;
        const double along = std::abs(fence_normal.x) > 0.5 ? p.z : p.x;
        bg = scale(to_color(kFenceColor), lambert(fence_normal) * checker(along, p.y * 4));
      }
    }

    if (!any_transparent_) {
      auto hit = scene_->nearest(o, d, t_bg);
      if (!hit) return bg;
      return surface(*hit, o, d);
    }
    scene_->all_hits(o, d, t_bg, hits_);
    std::sort(hits_.begin(), hits_.end(), [](const auto& a, const auto& b) {
      return a.distance != b.distance ? a.distance < b.distance : a.entity_id < b.entity_id;
    });
    Color acc;
    double remaining = 1.0;
    for (const auto& h : hits_) {
      const Entity* e = world_.find(h.entity_id);
      const Color c = surface(h, o, d);
      if (e && is_transparent(e->kind)) {
        acc = {acc.r + c.r * kTransparentAlpha * remaining, acc.g + c.g * kTransparentAlpha * remaining,
               acc.b + c.b * kTransparentAlpha * remaining};
        remaining *= 1.0 - kTransparentAlpha;
        continue;
      }
      return {acc.r + c.r * remaining, acc.g + c.g * remaining, acc.b + c.b * remaining};
    }
    return {acc.r + bg.r * remaining, acc.g + bg.g * remaining, acc.b + bg.b * remaining};
  }

 private:
  static bool inside_footprint(const Entity& z, const Vec3& p) {
    const Vec3 d = p - z.body.pose.position;
    const Vec3 ax = right_from_yaw(z.body.pose.yaw), az = forward_from_yaw(z.body.pose.yaw);
    return std::abs(dot(d, ax)) <= z.size.x / 2 && std::abs(dot(d, az)) <= z.size.z / 2;
  }

  static bool fence_hit(double arena, const Vec3& o, const Vec3& d, double& t, Vec3& n) {
    t = std::numeric_limits<double>::max();
    auto consider = [&](double tc, Vec3 nc) {
      if (tc > 0.0 && tc < t) {
        t = tc;
        n = nc;
      }
    };
    if (d.x > 0) consider((arena - o.x) / d.x, {-1, 0, 0});
    if (d.x < 0) consider(-o.x / d.x, {1, 0, 0});
    if (d.z > 0) consider((arena - o.z) / d.z, {0, 0, -1});
    if (d.z < 0) consider(-o.z / d.z, {0, 0, 1});
    return t < std::numeric_limits<double>::max();
  }

  Color surface(const physics::RayHit& h, const Vec3& o, const Vec3& d) const {
    const Entity* e = world_.find(h.entity_id);
    if (!e) return to_color(kFenceColor);
    Color base = to_color(e->color);
    if (e->sign && std::abs(dot(h.normal, forward_from_yaw(e->body.pose.yaw))) > 0.7)
      base = sign_texel(*e, o + d * h.distance);
    return scale(base, lambert(h.normal));
  }

  static Color sign_texel(const Entity& e, const Vec3& p) {
    const auto* grid = std::get_if<PixelGrid>(&e.sign->content);
    const Vec3 rel = p - e.body.pose.position;
    const double u = dot(rel, right_from_yaw(e.body.pose.yaw)) / e.size.x + 0.5;
    const double v = 1.0 - rel.y / e.size.y;
    if (!grid) {
      // Preset symbols draw as a centred block of the symbol colour.
      const bool in = std::abs(u - 0.5) < 0.3 && std::abs(v - 0.5) < 0.3;
      return to_color(in ? e.sign->symbol_color : e.color);
    }
    const int col = std::clamp(static_cast<int>(u * grid->cols), 0, grid->cols - 1);
    const int row = std::clamp(static_cast<int>(v * grid->rows), 0, grid->rows - 1);
    return to_color(grid->cells[static_cast<std::size_t>(row * grid->cols + col)].color);
  }

  const WorldState& world_;
  std::vector<physics::RayTarget> targets_;
  std::vector<const Entity*> zones_;
  std::optional<physics::RayScene> scene_;
  bool any_transparent_ = false;
  mutable std::vector<physics::RayHit> hits_;
};

}  // namespace

std::vector<double> ray_offsets(int rays, double fov_degrees) {
  if (rays < 1 || rays % 2 == 0) throw ObservationError("ray count must be odd and positive");
  if (!(fov_degrees > 0.0) || fov_degrees > 360.0) throw ObservationError("ray fov must be in (0, 360]");
  std::vector<double> out(static_cast<std::size_t>(rays), 0.0);
  if (rays == 1) return out;
  const double spacing = fov_degrees / (rays - 1);
  const int half = rays / 2;
  for (int i = 0; i < rays; ++i) out[static_cast<std::size_t>(i)] = (i - half) * spacing;
  return out;
}

std::vector<double> raycast_observation(const WorldState& world, int rays, double fov_degrees, bool lights_on) {
  const auto offsets = ray_offsets(rays, fov_degrees);
  std::vector<double> out(static_cast<std::size_t>(kRayCategoryCount * rays), 0.0);
  if (!lights_on) return out;
  const auto targets = ray_targets(world);
  const physics::RayScene scene(targets, world.params.arena_size, world.params);
  const Entity& agent = world.agent();
  const Vec3 origin = agent_eye(world, kRayHeight);
  for (int i = 0; i < rays; ++i) {
    const Vec3 dir = forward_from_yaw(agent.body.pose.yaw + offsets[static_cast<std::size_t>(i)]);
    auto hit = scene.nearest(origin, dir, kRayMaxRange, agent.id);
    if (!hit) continue;
    const double v = std::clamp(1.0 - hit->distance / kRayMaxRange, 0.0, 1.0);
    out[static_cast<std::size_t>(hit->category * rays + i)] = v;
  }
  return out;
}

std::uint8_t luma(int r, int g, int b) { return to_byte(0.299 * r + 0.587 * g + 0.114 * b); }

Image camera_observation(const WorldState& world, int k, bool grayscale, bool lights_on) {
  if (k < kMinCameraSize || k > kMaxCameraSize)
    throw ObservationError("camera resolution must be in [" + std::to_string(kMinCameraSize) + ", " +
                           std::to_string(kMaxCameraSize) + "]");
  Image img;
  img.width = img.height = k;
  img.channels = grayscale ? 1 : 3;
  img.pixels.assign(static_cast<std::size_t>(k) * k * img.channels, 0);
  if (!lights_on) return img;

  const CameraScene scene(world);
  const Entity& agent = world.agent();
  const Vec3 eye = agent_eye(world, kEyeHeight);
  const Vec3 fwd = forward_from_yaw(agent.body.pose.yaw);
  const Vec3 right = right_from_yaw(agent.body.pose.yaw);
  const Vec3 up{0, 1, 0};
  const double half = std::tan(deg_to_rad(kCameraFovDegrees / 2));
  std::size_t idx = 0;
  for (int row = 0; row < k; ++row) {
    const double v = (1.0 - 2.0 * (row + 0.5) / k) * half;
    for (int col = 0; col < k; ++col) {
      const double u = (2.0 * (col + 0.5) / k - 1.0) * half;
      const Vec3 dir = normalized(fwd + right * u + up * v);
      const Color c = scene.shade(eye, dir);
      const std::uint8_t r = to_byte(c.r), g = to_byte(c.g), b = to_byte(c.b);
      if (grayscale) {
        img.pixels[idx++] = luma(r, g, b);
      } else {
        img.pixels[idx++] = r;
        img.pixels[idx++] = g;
        img.pixels[idx++] = b;
      }
    }
  }
  return img;
}

std::array<double, 7> vector_observation(const WorldState& world, double health) {
  const Entity& a = world.agent();
  const Vec3& v = a.body.velocity;
  const Vec3& p = a.body.pose.position;
  return {health, v.x, v.y, v.z, p.x, p.y, p.z};
}

std::vector<ViewColumn> view_columns(const WorldState& world, int columns, double fov_degrees) {
  if (columns < 1 || columns > 4096) throw ObservationError("view columns must be in [1, 4096]");
  if (!(fov_degrees > 0.0) || fov_degrees >= 180.0) throw ObservationError("view fov must be in (0, 180)");
  const auto targets = ray_targets(world);
  const physics::RayScene scene(targets, world.params.arena_size, world.params);
  const Entity& agent = world.agent();
  const Vec3 origin = agent_eye(world, kRayHeight);
  const Vec3 fwd = forward_from_yaw(agent.body.pose.yaw);
  const Vec3 right = right_from_yaw(agent.body.pose.yaw);
  const double half = std::tan(deg_to_rad(fov_degrees / 2));
  std::vector<ViewColumn> out(static_cast<std::size_t>(columns));
  for (int i = 0; i < columns; ++i) {
    const double u = (2.0 * (i + 0.5) / columns - 1.0) * half;
    const Vec3 dir = normalized(fwd + right * u);
    auto hit = scene.nearest(origin, dir, kRayMaxRange, agent.id);
    ViewColumn& c = out[static_cast<std::size_t>(i)];
    if (!hit) continue;
    c.hit = true;
    c.distance = hit->distance * dot(dir, fwd);  // perpendicular distance, no fisheye
    c.category = hit->category;
    const Entity* e = world.find(hit->entity_id);
    c.color = e ? e->color : kFenceColor;
  }
  return out;
}

void write_png(const Image& image, const std::string& path, const std::vector<std::pair<std::string, std::string>>& text) {
  std::unique_ptr<FILE, int (*)(FILE*)> fp(std::fopen(path.c_str(), "wb"), &std::fclose);
  if (!fp) throw std::runtime_error("cannot open '" + path + "' for writing");
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw std::runtime_error("png_create_write_struct failed");
  png_infop info = png_create_info_struct(png);
  if (!info || setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, info ? &info : nullptr);
    throw std::runtime_error("failed writing png '" + path + "'");
  }
  png_init_io(png, fp.get());
  png_set_IHDR(png, info, static_cast<png_uint_32>(image.width), static_cast<png_uint_32>(image.height), 8,
               image.channels == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  std::vector<png_text> chunks(text.size());
  for (std::size_t i = 0; i < text.size(); ++i) {
    chunks[i].compression = PNG_TEXT_COMPRESSION_NONE;
    chunks[i].key = const_cast<char*>(text[i].first.c_str());
    chunks[i].text = const_cast<char*>(text[i].second.c_str());
  }
  if (!chunks.empty()) png_set_text(png, info, chunks.data(), static_cast<int>(chunks.size()));
  png_write_info(png, info);
  const std::size_t stride = static_cast<std::size_t>(image.width) * image.channels;
  for (int row = 0; row < image.height; ++row)
    png_write_row(png, const_cast<png_bytep>(image.pixels.data() + stride * row));
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

}  // namespace arena
