#pragma once

#include <cmath>

namespace arena {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kArenaSize = 40.0;

/// Arena-space vector. y is the vertical axis.
struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  constexpr Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  constexpr Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  constexpr Vec3 operator-() const { return {-x, -y, -z}; }
  constexpr Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  constexpr Vec3 operator/(double s) const { return {x / s, y / s, z / s}; }
  constexpr Vec3& operator+=(const Vec3& o) {
    x += o.x;
    y += o.y;
    z += o.z;
    return *this;
  }
  constexpr Vec3& operator-=(const Vec3& o) {
    x -= o.x;
    y -= o.y;
    z -= o.z;
    return *this;
  }
  constexpr bool operator==(const Vec3&) const = default;
};

constexpr Vec3 operator*(double s, const Vec3& v) { return v * s; }
constexpr double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
constexpr Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
inline double length(const Vec3& v) { return std::sqrt(dot(v, v)); }
inline double horizontal_length(const Vec3& v) { return std::sqrt(v.x * v.x + v.z * v.z); }
inline Vec3 normalized(const Vec3& v) {
  const double len = length(v);
  return len > 0.0 ? v / len : Vec3{};
}
inline bool is_finite(const Vec3& v) {
  return std::isfinite(v.x) && std::isfinite(v.y) && std::isfinite(v.z);
}

inline double deg_to_rad(double deg) { return deg * kPi / 180.0; }

/// Wraps any finite angle into [0, 360).
inline double normalize_yaw(double deg) {
  double r = std::fmod(deg, 360.0);
  if (r < 0.0) r += 360.0;
  if (r >= 360.0) r -= 360.0;
  return r;
}

// Yaw is measured clockwise seen from above: yaw 0 faces +z, yaw 90 faces +x.
inline Vec3 forward_from_yaw(double yaw_deg) {
  const double a = deg_to_rad(yaw_deg);
  return {std::sin(a), 0.0, std::cos(a)};
}
inline Vec3 right_from_yaw(double yaw_deg) {
  const double a = deg_to_rad(yaw_deg);
  return {std::cos(a), 0.0, -std::sin(a)};
}

/// Position is the bottom-centre of an object; yaw in degrees [0, 360).
struct Pose {
  Vec3 position;
  double yaw = 0.0;
  bool operator==(const Pose&) const = default;
};

struct Rgb {
  int r = 0;
  int g = 0;
  int b = 0;
  bool operator==(const Rgb&) const = default;
};

}  // namespace arena
