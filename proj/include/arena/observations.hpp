#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "arena/world.hpp"

namespace arena {

/// Longest horizontal line inside the arena: its diagonal.
inline constexpr double kRayMaxRange = 56.568542494923804;
/// Rays leave from the agent's centre.
inline constexpr double kRayHeight = 0.5;

inline constexpr double kEyeHeight = 0.5;
inline constexpr double kCameraFovDegrees = 60.0;
inline constexpr int kMinCameraSize = 4;
inline constexpr int kMaxCameraSize = 512;
inline constexpr double kFenceHeight = 1.0;  // as drawn; the physical fence is unbounded
inline constexpr double kAmbient = 0.35;
inline constexpr double kTransparentAlpha = 0.3;
inline constexpr Rgb kSkyColor{135, 206, 235};
inline constexpr Rgb kFloorColor{186, 160, 122};
inline constexpr Rgb kFenceColor{120, 90, 60};

class ObservationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Yaw offsets (degrees, negative = left) of the r rays, left to right.
/// The centre column looks dead ahead.
std::vector<double> ray_offsets(int rays, double fov_degrees);

/// 8 x r matrix, row-major by category row. Entry = 1 - distance/kRayMaxRange
/// for the nearest hit of each ray, in that hit's category row.
std::vector<double> raycast_observation(const WorldState& world, int rays, double fov_degrees,
                                        bool lights_on = true);

struct Image {
  int width = 0;
  int height = 0;
  int channels = 3;
  std::vector<std::uint8_t> pixels;  // row-major, top row first, channels interleaved

  std::uint8_t at(int row, int col, int channel = 0) const {
    return pixels[(static_cast<std::size_t>(row) * width + col) * channels + channel];
  }
};

/// First-person k x k frame from the agent's eye.
Image camera_observation(const WorldState& world, int k, bool grayscale = false, bool lights_on = true);

/// Rec.601 luma, rounded.
std::uint8_t luma(int r, int g, int b);

/// health, velocity (x,y,z), position (x,y,z).
std::array<double, 7> vector_observation(const WorldState& world, double health);

struct ViewColumn {
  bool hit = false;
  double distance = 0.0;
  Rgb color;
  int category = -1;
};

/// One horizontal ray per screen column, for clients drawing their own
/// first-person view.
std::vector<ViewColumn> view_columns(const WorldState& world, int columns, double fov_degrees = kCameraFovDegrees);

/// Text pairs are stored as uncompressed tEXt chunks.
void write_png(const Image& image, const std::string& path,
               const std::vector<std::pair<std::string, std::string>>& text = {});

}  // namespace arena
