#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>

namespace f2p::render {

inline constexpr std::size_t kContinuous = 24;
inline constexpr std::size_t kGroups = 3;
inline constexpr std::size_t kDimension = 34;

/// Indices of the continuous sliders inside a flattened parameter vector.
namespace param {
enum : std::size_t {
  face_width,
  face_height,
  jaw_width,
  chin_length,
  eye_y,
  eye_spacing,
  eye_width,
  eye_height,
  eye_tilt,
  brow_y,
  brow_length,
  brow_thickness,
  brow_tilt,
  nose_y,
  nose_length,
  nose_width,
  mouth_y,
  mouth_width,
  lip_thickness,
  mouth_curve,
  hair_length,
  hair_volume,
  face_roundness,
  skin_tone,
};
}  // namespace param

/// Discrete style groups, in schema order.
namespace group {
enum : std::size_t { hair_style, brow_style, mouth_style };
}

struct GroupSpec {
  std::string_view name;
  std::size_t cardinality;
  std::size_t offset;  // position of the first entry in the flattened vector
};

/// The fixed parameter layout: 24 continuous sliders followed by one-hot
/// blocks for hair (short/long/bun/bald), brow (straight/arched/angled) and
/// mouth (closed/smile/full) styles.
struct ParamSchema {
  static const std::array<std::string_view, kContinuous>& continuous_names();
  static const std::array<GroupSpec, kGroups>& groups();
  static constexpr std::size_t dimension() { return kDimension; }
  /// Index of a continuous name, or kContinuous when unknown.
  static std::size_t find_continuous(std::string_view name);
  /// Stable identifier of names and cardinalities (CRC32, hex).
  static std::string hash();
};

/// A point of the searchable parameter space; every entry lies in [0,1].
struct ParamVector {
  std::array<float, kDimension> values{};

  float& operator[](std::size_t i) { return values[i]; }
  float operator[](std::size_t i) const { return values[i]; }

  std::span<float> continuous() { return std::span<float>(values).first(kContinuous); }
  std::span<const float> continuous() const {
    return std::span<const float>(values).first(kContinuous);
  }
  std::span<float> group(std::size_t g);
  std::span<const float> group(std::size_t g) const;

  /// Argmax of a discrete block; ties resolve to the lowest index.
  std::size_t selected(std::size_t g) const;
  bool in_range() const;

  /// Continuous sliders at 0.5 and all discrete entries at 0.
  static ParamVector average_face();

  friend bool operator==(const ParamVector&, const ParamVector&) = default;
};

/// Continuous block unchanged; every discrete block becomes the exact one-hot
/// of its argmax.
ParamVector finalize_params(const ParamVector& x);

}  // namespace f2p::render
