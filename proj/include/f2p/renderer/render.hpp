#pragma once

#include <array>

#include "f2p/renderer/image.hpp"
#include "f2p/renderer/schema.hpp"

namespace f2p::render {

/// Geometry resolved from a parameter vector, in normalized coordinates:
/// u runs left to right and v top to bottom, both over [-1, 1].
struct FaceLayout {
  // head
  float center_v, half_width, half_height_up, half_height_down, exponent, jaw;
  // eyes (x is the distance of each eye from the midline)
  float eye_x, eye_v, eye_half_w, eye_half_h, eye_tilt;
  // brows
  float brow_v, brow_half_len, brow_half_th, brow_tilt;
  std::size_t brow_style;
  // nose
  float nose_tip, nose_len, nose_half_w;
  // mouth
  float mouth_v, mouth_half_w, lip, curve;
  std::size_t mouth_style;
  // hair
  float hair_len, hair_margin;
  std::size_t hair_style;
  std::array<float, 3> skin;

  static FaceLayout from(const ParamVector& p);

  bool inside_face(float u, float v) const;
  /// Pixel-center coordinate of column/row `i` on a kImageSize grid.
  static float coord(std::size_t i) { return (static_cast<float>(i) + 0.5f) / (kImageSize / 2.0f) - 1.0f; }
};

struct Rendering {
  Image image;
  LabelMap labels;
};

/// Deterministic hard-edged front-view face. Discrete groups are read by
/// argmax; output colors are quantized to the 8-bit grid.
Rendering render(const ParamVector& p);

}  // namespace f2p::render
