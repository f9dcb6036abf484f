#include "f2p/renderer/render.hpp"

#include <algorithm>
#include <cmath>

namespace f2p::render {

namespace {

using Rgb = std::array<float, 3>;

constexpr Rgb kBackground{0.78f, 0.83f, 0.90f};
constexpr Rgb kHair{0.20f, 0.13f, 0.08f};
constexpr Rgb kBrow{0.14f, 0.09f, 0.05f};
constexpr Rgb kSclera{0.95f, 0.95f, 0.93f};
constexpr Rgb kIris{0.28f, 0.18f, 0.10f};
constexpr Rgb kLip{0.74f, 0.30f, 0.32f};
constexpr Rgb kMouthInside{0.30f, 0.07f, 0.09f};
constexpr Rgb kSkinLight{0.95f, 0.80f, 0.68f};
constexpr Rgb kSkinDark{0.45f, 0.30f, 0.21f};

float lerp(float lo, float hi, float t) { return lo + (hi - lo) * t; }

Rgb shade(const Rgb& c, float k) { return {c[0] * k, c[1] * k, c[2] * k}; }

enum class Style { straight = 0, arched = 1, angled = 2 };
enum class Mouth { closed = 0, smile = 1, full = 2 };
enum class Hair { short_cut = 0, long_cut = 1, bun = 2, bald = 3 };

struct Paint {
  Rgb color;
  Region region;
};

class Painter {
 public:
  explicit Painter(const FaceLayout& f) : f_(f) {
    brow_top_ = f.brow_v - f.brow_half_th - 0.06f - f.brow_half_len * std::abs(std::sin(f.brow_tilt));
    const float top = f.center_v - f.half_height_up;
    hairline_ = std::min(top + lerp(0.07f, 0.22f, f.hair_len), brow_top_ - 0.02f);
  }

  Paint shade_pixel(float u, float v) const {
    Paint p{kBackground, Region::background};
    const bool face = f_.inside_face(u, v);
    if (back_hair(u, v)) p = {kHair, Region::hair};
    if (neck(u, v)) p = {shade(f_.skin, 0.85f), Region::skin};
    if (face) p = {f_.skin, Region::skin};
    if (face) {
      if (int n = nose(u, v)) p = {shade(f_.skin, n == 2 ? 0.5f : 0.7f), Region::nose};
      if (int m = mouth(u, v)) p = {m == 2 ? kMouthInside : kLip, Region::mouth};
      if (int e = eye(u, v)) p = {e == 2 ? kIris : kSclera, Region::eye};
      if (bangs(u, v)) p = {kHair, Region::hair};
      if (brow(u, v)) p = {kBrow, Region::brow};
    }
    return p;
  }

 private:
  bool back_hair(float u, float v) const {
    const auto style = static_cast<Hair>(f_.hair_style);
    if (style == Hair::bald) return false;
    const float a = f_.half_width + f_.hair_margin, b = f_.half_height_up + f_.hair_margin;
    const float du = u / a, dv = (v - f_.center_v) / b;
    const bool cap = du * du + dv * dv <= 1.0f && v <= f_.center_v;
    switch (style) {
      case Hair::short_cut:
        return cap && v <= f_.center_v + lerp(-0.35f, 0.0f, f_.hair_len);
      case Hair::long_cut: {
        const float bottom = f_.center_v + lerp(0.25f, 0.85f, f_.hair_len);
        const float flare = 1.0f + 0.25f * std::max(0.0f, v - f_.center_v);
        return cap || (v >= f_.center_v && v <= bottom && std::abs(u) <= a * flare);
      }
      case Hair::bun: {
        const float r = lerp(0.10f, 0.17f, f_.hair_len);
        const float bv = f_.center_v - b - 0.5f * r + 0.02f;
        const float bu = u, bd = v - bv;
        return (cap && v <= f_.center_v - 0.25f) || bu * bu + bd * bd <= r * r;
      }
      case Hair::bald:
        break;
    }
    return false;
  }

  bool bangs(float u, float v) const {
    switch (static_cast<Hair>(f_.hair_style)) {
      case Hair::short_cut:
        return v < hairline_;
      case Hair::long_cut:
        return v < std::min(hairline_ + 0.10f * u, brow_top_ - 0.02f);
      case Hair::bun:
        return v < f_.center_v - f_.half_height_up + 0.05f;
      case Hair::bald:
        break;
    }
    return false;
  }

  bool neck(float u, float v) const {
    return v > f_.center_v && std::abs(u) <= 0.42f * f_.half_width * (1.0f + 0.3f * std::max(0.0f, v - 0.8f));
  }

  /// Coordinates relative to a mirrored feature: `along` points away from the
  /// midline, and positive tilt raises the outer end.
  static void local(float u, float v, float cx, float cv, float tilt, float& along, float& across) {
    const float lu = std::abs(u) - cx, lv = v - cv;
    const float c = std::cos(tilt), s = std::sin(tilt);
    along = lu * c - lv * s;
    across = lu * s + lv * c;
  }

  int eye(float u, float v) const {
    float along, across;
    local(u, v, f_.eye_x, f_.eye_v, f_.eye_tilt, along, across);
    const float ea = along / f_.eye_half_w, eb = across / f_.eye_half_h;
    if (ea * ea + eb * eb > 1.0f) return 0;
    const float r = 0.8f * f_.eye_half_h;
    return along * along + across * across <= r * r ? 2 : 1;
  }

  bool brow(float u, float v) const {
    float along, across;
    local(u, v, f_.eye_x, f_.brow_v, f_.brow_tilt, along, across);
    const float t = along / f_.brow_half_len;
    if (t < -1.0f || t > 1.0f) return false;
    float offset = 0.0f, th = f_.brow_half_th;
    switch (static_cast<Style>(f_.brow_style)) {
      case Style::straight:
        break;
      case Style::arched:
        offset = -0.06f * (1.0f - t * t);
        break;
      case Style::angled:
        offset = -0.07f * std::max(0.0f, 1.0f - std::abs(t - 0.3f) / 1.3f);
        th *= 1.0f - 0.45f * std::max(0.0f, t);
        break;
    }
    return std::abs(across - offset) <= th;
  }

  /// 0 outside, 1 bridge/bulb, 2 nostril.
  int nose(float u, float v) const {
    const float apex = f_.nose_tip - f_.nose_len;
    const float nu = std::abs(u) - 0.5f * f_.nose_half_w, nv = v - (f_.nose_tip - 0.005f);
    if ((nu * nu) / (0.03f * 0.03f) + (nv * nv) / (0.017f * 0.017f) <= 1.0f) return 2;
    if (v >= apex && v <= f_.nose_tip && std::abs(u) <= f_.nose_half_w * (0.35f + 0.65f * (v - apex) / f_.nose_len))
      return 1;
    const float bu = u / (0.9f * f_.nose_half_w), bv = (v - f_.nose_tip + 0.01f) / 0.04f;
    return bu * bu + bv * bv <= 1.0f ? 1 : 0;
  }

  /// 0 outside, 1 lip, 2 mouth interior.
  int mouth(float u, float v) const {
    const float t = u / f_.mouth_half_w;
    if (t < -1.0f || t > 1.0f) return 0;
    const float body = 1.0f - t * t;
    const float mid = f_.mouth_v - f_.curve * t * t;
    const float d = v - mid;
    switch (static_cast<Mouth>(f_.mouth_style)) {
      case Mouth::closed: {
        const float h = f_.lip * (0.4f + 0.6f * body);
        if (std::abs(d) > h) return 0;
        return std::abs(d) <= 0.012f ? 2 : 1;
      }
      case Mouth::smile: {
        const float up = f_.lip * (0.4f + 0.6f * body), down = f_.lip * (0.6f + 1.6f * body);
        if (d < -up || d > down) return 0;
        return d >= 0.0f && d <= f_.lip * 1.1f * body ? 2 : 1;
      }
      case Mouth::full: {
        const float shape = 0.4f + 0.6f * body;
        if (d < -1.5f * f_.lip * shape || d > 2.0f * f_.lip * shape) return 0;
        return std::abs(d) <= 0.015f ? 2 : 1;
      }
    }
    return 0;
  }

  const FaceLayout& f_;
  float brow_top_, hairline_;
};

}  // namespace

FaceLayout FaceLayout::from(const ParamVector& p) {
  FaceLayout f{};
  f.center_v = 0.12f;
  f.half_width = lerp(0.46f, 0.64f, p[param::face_width]);
  f.half_height_up = lerp(0.60f, 0.76f, p[param::face_height]);
  f.half_height_down = f.half_height_up * lerp(0.88f, 1.12f, p[param::chin_length]);
  f.exponent = lerp(3.4f, 1.8f, p[param::face_roundness]);
  f.jaw = lerp(0.55f, 1.0f, p[param::jaw_width]);

  f.eye_x = lerp(0.19f, 0.32f, p[param::eye_spacing]);
  f.eye_v = lerp(-0.16f, 0.06f, p[param::eye_y]);
  f.eye_half_w = lerp(0.09f, 0.16f, p[param::eye_width]);
  f.eye_half_h = lerp(0.045f, 0.095f, p[param::eye_height]);
  f.eye_tilt = lerp(-0.3f, 0.3f, p[param::eye_tilt]);

  f.brow_v = f.eye_v - lerp(0.26f, 0.15f, p[param::brow_y]);
  f.brow_half_len = lerp(0.08f, 0.17f, p[param::brow_length]);
  f.brow_half_th = lerp(0.018f, 0.045f, p[param::brow_thickness]);
  f.brow_tilt = lerp(-0.35f, 0.35f, p[param::brow_tilt]);
  f.brow_style = p.selected(group::brow_style);

  f.nose_tip = lerp(0.14f, 0.32f, p[param::nose_y]);
  f.nose_len = lerp(0.14f, 0.28f, p[param::nose_length]);
  f.nose_half_w = lerp(0.09f, 0.17f, p[param::nose_width]);

  f.mouth_v = lerp(0.38f, 0.56f, p[param::mouth_y]);
  f.mouth_half_w = lerp(0.12f, 0.24f, p[param::mouth_width]);
  f.lip = lerp(0.025f, 0.055f, p[param::lip_thickness]);
  f.curve = lerp(-0.07f, 0.07f, p[param::mouth_curve]);
  f.mouth_style = p.selected(group::mouth_style);

  f.hair_len = p[param::hair_length];
  f.hair_margin = lerp(0.03f, 0.12f, p[param::hair_volume]);
  f.hair_style = p.selected(group::hair_style);

  for (std::size_t c = 0; c < 3; ++c) f.skin[c] = lerp(kSkinLight[c], kSkinDark[c], p[param::skin_tone]);
  return f;
}

bool FaceLayout::inside_face(float u, float v) const {
  const float dv = v - center_v;
  float a = half_width, b = half_height_up;
  if (dv > 0.0f) {
    const float t = std::min(dv / half_height_down, 1.0f);
    a = half_width * (1.0f - (1.0f - jaw) * t * t);
    b = half_height_down;
  }
  return std::pow(std::abs(u) / a, exponent) + std::pow(std::abs(dv) / b, exponent) <= 1.0f;
}

Rendering render(const ParamVector& p) {
  const auto layout = FaceLayout::from(p);
  const Painter painter(layout);
  Rendering out{Image(kImageSize, kImageSize, 3), LabelMap(kImageSize, kImageSize)};
  for (std::size_t y = 0; y < kImageSize; ++y)
    for (std::size_t x = 0; x < kImageSize; ++x) {
      const auto paint = painter.shade_pixel(FaceLayout::coord(x), FaceLayout::coord(y));
      for (std::size_t c = 0; c < 3; ++c)
        out.image.at(y, x, c) = std::round(std::clamp(paint.color[c], 0.0f, 1.0f) * 255.0f) / 255.0f;
      out.labels.at(y, x) = static_cast<std::uint8_t>(paint.region);
    }
  return out;
}

}  // namespace f2p::render
