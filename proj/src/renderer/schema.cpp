#include "f2p/renderer/schema.hpp"

#include <zlib.h>

#include <algorithm>
#include <cstdio>

namespace f2p::render {

const std::array<std::string_view, kContinuous>& ParamSchema::continuous_names() {
  static const std::array<std::string_view, kContinuous> names{
      "face_width",  "face_height", "jaw_width",   "chin_length",    "eye_y",
      "eye_spacing", "eye_width",   "eye_height",  "eye_tilt",       "brow_y",
      "brow_length", "brow_thickness", "brow_tilt", "nose_y",        "nose_length",
      "nose_width",  "mouth_y",     "mouth_width", "lip_thickness",  "mouth_curve",
      "hair_length", "hair_volume", "face_roundness", "skin_tone"};
  return names;
}

const std::array<GroupSpec, kGroups>& ParamSchema::groups() {
  static const std::array<GroupSpec, kGroups> specs{
      GroupSpec{"hair_style", 4, 24}, GroupSpec{"brow_style", 3, 28}, GroupSpec{"mouth_style", 3, 31}};
  return specs;
}

std::size_t ParamSchema::find_continuous(std::string_view name) {
  const auto& names = continuous_names();
  return static_cast<std::size_t>(std::find(names.begin(), names.end(), name) - names.begin());
}

std::string ParamSchema::hash() {
  std::string text;
  for (auto name : continuous_names()) text.append(name).append(";");
  for (const auto& g : groups()) text.append(g.name).append(":").append(std::to_string(g.cardinality)).append(";");
  const auto crc = crc32(0L, reinterpret_cast<const Bytef*>(text.data()), static_cast<uInt>(text.size()));
  char buf[16];
  std::snprintf(buf, sizeof buf, "%08lx", static_cast<unsigned long>(crc));
  return buf;
}

std::span<float> ParamVector::group(std::size_t g) {
  const auto& spec = ParamSchema::groups().at(g);
  return std::span<float>(values).subspan(spec.offset, spec.cardinality);
}

std::span<const float> ParamVector::group(std::size_t g) const {
  const auto& spec = ParamSchema::groups().at(g);
  return std::span<const float>(values).subspan(spec.offset, spec.cardinality);
}

std::size_t ParamVector::selected(std::size_t g) const {
  auto block = group(g);
  std::size_t best = 0;
  for (std::size_t i = 1; i < block.size(); ++i)
    if (block[i] > block[best]) best = i;
  return best;
}

bool ParamVector::in_range() const {
  return std::all_of(values.begin(), values.end(), [](float v) { return v >= 0.0f && v <= 1.0f; });
}

ParamVector ParamVector::average_face() {
  ParamVector p;
  std::fill_n(p.values.begin(), kContinuous, 0.5f);
  return p;
}

ParamVector finalize_params(const ParamVector& x) {
  ParamVector out = x;
  for (std::size_t g = 0; g < kGroups; ++g) {
    const auto pick = x.selected(g);
    auto block = out.group(g);
    for (std::size_t i = 0; i < block.size(); ++i) block[i] = i == pick ? 1.0f : 0.0f;
  }
  return out;
}

}  // namespace f2p::render
