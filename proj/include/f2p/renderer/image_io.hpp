#pragma once

#include <filesystem>
#include <string>

#include "f2p/renderer/image.hpp"

namespace f2p::render {

/// Binary P6 with maxval 255; values are rounded to the nearest level.
std::string encode_ppm(const Image& img);
Image decode_ppm(const std::string& bytes);

/// Binary P5 with maxval 255 carrying class indices as gray values.
std::string encode_pgm(const LabelMap& labels);
LabelMap decode_pgm(const std::string& bytes);

void write_ppm(const std::filesystem::path& path, const Image& img);
Image read_ppm(const std::filesystem::path& path);
void write_pgm(const std::filesystem::path& path, const LabelMap& labels);
LabelMap read_pgm(const std::filesystem::path& path);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& bytes);

}  // namespace f2p::render
