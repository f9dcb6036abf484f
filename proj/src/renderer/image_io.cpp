#include "f2p/renderer/image_io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

#include "f2p/error.hpp"

namespace f2p::render {

namespace {

struct Header {
  std::size_t width = 0, height = 0, maxval = 0, data_offset = 0;
};

class HeaderReader {
 public:
  HeaderReader(const std::string& bytes, std::string_view kind) : bytes_(bytes), kind_(kind) {}

  [[noreturn]] void fail(const std::string& what) const {
    throw Error("malformed " + std::string(kind_) + " at byte " + std::to_string(pos_) + ": " + what);
  }

  void skip_space() {
    while (pos_ < bytes_.size()) {
      if (bytes_[pos_] == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else if (std::isspace(static_cast<unsigned char>(bytes_[pos_]))) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  std::size_t number() {
    skip_space();
    if (pos_ >= bytes_.size() || !std::isdigit(static_cast<unsigned char>(bytes_[pos_])))
      fail("expected a decimal number");
    std::size_t value = 0;
    while (pos_ < bytes_.size() && std::isdigit(static_cast<unsigned char>(bytes_[pos_]))) {
      value = value * 10 + static_cast<std::size_t>(bytes_[pos_] - '0');
      if (value > (1u << 24)) fail("number too large");
      ++pos_;
    }
    return value;
  }

  Header parse(std::string_view magic) {
    if (bytes_.compare(0, 2, magic) != 0) fail("expected magic '" + std::string(magic) + "'");
    pos_ = 2;
    Header h;
    h.width = number();
    h.height = number();
    h.maxval = number();
    if (h.width == 0 || h.height == 0) fail("zero dimension");
    if (h.maxval != 255) fail("maxval must be 255");
    if (pos_ >= bytes_.size() || !std::isspace(static_cast<unsigned char>(bytes_[pos_])))
      fail("expected a single whitespace before the raster");
    h.data_offset = ++pos_;
    return h;
  }

  void expect_payload(const Header& h, std::size_t channels) {
    const std::size_t need = h.width * h.height * channels;
    if (bytes_.size() < h.data_offset + need) {
      pos_ = bytes_.size();
      fail("raster truncated, expected " + std::to_string(need) + " bytes");
    }
  }

 private:
  const std::string& bytes_;
  std::string_view kind_;
  std::size_t pos_ = 0;
};

std::uint8_t to_byte(float v) {
  return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0f, 1.0f) * 255.0f));
}

}  // namespace

std::string encode_ppm(const Image& img) {
  if (img.channels != 3) throw Error("encode_ppm: image must have 3 channels");
  std::string out = "P6\n" + std::to_string(img.width) + " " + std::to_string(img.height) + "\n255\n";
  out.reserve(out.size() + img.pixels.size());
  for (float v : img.pixels) out.push_back(static_cast<char>(to_byte(v)));
  return out;
}

Image decode_ppm(const std::string& bytes) {
  HeaderReader reader(bytes, "PPM");
  const auto h = reader.parse("P6");
  reader.expect_payload(h, 3);
  Image img(h.height, h.width, 3);
  for (std::size_t i = 0; i < img.pixels.size(); ++i)
    img.pixels[i] = static_cast<float>(static_cast<unsigned char>(bytes[h.data_offset + i])) / 255.0f;
  return img;
}

std::string encode_pgm(const LabelMap& labels) {
  std::string out = "P5\n" + std::to_string(labels.width) + " " + std::to_string(labels.height) + "\n255\n";
  out.append(labels.classes.begin(), labels.classes.end());
  return out;
}

LabelMap decode_pgm(const std::string& bytes) {
  HeaderReader reader(bytes, "PGM");
  const auto h = reader.parse("P5");
  reader.expect_payload(h, 1);
  LabelMap labels(h.height, h.width);
  for (std::size_t i = 0; i < labels.classes.size(); ++i)
    labels.classes[i] = static_cast<std::uint8_t>(bytes[h.data_offset + i]);
  return labels;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error("write failed for '" + path.string() + "'");
}

void write_ppm(const std::filesystem::path& path, const Image& img) { write_file(path, encode_ppm(img)); }

Image read_ppm(const std::filesystem::path& path) {
  try {
    return decode_ppm(read_file(path));
  } catch (const Error& e) {
    throw Error(path.string() + ": " + e.what());
  }
}

void write_pgm(const std::filesystem::path& path, const LabelMap& labels) { write_file(path, encode_pgm(labels)); }

LabelMap read_pgm(const std::filesystem::path& path) {
  try {
    return decode_pgm(read_file(path));
  } catch (const Error& e) {
    throw Error(path.string() + ": " + e.what());
  }
}

}  // namespace f2p::render
