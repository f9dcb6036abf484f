#include "f2p/cli/checkpoint.hpp"

#include <zlib.h>

#include <bit>
#include <cstring>
#include <set>

#include "f2p/renderer/image_io.hpp"

namespace f2p {

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

namespace {

constexpr char kMagic[4] = {'F', '2', 'P', 'C'};

template <typename U>
void put(std::string& out, U value) {
  char buf[sizeof(U)];
  std::memcpy(buf, &value, sizeof(U));
  out.append(buf, sizeof(U));
}

std::uint32_t crc_of(const char* data, std::size_t size) {
  return static_cast<std::uint32_t>(crc32(0L, reinterpret_cast<const Bytef*>(data), static_cast<uInt>(size)));
}

class Reader {
 public:
  Reader(const std::string& bytes, std::size_t end) : bytes_(bytes), end_(end) {}

  template <typename U>
  U get() {
    need(sizeof(U));
    U value;
    std::memcpy(&value, bytes_.data() + pos_, sizeof(U));
    pos_ += sizeof(U);
    return value;
  }

  std::string text(std::size_t n) {
    need(n);
    std::string s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }

  void floats(std::vector<float>& out, std::size_t n) {
    if (n > (end_ - pos_) / sizeof(float)) throw Error("corrupt checkpoint: payload exceeds file");
    out.resize(n);
    std::memcpy(out.data(), bytes_.data() + pos_, n * sizeof(float));
    pos_ += n * sizeof(float);
  }

  bool done() const { return pos_ == end_; }

 private:
  void need(std::size_t n) const {
    if (end_ - pos_ < n) throw Error("corrupt checkpoint: unexpected end of data");
  }

  const std::string& bytes_;
  std::size_t end_, pos_ = 0;
};

}  // namespace

std::string encode_checkpoint(const ad::StateList<float>& state) {
  std::string out(kMagic, 4);
  put<std::uint32_t>(out, kCheckpointVersion);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(state.size()));
  std::set<std::string> seen;
  for (const auto& entry : state) {
    if (!seen.insert(entry.name).second) throw Error("duplicate tensor name '" + entry.name + "'");
    put<std::uint16_t>(out, static_cast<std::uint16_t>(entry.name.size()));
    out += entry.name;
    const auto& shape = entry.tensor.shape();
    put<std::uint8_t>(out, static_cast<std::uint8_t>(shape.size()));
    for (auto d : shape) put<std::uint32_t>(out, static_cast<std::uint32_t>(d));
    const auto data = entry.tensor.data();
    out.append(reinterpret_cast<const char*>(data.data()), data.size() * sizeof(float));
  }
  put<std::uint32_t>(out, crc_of(out.data(), out.size()));
  return out;
}

std::vector<CheckpointTensor> decode_checkpoint(const std::string& bytes) {
  if (bytes.size() < 12 || std::memcmp(bytes.data(), kMagic, 4) != 0) throw Error("incompatible checkpoint");
  std::uint32_t version;
  std::memcpy(&version, bytes.data() + 4, 4);
  if (version != kCheckpointVersion) throw Error("incompatible checkpoint");
  if (bytes.size() < 16) throw Error("corrupt checkpoint: truncated");
  const std::size_t body = bytes.size() - 4;
  std::uint32_t stored;
  std::memcpy(&stored, bytes.data() + body, 4);
  if (stored != crc_of(bytes.data(), body)) throw Error("corrupt checkpoint: CRC mismatch");

  Reader in(bytes, body);
  in.text(8);
  const auto count = in.get<std::uint32_t>();
  std::vector<CheckpointTensor> tensors;
  std::set<std::string> seen;
  for (std::uint32_t i = 0; i < count; ++i) {
    CheckpointTensor t;
    t.name = in.text(in.get<std::uint16_t>());
    if (!seen.insert(t.name).second) throw Error("corrupt checkpoint: duplicate tensor '" + t.name + "'");
    const auto rank = in.get<std::uint8_t>();
    std::size_t n = 1;
    for (std::uint8_t r = 0; r < rank; ++r) {
      t.shape.push_back(in.get<std::uint32_t>());
      n *= t.shape.back();
    }
    in.floats(t.values, n);
    tensors.push_back(std::move(t));
  }
  if (!in.done()) throw Error("corrupt checkpoint: trailing bytes");
  return tensors;
}

void assign_checkpoint(const std::vector<CheckpointTensor>& tensors, const ad::StateList<float>& state) {
  for (std::size_t i = 0; i < state.size(); ++i) {
    if (i >= tensors.size() || tensors[i].name != state[i].name || tensors[i].shape != state[i].tensor.shape())
      throw Error("checkpoint mismatch at tensor '" + state[i].name + "'");
  }
  if (tensors.size() != state.size())
    throw Error("checkpoint mismatch at tensor '" + tensors[state.size()].name + "'");
  for (std::size_t i = 0; i < state.size(); ++i) {
    auto t = state[i].tensor;
    std::copy(tensors[i].values.begin(), tensors[i].values.end(), t.data().begin());
  }
}

void save_checkpoint(const std::filesystem::path& path, const ad::StateList<float>& state) {
  render::write_file(path, encode_checkpoint(state));
}

std::vector<CheckpointTensor> read_checkpoint(const std::filesystem::path& path) {
  try {
    return decode_checkpoint(render::read_file(path));
  } catch (const Error& e) {
    throw Error(path.string() + ": " + e.what());
  }
}

void load_checkpoint(const std::filesystem::path& path, const ad::StateList<float>& state) {
  const auto tensors = read_checkpoint(path);
  try {
    assign_checkpoint(tensors, state);
  } catch (const Error& e) {
    throw Error(path.string() + ": " + e.what());
  }
}

}  // namespace f2p
