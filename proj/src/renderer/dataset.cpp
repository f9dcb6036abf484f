#include "f2p/renderer/dataset.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "f2p/error.hpp"
#include "f2p/renderer/image_io.hpp"
#include "f2p/renderer/photo_shift.hpp"
#include "f2p/renderer/render.hpp"
#include "f2p/renderer/seed.hpp"

namespace f2p::render {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

constexpr int kDatasetFormat = 1;

std::string indexed(const char* pattern, std::size_t i) {
  char buf[64];
  std::snprintf(buf, sizeof buf, pattern, i);
  return buf;
}

}  // namespace

ParamVector sample_params(std::mt19937_64& rng) {
  std::uniform_real_distribution<float> unit(0.0f, 1.0f);
  ParamVector p;
  for (auto& v : p.continuous()) v = unit(rng);
  for (std::size_t g = 0; g < kGroups; ++g) {
    auto block = p.group(g);
    std::uniform_int_distribution<std::size_t> pick(0, block.size() - 1);
    const auto k = pick(rng);
    for (std::size_t i = 0; i < block.size(); ++i) block[i] = i == k ? 1.0f : 0.0f;
  }
  return p;
}

Dataset sample_dataset(std::size_t n, std::uint64_t seed) {
  if (n == 0) throw Error("n must be positive");
  Dataset data;
  data.seed = seed;
  data.samples.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::mt19937_64 rng(item_seed(seed, i));
    auto params = sample_params(rng);
    auto [image, labels] = render(params);
    data.samples.push_back({params, std::move(image), std::move(labels)});
  }
  const std::size_t n_train = n * 4 / 5;
  for (std::size_t i = 0; i < n; ++i) (i < n_train ? data.train : data.validation).push_back(i);
  return data;
}

IdentitySet sample_identities(std::size_t k, std::size_t views, std::uint64_t seed, float jitter,
                              float max_strength) {
  if (k < 2) throw Error("identity corpus needs at least 2 identities");
  IdentitySet set;
  set.views_per_identity = views;
  for (std::size_t id = 0; id < k; ++id) {
    const auto id_seed = item_seed(seed, id);
    std::mt19937_64 rng(id_seed);
    set.prototypes.push_back(sample_params(rng));
    for (std::size_t v = 0; v < views; ++v) {
      std::mt19937_64 vr(item_seed(id_seed, v + 1));
      std::uniform_real_distribution<float> offset(-jitter, jitter), unit(0.0f, 1.0f);
      ParamVector p = set.prototypes.back();
      if (jitter > 0.0f)
        for (auto& x : p.continuous()) x = std::clamp(x + offset(vr), 0.0f, 1.0f);
      const float strength = max_strength * unit(vr);
      set.images.push_back(photo_shift(render(p).image, vr(), strength));
      set.labels.push_back(static_cast<std::int32_t>(id));
    }
  }
  return set;
}

void write_dataset(const fs::path& dir, const Dataset& data, bool force) {
  if (fs::exists(dir) && !fs::is_directory(dir)) throw Error("'" + dir.string() + "' is not a directory");
  if (fs::exists(dir) && !fs::is_empty(dir) && !force)
    throw Error("output directory '" + dir.string() + "' is not empty (use --force)");
  fs::create_directories(dir);

  std::ostringstream params;
  for (std::size_t i = 0; i < data.samples.size(); ++i) {
    const auto& s = data.samples[i];
    params << json(std::vector<float>(s.params.values.begin(), s.params.values.end())).dump() << '\n';
    write_ppm(dir / indexed("img_%06zu.ppm", i), s.image);
    write_pgm(dir / indexed("label_%06zu.pgm", i), s.labels);
  }
  write_file(dir / "params.jsonl", params.str());
  write_file(dir / "split.json", json{{"train", data.train}, {"validation", data.validation}}.dump() + "\n");
  const json manifest{{"format", kDatasetFormat},
                      {"n", data.samples.size()},
                      {"seed", data.seed},
                      {"schema_hash", ParamSchema::hash()},
                      {"image_size", kImageSize},
                      {"classes", kNumClasses}};
  write_file(dir / "manifest.json", manifest.dump(2) + "\n");
}

Dataset read_dataset(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw Error("dataset directory '" + dir.string() + "' does not exist");
  Dataset data;
  json manifest, split;
  try {
    manifest = json::parse(read_file(dir / "manifest.json"));
    split = json::parse(read_file(dir / "split.json"));
  } catch (const json::exception& e) {
    throw Error("dataset '" + dir.string() + "': " + e.what());
  }
  if (manifest.value("schema_hash", std::string{}) != ParamSchema::hash())
    throw Error("dataset '" + dir.string() + "': schema hash mismatch");
  data.seed = manifest.value("seed", std::uint64_t{0});

  std::istringstream lines(read_file(dir / "params.jsonl"));
  std::string line;
  for (std::size_t i = 0; std::getline(lines, line); ++i) {
    if (line.empty()) continue;
    Sample s;
    try {
      const auto values = json::parse(line).get<std::vector<float>>();
      if (values.size() != kDimension) throw Error("expected " + std::to_string(kDimension) + " values");
      std::copy(values.begin(), values.end(), s.params.values.begin());
    } catch (const std::exception& e) {
      throw Error("params.jsonl line " + std::to_string(i + 1) + ": " + e.what());
    }
    s.image = read_ppm(dir / indexed("img_%06zu.ppm", i));
    s.labels = read_pgm(dir / indexed("label_%06zu.pgm", i));
    data.samples.push_back(std::move(s));
  }
  if (data.samples.empty()) throw Error("dataset '" + dir.string() + "' is empty");
  data.train = split.at("train").get<std::vector<std::size_t>>();
  data.validation = split.at("validation").get<std::vector<std::size_t>>();
  for (auto idx : data.train)
    if (idx >= data.samples.size()) throw Error("split.json: index out of range");
  for (auto idx : data.validation)
    if (idx >= data.samples.size()) throw Error("split.json: index out of range");
  return data;
}

}  // namespace f2p::render
