#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <vector>

#include "f2p/renderer/image.hpp"
#include "f2p/renderer/schema.hpp"

namespace f2p::render {

struct Sample {
  ParamVector params;
  Image image;
  LabelMap labels;
};

struct Dataset {
  std::vector<Sample> samples;
  std::vector<std::size_t> train, validation;
  std::uint64_t seed = 0;
};

/// Continuous values uniform on [0,1]; each group a uniformly chosen one-hot.
ParamVector sample_params(std::mt19937_64& rng);

/// `n` rendered samples, item i drawn from item_seed(seed, i); the first 80%
/// of indices form the training split.
Dataset sample_dataset(std::size_t n, std::uint64_t seed);

struct IdentitySet {
  std::vector<ParamVector> prototypes;
  std::vector<Image> images;
  std::vector<std::int32_t> labels;
  std::size_t views_per_identity = 0;
};

/// `k` prototypes, each rendered `views` times after jittering the continuous
/// block by up to ±jitter and applying photo_shift at a random strength up to
/// `max_strength`. Images are grouped by identity, views consecutive.
IdentitySet sample_identities(std::size_t k, std::size_t views, std::uint64_t seed, float jitter = 0.03f,
                              float max_strength = 0.7f);

/// Directory layout: params.jsonl, img_%06d.ppm, label_%06d.pgm, split.json,
/// manifest.json. Refuses a non-empty directory unless `force`.
void write_dataset(const std::filesystem::path& dir, const Dataset& data, bool force = false);
Dataset read_dataset(const std::filesystem::path& dir);

}  // namespace f2p::render
