#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include <json.hpp>

#include "f2p/common/train_config.hpp"
#include "f2p/search/search.hpp"

namespace f2p {

/// Every tunable of the pipeline. Sources apply in order: defaults, then a
/// key=value file, then command-line overrides.
struct PipelineConfig {
  std::size_t data_n = 2000;
  std::uint64_t data_seed = 7;

  TrainConfig imitator;
  TrainConfig recognizer;
  std::size_t identities = 200;
  std::size_t views = 20;
  std::uint64_t corpus_seed = 11;
  TrainConfig segmenter;
  search::SearchConfig search;

  PipelineConfig();

  /// Throws "unknown config key 'k'" or "invalid value for 'k'".
  void set(const std::string& key, const std::string& value);
  /// Lines of key=value; '#' starts a comment; blank lines ignored.
  void apply_text(const std::string& text);
  void apply_file(const std::filesystem::path& path);
  void validate() const;

  nlohmann::json json() const;
};

}  // namespace f2p
