#include "f2p/cli/config.hpp"

#include <charconv>
#include <functional>
#include <map>
#include <sstream>

#include "f2p/renderer/image_io.hpp"

namespace f2p {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

template <typename T>
bool parse_number(const std::string& text, T& out) {
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, out);
  return ec == std::errc() && ptr == end;
}

bool parse_bool(const std::string& text, bool& out) {
  if (text == "true" || text == "1") return out = true, true;
  if (text == "false" || text == "0") return out = false, true;
  return false;
}

using Setter = std::function<bool(PipelineConfig&, const std::string&)>;

template <typename T, typename Field>
Setter number(Field field) {
  return [field](PipelineConfig& c, const std::string& v) { return parse_number<T>(v, field(c)); };
}

void add_train_keys(std::map<std::string, Setter>& keys, const std::string& prefix,
                    TrainConfig PipelineConfig::*member) {
  keys[prefix + ".epochs"] = number<std::size_t>([member](PipelineConfig& c) -> auto& { return (c.*member).epochs; });
  keys[prefix + ".batch_size"] =
      number<std::size_t>([member](PipelineConfig& c) -> auto& { return (c.*member).batch_size; });
  keys[prefix + ".learning_rate"] =
      number<double>([member](PipelineConfig& c) -> auto& { return (c.*member).learning_rate; });
  keys[prefix + ".momentum"] = number<double>([member](PipelineConfig& c) -> auto& { return (c.*member).momentum; });
  keys[prefix + ".lr_decay"] = number<double>([member](PipelineConfig& c) -> auto& { return (c.*member).lr_decay; });
  keys[prefix + ".decay_every"] =
      number<std::size_t>([member](PipelineConfig& c) -> auto& { return (c.*member).decay_every; });
  keys[prefix + ".seed"] = number<std::uint64_t>([member](PipelineConfig& c) -> auto& { return (c.*member).seed; });
}

const std::map<std::string, Setter>& setters() {
  static const auto table = [] {
    std::map<std::string, Setter> keys;
    keys["data.n"] = number<std::size_t>([](PipelineConfig& c) -> auto& { return c.data_n; });
    keys["data.seed"] = number<std::uint64_t>([](PipelineConfig& c) -> auto& { return c.data_seed; });
    add_train_keys(keys, "imitator", &PipelineConfig::imitator);
    add_train_keys(keys, "recognizer", &PipelineConfig::recognizer);
    add_train_keys(keys, "segmenter", &PipelineConfig::segmenter);
    keys["recognizer.identities"] = number<std::size_t>([](PipelineConfig& c) -> auto& { return c.identities; });
    keys["recognizer.views"] = number<std::size_t>([](PipelineConfig& c) -> auto& { return c.views; });
    keys["recognizer.corpus_seed"] = number<std::uint64_t>([](PipelineConfig& c) -> auto& { return c.corpus_seed; });
    keys["search.alpha"] = number<double>([](PipelineConfig& c) -> auto& { return c.search.alpha; });
    keys["search.beta"] = number<double>([](PipelineConfig& c) -> auto& { return c.search.beta; });
    keys["search.max_iters"] = number<std::size_t>([](PipelineConfig& c) -> auto& { return c.search.max_iters; });
    keys["search.learning_rate"] = number<double>([](PipelineConfig& c) -> auto& { return c.search.learning_rate; });
    keys["search.lr_scale"] = number<double>([](PipelineConfig& c) -> auto& { return c.search.lr_scale; });
    keys["search.lr_decay"] = number<double>([](PipelineConfig& c) -> auto& { return c.search.lr_decay; });
    keys["search.decay_every"] = number<std::size_t>([](PipelineConfig& c) -> auto& { return c.search.decay_every; });
    keys["search.use_identity"] = [](PipelineConfig& c, const std::string& v) {
      return parse_bool(v, c.search.use_identity);
    };
    keys["search.use_content"] = [](PipelineConfig& c, const std::string& v) {
      return parse_bool(v, c.search.use_content);
    };
    return keys;
  }();
  return table;
}

nlohmann::json train_json(const TrainConfig& t) {
  return {{"epochs", t.epochs},     {"batch_size", t.batch_size}, {"learning_rate", t.learning_rate},
          {"momentum", t.momentum}, {"lr_decay", t.lr_decay},     {"decay_every", t.decay_every},
          {"seed", t.seed}};
}

}  // namespace

PipelineConfig::PipelineConfig() {
  imitator.epochs = 200;
  recognizer.epochs = 30;
  segmenter.epochs = 30;
  segmenter.learning_rate = 0.001;
}

void PipelineConfig::set(const std::string& key, const std::string& value) {
  const auto it = setters().find(key);
  if (it == setters().end()) throw Error("unknown config key '" + key + "'");
  if (!it->second(*this, trim(value))) throw Error("invalid value for '" + key + "': '" + value + "'");
}

void PipelineConfig::apply_text(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  for (std::size_t number = 1; std::getline(in, line); ++number) {
    line = trim(line.substr(0, line.find('#')));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw Error("config line " + std::to_string(number) + ": expected key=value");
    set(trim(line.substr(0, eq)), line.substr(eq + 1));
  }
}

void PipelineConfig::apply_file(const std::filesystem::path& path) {
  try {
    apply_text(render::read_file(path));
  } catch (const Error& e) {
    throw Error(path.string() + ": " + e.what());
  }
}

void PipelineConfig::validate() const {
  if (data_n == 0) throw Error("n must be positive");
  imitator.validate();
  recognizer.validate();
  segmenter.validate();
  if (identities < 2) throw Error("recognizer.identities must be at least 2");
  if (views < 4) throw Error("recognizer.views must be at least 4");
  search.validate();
}

nlohmann::json PipelineConfig::json() const {
  return {{"data", {{"n", data_n}, {"seed", data_seed}}},
          {"imitator", train_json(imitator)},
          {"recognizer", [&] {
             auto j = train_json(recognizer);
             j["identities"] = identities;
             j["views"] = views;
             j["corpus_seed"] = corpus_seed;
             return j;
           }()},
          {"segmenter", train_json(segmenter)},
          {"search",
           {{"alpha", search.alpha},
            {"beta", search.beta},
            {"max_iters", search.max_iters},
            {"learning_rate", search.learning_rate},
            {"lr_scale", search.lr_scale},
            {"lr_decay", search.lr_decay},
            {"decay_every", search.decay_every},
            {"use_identity", search.use_identity},
            {"use_content", search.use_content}}}};
}

}  // namespace f2p
