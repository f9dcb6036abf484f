#include "f2p/search/params_file.hpp"

#include <string>

#include "f2p/renderer/image_io.hpp"

namespace f2p::search {

using nlohmann::json;

json params_to_json(const render::ParamVector& x) {
  const auto final = render::finalize_params(x);
  json continuous = json::object();
  const auto& names = render::ParamSchema::continuous_names();
  for (std::size_t i = 0; i < render::kContinuous; ++i) continuous[std::string(names[i])] = x[i];
  json discrete = json::object();
  for (std::size_t g = 0; g < render::kGroups; ++g) {
    const auto& spec = render::ParamSchema::groups()[g];
    const auto logits = x.group(g), one_hot = final.group(g);
    discrete[std::string(spec.name)] = {{"logits", std::vector<float>(logits.begin(), logits.end())},
                                        {"one_hot", std::vector<float>(one_hot.begin(), one_hot.end())},
                                        {"selected", x.selected(g)}};
  }
  return {{"schema_version", kParamsSchemaVersion},
          {"schema_hash", render::ParamSchema::hash()},
          {"continuous", continuous},
          {"discrete", discrete}};
}

json result_to_json(const SearchResult& result) {
  auto doc = params_to_json(result.x);
  const auto& first = result.trace.front().loss;
  const auto& last = result.trace.back().loss;
  doc["trace"] = {{"iterations", result.trace.size() - 1},
                  {"initial", {{"l1", first.l1}, {"l2", first.l2}, {"ls", first.ls}}},
                  {"final", {{"l1", last.l1}, {"l2", last.l2}, {"ls", last.ls}}},
                  {"status", to_string(result.status)}};
  return doc;
}

namespace {

float unit_value(const json& v, const std::string& what) {
  if (!v.is_number()) throw Error("params: " + what + " must be a number");
  const auto x = v.get<double>();
  if (!(x >= 0.0 && x <= 1.0)) throw Error("params: " + what + " out of [0,1]");
  return static_cast<float>(x);
}

}  // namespace

render::ParamVector params_from_json(const json& doc) {
  if (!doc.is_object()) throw Error("params: expected a JSON object");
  if (!doc.contains("schema_version") || doc["schema_version"] != kParamsSchemaVersion)
    throw Error("params: unsupported schema_version");
  if (!doc.contains("schema_hash") || doc["schema_hash"] != render::ParamSchema::hash())
    throw Error("params: schema hash mismatch (expected " + render::ParamSchema::hash() + ")");
  const auto& continuous = doc.value("continuous", json::object());
  const auto& discrete = doc.value("discrete", json::object());

  render::ParamVector x;
  const auto& names = render::ParamSchema::continuous_names();
  for (std::size_t i = 0; i < render::kContinuous; ++i) {
    const std::string name(names[i]);
    if (!continuous.contains(name)) throw Error("params: missing continuous parameter '" + name + "'");
    x[i] = unit_value(continuous[name], name);
  }
  for (std::size_t g = 0; g < render::kGroups; ++g) {
    const std::string name(render::ParamSchema::groups()[g].name);
    if (!discrete.contains(name) || !discrete[name].contains("logits"))
      throw Error("params: missing discrete group '" + name + "'");
    const auto& logits = discrete[name]["logits"];
    auto block = x.group(g);
    if (!logits.is_array() || logits.size() != block.size())
      throw Error("params: group '" + name + "' needs " + std::to_string(block.size()) + " logits");
    for (std::size_t k = 0; k < block.size(); ++k) block[k] = unit_value(logits[k], name);
  }
  return x;
}

void write_params(const std::filesystem::path& path, const json& doc) {
  render::write_file(path, doc.dump(2) + "\n");
}

render::ParamVector read_params(const std::filesystem::path& path) {
  const auto text = render::read_file(path);
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(path.string() + ": invalid JSON: " + e.what());
  }
  try {
    return params_from_json(doc);
  } catch (const Error& e) {
    throw Error(path.string() + ": " + e.what());
  }
}

}  // namespace f2p::search
