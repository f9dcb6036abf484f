#pragma once

#include <filesystem>

#include <json.hpp>

#include "f2p/renderer/schema.hpp"
#include "f2p/search/search.hpp"

namespace f2p::search {

inline constexpr int kParamsSchemaVersion = 1;

/// {schema_version, schema_hash, continuous{name: value},
///  discrete{group: {logits, one_hot, selected}}, trace?, config?}
nlohmann::json params_to_json(const render::ParamVector& x);

/// Adds a trace summary (iterations, initial/final losses, status) to the
/// parameter file of a finished search.
nlohmann::json result_to_json(const SearchResult& result);

/// Raw values (continuous sliders and discrete logits). Rejects schema hash
/// mismatches, missing names and out-of-range values.
render::ParamVector params_from_json(const nlohmann::json& doc);

void write_params(const std::filesystem::path& path, const nlohmann::json& doc);
render::ParamVector read_params(const std::filesystem::path& path);

}  // namespace f2p::search
