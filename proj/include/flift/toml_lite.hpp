#pragma once

#include <nlohmann/json.hpp>

#include <string>

namespace flift {

/// Minimal TOML reader covering the config schema: [table] and
/// [nested.table] headers, key = value pairs with strings, integers,
/// floats (inf accepted), booleans, and (nested) arrays, plus # comments.
/// Produces a JSON document with identical structure, so TOML and JSON
/// configs share one validation path. Unsupported TOML constructs
/// (inline tables, multiline strings, dates) are rejected with an error.
nlohmann::json parse_toml_lite(const std::string& text);

} // namespace flift
