#pragma once
// yaml-cpp backed internals shared by the config parser and the template expander.

#include <yaml-cpp/anchor.h>
#include <yaml-cpp/eventhandler.h>
#include <yaml-cpp/parser.h>
#include <yaml-cpp/yaml.h>

#include <optional>
#include <string_view>

#include "arena/config.hpp"

namespace arena::config::detail {

/// Adds an error for every anchor or alias in the text.
void reject_anchors(std::string_view text, Diagnostics& diags);

/// Converts a loaded document into the typed model. Returns nullopt when an
/// error makes the structure unusable.
std::optional<ArenaConfigFile> convert_document(const YAML::Node& root, Diagnostics& diags);

Diagnostic make_diag(Severity s, const YAML::Mark& mark, std::string path, std::string message);

}  // namespace arena::config::detail
