#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "arena/entities.hpp"
#include "arena/vec.hpp"

namespace arena::config {

enum class Severity { Error, Warning };

struct Diagnostic {
  Severity severity = Severity::Error;
  int line = 0;    // 1-based; 0 when unknown
  int column = 0;  // 1-based; 0 when unknown
  std::string path;  // e.g. arenas.0.items[3].positions[1]
  std::string message;
};

using Diagnostics = std::vector<Diagnostic>;

bool has_errors(const Diagnostics& d);
/// "file:line:column: error: message (path)"
std::string format_diagnostic(const Diagnostic& d, std::string_view file);

using Scalar = std::variant<double, std::string, Vec3, Rgb>;

struct Attribute {
  std::string key;
  std::vector<Scalar> values;
  int line = 0;  // of the key
  int column = 0;
  std::vector<std::pair<int, int>> value_marks;  // (line, column) per value; empty for built specs
};

struct ItemSpec {
  std::string name;
  std::vector<Attribute> attributes;  // file order
  int line = 0;
  int column = 0;

  const Attribute* find(std::string_view key) const;
  /// Number of instances the item describes.
  std::size_t instance_count() const;
};

struct ArenaSpec {
  double pass_mark = 0.0;
  int t = 0;
  std::vector<int> blackouts;
  std::vector<ItemSpec> items;
  int line = 0;
  int column = 0;
};

struct ArenaConfigFile {
  bool show_notification = false;
  bool can_reset_episode = true;
  bool can_change_perspective = true;
  std::optional<std::string> default_perspective;
  std::map<int, ArenaSpec> arenas;
};

struct ParseResult {
  std::optional<ArenaConfigFile> config;
  Diagnostics diagnostics;
};

ParseResult parse_config(std::string_view text);
Diagnostics validate(const ArenaConfigFile& config);

/// Canonical text form; parse(serialize(c)) is structurally equal to c.
std::string serialize(const ArenaConfigFile& config);

bool structurally_equal(const ArenaConfigFile& a, const ArenaConfigFile& b);

class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& what, Diagnostics d)
      : std::runtime_error(what), diagnostics(std::move(d)) {}
  Diagnostics diagnostics;
};

/// parse_config + validate; throws ConfigError if either reports an error.
ArenaConfigFile load_config(std::string_view text, Diagnostics* warnings = nullptr);
ArenaConfigFile load_config_file(const std::string& path, Diagnostics* warnings = nullptr);

/// Attribute keys an item of this kind accepts.
bool attribute_applies(EntityKind kind, std::string_view key);
/// Every attribute key the DSL knows.
const std::vector<std::string_view>& known_attributes();

std::string format_number(double v);

}  // namespace arena::config
