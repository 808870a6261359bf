#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace arena::procgen {

/// Template directives sit in value positions of an otherwise ordinary
/// config, always in flow form:
///
///   !Choice [a, b, c]             one of the listed values
///   !RandomColor                  a uniformly random !RGB colour
///   !RandomRange [lo, hi]         uniform in [lo, hi]; integer if both bounds are
///   !Label [name, <directive>]    records the inner directive's value under name
///   !If [name, match, then, else] then if label name resolved to match, else else
///
/// Values are copied verbatim, so they may be tagged (!Vector3 {...}) or nested flows.
enum class DirectiveKind { Choice, RandomColor, RandomRange, Label, If };

std::string_view directive_kind_name(DirectiveKind k);

struct Directive {
  DirectiveKind kind = DirectiveKind::Choice;
  std::size_t begin = 0;  // byte span in the template text
  std::size_t end = 0;
  int line = 0;  // 1-based
  int column = 0;
  std::vector<std::string> values;  // Choice options, RandomRange bounds, If [match, then, else]
  std::string label;                // Label name, or the label an If reads
  DirectiveKind inner = DirectiveKind::Choice;  // for Label: the wrapped directive

  /// Choice, or a Label around a Choice.
  bool finite() const;
  /// Number of outcomes for finite directives.
  std::size_t cardinality() const;
  /// Manifest name: the label, or "<Kind>@<line>:<column>".
  std::string name() const;
};

class ProcgenError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Finds every directive in document order. Throws ProcgenError on malformed
/// directives, empty choices, or If directives naming an undeclared label.
std::vector<Directive> scan_template(std::string_view text);

struct Exhaustive {};
struct Sample {
  int count = 1;
  std::uint64_t seed = 0;
};
using ExpansionMode = std::variant<Exhaustive, Sample>;

struct Chosen {
  std::string directive;
  std::string value;
};

struct GeneratedConfig {
  std::string text;
  std::vector<Chosen> choices;  // one per directive, document order
  std::uint64_t seed = 0;
};

/// Exhaustive: the Cartesian product of all Choice outcomes, last directive
/// varying fastest. Sample: `count` independent draws, draw i seeded from
/// (seed, i). Every output is parsed and validated; an invalid one throws
/// ProcgenError naming the output and the first diagnostic.
std::vector<GeneratedConfig> expand_template(std::string_view text, const ExpansionMode& mode);

/// Number of outputs exhaustive mode would produce.
std::size_t exhaustive_count(std::string_view text);

struct BatteryManifest {
  std::vector<std::string> files;
  std::string csv;  // header file,directive,value,seed
};

/// Writes <stem>_<index>.yml (zero padded, at least 3 digits) and manifest.csv.
/// Throws ProcgenError on an empty battery (nothing written) or I/O failure.
BatteryManifest write_battery(const std::vector<GeneratedConfig>& configs, const std::filesystem::path& out_dir,
                              const std::string& stem);

}  // namespace arena::procgen
