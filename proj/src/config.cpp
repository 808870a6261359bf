#include "arena/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "config_yaml.hpp"

namespace arena::config {

namespace {

enum class ValueType { Number, Integer, String, Vector, Color };

struct AttributeInfo {
  std::string_view key;
  ValueType type;
  bool parallel;  // subject to the broadcast rule
};

const std::vector<AttributeInfo>& attribute_table() {
  static const std::vector<AttributeInfo> table{
      {"positions", ValueType::Vector, true},
      {"rotations", ValueType::Number, true},
      {"sizes", ValueType::Vector, true},
      {"colors", ValueType::Color, true},
      {"skins", ValueType::String, true},
      {"frozenAgentDelays", ValueType::Integer, true},
      {"initialValues", ValueType::Number, true},
      {"finalValues", ValueType::Number, true},
      {"delays", ValueType::Integer, true},
      {"changeRates", ValueType::Number, true},
      {"symbolNames", ValueType::String, true},
      {"spawnCount", ValueType::Integer, true},
      {"timeBetweenSpawns", ValueType::Integer, true},
      {"spawnSize", ValueType::Number, true},
      {"spawnProbability", ValueType::Number, true},
      {"rewardWeights", ValueType::Number, false},
      {"rewardSpawnPos", ValueType::Vector, true},
      {"resetDuration", ValueType::Integer, true},
  };
  return table;
}

const AttributeInfo* attribute_info(std::string_view key) {
  for (const auto& a : attribute_table())
    if (a.key == key) return &a;
  return nullptr;
}

bool is_untagged(const std::string& tag) { return tag.empty() || tag == "?" || tag == "!"; }

std::string item_path(int arena, std::size_t item) {
  return "arenas." + std::to_string(arena) + ".items[" + std::to_string(item) + "]";
}

bool parse_double(const std::string& s, double& out) {
  if (s.empty()) return false;
  std::string_view v = s;
  if (v.front() == '+') v.remove_prefix(1);
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  return res.ec == std::errc() && res.ptr == v.data() + v.size() && std::isfinite(out);
}

bool parse_bool(const std::string& s, bool& out) {
  static const std::set<std::string> yes{"true", "True", "TRUE", "yes", "Yes", "on"};
  static const std::set<std::string> no{"false", "False", "FALSE", "no", "No", "off"};
  if (yes.count(s)) return out = true, true;
  if (no.count(s)) return out = false, true;
  return false;
}

bool is_integral(double v) { return std::floor(v) == v && std::abs(v) < 1e15; }

class Converter {
 public:
  explicit Converter(Diagnostics& d) : diags_(d) {}

  void error(const YAML::Node& n, const std::string& path, const std::string& msg) {
    diags_.push_back(detail::make_diag(Severity::Error, n.Mark(), path, msg));
  }
  void warning(const YAML::Node& n, const std::string& path, const std::string& msg) {
    diags_.push_back(detail::make_diag(Severity::Warning, n.Mark(), path, msg));
  }

  std::optional<double> number(const YAML::Node& n, const std::string& path) {
    double v = 0.0;
    if (!n.IsScalar() || !parse_double(n.Scalar(), v)) {
      error(n, path, "expected a number");
      return std::nullopt;
    }
    return v;
  }

  std::optional<bool> boolean(const YAML::Node& n, const std::string& path) {
    bool v = false;
    if (!n.IsScalar() || !parse_bool(n.Scalar(), v)) {
      error(n, path, "expected true or false");
      return std::nullopt;
    }
    return v;
  }

  std::optional<Scalar> value(const YAML::Node& n, ValueType type, const std::string& path) {
    switch (type) {
      case ValueType::Number:
      case ValueType::Integer: {
        if (!is_untagged(n.Tag())) {
          error(n, path, "unexpected tag " + n.Tag() + " for a number");
          return std::nullopt;
        }
        auto v = number(n, path);
        if (!v) return std::nullopt;
        if (type == ValueType::Integer && !is_integral(*v)) {
          error(n, path, "expected an integer");
          return std::nullopt;
        }
        return Scalar{*v};
      }
      case ValueType::String:
        if (!n.IsScalar()) {
          error(n, path, "expected a string");
          return std::nullopt;
        }
        return Scalar{n.Scalar()};
      case ValueType::Vector:
        return triple(n, path, "!Vector3", {"x", "y", "z"});
      case ValueType::Color:
        return triple(n, path, "!RGB", {"r", "g", "b"});
    }
    return std::nullopt;
  }

  std::optional<Scalar> triple(const YAML::Node& n, const std::string& path, const std::string& tag,
                               std::array<const char*, 3> keys) {
    if (!n.IsMap()) {
      error(n, path, "expected a " + tag + " mapping");
      return std::nullopt;
    }
    if (!is_untagged(n.Tag()) && n.Tag() != tag) {
      error(n, path, "expected tag " + tag + ", found " + n.Tag());
      return std::nullopt;
    }
    double c[3] = {0.0, 0.0, 0.0};
    bool ok = true;
    for (auto it = n.begin(); it != n.end(); ++it) {
      const std::string k = it->first.as<std::string>();
      int idx = -1;
      for (int i = 0; i < 3; ++i)
        if (k == keys[i]) idx = i;
      if (idx < 0) {
        error(it->first, path, "unknown component '" + k + "' in " + tag);
        ok = false;
        continue;
      }
      auto v = number(it->second, path + "." + k);
      if (!v) {
        ok = false;
        continue;
      }
      c[idx] = *v;
    }
    if (!ok) return std::nullopt;
    if (tag == "!RGB") {
      for (double v : c)
        if (!is_integral(v)) {
          error(n, path, "color channels must be integers");
          return std::nullopt;
        }
      return Scalar{Rgb{static_cast<int>(c[0]), static_cast<int>(c[1]), static_cast<int>(c[2])}};
    }
    return Scalar{Vec3{c[0], c[1], c[2]}};
  }

  std::optional<ItemSpec> item(const YAML::Node& n, const std::string& path) {
    if (!n.IsMap()) {
      error(n, path, "expected an !Item mapping");
      return std::nullopt;
    }
    if (n.Tag() != "!Item") {
      if (is_untagged(n.Tag()))
        warning(n, path, "item is missing the !Item tag");
      else {
        error(n, path, "expected tag !Item, found " + n.Tag());
        return std::nullopt;
      }
    }
    ItemSpec spec;
    spec.line = n.Mark().line + 1;
    spec.column = n.Mark().column + 1;
    bool have_name = false;
    bool ok = true;
    for (auto it = n.begin(); it != n.end(); ++it) {
      const std::string key = it->first.as<std::string>();
      const YAML::Node v = it->second;
      const std::string apath = path + "." + key;
      if (key == "name") {
        if (!v.IsScalar()) {
          error(v, apath, "expected an entity name");
          ok = false;
          continue;
        }
        spec.name = v.Scalar();
        if (!kind_from_name(spec.name)) {
          error(v, apath, "unknown entity name '" + spec.name + "'");
          ok = false;
        }
        have_name = true;
        continue;
      }
      const AttributeInfo* info = attribute_info(key);
      if (!info) {
        warning(it->first, apath, "unknown attribute '" + key + "' ignored");
        continue;
      }
      if (spec.find(key)) {
        error(it->first, apath, "duplicate attribute '" + key + "'");
        ok = false;
        continue;
      }
      Attribute attr;
      attr.key = key;
      attr.line = it->first.Mark().line + 1;
      attr.column = it->first.Mark().column + 1;
      if (v.IsSequence()) {
        for (std::size_t i = 0; i < v.size(); ++i) {
          auto s = value(v[i], info->type, apath + "[" + std::to_string(i) + "]");
          if (s) {
            attr.values.push_back(*s);
            attr.value_marks.push_back({v[i].Mark().line + 1, v[i].Mark().column + 1});
          } else
            ok = false;
        }
      } else if (v.IsNull()) {
        // empty attribute: keep as an empty list
      } else {
        auto s = value(v, info->type, apath);
        if (s) {
          attr.values.push_back(*s);
          attr.value_marks.push_back({v.Mark().line + 1, v.Mark().column + 1});
        } else
          ok = false;
      }
      spec.attributes.push_back(std::move(attr));
    }
    if (!have_name) {
      error(n, path, "item has no name");
      ok = false;
    }
    if (!ok) return std::nullopt;
    return spec;
  }

  std::optional<ArenaSpec> arena(const YAML::Node& n, const std::string& path) {
    if (!n.IsMap()) {
      error(n, path, "expected an !Arena mapping");
      return std::nullopt;
    }
    if (n.Tag() != "!Arena") {
      if (is_untagged(n.Tag()))
        warning(n, path, "arena is missing the !Arena tag");
      else {
        error(n, path, "expected tag !Arena, found " + n.Tag());
        return std::nullopt;
      }
    }
    ArenaSpec a;
    a.line = n.Mark().line + 1;
    a.column = n.Mark().column + 1;
    bool ok = true;
    for (auto it = n.begin(); it != n.end(); ++it) {
      const std::string key = it->first.as<std::string>();
      const YAML::Node v = it->second;
      const std::string apath = path + "." + key;
      if (key == "pass_mark") {
        if (auto x = number(v, apath)) a.pass_mark = *x; else ok = false;
      } else if (key == "t") {
        auto x = number(v, apath);
        if (x && is_integral(*x)) {
          a.t = static_cast<int>(*x);
        } else {
          if (x) error(v, apath, "t must be an integer");
          ok = false;
        }
      } else if (key == "blackouts") {
        if (!v.IsSequence()) {
          error(v, apath, "expected a list of step numbers");
          ok = false;
          continue;
        }
        for (std::size_t i = 0; i < v.size(); ++i) {
          auto x = number(v[i], apath + "[" + std::to_string(i) + "]");
          if (x && is_integral(*x))
            a.blackouts.push_back(static_cast<int>(*x));
          else {
            if (x) error(v[i], apath, "blackout entries must be integers");
            ok = false;
          }
        }
      } else if (key == "items") {
        if (v.IsNull()) continue;
        if (!v.IsSequence()) {
          error(v, apath, "expected a list of !Item");
          ok = false;
          continue;
        }
        for (std::size_t i = 0; i < v.size(); ++i) {
          auto item_spec = item(v[i], path + ".items[" + std::to_string(i) + "]");
          if (item_spec)
            a.items.push_back(std::move(*item_spec));
          else
            ok = false;
        }
      } else {
        warning(it->first, apath, "unknown arena attribute '" + key + "' ignored");
      }
    }
    if (!ok) return std::nullopt;
    return a;
  }

  std::optional<ArenaConfigFile> document(const YAML::Node& root) {
    if (!root.IsDefined() || root.IsNull()) {
      diags_.push_back({Severity::Error, 1, 1, "", "empty document"});
      return std::nullopt;
    }
    if (!root.IsMap()) {
      error(root, "", "expected an !ArenaConfig mapping at the top level");
      return std::nullopt;
    }
    if (root.Tag() != "!ArenaConfig") {
      if (is_untagged(root.Tag()))
        warning(root, "", "document is missing the !ArenaConfig tag");
      else {
        error(root, "", "expected tag !ArenaConfig, found " + root.Tag());
        return std::nullopt;
      }
    }
    ArenaConfigFile cfg;
    bool ok = true;
    bool have_arenas = false;
    for (auto it = root.begin(); it != root.end(); ++it) {
      const std::string key = it->first.as<std::string>();
      const YAML::Node v = it->second;
      if (key == "showNotification") {
        if (auto b = boolean(v, key)) cfg.show_notification = *b; else ok = false;
      } else if (key == "canResetEpisode") {
        if (auto b = boolean(v, key)) cfg.can_reset_episode = *b; else ok = false;
      } else if (key == "canChangePerspective") {
        if (auto b = boolean(v, key)) cfg.can_change_perspective = *b; else ok = false;
      } else if (key == "defaultPerspective") {
        if (!v.IsScalar()) {
          error(v, key, "expected a scalar");
          ok = false;
        } else {
          cfg.default_perspective = v.Scalar();
        }
      } else if (key == "arenas") {
        have_arenas = true;
        if (!v.IsMap()) {
          error(v, key, "expected a 0-indexed mapping of !Arena");
          ok = false;
          continue;
        }
        for (auto a = v.begin(); a != v.end(); ++a) {
          double idx = 0.0;
          if (!a->first.IsScalar() || !parse_double(a->first.Scalar(), idx) || !is_integral(idx) ||
              idx < 0) {
            error(a->first, key, "arena index must be a non-negative integer");
            ok = false;
            continue;
          }
          const int i = static_cast<int>(idx);
          const std::string apath = "arenas." + std::to_string(i);
          if (cfg.arenas.count(i)) {
            error(a->first, apath, "duplicate arena index " + std::to_string(i));
            ok = false;
            continue;
          }
          auto arena_spec = arena(a->second, apath);
          if (arena_spec)
            cfg.arenas.emplace(i, std::move(*arena_spec));
          else
            ok = false;
        }
      } else {
        warning(it->first, key, "unknown attribute '" + key + "' ignored");
      }
    }
    if (!have_arenas) {
      error(root, "arenas", "no arenas defined");
      ok = false;
    }
    int expect = 0;
    for (const auto& [i, a] : cfg.arenas) {
      if (i != expect) {
        diags_.push_back({Severity::Error, a.line, a.column, "arenas." + std::to_string(i),
                          "arena indices must be contiguous from 0 (missing " +
                              std::to_string(expect) + ")"});
        ok = false;
        break;
      }
      ++expect;
    }
    if (!ok) return std::nullopt;
    return cfg;
  }

 private:
  Diagnostics& diags_;
};

class AnchorRejector : public YAML::EventHandler {
 public:
  explicit AnchorRejector(Diagnostics& d) : diags_(d) {}
  void OnDocumentStart(const YAML::Mark&) override {}
  void OnDocumentEnd() override {}
  void OnNull(const YAML::Mark& m, YAML::anchor_t a) override { check(m, a); }
  void OnAlias(const YAML::Mark& m, YAML::anchor_t) override {
    diags_.push_back(detail::make_diag(Severity::Error, m, "", "aliases are not supported"));
  }
  void OnScalar(const YAML::Mark& m, const std::string&, YAML::anchor_t a, const std::string&) override {
    check(m, a);
  }
  void OnSequenceStart(const YAML::Mark& m, const std::string&, YAML::anchor_t a,
                       YAML::EmitterStyle::value) override {
    check(m, a);
  }
  void OnSequenceEnd() override {}
  void OnMapStart(const YAML::Mark& m, const std::string&, YAML::anchor_t a,
                  YAML::EmitterStyle::value) override {
    check(m, a);
  }
  void OnMapEnd() override {}

 private:
  void check(const YAML::Mark& m, YAML::anchor_t a) {
    if (a != YAML::NullAnchor)
      diags_.push_back(detail::make_diag(Severity::Error, m, "", "anchors are not supported"));
  }
  Diagnostics& diags_;
};

// ---------------------------------------------------------------------------
// Validation helpers

struct Validator {
  Diagnostics& out;
  void error(const ItemSpec& item, const Attribute* attr, const std::string& path, std::string msg) {
    const int line = attr ? attr->line : item.line;
    const int col = attr ? attr->column : item.column;
    out.push_back({Severity::Error, line, col, path, std::move(msg)});
  }
  // Located at the k-th value when its mark is known.
  void error_at(const ItemSpec& item, const Attribute& attr, std::size_t k, const std::string& path, std::string msg) {
    if (k < attr.value_marks.size() && attr.value_marks[k].first > 0)
      out.push_back({Severity::Error, attr.value_marks[k].first, attr.value_marks[k].second, path, std::move(msg)});
    else
      error(item, &attr, path, std::move(msg));
  }
};

bool valid_sign_grid(const std::string& s) {
  // Rows of '0', '1' or '*' separated by '/', all the same length.
  std::size_t width = 0;
  std::size_t row = 0;
  std::size_t rows = 0;
  for (std::size_t i = 0; i <= s.size(); ++i) {
    if (i == s.size() || s[i] == '/') {
      if (row == 0) return false;
      if (rows == 0) width = row;
      if (row != width) return false;
      ++rows;
      row = 0;
    } else if (s[i] == '0' || s[i] == '1' || s[i] == '*') {
      ++row;
    } else {
      return false;
    }
  }
  return rows >= 1;
}

void write_scalar(std::ostream& os, const Scalar& s) {
  std::visit(
      [&](const auto& v) {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, double>) {
          os << format_number(v);
        } else if constexpr (std::is_same_v<T, std::string>) {
          os << '"';
          for (char c : v) {
            if (c == '"' || c == '\\') os << '\\';
            os << c;
          }
          os << '"';
        } else if constexpr (std::is_same_v<T, Vec3>) {
          os << "!Vector3 {x: " << format_number(v.x) << ", y: " << format_number(v.y)
             << ", z: " << format_number(v.z) << "}";
        } else {
          os << "!RGB {r: " << v.r << ", g: " << v.g << ", b: " << v.b << "}";
        }
      },
      s);
}

}  // namespace

namespace detail {

Diagnostic make_diag(Severity s, const YAML::Mark& mark, std::string path, std::string message) {
  Diagnostic d;
  d.severity = s;
  d.line = mark.is_null() ? 0 : mark.line + 1;
  d.column = mark.is_null() ? 0 : mark.column + 1;
  d.path = std::move(path);
  d.message = std::move(message);
  return d;
}

void reject_anchors(std::string_view text, Diagnostics& diags) {
  std::istringstream in{std::string(text)};
  YAML::Parser parser(in);
  AnchorRejector handler(diags);
  while (parser.HandleNextDocument(handler)) {
  }
}

std::optional<ArenaConfigFile> convert_document(const YAML::Node& root, Diagnostics& diags) {
  Converter c(diags);
  return c.document(root);
}

}  // namespace detail

bool has_errors(const Diagnostics& d) {
  return std::any_of(d.begin(), d.end(), [](const Diagnostic& x) { return x.severity == Severity::Error; });
}

std::string format_diagnostic(const Diagnostic& d, std::string_view file) {
  std::string s(file);
  s += ":" + std::to_string(d.line) + ":" + std::to_string(d.column) + ": ";
  s += d.severity == Severity::Error ? "error: " : "warning: ";
  s += d.message;
  if (!d.path.empty()) s += " (" + d.path + ")";
  return s;
}

std::string format_number(double v) {
  if (v == 0.0) return "0";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

const Attribute* ItemSpec::find(std::string_view key) const {
  for (const auto& a : attributes)
    if (a.key == key) return &a;
  return nullptr;
}

std::size_t ItemSpec::instance_count() const {
  if (const Attribute* p = find("positions"); p && !p->values.empty()) return p->values.size();
  std::size_t n = 1;
  for (const auto& a : attributes) {
    const AttributeInfo* info = attribute_info(a.key);
    if (info && info->parallel) n = std::max(n, a.values.size());
  }
  return n;
}

const std::vector<std::string_view>& known_attributes() {
  static const std::vector<std::string_view> keys = [] {
    std::vector<std::string_view> k;
    for (const auto& a : attribute_table()) k.push_back(a.key);
    return k;
  }();
  return keys;
}

bool attribute_applies(EntityKind kind, std::string_view key) {
  if (key == "positions" || key == "rotations") return true;
  if (key == "sizes") return is_size_configurable(kind);
  if (key == "colors") return is_color_configurable(kind);
  if (key == "skins" || key == "frozenAgentDelays") return kind == EntityKind::Agent;
  if (key == "initialValues" || key == "finalValues" || key == "delays" || key == "changeRates")
    return is_scheduled_goal(kind);
  if (key == "symbolNames") return kind == EntityKind::SignBoard;
  if (key == "spawnCount" || key == "timeBetweenSpawns")
    return kind == EntityKind::SpawnerTree || kind == EntityKind::SpawnerDispenserTall ||
           kind == EntityKind::SpawnerDispenserShort;
  if (key == "spawnSize") return is_dispenser(kind);
  if (key == "spawnProbability" || key == "rewardWeights" || key == "rewardSpawnPos" ||
      key == "resetDuration")
    return kind == EntityKind::SpawnerButton;
  return false;
}

ParseResult parse_config(std::string_view text) {
  ParseResult result;
  YAML::Node root;
  try {
    // Anchors and aliases need '&' or '*'; skip the event pass when neither occurs.
    if (text.find_first_of("&*") != std::string_view::npos) detail::reject_anchors(text, result.diagnostics);
    if (has_errors(result.diagnostics)) return result;
    root = YAML::Load(std::string(text));
  } catch (const YAML::ParserException& e) {
    result.diagnostics.push_back(detail::make_diag(Severity::Error, e.mark, "", e.msg));
    return result;
  } catch (const YAML::Exception& e) {
    result.diagnostics.push_back(detail::make_diag(Severity::Error, e.mark, "", e.msg));
    return result;
  }
  try {
    result.config = detail::convert_document(root, result.diagnostics);
  } catch (const YAML::Exception& e) {
    result.diagnostics.push_back(detail::make_diag(Severity::Error, e.mark, "", e.msg));
    result.config.reset();
  }
  return result;
}

Diagnostics validate(const ArenaConfigFile& config) {
  Diagnostics out;
  Validator v{out};
  for (const auto& [index, arena] : config.arenas) {
    const std::string apath = "arenas." + std::to_string(index);
    if (arena.t < 0) out.push_back({Severity::Error, arena.line, arena.column, apath + ".t", "t must be >= 0"});
    if (!arena.blackouts.empty()) {
      const bool alternating = arena.blackouts.size() == 1 && arena.blackouts[0] < 0;
      if (!alternating) {
        for (std::size_t i = 0; i < arena.blackouts.size(); ++i) {
          if (arena.blackouts[i] < 0 || (i > 0 && arena.blackouts[i] <= arena.blackouts[i - 1])) {
            out.push_back({Severity::Error, arena.line, arena.column, apath + ".blackouts",
                           "blackout steps must be non-negative and strictly increasing, or a single "
                           "negative period"});
            break;
          }
        }
      }
    }
    int agents = 0;
    for (std::size_t ii = 0; ii < arena.items.size(); ++ii) {
      const ItemSpec& item = arena.items[ii];
      const std::string ipath = item_path(index, ii);
      const auto kind = kind_from_name(item.name);
      if (!kind) {
        v.error(item, nullptr, ipath, "unknown entity name '" + item.name + "'");
        continue;
      }
      const std::size_t count = item.instance_count();
      if (*kind == EntityKind::Agent) agents += static_cast<int>(count);
      for (const auto& attr : item.attributes) {
        const std::string path = ipath + "." + attr.key;
        const AttributeInfo* info = attribute_info(attr.key);
        if (!info) continue;
        if (!attribute_applies(*kind, attr.key)) {
          v.error(item, &attr, path,
                  "attribute not applicable: '" + attr.key + "' on " + item.name);
          continue;
        }
        if (attr.key == "rewardWeights") {
          if (attr.values.size() != 3) {
            v.error(item, &attr, path, "rewardWeights needs exactly 3 values (GoodGoal, GoodGoalMulti, BadGoal)");
            continue;
          }
          double total = 0.0;
          for (const auto& s : attr.values) {
            const double w = std::get<double>(s);
            if (w < 0.0) v.error(item, &attr, path, "rewardWeights must be non-negative");
            total += w;
          }
          if (!(total > 0.0)) v.error(item, &attr, path, "rewardWeights must not all be zero");
          continue;
        }
        if (attr.values.size() != 1 && attr.values.size() != count) {
          v.error(item, &attr, path,
                  "length mismatch: " + std::to_string(attr.values.size()) + " values for " +
                      std::to_string(count) + " instances");
        }
        for (std::size_t k = 0; k < attr.values.size(); ++k) {
          const std::string epath = path + "[" + std::to_string(k) + "]";
          const Scalar& s = attr.values[k];
          if (attr.key == "positions") {
            const Vec3 p = std::get<Vec3>(s);
            for (double c : {p.x, p.y, p.z})
              if (c != -1.0 && (c < 0.0 || c > kArenaSize))
                v.error_at(item, attr, k, epath, "out of arena bounds: " + format_number(c));
          } else if (attr.key == "sizes") {
            const Vec3 p = std::get<Vec3>(s);
            // Zones are flat volumes; their height may be zero.
            const double min_y = is_zone(*kind) ? 0.0 : 1e-300;
            const bool bad = (p.x != -1.0 && !(p.x > 0.0)) || (p.z != -1.0 && !(p.z > 0.0)) ||
                             (p.y != -1.0 && !(p.y >= min_y));
            if (bad) v.error_at(item, attr, k, epath, "sizes must be positive or -1");
          } else if (attr.key == "rewardSpawnPos") {
            const Vec3 p = std::get<Vec3>(s);
            for (double c : {p.x, p.y, p.z})
              if (c < 0.0 || c > kArenaSize) v.error_at(item, attr, k, epath, "out of arena bounds: " + format_number(c));
          } else if (attr.key == "colors") {
            const Rgb c = std::get<Rgb>(s);
            const bool random = c.r == -1 && c.g == -1 && c.b == -1;
            for (int ch : {c.r, c.g, c.b})
              if (!random && (ch < 0 || ch > 255)) {
                v.error_at(item, attr, k, epath, "color channel out of range [0,255]: " + std::to_string(ch));
                break;
              }
          } else if (attr.key == "skins") {
            if (!skin_from_name(std::get<std::string>(s)))
              v.error_at(item, attr, k, epath, "unknown skin '" + std::get<std::string>(s) + "'");
          } else if (attr.key == "symbolNames") {
            const auto& name = std::get<std::string>(s);
            const bool preset =
                std::find(kSignSymbols.begin(), kSignSymbols.end(), name) != kSignSymbols.end();
            if (!preset && !valid_sign_grid(name))
              v.error_at(item, attr, k, epath, "unknown symbol or malformed pixel grid '" + name + "'");
          } else if (std::holds_alternative<double>(s)) {
            const double x = std::get<double>(s);
            if ((attr.key == "delays" || attr.key == "frozenAgentDelays" || attr.key == "resetDuration") && x < 0)
              v.error_at(item, attr, k, epath, attr.key + " must be >= 0");
            if (attr.key == "spawnCount" && x < -1)
              v.error_at(item, attr, k, epath, "spawnCount must be >= 0 or -1 for unlimited");
            if (attr.key == "timeBetweenSpawns" && x < 1)
              v.error_at(item, attr, k, epath, "timeBetweenSpawns must be >= 1");
            if (attr.key == "spawnProbability" && (x < 0 || x > 1))
              v.error_at(item, attr, k, epath, "spawnProbability must be in [0,1]");
            if (attr.key == "spawnSize" && !(x > 0))
              v.error_at(item, attr, k, epath, "spawnSize must be positive");
          }
        }
      }
    }
    if (agents > 1)
      out.push_back({Severity::Error, arena.line, arena.column, apath + ".items",
                     "an arena holds at most one agent"});
    if (agents == 0)
      out.push_back({Severity::Warning, arena.line, arena.column, apath + ".items",
                     "no Agent item; the agent will be spawned at a random pose"});
  }
  return out;
}

std::string serialize(const ArenaConfigFile& config) {
  std::ostringstream os;
  os << "!ArenaConfig\n";
  os << "showNotification: " << (config.show_notification ? "true" : "false") << "\n";
  os << "canResetEpisode: " << (config.can_reset_episode ? "true" : "false") << "\n";
  os << "canChangePerspective: " << (config.can_change_perspective ? "true" : "false") << "\n";
  if (config.default_perspective) {
    os << "defaultPerspective: ";
    write_scalar(os, Scalar{*config.default_perspective});
    os << "\n";
  }
  os << "arenas:\n";
  for (const auto& [index, arena] : config.arenas) {
    os << "  " << index << ": !Arena\n";
    os << "    pass_mark: " << format_number(arena.pass_mark) << "\n";
    os << "    t: " << arena.t << "\n";
    if (!arena.blackouts.empty()) {
      os << "    blackouts: [";
      for (std::size_t i = 0; i < arena.blackouts.size(); ++i) os << (i ? ", " : "") << arena.blackouts[i];
      os << "]\n";
    }
    if (arena.items.empty()) {
      os << "    items: []\n";
      continue;
    }
    os << "    items:\n";
    for (const auto& item : arena.items) {
      os << "    - !Item\n";
      os << "      name: " << item.name << "\n";
      for (const auto& attr : item.attributes) {
        const bool block = !attr.values.empty() && (std::holds_alternative<Vec3>(attr.values[0]) ||
                                                     std::holds_alternative<Rgb>(attr.values[0]));
        if (block) {
          os << "      " << attr.key << ":\n";
          for (const auto& s : attr.values) {
            os << "      - ";
            write_scalar(os, s);
            os << "\n";
          }
        } else {
          os << "      " << attr.key << ": [";
          for (std::size_t i = 0; i < attr.values.size(); ++i) {
            if (i) os << ", ";
            write_scalar(os, attr.values[i]);
          }
          os << "]\n";
        }
      }
    }
  }
  return os.str();
}

bool structurally_equal(const ArenaConfigFile& a, const ArenaConfigFile& b) {
  if (a.show_notification != b.show_notification || a.can_reset_episode != b.can_reset_episode ||
      a.can_change_perspective != b.can_change_perspective ||
      a.default_perspective != b.default_perspective || a.arenas.size() != b.arenas.size())
    return false;
  for (const auto& [i, x] : a.arenas) {
    auto it = b.arenas.find(i);
    if (it == b.arenas.end()) return false;
    const ArenaSpec& y = it->second;
    if (x.pass_mark != y.pass_mark || x.t != y.t || x.blackouts != y.blackouts ||
        x.items.size() != y.items.size())
      return false;
    for (std::size_t k = 0; k < x.items.size(); ++k) {
      const auto& p = x.items[k];
      const auto& q = y.items[k];
      if (p.name != q.name || p.attributes.size() != q.attributes.size()) return false;
      for (std::size_t m = 0; m < p.attributes.size(); ++m)
        if (p.attributes[m].key != q.attributes[m].key || p.attributes[m].values != q.attributes[m].values)
          return false;
    }
  }
  return true;
}

ArenaConfigFile load_config(std::string_view text, Diagnostics* warnings) {
  ParseResult r = parse_config(text);
  Diagnostics all = r.diagnostics;
  if (r.config) {
    Diagnostics v = validate(*r.config);
    all.insert(all.end(), v.begin(), v.end());
  }
  if (!r.config || has_errors(all)) {
    std::string first = "invalid configuration";
    for (const auto& d : all)
      if (d.severity == Severity::Error) {
        first = format_diagnostic(d, "<config>");
        break;
      }
    throw ConfigError(first, all);
  }
  if (warnings) *warnings = all;
  return *r.config;
}

ArenaConfigFile load_config_file(const std::string& path, Diagnostics* warnings) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read " + path, {{Severity::Error, 0, 0, "", "cannot read file"}});
  std::ostringstream ss;
  ss << in.rdbuf();
  return load_config(ss.str(), warnings);
}

}  // namespace arena::config
