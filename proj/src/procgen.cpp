#include "arena/procgen.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>

#include "arena/config.hpp"
#include "arena/rng.hpp"

namespace arena::procgen {

namespace {

constexpr std::size_t kMaxExhaustive = 10'000'000;

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::string unquote(std::string_view s) {
  s = trim(s);
  if (s.size() >= 2 && (s.front() == '"' || s.front() == '\'') && s.back() == s.front())
    return std::string(s.substr(1, s.size() - 2));
  return std::string(s);
}

bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

std::optional<DirectiveKind> kind_from_name(std::string_view n) {
  if (n == "Choice") return DirectiveKind::Choice;
  if (n == "RandomColor") return DirectiveKind::RandomColor;
  if (n == "RandomRange") return DirectiveKind::RandomRange;
  if (n == "Label") return DirectiveKind::Label;
  if (n == "If") return DirectiveKind::If;
  return std::nullopt;
}

std::optional<double> to_number(std::string_view s) {
  s = trim(s);
  double v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) return std::nullopt;
  return v;
}

bool is_integer_literal(std::string_view s) {
  s = trim(s);
  if (!s.empty() && (s[0] == '-' || s[0] == '+')) s.remove_prefix(1);
  return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); });
}

std::uint64_t mix(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

class Scanner {
 public:
  explicit Scanner(std::string_view text) : text_(text) {
    line_starts_.push_back(0);
    for (std::size_t i = 0; i < text.size(); ++i)
      if (text[i] == '\n') line_starts_.push_back(i + 1);
  }

  std::vector<Directive> run() {
    std::vector<Directive> out;
    std::size_t i = 0;
    while (i < text_.size()) {
      const char c = text_[i];
      if (c == '#' && (i == 0 || std::isspace(static_cast<unsigned char>(text_[i - 1])))) {
        while (i < text_.size() && text_[i] != '\n') ++i;
      } else if ((c == '"' || c == '\'') && starts_scalar(i)) {
        i = skip_quoted(i);
      } else if (c == '!') {
        std::size_t j = i + 1;
        while (j < text_.size() && ident_char(text_[j])) ++j;
        if (auto k = kind_from_name(text_.substr(i + 1, j - i - 1))) {
          out.push_back(parse(i, j, *k, true));
          i = out.back().end;
        } else {
          i = j;
        }
      } else {
        ++i;
      }
    }
    return out;
  }

  [[noreturn]] void fail(std::size_t pos, const std::string& msg) const {
    const auto [line, col] = where(pos);
    throw ProcgenError("template " + std::to_string(line) + ":" + std::to_string(col) + ": " + msg);
  }

  std::pair<int, int> where(std::size_t pos) const {
    const auto it = std::upper_bound(line_starts_.begin(), line_starts_.end(), pos) - 1;
    return {static_cast<int>(it - line_starts_.begin()) + 1, static_cast<int>(pos - *it) + 1};
  }

 private:
  bool starts_scalar(std::size_t i) const {
    std::size_t k = i;
    while (k > 0 && (text_[k - 1] == ' ' || text_[k - 1] == '\t')) --k;
    if (k == 0) return true;
    const char p = text_[k - 1];
    return p == ':' || p == '[' || p == ',' || p == '{' || p == '-' || p == '\n';
  }

  std::size_t skip_quoted(std::size_t i) const {
    const char q = text_[i];
    std::size_t k = i + 1;
    while (k < text_.size()) {
      if (q == '"' && text_[k] == '\\') {
        k += 2;
        continue;
      }
      if (text_[k] == q) {
        if (q == '\'' && k + 1 < text_.size() && text_[k + 1] == '\'') {
          k += 2;
          continue;
        }
        return k + 1;
      }
      ++k;
    }
    fail(i, "unterminated quoted scalar");
  }

  // Span of a flow collection opened at `open`, through its closing bracket.
  std::size_t match_flow(std::size_t open) const {
    std::vector<char> stack;
    std::size_t k = open;
    while (k < text_.size()) {
      const char c = text_[k];
      if (c == '[' || c == '{') {
        stack.push_back(c == '[' ? ']' : '}');
      } else if (c == ']' || c == '}') {
        if (stack.empty() || stack.back() != c) fail(k, "mismatched bracket in directive");
        stack.pop_back();
        if (stack.empty()) return k + 1;
      } else if ((c == '"' || c == '\'') && starts_scalar(k)) {
        k = skip_quoted(k);
        continue;
      } else if (c == '#' && std::isspace(static_cast<unsigned char>(text_[k - 1]))) {
        fail(k, "comments are not allowed inside a directive");
      }
      ++k;
    }
    fail(open, "unterminated directive arguments");
  }

  // Top-level items of the flow sequence text_[open, close).
  std::vector<std::pair<std::size_t, std::size_t>> split_items(std::size_t open, std::size_t close) const {
    std::vector<std::pair<std::size_t, std::size_t>> items;
    int depth = 0;
    std::size_t start = open + 1;
    for (std::size_t k = open + 1; k + 1 < close; ++k) {
      const char c = text_[k];
      if (c == '[' || c == '{') ++depth;
      else if (c == ']' || c == '}') --depth;
      else if ((c == '"' || c == '\'') && starts_scalar(k)) k = skip_quoted(k) - 1;
      else if (c == ',' && depth == 0) {
        items.push_back({start, k});
        start = k + 1;
      }
    }
    items.push_back({start, close - 1});
    for (auto& [b, e] : items) {
      while (b < e && std::isspace(static_cast<unsigned char>(text_[b]))) ++b;
      while (e > b && std::isspace(static_cast<unsigned char>(text_[e - 1]))) --e;
    }
    if (items.size() == 1 && items[0].first == items[0].second) items.clear();
    for (const auto& [b, e] : items)
      if (b == e) fail(b, "empty item in directive arguments");
    return items;
  }

  bool contains_directive(std::size_t b, std::size_t e) const {
    for (std::size_t k = b; k < e; ++k) {
      if (text_[k] != '!') continue;
      std::size_t j = k + 1;
      while (j < e && ident_char(text_[j])) ++j;
      if (kind_from_name(text_.substr(k + 1, j - k - 1))) return true;
    }
    return false;
  }

  Directive parse(std::size_t bang, std::size_t after_name, DirectiveKind kind, bool allow_label) {
    Directive d;
    d.kind = kind;
    d.begin = bang;
    std::tie(d.line, d.column) = where(bang);
    if (kind == DirectiveKind::RandomColor) {
      d.end = after_name;
      return d;
    }
    std::size_t open = after_name;
    while (open < text_.size() && (text_[open] == ' ' || text_[open] == '\t')) ++open;
    if (open >= text_.size() || text_[open] != '[')
      fail(bang, "!" + std::string(directive_kind_name(kind)) + " needs a flow sequence argument [...]");
    d.end = match_flow(open);
    const auto items = split_items(open, d.end);
    auto item_text = [&](std::size_t i) { return std::string(text_.substr(items[i].first, items[i].second - items[i].first)); };

    switch (kind) {
      case DirectiveKind::Choice:
        if (items.empty()) fail(bang, "!Choice needs at least one value");
        for (std::size_t i = 0; i < items.size(); ++i) {
          if (contains_directive(items[i].first, items[i].second)) fail(items[i].first, "directives cannot be nested in !Choice");
          d.values.push_back(item_text(i));
        }
        break;
      case DirectiveKind::RandomRange: {
        if (items.size() != 2) fail(bang, "!RandomRange needs [lo, hi]");
        const auto lo = to_number(item_text(0)), hi = to_number(item_text(1));
        if (!lo || !hi) fail(bang, "!RandomRange bounds must be numbers");
        if (*lo > *hi) fail(bang, "!RandomRange needs lo <= hi");
        d.values = {item_text(0), item_text(1)};
        break;
      }
      case DirectiveKind::Label: {
        if (!allow_label) fail(bang, "!Label cannot be nested");
        if (items.size() != 2) fail(bang, "!Label needs [name, directive]");
        d.label = unquote(item_text(0));
        if (d.label.empty() || !std::all_of(d.label.begin(), d.label.end(), ident_char))
          fail(items[0].first, "label names are letters, digits and underscores");
        const std::size_t ib = items[1].first;
        if (text_[ib] != '!') fail(ib, "!Label wraps a !Choice, !RandomColor or !RandomRange");
        std::size_t j = ib + 1;
        while (j < text_.size() && ident_char(text_[j])) ++j;
        const auto inner = kind_from_name(text_.substr(ib + 1, j - ib - 1));
        if (!inner || *inner == DirectiveKind::Label || *inner == DirectiveKind::If)
          fail(ib, "!Label wraps a !Choice, !RandomColor or !RandomRange");
        const Directive in = parse(ib, j, *inner, false);
        if (in.end != items[1].second) fail(in.end, "unexpected text after the labelled directive");
        d.inner = *inner;
        d.values = in.values;
        break;
      }
      case DirectiveKind::If:
        if (items.size() != 4) fail(bang, "!If needs [label, match, then, else]");
        for (std::size_t i = 1; i < 4; ++i)
          if (contains_directive(items[i].first, items[i].second)) fail(items[i].first, "directives cannot be nested in !If");
        d.label = unquote(item_text(0));
        d.values = {item_text(1), item_text(2), item_text(3)};
        break;
      case DirectiveKind::RandomColor:
        break;
    }
    return d;
  }

  std::string_view text_;
  std::vector<std::size_t> line_starts_;
};

DirectiveKind value_kind(const Directive& d) { return d.kind == DirectiveKind::Label ? d.inner : d.kind; }

std::string draw_value(const Directive& d, Rng& rng) {
  switch (value_kind(d)) {
    case DirectiveKind::Choice:
      return d.values[rng.below(d.values.size())];
    case DirectiveKind::RandomColor: {
      const auto r = rng.below(256), g = rng.below(256), b = rng.below(256);
      return "!RGB {r: " + std::to_string(r) + ", g: " + std::to_string(g) + ", b: " + std::to_string(b) + "}";
    }
    case DirectiveKind::RandomRange: {
      const double lo = *to_number(d.values[0]), hi = *to_number(d.values[1]);
      if (is_integer_literal(d.values[0]) && is_integer_literal(d.values[1])) {
        const auto ilo = static_cast<long long>(lo), ihi = static_cast<long long>(hi);
        return std::to_string(ilo + static_cast<long long>(rng.below(static_cast<std::uint64_t>(ihi - ilo) + 1)));
      }
      return config::format_number(rng.uniform(lo, hi));
    }
    default:
      throw ProcgenError("internal: not a value directive");
  }
}

// Fills in the If directives and renders the text.
GeneratedConfig render(std::string_view text, const std::vector<Directive>& ds, std::vector<std::string> values,
                       std::uint64_t seed) {
  std::map<std::string, std::string> labels;
  for (std::size_t i = 0; i < ds.size(); ++i)
    if (ds[i].kind == DirectiveKind::Label) labels[ds[i].label] = unquote(values[i]);
  for (std::size_t i = 0; i < ds.size(); ++i)
    if (ds[i].kind == DirectiveKind::If)
      values[i] = labels.at(ds[i].label) == unquote(ds[i].values[0]) ? ds[i].values[1] : ds[i].values[2];

  GeneratedConfig g;
  g.seed = seed;
  std::size_t at = 0;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    g.text.append(text.substr(at, ds[i].begin - at));
    g.text.append(values[i]);
    at = ds[i].end;
    g.choices.push_back({ds[i].name(), values[i]});
  }
  g.text.append(text.substr(at));
  return g;
}

void check_valid(const GeneratedConfig& g, std::size_t index) {
  try {
    config::load_config(g.text);
  } catch (const config::ConfigError& e) {
    std::string msg = "generated config " + std::to_string(index) + " is invalid";
    if (!e.diagnostics.empty()) {
      const auto& d = e.diagnostics.front();
      msg += ": " + std::to_string(d.line) + ":" + std::to_string(d.column) + ": " + d.message;
    }
    throw ProcgenError(msg);
  }
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

std::string_view directive_kind_name(DirectiveKind k) {
  switch (k) {
    case DirectiveKind::Choice: return "Choice";
    case DirectiveKind::RandomColor: return "RandomColor";
    case DirectiveKind::RandomRange: return "RandomRange";
    case DirectiveKind::Label: return "Label";
    case DirectiveKind::If: return "If";
  }
  return "?";
}

bool Directive::finite() const { return value_kind(*this) == DirectiveKind::Choice || kind == DirectiveKind::If; }

std::size_t Directive::cardinality() const {
  if (kind == DirectiveKind::If) return 1;  // determined by its label
  return value_kind(*this) == DirectiveKind::Choice ? values.size() : 0;
}

std::string Directive::name() const {
  if (kind == DirectiveKind::Label) return label;
  return std::string(directive_kind_name(kind)) + "@" + std::to_string(line) + ":" + std::to_string(column);
}

std::vector<Directive> scan_template(std::string_view text) {
  Scanner sc(text);
  auto ds = sc.run();
  std::set<std::string> labels;
  for (const auto& d : ds)
    if (d.kind == DirectiveKind::Label && !labels.insert(d.label).second)
      sc.fail(d.begin, "label '" + d.label + "' declared twice");
  for (const auto& d : ds)
    if (d.kind == DirectiveKind::If && !labels.count(d.label))
      sc.fail(d.begin, "!If refers to undeclared label '" + d.label + "'");
  return ds;
}

std::size_t exhaustive_count(std::string_view text) {
  const auto ds = scan_template(text);
  std::size_t n = 1;
  for (const auto& d : ds) {
    if (!d.finite())
      throw ProcgenError("line " + std::to_string(d.line) + ": !" + std::string(directive_kind_name(value_kind(d))) +
                         " has an infinite domain; use sample mode");
    const std::size_t c = d.cardinality();
    if (n > kMaxExhaustive / c) throw ProcgenError("exhaustive expansion exceeds " + std::to_string(kMaxExhaustive) + " configs");
    n *= c;
  }
  return n;
}

std::vector<GeneratedConfig> expand_template(std::string_view text, const ExpansionMode& mode) {
  const auto ds = scan_template(text);
  std::vector<GeneratedConfig> out;
  if (const auto* s = std::get_if<Sample>(&mode)) {
    if (s->count < 0) throw ProcgenError("sample count must be >= 0");
    for (int i = 0; i < s->count; ++i) {
      const std::uint64_t seed = mix(s->seed, static_cast<std::uint64_t>(i));
      Rng rng(seed);
      std::vector<std::string> values(ds.size());
      for (std::size_t k = 0; k < ds.size(); ++k)
        if (ds[k].kind != DirectiveKind::If) values[k] = draw_value(ds[k], rng);
      out.push_back(render(text, ds, std::move(values), seed));
    }
  } else {
    const std::size_t total = exhaustive_count(text);
    std::vector<std::size_t> digit(ds.size(), 0);
    for (std::size_t n = 0; n < total; ++n) {
      std::vector<std::string> values(ds.size());
      for (std::size_t k = 0; k < ds.size(); ++k)
        if (ds[k].kind != DirectiveKind::If) values[k] = ds[k].values[digit[k]];
      out.push_back(render(text, ds, std::move(values), 0));
      // Odometer, last directive fastest.
      for (std::size_t k = ds.size(); k-- > 0;) {
        if (ds[k].kind == DirectiveKind::If) continue;
        if (++digit[k] < ds[k].cardinality()) break;
        digit[k] = 0;
      }
    }
  }
  for (std::size_t i = 0; i < out.size(); ++i) check_valid(out[i], i);
  return out;
}

BatteryManifest write_battery(const std::vector<GeneratedConfig>& configs, const std::filesystem::path& out_dir,
                              const std::string& stem) {
  if (configs.empty()) throw ProcgenError("empty expansion: nothing to write");
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw ProcgenError("cannot create " + out_dir.string() + ": " + ec.message());

  const int width = std::max<int>(3, static_cast<int>(std::to_string(configs.size() - 1).size()));
  BatteryManifest m;
  m.csv = std::string("# arena-lab ") + ARENA_LAB_VERSION + "\nfile,directive,value,seed\n";
  for (std::size_t i = 0; i < configs.size(); ++i) {
    std::string idx = std::to_string(i);
    idx.insert(0, static_cast<std::size_t>(width) - idx.size(), '0');
    const std::string name = stem + "_" + idx + ".yml";
    std::ofstream f(out_dir / name, std::ios::binary);
    f << "# arena-lab " << ARENA_LAB_VERSION << " seed=" << configs[i].seed << "\n" << configs[i].text;
    if (!f) throw ProcgenError("cannot write " + (out_dir / name).string());
    m.files.push_back(name);
    const std::string seed = std::to_string(configs[i].seed);
    if (configs[i].choices.empty()) m.csv += csv_field(name) + ",,," + seed + "\n";
    for (const auto& c : configs[i].choices)
      m.csv += csv_field(name) + "," + csv_field(c.directive) + "," + csv_field(c.value) + "," + seed + "\n";
  }
  std::ofstream mf(out_dir / "manifest.csv", std::ios::binary);
  mf << m.csv;
  if (!mf) throw ProcgenError("cannot write manifest");
  return m;
}

}  // namespace arena::procgen
