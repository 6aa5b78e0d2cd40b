#pragma once

// Line-oriented run configuration:
//
//   # comment
//   [run]
//   preset = B
//   deltas = 0.04, 0.02
//   [fhn]
//   I0 = sin2:1.5
//
// Keys of [run] and [fhn] override whatever preset is selected.

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "podrom/errors.hpp"
#include "podrom/experiment.hpp"
#include "podrom/fhn.hpp"

namespace podrom {

struct IniDocument {
  // section -> key -> value; keys before any header go to section "".
  std::map<std::string, std::map<std::string, std::string>> sections;

  const std::string* get(const std::string& section, const std::string& key) const {
    auto s = sections.find(section);
    if (s == sections.end()) return nullptr;
    auto k = s->second.find(key);
    return k == s->second.end() ? nullptr : &k->second;
  }
};

namespace detail {

inline std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

inline std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream is(s);
  while (std::getline(is, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

}  // namespace detail

inline IniDocument parse_ini(const std::string& text) {
  IniDocument doc;
  std::istringstream is(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find_first_of("#;");
    if (hash != std::string::npos) line.erase(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw InvalidInput("config line " + std::to_string(lineno) + ": unterminated section");
      section = detail::trim(line.substr(1, line.size() - 2));
      doc.sections[section];
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw InvalidInput("config line " + std::to_string(lineno) + ": expected 'key = value'");
    const std::string key = detail::trim(line.substr(0, eq));
    if (key.empty()) throw InvalidInput("config line " + std::to_string(lineno) + ": empty key");
    doc.sections[section][key] = detail::trim(line.substr(eq + 1));
  }
  return doc;
}

inline IniDocument read_ini(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot read config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_ini(ss.str());
}

inline double parse_real(const std::string& s, const std::string& what) {
  double v = 0.0;
  const std::string t = detail::trim(s);
  const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || res.ec != std::errc() || res.ptr != t.data() + t.size())
    throw InvalidInput(what + ": '" + s + "' is not a number");
  return v;
}

inline std::uint64_t parse_count(const std::string& s, const std::string& what) {
  std::uint64_t v = 0;
  const std::string t = detail::trim(s);
  const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || res.ec != std::errc() || res.ptr != t.data() + t.size())
    throw InvalidInput(what + ": '" + s + "' is not a non-negative integer");
  return v;
}

inline bool parse_flag(const std::string& s, const std::string& what) {
  if (s == "1" || s == "true" || s == "yes" || s == "on") return true;
  if (s == "0" || s == "false" || s == "no" || s == "off") return false;
  throw InvalidInput(what + ": '" + s + "' is not a boolean");
}

inline std::vector<double> parse_real_list(const std::string& s, const std::string& what) {
  std::vector<double> out;
  for (const auto& item : detail::split_list(s)) out.push_back(parse_real(item, what));
  if (out.empty()) throw InvalidInput(what + ": empty list");
  return out;
}

inline std::vector<SnapshotKind> parse_method_list(const std::string& s) {
  std::vector<SnapshotKind> out;
  for (const auto& item : detail::split_list(s)) {
    const SnapshotKind k = parse_snapshot_kind(item);
    if (std::find(out.begin(), out.end(), k) == out.end()) out.push_back(k);
  }
  if (out.empty()) throw InvalidInput("methods: empty list");
  return out;
}

/// "constant:1", "sin2:1.5", or a bare number (constant).
inline fhn::Waveform parse_waveform(const std::string& s) {
  const auto colon = s.find(':');
  if (colon == std::string::npos) return fhn::Waveform::constant(parse_real(s, "waveform"));
  const std::string kind = detail::trim(s.substr(0, colon));
  const double v = parse_real(s.substr(colon + 1), "waveform");
  if (kind == "constant" || kind == "const") return fhn::Waveform::constant(v);
  if (kind == "sin2" || kind == "sin_squared") return fhn::Waveform::sin_squared(v);
  throw InvalidInput("waveform: unknown kind '" + kind + "' (expected constant or sin2)");
}

/// Replaces the rule set when either list is present.
inline void set_rules(RunConfig& c, const std::optional<std::string>& epsilons,
                      const std::optional<std::string>& dims) {
  if (!epsilons && !dims) return;
  c.rules.clear();
  if (epsilons)
    for (double e : parse_real_list(*epsilons, "epsilons")) c.rules.push_back(TruncationRule::cutoff(e));
  if (dims)
    for (const auto& item : detail::split_list(*dims))
      c.rules.push_back(TruncationRule::fixed(parse_count(item, "dims")));
}

inline std::optional<fhn::PresetId> ini_preset(const IniDocument& doc) {
  if (const auto* p = doc.get("run", "preset")) return fhn::parse_preset(*p);
  return std::nullopt;
}

inline void apply_ini(const IniDocument& doc, RunConfig& c) {
  for (const auto& [section, keys] : doc.sections) {
    if (section != "run" && section != "fhn")
      throw InvalidInput("config: unknown section [" + section + "]");
    for (const auto& [key, value] : keys) {
      const std::string what = section + "." + key;
      if (section == "run") {
        if (key == "preset") continue;
        if (key == "methods") c.methods = parse_method_list(value);
        else if (key == "deltas") c.deltas = parse_real_list(value, what);
        else if (key == "epsilons" || key == "dims") continue;
        else if (key == "final_time") c.final_time = parse_real(value, what);
        else if (key == "eval_grid_size") c.eval_grid_size = parse_count(value, what);
        else if (key == "rel_tol") c.tolerances.rel_tol = parse_real(value, what);
        else if (key == "abs_tol") c.tolerances.abs_tol = parse_real(value, what);
        else if (key == "out") c.output_dir = value;
        else if (key == "bounds") c.evaluate_bounds = parse_flag(value, what);
        else if (key == "plots") c.emit_plots = parse_flag(value, what);
        else if (key == "seed") c.seed = parse_count(value, what);
        else if (key == "rank_tol_factor") c.rank_tol_factor = parse_real(value, what);
        else if (key == "bound_samples") c.bound_samples_per_interval = parse_count(value, what);
        else if (key == "method2_coefficient") {
          if (value == "conservative") c.method2_coefficient = Method2Coefficient::conservative;
          else if (value == "literal") c.method2_coefficient = Method2Coefficient::literal;
          else throw InvalidInput(what + ": expected conservative or literal");
        } else {
          throw InvalidInput("config: unknown key " + what);
        }
      } else {
        fhn::FhnParams& p = c.params;
        if (key == "L") p.L = parse_count(value, what);
        else if (key == "X") p.X = parse_real(value, what);
        else if (key == "D1") p.D1 = parse_real(value, what);
        else if (key == "D2") p.D2 = parse_real(value, what);
        else if (key == "lambda") p.lambda = parse_real(value, what);
        else if (key == "a") p.a = parse_real(value, what);
        else if (key == "mu") p.mu = parse_real(value, what);
        else if (key == "gamma") p.gamma = parse_real(value, what);
        else if (key == "I0") p.I0 = parse_waveform(value);
        else if (key == "IX") p.IX = parse_waveform(value);
        else if (key == "w0") p.w0 = parse_waveform(value);
        else if (key == "wX") p.wX = parse_waveform(value);
        else if (key == "stencil") {
          if (value == "consistent") p.stencil = fhn::BoundaryStencil::consistent;
          else if (value == "literal") p.stencil = fhn::BoundaryStencil::literal;
          else throw InvalidInput(what + ": expected consistent or literal");
        } else {
          throw InvalidInput("config: unknown key " + what);
        }
      }
    }
  }
  auto opt = [&](const char* k) -> std::optional<std::string> {
    if (const auto* v = doc.get("run", k)) return *v;
    return std::nullopt;
  };
  set_rules(c, opt("epsilons"), opt("dims"));
}

}  // namespace podrom
