#pragma once

// CSV and gnuplot output for a RunReport. Everything is rendered to strings
// first so that output is reproducible byte for byte.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <system_error>
#include <utility>
#include <vector>

#include "podrom/errors.hpp"
#include "podrom/experiment.hpp"

namespace podrom {

/// Shortest round-trip decimal form; infinities as "inf"/"-inf".
inline std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline double parse_number(const std::string& s) {
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  if (s == "inf") return std::numeric_limits<double>::infinity();
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) throw InvalidInput("not a number: '" + s + "'");
  return v;
}

inline std::string log10_field(double v, double floor = 0.0) {
  if (!(v > floor)) return "-inf";
  return format_number(std::log10(v));
}

inline const char* kErrorCsvHeader = "t,log10_err,method,delta,l,sigma_next";
inline const char* kSpectrumCsvHeader = "index,log10_sigma,method,delta";

/// Rows for every successful cell, optionally only those with one rule label.
inline std::string error_csv(const RunReport& report, const std::string& rule_label = "") {
  std::ostringstream os;
  os << kErrorCsvHeader << '\n';
  for (const auto& c : report.cells) {
    if (!c.ok || (!rule_label.empty() && c.rule.label() != rule_label)) continue;
    const std::string tail = "," + to_string(c.method) + "," + format_number(c.delta) + "," +
                             std::to_string(c.l) + "," + format_number(c.sigma_next);
    for (std::size_t k = 0; k < c.error.times.size(); ++k)
      os << format_number(c.error.times[k]) << ',' << log10_field(c.error.norms[k]) << tail << '\n';
  }
  return os.str();
}

inline std::string spectrum_csv(const RunReport& report) {
  std::ostringstream os;
  os << kSpectrumCsvHeader << '\n';
  for (const auto& s : report.spectra)
    for (std::size_t k = 0; k < s.singular_values.size(); ++k)
      os << (k + 1) << ',' << log10_field(s.singular_values[k], 1e-300) << ',' << to_string(s.method) << ','
         << format_number(s.delta) << '\n';
  return os.str();
}

/// One line per cell, failures included.
inline std::string summary_csv(const RunReport& report) {
  std::ostringstream os;
  os << "method,delta,rule,status,l,sigma_next,max_err,message\n";
  for (const auto& c : report.cells) {
    os << to_string(c.method) << ',' << format_number(c.delta) << ',' << c.rule.label() << ','
       << (c.ok ? "ok" : "failed") << ',';
    if (c.ok)
      os << c.l << ',' << format_number(c.sigma_next) << ',' << format_number(c.max_error) << ',';
    else
      os << ",,,";
    std::string msg = c.ok ? (c.cutoff_warning ? "cutoff >= sigma_1" : c.bound_failure) : c.failure;
    for (char& ch : msg)
      if (ch == ',' || ch == '\n' || ch == '"') ch = ' ';
    os << msg << '\n';
  }
  return os.str();
}

inline std::string bounds_csv(const RunReport& report) {
  std::ostringstream os;
  os << "t,log10_bound,log10_err,method,delta,l,provenance,saturated\n";
  for (const auto& c : report.cells) {
    if (!c.ok || !c.bound) continue;
    const std::string tail = "," + to_string(c.method) + "," + format_number(c.delta) + "," +
                             std::to_string(c.l) + "," + to_string(*c.bound_provenance) + "," +
                             (c.bound->saturated ? "1" : "0");
    for (std::size_t k = 0; k < c.bound->times.size(); ++k)
      os << format_number(c.bound->times[k]) << ',' << log10_field(c.bound->values[k]) << ','
         << log10_field(c.error.norms[k]) << tail << '\n';
  }
  return os.str();
}

/// Rule labels in first-appearance order.
inline std::vector<std::string> rule_labels(const RunReport& report) {
  std::vector<std::string> out;
  for (const auto& c : report.cells) {
    const std::string l = c.rule.label();
    if (std::find(out.begin(), out.end(), l) == out.end()) out.push_back(l);
  }
  return out;
}

inline std::string error_file_name(const std::string& rule_label) { return "errors_" + rule_label + ".csv"; }

/// gnuplot script: one panel per rule (log10 error vs t, one series per
/// method and spacing), then a spectrum panel.
inline std::string plot_script(const RunReport& report) {
  std::vector<std::pair<std::string, double>> series;  // (method, delta)
  for (const auto& c : report.cells) {
    std::pair<std::string, double> key{to_string(c.method), c.delta};
    if (std::find(series.begin(), series.end(), key) == series.end()) series.push_back(key);
  }
  const auto labels = rule_labels(report);
  std::ostringstream os;
  os << "# gnuplot script for run " << report.label << "\n";
  os << "set datafile separator ','\n";
  os << "set terminal svg size 1200," << 360 * (labels.size() / 2 + 2) << "\n";
  os << "set output 'errors.svg'\n";
  os << "set xlabel 't'\nset ylabel 'log10 error'\nset key outside right\n";
  if (labels.empty()) {
    os << "# no cells to plot\nunset output\n";
    return os.str();
  }
  os << "set multiplot layout " << (labels.size() + 2) / 2 << ",2\n";
  for (const auto& lab : labels) {
    os << "set title '" << lab << "'\n";
    os << "plot";
    for (std::size_t s = 0; s < series.size(); ++s) {
      const std::string d = format_number(series[s].second);
      os << (s ? ", \\\n    " : " ") << "'" << error_file_name(lab) << "' every ::1 using 1:(strcol(3) eq '"
         << series[s].first << "' && strcol(4) eq '" << d << "' ? $2 : NaN) with linespoints pt " << (s + 1)
         << " ps 0.4 title '" << series[s].first << " delta=" << d << "'";
    }
    os << "\n";
  }
  os << "set title 'singular values'\nset xlabel 'index'\nset ylabel 'log10 sigma'\n";
  os << "plot";
  for (std::size_t s = 0; s < series.size(); ++s) {
    const std::string d = format_number(series[s].second);
    os << (s ? ", \\\n    " : " ") << "'spectrum.csv' every ::1 using 1:(strcol(3) eq '" << series[s].first
       << "' && strcol(4) eq '" << d << "' ? $2 : NaN) with points pt " << (s + 1) << " ps 0.4 title '"
       << series[s].first << " delta=" << d << "'";
  }
  os << "\nunset multiplot\nunset output\n";
  return os.str();
}

inline void write_text_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << content;
  out.flush();
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

inline void write_error_csv(const RunReport& report, const std::filesystem::path& path) {
  write_text_file(path, error_csv(report));
}

inline void write_spectrum_csv(const RunReport& report, const std::filesystem::path& path) {
  write_text_file(path, spectrum_csv(report));
}

inline void emit_plot_script(const RunReport& report, const std::filesystem::path& path) {
  write_text_file(path, plot_script(report));
}

/// Writes errors.csv, errors_<rule>.csv, spectrum.csv, summary.csv, and
/// bounds.csv / plot.gp when requested. Returns the file names written.
inline std::vector<std::string> write_report(const RunReport& report, const std::filesystem::path& dir,
                                             bool with_bounds, bool with_plots) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory '" + dir.string() + "': " + ec.message());
  std::vector<std::string> written;
  auto put = [&](const std::string& name, const std::string& content) {
    write_text_file(dir / name, content);
    written.push_back(name);
  };
  put("errors.csv", error_csv(report));
  for (const auto& lab : rule_labels(report)) put(error_file_name(lab), error_csv(report, lab));
  put("spectrum.csv", spectrum_csv(report));
  put("summary.csv", summary_csv(report));
  if (with_bounds) put("bounds.csv", bounds_csv(report));
  if (with_plots) put("plot.gp", plot_script(report));
  return written;
}

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream is(line);
  while (std::getline(is, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

inline CsvTable parse_csv(const std::string& text) {
  CsvTable t;
  std::istringstream is(text);
  std::string line;
  bool first = true;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    if (first) {
      t.header = split_csv_line(line);
      first = false;
    } else {
      t.rows.push_back(split_csv_line(line));
    }
  }
  return t;
}

inline CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_csv(ss.str());
}

}  // namespace podrom
