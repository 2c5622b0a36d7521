// Copyright 2026 The specrl Authors.
// SPDX-License-Identifier: Apache-2.0

// Sweep result emitters: CSV, aligned text, SVG heatmaps, stage tables,
// curve dumps and a JSON summary. All output is a pure function of the
// SweepResult, so reruns are byte-identical.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <string>
#include <vector>

#include "specrl/sweep/scenario.hpp"

namespace specrl::sweep {

namespace fmt {

/// Three significant digits (speedups, acceptance lengths).
inline std::string sig3(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  if (x == 0.0) return "0.00";
  const int mag = static_cast<int>(std::floor(std::log10(std::fabs(x))));
  const int decimals = std::max(0, 2 - mag);
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, x);
  return buf;
}

/// Seconds: one decimal, or three significant digits below 0.1 s.
inline std::string seconds(double x) {
  if (std::fabs(x) < 0.1 && x != 0.0) return sig3(x);
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.1f", x);
  return buf;
}

inline std::string fixed(double x, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, x);
  return buf;
}

/// RFC 4180 quoting.
inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

inline std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace fmt

// ---------------------------------------------------------------------------
// Row tables.

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

inline Table cell_table(const SweepResult& r) {
  Table t;
  for (const auto& a : r.axes) t.header.push_back(a.name);
  for (const char* h : {"feasible", "k", "alpha", "alpha_realized", "instances", "gpus_per_instance", "concurrency",
                        "rollout_speedup", "e2e_speedup", "gen_ar_s", "gen_spec_s", "step_ar_s", "step_spec_s",
                        "exposed_gen_ar_s", "exposed_gen_s", "gen_share", "amdahl_bound", "reason"})
    t.header.emplace_back(h);
  for (const auto& c : r.cells) {
    std::vector<std::string> row = c.labels;
    row.push_back(c.feasible ? "yes" : "no");
    row.push_back(c.draft_length ? std::to_string(*c.draft_length) : "");
    row.push_back(c.alpha ? fmt::sig3(*c.alpha) : "");
    if (!c.feasible) {
      for (int i = 0; i < 14; ++i) row.emplace_back("");
    } else {
      row.push_back(c.alpha_realized ? fmt::sig3(*c.alpha_realized) : "");
      row.push_back(c.instances ? std::to_string(c.instances) : "");
      row.push_back(c.gpus_per_instance ? std::to_string(c.gpus_per_instance) : "");
      row.push_back(std::to_string(c.concurrency));
      row.push_back(fmt::sig3(c.rollout_speedup));
      row.push_back(fmt::sig3(c.e2e_speedup));
      row.push_back(fmt::seconds(c.gen_ar_s));
      row.push_back(fmt::seconds(c.gen_spec_s));
      row.push_back(fmt::seconds(c.step_ar_s));
      row.push_back(fmt::seconds(c.step_spec_s));
      row.push_back(fmt::seconds(c.exposed_gen_ar_s));
      row.push_back(fmt::seconds(c.exposed_gen_s));
      row.push_back(fmt::fixed(c.gen_share, 3));
      row.push_back(fmt::sig3(c.amdahl_bound));
    }
    row.push_back(c.reason);
    t.rows.push_back(std::move(row));
  }
  return t;
}

/// Per-stage seconds for every cell that carries stage times.
inline Table stage_table(const SweepResult& r) {
  Table t;
  for (const auto& a : r.axes) t.header.push_back(a.name);
  for (const char* h : {"variant", "data_s", "prepare_s", "gen_s", "logprob_s", "train_s", "total_s", "gen_speedup",
                        "step_speedup"})
    t.header.emplace_back(h);
  for (const auto& c : r.cells) {
    if (!c.stages_ar || !c.stages_spec) continue;
    for (int v = 0; v < 2; ++v) {
      const auto& s = v == 0 ? *c.stages_ar : *c.stages_spec;
      std::vector<std::string> row = c.labels;
      row.emplace_back(v == 0 ? "baseline" : "speculative");
      for (double x : {s.data_s, s.prepare_s, s.gen_s, s.logprob_s, s.train_s, s.total()}) row.push_back(fmt::seconds(x));
      row.push_back(v == 0 ? "" : fmt::sig3(c.rollout_speedup));
      row.push_back(v == 0 ? "" : fmt::sig3(c.e2e_speedup));
      t.rows.push_back(std::move(row));
    }
  }
  return t;
}

inline std::string to_csv(const Table& t) {
  std::string out;
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out += ',';
      out += fmt::csv_field(cells[i]);
    }
    out += "\r\n";
  };
  line(t.header);
  for (const auto& r : t.rows) line(r);
  return out;
}

/// Space-aligned columns; text left-aligned, numbers right-aligned.
inline std::string to_text(const Table& t) {
  std::vector<std::size_t> width(t.header.size(), 0);
  std::vector<bool> numeric(t.header.size(), true);
  auto is_number = [](const std::string& s) {
    if (s.empty()) return true;
    char* end = nullptr;
    std::strtod(s.c_str(), &end);
    return end && *end == '\0';
  };
  for (std::size_t i = 0; i < t.header.size(); ++i) width[i] = t.header[i].size();
  for (const auto& r : t.rows)
    for (std::size_t i = 0; i < r.size(); ++i) {
      width[i] = std::max(width[i], r[i].size());
      if (!is_number(r[i])) numeric[i] = false;
    }
  std::string out;
  auto line = [&](const std::vector<std::string>& cells) {
    std::string l;
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) l += "  ";
      const std::string pad(width[i] - cells[i].size(), ' ');
      l += numeric[i] ? pad + cells[i] : cells[i] + pad;
    }
    while (!l.empty() && l.back() == ' ') l.pop_back();
    out += l + "\n";
  };
  line(t.header);
  std::vector<std::string> rule;
  for (auto w : width) rule.emplace_back(w, '-');
  line(rule);
  for (const auto& r : t.rows) line(r);
  return out;
}

// ---------------------------------------------------------------------------
// Heatmap.

struct Rgb {
  int r, g, b;
};

/// Single-hue ramp from pale (t = 0, lowest value) to dark blue (t = 1,
/// highest value). Luminance is strictly decreasing in t.
inline Rgb ramp(double t) {
  t = std::clamp(t, 0.0, 1.0);
  constexpr Rgb lo{247, 251, 255}, hi{8, 48, 107};
  auto mix = [t](int a, int b) { return static_cast<int>(std::lround(a + (b - a) * t)); };
  return {mix(lo.r, hi.r), mix(lo.g, hi.g), mix(lo.b, hi.b)};
}

inline double luminance(const Rgb& c) { return 0.2126 * c.r + 0.7152 * c.g + 0.0722 * c.b; }

inline constexpr const char* kInfeasibleFill = "#bfbfbf";

inline std::string hex(const Rgb& c) {
  char buf[8];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", c.r, c.g, c.b);
  return buf;
}

/// SVG heatmap of `req.value` over axes x (columns) and y (rows). Cells
/// are labelled with the value; infeasible cells are gray and labelled "x".
inline std::string heatmap_svg(const SweepResult& r, const OutputRequest& req) {
  std::size_t xa = 0, ya = 0;
  for (std::size_t a = 0; a < r.axes.size(); ++a) {
    if (r.axes[a].name == req.x) xa = a;
    if (r.axes[a].name == req.y) ya = a;
  }
  const auto& ax = r.axes[xa];
  const auto& ay = r.axes[ya];
  const std::size_t nx = ax.values.size(), ny = ay.values.size();

  std::vector<std::optional<double>> grid(nx * ny);
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const auto& c : r.cells) {
    const auto v = field_value(c, req.value);
    grid[c.coords[ya] * nx + c.coords[xa]] = v;
    if (v) {
      lo = std::min(lo, *v);
      hi = std::max(hi, *v);
    }
  }

  constexpr int cw = 64, ch = 36, left = 90, top = 48, legend_h = 50;
  const int w = left + static_cast<int>(nx) * cw + 20;
  const int h = top + static_cast<int>(ny) * ch + legend_h + 30;
  std::string s;
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(w) + "\" height=\"" + std::to_string(h) +
       "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  s += "<text x=\"" + std::to_string(left) + "\" y=\"18\" font-size=\"14\">" +
       fmt::xml_escape(r.name + ": " + req.value) + "</text>\n";
  s += "<text x=\"" + std::to_string(left) + "\" y=\"36\">" + fmt::xml_escape(ax.name) + "</text>\n";
  s += "<text x=\"4\" y=\"36\">" + fmt::xml_escape(ay.name) + "</text>\n";
  for (std::size_t j = 0; j < ny; ++j) {
    const int y = top + static_cast<int>(j) * ch;
    s += "<text x=\"" + std::to_string(left - 6) + "\" y=\"" + std::to_string(y + ch / 2 + 4) +
         "\" text-anchor=\"end\">" + fmt::xml_escape(ay.labels[j]) + "</text>\n";
    for (std::size_t i = 0; i < nx; ++i) {
      const int x = left + static_cast<int>(i) * cw;
      const auto& v = grid[j * nx + i];
      std::string fill = kInfeasibleFill, label = "x", ink = "#000000";
      if (v) {
        const double t = hi > lo ? (*v - lo) / (hi - lo) : 0.5;
        const Rgb c = ramp(t);
        fill = hex(c);
        label = fmt::sig3(*v);
        if (luminance(c) < 128) ink = "#ffffff";
      }
      s += "<rect x=\"" + std::to_string(x) + "\" y=\"" + std::to_string(y) + "\" width=\"" + std::to_string(cw) +
           "\" height=\"" + std::to_string(ch) + "\" fill=\"" + fill + "\" stroke=\"#ffffff\"/>\n";
      s += "<text x=\"" + std::to_string(x + cw / 2) + "\" y=\"" + std::to_string(y + ch / 2 + 4) +
           "\" text-anchor=\"middle\" fill=\"" + ink + "\">" + label + "</text>\n";
    }
  }
  for (std::size_t i = 0; i < nx; ++i) {
    s += "<text x=\"" + std::to_string(left + static_cast<int>(i) * cw + cw / 2) + "\" y=\"" +
         std::to_string(top + static_cast<int>(ny) * ch + 16) + "\" text-anchor=\"middle\">" +
         fmt::xml_escape(ax.labels[i]) + "</text>\n";
  }
  // Legend: low to high, plus the infeasible swatch.
  const int ly = top + static_cast<int>(ny) * ch + 30;
  constexpr int steps = 10, sw = 20;
  for (int k = 0; k < steps; ++k) {
    s += "<rect x=\"" + std::to_string(left + k * sw) + "\" y=\"" + std::to_string(ly) + "\" width=\"" +
         std::to_string(sw) + "\" height=\"12\" fill=\"" + hex(ramp(static_cast<double>(k) / (steps - 1))) + "\"/>\n";
  }
  if (std::isfinite(lo)) {
    s += "<text x=\"" + std::to_string(left) + "\" y=\"" + std::to_string(ly + 26) + "\">" + fmt::sig3(lo) + "</text>\n";
    s += "<text x=\"" + std::to_string(left + steps * sw) + "\" y=\"" + std::to_string(ly + 26) +
         "\" text-anchor=\"end\">" + fmt::sig3(hi) + "</text>\n";
  }
  s += "<rect x=\"" + std::to_string(left + steps * sw + 20) + "\" y=\"" + std::to_string(ly) +
       "\" width=\"12\" height=\"12\" fill=\"" + kInfeasibleFill + "\"/>\n";
  s += "<text x=\"" + std::to_string(left + steps * sw + 36) + "\" y=\"" + std::to_string(ly + 11) +
       "\">infeasible</text>\n";
  s += "</svg>\n";
  return s;
}

// ---------------------------------------------------------------------------
// Curves.

inline std::string occupancy_csv(const CellDetail& d) {
  std::string out = "variant,time_s,live_sequences\r\n";
  if (!d.rollout) return out;
  for (int v = 0; v < 2; ++v) {
    const auto& res = v == 0 ? d.rollout->baseline : d.rollout->speculative;
    for (const auto& p : res.occupancy_curve) {
      char buf[64];
      std::snprintf(buf, sizeof buf, "%.9g", p.time_s);
      out += std::string(v == 0 ? "baseline" : "speculative") + "," + buf + "," + std::to_string(p.live) + "\r\n";
    }
  }
  return out;
}

inline std::string timeline_csv(const CellDetail& d) {
  std::string out = "variant,step,stage,pool,start_s,end_s,policy_version\r\n";
  for (int v = 0; v < 2; ++v) {
    const auto& tr = v == 0 ? d.trace_ar : d.trace_spec;
    for (const auto& iv : tr.intervals) {
      char a[32], b[32];
      std::snprintf(a, sizeof a, "%.6f", iv.start_s);
      std::snprintf(b, sizeof b, "%.6f", iv.end_s);
      out += std::string(v == 0 ? "baseline" : "speculative") + "," + std::to_string(iv.step) + "," + iv.stage + "," +
             iv.pool + "," + a + "," + b + "," + std::to_string(iv.policy_version) + "\r\n";
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// JSON summary.

inline json cell_json(const CellRecord& c, const std::vector<Axis>& axes) {
  json j;
  j["index"] = c.index;
  json in = json::object();
  for (std::size_t a = 0; a < axes.size(); ++a) in[axes[a].name] = c.labels[a];
  j["inputs"] = in;
  j["feasible"] = c.feasible;
  if (!c.feasible) {
    j["reason"] = c.reason;
    return j;
  }
  if (c.draft_length) j["k"] = *c.draft_length;
  if (c.alpha) j["alpha"] = *c.alpha;
  if (c.alpha_realized) j["alpha_realized"] = *c.alpha_realized;
  j["instances"] = c.instances;
  j["gpus_per_instance"] = c.gpus_per_instance;
  j["concurrency"] = c.concurrency;
  j["rollout_speedup"] = c.rollout_speedup;
  j["e2e_speedup"] = c.e2e_speedup;
  j["gen_ar_s"] = c.gen_ar_s;
  j["gen_spec_s"] = c.gen_spec_s;
  j["step_ar_s"] = c.step_ar_s;
  j["step_spec_s"] = c.step_spec_s;
  j["exposed_gen_ar_s"] = c.exposed_gen_ar_s;
  j["exposed_gen_s"] = c.exposed_gen_s;
  j["gen_share"] = c.gen_share;
  j["amdahl_bound"] = c.amdahl_bound;
  j["tokens_conserved"] = c.tokens_conserved;
  return j;
}

inline json summary_json(const SweepResult& r) {
  json j;
  j["name"] = r.name;
  j["description"] = r.description;
  j["provenance"] = {{"config_hash", r.provenance.config_hash},
                     {"seed", r.provenance.seed},
                     {"tool_version", r.provenance.tool_version}};
  json axes = json::array();
  for (const auto& a : r.axes) axes.push_back({{"name", a.name}, {"path", a.path}, {"labels", a.labels}});
  j["axes"] = axes;
  json cells = json::array();
  std::size_t feasible = 0;
  double rmin = std::numeric_limits<double>::infinity(), rmax = -rmin, emin = rmin, emax = -rmin;
  for (const auto& c : r.cells) {
    cells.push_back(cell_json(c, r.axes));
    if (!c.feasible) continue;
    ++feasible;
    rmin = std::min(rmin, c.rollout_speedup);
    rmax = std::max(rmax, c.rollout_speedup);
    emin = std::min(emin, c.e2e_speedup);
    emax = std::max(emax, c.e2e_speedup);
  }
  j["cells"] = cells;
  json agg{{"cells", r.cells.size()}, {"feasible_cells", feasible}};
  if (feasible) {
    agg["rollout_speedup_min"] = rmin;
    agg["rollout_speedup_max"] = rmax;
    agg["e2e_speedup_min"] = emin;
    agg["e2e_speedup_max"] = emax;
  }
  j["aggregate"] = agg;
  j["cross_check_violations"] = cross_check(r);
  return j;
}

// ---------------------------------------------------------------------------

enum class Format { kCsv, kText, kAll };

inline void write_file(const std::filesystem::path& p, const std::string& content) {
  std::ofstream f(p, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + p.string());
  f << content;
  if (!f) throw std::runtime_error("write failed: " + p.string());
}

/// Writes every requested output under `dir`; returns the paths written.
inline std::vector<std::filesystem::path> write_outputs(const ScenarioSpec& spec, const SweepResult& r,
                                                        const std::filesystem::path& dir, Format format) {
  std::filesystem::create_directories(dir);
  std::vector<std::filesystem::path> written;
  auto emit = [&](const std::string& file, const std::string& content) {
    const auto p = dir / file;
    write_file(p, content);
    written.push_back(p);
  };
  const bool csv = format != Format::kText, text = format != Format::kCsv;
  const std::string base = r.name;
  for (const auto& o : spec.outputs) {
    if (o.kind == "table") {
      const Table t = cell_table(r);
      if (csv) emit(base + ".csv", to_csv(t));
      if (text) emit(base + ".txt", to_text(t));
    } else if (o.kind == "stage_table") {
      const Table t = stage_table(r);
      if (csv) emit(base + ".stages.csv", to_csv(t));
      if (text) emit(base + ".stages.txt", to_text(t));
    } else if (o.kind == "heatmap") {
      emit(base + "." + o.value + ".svg", heatmap_svg(r, o));
    } else if (o.kind == "curve") {
      const CellDetail d = cell_detail(spec, o.cell);
      emit(base + ".cell" + std::to_string(o.cell) + ".occupancy.csv", occupancy_csv(d));
      emit(base + ".cell" + std::to_string(o.cell) + ".timeline.csv", timeline_csv(d));
    }
  }
  emit(base + ".summary.json", summary_json(r).dump(2) + "\n");
  return written;
}

}  // namespace specrl::sweep
