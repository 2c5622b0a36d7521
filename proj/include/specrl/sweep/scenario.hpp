// Copyright 2026 The specrl Authors.
// SPDX-License-Identifier: Apache-2.0

// Scenario sweeps: a base configuration, axes of patches applied to it, and
// the cell-by-cell composition cost model -> rollout simulation -> pipeline
// schedule.
//
// Scenario file layout:
//   {
//     "name": "...", "description": "...", "seed": 1,
//     "max_cells": 10000,
//     "base": { configuration overrides },
//     "axes": [ {"path": "speculation.draft_length", "values": [1, 2, 3]},
//               {"path": "", "name": "workload", "labels": [...],
//                "values": [ {patch}, {patch} ]} ],
//     "outputs": [ {"kind": "table"},
//                  {"kind": "heatmap", "x": "...", "y": "...", "value": "rollout_speedup"},
//                  {"kind": "stage_table"}, {"kind": "curve", "cell": 0} ]
//   }
//
// An axis value replaces the node at `path`; object values are merged into
// it instead. The empty path addresses the whole configuration.

#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iomanip>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "specrl/analytic/models.hpp"
#include "specrl/core/error.hpp"
#include "specrl/core/random.hpp"
#include "specrl/cost/roofline.hpp"
#include "specrl/pipeline/scheduler.hpp"
#include "specrl/rollout/simulator.hpp"
#include "specrl/sweep/config.hpp"
#include "specrl/version.hpp"

namespace specrl::sweep {

struct Axis {
  std::string path;  // dotted; "" is the root
  std::string name;  // column header
  std::vector<json> values;
  std::vector<std::string> labels;
};

struct OutputRequest {
  std::string kind;  // table | heatmap | stage_table | curve
  std::string x, y, value;
  std::size_t cell = 0;
};

struct ScenarioSpec {
  std::string name = "scenario";
  std::string description;
  std::uint64_t seed = 0;
  std::size_t max_cells = 10000;
  json base;  // defaults merged, profiles resolved
  std::vector<Axis> axes;
  std::vector<OutputRequest> outputs;

  [[nodiscard]] std::size_t cell_count() const {
    std::size_t n = 1;
    for (const auto& a : axes) n *= a.values.size();
    return n;
  }
};

/// Numeric per-cell fields addressable by heatmaps.
inline const std::vector<std::string>& numeric_fields() {
  static const std::vector<std::string> names{
      "alpha",       "alpha_realized",   "rollout_speedup", "e2e_speedup",   "gen_ar_s",
      "gen_spec_s",  "step_ar_s",        "step_spec_s",     "exposed_gen_ar_s", "exposed_gen_s",
      "gen_share",   "amdahl_bound"};
  return names;
}

namespace detail {

inline json::json_pointer to_pointer(const std::string& dotted) {
  if (dotted.empty()) return json::json_pointer("");
  std::string p = "/" + dotted;
  std::replace(p.begin(), p.end(), '.', '/');
  return json::json_pointer(p);
}

inline std::string compact_label(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  return v.dump();
}

inline void apply_axis_value(json& config, const Axis& axis, const json& value) {
  if (axis.path.empty()) {
    merge_into(config, value);
    return;
  }
  json& node = config[to_pointer(axis.path)];
  if (node.is_object() && value.is_object())
    merge_into(node, value);
  else
    node = value;
}

inline std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string hex64(std::uint64_t x) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << x;
  return os.str();
}

}  // namespace detail

/// Parses a scenario document; every violation is reported, including
/// per-cell configuration errors for sweeps up to max_cells.
inline ScenarioSpec load_scenario(const json& doc, std::optional<std::size_t> max_cells_override = std::nullopt) {
  Violations v;
  ScenarioSpec spec;
  if (!doc.is_object()) throw ConfigError({"scenario: must be an object"});
  if (doc.contains("name")) {
    if (doc["name"].is_string() && !doc["name"].get<std::string>().empty())
      spec.name = doc["name"].get<std::string>();
    else
      v.add("name", "must be a nonempty string");
  }
  if (doc.contains("description") && doc["description"].is_string()) spec.description = doc["description"];
  if (doc.contains("seed")) {
    if (doc["seed"].is_number_unsigned() || (doc["seed"].is_number_integer() && doc["seed"].get<long long>() >= 0))
      spec.seed = doc["seed"].get<std::uint64_t>();
    else
      v.add("seed", "must be a nonnegative integer");
  }
  if (doc.contains("max_cells")) {
    if (doc["max_cells"].is_number_integer() && doc["max_cells"].get<long long>() > 0)
      spec.max_cells = doc["max_cells"].get<std::size_t>();
    else
      v.add("max_cells", "must be a positive integer");
  }
  if (max_cells_override) spec.max_cells = *max_cells_override;

  spec.base = default_config();
  if (doc.contains("base")) {
    if (doc["base"].is_object())
      merge_into(spec.base, doc["base"]);
    else
      v.add("base", "must be an object");
  }
  resolve_profiles(spec.base, v);

  if (doc.contains("axes")) {
    if (!doc["axes"].is_array()) {
      v.add("axes", "must be an array");
    } else {
      for (std::size_t i = 0; i < doc["axes"].size(); ++i) {
        const json& a = doc["axes"][i];
        const std::string where = "axes[" + std::to_string(i) + "]";
        if (!a.is_object() || !a.contains("path") || !a["path"].is_string()) {
          v.add(where, "needs a string 'path'");
          continue;
        }
        Axis axis;
        axis.path = a["path"].get<std::string>();
        axis.name = a.contains("name") && a["name"].is_string() ? a["name"].get<std::string>()
                                                                : (axis.path.empty() ? "case" : axis.path);
        if (!axis.path.empty() && !spec.base.contains(detail::to_pointer(axis.path))) {
          v.add(where + ".path", "'" + axis.path + "' does not name an existing configuration path");
        }
        if (!a.contains("values") || !a["values"].is_array() || a["values"].empty()) {
          v.add(where + ".values", "must be a nonempty array");
          continue;
        }
        for (const auto& x : a["values"]) axis.values.push_back(x);
        if (a.contains("labels")) {
          if (!a["labels"].is_array() || a["labels"].size() != axis.values.size()) {
            v.add(where + ".labels", "must have one label per value");
          } else {
            for (const auto& l : a["labels"]) axis.labels.push_back(detail::compact_label(l));
          }
        }
        if (axis.labels.empty())
          for (const auto& x : axis.values) axis.labels.push_back(detail::compact_label(x));
        for (const auto& other : spec.axes)
          if (other.name == axis.name) v.add(where + ".name", "duplicate axis name '" + axis.name + "'");
        spec.axes.push_back(std::move(axis));
      }
    }
  }

  if (doc.contains("outputs")) {
    if (!doc["outputs"].is_array()) {
      v.add("outputs", "must be an array");
    } else {
      for (std::size_t i = 0; i < doc["outputs"].size(); ++i) {
        const json& o = doc["outputs"][i];
        const std::string where = "outputs[" + std::to_string(i) + "]";
        if (!o.is_object() || !o.contains("kind") || !o["kind"].is_string()) {
          v.add(where, "needs a string 'kind'");
          continue;
        }
        OutputRequest req;
        req.kind = o["kind"];
        if (req.kind == "heatmap") {
          for (const char* key : {"x", "y", "value"}) {
            if (!o.contains(key) || !o[key].is_string()) v.add(where + "." + key, "required for heatmaps");
          }
          if (o.contains("x") && o["x"].is_string()) req.x = o["x"];
          if (o.contains("y") && o["y"].is_string()) req.y = o["y"];
          if (o.contains("value") && o["value"].is_string()) req.value = o["value"];
          const auto& f = numeric_fields();
          if (!req.value.empty() && std::find(f.begin(), f.end(), req.value) == f.end())
            v.add(where + ".value", "'" + req.value + "' is not a numeric cell field");
        } else if (req.kind == "curve") {
          if (o.contains("cell")) {
            if (o["cell"].is_number_integer() && o["cell"].get<long long>() >= 0)
              req.cell = o["cell"].get<std::size_t>();
            else
              v.add(where + ".cell", "must be a nonnegative integer");
          }
        } else if (req.kind != "table" && req.kind != "stage_table") {
          v.add(where + ".kind", "'" + req.kind + "' is not one of {table, heatmap, stage_table, curve}");
        }
        spec.outputs.push_back(req);
      }
    }
  }
  if (spec.outputs.empty()) spec.outputs.push_back({"table", "", "", "", 0});

  const std::size_t n = spec.cell_count();
  if (n > spec.max_cells) {
    v.add("axes", "cross product has " + std::to_string(n) + " cells, above max_cells = " +
                      std::to_string(spec.max_cells) + " (raise max_cells to override)");
  }
  for (const auto& o : spec.outputs) {
    if (o.kind == "curve" && o.cell >= n) v.add("outputs", "curve cell index out of range");
    if (o.kind != "heatmap" || o.x.empty() || o.y.empty()) continue;
    bool has_x = false, has_y = false;
    for (const auto& a : spec.axes) {
      if (a.name == o.x) has_x = true;
      else if (a.name == o.y) has_y = true;
      else if (a.values.size() > 1)
        v.add("outputs", "heatmap over (" + o.x + ", " + o.y + ") needs every other axis to be single-valued; '" +
                             a.name + "' is not");
    }
    if (!has_x) v.add("outputs", "heatmap x '" + o.x + "' is not an axis name");
    if (!has_y) v.add("outputs", "heatmap y '" + o.y + "' is not an axis name");
  }
  v.throw_if_any();

  // Per-cell configuration checks; the same message is reported once.
  std::vector<std::string> seen;
  for (std::size_t i = 0; i < n; ++i) {
    json config = spec.base;
    std::size_t rem = i;
    for (std::size_t a = spec.axes.size(); a-- > 0;) {
      const auto& axis = spec.axes[a];
      detail::apply_axis_value(config, axis, axis.values[rem % axis.values.size()]);
      rem /= axis.values.size();
    }
    try {
      parse_cell_config(config);
    } catch (const ConfigError& e) {
      for (const auto& msg : e.violations())
        if (std::find(seen.begin(), seen.end(), msg) == seen.end()) seen.push_back(msg);
    }
  }
  v.merge(seen);
  v.throw_if_any();
  return spec;
}

inline ScenarioSpec load_scenario_file(const std::filesystem::path& path,
                                       std::optional<std::size_t> max_cells_override = std::nullopt) {
  return load_scenario(read_json_file(path), max_cells_override);
}

// ---------------------------------------------------------------------------

struct CellRecord {
  std::size_t index = 0;
  std::vector<std::size_t> coords;
  std::vector<std::string> labels;
  bool feasible = true;
  std::string reason;

  std::optional<std::size_t> draft_length;
  std::optional<double> alpha;  // configured acceptance length
  std::optional<double> alpha_realized;  // tokens per cycle, simulated cells
  std::size_t concurrency = 1;
  std::size_t instances = 0;
  std::size_t gpus_per_instance = 0;

  double rollout_speedup = 1.0;
  double e2e_speedup = 1.0;
  double gen_ar_s = 0.0;
  double gen_spec_s = 0.0;
  double step_ar_s = 0.0;
  double step_spec_s = 0.0;
  double exposed_gen_ar_s = 0.0;
  double exposed_gen_s = 0.0;
  double gen_share = 0.0;  // exposed generation over step time, baseline
  double amdahl_bound = 1.0;
  bool tokens_conserved = true;

  std::optional<analytic::StageTimes> stages_ar;
  std::optional<analytic::StageTimes> stages_spec;
};

/// Heavy per-cell artifacts, produced on request.
struct CellDetail {
  std::optional<rollout::RolloutComparison> rollout;
  pipeline::StepTrace trace_ar;
  pipeline::StepTrace trace_spec;
};

namespace detail {

inline analytic::StageTimes with_generation(const NonGenerationTimes& ng, double gen_s) {
  return {ng.data_s, ng.prepare_s, gen_s, ng.logprob_s, ng.train_s};
}

inline NonGenerationTimes from_share(double gen_ar_s, double share) {
  const auto& w = kNonGenerationSplit;
  const double total = gen_ar_s * (1.0 - share) / share;
  const double sum = w.data_s + w.prepare_s + w.logprob_s + w.train_s;
  return {total * w.data_s / sum, total * w.prepare_s / sum, total * w.logprob_s / sum, total * w.train_s / sum};
}

inline pipeline::PipelineConfig pipeline_config(const PipelineSettings& p, std::size_t concurrency) {
  pipeline::PipelineConfig c;
  c.mode = p.mode;
  c.max_policy_lag = p.max_policy_lag;
  c.num_steps = p.num_steps;
  c.warmup_steps = p.warmup_steps;
  c.weight_transfer_s = p.weight_transfer_s;
  c.gen_nodes = std::max<std::size_t>(1, concurrency);
  c.train_nodes = 1;
  c.nodes_per_rollout = concurrency > 1 ? 1 : 0;
  return c;
}

}  // namespace detail

/// Evaluates one configuration. Capacity and layout failures, and
/// acceptance lengths above k+1, mark the cell infeasible.
inline CellRecord evaluate_cell(const json& config, std::uint64_t cell_seed, CellDetail* detail_out = nullptr) {
  CellRecord r;
  const CellConfig c = parse_cell_config(config);

  if (c.replay) {
    const auto& rp = *c.replay;
    r.stages_ar = rp.ar;
    r.stages_spec = rp.spec;
    r.alpha = rp.acceptance_length;
    r.gen_ar_s = rp.ar.gen_s;
    r.gen_spec_s = rp.spec.gen_s;
    r.rollout_speedup = rp.spec.gen_s > 0 ? rp.ar.gen_s / rp.spec.gen_s : 1.0;
    r.step_ar_s = rp.ar.total();
    r.step_spec_s = rp.spec.total();
    r.e2e_speedup = analytic::step_speedup(rp.ar, rp.spec);
    r.exposed_gen_ar_s = rp.ar.gen_s;
    r.exposed_gen_s = rp.spec.gen_s;
    r.gen_share = analytic::generation_share(rp.ar);
    r.amdahl_bound = analytic::amdahl_step_bound(r.gen_share, rp.acceptance_length.value_or(r.rollout_speedup));
    if (detail_out) {
      pipeline::PipelineConfig pc;
      pc.num_steps = 1;
      pc.warmup_steps = 0;
      const std::vector<analytic::StageTimes> a{rp.ar}, s{rp.spec};
      detail_out->trace_ar = pipeline::run_sync(pc, a);
      detail_out->trace_spec = pipeline::run_sync(pc, s);
    }
    return r;
  }

  const auto& sp = c.speculation;
  if (sp.enabled && c.generation.simulate) {
    r.draft_length = sp.draft_length;
    r.alpha = sp.nominal_alpha();
    if (!sp.feasible()) {
      r.feasible = false;
      std::ostringstream os;
      os << "acceptance length " << *r.alpha << " exceeds draft length + 1 = " << sp.draft_length + 1;
      r.reason = os.str();
      return r;
    }
  }

  Deployment dep;
  if (c.generation.simulate) {
    try {
      dep = resolve_deployment(c);
    } catch (const CapacityError& e) {
      r.feasible = false;
      r.reason = std::string("capacity: ") + e.what();
      return r;
    } catch (const std::invalid_argument& e) {
      r.feasible = false;
      r.reason = e.what();
      return r;
    }
    r.concurrency = dep.concurrency;
    r.instances = dep.instances;
    r.gpus_per_instance = dep.plan.gpus_per_instance;

    const cost::RooflineCost cost(c.hardware, c.model, dep.plan, c.traffic.prompt_tokens,
                                  cost::CostParams{c.sharding.expert_spread_factor});
    rollout::RolloutPlan plan{c.traffic.global_batch, dep.instances, std::nullopt};
    const Philox rng(cell_seed);
    if (sp.enabled) {
      plan.speculation = sp.to_config();
      auto cmp = rollout::compare_rollout(plan, c.traffic.lengths, cost, rng);
      r.gen_ar_s = cmp.baseline.rollout_latency;
      r.gen_spec_s = cmp.speculative.rollout_latency;
      r.alpha_realized = cmp.speculative.mean_alpha;
      r.tokens_conserved = cmp.baseline.total_emitted == cmp.baseline.total_length &&
                           cmp.speculative.total_emitted == cmp.speculative.total_length;
      if (detail_out) detail_out->rollout = std::move(cmp);
    } else {
      Philox length_rng = rng.substream(rollout::kLengthStream);
      const auto lengths = rollout::sample_lengths(c.traffic.lengths, plan.global_batch, length_rng);
      auto res = rollout::simulate_rollout_lengths(plan, lengths, cost, rng);
      r.gen_ar_s = r.gen_spec_s = res.rollout_latency;
      r.tokens_conserved = res.total_emitted == res.total_length;
      if (detail_out) {
        rollout::RolloutComparison cmp;
        cmp.baseline = res;
        cmp.speculative = std::move(res);
        detail_out->rollout = std::move(cmp);
      }
    }
  } else {
    r.gen_ar_s = c.generation.ar_s;
    r.gen_spec_s = sp.enabled ? c.generation.ar_s / c.generation.speedup : c.generation.ar_s;
    r.concurrency = c.pipeline.concurrency > 0 ? c.pipeline.concurrency : 1;
  }
  r.rollout_speedup = r.gen_spec_s > 0 ? r.gen_ar_s / r.gen_spec_s : 1.0;

  // Non-generation stages.
  NonGenerationTimes ng;
  double gen_ar_stage = r.gen_ar_s;
  double gen_spec_stage = r.gen_spec_s;
  if (c.pipeline.non_generation) {
    ng = *c.pipeline.non_generation;
  } else if (c.pipeline.generation_share) {
    ng = detail::from_share(r.gen_ar_s, *c.pipeline.generation_share);
  } else if (c.pipeline.calibrate_effective_step_s) {
    const auto cal = pipeline::calibrate_async_overlap(*c.pipeline.calibrate_exposed_gen_s,
                                                       *c.pipeline.calibrate_effective_step_s,
                                                       c.pipeline.weight_transfer_s);
    const auto& w = kNonGenerationSplit;
    const auto split = pipeline::split_stages(cal.gen_side_s, cal.train_side_s, w.logprob_s, w.train_s, w.prepare_s);
    ng = {0.0, split.prepare_s, split.logprob_s, split.train_s};
    gen_ar_stage = cal.gen_side_s;
    gen_spec_stage = cal.gen_side_s / (sp.enabled ? c.generation.speedup : 1.0);
  }

  const auto pc = detail::pipeline_config(c.pipeline, r.concurrency);
  const std::vector<analytic::StageTimes> ar{detail::with_generation(ng, gen_ar_stage)};
  const std::vector<analytic::StageTimes> on{detail::with_generation(ng, gen_spec_stage)};
  auto trace_ar = pipeline::run(pc, ar);
  auto trace_spec = pipeline::run(pc, on);
  r.stages_ar = ar.front();
  r.stages_spec = on.front();
  r.step_ar_s = trace_ar.effective_step_s();
  r.step_spec_s = trace_spec.effective_step_s();
  r.exposed_gen_ar_s = trace_ar.steady_exposed_gen_s();
  r.exposed_gen_s = trace_spec.steady_exposed_gen_s();
  r.e2e_speedup = r.step_spec_s > 0 ? r.step_ar_s / r.step_spec_s : 1.0;
  r.gen_share = r.step_ar_s > 0 ? std::clamp(r.exposed_gen_ar_s / r.step_ar_s, 0.0, 1.0) : 0.0;
  if (c.pipeline.mode == pipeline::Mode::kAsyncNonColocated) {
    // Overlap can hide generation completely, so only the infinite-speedup
    // limit on the exposed share bounds the step.
    r.amdahl_bound = r.gen_share < 1.0 ? 1.0 / (1.0 - r.gen_share) : std::numeric_limits<double>::infinity();
  } else {
    const double ceiling = !sp.enabled ? 1.0 : c.generation.simulate ? r.alpha.value_or(1.0) : c.generation.speedup;
    r.amdahl_bound = analytic::amdahl_step_bound(r.gen_share, std::max(1.0, ceiling));
  }
  if (detail_out) {
    detail_out->trace_ar = std::move(trace_ar);
    detail_out->trace_spec = std::move(trace_spec);
  }
  return r;
}

inline std::optional<double> field_value(const CellRecord& c, const std::string& name) {
  if (!c.feasible) return std::nullopt;
  if (name == "alpha") return c.alpha;
  if (name == "alpha_realized") return c.alpha_realized;
  if (name == "rollout_speedup") return c.rollout_speedup;
  if (name == "e2e_speedup") return c.e2e_speedup;
  if (name == "gen_ar_s") return c.gen_ar_s;
  if (name == "gen_spec_s") return c.gen_spec_s;
  if (name == "step_ar_s") return c.step_ar_s;
  if (name == "step_spec_s") return c.step_spec_s;
  if (name == "exposed_gen_ar_s") return c.exposed_gen_ar_s;
  if (name == "exposed_gen_s") return c.exposed_gen_s;
  if (name == "gen_share") return c.gen_share;
  if (name == "amdahl_bound") return c.amdahl_bound;
  return std::nullopt;
}

// ---------------------------------------------------------------------------

struct Provenance {
  std::string config_hash;
  std::uint64_t seed = 0;
  std::string tool_version = kVersion;
};

struct SweepResult {
  std::string name;
  std::string description;
  std::vector<Axis> axes;
  std::vector<CellRecord> cells;  // row-major over axes
  Provenance provenance;
};

/// Configuration of cell `index` (row-major, last axis fastest).
inline json cell_config(const ScenarioSpec& spec, std::size_t index, std::vector<std::size_t>* coords = nullptr) {
  json config = spec.base;
  std::vector<std::size_t> c(spec.axes.size());
  std::size_t rem = index;
  for (std::size_t a = spec.axes.size(); a-- > 0;) {
    c[a] = rem % spec.axes[a].values.size();
    rem /= spec.axes[a].values.size();
  }
  for (std::size_t a = 0; a < spec.axes.size(); ++a) detail::apply_axis_value(config, spec.axes[a], spec.axes[a].values[c[a]]);
  if (coords) *coords = c;
  return config;
}

/// Every cell runs on the scenario seed (common random numbers): cells see
/// the same sampled lengths, and results do not depend on cell order.
inline std::uint64_t cell_seed(const ScenarioSpec& spec) { return spec.seed; }

inline std::string config_hash(const ScenarioSpec& spec) {
  json canon{{"name", spec.name}, {"seed", spec.seed}, {"base", spec.base}};
  json axes = json::array();
  for (const auto& a : spec.axes) axes.push_back({{"path", a.path}, {"name", a.name}, {"values", a.values}});
  canon["axes"] = axes;
  return detail::hex64(detail::fnv1a(canon.dump()));
}

/// Evaluates every cell; `threads` only changes wall time.
inline SweepResult run_scenario(const ScenarioSpec& spec, std::size_t threads = 1) {
  SweepResult out;
  out.name = spec.name;
  out.description = spec.description;
  out.axes = spec.axes;
  out.provenance = {config_hash(spec), spec.seed, kVersion};
  const std::size_t n = spec.cell_count();
  out.cells.resize(n);
  rollout::detail::parallel_for(n, threads, [&](std::size_t i) {
    std::vector<std::size_t> coords;
    const json config = cell_config(spec, i, &coords);
    CellRecord r = evaluate_cell(config, cell_seed(spec));
    r.index = i;
    r.coords = coords;
    for (std::size_t a = 0; a < coords.size(); ++a) r.labels.push_back(spec.axes[a].labels[coords[a]]);
    out.cells[i] = std::move(r);
  });
  return out;
}

inline CellDetail cell_detail(const ScenarioSpec& spec, std::size_t index) {
  std::vector<std::size_t> coords;
  const json config = cell_config(spec, index, &coords);
  CellDetail d;
  evaluate_cell(config, cell_seed(spec), &d);
  return d;
}

/// Violations of the dilution and Amdahl cross-checks over feasible cells:
/// e2e lies between 1 and the rollout speedup, and never exceeds the
/// step bound at the effective generation share.
inline std::vector<std::string> cross_check(const SweepResult& result, double tol = 1e-9) {
  std::vector<std::string> out;
  for (const auto& c : result.cells) {
    if (!c.feasible) continue;
    const double lo = std::min(1.0, c.rollout_speedup) - tol;
    const double hi = std::max(1.0, c.rollout_speedup) + tol;
    std::string where = "cell " + std::to_string(c.index);
    for (std::size_t a = 0; a < c.labels.size(); ++a) where += " " + result.axes[a].name + "=" + c.labels[a];
    if (c.e2e_speedup < lo || c.e2e_speedup > hi) out.push_back(where + ": e2e outside [1, rollout speedup]");
    if (c.e2e_speedup > c.amdahl_bound * (1.0 + tol)) out.push_back(where + ": e2e above the step bound");
    if (!c.tokens_conserved) out.push_back(where + ": token conservation failed");
  }
  return out;
}

// ---------------------------------------------------------------------------
// Presets.

inline std::filesystem::path presets_dir() { return data_dir() / "presets"; }

inline std::vector<std::string> list_presets() {
  std::vector<std::string> names;
  std::error_code ec;
  for (const auto& e : std::filesystem::directory_iterator(presets_dir(), ec)) {
    if (e.path().extension() == ".json") names.push_back(e.path().stem().string());
  }
  std::sort(names.begin(), names.end());
  return names;
}

/// A path to an existing file, or the name of a shipped preset.
inline std::filesystem::path resolve_scenario_ref(const std::string& ref) {
  if (std::filesystem::exists(ref)) return ref;
  const auto preset = presets_dir() / (ref + ".json");
  if (std::filesystem::exists(preset)) return preset;
  throw ConfigError({ref + ": no such scenario file or preset"});
}

}  // namespace specrl::sweep
