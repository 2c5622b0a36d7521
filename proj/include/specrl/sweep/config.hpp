// Copyright 2026 The specrl Authors.
// SPDX-License-Identifier: Apache-2.0

// Typed view of one experiment configuration.
//
// A configuration is a JSON tree with sections hardware, model, sharding,
// deployment, traffic, speculation, pipeline, generation and replay. Every
// section has defaults (default_config()); hardware and model may name a
// shipped profile instead of spelling out the numbers. Parsing collects
// every violation with its path before failing.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "specrl/analytic/models.hpp"
#include "specrl/core/error.hpp"
#include "specrl/cost/roofline.hpp"
#include "specrl/pipeline/scheduler.hpp"
#include "specrl/rollout/lengths.hpp"
#include "specrl/rollout/simulator.hpp"

#ifndef SPECRL_DEFAULT_DATA_DIR
#define SPECRL_DEFAULT_DATA_DIR "data"
#endif

namespace specrl::sweep {

using json = nlohmann::json;

/// Root of shipped profiles and presets; SPECRL_DATA_DIR overrides.
inline std::filesystem::path data_dir() {
  if (const char* env = std::getenv("SPECRL_DATA_DIR"); env != nullptr && *env != '\0') return env;
  return SPECRL_DEFAULT_DATA_DIR;
}

inline json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError({path.string() + ": cannot open file"});
  try {
    return json::parse(in, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::parse_error& e) {
    throw ConfigError({path.string() + ": " + e.what()});
  }
}

/// Collects violations as "path: message".
class Violations {
 public:
  void add(const std::string& path, const std::string& message) { list_.push_back(path + ": " + message); }
  void merge(const std::vector<std::string>& other) { list_.insert(list_.end(), other.begin(), other.end()); }
  [[nodiscard]] bool empty() const noexcept { return list_.empty(); }
  [[nodiscard]] const std::vector<std::string>& list() const noexcept { return list_; }
  void throw_if_any() const {
    if (!list_.empty()) throw ConfigError(list_);
  }

 private:
  std::vector<std::string> list_;
};

inline json default_config() {
  return json::parse(R"({
    "hardware": "gb200_bf16",
    "model": "qwen3_8b",
    "sharding": {
      "gpus_per_instance": 0,
      "tensor_parallel": 0,
      "pipeline_parallel": 0,
      "expert_parallel": 0,
      "penalty": 0.04,
      "expert_spread_factor": 8.0
    },
    "deployment": {
      "total_gpus": 32,
      "min_local_batch": 128,
      "min_gpus_per_instance": 1,
      "max_gpus_per_instance": 64,
      "max_seqs_per_gpu": 128
    },
    "traffic": {
      "distribution": "lognormal",
      "median_tokens": 2000,
      "p99_tokens": 12000,
      "mu": null,
      "sigma": null,
      "length": 1024,
      "file": "",
      "max_tokens": 32768,
      "prompt_tokens": 1024,
      "global_batch": 4096
    },
    "speculation": {
      "enabled": true,
      "draft_length": 3,
      "acceptance_model": "iid",
      "acceptance_length": 3.0,
      "beta": null,
      "accepted_counts": [],
      "draft_cost_fraction": null,
      "cycle_overhead_s": 0.0
    },
    "pipeline": {
      "mode": "sync_colocated",
      "max_policy_lag": 0,
      "num_steps": 8,
      "warmup_steps": 2,
      "weight_transfer_s": 0.0,
      "concurrency": 0,
      "non_generation": null,
      "generation_share": null,
      "calibrate": null
    },
    "generation": {
      "source": "simulate",
      "ar_s": null,
      "speedup": null
    },
    "replay": null
  })");
}

/// Deep merge where `patch` wins; unlike RFC 7396, null in the patch is
/// kept as a value rather than deleting the key.
inline void merge_into(json& target, const json& patch) {
  if (!patch.is_object() || !target.is_object()) {
    target = patch;
    return;
  }
  for (auto it = patch.begin(); it != patch.end(); ++it) {
    if (target.contains(it.key()) && target[it.key()].is_object() && it.value().is_object())
      merge_into(target[it.key()], it.value());
    else
      target[it.key()] = it.value();
  }
}

namespace detail {

inline std::filesystem::path profile_path(const std::string& ref, const std::string& section) {
  if (ref.find('/') != std::string::npos || ref.ends_with(".json")) return ref;
  return data_dir() / "profiles" / (section == "hardware" ? "hardware" : "models") / (ref + ".json");
}

}  // namespace detail

/// Replaces a profile name in `config[section]` by the named file's
/// section. Objects may carry {"profile": name, ...overrides}.
inline void resolve_profile(json& config, const std::string& section, Violations& v) {
  if (!config.contains(section)) return;
  json& node = config[section];
  std::optional<std::string> ref;
  json overrides = json::object();
  if (node.is_string()) {
    ref = node.get<std::string>();
  } else if (node.is_object() && node.contains("profile")) {
    if (!node["profile"].is_string()) {
      v.add(section + ".profile", "must be a profile name");
      return;
    }
    ref = node["profile"].get<std::string>();
    overrides = node;
    overrides.erase("profile");
  } else if (!node.is_object()) {
    v.add(section, "must be a profile name or an object");
    return;
  }
  if (!ref) return;
  const auto path = detail::profile_path(*ref, section);
  json file;
  try {
    file = read_json_file(path);
  } catch (const ConfigError& e) {
    v.add(section, "profile '" + *ref + "' not found (" + path.string() + ")");
    return;
  }
  if (!file.contains(section) || !file[section].is_object()) {
    v.add(section, "profile file " + path.string() + " has no '" + section + "' section");
    return;
  }
  json resolved = file[section];
  merge_into(resolved, overrides);
  node = resolved;
}

inline void resolve_profiles(json& config, Violations& v) {
  resolve_profile(config, "hardware", v);
  resolve_profile(config, "model", v);
}

// ---------------------------------------------------------------------------
// Field readers. Each reports into Violations and returns a usable default.

class Section {
 public:
  Section(const json& root, std::string name, Violations& v) : name_(std::move(name)), v_(v) {
    if (!root.contains(name_) || !root[name_].is_object()) {
      v_.add(name_, "missing section");
      node_ = json::object();
    } else {
      node_ = root[name_];
    }
  }

  [[nodiscard]] std::string path(const std::string& key) const { return name_ + "." + key; }
  [[nodiscard]] bool has(const std::string& key) const { return node_.contains(key) && !node_[key].is_null(); }
  [[nodiscard]] const json& raw(const std::string& key) const { return node_[key]; }

  double number(const std::string& key, double fallback = 0.0) const {
    if (!has(key)) {
      v_.add(path(key), "required number is missing");
      return fallback;
    }
    if (!node_[key].is_number()) {
      v_.add(path(key), "must be a number");
      return fallback;
    }
    const double x = node_[key].get<double>();
    if (!std::isfinite(x)) v_.add(path(key), "must be finite");
    return x;
  }

  double positive(const std::string& key) const {
    const double x = number(key, 1.0);
    if (!(x > 0)) v_.add(path(key), "must be > 0");
    return x > 0 ? x : 1.0;
  }

  double nonnegative(const std::string& key) const {
    const double x = number(key, 0.0);
    if (!(x >= 0)) v_.add(path(key), "must be >= 0");
    return x >= 0 ? x : 0.0;
  }

  std::optional<double> optional_number(const std::string& key) const {
    if (!has(key)) return std::nullopt;
    return number(key);
  }

  std::size_t count(const std::string& key, std::size_t min_value = 0) const {
    if (!has(key)) {
      v_.add(path(key), "required integer is missing");
      return min_value;
    }
    const json& j = node_[key];
    if (!j.is_number_integer() && !(j.is_number_float() && std::floor(j.get<double>()) == j.get<double>())) {
      v_.add(path(key), "must be an integer");
      return min_value;
    }
    const double x = j.get<double>();
    if (x < static_cast<double>(min_value)) {
      v_.add(path(key), "must be >= " + std::to_string(min_value));
      return min_value;
    }
    return static_cast<std::size_t>(x);
  }

  std::string string(const std::string& key, const std::vector<std::string>& allowed = {}) const {
    if (!has(key) || !node_[key].is_string()) {
      v_.add(path(key), "must be a string");
      return allowed.empty() ? std::string() : allowed.front();
    }
    auto s = node_[key].get<std::string>();
    if (!allowed.empty() && std::find(allowed.begin(), allowed.end(), s) == allowed.end()) {
      std::string opts;
      for (const auto& a : allowed) opts += (opts.empty() ? "" : ", ") + a;
      v_.add(path(key), "'" + s + "' is not one of {" + opts + "}");
      return allowed.front();
    }
    return s;
  }

  bool boolean(const std::string& key) const {
    if (!has(key) || !node_[key].is_boolean()) {
      v_.add(path(key), "must be true or false");
      return false;
    }
    return node_[key].get<bool>();
  }

  Violations& violations() const { return v_; }

 private:
  std::string name_;
  json node_;
  Violations& v_;
};

// ---------------------------------------------------------------------------

struct ShardingSettings {
  std::size_t gpus_per_instance = 0;  // 0: chosen by the deployment rule
  std::size_t tensor_parallel = 0;    // all three 0: chosen automatically
  std::size_t pipeline_parallel = 0;
  std::size_t expert_parallel = 0;
  double penalty = 0.04;
  double expert_spread_factor = 8.0;
};

struct DeploymentSettings {
  std::size_t total_gpus = 32;
  std::size_t min_local_batch = 128;
  std::size_t min_gpus_per_instance = 1;
  std::size_t max_gpus_per_instance = 64;
  std::size_t max_seqs_per_gpu = 128;
};

struct TrafficSettings {
  rollout::LengthDistribution lengths;
  std::size_t prompt_tokens = 1024;
  std::size_t global_batch = 4096;
};

struct SpeculationSettings {
  bool enabled = true;
  std::size_t draft_length = 3;
  std::string acceptance_model = "iid";
  std::optional<double> acceptance_length;
  std::optional<double> beta;
  std::vector<std::uint32_t> accepted_counts;
  double draft_cost_fraction = 0.0;
  double cycle_overhead_s = 0.0;

  /// Configured mean tokens per cycle.
  [[nodiscard]] double nominal_alpha() const {
    if (acceptance_model == "iid")
      return acceptance_length ? *acceptance_length : analytic::expected_alpha_iid(beta.value_or(0.0), draft_length);
    if (acceptance_model == "fixed") return acceptance_length.value_or(1.0);
    return analytic::mean_alpha(analytic::EmpiricalAcceptance{accepted_counts}, draft_length);
  }

  [[nodiscard]] bool feasible() const { return nominal_alpha() <= static_cast<double>(draft_length) + 1.0 + 1e-12; }

  /// Acceptance law; only meaningful for feasible settings.
  [[nodiscard]] rollout::SpeculationConfig to_config() const {
    analytic::AcceptanceModel law = analytic::FixedAcceptance{1.0};
    if (acceptance_model == "iid") {
      const double b = acceptance_length
                         ? analytic::invert_alpha_to_beta(std::min(*acceptance_length, static_cast<double>(draft_length) + 1.0), draft_length)
                         : *beta;
      law = analytic::IidAcceptance{b};
    } else if (acceptance_model == "fixed") {
      law = analytic::FixedAcceptance{*acceptance_length};
    } else {
      law = analytic::EmpiricalAcceptance{accepted_counts};
    }
    return {draft_length, law, draft_cost_fraction, cycle_overhead_s};
  }
};

struct NonGenerationTimes {
  double data_s = 0.0;
  double prepare_s = 0.0;
  double logprob_s = 0.0;
  double train_s = 0.0;
};

/// Proportions used when only a generation share is configured.
inline constexpr NonGenerationTimes kNonGenerationSplit{0.3, 2.1, 17.9, 31.4};

struct PipelineSettings {
  pipeline::Mode mode = pipeline::Mode::kSyncColocated;
  std::size_t max_policy_lag = 0;
  std::size_t num_steps = 8;
  std::size_t warmup_steps = 2;
  double weight_transfer_s = 0.0;
  std::size_t concurrency = 0;  // 0: derived from lag and deployment
  std::optional<NonGenerationTimes> non_generation;
  std::optional<double> generation_share;
  std::optional<double> calibrate_exposed_gen_s;
  std::optional<double> calibrate_effective_step_s;
};

struct GenerationSettings {
  bool simulate = true;
  double ar_s = 0.0;
  double speedup = 1.0;
};

struct ReplaySettings {
  analytic::StageTimes ar;
  analytic::StageTimes spec;
  std::optional<double> acceptance_length;
};

struct CellConfig {
  cost::HardwareProfile hardware;
  cost::ModelProfile model;
  ShardingSettings sharding;
  DeploymentSettings deployment;
  TrafficSettings traffic;
  SpeculationSettings speculation;
  PipelineSettings pipeline;
  GenerationSettings generation;
  std::optional<ReplaySettings> replay;
};

namespace detail {

inline cost::HardwareProfile parse_hardware(const json& root, Violations& v) {
  const Section s(root, "hardware", v);
  cost::HardwareProfile hw;
  hw.gpu_name = s.has("gpu_name") ? s.string("gpu_name") : std::string("unnamed");
  hw.hbm_bandwidth_bytes_per_s = s.positive("hbm_bandwidth_bytes_per_s");
  hw.peak_flops_per_s = s.positive("peak_flops_per_s");
  hw.hbm_capacity_bytes = s.positive("hbm_capacity_bytes");
  hw.interconnect_bandwidth_bytes_per_s = s.positive("interconnect_bandwidth_bytes_per_s");
  hw.per_layer_comm_latency_s = s.positive("per_layer_comm_latency_s");
  return hw;
}

inline cost::ModelProfile parse_model(const json& root, Violations& v) {
  const Section s(root, "model", v);
  cost::ModelProfile m;
  m.name = s.has("name") ? s.string("name") : std::string("unnamed");
  m.total_params = s.positive("total_params");
  m.active_params_per_token = s.positive("active_params_per_token");
  if (m.active_params_per_token > m.total_params)
    v.add("model.active_params_per_token", "must be <= total_params");
  m.num_layers = s.count("num_layers", 1);
  m.hidden_size = s.count("hidden_size", 1);
  m.bytes_per_param = s.count("bytes_per_param", 1);
  if (m.bytes_per_param != 1 && m.bytes_per_param != 2 && m.bytes_per_param != 4)
    v.add("model.bytes_per_param", "must be 1, 2 or 4");
  m.draft_cost_fraction = s.has("draft_cost_fraction") ? s.nonnegative("draft_cost_fraction") : 0.0;
  return m;
}

inline ShardingSettings parse_sharding(const json& root, Violations& v) {
  const Section s(root, "sharding", v);
  ShardingSettings out;
  out.gpus_per_instance = s.count("gpus_per_instance");
  out.tensor_parallel = s.count("tensor_parallel");
  out.pipeline_parallel = s.count("pipeline_parallel");
  out.expert_parallel = s.count("expert_parallel");
  out.penalty = s.nonnegative("penalty");
  out.expert_spread_factor = s.positive("expert_spread_factor");
  const std::size_t given = (out.tensor_parallel > 0) + (out.pipeline_parallel > 0) + (out.expert_parallel > 0);
  if (given != 0 && given != 3) {
    v.add("sharding", "tensor_parallel, pipeline_parallel and expert_parallel must be all set or all 0 (auto)");
  } else if (given == 3 && out.gpus_per_instance > 0) {
    const std::size_t product = out.tensor_parallel * out.pipeline_parallel * out.expert_parallel;
    if (product != out.gpus_per_instance) {
      v.add("sharding", "tensor_parallel x pipeline_parallel x expert_parallel (" + std::to_string(product) +
                            ") != gpus_per_instance (" + std::to_string(out.gpus_per_instance) + ")");
    }
  }
  return out;
}

inline DeploymentSettings parse_deployment(const json& root, Violations& v) {
  const Section s(root, "deployment", v);
  DeploymentSettings d;
  d.total_gpus = s.count("total_gpus", 1);
  d.min_local_batch = s.count("min_local_batch", 1);
  d.min_gpus_per_instance = s.count("min_gpus_per_instance", 1);
  d.max_gpus_per_instance = s.count("max_gpus_per_instance", 1);
  d.max_seqs_per_gpu = s.count("max_seqs_per_gpu", 1);
  if (d.min_gpus_per_instance > d.max_gpus_per_instance)
    v.add("deployment.min_gpus_per_instance", "must be <= max_gpus_per_instance");
  return d;
}

inline TrafficSettings parse_traffic(const json& root, Violations& v) {
  const Section s(root, "traffic", v);
  TrafficSettings t;
  t.global_batch = s.count("global_batch", 1);
  t.prompt_tokens = s.count("prompt_tokens", 1);
  const std::size_t max_tokens = s.count("max_tokens", 1);
  t.lengths.max_tokens = static_cast<std::uint32_t>(std::min<std::size_t>(max_tokens, UINT32_MAX));
  const auto kind = s.string("distribution", {"lognormal", "constant", "empirical"});
  if (kind == "lognormal") {
    if (s.has("mu") || s.has("sigma")) {
      const double mu = s.number("mu");
      const double sigma = s.number("sigma", 1.0);
      if (!(sigma > 0)) v.add("traffic.sigma", "lognormal sigma must be > 0");
      t.lengths.kind = rollout::LognormalLengths{mu, sigma > 0 ? sigma : 1.0};
    } else {
      const double median = s.positive("median_tokens");
      const double p99 = s.positive("p99_tokens");
      if (!(p99 > median)) {
        v.add("traffic.p99_tokens", "must exceed median_tokens");
        t.lengths.kind = rollout::LognormalLengths{std::log(median), 1.0};
      } else {
        t.lengths.kind = rollout::lognormal_from_quantiles(median, p99);
      }
    }
  } else if (kind == "constant") {
    t.lengths.kind = rollout::ConstantLengths{static_cast<std::uint32_t>(s.count("length", 1))};
  } else {
    const auto file = s.string("file");
    try {
      t.lengths.kind = rollout::read_length_file(file);
    } catch (const std::exception& e) {
      v.add("traffic.file", e.what());
      t.lengths.kind = rollout::ConstantLengths{1};
    }
  }
  return t;
}

inline SpeculationSettings parse_speculation(const json& root, const cost::ModelProfile& model, Violations& v) {
  const Section s(root, "speculation", v);
  SpeculationSettings out;
  out.enabled = s.boolean("enabled");
  out.draft_length = s.count("draft_length", 1);
  out.acceptance_model = s.string("acceptance_model", {"iid", "fixed", "empirical"});
  out.cycle_overhead_s = s.nonnegative("cycle_overhead_s");
  out.draft_cost_fraction = s.has("draft_cost_fraction") ? s.nonnegative("draft_cost_fraction") : model.draft_cost_fraction;
  if (out.acceptance_model == "empirical") {
    if (!s.has("accepted_counts") || !s.raw("accepted_counts").is_array() || s.raw("accepted_counts").empty()) {
      v.add("speculation.accepted_counts", "empirical acceptance needs a nonempty array");
    } else {
      for (const auto& c : s.raw("accepted_counts")) {
        if (!c.is_number_integer() || c.get<long long>() < 0 ||
            c.get<long long>() > static_cast<long long>(out.draft_length)) {
          v.add("speculation.accepted_counts", "entries must be integers in [0, draft_length]");
          break;
        }
        out.accepted_counts.push_back(c.get<std::uint32_t>());
      }
    }
    return out;
  }
  if (s.has("beta") && out.acceptance_model == "iid") {
    out.beta = s.number("beta");
    if (!(*out.beta >= 0 && *out.beta <= 1)) v.add("speculation.beta", "must be in [0, 1]");
    if (s.has("acceptance_length")) v.add("speculation", "set either beta or acceptance_length, not both");
    return out;
  }
  out.acceptance_length = s.number("acceptance_length", 1.0);
  if (!(*out.acceptance_length >= 1.0)) v.add("speculation.acceptance_length", "must be >= 1");
  return out;
}

inline PipelineSettings parse_pipeline(const json& root, Violations& v) {
  const Section s(root, "pipeline", v);
  PipelineSettings p;
  p.mode = s.string("mode", {"sync_colocated", "async_noncolocated"}) == "sync_colocated"
               ? pipeline::Mode::kSyncColocated
               : pipeline::Mode::kAsyncNonColocated;
  p.max_policy_lag = s.count("max_policy_lag");
  p.num_steps = s.count("num_steps", 1);
  p.warmup_steps = s.count("warmup_steps");
  p.weight_transfer_s = s.nonnegative("weight_transfer_s");
  p.concurrency = s.count("concurrency");
  if (p.mode == pipeline::Mode::kAsyncNonColocated && p.max_policy_lag == 0)
    v.add("pipeline.max_policy_lag", "async_noncolocated mode needs max_policy_lag >= 1");
  if (p.mode == pipeline::Mode::kSyncColocated && p.max_policy_lag > 0)
    v.add("pipeline.max_policy_lag", "sync_colocated mode runs on-policy; max_policy_lag must be 0");
  if (p.warmup_steps >= p.num_steps) v.add("pipeline.warmup_steps", "must be < num_steps");

  std::size_t sources = 0;
  if (s.has("non_generation")) {
    ++sources;
    const json& ng = s.raw("non_generation");
    if (!ng.is_object()) {
      v.add("pipeline.non_generation", "must be an object of stage times");
    } else {
      json wrapped{{"pipeline.non_generation", ng}};
      const Section n(wrapped, "pipeline.non_generation", v);
      p.non_generation = NonGenerationTimes{n.nonnegative("data_s"), n.nonnegative("prepare_s"),
                                            n.nonnegative("logprob_s"), n.nonnegative("train_s")};
    }
  }
  if (s.has("generation_share")) {
    ++sources;
    p.generation_share = s.number("generation_share");
    if (!(*p.generation_share > 0 && *p.generation_share < 1))
      v.add("pipeline.generation_share", "must be in (0, 1)");
  }
  if (s.has("calibrate")) {
    ++sources;
    const json& c = s.raw("calibrate");
    if (!c.is_object()) {
      v.add("pipeline.calibrate", "must be an object");
    } else {
      json wrapped{{"pipeline.calibrate", c}};
      const Section n(wrapped, "pipeline.calibrate", v);
      p.calibrate_exposed_gen_s = n.nonnegative("exposed_gen_s");
      p.calibrate_effective_step_s = n.positive("effective_step_s");
      if (!(*p.calibrate_exposed_gen_s < *p.calibrate_effective_step_s))
        v.add("pipeline.calibrate", "exposed_gen_s must be < effective_step_s");
      if (p.mode != pipeline::Mode::kAsyncNonColocated)
        v.add("pipeline.calibrate", "calibration targets the async_noncolocated steady state");
    }
  }
  if (sources > 1) v.add("pipeline", "set at most one of non_generation, generation_share, calibrate");
  return p;
}

inline GenerationSettings parse_generation(const json& root, const PipelineSettings& p, Violations& v) {
  const Section s(root, "generation", v);
  GenerationSettings g;
  g.simulate = s.string("source", {"simulate", "fixed"}) == "simulate";
  if (g.simulate) {
    if (p.calibrate_effective_step_s) v.add("pipeline.calibrate", "needs generation.source = fixed");
    return g;
  }
  g.speedup = s.positive("speedup");
  if (p.calibrate_effective_step_s) {
    if (s.has("ar_s")) v.add("generation.ar_s", "is derived by pipeline.calibrate; leave it null");
    g.ar_s = *p.calibrate_effective_step_s;
  } else {
    g.ar_s = s.nonnegative("ar_s");
  }
  return g;
}

inline analytic::StageTimes parse_stage_times(const json& j, const std::string& where, Violations& v) {
  json wrapped{{where, j}};
  const Section s(wrapped, where, v);
  analytic::StageTimes t{s.nonnegative("data_s"), s.nonnegative("prepare_s"), s.nonnegative("gen_s"),
                         s.nonnegative("logprob_s"), s.nonnegative("train_s")};
  return t;
}

inline std::optional<ReplaySettings> parse_replay(const json& root, Violations& v) {
  if (!root.contains("replay") || root["replay"].is_null()) return std::nullopt;
  const json& r = root["replay"];
  if (!r.is_object()) {
    v.add("replay", "must be an object with 'ar' and 'spec' stage times");
    return std::nullopt;
  }
  ReplaySettings out;
  if (!r.contains("ar") || !r.contains("spec")) {
    v.add("replay", "needs both 'ar' and 'spec' stage times");
    return std::nullopt;
  }
  out.ar = parse_stage_times(r["ar"], "replay.ar", v);
  out.spec = parse_stage_times(r["spec"], "replay.spec", v);
  if (r.contains("acceptance_length") && !r["acceptance_length"].is_null()) {
    if (!r["acceptance_length"].is_number() || r["acceptance_length"].get<double>() < 1.0)
      v.add("replay.acceptance_length", "must be a number >= 1");
    else
      out.acceptance_length = r["acceptance_length"].get<double>();
  }
  if (!(out.ar.total() > 0) || !(out.spec.total() > 0)) v.add("replay", "step totals must be > 0");
  return out;
}

}  // namespace detail

/// Parses a full configuration (defaults already merged). Profile names are
/// resolved here. Throws ConfigError listing every violation.
inline CellConfig parse_cell_config(json config) {
  Violations v;
  resolve_profiles(config, v);
  CellConfig c;
  c.hardware = detail::parse_hardware(config, v);
  c.model = detail::parse_model(config, v);
  c.sharding = detail::parse_sharding(config, v);
  c.deployment = detail::parse_deployment(config, v);
  c.traffic = detail::parse_traffic(config, v);
  c.speculation = detail::parse_speculation(config, c.model, v);
  c.pipeline = detail::parse_pipeline(config, v);
  c.generation = detail::parse_generation(config, c.pipeline, v);
  c.replay = detail::parse_replay(config, v);
  if (c.traffic.global_batch < 1) v.add("traffic.global_batch", "must be >= 1");
  v.throw_if_any();
  return c;
}

/// Merges `overrides` onto the defaults and parses.
inline CellConfig make_cell_config(const json& overrides) {
  json config = default_config();
  merge_into(config, overrides);
  return parse_cell_config(std::move(config));
}

// ---------------------------------------------------------------------------
// Deployment rule.

struct Deployment {
  std::size_t concurrency = 1;       // rollout batches generated at once
  std::size_t gpus_per_batch = 1;
  std::size_t instances = 1;         // per batch
  cost::ShardingPlan plan;
};

inline std::size_t pow2_ceil(std::size_t x) {
  std::size_t p = 1;
  while (p < x) p <<= 1;
  return p;
}

/// Chooses instance size and count for one configuration.
///
///   concurrency = 1 in sync mode; in async mode min(lag + 1, cap) where
///                 cap = total_gpus / ceil(global_batch / max_seqs_per_gpu)
///   gpus/batch  = total_gpus / concurrency
///   g           = clamp(pow2ceil(gpus/batch * min_local_batch / global_batch),
///                       min_gpus_per_instance, max_gpus_per_instance)
///   instances   = min(global_batch, gpus/batch / g)
///
/// Explicit sharding settings override g and the parallel split.
/// Throws CapacityError or std::invalid_argument for infeasible layouts.
inline Deployment resolve_deployment(const CellConfig& c) {
  Deployment d;
  const auto& dep = c.deployment;
  const std::size_t batch = c.traffic.global_batch;
  if (c.pipeline.concurrency > 0) {
    d.concurrency = c.pipeline.concurrency;
  } else if (c.pipeline.mode == pipeline::Mode::kAsyncNonColocated) {
    const std::size_t gpus_needed = (batch + dep.max_seqs_per_gpu - 1) / dep.max_seqs_per_gpu;
    const std::size_t cap = std::max<std::size_t>(1, dep.total_gpus / gpus_needed);
    d.concurrency = std::min(c.pipeline.max_policy_lag + 1, cap);
  }
  d.gpus_per_batch = dep.total_gpus / d.concurrency;
  if (d.gpus_per_batch == 0) throw std::invalid_argument("deployment: fewer GPUs than concurrent batches");

  const auto& sh = c.sharding;
  std::size_t g = sh.gpus_per_instance;
  const bool explicit_split = sh.tensor_parallel > 0;
  if (g == 0 && explicit_split) g = sh.tensor_parallel * sh.pipeline_parallel * sh.expert_parallel;
  if (g == 0) {
    const std::size_t want = (d.gpus_per_batch * dep.min_local_batch + batch - 1) / batch;
    g = std::clamp(pow2_ceil(want), dep.min_gpus_per_instance, dep.max_gpus_per_instance);
  }
  if (g > d.gpus_per_batch) {
    throw std::invalid_argument("deployment: an instance needs " + std::to_string(g) + " GPUs but a batch has " +
                                std::to_string(d.gpus_per_batch));
  }
  d.instances = std::min(batch, d.gpus_per_batch / g);

  std::size_t tp = sh.tensor_parallel, pp = sh.pipeline_parallel, ep = sh.expert_parallel;
  if (!explicit_split) {
    tp = std::gcd(g, std::size_t{8});
    const std::size_t rest = g / tp;
    pp = c.model.is_moe() ? 1 : rest;
    ep = c.model.is_moe() ? rest : 1;
  }
  if (tp * pp * ep != g) {
    throw std::invalid_argument("sharding: tensor_parallel x pipeline_parallel x expert_parallel (" +
                                std::to_string(tp * pp * ep) + ") != gpus_per_instance (" + std::to_string(g) + ")");
  }
  d.plan = cost::ShardingPlan::make(tp, pp, ep, sh.penalty);
  cost::check_capacity(c.hardware, c.model, d.plan);
  return d;
}

}  // namespace specrl::sweep
