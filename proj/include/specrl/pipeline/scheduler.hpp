// Copyright 2026 The specrl Authors.
// SPDX-License-Identifier: Apache-2.0

// Step-level scheduling of RL stages on a virtual clock.
//
// Synchronous colocated mode runs data, prepare, gen, logprob and train
// back to back on one pool. Asynchronous non-colocated mode splits the work:
//
//   gen pool:   data -> gen                    (batch i)
//   train pool: logprob -> train -> prepare    (step i, publishes version i+1)
//
// Batch i may start generating only once version >= i - max_policy_lag has
// been published and transferred. The train pool consumes batches strictly
// in order; the time it spends waiting for batch i is the exposed
// generation time of step i.

#pragma once

#include <algorithm>
#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "specrl/analytic/models.hpp"

namespace specrl::pipeline {

using analytic::StageTimes;

enum class Mode { kSyncColocated, kAsyncNonColocated };

struct PipelineConfig {
  Mode mode = Mode::kSyncColocated;
  std::size_t gen_nodes = 1;
  std::size_t train_nodes = 1;
  std::size_t max_policy_lag = 0;
  std::size_t num_steps = 10;
  std::size_t warmup_steps = 2;
  double weight_transfer_s = 0.0;  // publish -> visible on the gen pool
  std::size_t nodes_per_rollout = 0;  // 0: one batch at a time on all gen nodes
  // Forces gen and train onto one pool with on-policy ordering; used to
  // check that the async scheduler degenerates to the synchronous one.
  bool collapse_pools = false;

  [[nodiscard]] std::size_t gen_concurrency() const noexcept {
    if (nodes_per_rollout == 0) return 1;
    return std::max<std::size_t>(1, (gen_nodes + nodes_per_rollout - 1) / nodes_per_rollout);
  }

  void validate() const {
    if (num_steps < 1) throw std::invalid_argument("pipeline: num_steps must be >= 1");
    if (!(weight_transfer_s >= 0)) throw std::invalid_argument("pipeline: weight_transfer_s must be >= 0");
    if (mode == Mode::kAsyncNonColocated) {
      if (gen_nodes < 1 || train_nodes < 1)
        throw std::invalid_argument("pipeline: async mode needs gen_nodes >= 1 and train_nodes >= 1");
      if (max_policy_lag < 1 && !collapse_pools)
        throw std::invalid_argument("pipeline: async mode needs max_policy_lag >= 1");
    }
  }
};

struct StageInterval {
  std::size_t step = 0;
  std::string stage;
  std::string pool;
  double start_s = 0.0;
  double end_s = 0.0;
  std::size_t policy_version = 0;
};

struct PoolAccounting {
  std::string pool;
  double busy_s = 0.0;
  double idle_s = 0.0;
};

struct StepTrace {
  std::vector<StageInterval> intervals;
  std::vector<std::size_t> policy_version_used;  // per step
  std::vector<double> exposed_gen_s;             // per step
  std::vector<double> step_end_s;                // per step, end of the train-side work
  std::vector<PoolAccounting> pools;
  double makespan_s = 0.0;
  std::size_t warmup_steps = 0;
  std::size_t max_policy_lag = 0;

  [[nodiscard]] std::size_t num_steps() const noexcept { return step_end_s.size(); }

  /// Mean step time over steps after warmup; all steps when the run is
  /// too short to have a steady state.
  [[nodiscard]] double effective_step_s() const noexcept {
    const std::size_t n = num_steps();
    const std::size_t w = std::min(warmup_steps, n - 1);
    if (w == 0) return makespan_s / static_cast<double>(n);
    return (step_end_s[n - 1] - step_end_s[w - 1]) / static_cast<double>(n - w);
  }

  [[nodiscard]] double steady_exposed_gen_s() const noexcept {
    const std::size_t n = num_steps();
    const std::size_t w = std::min(warmup_steps, n - 1);
    double s = 0.0;
    for (std::size_t i = w; i < n; ++i) s += exposed_gen_s[i];
    return s / static_cast<double>(n - w);
  }

  [[nodiscard]] double total_exposed_gen_s() const noexcept {
    double s = 0.0;
    for (double e : exposed_gen_s) s += e;
    return s;
  }
};

namespace detail {

inline std::vector<StageTimes> expand(std::span<const StageTimes> per_step, std::size_t num_steps) {
  if (per_step.empty()) throw std::invalid_argument("pipeline: no stage times");
  if (per_step.size() != 1 && per_step.size() != num_steps)
    throw std::invalid_argument("pipeline: stage times must have 1 or num_steps entries");
  std::vector<StageTimes> out(num_steps);
  for (std::size_t i = 0; i < num_steps; ++i) {
    out[i] = per_step[per_step.size() == 1 ? 0 : i];
    out[i].validate();
  }
  return out;
}

inline void account_pools(StepTrace& trace) {
  std::vector<std::string> names;
  for (const auto& iv : trace.intervals)
    if (std::find(names.begin(), names.end(), iv.pool) == names.end()) names.push_back(iv.pool);
  for (const auto& name : names) {
    PoolAccounting acc{name, 0.0, 0.0};
    double cursor = 0.0;
    for (const auto& iv : trace.intervals) {
      if (iv.pool != name) continue;
      acc.idle_s += std::max(0.0, iv.start_s - cursor);
      acc.busy_s += iv.end_s - iv.start_s;
      cursor = std::max(cursor, iv.end_s);
    }
    acc.idle_s += trace.makespan_s - cursor;
    trace.pools.push_back(acc);
  }
}

}  // namespace detail

inline StepTrace run_sync(const PipelineConfig& config, std::span<const StageTimes> stage_times) {
  config.validate();
  if (config.mode != Mode::kSyncColocated) throw std::invalid_argument("run_sync: config mode is not sync_colocated");
  const auto times = detail::expand(stage_times, config.num_steps);
  StepTrace trace;
  trace.warmup_steps = config.warmup_steps;
  double t = 0.0;
  for (std::size_t i = 0; i < times.size(); ++i) {
    const auto durations = times[i].as_array();
    for (std::size_t s = 0; s < durations.size(); ++s) {
      trace.intervals.push_back({i, std::string(StageTimes::kStageNames[s]), "colocated", t, t + durations[s], i});
      t += durations[s];
    }
    trace.policy_version_used.push_back(i);
    trace.exposed_gen_s.push_back(times[i].gen_s);
    trace.step_end_s.push_back(t);
  }
  trace.makespan_s = t;
  detail::account_pools(trace);
  return trace;
}

inline StepTrace run_async(const PipelineConfig& config, std::span<const StageTimes> stage_times) {
  config.validate();
  if (config.mode != Mode::kAsyncNonColocated) throw std::invalid_argument("run_async: config mode is not async_noncolocated");
  const auto times = detail::expand(stage_times, config.num_steps);
  const std::size_t n = times.size();
  const bool shared = config.collapse_pools;
  const std::size_t lag = shared ? 0 : config.max_policy_lag;
  const double transfer = shared ? 0.0 : config.weight_transfer_s;
  const std::size_t slots = shared ? 1 : config.gen_concurrency();

  StepTrace trace;
  trace.warmup_steps = config.warmup_steps;
  trace.max_policy_lag = lag;

  // visible[v]: time at which policy version v can be used for generation.
  std::vector<double> visible(n + 1, std::numeric_limits<double>::infinity());
  visible[0] = 0.0;
  std::vector<double> slot_free(slots, 0.0);
  std::vector<double> gen_end(n, 0.0);
  double train_free = 0.0;
  std::size_t next_gen = 0;

  const auto train_pool = shared ? std::string("colocated") : std::string("train");
  const auto gen_pool = [&](std::size_t slot) {
    if (shared) return std::string("colocated");
    return slots == 1 ? std::string("gen") : "gen[" + std::to_string(slot) + "]";
  };

  // Generation for batch j needs version j - lag, which is published by
  // training step j - lag - 1. Launch every batch whose dependency is met
  // before training step i, in order.
  const auto launch_ready = [&](std::size_t published_through) {
    while (next_gen < n) {
      const std::size_t j = next_gen;
      const std::size_t need = j >= lag ? j - lag : 0;
      if (need > published_through) break;
      const auto slot = static_cast<std::size_t>(std::min_element(slot_free.begin(), slot_free.end()) - slot_free.begin());
      double start = std::max(slot_free[slot], visible[need]);
      if (shared) start = std::max(start, train_free);
      // Newest version already visible when generation starts.
      std::size_t version = need;
      while (version + 1 <= published_through && visible[version + 1] <= start) ++version;
      const double data_end = start + times[j].data_s;
      gen_end[j] = data_end + times[j].gen_s;
      trace.intervals.push_back({j, "data", gen_pool(slot), start, data_end, version});
      trace.intervals.push_back({j, "gen", gen_pool(slot), data_end, gen_end[j], version});
      trace.policy_version_used.push_back(version);
      slot_free[slot] = gen_end[j];
      if (shared) train_free = gen_end[j];
      ++next_gen;
    }
  };

  for (std::size_t i = 0; i < n; ++i) {
    launch_ready(i);  // versions 0..i are published once step i-1 is done
    const double start = std::max(train_free, gen_end[i]);
    trace.exposed_gen_s.push_back(shared ? times[i].gen_s : std::max(0.0, gen_end[i] - train_free));
    const std::size_t v = trace.policy_version_used[i];
    double t = start;
    for (const auto& [name, d] : {std::pair{"logprob", times[i].logprob_s}, std::pair{"train", times[i].train_s},
                                  std::pair{"prepare", times[i].prepare_s}}) {
      trace.intervals.push_back({i, name, train_pool, t, t + d, v});
      t += d;
    }
    train_free = t;
    visible[i + 1] = t + transfer;
    trace.step_end_s.push_back(t);
  }

  std::stable_sort(trace.intervals.begin(), trace.intervals.end(),
                   [](const StageInterval& a, const StageInterval& b) { return a.start_s < b.start_s; });
  trace.makespan_s = train_free;
  for (const auto& iv : trace.intervals) trace.makespan_s = std::max(trace.makespan_s, iv.end_s);
  detail::account_pools(trace);
  return trace;
}

inline StepTrace run(const PipelineConfig& config, std::span<const StageTimes> stage_times) {
  return config.mode == Mode::kSyncColocated ? run_sync(config, stage_times) : run_async(config, stage_times);
}

/// Exposed generation time over makespan; equals the generation share in
/// synchronous mode.
inline double effective_generation_share(const StepTrace& trace) {
  if (!(trace.makespan_s > 0)) return 0.0;
  return trace.total_exposed_gen_s() / trace.makespan_s;
}

/// Per-step generation and train-side times reproducing a target steady
/// state of the asynchronous pipeline at lag >= 1 with one generation slot.
///
/// When generation is the bottleneck (G >= T + transfer), the training
/// pool waits G - T every step and the step period is G, so
///   G = effective_step_s,  T = effective_step_s - exposed_gen_s.
struct AsyncCalibration {
  double gen_side_s = 0.0;    // data + gen on the generation pool
  double train_side_s = 0.0;  // logprob + train + prepare on the training pool
};

inline AsyncCalibration calibrate_async_overlap(double exposed_gen_s, double effective_step_s,
                                                double weight_transfer_s = 0.0) {
  if (!(effective_step_s > 0 && exposed_gen_s >= 0 && exposed_gen_s < effective_step_s))
    throw std::invalid_argument("calibrate_async_overlap: need 0 <= exposed < effective step");
  if (weight_transfer_s > exposed_gen_s)
    throw std::invalid_argument("calibrate_async_overlap: weight transfer longer than the exposed time "
                                "leaves the generation-bound regime");
  return {effective_step_s, effective_step_s - exposed_gen_s};
}

/// Splits `total` over (logprob, train, prepare) in the given proportions;
/// data time is folded into generation.
inline StageTimes split_stages(double gen_s, double train_side_s, double logprob_w, double train_w, double prepare_w) {
  const double w = logprob_w + train_w + prepare_w;
  if (!(w > 0 && logprob_w >= 0 && train_w >= 0 && prepare_w >= 0))
    throw std::invalid_argument("split_stages: weights must be >= 0 with a positive sum");
  StageTimes t{0.0, train_side_s * prepare_w / w, gen_s, train_side_s * logprob_w / w, 0.0};
  t.train_s = train_side_s - t.prepare_s - t.logprob_s;
  return t;
}

struct ModeCell {
  double effective_step_s = 0.0;
  double exposed_gen_s = 0.0;
};

struct ModeComparison {
  ModeCell sync_off, sync_on, async_off, async_on;

  [[nodiscard]] double sync_speedup() const noexcept { return sync_off.effective_step_s / sync_on.effective_step_s; }
  [[nodiscard]] double async_speedup() const noexcept { return async_off.effective_step_s / async_on.effective_step_s; }
  [[nodiscard]] double async_vs_sync_off() const noexcept { return sync_off.effective_step_s / async_off.effective_step_s; }
};

/// Sync/async x speculation off/on grid over matched workloads. Stage
/// times for the async runs are the same per-step times as the sync runs.
inline ModeComparison compare_modes(const PipelineConfig& sync_config, const PipelineConfig& async_config,
                                    std::span<const StageTimes> spec_off, std::span<const StageTimes> spec_on) {
  const auto cell = [](const StepTrace& t) { return ModeCell{t.effective_step_s(), t.steady_exposed_gen_s()}; };
  ModeComparison out;
  out.sync_off = cell(run_sync(sync_config, spec_off));
  out.sync_on = cell(run_sync(sync_config, spec_on));
  out.async_off = cell(run_async(async_config, spec_off));
  out.async_on = cell(run_async(async_config, spec_on));
  return out;
}

}  // namespace specrl::pipeline
