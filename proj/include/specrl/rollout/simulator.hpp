// Copyright 2026 The specrl Authors.
// SPDX-License-Identifier: Apache-2.0

// Cycle-level simulation of one rollout phase.
//
// Response lengths are sampled once, independently of decoding mode, and
// assigned round-robin to instances. Each instance runs continuous batching
// without refill: a cycle costs one decode step (or one speculation cycle)
// at the current live batch, and finished sequences leave immediately. The
// rollout ends when the slowest instance finishes.

#pragma once

#include <algorithm>
#include <atomic>
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <thread>
#include <vector>

#include "specrl/analytic/models.hpp"
#include "specrl/core/random.hpp"
#include "specrl/cost/roofline.hpp"
#include "specrl/rollout/lengths.hpp"

namespace specrl::rollout {

template <class C>
concept StepCostProvider = requires(const C& c, std::size_t b, std::size_t k) {
  { c.decode(b) } -> std::convertible_to<double>;
  { c.verify(b, k) } -> std::convertible_to<double>;
  { c.prefill(b) } -> std::convertible_to<double>;
};

struct SpeculationConfig {
  std::size_t draft_length = 3;
  analytic::AcceptanceModel acceptance = analytic::IidAcceptance{0.0};
  // Drafter forward cost relative to the target decode step at the same batch.
  double draft_cost_fraction = 0.0;
  // Fixed host-side cost per cycle (n-gram lookup, rejection bookkeeping).
  double cycle_overhead_s = 0.0;

  void validate() const {
    if (draft_length < 1) throw std::invalid_argument("speculation: draft_length must be >= 1");
    if (!(draft_cost_fraction >= 0)) throw std::invalid_argument("speculation: draft_cost_fraction must be >= 0");
    if (!(cycle_overhead_s >= 0)) throw std::invalid_argument("speculation: cycle_overhead_s must be >= 0");
    analytic::validate(acceptance, draft_length);
  }
};

/// Wall time of one cycle at live batch b.
template <StepCostProvider C>
double cycle_time(const C& cost, std::size_t live_batch, const std::optional<SpeculationConfig>& spec) {
  if (!spec) return cost.decode(live_batch);
  const std::size_t k = spec->draft_length;
  return cost.verify(live_batch, k) + cost::draft_latency(spec->draft_cost_fraction, k, cost.decode(live_batch)) +
         spec->cycle_overhead_s;
}

struct OccupancySample {
  double time_s = 0.0;
  std::size_t live = 0;  // live sequences from time_s until the next sample
};

struct InstanceResult {
  double latency_s = 0.0;
  double prefill_s = 0.0;
  std::uint64_t cycles = 0;
  std::uint64_t emitted_tokens = 0;
  std::uint64_t sequence_cycles = 0;  // sum over cycles of the live batch
  double live_time_integral = 0.0;    // integral of live sequences over time
  std::vector<OccupancySample> occupancy;

  [[nodiscard]] double mean_alpha() const noexcept {
    return sequence_cycles == 0 ? 1.0 : static_cast<double>(emitted_tokens) / static_cast<double>(sequence_cycles);
  }
};

template <StepCostProvider C>
InstanceResult simulate_instance(std::span<const std::uint32_t> lengths, const C& cost,
                                 const std::optional<SpeculationConfig>& spec, Philox rng) {
  if (lengths.empty()) throw std::invalid_argument("simulate_instance: no sequences");
  if (spec) spec->validate();

  InstanceResult r;
  const std::size_t n = lengths.size();
  r.prefill_s = cost.prefill(n);
  double t = r.prefill_s;
  r.live_time_integral = r.prefill_s * static_cast<double>(n);
  r.occupancy.push_back({0.0, n});

  if (!spec) {
    // One token per sequence per cycle: advance whole segments of constant
    // live batch between consecutive finish events.
    std::vector<std::uint32_t> sorted(lengths.begin(), lengths.end());
    std::sort(sorted.begin(), sorted.end());
    std::uint64_t done = 0;
    std::size_t i = 0;
    while (i < n) {
      const std::size_t live = n - i;
      const std::uint64_t seg = sorted[i] - done;
      if (seg > 0) {
        const double dt = cost.decode(live);
        t += dt * static_cast<double>(seg);
        r.live_time_integral += dt * static_cast<double>(seg) * static_cast<double>(live);
        r.cycles += seg;
        r.sequence_cycles += seg * live;
        r.emitted_tokens += seg * live;
        done = sorted[i];
      }
      while (i < n && sorted[i] == done) ++i;
      r.occupancy.push_back({t, n - i});
    }
    r.latency_s = t;
    return r;
  }

  // Each sequence owns a substream, so its draw in its c-th cycle does not
  // depend on when other sequences finish.
  struct Live {
    std::uint32_t remaining;
    Philox rng;
  };
  const std::size_t k = spec->draft_length;
  std::vector<Live> live_set;
  live_set.reserve(n);
  for (std::size_t i = 0; i < n; ++i) live_set.push_back({lengths[i], rng.substream(i)});
  while (!live_set.empty()) {
    const std::size_t live = live_set.size();
    const double dt = cycle_time(cost, live, spec);
    t += dt;
    r.live_time_integral += dt * static_cast<double>(live);
    ++r.cycles;
    r.sequence_cycles += live;
    for (auto& s : live_set) {
      const std::uint32_t e = std::min(analytic::sample_emitted(spec->acceptance, k, s.rng), s.remaining);
      s.remaining -= e;
      r.emitted_tokens += e;
    }
    std::erase_if(live_set, [](const Live& s) { return s.remaining == 0; });
    if (live_set.size() != live) r.occupancy.push_back({t, live_set.size()});
  }
  r.latency_s = t;
  return r;
}

struct RolloutPlan {
  std::size_t global_batch = 4096;
  std::size_t num_instances = 1;
  std::optional<SpeculationConfig> speculation;

  void validate() const {
    if (global_batch < 1) throw std::invalid_argument("rollout plan: global_batch must be >= 1");
    if (num_instances < 1 || num_instances > global_batch)
      throw std::invalid_argument("rollout plan: num_instances must be in [1, global_batch]");
    if (speculation) speculation->validate();
  }

  /// Round-robin assignment: sequence i goes to instance i mod num_instances.
  [[nodiscard]] std::vector<std::vector<std::uint32_t>> partition(std::span<const std::uint32_t> lengths) const {
    std::vector<std::vector<std::uint32_t>> parts(num_instances);
    for (std::size_t i = 0; i < lengths.size(); ++i) parts[i % num_instances].push_back(lengths[i]);
    return parts;
  }
};

struct RolloutResult {
  std::vector<double> per_instance_latency;
  double rollout_latency = 0.0;
  std::uint64_t total_decode_cycles = 0;
  double mean_alpha = 1.0;
  std::uint64_t total_emitted = 0;
  std::uint64_t total_length = 0;
  double utilization = 0.0;  // mean live sequences / global batch over the rollout
  std::vector<OccupancySample> occupancy_curve;
};

inline constexpr std::uint64_t kLengthStream = 0x4C454E47;    // "LENG"
inline constexpr std::uint64_t kInstanceStream = 0x494E5354;  // "INST"

namespace detail {

inline std::vector<OccupancySample> merge_occupancy(const std::vector<InstanceResult>& parts) {
  std::map<double, long long> delta;
  for (const auto& p : parts) {
    std::size_t prev = 0;
    for (const auto& s : p.occupancy) {
      delta[s.time_s] += static_cast<long long>(s.live) - static_cast<long long>(prev);
      prev = s.live;
    }
  }
  std::vector<OccupancySample> out;
  long long live = 0;
  for (const auto& [t, d] : delta) {
    live += d;
    out.push_back({t, static_cast<std::size_t>(live)});
  }
  return out;
}

template <class F>
void parallel_for(std::size_t n, std::size_t threads, F&& fn) {
  threads = std::max<std::size_t>(1, std::min(threads, n));
  if (threads == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(threads);
  {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < threads; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (std::size_t i = next++; i < n; i = next++) fn(i);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace detail

/// Simulates a rollout over pre-sampled lengths. Instance i draws from
/// rng.substream(kInstanceStream).substream(i), so results do not depend
/// on `threads`.
template <StepCostProvider C>
RolloutResult simulate_rollout_lengths(const RolloutPlan& plan, std::span<const std::uint32_t> lengths, const C& cost,
                                       Philox rng, std::size_t threads = 1) {
  plan.validate();
  if (lengths.size() != plan.global_batch) throw std::invalid_argument("simulate_rollout: length count != global_batch");
  const auto parts = plan.partition(lengths);
  const Philox instance_root = rng.substream(kInstanceStream);
  std::vector<InstanceResult> results(parts.size());
  detail::parallel_for(parts.size(), threads, [&](std::size_t i) {
    results[i] = simulate_instance(parts[i], cost, plan.speculation, instance_root.substream(i));
  });

  RolloutResult out;
  std::uint64_t seq_cycles = 0;
  double live_integral = 0.0;
  for (const auto& r : results) {
    out.per_instance_latency.push_back(r.latency_s);
    out.rollout_latency = std::max(out.rollout_latency, r.latency_s);
    out.total_decode_cycles += r.cycles;
    out.total_emitted += r.emitted_tokens;
    seq_cycles += r.sequence_cycles;
    live_integral += r.live_time_integral;
  }
  for (auto l : lengths) out.total_length += l;
  out.mean_alpha = plan.speculation ? static_cast<double>(out.total_emitted) / static_cast<double>(seq_cycles) : 1.0;
  out.utilization = live_integral / (out.rollout_latency * static_cast<double>(plan.global_batch));
  out.occupancy_curve = detail::merge_occupancy(results);
  return out;
}

template <StepCostProvider C>
RolloutResult simulate_rollout(const RolloutPlan& plan, const LengthDistribution& dist, const C& cost, Philox rng,
                               std::size_t threads = 1) {
  plan.validate();
  Philox length_rng = rng.substream(kLengthStream);
  const auto lengths = sample_lengths(dist, plan.global_batch, length_rng);
  return simulate_rollout_lengths(plan, lengths, cost, rng, threads);
}

struct RolloutComparison {
  RolloutResult baseline;
  RolloutResult speculative;
  double speedup = 1.0;  // baseline latency / speculative latency
};

/// Runs the same sampled lengths with and without the plan's speculation.
template <StepCostProvider C>
RolloutComparison compare_rollout(const RolloutPlan& plan, const LengthDistribution& dist, const C& cost, Philox rng,
                                  std::size_t threads = 1) {
  if (!plan.speculation) throw std::invalid_argument("compare_rollout: plan has no speculation config");
  plan.validate();
  Philox length_rng = rng.substream(kLengthStream);
  const auto lengths = sample_lengths(dist, plan.global_batch, length_rng);
  RolloutPlan off = plan;
  off.speculation.reset();
  RolloutComparison out;
  out.baseline = simulate_rollout_lengths(off, lengths, cost, rng, threads);
  out.speculative = simulate_rollout_lengths(plan, lengths, cost, rng, threads);
  out.speedup = out.baseline.rollout_latency / out.speculative.rollout_latency;
  return out;
}

}  // namespace specrl::rollout
