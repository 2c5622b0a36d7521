// Copyright 2026 The specrl Authors.
// SPDX-License-Identifier: Apache-2.0

// Two-term roofline latency model for one serving instance.
//
//   memory_time  = weight_traffic_bytes / (gpus * hbm_bandwidth)
//   compute_time = 2 * active_params * tokens / (gpus * peak_flops)
//   step         = max(memory_time, compute_time) / sharding_efficiency
//                  + (pipeline_parallel - 1) * per_layer_comm_latency
//
// Verification of k drafted tokens multiplies the compute term by (k+1) and
// leaves weight traffic unchanged. Prefill is compute-bound over the prompt.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>

#include "specrl/core/error.hpp"

namespace specrl::cost {

struct HardwareProfile {
  std::string gpu_name;
  double hbm_bandwidth_bytes_per_s = 0.0;
  double peak_flops_per_s = 0.0;
  double hbm_capacity_bytes = 0.0;
  double interconnect_bandwidth_bytes_per_s = 0.0;
  double per_layer_comm_latency_s = 0.0;

  void validate() const {
    if (!(hbm_bandwidth_bytes_per_s > 0 && peak_flops_per_s > 0 && hbm_capacity_bytes > 0 &&
          interconnect_bandwidth_bytes_per_s > 0 && per_layer_comm_latency_s > 0)) {
      throw std::invalid_argument("HardwareProfile '" + gpu_name + "': all quantities must be > 0");
    }
  }
};

struct ModelProfile {
  std::string name;
  double total_params = 0.0;
  double active_params_per_token = 0.0;
  std::size_t num_layers = 0;
  std::size_t hidden_size = 0;
  std::size_t bytes_per_param = 2;
  double draft_cost_fraction = 0.0;

  [[nodiscard]] bool is_moe() const noexcept { return active_params_per_token < total_params; }
  [[nodiscard]] double weight_bytes() const noexcept { return total_params * static_cast<double>(bytes_per_param); }

  void validate() const {
    if (!(active_params_per_token > 0 && active_params_per_token <= total_params))
      throw std::invalid_argument("ModelProfile '" + name + "': need 0 < active_params_per_token <= total_params");
    if (bytes_per_param != 1 && bytes_per_param != 2 && bytes_per_param != 4)
      throw std::invalid_argument("ModelProfile '" + name + "': bytes_per_param must be 1, 2 or 4");
    if (!(draft_cost_fraction >= 0)) throw std::invalid_argument("ModelProfile '" + name + "': draft_cost_fraction < 0");
    if (num_layers == 0 || hidden_size == 0) throw std::invalid_argument("ModelProfile '" + name + "': empty shape");
  }
};

/// Efficiency lost to sharding one instance over many GPUs:
/// 1 / (1 + c * log2(gpus)).
inline double sharding_efficiency(std::size_t gpus_per_instance, double penalty) {
  if (gpus_per_instance == 0) throw std::invalid_argument("sharding_efficiency: zero GPUs");
  if (!(penalty >= 0)) throw std::invalid_argument("sharding_efficiency: negative penalty");
  return 1.0 / (1.0 + penalty * std::log2(static_cast<double>(gpus_per_instance)));
}

struct ShardingPlan {
  std::size_t gpus_per_instance = 1;
  std::size_t tensor_parallel = 1;
  std::size_t pipeline_parallel = 1;
  std::size_t expert_parallel = 1;
  double sharding_efficiency = 1.0;

  static ShardingPlan make(std::size_t tp, std::size_t pp, std::size_t ep, double penalty) {
    ShardingPlan p{tp * pp * ep, tp, pp, ep, cost::sharding_efficiency(tp * pp * ep, penalty)};
    p.validate();
    return p;
  }

  void validate() const {
    if (tensor_parallel == 0 || pipeline_parallel == 0 || expert_parallel == 0)
      throw std::invalid_argument("ShardingPlan: parallel degrees must be >= 1");
    if (tensor_parallel * pipeline_parallel * expert_parallel != gpus_per_instance) {
      throw std::invalid_argument("ShardingPlan: tensor_parallel x pipeline_parallel x expert_parallel (" +
                                  std::to_string(tensor_parallel * pipeline_parallel * expert_parallel) +
                                  ") != gpus_per_instance (" + std::to_string(gpus_per_instance) + ")");
    }
    if (!(sharding_efficiency > 0 && sharding_efficiency <= 1))
      throw std::invalid_argument("ShardingPlan: sharding_efficiency outside (0, 1]");
  }
};

struct CostParams {
  // Routed tokens per expert-set touched; MoE weight traffic is
  // min(total, active * tokens * spread) * bytes.
  double expert_spread_factor = 8.0;
};

inline void check_capacity(const HardwareProfile& hw, const ModelProfile& model, const ShardingPlan& plan) {
  const double capacity = static_cast<double>(plan.gpus_per_instance) * hw.hbm_capacity_bytes;
  if (model.weight_bytes() > capacity) {
    throw CapacityError("model '" + model.name + "' needs " + std::to_string(model.weight_bytes() / 1e9) +
                        " GB of weights but the instance holds " + std::to_string(capacity / 1e9) + " GB");
  }
}

inline double weight_traffic_bytes(const ModelProfile& model, double tokens, const CostParams& params) {
  if (!model.is_moe()) return model.weight_bytes();
  const double touched = std::min(model.total_params, model.active_params_per_token * tokens * params.expert_spread_factor);
  return touched * static_cast<double>(model.bytes_per_param);
}

inline double memory_time(const HardwareProfile& hw, const ModelProfile& model, const ShardingPlan& plan,
                          double local_batch, const CostParams& params) {
  return weight_traffic_bytes(model, local_batch, params) /
         (static_cast<double>(plan.gpus_per_instance) * hw.hbm_bandwidth_bytes_per_s);
}

inline double compute_time(const HardwareProfile& hw, const ModelProfile& model, const ShardingPlan& plan,
                           double tokens) {
  return 2.0 * model.active_params_per_token * tokens /
         (static_cast<double>(plan.gpus_per_instance) * hw.peak_flops_per_s);
}

inline double pipeline_bubble(const HardwareProfile& hw, const ShardingPlan& plan) {
  return static_cast<double>(plan.pipeline_parallel - 1) * hw.per_layer_comm_latency_s;
}

namespace detail {
inline void check_inputs(const HardwareProfile& hw, const ModelProfile& model, const ShardingPlan& plan) {
  hw.validate();
  model.validate();
  plan.validate();
  check_capacity(hw, model, plan);
}
}  // namespace detail

/// Verification of k drafted tokens per sequence; k = 0 is a plain decode step.
inline double verify_step_latency(const HardwareProfile& hw, const ModelProfile& model, const ShardingPlan& plan,
                                  std::size_t local_batch, std::size_t k, const CostParams& params = {}) {
  detail::check_inputs(hw, model, plan);
  if (local_batch == 0) throw std::invalid_argument("verify_step_latency: local_batch must be >= 1");
  const double b = static_cast<double>(local_batch);
  const double mem = memory_time(hw, model, plan, b, params);
  const double comp = compute_time(hw, model, plan, b * static_cast<double>(k + 1));
  return std::max(mem, comp) / plan.sharding_efficiency + pipeline_bubble(hw, plan);
}

inline double decode_step_latency(const HardwareProfile& hw, const ModelProfile& model, const ShardingPlan& plan,
                                  std::size_t local_batch, const CostParams& params = {}) {
  return verify_step_latency(hw, model, plan, local_batch, 0, params);
}

/// Cost of drafting k tokens with a drafter whose forward pass costs
/// `fraction` of the target decode step.
inline double draft_latency(double fraction, std::size_t k, double base_decode_s) {
  if (!(fraction >= 0)) throw std::invalid_argument("draft_latency: negative draft cost fraction");
  return static_cast<double>(k) * fraction * base_decode_s;
}

inline double draft_latency(const ModelProfile& model, std::size_t k, double base_decode_s) {
  return draft_latency(model.draft_cost_fraction, k, base_decode_s);
}

inline double prefill_latency(const HardwareProfile& hw, const ModelProfile& model, const ShardingPlan& plan,
                              std::size_t prompt_tokens) {
  detail::check_inputs(hw, model, plan);
  if (prompt_tokens == 0) throw std::invalid_argument("prefill_latency: prompt_tokens must be >= 1");
  return compute_time(hw, model, plan, static_cast<double>(prompt_tokens)) / plan.sharding_efficiency;
}

/// Local batch at which compute and weight-traffic time are equal
/// (dense models; MoE traffic also depends on batch).
inline double ridge_batch(const HardwareProfile& hw, const ModelProfile& model, std::size_t tokens_per_sequence = 1) {
  return model.weight_bytes() * hw.peak_flops_per_s /
         (2.0 * model.active_params_per_token * static_cast<double>(tokens_per_sequence) * hw.hbm_bandwidth_bytes_per_s);
}

/// Latency provider bound to one instance configuration. Construction
/// performs the capacity check once.
class RooflineCost {
 public:
  RooflineCost(HardwareProfile hw, ModelProfile model, ShardingPlan plan, std::size_t prompt_tokens,
               CostParams params = {})
      : hw_(std::move(hw)), model_(std::move(model)), plan_(plan), prompt_tokens_(prompt_tokens), params_(params) {
    detail::check_inputs(hw_, model_, plan_);
    if (prompt_tokens_ == 0) throw std::invalid_argument("RooflineCost: prompt_tokens must be >= 1");
    prefill_per_prompt_ = prefill_latency(hw_, model_, plan_, prompt_tokens_);
  }

  [[nodiscard]] double decode(std::size_t live_batch) const { return verify(live_batch, 0); }

  [[nodiscard]] double verify(std::size_t live_batch, std::size_t k) const {
    const double b = static_cast<double>(live_batch);
    const double mem = memory_time(hw_, model_, plan_, b, params_);
    const double comp = compute_time(hw_, model_, plan_, b * static_cast<double>(k + 1));
    return std::max(mem, comp) / plan_.sharding_efficiency + pipeline_bubble(hw_, plan_);
  }

  [[nodiscard]] double prefill(std::size_t num_prompts) const {
    return prefill_per_prompt_ * static_cast<double>(num_prompts);
  }

  [[nodiscard]] const HardwareProfile& hardware() const noexcept { return hw_; }
  [[nodiscard]] const ModelProfile& model() const noexcept { return model_; }
  [[nodiscard]] const ShardingPlan& plan() const noexcept { return plan_; }

 private:
  HardwareProfile hw_;
  ModelProfile model_;
  ShardingPlan plan_;
  std::size_t prompt_tokens_;
  CostParams params_;
  double prefill_per_prompt_ = 0.0;
};

}  // namespace specrl::cost
