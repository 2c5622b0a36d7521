// Copyright 2026 The specrl Authors.
// SPDX-License-Identifier: Apache-2.0

// Chain speculative sampling over explicit categorical distributions.
//
// A drafter proposes k tokens x_0..x_{k-1}, x_i ~ q_i. The verifier walks the
// chain, accepting x_i with probability min(1, p_i(x_i) / q_i(x_i)). The first
// rejection is replaced by a draw from the normalized residual
// max(0, p_i - q_i); if every draft is accepted, a bonus token is drawn from
// p_k. Each emitted token is then distributed exactly as its target.

#pragma once

#include <algorithm>
#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "specrl/core/random.hpp"
#include "specrl/specdec/categorical.hpp"

namespace specrl::specdec {

struct DraftProposal {
  std::vector<Token> tokens;
  std::vector<CategoricalDist> per_position_dists;

  [[nodiscard]] std::size_t draft_length() const noexcept { return tokens.size(); }
};

struct VerifyOutcome {
  std::size_t accepted_count = 0;
  std::vector<Token> emitted_tokens;
  // True when the last emitted token came from the residual of a rejection,
  // false when it is the bonus token drawn after full acceptance.
  bool bonus_from_residual = false;

  [[nodiscard]] std::size_t emitted_length() const noexcept { return emitted_tokens.size(); }
};

/// Probability that a drafted position is accepted: sum_x min(p(x), q(x)).
inline double acceptance_probability(const CategoricalDist& target, const CategoricalDist& draft) {
  if (target.vocab_size() != draft.vocab_size()) throw std::invalid_argument("acceptance_probability: vocab mismatch");
  double a = 0.0;
  for (std::size_t x = 0; x < target.vocab_size(); ++x) a += std::min(target.probs()[x], draft.probs()[x]);
  return a;
}

/// Normalized positive part of (p - q). Falls back to p when p <= q
/// everywhere, which only happens when rejection has probability zero.
inline CategoricalDist residual_distribution(const CategoricalDist& target, const CategoricalDist& draft) {
  std::vector<double> w(target.vocab_size());
  double total = 0.0;
  for (std::size_t x = 0; x < w.size(); ++x) {
    w[x] = std::max(0.0, target.probs()[x] - draft.probs()[x]);
    total += w[x];
  }
  if (!(total > 0.0)) return target;
  return CategoricalDist::from_weights(w);
}

namespace detail {

inline void check_shapes(std::span<const CategoricalDist> targets, std::size_t k,
                         std::span<const CategoricalDist> drafts) {
  if (k < 1) throw std::invalid_argument("speculative cycle: draft length must be >= 1");
  if (drafts.size() != k) throw std::invalid_argument("speculative cycle: expected k draft distributions");
  if (targets.size() != k + 1) throw std::invalid_argument("speculative cycle: expected k+1 target distributions");
  const std::size_t v = targets.front().vocab_size();
  for (const auto& d : targets)
    if (d.vocab_size() != v) throw std::invalid_argument("speculative cycle: mismatched vocab sizes");
  for (const auto& d : drafts)
    if (d.vocab_size() != v) throw std::invalid_argument("speculative cycle: mismatched vocab sizes");
}

}  // namespace detail

/// Verifies an already drafted proposal against k+1 target distributions.
inline VerifyOutcome verify_proposal(std::span<const CategoricalDist> targets, const DraftProposal& proposal,
                                     Philox& rng) {
  const std::size_t k = proposal.draft_length();
  detail::check_shapes(targets, k, proposal.per_position_dists);

  VerifyOutcome out;
  out.emitted_tokens.reserve(k + 1);
  for (std::size_t i = 0; i < k; ++i) {
    const Token x = proposal.tokens[i];
    const auto& p = targets[i];
    const auto& q = proposal.per_position_dists[i];
    if (x >= q.vocab_size()) throw std::invalid_argument("speculative cycle: draft token out of vocabulary");
    const double qx = q.probs()[x];
    if (!(qx > 0.0)) {
      throw std::invalid_argument("speculative cycle: drafted token " + std::to_string(x) +
                                  " has zero draft probability");
    }
    const double u = rng.uniform();
    if (u * qx < p.probs()[x]) {
      out.emitted_tokens.push_back(x);
      ++out.accepted_count;
      continue;
    }
    out.emitted_tokens.push_back(residual_distribution(p, q).sample(rng));
    out.bonus_from_residual = true;
    return out;
  }
  out.emitted_tokens.push_back(targets[k].sample(rng));
  return out;
}

/// Samples x_i ~ draft_dists[i] and verifies the chain.
inline VerifyOutcome speculative_cycle(std::span<const CategoricalDist> target_dists,
                                       std::span<const CategoricalDist> draft_dists, Philox& rng) {
  detail::check_shapes(target_dists, draft_dists.size(), draft_dists);
  DraftProposal proposal;
  proposal.per_position_dists.assign(draft_dists.begin(), draft_dists.end());
  proposal.tokens.reserve(draft_dists.size());
  for (const auto& q : draft_dists) proposal.tokens.push_back(q.sample(rng));
  return verify_proposal(target_dists, proposal, rng);
}

/// Mean emitted tokens per cycle (bonus or residual token included).
inline double measure_acceptance(std::span<const VerifyOutcome> outcomes) {
  if (outcomes.empty()) throw std::invalid_argument("measure_acceptance: empty outcome stream");
  double total = 0.0;
  for (const auto& o : outcomes) total += static_cast<double>(o.emitted_length());
  return total / static_cast<double>(outcomes.size());
}

// ---------------------------------------------------------------------------
// Exact enumeration

inline constexpr std::size_t kMaxEnumVocab = 8;
inline constexpr std::size_t kMaxEnumDraft = 4;

struct PositionMarginal {
  double emit_probability = 0.0;
  // Distribution of the token at this position given that it is emitted;
  // empty when the position is unreachable.
  std::optional<CategoricalDist> marginal;
};

struct ExactOutputDistribution {
  std::vector<PositionMarginal> positions;  // k + 1 entries
  std::vector<double> accepted_pmf;         // P(accepted_count = a), a in [0, k]

  [[nodiscard]] double expected_emitted() const noexcept {
    double e = 0.0;
    for (std::size_t a = 0; a < accepted_pmf.size(); ++a) e += accepted_pmf[a] * static_cast<double>(a + 1);
    return e;
  }
};

/// Exact enumeration of every draft sequence and accept/reject branch.
///
/// `target` and `draft` map the drafted prefix x_0..x_{i-1} to the
/// distribution at position i, so context-dependent drafters (n-gram tables)
/// and context-dependent targets (Markov processes) can be checked too.
template <class TargetFn, class DraftFn>
ExactOutputDistribution enumerate_cycle(TargetFn&& target, DraftFn&& draft, std::size_t k, std::size_t vocab) {
  if (vocab > kMaxEnumVocab || k > kMaxEnumDraft || k < 1) {
    throw std::invalid_argument("exact_output_distribution: instance too large to enumerate (vocab <= 8, 1 <= k <= 4)");
  }
  std::vector<std::vector<double>> mass(k + 1, std::vector<double>(vocab, 0.0));
  std::vector<double> pmf(k + 1, 0.0);
  std::vector<Token> prefix;
  prefix.reserve(k);

  auto recurse = [&](auto&& self, double weight) -> void {
    const std::size_t i = prefix.size();
    const CategoricalDist p = target(std::span<const Token>(prefix));
    if (p.vocab_size() != vocab) throw std::invalid_argument("exact_output_distribution: mismatched vocab sizes");
    if (i == k) {
      for (std::size_t y = 0; y < vocab; ++y) mass[k][y] += weight * p.probs()[y];
      pmf[k] += weight;
      return;
    }
    const CategoricalDist q = draft(std::span<const Token>(prefix));
    if (q.vocab_size() != vocab) throw std::invalid_argument("exact_output_distribution: mismatched vocab sizes");
    std::optional<CategoricalDist> residual;
    for (std::size_t x = 0; x < vocab; ++x) {
      const double qx = q.probs()[x];
      if (qx <= 0.0) continue;
      const double accept = std::min(1.0, p.probs()[x] / qx);
      if (accept > 0.0) {
        mass[i][x] += weight * qx * accept;
        prefix.push_back(static_cast<Token>(x));
        self(self, weight * qx * accept);
        prefix.pop_back();
      }
      const double reject = weight * qx * (1.0 - accept);
      if (reject > 0.0) {
        if (!residual) residual = residual_distribution(p, q);
        for (std::size_t y = 0; y < vocab; ++y) mass[i][y] += reject * residual->probs()[y];
        pmf[i] += reject;
      }
    }
  };
  recurse(recurse, 1.0);

  ExactOutputDistribution out;
  out.accepted_pmf = std::move(pmf);
  out.positions.resize(k + 1);
  for (std::size_t j = 0; j <= k; ++j) {
    double emit = 0.0;
    for (double m : mass[j]) emit += m;
    out.positions[j].emit_probability = emit;
    if (emit > 0.0) out.positions[j].marginal = CategoricalDist::from_weights(mass[j]);
  }
  return out;
}

/// Exact output law for position-fixed target and draft distributions.
inline ExactOutputDistribution exact_output_distribution(std::span<const CategoricalDist> target_dists,
                                                         std::span<const CategoricalDist> draft_dists,
                                                         std::size_t k) {
  detail::check_shapes(target_dists, k, draft_dists);
  return enumerate_cycle([&](std::span<const Token> prefix) { return target_dists[prefix.size()]; },
                         [&](std::span<const Token> prefix) { return draft_dists[prefix.size()]; }, k,
                         target_dists.front().vocab_size());
}

}  // namespace specrl::specdec
