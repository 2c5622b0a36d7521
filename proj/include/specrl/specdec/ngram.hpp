// Copyright 2026 The specrl Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <stdexcept>
#include <vector>

#include "specrl/core/random.hpp"
#include "specrl/specdec/categorical.hpp"
#include "specrl/specdec/speculative.hpp"

namespace specrl::specdec {

/// Model-free drafter: counts of the next token after each context of
/// `order` tokens, smoothed add-one over the vocabulary.
class NGramTable {
 public:
  NGramTable(std::size_t order, std::size_t vocab) : order_(order), vocab_(vocab) {
    if (vocab < kMinVocab || vocab > kMaxVocab) throw std::invalid_argument("NGramTable: vocab outside [2, 1024]");
  }

  static NGramTable build(std::span<const Token> corpus, std::size_t order, std::size_t vocab) {
    NGramTable table(order, vocab);
    table.observe(corpus);
    return table;
  }

  void observe(std::span<const Token> corpus) {
    for (std::size_t i = order_; i < corpus.size(); ++i) {
      if (corpus[i] >= vocab_) throw std::invalid_argument("NGramTable: corpus token out of vocabulary");
      std::vector<Token> ctx(corpus.begin() + static_cast<std::ptrdiff_t>(i - order_),
                             corpus.begin() + static_cast<std::ptrdiff_t>(i));
      auto [it, inserted] = counts_.try_emplace(std::move(ctx), vocab_, 0);
      ++it->second[corpus[i]];
    }
  }

  [[nodiscard]] std::size_t order() const noexcept { return order_; }
  [[nodiscard]] std::size_t vocab_size() const noexcept { return vocab_; }
  [[nodiscard]] std::size_t num_contexts() const noexcept { return counts_.size(); }

  /// Smoothed next-token distribution given the trailing `order` tokens of
  /// `context`. Unseen contexts yield the uniform distribution.
  [[nodiscard]] CategoricalDist distribution(std::span<const Token> context) const {
    if (context.size() < order_) throw std::invalid_argument("NGramTable: context shorter than table order");
    const std::vector<Token> key(context.end() - static_cast<std::ptrdiff_t>(order_), context.end());
    const auto it = counts_.find(key);
    if (it == counts_.end()) return CategoricalDist::uniform(vocab_);
    std::vector<double> w(vocab_);
    for (std::size_t t = 0; t < vocab_; ++t) w[t] = static_cast<double>(it->second[t]) + 1.0;
    return CategoricalDist::from_weights(w);
  }

 private:
  std::size_t order_;
  std::size_t vocab_;
  std::map<std::vector<Token>, std::vector<std::uint64_t>> counts_;
};

enum class DraftMode {
  kSampled,  // x_i ~ smoothed table distribution, which is recorded as q_i
  kGreedy,   // x_i = argmax; q_i recorded as the point mass on x_i
};

/// Proposes k tokens by repeated table lookup, extending the context with
/// each drafted token.
inline DraftProposal ngram_draft(const NGramTable& table, std::span<const Token> context, std::size_t k,
                                 Philox& rng, DraftMode mode = DraftMode::kSampled) {
  if (k < 1) throw std::invalid_argument("ngram_draft: draft length must be >= 1");
  if (context.size() < table.order()) throw std::invalid_argument("ngram_draft: context shorter than table order");
  std::vector<Token> ctx(context.begin(), context.end());
  DraftProposal proposal;
  proposal.tokens.reserve(k);
  proposal.per_position_dists.reserve(k);
  for (std::size_t i = 0; i < k; ++i) {
    CategoricalDist smoothed = table.distribution(ctx);
    Token x = 0;
    if (mode == DraftMode::kGreedy) {
      x = smoothed.argmax();
      proposal.per_position_dists.push_back(CategoricalDist::one_hot(table.vocab_size(), x));
    } else {
      x = smoothed.sample(rng);
      proposal.per_position_dists.push_back(std::move(smoothed));
    }
    proposal.tokens.push_back(x);
    ctx.push_back(x);
  }
  return proposal;
}

}  // namespace specrl::specdec
