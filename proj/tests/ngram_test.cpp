// Copyright 2026 The specrl Authors.
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <vector>

#include "specrl/specdec/ngram.hpp"
#include "specrl/specdec/speculative.hpp"

namespace specrl::specdec {
namespace {

constexpr Token kA = 0;
constexpr Token kB = 1;

TEST(NGramTest, PeriodicCorpusGreedyDraft) {
  const std::vector<Token> corpus{kA, kB, kA, kB, kA, kB};
  const auto table = NGramTable::build(corpus, 1, 2);
  const std::vector<Token> context{kB, kA};
  Philox rng(0);
  const auto proposal = ngram_draft(table, context, 2, rng, DraftMode::kGreedy);
  EXPECT_EQ(proposal.tokens, (std::vector<Token>{kB, kA}));
  ASSERT_EQ(proposal.per_position_dists.size(), 2u);
  EXPECT_DOUBLE_EQ(proposal.per_position_dists[0][kB], 1.0);
}

TEST(NGramTest, SmoothingIsAddOne) {
  const std::vector<Token> corpus{kA, kB, kA, kB, kA, kB};
  const auto table = NGramTable::build(corpus, 1, 2);
  const std::vector<Token> ctx{kA};
  // After 'a': b seen 3 times, a never -> (0+1, 3+1) / 5.
  const auto d = table.distribution(ctx);
  EXPECT_NEAR(d[kA], 0.2, 1e-15);
  EXPECT_NEAR(d[kB], 0.8, 1e-15);
}

TEST(NGramTest, EmptyCorpusFallsBackToUniform) {
  const NGramTable table(2, 5);
  const std::vector<Token> context{3, 1, 4};
  Philox rng(3);
  const auto proposal = ngram_draft(table, context, 4, rng);
  for (const auto& d : proposal.per_position_dists) EXPECT_LT(total_variation(d, CategoricalDist::uniform(5)), 1e-15);
}

TEST(NGramTest, ShortContextIsRejected) {
  const NGramTable table(3, 4);
  const std::vector<Token> context{1, 2};
  Philox rng(0);
  EXPECT_THROW(ngram_draft(table, context, 2, rng), std::invalid_argument);
  EXPECT_THROW(table.distribution(context), std::invalid_argument);
}

// Order-1 Markov target; the table is fit on a 1000-token sample of the same
// process, so drafts are close to but not equal to the target.
class MarkovTarget {
 public:
  MarkovTarget()
      : rows_{CategoricalDist({0.70, 0.10, 0.10, 0.10}), CategoricalDist({0.05, 0.80, 0.10, 0.05}),
              CategoricalDist({0.25, 0.25, 0.25, 0.25}), CategoricalDist({0.60, 0.00, 0.10, 0.30})} {}

  [[nodiscard]] const CategoricalDist& next(Token prev) const { return rows_.at(prev); }

  std::vector<Token> sample(std::size_t n, Philox& rng) const {
    std::vector<Token> out{0};
    while (out.size() < n) out.push_back(next(out.back()).sample(rng));
    return out;
  }

 private:
  std::vector<CategoricalDist> rows_;
};

TEST(NGramTest, MonteCarloAcceptanceMatchesExactEnumeration) {
  const MarkovTarget target;
  Philox corpus_rng(17);
  const auto corpus = target.sample(1000, corpus_rng);
  const auto table = NGramTable::build(corpus, 1, 4);
  const std::size_t k = 3;
  const Token start = 0;

  const auto last = [&](std::span<const Token> prefix) { return prefix.empty() ? start : prefix.back(); };
  const auto exact = enumerate_cycle(
      [&](std::span<const Token> prefix) { return target.next(last(prefix)); },
      [&](std::span<const Token> prefix) {
        std::vector<Token> ctx{start};
        ctx.insert(ctx.end(), prefix.begin(), prefix.end());
        return table.distribution(ctx);
      },
      k, 4);
  ASSERT_TRUE(exact.positions[0].marginal);
  EXPECT_LT(total_variation(*exact.positions[0].marginal, target.next(start)), 1e-12);

  Philox root(23);
  std::vector<VerifyOutcome> outcomes;
  const std::vector<Token> context{start};
  for (std::uint64_t c = 0; c < 10000; ++c) {
    Philox rng = root.substream(c);
    const auto proposal = ngram_draft(table, context, k, rng);
    std::vector<CategoricalDist> targets{target.next(start)};
    for (Token t : proposal.tokens) targets.push_back(target.next(t));
    outcomes.push_back(verify_proposal(targets, proposal, rng));
  }
  const double alpha = measure_acceptance(outcomes);
  EXPECT_NEAR(alpha, exact.expected_emitted(), 0.02 * exact.expected_emitted());
}

}  // namespace
}  // namespace specrl::specdec
