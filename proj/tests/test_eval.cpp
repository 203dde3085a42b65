#include <limits>
#include <stdexcept>

#include "doctest.h"
#include "sgcl/eval.hpp"
#include "sgcl/rng.hpp"

using namespace sgcl;

TEST_CASE("rank_target with unique max, cutoff and ties") {
  Vector s(5);
  s << 0.1, 0.9, 0.3, 0.9, 0.2;

  // unique maximum ranks 1
  Vector top(3);
  top << 0.0, 5.0, 1.0;
  CHECK(rank_target(top, 1, 20).value() == 1);

  // tie above the target resolved by ascending index: item 1 before item 3
  CHECK(rank_target(s, 1, 20).value() == 1);
  CHECK(rank_target(s, 3, 20).value() == 2);
  CHECK(rank_target(s, 2, 20).value() == 3);

  // strictly descending scores: item i ranks i + 1; rank 21 misses at K = 20
  Vector many(25);
  for (int i = 0; i < 25; ++i) many(i) = static_cast<Real>(25 - i);
  CHECK(rank_target(many, 19, 20).value() == 20);
  CHECK_FALSE(rank_target(many, 20, 20).has_value());
  CHECK_FALSE(rank_target(many, 24, 20).has_value());

  CHECK_THROWS_AS(rank_target(s, 9, 20), std::invalid_argument);
  CHECK_THROWS_AS(rank_target(s, 1, 0), std::invalid_argument);
}

TEST_CASE("aggregate_ranks reproduces the hand-computed fixture") {
  // ranks {1, 2, 5, miss, 20} -> P = 0.8, MRR = (1 + .5 + .2 + 0 + .05)/5
  std::vector<std::optional<int>> ranks{1, 2, 5, std::nullopt, 20};
  Metrics m = aggregate_ranks(ranks, 20);
  CHECK(m.p_at_k == doctest::Approx(0.8).epsilon(1e-12));
  CHECK(m.mrr_at_k == doctest::Approx(0.35).epsilon(1e-12));
  CHECK(m.n_examples == 5);

  // two examples, ranks {1, miss}
  Metrics two = aggregate_ranks({1, std::nullopt}, 20);
  CHECK(two.p_at_k == doctest::Approx(0.5));
  CHECK(two.mrr_at_k == doctest::Approx(0.5));

  // all rank 1
  Metrics ones = aggregate_ranks({1, 1, 1}, 20);
  CHECK(ones.p_at_k == doctest::Approx(1.0));
  CHECK(ones.mrr_at_k == doctest::Approx(1.0));

  CHECK_THROWS_AS(aggregate_ranks({}, 20), std::invalid_argument);
}

TEST_CASE("metric invariances") {
  Rng rng(1);
  for (int it = 0; it < 200; ++it) {
    int n = 5 + rng.next_int(20);
    Vector s(n);
    for (int i = 0; i < n; ++i) s(i) = rng.next_range(-3.0, 3.0);
    ItemIndex y = rng.next_int(n);
    int k = 1 + rng.next_int(n);

    auto base = rank_target(s, y, k);

    // strictly increasing transform preserves ranks
    Vector warped = s.unaryExpr([](Real x) { return std::exp(0.7 * x) + 2.0 * x; });
    auto after = rank_target(warped, y, k);
    CHECK(base.has_value() == after.has_value());
    if (base) CHECK(*base == *after);

    // items with score -inf never move the rank
    Vector padded(n + 3);
    padded.head(n) = s;
    padded.tail(3).setConstant(-std::numeric_limits<Real>::infinity());
    auto with_pad = rank_target(padded, y, k);
    CHECK(base.has_value() == with_pad.has_value());
    if (base) CHECK(*base == *with_pad);
  }
}

TEST_CASE("MRR never exceeds precision") {
  Rng rng(2);
  for (int it = 0; it < 100; ++it) {
    int n = 1 + rng.next_int(50);
    std::vector<std::optional<int>> ranks;
    for (int i = 0; i < n; ++i) {
      if (rng.next_double() < 0.3)
        ranks.emplace_back(std::nullopt);
      else
        ranks.emplace_back(1 + rng.next_int(20));
    }
    Metrics m = aggregate_ranks(ranks, 20);
    CHECK(m.mrr_at_k <= m.p_at_k + 1e-12);
  }
}
