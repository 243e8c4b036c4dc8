#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "rpid/errors.h"
#include "rpid/inference.h"
#include "test_support.h"

namespace rpid {

using testing::make_sequence;
using testing::random_sequence;

namespace {

struct Case {
  EventSequence seq;
  IntervalModel model;
  double p_epsilon;
  std::optional<MarkModel> marks;
};

Case random_case(Rng& rng, int c) {
  static const double shapes[] = {1.0, 2.0, 4.0, 8.0};
  static const double rates[] = {0.5, 1.0, 4.0};
  static const double priors[] = {0.05, 0.2};
  const std::size_t n = 1 + static_cast<std::size_t>(rng() % 10);
  const bool with_marks = c % 2 == 1;
  Case out{random_sequence(rng, n, with_marks), IntervalModel::gamma(shapes[c % 4], rates[(c / 4) % 3]),
           priors[(c / 12) % 2], std::nullopt};
  if (with_marks) out.marks = MarkModel::log_normal(0.2, 0.5);
  return out;
}

}  // namespace

TEST(Inference, AnalyticSingleEvent) {
  const auto seq = make_sequence(0.0, 2.0, {1.0});
  const auto m = IntervalModel::exponential(1.0);
  const FactorTable f = build_factors(seq, m, 0.1);

  const MapResult map = map_subsequence(f);
  EXPECT_TRUE(map.intrusion_indices.empty());
  EXPECT_NEAR(map.log_posterior, std::log(0.9) - 2.0, 1e-14);
  EXPECT_NEAR(map.path_length, -map.log_posterior, 1e-15);

  EXPECT_NEAR(log_marginal_likelihood(f).log_total, std::log(0.95) - 2.0, 1e-14);

  const InferenceResult r = infer_all(seq, m, 0.1);
  EXPECT_NEAR(r.intrusion_probability, 1.0 / 19.0, 1e-12);
  ASSERT_EQ(r.event_marginals.size(), 1u);
  EXPECT_NEAR(r.event_marginals[0], r.intrusion_probability, 1e-15);

  const BruteForceResult b = brute_force_posterior(f);
  EXPECT_NEAR(b.log_marginal, std::log(0.95) - 2.0, 1e-14);
  EXPECT_NEAR(b.intrusion_probability, 0.05 / 0.95, 1e-12);
}

TEST(Inference, EmptySequence) {
  const auto seq = make_sequence(0.0, 3.0, {});
  const auto m = IntervalModel::gamma(2.0, 1.0);
  const FactorTable f = build_factors(seq, m, 0.2);
  const BruteForceResult b = brute_force_posterior(f);
  EXPECT_DOUBLE_EQ(b.log_marginal, f.log_p(1));
  EXPECT_EQ(b.intrusion_probability, 0.0);
  const InferenceResult r = infer_all(seq, m, 0.2);
  EXPECT_DOUBLE_EQ(r.log_marginal, f.log_p(1));
  EXPECT_EQ(r.intrusion_probability, 0.0);
  EXPECT_TRUE(r.event_marginals.empty());
  EXPECT_TRUE(map_subsequence(f).intrusion_indices.empty());
}

TEST(Inference, BruteForceRefusesLargeInputs) {
  Rng rng(1);
  const auto seq = random_sequence(rng, 21, false);
  const FactorTable f = build_factors(seq, IntervalModel::gamma(2.0, 1.0), 0.1);
  EXPECT_THROW(brute_force_posterior(f), ParameterError);
}

TEST(Inference, MatchesBruteForceOracle) {
  Rng rng(20240601);
  for (int c = 0; c < 120; ++c) {
    const Case k = random_case(rng, c);
    const FactorTable f = build_factors(k.seq, k.model, k.p_epsilon, k.marks);
    const BruteForceResult b = brute_force_posterior(f);
    const InferenceResult r = infer_all(k.seq, k.model, k.p_epsilon, k.marks);
    const MapResult map = map_subsequence(f);

    SCOPED_TRACE("case " + std::to_string(c));
    EXPECT_NEAR(r.log_marginal, b.log_marginal, 1e-9);
    EXPECT_NEAR(log_marginal_likelihood(f).log_total, b.log_marginal, 1e-9);
    EXPECT_NEAR(r.intrusion_probability, b.intrusion_probability, 1e-9);
    ASSERT_EQ(r.event_marginals.size(), k.seq.size());
    for (std::size_t i = 0; i < k.seq.size(); ++i) EXPECT_NEAR(r.event_marginals[i], b.event_marginals[i], 1e-9);
    EXPECT_NEAR(map.log_posterior, b.map_log_posterior, 1e-9);
    EXPECT_NEAR(-map.path_length, b.map_log_posterior, 1e-9);
  }
}

TEST(Inference, MapAttainsMaximumOverAllSubsets) {
  Rng rng(77);
  for (int c = 0; c < 40; ++c) {
    const std::size_t n = 1 + c % 10;
    const auto seq = random_sequence(rng, n, false);
    const FactorTable f = build_factors(seq, IntervalModel::gamma(1.0 + c % 5, 1.0), 0.1 + 0.02 * (c % 7));
    const MapResult map = map_subsequence(f);
    double best = -HUGE_VAL;
    for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
      std::vector<std::size_t> set;
      for (std::size_t i = 0; i < n; ++i)
        if (mask & (1u << i)) set.push_back(i);
      best = std::max(best, log_prob_subsequence(f, set));
    }
    EXPECT_NEAR(std::exp(-map.path_length), std::exp(best), 1e-12 * std::exp(best));
    EXPECT_TRUE(std::is_sorted(map.intrusion_indices.begin(), map.intrusion_indices.end()));
  }
}

TEST(Inference, TinyPriorGivesEmptyMap) {
  Rng rng(4);
  const auto m = IntervalModel::gamma(4.0, 4.0);
  for (int c = 0; c < 20; ++c) {
    const auto seq = testing::renewal_sequence(rng, m, 20);
    EXPECT_TRUE(map_subsequence(build_factors(seq, m, 1e-6)).intrusion_indices.empty());
  }
}

TEST(Inference, SaturatedPriorGivesCertainIntrusion) {
  Rng rng(6);
  const auto seq = random_sequence(rng, 8, false);
  EXPECT_NEAR(infer_all(seq, IntervalModel::gamma(2.0, 1.0), 1.0 - 1e-12).intrusion_probability, 1.0, 1e-6);
}

TEST(Inference, TimeReversalInvariance) {
  Rng rng(314);
  for (int c = 0; c < 100; ++c) {
    const Case k = random_case(rng, c);
    const double fwd = log_marginal_likelihood(build_factors(k.seq, k.model, k.p_epsilon, k.marks)).log_total;
    const double bwd = log_marginal_likelihood(build_factors(k.seq.reversed(), k.model, k.p_epsilon, k.marks)).log_total;
    EXPECT_NEAR(fwd, bwd, 1e-9) << "case " << c;
  }
}

TEST(Inference, ExponentialExchangeability) {
  // First and last events stay in the process; every interior set of one size has one probability.
  Rng rng(12);
  for (int c = 0; c < 10; ++c) {
    const std::size_t n = 4 + c % 6;
    const auto seq = random_sequence(rng, n, false);
    const FactorTable f = build_factors(seq, IntervalModel::exponential(0.5 + c), 0.1 + 0.03 * c);
    std::vector<double> by_size(n, std::nan(""));
    const std::size_t interior = n - 2;
    for (std::uint32_t mask = 0; mask < (1u << interior); ++mask) {
      std::vector<std::size_t> set;
      for (std::size_t i = 0; i < interior; ++i)
        if (mask & (1u << i)) set.push_back(i + 1);
      const double lp = log_prob_subsequence(f, set);
      if (std::isnan(by_size[set.size()])) {
        by_size[set.size()] = lp;
      } else {
        EXPECT_NEAR(lp, by_size[set.size()], 1e-12) << "n=" << n << " mask=" << mask;
      }
    }
  }
}

TEST(Inference, MonotoneInPrior) {
  Rng rng(9);
  for (int c = 0; c < 20; ++c) {
    const auto seq = random_sequence(rng, 3 + c % 15, false);
    const auto m = IntervalModel::gamma(1.0 + c % 8, 1.0);
    double prev = -1.0;
    for (int g = 0; g < 10; ++g) {
      const double p = std::exp(std::log(0.005) + (std::log(0.5) - std::log(0.005)) * g / 9.0);
      const double q = infer_all(seq, m, p).intrusion_probability;
      EXPECT_GE(q, prev - 1e-12);
      prev = q;
    }
  }
}

TEST(Inference, LabelsNeverInfluenceInference) {
  Rng rng(55);
  std::bernoulli_distribution coin(0.5);
  for (int c = 0; c < 10; ++c) {
    const auto seq = random_sequence(rng, 12, true);
    std::vector<Event> relabeled = seq.events();
    for (Event& e : relabeled) e.label = coin(rng) ? EventLabel::Intrusion : EventLabel::Process;
    const EventSequence other(seq.t_start(), seq.t_end(), relabeled);
    const auto m = IntervalModel::gamma(3.0, 2.0);
    const auto mk = MarkModel::log_normal(0.0, 0.6);
    const InferenceResult a = infer_all(seq, m, 0.1, mk);
    const InferenceResult b = infer_all(other, m, 0.1, mk);
    EXPECT_EQ(a.log_marginal, b.log_marginal);
    EXPECT_EQ(a.intrusion_probability, b.intrusion_probability);
    EXPECT_EQ(a.event_marginals, b.event_marginals);
  }
}

TEST(Inference, StableForLongSequences) {
  Rng rng(2);
  const auto m = IntervalModel::gamma(8.0, 8.0);
  const auto seq = testing::renewal_sequence(rng, m, 1000);
  const InferenceResult r = infer_all(seq, m, 0.01);
  EXPECT_TRUE(std::isfinite(r.log_marginal));
  for (double p : r.event_marginals) {
    EXPECT_GE(p, 0.0);
    EXPECT_LE(p, 1.0);
  }
  EXPECT_LE(r.intrusion_probability, 1.0);
  const MapResult map = map_subsequence(build_factors(seq, m, 0.01));
  EXPECT_NEAR(map.path_length, -map.log_posterior, 1e-9 * std::fabs(map.log_posterior));
}

}  // namespace rpid
