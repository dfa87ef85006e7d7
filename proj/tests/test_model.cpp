#include <gtest/gtest.h>

#include <random>

#include "support.hpp"

using namespace relbel;

namespace {

FiniteModel make(Table lik, Masses prior) {
  FiniteModel m;
  m.likelihood = std::move(lik);
  m.prior = std::move(prior);
  return m;
}

using relbel::testing::error_code_of;

}  // namespace

TEST(Model, AcceptsStochasticTwoByTwo) {
  const auto m = validate(make({{0.2, 0.8}, {0.8, 0.2}}, {0.5, 0.5}));
  EXPECT_FALSE(m.renormalized);
  EXPECT_EQ(m.theta_labels.size(), 2u);
  EXPECT_EQ(m.x_labels.size(), 2u);
}

TEST(Model, RejectsBadInputs) {
  EXPECT_EQ(error_code_of([] { validate(make({{0.2, 0.7}, {0.8, 0.2}}, {0.5, 0.5})); }), ErrorCode::NonStochasticRow);
  EXPECT_EQ(error_code_of([] { validate(make({{0.2, 0.8}, {0.8, 0.2}}, {0.6, 0.6})); }),
            ErrorCode::PriorNotNormalized);
  EXPECT_EQ(error_code_of([] { validate(make({{-0.2, 1.2}, {0.8, 0.2}}, {0.5, 0.5})); }), ErrorCode::NegativeMass);
  EXPECT_EQ(error_code_of([] { validate(make({{0.2, 0.8}}, {0.5, 0.5})); }), ErrorCode::DimensionMismatch);
}

TEST(Model, RenormalizesWithinToleranceOnce) {
  const auto m = validate(make({{0.2, 0.8 + 5e-10}, {0.8, 0.2}}, {0.5, 0.5}));
  EXPECT_TRUE(m.renormalized);
  EXPECT_DOUBLE_EQ(m.likelihood[0][0] + m.likelihood[0][1], 1.0);
  // A second validation leaves the values alone but keeps the record.
  const auto again = validate(m);
  EXPECT_TRUE(again.renormalized);
  EXPECT_EQ(again.likelihood, m.likelihood);
}

TEST(Model, PosteriorHandExample) {
  const auto m = relbel::testing::two_by_two();
  const auto r = posterior(m, 1);
  EXPECT_NEAR(r.posterior[0], 0.2, 1e-15);
  EXPECT_NEAR(r.posterior[1], 0.8, 1e-15);
  EXPECT_NEAR(r.evidence_norm, 0.5, 1e-15);
}

TEST(Model, PosteriorEqualsPriorForConstantColumn) {
  const auto m = validate(make({{0.3, 0.7}, {0.3, 0.7}, {0.3, 0.7}}, {0.2, 0.3, 0.5}));
  for (std::size_t x = 0; x < 2; ++x) {
    const auto r = posterior(m, x);
    for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(r.posterior[i], m.prior[i], 1e-15);
  }
}

TEST(Model, PointMassPrior) {
  const auto m = validate(make({{0.3, 0.7}, {0.9, 0.1}}, {1.0, 0.0}));
  const auto mx = prior_predictive(m);
  EXPECT_DOUBLE_EQ(mx[0], 0.3);
  EXPECT_DOUBLE_EQ(mx[1], 0.7);
  for (std::size_t x = 0; x < 2; ++x) {
    const auto r = posterior(m, x);
    EXPECT_DOUBLE_EQ(r.posterior[0], 1.0);
    EXPECT_DOUBLE_EQ(r.posterior[1], 0.0);
  }
}

TEST(Model, ImpossibleObservation) {
  const auto m = validate(make({{1.0, 0.0}, {1.0, 0.0}}, {0.5, 0.5}));
  EXPECT_EQ(error_code_of([&] { posterior(m, 1); }), ErrorCode::ImpossibleObservation);
  EXPECT_EQ(error_code_of([&] { posterior(m, 2); }), ErrorCode::IndexOutOfRange);
}

TEST(Model, PriorPredictiveExamples) {
  const auto m = relbel::testing::two_by_two();
  const auto mx = prior_predictive(m);
  EXPECT_NEAR(mx[0], 0.5, 1e-15);
  EXPECT_NEAR(mx[1], 0.5, 1e-15);
  const auto same = validate(make({{0.1, 0.6, 0.3}, {0.1, 0.6, 0.3}}, {0.9, 0.1}));
  const auto ms = prior_predictive(same);
  EXPECT_NEAR(ms[0], 0.1, 1e-15);
  EXPECT_NEAR(ms[1], 0.6, 1e-15);
  EXPECT_NEAR(ms[2], 0.3, 1e-15);
}

TEST(Model, MarginalizeCollapsesFibers) {
  auto m = validate(make({{0.5, 0.5}, {0.1, 0.9}, {0.7, 0.3}}, {0.2, 0.3, 0.5}));
  PsiMap psi{{0, 0, 1}, {"a", "b"}};
  psi = validate(m, psi);
  const auto marg = marginalize(m, psi);
  EXPECT_NEAR(marg.prior[0], 0.5, 1e-15);
  EXPECT_NEAR(marg.prior[1], 0.5, 1e-15);
  // m(x | a) mixes the first two rows with weights 0.2 and 0.3.
  EXPECT_NEAR(marg.predictive[0][0], (0.2 * 0.5 + 0.3 * 0.1) / 0.5, 1e-15);
  EXPECT_NEAR(marg.predictive[1][1], 0.3, 1e-15);
}

TEST(Model, MarginalizeIdentity) {
  const auto m = relbel::testing::two_by_two();
  const auto marg = marginalize(m, PsiMap::identity(m));
  EXPECT_EQ(marg.prior, m.prior);
  EXPECT_EQ(marg.predictive, m.likelihood);
}

TEST(Model, PsiValidation) {
  const auto m = relbel::testing::two_by_two();
  EXPECT_EQ(error_code_of([&] { validate(m, PsiMap{{0, 0}, {"a", "b"}}); }), ErrorCode::EmptyFiber);
  EXPECT_EQ(error_code_of([&] { validate(m, PsiMap{{0}, {"a"}}); }), ErrorCode::DimensionMismatch);
  EXPECT_EQ(error_code_of([&] { validate(m, PsiMap{{0, 3}, {"a", "b"}}); }), ErrorCode::IndexOutOfRange);
  // A psi whose only theta has zero prior mass.
  const auto z = validate(make({{0.5, 0.5}, {0.1, 0.9}}, {1.0, 0.0}));
  EXPECT_EQ(error_code_of([&] { marginalize(z, PsiMap::identity(z)); }), ErrorCode::EmptyFiber);
}

TEST(ModelProperty, RandomModelsSatisfyIdentities) {
  std::mt19937_64 gen(11);
  for (int rep = 0; rep < 500; ++rep) {
    const auto p = relbel::testing::random_problem(gen);
    const auto mx = prior_predictive(p.model);
    EXPECT_NEAR(accurate_sum(mx), 1.0, 1e-9);
    const auto marg = marginalize(p.model, p.psi);
    for (std::size_t j = 0; j < p.model.n_x(); ++j) {
      // Law of total probability through psi, against a plain theta-level sum.
      double mix = 0.0, direct = 0.0;
      for (std::size_t k = 0; k < p.psi.n_psi(); ++k) mix += marg.prior[k] * marg.predictive[k][j];
      for (std::size_t i = 0; i < p.model.n_theta(); ++i) direct += p.model.prior[i] * p.model.likelihood[i][j];
      EXPECT_NEAR(mix, direct, 1e-9);
      EXPECT_NEAR(mx[j], direct, 1e-12);
    }
    for (auto x : relbel::testing::possible_x(p.model)) {
      EXPECT_NEAR(accurate_sum(posterior(p.model, x).posterior), 1.0, 1e-9);
    }
  }
}

TEST(ModelProperty, RelabelingPermutesPosterior) {
  std::mt19937_64 gen(12);
  for (int rep = 0; rep < 200; ++rep) {
    const auto p = relbel::testing::random_problem(gen);
    std::vector<std::size_t> perm(p.model.n_theta());
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    std::shuffle(perm.begin(), perm.end(), gen);
    FiniteModel q = p.model;
    for (std::size_t i = 0; i < perm.size(); ++i) {
      q.prior[i] = p.model.prior[perm[i]];
      q.likelihood[i] = p.model.likelihood[perm[i]];
      q.theta_labels[i] = p.model.theta_labels[perm[i]];
    }
    q = validate(q);
    for (auto x : relbel::testing::possible_x(p.model)) {
      const auto a = posterior(p.model, x).posterior;
      const auto b = posterior(q, x).posterior;
      for (std::size_t i = 0; i < perm.size(); ++i) EXPECT_NEAR(b[i], a[perm[i]], 1e-15);
    }
  }
}
