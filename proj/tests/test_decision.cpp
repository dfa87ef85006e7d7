#include <gtest/gtest.h>

#include <random>

#include "support.hpp"

using namespace relbel;
using relbel::testing::error_code_of;

namespace {

// Posterior risk straight from the definition, with an explicit loss matrix.
double naive_posterior_risk(const Table& L, const Masses& post, std::size_t a) {
  double s = 0.0;
  for (std::size_t t = 0; t < post.size(); ++t) s += L[t][a] * post[t];
  return s;
}

}  // namespace

TEST(Loss, Construction) {
  const auto map = make_loss(LossKind::MAP, {0.1, 0.2, 0.7});
  for (std::size_t t = 0; t < 3; ++t)
    for (std::size_t a = 0; a < 3; ++a) EXPECT_DOUBLE_EQ(map(t, a), t == a ? 0.0 : 1.0);

  const auto rb = make_loss(LossKind::RB, {0.25, 0.75});
  EXPECT_DOUBLE_EQ(rb(0, 1), 4.0);
  EXPECT_DOUBLE_EQ(rb(1, 0), 4.0 / 3.0);
  EXPECT_DOUBLE_EQ(rb(0, 0), 0.0);

  const auto capped = make_loss(LossKind::RBEta, {0.25, 0.75}, 0.8);
  EXPECT_DOUBLE_EQ(capped(0, 1), 1.0 / 0.8);
  EXPECT_DOUBLE_EQ(capped(1, 0), 1.0 / 0.8);
  const auto mid = make_loss(LossKind::RBEta, {0.25, 0.75}, 0.5);
  EXPECT_DOUBLE_EQ(mid(0, 1), 2.0);
  EXPECT_DOUBLE_EQ(mid(1, 0), 4.0 / 3.0);
  for (const auto& row : mid.values())
    for (double v : row) EXPECT_LE(v, 1.0 / 0.5);
}

TEST(Loss, Errors) {
  EXPECT_EQ(error_code_of([] { make_loss(LossKind::RB, {0.0, 1.0}); }), ErrorCode::ZeroPriorMass);
  EXPECT_EQ(error_code_of([] { make_loss(LossKind::RBEta, {0.5, 0.5}); }), ErrorCode::BadEta);
  EXPECT_EQ(error_code_of([] { make_loss(LossKind::RBEta, {0.5, 0.5}, 0.0); }), ErrorCode::BadEta);
  EXPECT_EQ(error_code_of([] { make_loss(LossKind::RBEta, {0.5, 0.5}, -1.0); }), ErrorCode::BadEta);
}

TEST(Loss, EtaLadder) {
  const auto ladder = eta_ladder({0.1, 0.6, 0.3}, 4);
  ASSERT_EQ(ladder.size(), 4u);
  EXPECT_DOUBLE_EQ(ladder[0], 0.6);
  EXPECT_DOUBLE_EQ(ladder[3], 0.075);
}

TEST(PosteriorRisk, Examples) {
  const auto map = make_loss(LossKind::MAP, {0.5, 0.5});
  EXPECT_DOUBLE_EQ(posterior_risk(map, {0.0, 1.0}, 1), 0.0);
  EXPECT_NEAR(posterior_risk(map, {0.2, 0.8}, 1), 0.2, 1e-15);
  const auto rb = make_loss(LossKind::RB, {0.5, 0.5});
  EXPECT_NEAR(posterior_risk(rb, {0.2, 0.8}, 1), 0.4, 1e-15);
  const auto d = decompose_risk(rb, {0.2, 0.8}, 1);
  EXPECT_NEAR(d.total_term, 2.0, 1e-15);
  EXPECT_NEAR(d.action_term, 1.6, 1e-15);
  EXPECT_NEAR(d.total_term - d.action_term, 0.4, 1e-15);
}

TEST(BayesRule, RbAndMapRulesOnExampleModel) {
  // Diagnostic model with a rare disease: theta in {healthy, diseased}, x = test result.
  const auto m = classify::to_model({0.05, 0.80, 0.01});
  const auto psi = PsiMap::identity(m);
  const auto [rb, rb_report] = bayes_rule(m, psi, make_loss(LossKind::RB, m.prior));
  EXPECT_EQ(rb.action_per_x, (std::vector<std::size_t>{0, 1}));
  EXPECT_NEAR(prior_risk(m, psi, make_loss(LossKind::RB, m.prior), rb), 0.25, 1e-12);
  EXPECT_NEAR(prior_risk_closed_form(m, psi, make_loss(LossKind::RB, m.prior), rb), 0.25, 1e-15);
  const auto [map, map_report] = bayes_rule(m, psi, make_loss(LossKind::MAP, m.prior));
  EXPECT_EQ(map.action_per_x, (std::vector<std::size_t>{0, 0}));
  const auto err = conditional_errors(m, psi, map);
  EXPECT_NEAR(err[0] + err[1], 1.0, 1e-15);
}

TEST(BayesRule, PerfectRuleHasZeroRisk) {
  FiniteModel m;
  m.likelihood = {{0.5, 0.5, 0.0, 0.0}, {0.0, 0.0, 0.3, 0.7}};
  m.prior = {0.4, 0.6};
  m = validate(m);
  const auto psi = PsiMap::identity(m);
  const auto loss = make_loss(LossKind::RB, m.prior);
  const auto [rule, report] = bayes_rule(m, psi, loss);
  EXPECT_EQ(rule.action_per_x, (std::vector<std::size_t>{0, 0, 1, 1}));
  EXPECT_DOUBLE_EQ(prior_risk(m, psi, loss, rule), 0.0);
  EXPECT_DOUBLE_EQ(report.prior_risk, 0.0);
}

TEST(BayesRule, ImpossibleObservationIsAnError) {
  FiniteModel m;
  m.likelihood = {{1.0, 0.0}, {1.0, 0.0}};
  m.prior = {0.5, 0.5};
  m = validate(m);
  EXPECT_EQ(error_code_of([&] { bayes_rule(m, PsiMap::identity(m), make_loss(LossKind::MAP, m.prior)); }),
            ErrorCode::ImpossibleObservation);
}

TEST(BayesRule, EnumerationGuard) {
  FiniteModel m;
  m.likelihood.assign(4, std::vector<double>(12, 1.0 / 12));
  m.prior.assign(4, 0.25);
  m = validate(m);
  // 4^12 rules exceeds the cap.
  EXPECT_EQ(error_code_of([&] {
              minimize_prior_risk_exhaustive(m, PsiMap::identity(m), make_loss(LossKind::MAP, m.prior));
            }),
            ErrorCode::RuleSpaceTooLarge);
}

TEST(DecisionProperty, BayesRuleMatchesEnumerationAndEstimates) {
  std::mt19937_64 gen(21);
  for (int rep = 0; rep < 300; ++rep) {
    const auto p = relbel::testing::random_full_support_problem(gen);
    const Masses pi = push_forward(p.model.prior, p.psi);
    for (auto kind : {LossKind::RB, LossKind::MAP}) {
      const auto loss = make_loss(kind, pi);
      const auto [rule, report] = bayes_rule(p.model, p.psi, loss);
      const auto best = minimize_prior_risk_exhaustive(p.model, p.psi, loss);
      EXPECT_NEAR(report.prior_risk, best.prior_risk, 1e-12);
      EXPECT_NEAR(prior_risk(p.model, p.psi, loss, rule), report.prior_risk, 1e-9);
      EXPECT_NEAR(prior_risk_closed_form(p.model, p.psi, loss, rule), report.prior_risk, 1e-9);
      const auto L = loss.values();
      for (std::size_t j = 0; j < p.model.n_x(); ++j) {
        const auto post = psi_posterior(p.model, p.psi, j);
        // Brute-force per-x minimum with the materialized matrix.
        double lo = INFINITY;
        for (std::size_t a = 0; a < pi.size(); ++a) lo = std::min(lo, naive_posterior_risk(L, post, a));
        EXPECT_NEAR(report.posterior_risk_per_x[j], lo, 1e-12);
        const auto& d = report.decomposition[j];
        EXPECT_NEAR(d.total_term - d.action_term, report.posterior_risk_per_x[j], 1e-12);
        if (kind == LossKind::MAP) {
          EXPECT_DOUBLE_EQ(post[rule.action_per_x[j]], *std::max_element(post.begin(), post.end()));
        }
      }
    }
  }
}

TEST(DecisionProperty, ClosedFormsAndOrdering) {
  std::mt19937_64 gen(22);
  for (int rep = 0; rep < 200; ++rep) {
    const auto p = relbel::testing::random_full_support_problem(gen);
    const Masses pi = push_forward(p.model.prior, p.psi);
    const auto joint = relbel::testing::joint_psi_x(p);
    // Any rule: error-sum form bounds the error-probability form.
    std::uniform_int_distribution<std::size_t> act(0, pi.size() - 1);
    DecisionRule rule;
    for (std::size_t j = 0; j < p.model.n_x(); ++j) rule.action_per_x.push_back(act(gen));
    rule.tie.assign(p.model.n_x(), false);
    const double sum_err = prior_risk_closed_form(p.model, p.psi, make_loss(LossKind::RB, pi), rule);
    const double p_err = prior_risk_closed_form(p.model, p.psi, make_loss(LossKind::MAP, pi), rule);
    EXPECT_LE(p_err, sum_err + 1e-15);
    // Oracle from the joint table: P(error) = sum of joint mass off the rule.
    double oracle = 0.0, oracle_sum = 0.0;
    for (std::size_t k = 0; k < pi.size(); ++k) {
      double miss = 0.0;
      for (std::size_t j = 0; j < p.model.n_x(); ++j)
        if (rule.action_per_x[j] != k) miss += joint[k][j];
      oracle += miss;
      oracle_sum += miss / pi[k];
    }
    EXPECT_NEAR(p_err, oracle, 1e-12);
    EXPECT_NEAR(sum_err, oracle_sum, 1e-9);
    EXPECT_NEAR(prior_risk(p.model, p.psi, make_loss(LossKind::MAP, pi), rule), oracle, 1e-12);
  }
}

TEST(DecisionProperty, UniformPriorRulesCoincide) {
  std::mt19937_64 gen(23);
  for (int rep = 0; rep < 200; ++rep) {
    auto p = relbel::testing::random_full_support_problem(gen);
    p.model.prior.assign(p.model.n_theta(), 1.0 / p.model.n_theta());
    p.psi = PsiMap::identity(p.model);
    const auto rb = bayes_rule(p.model, p.psi, make_loss(LossKind::RB, p.model.prior)).first;
    const auto map = bayes_rule(p.model, p.psi, make_loss(LossKind::MAP, p.model.prior)).first;
    EXPECT_EQ(rb.action_per_x, map.action_per_x);
  }
}

TEST(DecisionProperty, RbRuleIsNotDominated) {
  std::mt19937_64 gen(24);
  for (int rep = 0; rep < 150; ++rep) {
    const auto p = relbel::testing::random_full_support_problem(gen);
    const auto rule = rb_rule(p.model, p.psi);
    EXPECT_FALSE(dominating_rule(p.model, p.psi, rule).has_value());
  }
}

TEST(Unbiasedness, Examples) {
  // Uninformative model: posterior equals prior at every x.
  FiniteModel flat;
  flat.likelihood = {{0.3, 0.7}, {0.3, 0.7}};
  flat.prior = {0.4, 0.6};
  flat = validate(flat);
  const auto psi = PsiMap::identity(flat);
  for (std::size_t a0 = 0; a0 < 2; ++a0)
    for (std::size_t a1 = 0; a1 < 2; ++a1)
      EXPECT_NEAR(unbiasedness_gap(flat, psi, {1.0, 1.0}, DecisionRule{{a0, a1}, {false, false}}), 0.0, 1e-15);

  // Adversarial rule: pick the smallest rb.
  const auto m = relbel::testing::two_by_two();
  const auto id = PsiMap::identity(m);
  const DecisionRule worst{{1, 0}, {false, false}};
  EXPECT_LT(unbiasedness_gap(m, id, {1.0, 1.0}, worst), 0.0);
  EXPECT_GT(unbiasedness_gap(m, id, {1.0, 1.0}, rb_rule(m, id)), 0.0);
}

TEST(LplRegion, Examples) {
  const Masses prior{0.25, 0.25, 0.25, 0.25}, post{0.1, 0.2, 0.3, 0.4};
  const auto rb = make_loss(LossKind::RB, prior);
  EXPECT_EQ(lpl_region(rb, post, 1.0).members.size(), 4u);
  EXPECT_EQ(lpl_region(rb, post, 0.7).members, credible_region(rb_table(prior, post), 0.7).members);

  // Bounded loss: region is an upper set of post / max(eta, prior).
  const Masses pr{0.05, 0.15, 0.3, 0.5}, po{0.1, 0.2, 0.3, 0.4};
  const double eta = 0.2;
  const auto capped = make_loss(LossKind::RBEta, pr, eta);
  for (double gamma : {0.3, 0.5, 0.8, 0.95}) {
    std::vector<double> score(4);
    for (std::size_t i = 0; i < 4; ++i) score[i] = po[i] / std::max(eta, pr[i]);
    // Smallest score level whose upper set reaches gamma, by enumeration.
    double best = -1.0;
    for (double c : score) {
      double content = 0.0;
      for (std::size_t i = 0; i < 4; ++i)
        if (score[i] >= c) content += po[i];
      if (content >= gamma - 1e-12) best = std::max(best, c);
    }
    std::vector<std::size_t> expected;
    for (std::size_t i = 0; i < 4; ++i)
      if (score[i] >= best) expected.push_back(i);
    EXPECT_EQ(lpl_region(capped, po, gamma).members, expected) << gamma;
  }
}
