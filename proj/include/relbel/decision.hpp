#pragma once

// Prior-based losses, posterior and prior risk, Bayes rules by enumeration,
// lowest posterior loss regions and the Bayesian unbiasedness integral.
//
// Every loss here has the form L(psi, a) = [psi != a] * weight(psi), so the
// matrix is determined by the per-true-value weight vector.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "relbel/error.hpp"
#include "relbel/evidence.hpp"
#include "relbel/model.hpp"
#include "relbel/numeric.hpp"

namespace relbel {

enum class LossKind { RB, MAP, RBEta, RBLambdaEta, Weighted };

inline std::string to_string(LossKind k) {
  switch (k) {
    case LossKind::RB: return "rb";
    case LossKind::MAP: return "map";
    case LossKind::RBEta: return "rb-eta";
    case LossKind::RBLambdaEta: return "rb-lambda-eta";
    case LossKind::Weighted: return "weighted";
  }
  return "unknown";
}

struct LossMatrix {
  LossKind kind = LossKind::MAP;
  Masses prior;                 // pi_Psi the loss was built from
  std::vector<double> weight;   // loss for a wrong action, by true value
  std::optional<double> eta;

  std::size_t size() const noexcept { return weight.size(); }
  double operator()(std::size_t truth, std::size_t action) const noexcept {
    return truth == action ? 0.0 : weight[truth];
  }
  Table values() const {
    Table v(size(), std::vector<double>(size()));
    for (std::size_t t = 0; t < size(); ++t)
      for (std::size_t a = 0; a < size(); ++a) v[t][a] = (*this)(t, a);
    return v;
  }
};

/// RBLambdaEta is RBEta applied to the cell masses of a discretization.
inline LossMatrix make_loss(LossKind kind, const Masses& prior, std::optional<double> eta = std::nullopt) {
  detail::check_masses(prior, "prior");
  LossMatrix loss{kind, prior, std::vector<double>(prior.size(), 1.0), std::nullopt};
  switch (kind) {
    case LossKind::MAP:
      break;
    case LossKind::RB:
      for (std::size_t i = 0; i < prior.size(); ++i) {
        if (!(prior[i] > 0.0))
          fail(ErrorCode::ZeroPriorMass, "prior[" + std::to_string(i) + "]",
               "relative belief loss needs positive prior mass everywhere");
        loss.weight[i] = 1.0 / prior[i];
      }
      break;
    case LossKind::RBEta:
    case LossKind::RBLambdaEta:
      if (!eta || !(*eta > 0.0) || !std::isfinite(*eta))
        fail(ErrorCode::BadEta, "eta", "eta must be a positive finite number");
      loss.eta = eta;
      for (std::size_t i = 0; i < prior.size(); ++i) loss.weight[i] = 1.0 / std::max(*eta, prior[i]);
      break;
    case LossKind::Weighted:
      fail(ErrorCode::InvalidSpec, "kind", "use make_weighted_loss for custom weights");
  }
  return loss;
}

/// L(psi, a) = [psi != a] * h(psi) for a nonnegative h.
inline LossMatrix make_weighted_loss(const Masses& prior, std::vector<double> h) {
  if (h.size() != prior.size()) fail(ErrorCode::DimensionMismatch, "h", "one weight per psi value");
  detail::check_masses(h, "h");
  return LossMatrix{LossKind::Weighted, prior, std::move(h), std::nullopt};
}

/// eta_k = eta_0 * 2^-k with eta_0 the largest prior mass.
inline std::vector<double> eta_ladder(const Masses& prior, std::size_t steps) {
  double top = 0.0;
  for (double p : prior) top = std::max(top, p);
  std::vector<double> ladder(steps);
  for (std::size_t k = 0; k < steps; ++k) ladder[k] = std::ldexp(top, -static_cast<int>(k));
  return ladder;
}

struct RiskDecomposition {
  double total_term = 0.0;   // sum over psi of weight * posterior; sum of rb for L_RB
  double action_term = 0.0;  // weight * posterior at the action; rb(action) for L_RB
};

inline void check_dims(const LossMatrix& loss, const Masses& posterior) {
  if (loss.size() != posterior.size())
    fail(ErrorCode::DimensionMismatch, "posterior", "loss and posterior sizes differ");
}

inline double posterior_risk(const LossMatrix& loss, const Masses& posterior, std::size_t action) {
  check_dims(loss, posterior);
  if (action >= loss.size()) fail(ErrorCode::IndexOutOfRange, "action", "action outside psi range");
  KahanSum s;
  for (std::size_t t = 0; t < posterior.size(); ++t) s += loss(t, action) * posterior[t];
  return s.value();
}

inline RiskDecomposition decompose_risk(const LossMatrix& loss, const Masses& posterior, std::size_t action) {
  check_dims(loss, posterior);
  RiskDecomposition d;
  KahanSum s;
  for (std::size_t t = 0; t < posterior.size(); ++t) s += loss.weight[t] * posterior[t];
  d.total_term = s.value();
  d.action_term = loss.weight[action] * posterior[action];
  return d;
}

inline std::vector<double> posterior_risks(const LossMatrix& loss, const Masses& posterior) {
  std::vector<double> r(loss.size());
  for (std::size_t a = 0; a < r.size(); ++a) r[a] = posterior_risk(loss, posterior, a);
  return r;
}

/// weight(a) * posterior(a) for every action a. Posterior risk is the total
/// minus this term, so ordering actions by it avoids the cancellation in
/// total - term when the terms are tiny. The relative belief weights are
/// applied as a division so the values match rb_table exactly.
inline std::vector<double> action_scores(const LossMatrix& loss, const Masses& posterior) {
  check_dims(loss, posterior);
  std::vector<double> score(loss.size());
  for (std::size_t a = 0; a < score.size(); ++a) {
    switch (loss.kind) {
      case LossKind::RB: score[a] = posterior[a] / loss.prior[a]; break;
      case LossKind::RBEta:
      case LossKind::RBLambdaEta: score[a] = posterior[a] / std::max(*loss.eta, loss.prior[a]); break;
      default: score[a] = loss.weight[a] * posterior[a];
    }
  }
  return score;
}

/// Minimizer of posterior risk; smallest index on ties.
inline IndexPick bayes_action(const LossMatrix& loss, const Masses& posterior) {
  return argmax(action_scores(loss, posterior));
}

struct DecisionRule {
  std::vector<std::size_t> action_per_x;
  std::vector<bool> tie;  // per x, whether the argmin was shared
};

struct RiskReport {
  double prior_risk = 0.0;
  std::vector<double> posterior_risk_per_x;
  std::vector<RiskDecomposition> decomposition;
};

inline void check_loss_for(const FiniteModel& model, const PsiMap& psi, const LossMatrix& loss) {
  if (loss.size() != psi.n_psi())
    fail(ErrorCode::DimensionMismatch, "loss", "loss size differs from the number of psi values");
  (void)model;
}

/// Joint expectation of the loss over (theta, x), computed directly.
inline double prior_risk(const FiniteModel& model, const PsiMap& psi, const LossMatrix& loss,
                         const DecisionRule& rule) {
  check_loss_for(model, psi, loss);
  if (rule.action_per_x.size() != model.n_x())
    fail(ErrorCode::DimensionMismatch, "rule", "rule must assign an action to every x");
  KahanSum s;
  for (std::size_t t = 0; t < model.n_theta(); ++t)
    for (std::size_t j = 0; j < model.n_x(); ++j)
      s += model.prior[t] * model.likelihood[t][j] * loss(psi.assignment[t], rule.action_per_x[j]);
  return s.value();
}

/// M(delta(x) != psi | psi) for every psi.
inline std::vector<double> conditional_errors(const FiniteModel& model, const PsiMap& psi,
                                              const DecisionRule& rule) {
  const Marginal marg = marginalize(model, psi);
  std::vector<double> err(psi.n_psi());
  for (std::size_t k = 0; k < psi.n_psi(); ++k) {
    KahanSum s;
    for (std::size_t j = 0; j < model.n_x(); ++j)
      if (rule.action_per_x[j] != k) s += marg.predictive[k][j];
    err[k] = s.value();
  }
  return err;
}

/// Prior risk as sum over psi of pi_Psi(psi) * weight(psi) * M(delta != psi | psi).
/// For L_RB this is the sum of conditional error probabilities; for L_MAP the
/// prior probability of an error.
inline double prior_risk_closed_form(const FiniteModel& model, const PsiMap& psi, const LossMatrix& loss,
                                     const DecisionRule& rule) {
  check_loss_for(model, psi, loss);
  const auto err = conditional_errors(model, psi, rule);
  const Masses pi = push_forward(model.prior, psi);
  KahanSum s;
  for (std::size_t k = 0; k < err.size(); ++k) {
    if (loss.kind == LossKind::RB)
      s += err[k];
    else
      s += pi[k] * loss.weight[k] * err[k];
  }
  return s.value();
}

inline std::pair<DecisionRule, RiskReport> bayes_rule(const FiniteModel& model, const PsiMap& psi,
                                                      const LossMatrix& loss) {
  check_loss_for(model, psi, loss);
  const Masses m = prior_predictive(model);
  DecisionRule rule;
  RiskReport report;
  KahanSum total;
  for (std::size_t j = 0; j < model.n_x(); ++j) {
    const Masses post = psi_posterior(model, psi, j);
    const auto risks = posterior_risks(loss, post);
    const auto pick = bayes_action(loss, post);
    rule.action_per_x.push_back(pick.index);
    rule.tie.push_back(pick.tie);
    report.posterior_risk_per_x.push_back(risks[pick.index]);
    report.decomposition.push_back(decompose_risk(loss, post, pick.index));
    total += m[j] * risks[pick.index];
  }
  report.prior_risk = total.value();
  return {rule, report};
}

inline constexpr double kMaxEnumeratedRules = 1e6;

namespace detail {

inline void check_rule_space(std::size_t n_psi, std::size_t n_x) {
  if (std::pow(static_cast<double>(n_psi), static_cast<double>(n_x)) > kMaxEnumeratedRules)
    fail(ErrorCode::RuleSpaceTooLarge, "model",
         "more than 1e6 deterministic rules; enumeration refused");
}

// Calls visit(rule) for every deterministic rule X -> Psi.
template <typename Visit>
void for_each_rule(std::size_t n_psi, std::size_t n_x, Visit&& visit) {
  check_rule_space(n_psi, n_x);
  DecisionRule rule{std::vector<std::size_t>(n_x, 0), std::vector<bool>(n_x, false)};
  while (true) {
    visit(std::as_const(rule));
    std::size_t j = 0;
    while (j < n_x && ++rule.action_per_x[j] == n_psi) rule.action_per_x[j++] = 0;
    if (j == n_x) break;
  }
}

}  // namespace detail

struct EnumerationResult {
  DecisionRule rule;  // first minimizer in enumeration order
  double prior_risk = 0.0;
  std::size_t rules_checked = 0;
};

/// Brute-force minimum of the prior risk over all |Psi|^|X| rules.
inline EnumerationResult minimize_prior_risk_exhaustive(const FiniteModel& model, const PsiMap& psi,
                                                        const LossMatrix& loss) {
  check_loss_for(model, psi, loss);
  EnumerationResult best;
  best.prior_risk = INFINITY;
  detail::for_each_rule(psi.n_psi(), model.n_x(), [&](const DecisionRule& rule) {
    ++best.rules_checked;
    const double r = prior_risk(model, psi, loss, rule);
    if (r < best.prior_risk) {
      best.prior_risk = r;
      best.rule = rule;
    }
  });
  return best;
}

/// A rule whose conditional errors are all <= those of `rule` (beyond `tol`)
/// and strictly smaller somewhere, if one exists.
inline std::optional<DecisionRule> dominating_rule(const FiniteModel& model, const PsiMap& psi,
                                                   const DecisionRule& rule, double tol = 1e-12) {
  const auto base = conditional_errors(model, psi, rule);
  std::optional<DecisionRule> found;
  detail::for_each_rule(psi.n_psi(), model.n_x(), [&](const DecisionRule& cand) {
    if (found) return;
    const auto err = conditional_errors(model, psi, cand);
    bool no_worse = true, better = false;
    for (std::size_t k = 0; k < err.size(); ++k) {
      if (err[k] > base[k] + tol) no_worse = false;
      if (err[k] < base[k] - tol) better = true;
    }
    if (no_worse && better) found = cand;
  });
  return found;
}

/// gamma-lowest posterior loss region {a : r(a|x) <= d} with d the smallest
/// risk level whose lower set reaches posterior content gamma.
inline RegionReport lpl_region(const LossMatrix& loss, const Masses& posterior, double gamma) {
  check_gamma(gamma);
  check_dims(loss, posterior);
  const auto score = action_scores(loss, posterior);
  const double c = detail::upper_set_cutoff(score, posterior, gamma);
  RegionReport r;
  KahanSum post, pri;
  for (std::size_t a = 0; a < score.size(); ++a) {
    if (score[a] >= c) {
      r.members.push_back(a);
      post += posterior[a];
      pri += loss.prior[a];
    }
  }
  r.cutoff = decompose_risk(loss, posterior, 0).total_term - c;  // risk level d
  r.posterior_content = post.value();
  r.prior_content = pri.value();
  return r;
}

/// Sum over x of m(x) h(delta(x)) [pi_Psi(delta(x)|x) - pi_Psi(delta(x))].
/// The rule is Bayesian unbiased for the loss [psi != a] h(psi) iff this is >= 0.
inline double unbiasedness_gap(const FiniteModel& model, const PsiMap& psi, const std::vector<double>& h,
                               const DecisionRule& rule) {
  if (h.size() != psi.n_psi()) fail(ErrorCode::DimensionMismatch, "h", "one weight per psi value");
  if (rule.action_per_x.size() != model.n_x())
    fail(ErrorCode::DimensionMismatch, "rule", "rule must assign an action to every x");
  const Masses m = prior_predictive(model);
  const Masses pi = push_forward(model.prior, psi);
  KahanSum s;
  for (std::size_t j = 0; j < model.n_x(); ++j) {
    if (!(m[j] > 0.0)) continue;
    const Masses post = psi_posterior(model, psi, j);
    const std::size_t a = rule.action_per_x[j];
    s += m[j] * h[a] * (post[a] - pi[a]);
  }
  return s.value();
}

/// The rule x -> rb_estimate(x).
inline DecisionRule rb_rule(const FiniteModel& model, const PsiMap& psi) {
  DecisionRule rule;
  for (std::size_t j = 0; j < model.n_x(); ++j) {
    const auto t = rb_table(model, psi, j);
    const auto e = rb_estimate(t);
    rule.action_per_x.push_back(t.source_index[e.index]);
    rule.tie.push_back(e.tie);
  }
  return rule;
}

}  // namespace relbel
