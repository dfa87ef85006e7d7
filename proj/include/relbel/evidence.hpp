#pragma once

// Relative belief ratios and the inferences built on them: estimate,
// plausible region, credible regions, strength of evidence, hypothesis
// assessment and prediction.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "relbel/error.hpp"
#include "relbel/model.hpp"
#include "relbel/numeric.hpp"

namespace relbel {

struct EvidenceTable {
  std::vector<std::string> labels;
  std::vector<std::size_t> source_index;  // position in the caller's vectors
  Masses prior;
  Masses posterior;
  std::vector<double> rb;
  std::vector<std::size_t> dropped;  // source indices with zero prior and posterior mass
  double normalization = 1.0;        // sum of rb * prior

  std::size_t size() const noexcept { return rb.size(); }

  /// Table position of a source index, if it was kept.
  std::optional<std::size_t> position_of(std::size_t source) const {
    auto it = std::find(source_index.begin(), source_index.end(), source);
    if (it == source_index.end()) return std::nullopt;
    return static_cast<std::size_t>(it - source_index.begin());
  }
};

struct Estimate {
  std::size_t index = 0;  // table position
  bool tie = false;
};

enum class CredibleConvention { SupGeq, QuantileGt };

struct RegionReport {
  std::vector<std::size_t> members;  // ascending table positions
  double cutoff = 0.0;
  double posterior_content = 0.0;
  double prior_content = 0.0;

  bool contains(std::size_t i) const { return std::binary_search(members.begin(), members.end(), i); }
};

enum class Verdict { EvidenceFor, EvidenceAgainst, NoEvidence };

inline std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::EvidenceFor: return "evidence-for";
    case Verdict::EvidenceAgainst: return "evidence-against";
    case Verdict::NoEvidence: return "no-evidence";
  }
  return "unknown";
}

struct HypothesisReport {
  std::size_t psi0 = 0;
  double rb_at_psi0 = 0.0;
  double strength = 0.0;
  double posterior_mass = 0.0;
  Verdict verdict = Verdict::NoEvidence;
};

inline EvidenceTable rb_table(const Masses& prior, const Masses& posterior,
                              const std::vector<std::string>& labels = {}) {
  if (prior.size() != posterior.size() || prior.empty())
    fail(ErrorCode::DimensionMismatch, "posterior", "prior and posterior lengths differ or are empty");
  if (!labels.empty() && labels.size() != prior.size())
    fail(ErrorCode::DimensionMismatch, "labels", "label count differs from table length");
  detail::check_masses(prior, "prior");
  detail::check_masses(posterior, "posterior");
  if (std::fabs(accurate_sum(prior) - 1.0) > kNormTol)
    fail(ErrorCode::PriorNotNormalized, "prior", "prior masses do not sum to one");
  if (std::fabs(accurate_sum(posterior) - 1.0) > kNormTol)
    fail(ErrorCode::PriorNotNormalized, "posterior", "posterior masses do not sum to one");

  EvidenceTable t;
  KahanSum norm;
  for (std::size_t i = 0; i < prior.size(); ++i) {
    if (prior[i] == 0.0) {
      if (posterior[i] > 0.0)
        fail(ErrorCode::ZeroPriorPositivePosterior, "prior[" + std::to_string(i) + "]",
             "posterior mass where the prior has none");
      t.dropped.push_back(i);
      continue;
    }
    t.labels.push_back(labels.empty() ? std::to_string(i) : labels[i]);
    t.source_index.push_back(i);
    t.prior.push_back(prior[i]);
    t.posterior.push_back(posterior[i]);
    t.rb.push_back(posterior[i] / prior[i]);
    norm += t.rb.back() * prior[i];
  }
  t.normalization = norm.value();
  TableAudit::instance().record(t.normalization);
  return t;
}

inline Estimate rb_estimate(const EvidenceTable& t) {
  const auto pick = argmax(t.rb);
  return {pick.index, pick.tie};
}

namespace detail {

inline RegionReport region_from(const EvidenceTable& t, std::vector<std::size_t> members, double cutoff) {
  RegionReport r;
  r.members = std::move(members);
  std::sort(r.members.begin(), r.members.end());
  r.cutoff = cutoff;
  KahanSum post, pri;
  for (auto i : r.members) {
    post += t.posterior[i];
    pri += t.prior[i];
  }
  r.posterior_content = post.value();
  r.prior_content = pri.value();
  return r;
}

/// Smallest threshold value v among `score` such that the posterior mass of
/// {score >= v} reaches `gamma`. Returns the maximum score for gamma <= 0.
/// At gamma = 1 the set is the whole posterior support, however thin the tail.
inline double upper_set_cutoff(const std::vector<double>& score, const Masses& posterior, double gamma) {
  if (gamma >= 1.0) {
    double c = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < score.size(); ++i)
      if (posterior[i] > 0.0) c = std::min(c, score[i]);
    return c;
  }
  std::vector<std::size_t> order(score.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return score[a] > score[b]; });
  KahanSum cum;
  std::size_t k = 0;
  double cutoff = score[order.front()];
  while (k < order.size()) {
    cutoff = score[order[k]];
    while (k < order.size() && score[order[k]] == cutoff) cum += posterior[order[k++]];
    if (cum.value() >= gamma - kContentTol) break;
  }
  return cutoff;
}

}  // namespace detail

/// Pl = {rb > 1}, strictly.
inline RegionReport plausible_region(const EvidenceTable& t) {
  std::vector<std::size_t> members;
  for (std::size_t i = 0; i < t.size(); ++i)
    if (t.rb[i] > 1.0) members.push_back(i);
  return detail::region_from(t, std::move(members), 1.0);
}

inline void check_gamma(double gamma) {
  if (!(gamma >= 0.0 && gamma <= 1.0))
    fail(ErrorCode::BadGamma, "gamma", "credibility level must lie in [0, 1]");
}

inline RegionReport credible_region(const EvidenceTable& t, double gamma,
                                    CredibleConvention convention = CredibleConvention::SupGeq) {
  check_gamma(gamma);
  std::vector<std::size_t> members;
  if (convention == CredibleConvention::SupGeq) {
    const double c = detail::upper_set_cutoff(t.rb, t.posterior, gamma);
    for (std::size_t i = 0; i < t.size(); ++i)
      if (t.rb[i] >= c) members.push_back(i);
    return detail::region_from(t, std::move(members), c);
  }

  // (1 - gamma) posterior quantile of rb; members strictly above it.
  const double level = 1.0 - gamma;
  if (level <= kContentTol) {
    members.resize(t.size());
    std::iota(members.begin(), members.end(), std::size_t{0});
    return detail::region_from(t, std::move(members), std::numeric_limits<double>::lowest());
  }
  std::vector<std::size_t> order(t.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return t.rb[a] < t.rb[b]; });
  KahanSum cum;
  double c = t.rb[order.back()];
  for (std::size_t k = 0; k < order.size();) {
    const double v = t.rb[order[k]];
    while (k < order.size() && t.rb[order[k]] == v) cum += t.posterior[order[k++]];
    if (cum.value() >= level - kContentTol) {
      c = v;
      break;
    }
  }
  for (std::size_t i = 0; i < t.size(); ++i)
    if (t.rb[i] > c) members.push_back(i);
  return detail::region_from(t, std::move(members), c);
}

inline void check_position(const EvidenceTable& t, std::size_t psi0) {
  if (psi0 >= t.size())
    fail(ErrorCode::IndexOutOfRange, "psi0", "index " + std::to_string(psi0) + " outside the table");
}

/// Posterior probability that rb does not exceed rb(psi0).
inline double strength(const EvidenceTable& t, std::size_t psi0) {
  check_position(t, psi0);
  KahanSum s;
  for (std::size_t i = 0; i < t.size(); ++i)
    if (t.rb[i] <= t.rb[psi0]) s += t.posterior[i];
  return s.value();
}

inline HypothesisReport assess_hypothesis(const EvidenceTable& t, std::size_t psi0) {
  check_position(t, psi0);
  HypothesisReport h;
  h.psi0 = psi0;
  h.rb_at_psi0 = t.rb[psi0];
  h.strength = strength(t, psi0);
  h.posterior_mass = t.posterior[psi0];
  h.verdict = h.rb_at_psi0 > 1.0   ? Verdict::EvidenceFor
              : h.rb_at_psi0 < 1.0 ? Verdict::EvidenceAgainst
                                   : Verdict::NoEvidence;
  return h;
}

struct PredictionReport {
  EvidenceTable table;
  Estimate estimate;
};

/// Relative belief prediction of a finite future value from its prior and
/// posterior predictive masses.
inline PredictionReport rb_predict(const Masses& prior_pred, const Masses& post_pred,
                                   const std::vector<std::string>& labels = {}) {
  PredictionReport r{rb_table(prior_pred, post_pred, labels), {}};
  r.estimate = rb_estimate(r.table);
  return r;
}

/// Convenience: the evidence table for psi after observing x.
inline EvidenceTable rb_table(const FiniteModel& model, const PsiMap& psi, std::size_t x) {
  return rb_table(push_forward(model.prior, psi), psi_posterior(model, psi, x), psi.psi_labels);
}

}  // namespace relbel
