#pragma once

// Finite Bayesian models: likelihood table f(x|theta), prior over theta, and a
// parameter of interest psi = Psi(theta) given as a surjective map.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "relbel/error.hpp"
#include "relbel/numeric.hpp"

namespace relbel {

using Masses = std::vector<double>;
using Table = std::vector<std::vector<double>>;

struct FiniteModel {
  std::vector<std::string> theta_labels;
  std::vector<std::string> x_labels;
  Table likelihood;  // likelihood[theta][x] = f(x | theta)
  Masses prior;      // pi(theta)
  bool renormalized = false;

  std::size_t n_theta() const noexcept { return prior.size(); }
  std::size_t n_x() const noexcept { return x_labels.size(); }
};

struct PsiMap {
  std::vector<std::size_t> assignment;  // theta index -> psi index
  std::vector<std::string> psi_labels;

  std::size_t n_psi() const noexcept { return psi_labels.size(); }

  static PsiMap identity(const FiniteModel& model) {
    PsiMap psi;
    psi.psi_labels = model.theta_labels;
    psi.assignment.resize(model.n_theta());
    for (std::size_t i = 0; i < psi.assignment.size(); ++i) psi.assignment[i] = i;
    return psi;
  }
};

struct PosteriorReport {
  Masses posterior;  // pi(theta | x)
  double evidence_norm = 0.0;  // m(x)
};

struct Marginal {
  Masses prior;      // pi_Psi(psi)
  Table predictive;  // predictive[psi][x] = m(x | psi)
};

namespace detail {

inline void check_masses(const Masses& m, const std::string& field) {
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (!(m[i] >= 0.0) || !std::isfinite(m[i]))
      fail(ErrorCode::NegativeMass, field + "[" + std::to_string(i) + "]",
           "mass must be finite and nonnegative, got " + std::to_string(m[i]));
  }
}

// Returns true when the vector was rescaled.
inline bool renormalize(Masses& m, double total) {
  if (total == 1.0) return false;
  for (double& v : m) v /= total;
  return true;
}

}  // namespace detail

/// Checks every invariant of a finite model. Rows and prior that sum to one
/// within kNormTol are rescaled once, and `renormalized` records it.
inline FiniteModel validate(FiniteModel model) {
  const std::size_t nt = model.prior.size();
  if (nt == 0) fail(ErrorCode::DimensionMismatch, "prior", "model has no parameter values");
  if (model.likelihood.size() != nt)
    fail(ErrorCode::DimensionMismatch, "likelihood",
         "expected " + std::to_string(nt) + " rows, got " + std::to_string(model.likelihood.size()));
  if (model.theta_labels.empty()) {
    for (std::size_t i = 0; i < nt; ++i) model.theta_labels.push_back(std::to_string(i));
  }
  if (model.theta_labels.size() != nt)
    fail(ErrorCode::DimensionMismatch, "theta", "label count differs from prior length");
  const std::size_t nx = model.likelihood.front().size();
  if (nx == 0) fail(ErrorCode::DimensionMismatch, "likelihood", "no sample points");
  if (model.x_labels.empty()) {
    for (std::size_t j = 0; j < nx; ++j) model.x_labels.push_back(std::to_string(j));
  }
  if (model.x_labels.size() != nx)
    fail(ErrorCode::DimensionMismatch, "x", "label count differs from likelihood width");

  bool rescaled = false;
  for (std::size_t t = 0; t < nt; ++t) {
    auto& row = model.likelihood[t];
    const std::string field = "likelihood[" + std::to_string(t) + "]";
    if (row.size() != nx) fail(ErrorCode::DimensionMismatch, field, "ragged likelihood table");
    detail::check_masses(row, field);
    const double total = accurate_sum(row);
    if (std::fabs(total - 1.0) > kNormTol)
      fail(ErrorCode::NonStochasticRow, field, "row sums to " + std::to_string(total));
    rescaled |= detail::renormalize(row, total);
  }

  detail::check_masses(model.prior, "prior");
  const double total = accurate_sum(model.prior);
  if (std::fabs(total - 1.0) > kNormTol)
    fail(ErrorCode::PriorNotNormalized, "prior", "prior sums to " + std::to_string(total));
  rescaled |= detail::renormalize(model.prior, total);

  model.renormalized = model.renormalized || rescaled;
  return model;
}

inline PsiMap validate(const FiniteModel& model, PsiMap psi) {
  if (psi.assignment.size() != model.n_theta())
    fail(ErrorCode::DimensionMismatch, "psi.assignment",
         "every parameter value needs a psi index");
  if (psi.psi_labels.empty()) {
    std::size_t top = 0;
    for (auto a : psi.assignment) top = std::max(top, a + 1);
    for (std::size_t i = 0; i < top; ++i) psi.psi_labels.push_back(std::to_string(i));
  }
  std::vector<bool> hit(psi.n_psi(), false);
  for (std::size_t t = 0; t < psi.assignment.size(); ++t) {
    if (psi.assignment[t] >= psi.n_psi())
      fail(ErrorCode::IndexOutOfRange, "psi.assignment[" + std::to_string(t) + "]",
           "psi index out of range");
    hit[psi.assignment[t]] = true;
  }
  for (std::size_t k = 0; k < hit.size(); ++k) {
    if (!hit[k])
      fail(ErrorCode::EmptyFiber, "psi.labels[" + std::to_string(k) + "]",
           "no parameter value maps to this psi");
  }
  return psi;
}

/// m(x) for every x.
inline Masses prior_predictive(const FiniteModel& model) {
  Masses m(model.n_x());
  for (std::size_t j = 0; j < model.n_x(); ++j) {
    KahanSum s;
    for (std::size_t t = 0; t < model.n_theta(); ++t) s += model.prior[t] * model.likelihood[t][j];
    m[j] = s.value();
  }
  return m;
}

inline PosteriorReport posterior(const FiniteModel& model, std::size_t x) {
  if (x >= model.n_x())
    fail(ErrorCode::IndexOutOfRange, "x", "observation index " + std::to_string(x) + " out of range");
  PosteriorReport report;
  report.posterior.resize(model.n_theta());
  KahanSum m;
  for (std::size_t t = 0; t < model.n_theta(); ++t) {
    report.posterior[t] = model.prior[t] * model.likelihood[t][x];
    m += report.posterior[t];
  }
  report.evidence_norm = m.value();
  if (!(report.evidence_norm > 0.0))
    fail(ErrorCode::ImpossibleObservation, "x",
         "observation " + model.x_labels[x] + " has zero prior predictive probability");
  for (double& p : report.posterior) p /= report.evidence_norm;
  return report;
}

/// Sums theta-level masses over the fibers of psi.
inline Masses push_forward(const Masses& theta_masses, const PsiMap& psi) {
  std::vector<KahanSum> acc(psi.n_psi());
  for (std::size_t t = 0; t < theta_masses.size(); ++t) acc[psi.assignment[t]] += theta_masses[t];
  Masses out(psi.n_psi());
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = acc[k].value();
  return out;
}

inline Masses psi_posterior(const FiniteModel& model, const PsiMap& psi, std::size_t x) {
  return push_forward(posterior(model, x).posterior, psi);
}

inline Marginal marginalize(const FiniteModel& model, const PsiMap& psi) {
  Marginal out;
  out.prior = push_forward(model.prior, psi);
  for (std::size_t k = 0; k < out.prior.size(); ++k) {
    if (!(out.prior[k] > 0.0))
      fail(ErrorCode::EmptyFiber, "psi.labels[" + std::to_string(k) + "]",
           "psi value " + psi.psi_labels[k] + " has zero prior mass");
  }
  out.predictive.assign(psi.n_psi(), std::vector<double>(model.n_x(), 0.0));
  for (std::size_t j = 0; j < model.n_x(); ++j) {
    std::vector<KahanSum> acc(psi.n_psi());
    for (std::size_t t = 0; t < model.n_theta(); ++t)
      acc[psi.assignment[t]] += model.likelihood[t][j] * model.prior[t];
    for (std::size_t k = 0; k < psi.n_psi(); ++k) out.predictive[k][j] = acc[k].value() / out.prior[k];
  }
  return out;
}

}  // namespace relbel
