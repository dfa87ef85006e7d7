#pragma once

// Conjugate normal linear regression y = X beta + e, e ~ N(0, sigma2 I),
// beta ~ N(0, tau2 I), with sigma2 known. Closed-form MAP and relative belief
// estimates of a linear functional w'beta and of a new response at w.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>

#include <Eigen/Dense>

#include "relbel/discretization.hpp"
#include "relbel/error.hpp"
#include "relbel/evidence.hpp"

namespace relbel::regress {

struct RegressionSpec {
  Eigen::MatrixXd design;  // n x k, full column rank
  Eigen::VectorXd response;
  double sigma2 = 1.0;
  double tau2 = 1.0;
};

struct PosteriorGaussian {
  Eigen::VectorXd mean;        // beta_post, equal to the MAP
  Eigen::MatrixXd covariance;  // (tau2^-1 I + sigma2^-1 X'X)^-1
  Eigen::VectorXd mle;         // b = (X'X)^-1 X'y
};

struct FunctionalReport {
  Eigen::VectorXd w;
  double psi_map = 0.0;
  double psi_rb = 0.0;
  double sigma2_psi = 0.0;       // tau2 w'w
  double sigma2_psi_post = 0.0;  // w' Sigma_post w
  double z_map = 0.0;
  double z_rb = 0.0;
  double sigma2_z = 0.0;       // sigma2 + tau2 w'w
  double sigma2_z_post = 0.0;  // sigma2 + w' Sigma_post w
  double magnifier = 1.0;      // sigma2_psi / (sigma2_psi - sigma2_psi_post)
};

inline constexpr double kRankTol = 1e-10;
inline constexpr double kMagnifierTol = 1e-12;

inline void validate(const RegressionSpec& s) {
  const auto n = s.design.rows(), k = s.design.cols();
  if (n == 0 || k == 0) fail(ErrorCode::DimensionMismatch, "design", "empty design matrix");
  if (s.response.size() != n)
    fail(ErrorCode::DimensionMismatch, "response", "response length differs from design rows");
  if (!(s.sigma2 > 0.0) || !std::isfinite(s.sigma2)) fail(ErrorCode::InvalidSpec, "sigma2", "must be positive");
  if (!(s.tau2 > 0.0) || !std::isfinite(s.tau2)) fail(ErrorCode::InvalidSpec, "tau2", "must be positive");
  if (n < k) fail(ErrorCode::RankDeficient, "design", "fewer rows than columns");
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(s.design);
  const auto& sv = svd.singularValues();
  if (!(sv(k - 1) > kRankTol * sv(0)))
    fail(ErrorCode::RankDeficient, "design", "design matrix is not of full column rank");
}

inline PosteriorGaussian posterior_params(const RegressionSpec& s) {
  validate(s);
  const auto k = s.design.cols();
  PosteriorGaussian p;
  p.mle = s.design.colPivHouseholderQr().solve(s.response);
  const Eigen::MatrixXd xtx = s.design.transpose() * s.design;
  const Eigen::MatrixXd precision =
      Eigen::MatrixXd::Identity(k, k) / s.tau2 + xtx / s.sigma2;
  const Eigen::LLT<Eigen::MatrixXd> llt(precision);
  p.covariance = llt.solve(Eigen::MatrixXd::Identity(k, k));
  p.covariance = 0.5 * (p.covariance + p.covariance.transpose());
  p.mean = llt.solve(xtx * p.mle / s.sigma2);
  return p;
}

/// sigma2_psi - sigma2_psi_post from the spectral form
/// tau2 * sum_i (q_i'w)^2 r_i / (1 + r_i), r_i = tau2 lambda_i / sigma2,
/// which stays accurate when the two variances nearly coincide.
inline double variance_gap(const RegressionSpec& s, const Eigen::VectorXd& w) {
  const Eigen::MatrixXd xtx = s.design.transpose() * s.design;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(xtx);
  const Eigen::VectorXd proj = eig.eigenvectors().transpose() * w;
  double gap = 0.0;
  for (Eigen::Index i = 0; i < proj.size(); ++i) {
    const double r = s.tau2 * std::max(eig.eigenvalues()(i), 0.0) / s.sigma2;
    gap += proj(i) * proj(i) * r / (1.0 + r);
  }
  return s.tau2 * gap;
}

inline FunctionalReport functional_inference(const RegressionSpec& s, const Eigen::VectorXd& w) {
  const PosteriorGaussian post = posterior_params(s);
  if (w.size() != s.design.cols())
    fail(ErrorCode::DimensionMismatch, "w", "direction length differs from design columns");
  if (w.squaredNorm() == 0.0) fail(ErrorCode::ZeroDirection, "w", "direction must be nonzero");

  FunctionalReport f;
  f.w = w;
  f.sigma2_psi = s.tau2 * w.squaredNorm();
  f.sigma2_psi_post = w.dot(post.covariance * w);
  const double gap = variance_gap(s, w);
  if (!(gap > kMagnifierTol * f.sigma2_psi))
    fail(ErrorCode::NearSingularMagnifier, "sigma2",
         "posterior and prior variances of w'beta coincide to working precision");
  f.magnifier = f.sigma2_psi / gap;
  f.psi_map = w.dot(post.mean);
  f.psi_rb = f.magnifier * f.psi_map;

  f.sigma2_z = s.sigma2 + f.sigma2_psi;
  f.sigma2_z_post = s.sigma2 + f.sigma2_psi_post;
  f.z_map = f.psi_map;
  // Same variance gap as for w'beta, so z_rb = (1 + sigma2 / (tau2 w'w)) psi_rb.
  f.z_rb = f.sigma2_z / gap * f.psi_map;
  return f;
}

struct GridCheck {
  double closed_form = 0.0;
  double grid_argmax = 0.0;
  double gap = 0.0;
  double cell_width = 0.0;
};

/// Grid spanning +-6 prior sd of w'beta, widened to hold the closed-form
/// estimate with 6 posterior sd of margin.
inline Grid1D check_grid(const FunctionalReport& f, std::size_t n_cells) {
  const double prior_sd = std::sqrt(f.sigma2_psi), post_sd = std::sqrt(f.sigma2_psi_post);
  const double lo = std::min(-6.0 * prior_sd, f.psi_rb - 6.0 * post_sd);
  const double hi = std::max(6.0 * prior_sd, f.psi_rb + 6.0 * post_sd);
  return build_grid(lo, hi, n_cells);
}

/// Cell-level relative belief argmax of w'beta from the exact Gaussian prior
/// and posterior, compared with the closed form.
inline GridCheck rb_grid_check(const RegressionSpec& s, const Eigen::VectorXd& w, const Grid1D& grid) {
  const FunctionalReport f = functional_inference(s, w);
  const double prior_sd = std::sqrt(f.sigma2_psi);
  if (grid.lo > -6.0 * prior_sd || grid.hi < 6.0 * prior_sd)
    fail(ErrorCode::InvalidSpec, "grid", "grid must cover +-6 prior standard deviations");
  if (f.psi_rb < grid.lo || f.psi_rb > grid.hi)
    fail(ErrorCode::GridTooCoarse, "grid", "closed-form estimate lies outside the grid");
  const auto prior = discretize(NormalDensity{0.0, f.sigma2_psi}, grid);
  const auto post = discretize(NormalDensity{f.psi_map, f.sigma2_psi_post}, grid);
  const auto table = rb_table(prior.masses, post.masses);
  const auto est = rb_estimate(table);

  GridCheck g;
  g.closed_form = f.psi_rb;
  g.grid_argmax = grid.midpoint(table.source_index[est.index]);
  g.gap = std::fabs(g.closed_form - g.grid_argmax);
  g.cell_width = grid.cell_width();
  if (g.gap > 2.0 * g.cell_width)
    fail(ErrorCode::GridTooCoarse, "grid",
         "grid argmax misses the closed form by more than two cells");
  return g;
}

}  // namespace relbel::regress
