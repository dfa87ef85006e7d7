#pragma once

// Two-class diagnostic classification. With a known class proportion epsilon
// the MAP and relative belief classifiers are compared exactly; with a
// beta(alpha, beta) prior on epsilon the predictive classifiers are compared
// by Monte Carlo.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "relbel/error.hpp"
#include "relbel/model.hpp"

namespace relbel::classify {

struct TwoClassSpec {
  double psi0 = 0.05;  // P(positive test | class 0)
  double psi1 = 0.80;  // P(positive test | class 1)
  double epsilon = 0.01;  // prior probability of class 1
};

inline void validate(const TwoClassSpec& s) {
  auto interior = [](double v, const char* name) {
    if (!(v > 0.0 && v < 1.0)) fail(ErrorCode::InvalidSpec, name, "must lie strictly inside (0, 1)");
  };
  interior(s.psi0, "psi0");
  interior(s.psi1, "psi1");
  interior(s.epsilon, "epsilon");
}

/// Class label chosen for each test result x in {0, 1}.
using TwoClassRule = std::array<int, 2>;

struct KnownEpsLabels {
  int map_label = 0;
  int rb_label = 0;
};

/// The finite model behind the known-epsilon problem: theta = class, x = test result.
inline FiniteModel to_model(const TwoClassSpec& s) {
  validate(s);
  FiniteModel m;
  m.theta_labels = {"psi0", "psi1"};
  m.x_labels = {"0", "1"};
  m.likelihood = {{1.0 - s.psi0, s.psi0}, {1.0 - s.psi1, s.psi1}};
  m.prior = {1.0 - s.epsilon, s.epsilon};
  return validate(m);
}

inline KnownEpsLabels classify_known_eps(const TwoClassSpec& s, int x) {
  validate(s);
  if (x != 0 && x != 1) fail(ErrorCode::IndexOutOfRange, "x", "test result must be 0 or 1");
  const double odds = s.epsilon / (1.0 - s.epsilon);
  KnownEpsLabels out;
  if (x == 1)
    out.map_label = s.psi0 / s.psi1 > odds ? 0 : 1;
  else
    out.map_label = (1.0 - s.psi0) / (1.0 - s.psi1) > odds ? 0 : 1;
  // rb(psi_i | x) = f(x | psi_i) / m(x); the common m(x) drops out.
  const double f0 = x == 1 ? s.psi0 : 1.0 - s.psi0;
  const double f1 = x == 1 ? s.psi1 : 1.0 - s.psi1;
  out.rb_label = f1 > f0 ? 1 : 0;
  return out;
}

inline TwoClassRule map_rule(const TwoClassSpec& s) {
  return {classify_known_eps(s, 0).map_label, classify_known_eps(s, 1).map_label};
}
inline TwoClassRule rb_rule(const TwoClassSpec& s) {
  return {classify_known_eps(s, 0).rb_label, classify_known_eps(s, 1).rb_label};
}

struct ErrorSum {
  double err0 = 0.0;  // P(label != 0 | class 0)
  double err1 = 0.0;  // P(label != 1 | class 1)
  double sum = 0.0;
};

inline ErrorSum error_sum(const TwoClassSpec& s, const TwoClassRule& rule) {
  validate(s);
  // Each error term is psi (x = 1) or 1 - psi (x = 0). Keeping the integer
  // part apart from the signed psi part avoids rounding 1 - psi first.
  int ones0 = 0, ones1 = 0;
  double part0 = 0.0, part1 = 0.0;
  auto add = [](int x, double psi, int& ones, double& part) {
    if (x == 1) {
      part += psi;
    } else {
      ++ones;
      part -= psi;
    }
  };
  for (int x = 0; x < 2; ++x) {
    if (rule[x] != 0) add(x, s.psi0, ones0, part0);
    if (rule[x] != 1) add(x, s.psi1, ones1, part1);
  }
  ErrorSum e;
  e.err0 = ones0 + part0;
  e.err1 = ones1 + part1;
  e.sum = (ones0 + ones1) + (part0 + part1);
  return e;
}

// ---------------------------------------------------------------------------
// Predictive classification with epsilon ~ beta(alpha, beta).

struct PredictiveSpec {
  double alpha = 1.0;
  double beta = 1.0;
  int n = 0;
  double c_bar = 0.0;  // fraction of class-1 items among the n labelled ones
  double f0_at_x = 1.0;
  double f1_at_x = 1.0;
};

struct PredictiveLabels {
  int c_map = 0;
  int c_rb = 0;
  double map_ratio = 1.0;  // posterior predictive odds of class 1 at the new point
  double rb_ratio = 1.0;   // RB(1 | data) / RB(0 | data)
};

inline int class_one_count(const PredictiveSpec& s) {
  if (!(s.alpha > 0.0)) fail(ErrorCode::InvalidSpec, "alpha", "must be positive");
  if (!(s.beta > 0.0)) fail(ErrorCode::InvalidSpec, "beta", "must be positive");
  if (s.n < 0) fail(ErrorCode::InvalidSpec, "n", "must be nonnegative");
  if (!(s.c_bar >= 0.0 && s.c_bar <= 1.0)) fail(ErrorCode::InvalidSpec, "c_bar", "must lie in [0, 1]");
  const double k = s.n * s.c_bar;
  const double rounded = std::round(k);
  if (std::fabs(k - rounded) > 1e-9) fail(ErrorCode::InvalidSpec, "c_bar", "n * c_bar must be an integer");
  if (!(s.f0_at_x >= 0.0) || !(s.f1_at_x >= 0.0))
    fail(ErrorCode::InvalidSpec, "f", "densities must be nonnegative");
  if (s.f0_at_x == 0.0 && s.f1_at_x == 0.0)
    fail(ErrorCode::BothDensitiesZero, "f", "both class densities vanish at the new point");
  return static_cast<int>(rounded);
}

/// Log of q(1)/q(0) for a Bernoulli whose success probability has a
/// beta(a, b) distribution, written through log-gamma.
inline double log_beta_bernoulli_odds(double a, double b) {
  return (std::lgamma(a + 1.0) - std::lgamma(a)) - (std::lgamma(b + 1.0) - std::lgamma(b));
}

/// Both classifiers label 1 only when their ratio strictly exceeds 1.
inline PredictiveLabels predictive_classify(const PredictiveSpec& s) {
  const int k = class_one_count(s);
  const double log_f = std::log(s.f1_at_x) - std::log(s.f0_at_x);
  const double log_post = log_f + log_beta_bernoulli_odds(s.alpha + k, s.beta + (s.n - k));
  const double log_prior = log_beta_bernoulli_odds(s.alpha, s.beta);
  const double log_rb = log_post - log_prior;
  PredictiveLabels out;
  out.map_ratio = std::exp(log_post);
  out.rb_ratio = std::exp(log_rb);
  out.c_map = log_post > 0.0 ? 1 : 0;
  out.c_rb = log_rb > 0.0 ? 1 : 0;
  return out;
}

// ---------------------------------------------------------------------------
// Monte Carlo risk table.

struct RiskTableRow {
  double beta = 0.0;
  double map_err0 = 0.0, map_err1 = 0.0, map_sum = 0.0;
  double rb_err0 = 0.0, rb_err1 = 0.0, rb_sum = 0.0;
  std::int64_t reps = 0;
  std::uint64_t seed = 0;
  double map_sum_se = 0.0;  // Monte Carlo standard errors of the sums
  double rb_sum_se = 0.0;
};

struct RiskTableConfig {
  double alpha = 1.0;
  std::vector<double> betas{1.0, 14.0, 32.0, 100.0};
  double mu = 1.0;
  int n = 10;
  std::int64_t reps = 200000;
  std::uint64_t seed = 7;
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Independent stream per (seed, row, replication).
inline std::mt19937_64 replication_stream(std::uint64_t seed, std::uint64_t row, std::uint64_t rep) {
  std::uint64_t s = splitmix64(seed);
  s = splitmix64(s ^ (row * 0xd1b54a32d192ed03ULL));
  s = splitmix64(s ^ rep);
  return std::mt19937_64(s);
}

inline double std_normal_pdf(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi); }

struct Counts {
  std::int64_t map0 = 0, map1 = 0, rb0 = 0, rb1 = 0;
  std::int64_t map_sq = 0, rb_sq = 0;  // sums of squared per-replication error totals
};

}  // namespace detail

/// Per replication: epsilon ~ beta(alpha, beta), n training labels ~
/// Bernoulli(epsilon), then one test item from each class with x | c ~
/// N(mu c, 1). Training responses are not drawn since f0 and f1 are known and
/// only the label count enters the classifiers.
inline RiskTableRow risk_row(const RiskTableConfig& cfg, std::size_t row_index) {
  if (cfg.reps < 1) fail(ErrorCode::InvalidSpec, "reps", "need at least one replication");
  if (row_index >= cfg.betas.size()) fail(ErrorCode::IndexOutOfRange, "betas", "row out of range");
  const double beta = cfg.betas[row_index];
  if (!(cfg.alpha > 0.0) || !(beta > 0.0))
    fail(ErrorCode::InvalidSpec, "alpha/beta", "beta prior parameters must be positive");
  if (cfg.n < 0) fail(ErrorCode::InvalidSpec, "n", "must be nonnegative");

  detail::Counts c;
  for (std::int64_t r = 0; r < cfg.reps; ++r) {
    auto gen = detail::replication_stream(cfg.seed, row_index, static_cast<std::uint64_t>(r));
    std::gamma_distribution<double> ga(cfg.alpha, 1.0), gb(beta, 1.0);
    const double u = ga(gen), v = gb(gen);
    const double eps = u / (u + v);
    std::bernoulli_distribution label(eps);
    int k = 0;
    for (int i = 0; i < cfg.n; ++i) k += label(gen) ? 1 : 0;
    std::normal_distribution<double> z(0.0, 1.0);
    const double x0 = z(gen);
    const double x1 = cfg.mu + z(gen);

    auto labels_at = [&](double x) {
      PredictiveSpec s{cfg.alpha, beta, cfg.n, cfg.n == 0 ? 0.0 : static_cast<double>(k) / cfg.n,
                       detail::std_normal_pdf(x), detail::std_normal_pdf(x - cfg.mu)};
      return predictive_classify(s);
    };
    const auto at0 = labels_at(x0);
    const auto at1 = labels_at(x1);
    const int m0 = at0.c_map != 0, m1 = at1.c_map != 1;
    const int b0 = at0.c_rb != 0, b1 = at1.c_rb != 1;
    c.map0 += m0;
    c.map1 += m1;
    c.rb0 += b0;
    c.rb1 += b1;
    c.map_sq += (m0 + m1) * (m0 + m1);
    c.rb_sq += (b0 + b1) * (b0 + b1);
  }

  const double n = static_cast<double>(cfg.reps);
  RiskTableRow row;
  row.beta = beta;
  row.reps = cfg.reps;
  row.seed = cfg.seed;
  row.map_err0 = c.map0 / n;
  row.map_err1 = c.map1 / n;
  row.map_sum = row.map_err0 + row.map_err1;
  row.rb_err0 = c.rb0 / n;
  row.rb_err1 = c.rb1 / n;
  row.rb_sum = row.rb_err0 + row.rb_err1;
  auto se = [n](double mean, std::int64_t sq) {
    if (n < 2) return 0.0;
    const double var = (static_cast<double>(sq) - n * mean * mean) / (n - 1.0);
    return std::sqrt(std::max(0.0, var) / n);
  };
  row.map_sum_se = se(row.map_sum, c.map_sq);
  row.rb_sum_se = se(row.rb_sum, c.rb_sq);
  return row;
}

inline std::vector<RiskTableRow> risk_table(const RiskTableConfig& cfg) {
  std::vector<RiskTableRow> rows;
  for (std::size_t i = 0; i < cfg.betas.size(); ++i) rows.push_back(risk_row(cfg, i));
  return rows;
}

}  // namespace relbel::classify
