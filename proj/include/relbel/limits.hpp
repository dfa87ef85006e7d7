#pragma once

// Numerical checks of the limiting behaviour of prior-based Bayes rules:
// eta -> 0 for countable parameters, cell width -> 0 for regular
// discretizations, and convergence of credible and lowest posterior loss
// regions.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "relbel/decision.hpp"
#include "relbel/discretization.hpp"
#include "relbel/error.hpp"
#include "relbel/evidence.hpp"
#include "relbel/model.hpp"

namespace relbel::limits {

using Density = std::function<double(double)>;

struct LimitStep {
  double parameter = 0.0;  // eta, or cell width for grid ladders
  std::size_t action = 0;  // chosen index (cell for grids)
  double action_value = 0.0;
  std::size_t region_size = 0;
  double region_content = 0.0;
  double discrepancy = 0.0;
};

struct LimitTrace {
  std::string experiment;
  std::vector<LimitStep> steps;
  double target = 0.0;
  std::optional<std::size_t> stabilization_index;  // first step after which discrepancy stays 0
  double threshold = 0.0;  // eta bound for action stabilization, when applicable
};

namespace detail {

inline void check_ladder(const std::vector<double>& ladder) {
  if (ladder.empty()) fail(ErrorCode::InvalidSpec, "ladder", "ladder is empty");
  for (std::size_t i = 0; i < ladder.size(); ++i) {
    if (!(ladder[i] > 0.0)) fail(ErrorCode::BadEta, "ladder", "ladder values must be positive");
    if (i > 0 && !(ladder[i] < ladder[i - 1]))
      fail(ErrorCode::InvalidSpec, "ladder", "ladder must be strictly decreasing");
  }
}

inline void check_grid_ladder(const std::vector<Grid1D>& grids) {
  if (grids.empty()) fail(ErrorCode::InvalidSpec, "grids", "grid ladder is empty");
  for (std::size_t i = 1; i < grids.size(); ++i) {
    if (grids[i].lo != grids[0].lo || grids[i].hi != grids[0].hi)
      fail(ErrorCode::InvalidSpec, "grids", "ladder grids must share one range");
    if (!(grids[i].n_cells > grids[i - 1].n_cells) || grids[i].n_cells % grids[i - 1].n_cells != 0)
      fail(ErrorCode::InvalidSpec, "grids", "each grid must refine the previous one");
  }
}

inline void set_stabilization(LimitTrace& trace) {
  std::optional<std::size_t> idx;
  for (std::size_t i = trace.steps.size(); i-- > 0;) {
    if (trace.steps[i].discrepancy != 0.0) break;
    idx = i;
  }
  trace.stabilization_index = idx;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Countable parameter, eta -> 0.

/// Bayes action under the bounded loss [psi != a] / max(eta, pi(psi)) along
/// an eta ladder. The target is the relative belief estimate; discrepancy is
/// the index distance from it.
inline LimitTrace eta_limit(const Masses& prior, const Masses& posterior, const std::vector<double>& ladder) {
  detail::check_ladder(ladder);
  const auto table = rb_table(prior, posterior);
  const auto est = rb_estimate(table);
  if (est.tie) fail(ErrorCode::TieAtMaximizer, "posterior", "relative belief maximizer is not unique");
  const std::size_t target = table.source_index[est.index];

  LimitTrace trace;
  trace.experiment = "eta";
  trace.target = static_cast<double>(target);
  trace.threshold = prior[target];
  for (double eta : ladder) {
    const auto loss = make_loss(LossKind::RBEta, prior, eta);
    const auto pick = bayes_action(loss, posterior);
    LimitStep step;
    step.parameter = eta;
    step.action = pick.index;
    step.action_value = static_cast<double>(pick.index);
    step.discrepancy = std::fabs(static_cast<double>(pick.index) - trace.target);
    trace.steps.push_back(step);
  }
  detail::set_stabilization(trace);
  return trace;
}

inline LimitTrace eta_limit(const FiniteModel& model, const PsiMap& psi, std::size_t x,
                            const std::vector<double>& ladder) {
  return eta_limit(push_forward(model.prior, psi), psi_posterior(model, psi, x), ladder);
}

/// Prior proportional to ratio^i on {0, 1, ...} truncated where the remaining
/// tail mass drops to `tail`, with x | i ~ Binomial(trials, (i + 1) / (K + 2))
/// where K is the last retained index.
struct CountableExample {
  Masses prior;
  Masses likelihood;  // at the observed x
  Masses posterior;
  std::size_t truncated_at = 0;  // K
  double discarded_tail = 0.0;
};

inline CountableExample geometric_example(double ratio = 0.5, double tail = 1e-10, int trials = 40,
                                          int observed = 20) {
  if (!(ratio > 0.0 && ratio < 1.0)) fail(ErrorCode::InvalidSpec, "ratio", "must lie in (0, 1)");
  if (observed < 0 || observed > trials) fail(ErrorCode::InvalidSpec, "observed", "must lie in [0, trials]");
  CountableExample ex;
  // Tail beyond K has mass ratio^(K + 1).
  std::size_t k = 0;
  while (std::pow(ratio, static_cast<double>(k + 1)) > tail) ++k;
  ex.truncated_at = k;
  ex.discarded_tail = std::pow(ratio, static_cast<double>(k + 1));
  ex.prior.resize(k + 1);
  for (std::size_t i = 0; i <= k; ++i) ex.prior[i] = (1.0 - ratio) * std::pow(ratio, static_cast<double>(i));
  const double kept = accurate_sum(ex.prior);
  for (double& p : ex.prior) p /= kept;

  const double log_choose =
      std::lgamma(trials + 1.0) - std::lgamma(observed + 1.0) - std::lgamma(trials - observed + 1.0);
  ex.likelihood.resize(k + 1);
  for (std::size_t i = 0; i <= k; ++i) {
    const double p = (static_cast<double>(i) + 1.0) / (static_cast<double>(k) + 2.0);
    ex.likelihood[i] = std::exp(log_choose + observed * std::log(p) + (trials - observed) * std::log1p(-p));
  }
  ex.posterior.resize(k + 1);
  KahanSum m;
  for (std::size_t i = 0; i <= k; ++i) {
    ex.posterior[i] = ex.prior[i] * ex.likelihood[i];
    m += ex.posterior[i];
  }
  for (double& p : ex.posterior) p /= m.value();
  return ex;
}

// ---------------------------------------------------------------------------
// Regular discretizations, cell width -> 0.

struct GridTables {
  GriddedDistribution prior;
  GriddedDistribution posterior;
};

/// Cell masses of the prior and of the posterior proportional to prior * likelihood.
inline GridTables grid_tables(const Density& prior_density, const Density& likelihood, const Grid1D& grid,
                              std::size_t quadrature_points = 8) {
  GridTables t{discretize(prior_density, grid, quadrature_points),
               discretize([&](double v) { return prior_density(v) * likelihood(v); }, grid,
                          quadrature_points)};
  // A cell with no prior mass cannot carry posterior mass.
  for (std::size_t i = 0; i < grid.n_cells; ++i)
    if (t.prior.masses[i] == 0.0) t.posterior.masses[i] = 0.0;
  return t;
}

namespace detail {

inline void check_separation(const EvidenceTable& t) {
  double lo = INFINITY, hi = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t.posterior[i] == 0.0) continue;
    lo = std::min(lo, t.rb[i]);
    hi = std::max(hi, t.rb[i]);
  }
  if (!(hi - lo > 1e-12 * hi))
    fail(ErrorCode::SeparationViolated, "likelihood", "relative belief is flat; no separated maximizer");
}

}  // namespace detail

/// Bayes action under the discretized bounded loss with eta(lambda) equal to
/// half the prior mass of the cell maximizing relative belief. `target` is
/// the continuous relative belief estimate.
inline LimitTrace lambda_limit(const Density& prior_density, const Density& likelihood,
                               const std::vector<Grid1D>& grids, double target) {
  detail::check_grid_ladder(grids);
  LimitTrace trace;
  trace.experiment = "lambda";
  trace.target = target;
  for (const auto& grid : grids) {
    const auto cells = grid_tables(prior_density, likelihood, grid);
    const auto table = rb_table(cells.prior.masses, cells.posterior.masses);
    detail::check_separation(table);
    const std::size_t best = table.source_index[rb_estimate(table).index];
    const double eta = 0.5 * cells.prior.masses[best];
    const auto loss = make_loss(LossKind::RBLambdaEta, cells.prior.masses, eta);
    const auto pick = bayes_action(loss, cells.posterior.masses);
    LimitStep step;
    step.parameter = grid.cell_width();
    step.action = pick.index;
    step.action_value = grid.midpoint(pick.index);
    step.discrepancy = std::fabs(step.action_value - target);
    trace.steps.push_back(step);
  }
  return trace;
}

/// Bayes action under the cell indicator loss [psi not in B(a)], i.e. the
/// cell of largest posterior mass. `target` is the posterior mode.
inline LimitTrace map_limit_contrast(const Density& prior_density, const Density& likelihood,
                                     const std::vector<Grid1D>& grids, double target) {
  detail::check_grid_ladder(grids);
  LimitTrace trace;
  trace.experiment = "map";
  trace.target = target;
  for (const auto& grid : grids) {
    const auto cells = grid_tables(prior_density, likelihood, grid);
    const auto table = rb_table(cells.prior.masses, cells.posterior.masses);
    detail::check_separation(table);
    const auto loss = make_loss(LossKind::MAP, cells.prior.masses);
    const auto pick = bayes_action(loss, cells.posterior.masses);
    LimitStep step;
    step.parameter = grid.cell_width();
    step.action = pick.index;
    step.action_value = grid.midpoint(pick.index);
    step.discrepancy = std::fabs(step.action_value - target);
    trace.steps.push_back(step);
  }
  return trace;
}

namespace detail {

// Credible region of a gridded problem as a set of cell indices.
inline std::set<std::size_t> credible_cells(const GridTables& cells, double gamma) {
  const auto table = rb_table(cells.prior.masses, cells.posterior.masses);
  const auto region = credible_region(table, gamma);
  std::set<std::size_t> out;
  for (auto i : region.members) out.insert(table.source_index[i]);
  return out;
}

}  // namespace detail

/// Posterior mass of the symmetric difference between the undiscretized
/// gamma-credible region on each ladder grid and on a reference grid
/// `reference_factor` times finer than the finest ladder grid.
inline LimitTrace region_limit(const Density& prior_density, const Density& likelihood, double gamma,
                               const std::vector<Grid1D>& grids, std::size_t reference_factor = 16) {
  detail::check_grid_ladder(grids);
  check_gamma(gamma);
  const Grid1D reference = refine(grids.back(), reference_factor);
  const auto ref_cells = grid_tables(prior_density, likelihood, reference);
  const auto ref_region = detail::credible_cells(ref_cells, gamma);

  LimitTrace trace;
  trace.experiment = "region";
  KahanSum ref_content;
  for (auto i : ref_region) ref_content += ref_cells.posterior.masses[i];
  trace.target = ref_content.value();
  for (const auto& grid : grids) {
    const auto cells = grid_tables(prior_density, likelihood, grid);
    const auto region = detail::credible_cells(cells, gamma);
    const std::size_t f = reference.n_cells / grid.n_cells;
    KahanSum diff, content;
    for (std::size_t j = 0; j < reference.n_cells; ++j) {
      const bool coarse = region.count(j / f) > 0;
      const bool fine = ref_region.count(j) > 0;
      if (coarse != fine) diff += ref_cells.posterior.masses[j];
    }
    for (auto i : region) content += cells.posterior.masses[i];
    LimitStep step;
    step.parameter = grid.cell_width();
    step.region_size = region.size();
    step.region_content = content.value();
    step.discrepancy = diff.value();
    if (!region.empty()) {
      step.action = *region.begin();
      step.action_value = grid.midpoint(step.action);
    }
    trace.steps.push_back(step);
  }
  return trace;
}

// ---------------------------------------------------------------------------
// Lowest posterior loss regions under the bounded loss versus credible regions.

struct SandwichStep {
  double eta = 0.0;
  std::size_t lpl_size = 0;
  bool lower_holds = false;  // C_gamma is inside D_eta
  bool upper_holds = false;  // D_eta is inside C_gamma_next
  bool equal = false;        // D_eta == C_gamma
};

struct SandwichReport {
  double gamma_requested = 0.0;
  double gamma_used = 0.0;  // posterior content of C_gamma, an attainable level
  double gamma_next = 1.0;  // next attainable level above gamma_used
  bool exact = false;       // gamma_requested is itself attainable
  std::size_t credible_size = 0;
  std::vector<SandwichStep> steps;
  std::optional<std::size_t> holds_from;  // first step from which both inclusions always hold
  double cell_width = 0.0;                // set for gridded tables
};

namespace detail {

inline bool subset(const std::vector<std::size_t>& a, const std::vector<std::size_t>& b) {
  return std::includes(b.begin(), b.end(), a.begin(), a.end());
}

// Posterior contents of the upper sets {rb >= c}, c over the distinct rb values.
inline std::vector<double> attainable_levels(const EvidenceTable& t) {
  std::vector<double> levels;
  std::vector<double> values = t.rb;
  std::sort(values.begin(), values.end(), std::greater<>());
  values.erase(std::unique(values.begin(), values.end()), values.end());
  for (double c : values) {
    KahanSum s;
    for (std::size_t i = 0; i < t.size(); ++i)
      if (t.rb[i] >= c) s += t.posterior[i];
    levels.push_back(std::min(s.value(), 1.0));
  }
  return levels;
}

}  // namespace detail

/// Checks C_gamma within D_{eta,gamma} within C_gamma' along an eta ladder,
/// with gamma' the next attainable content level.
inline SandwichReport lpl_sandwich(const Masses& prior, const Masses& posterior, double gamma,
                                   const std::vector<double>& ladder) {
  check_gamma(gamma);
  detail::check_ladder(ladder);
  const auto table = rb_table(prior, posterior);
  if (!table.dropped.empty())
    fail(ErrorCode::ZeroPriorMass, "prior", "sandwich needs positive prior mass everywhere");
  const auto levels = detail::attainable_levels(table);

  SandwichReport rep;
  rep.gamma_requested = gamma;
  std::optional<std::size_t> used;
  for (std::size_t i = 0; i < levels.size(); ++i) {
    if (levels[i] >= gamma - kContentTol) {
      used = i;
      break;
    }
  }
  // Full content means the whole support, even where the last levels differ
  // from the previous ones by less than the content slack.
  if (gamma >= 1.0 && used && levels.back() >= 1.0 - kContentTol) used = levels.size() - 1;
  if (!used) fail(ErrorCode::NoAttainableGamma, "gamma", "no upper rb set reaches the requested content");
  rep.gamma_used = levels[*used];
  rep.exact = std::fabs(rep.gamma_used - gamma) <= kContentTol;
  rep.gamma_next = *used + 1 < levels.size() ? levels[*used + 1] : rep.gamma_used;

  const bool full = *used + 1 == levels.size();
  const auto c_used = credible_region(table, full ? 1.0 : rep.gamma_used);
  const auto c_next = credible_region(table, *used + 2 >= levels.size() ? 1.0 : rep.gamma_next);
  rep.credible_size = c_used.members.size();
  for (double eta : ladder) {
    const auto loss = make_loss(LossKind::RBEta, prior, eta);
    const auto d = lpl_region(loss, posterior, full ? 1.0 : rep.gamma_used);
    SandwichStep s;
    s.eta = eta;
    s.lpl_size = d.members.size();
    s.lower_holds = detail::subset(c_used.members, d.members);
    s.upper_holds = detail::subset(d.members, c_next.members);
    s.equal = d.members == c_used.members;
    rep.steps.push_back(s);
  }
  for (std::size_t i = rep.steps.size(); i-- > 0;) {
    if (!(rep.steps[i].lower_holds && rep.steps[i].upper_holds)) break;
    rep.holds_from = i;
  }
  return rep;
}

/// The sandwich repeated across a grid ladder with an inner eta ladder of
/// `eta_steps` halvings from the largest cell prior mass.
inline std::vector<SandwichReport> lpl_sandwich_grid(const Density& prior_density, const Density& likelihood,
                                                     double gamma, const std::vector<Grid1D>& grids,
                                                     std::size_t eta_steps = 8) {
  detail::check_grid_ladder(grids);
  std::vector<SandwichReport> out;
  for (const auto& grid : grids) {
    const auto cells = grid_tables(prior_density, likelihood, grid);
    // Cells beyond the prior's numerical support cannot enter either region.
    Masses prior, post;
    for (std::size_t i = 0; i < grid.n_cells; ++i) {
      if (cells.prior.masses[i] > 0.0) {
        prior.push_back(cells.prior.masses[i]);
        post.push_back(cells.posterior.masses[i]);
      }
    }
    auto rep = lpl_sandwich(prior, post, gamma, eta_ladder(prior, eta_steps));
    rep.cell_width = grid.cell_width();
    out.push_back(std::move(rep));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Reparameterization: psi versus exp(psi).

struct ReparameterizationDemo {
  std::size_t rb_argmax_psi = 0;
  std::size_t rb_argmax_image = 0;
  std::size_t map_argmax_psi = 0;    // argmax of posterior mass / cell length on the psi grid
  std::size_t map_argmax_image = 0;  // the same on the image cells [e^a, e^b)
  double max_rb_relative_diff = 0.0;
  std::size_t map_cell_shift = 0;
};

/// Prior N(prior_mean, prior_var) on psi and posterior N(post_mean, post_var).
/// Image-cell masses come independently from the lognormal distributions of
/// exp(psi).
inline ReparameterizationDemo reparameterization_demo(const Grid1D& grid, double prior_mean, double prior_var,
                                                      double post_mean, double post_var) {
  const NormalDensity prior{prior_mean, prior_var}, post{post_mean, post_var};
  const LogNormalDensity prior_img{prior_mean, prior_var}, post_img{post_mean, post_var};
  Masses p(grid.n_cells), q(grid.n_cells), pi(grid.n_cells), qi(grid.n_cells);
  std::vector<double> len_img(grid.n_cells);
  for (std::size_t i = 0; i < grid.n_cells; ++i) {
    const double a = grid.lower(i), b = grid.upper(i);
    p[i] = prior.interval_mass(a, b);
    q[i] = post.interval_mass(a, b);
    pi[i] = prior_img.interval_mass(std::exp(a), std::exp(b));
    qi[i] = post_img.interval_mass(std::exp(a), std::exp(b));
    len_img[i] = std::exp(b) - std::exp(a);
  }
  auto normalize = [](Masses& m) {
    const double s = accurate_sum(m);
    for (double& v : m) v /= s;
  };
  normalize(p), normalize(q), normalize(pi), normalize(qi);

  const auto t_psi = rb_table(p, q);
  const auto t_img = rb_table(pi, qi);
  ReparameterizationDemo d;
  d.rb_argmax_psi = t_psi.source_index[rb_estimate(t_psi).index];
  d.rb_argmax_image = t_img.source_index[rb_estimate(t_img).index];
  for (std::size_t i = 0; i < grid.n_cells; ++i) {
    if (p[i] == 0.0 || pi[i] == 0.0) continue;
    const double a = q[i] / p[i], b = qi[i] / pi[i];
    if (q[i] > 1e-12) d.max_rb_relative_diff = std::max(d.max_rb_relative_diff, std::fabs(a - b) / a);
  }
  std::vector<double> dens_psi(grid.n_cells), dens_img(grid.n_cells);
  for (std::size_t i = 0; i < grid.n_cells; ++i) {
    dens_psi[i] = q[i] / grid.cell_width();
    dens_img[i] = qi[i] / len_img[i];
  }
  d.map_argmax_psi = argmax(dens_psi).index;
  d.map_argmax_image = argmax(dens_img).index;
  d.map_cell_shift = d.map_argmax_psi > d.map_argmax_image ? d.map_argmax_psi - d.map_argmax_image
                                                           : d.map_argmax_image - d.map_argmax_psi;
  return d;
}

}  // namespace relbel::limits
