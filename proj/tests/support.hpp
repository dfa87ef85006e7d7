#pragma once

// Shared fixtures for the unit and acceptance tests: random finite models and
// a few brute-force reference computations that avoid the library code paths.

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <cstdint>
#include <numeric>
#include <random>
#include <vector>

#include "relbel/relbel.hpp"

namespace relbel::testing {

struct RandomProblem {
  FiniteModel model;
  PsiMap psi;
};

// |Theta| <= 6, |X| <= 6, |Psi| <= 4, every prior mass >= 0.01, Psi surjective.
inline RandomProblem random_problem(std::mt19937_64& gen) {
  std::uniform_int_distribution<int> n_theta_d(1, 6), n_x_d(1, 6);
  const int n_theta = n_theta_d(gen);
  const int n_x = n_x_d(gen);
  const int n_psi = std::uniform_int_distribution<int>(1, std::min(4, n_theta))(gen);
  std::gamma_distribution<double> g(1.0, 1.0);

  RandomProblem p;
  for (int i = 0; i < n_theta; ++i) p.model.theta_labels.push_back("t" + std::to_string(i));
  for (int j = 0; j < n_x; ++j) p.model.x_labels.push_back("x" + std::to_string(j));

  // Likelihood rows: Dirichlet(1) with occasional exact zeros.
  std::bernoulli_distribution zero(0.15);
  for (int i = 0; i < n_theta; ++i) {
    std::vector<double> row(n_x);
    double s = 0.0;
    while (s == 0.0) {
      s = 0.0;
      for (auto& v : row) {
        v = zero(gen) ? 0.0 : g(gen);
        s += v;
      }
    }
    for (auto& v : row) v /= s;
    p.model.likelihood.push_back(row);
  }

  // Prior: floor of 0.01 per theta plus a Dirichlet share of the rest.
  std::vector<double> raw(n_theta);
  double s = 0.0;
  for (auto& v : raw) s += (v = g(gen));
  const double free = 1.0 - 0.01 * n_theta;
  for (auto& v : raw) v = 0.01 + free * v / s;
  p.model.prior = raw;
  p.model = validate(p.model);

  // Surjective Psi: first n_psi thetas (after a shuffle) cover every psi.
  std::vector<std::size_t> order(n_theta);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::shuffle(order.begin(), order.end(), gen);
  p.psi.assignment.assign(n_theta, 0);
  std::uniform_int_distribution<int> pick(0, n_psi - 1);
  for (int k = 0; k < n_theta; ++k) p.psi.assignment[order[k]] = k < n_psi ? k : pick(gen);
  for (int k = 0; k < n_psi; ++k) p.psi.psi_labels.push_back("p" + std::to_string(k));
  p.psi = validate(p.model, p.psi);
  return p;
}

// x values with positive prior predictive mass.
inline std::vector<std::size_t> possible_x(const FiniteModel& m) {
  std::vector<std::size_t> xs;
  for (std::size_t j = 0; j < m.n_x(); ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < m.n_theta(); ++i) s += m.prior[i] * m.likelihood[i][j];
    if (s > 0.0) xs.push_back(j);
  }
  return xs;
}

// Joint table p(psi, x) summed directly from theta.
inline std::vector<std::vector<double>> joint_psi_x(const RandomProblem& p) {
  std::vector<std::vector<double>> joint(p.psi.n_psi(), std::vector<double>(p.model.n_x(), 0.0));
  for (std::size_t i = 0; i < p.model.n_theta(); ++i)
    for (std::size_t j = 0; j < p.model.n_x(); ++j)
      joint[p.psi.assignment[i]][j] += p.model.prior[i] * p.model.likelihood[i][j];
  return joint;
}

// Models in which every observation is possible, so every rule is defined everywhere.
inline RandomProblem random_full_support_problem(std::mt19937_64& gen) {
  for (;;) {
    auto p = random_problem(gen);
    if (possible_x(p.model).size() == p.model.n_x()) return p;
  }
}

inline ErrorCode error_code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::Io;  // sentinel: nothing was thrown; no test expects Io from a pure call
}

inline FiniteModel two_by_two() {
  FiniteModel m;
  m.theta_labels = {"a", "b"};
  m.x_labels = {"0", "1"};
  m.likelihood = {{0.8, 0.2}, {0.2, 0.8}};
  m.prior = {0.5, 0.5};
  return validate(m);
}

}  // namespace relbel::testing
