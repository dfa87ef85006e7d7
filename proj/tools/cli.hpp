#pragma once

// Command-line front end. `run` is separate from main so tests can drive it.

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "relbel/relbel.hpp"

namespace relbel::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitNumerical = 3;

struct Options {
  std::string out_path;
  std::string precision = "short";

  std::string model_path;
  std::optional<std::size_t> x;
  double gamma = 0.95;
  std::string convention = "sup-geq";
  std::optional<std::size_t> psi0;
  std::string loss = "rb";
  std::optional<double> eta;

  std::string table1_betas = "1,14,32,100";
  double alpha = 1.0;
  double mu = 1.0;
  int n = 10;
  std::int64_t reps = 200000;
  std::uint64_t seed = 7;
  double psi0_prob = 0.05, psi1_prob = 0.80, epsilon = 0.01;
  double beta = 1.0, c_bar = 0.0, f0 = 1.0, f1 = 1.0;

  std::string design_path, response_path, w_path;
  double sigma2 = 1.0, tau2 = 1.0;
  std::size_t grid_cells = 0;

  std::string config_path;
};

namespace detail {

inline Precision precision_of(const Options& o) { return o.precision == "full" ? Precision::Full : Precision::Short; }

inline std::string dump(const json& j) { return j.dump(2) + "\n"; }

inline std::vector<double> parse_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      out.push_back(std::stod(item));
    } catch (const std::exception&) {
      fail(ErrorCode::Parse, "betas", "not a number: " + item);
    }
  }
  if (out.empty()) fail(ErrorCode::Parse, "betas", "empty list");
  return out;
}

inline std::size_t require_x(const Options& o, const FiniteModel& m) {
  if (!o.x) fail(ErrorCode::InvalidSpec, "--x", "an observation index is required");
  if (*o.x >= m.n_x()) fail(ErrorCode::IndexOutOfRange, "--x", "observation index out of range");
  return *o.x;
}

inline std::string cmd_model(const Options& o) {
  const auto doc = parse_model(read_json(o.model_path));
  json j{{"prior_predictive", prior_predictive(doc.model)},
         {"marginal", marginalize(doc.model, doc.psi)},
         {"renormalized", doc.model.renormalized}};
  if (o.x) j["posterior"] = posterior(doc.model, require_x(o, doc.model));
  return dump(j);
}

inline std::string cmd_evidence(const Options& o) {
  const auto doc = parse_model(read_json(o.model_path));
  const std::size_t x = require_x(o, doc.model);
  const auto table = rb_table(doc.model, doc.psi, x);
  const auto est = rb_estimate(table);
  const auto conv = o.convention == "quantile-gt" ? CredibleConvention::QuantileGt : CredibleConvention::SupGeq;
  std::size_t psi0 = est.index;
  if (o.psi0) {
    const auto pos = table.position_of(*o.psi0);
    if (!pos) fail(ErrorCode::IndexOutOfRange, "--psi0", "psi value absent from the evidence table");
    psi0 = *pos;
  }
  const auto hyp = assess_hypothesis(table, psi0);
  json j{{"labels", table.labels},
         {"rb", table.rb},
         {"estimate", table.source_index[est.index]},
         {"tie", est.tie},
         {"plausible", plausible_region(table)},
         {"credible", credible_region(table, o.gamma, conv)},
         {"gamma", o.gamma},
         {"convention", conv},
         {"strength", hyp.strength},
         {"hypothesis", hyp},
         {"table", table}};
  return dump(j);
}

inline std::string cmd_decide(const Options& o) {
  const auto doc = parse_model(read_json(o.model_path));
  const Masses pi = push_forward(doc.model.prior, doc.psi);
  LossKind kind;
  if (o.loss == "rb")
    kind = LossKind::RB;
  else if (o.loss == "map")
    kind = LossKind::MAP;
  else if (o.loss == "rb-eta")
    kind = LossKind::RBEta;
  else
    fail(ErrorCode::InvalidSpec, "--loss", "expected rb, map or rb-eta");
  const auto loss = make_loss(kind, pi, o.eta);
  const auto [rule, risk] = bayes_rule(doc.model, doc.psi, loss);
  json j{{"loss", kind},
         {"rule", rule},
         {"risk", risk},
         {"prior_risk_direct", prior_risk(doc.model, doc.psi, loss, rule)},
         {"prior_risk_closed_form", prior_risk_closed_form(doc.model, doc.psi, loss, rule)},
         {"conditional_errors", conditional_errors(doc.model, doc.psi, rule)}};
  if (loss.eta) j["eta"] = *loss.eta;
  return dump(j);
}

inline std::string cmd_table1(const Options& o) {
  classify::RiskTableConfig cfg;
  cfg.alpha = o.alpha;
  cfg.betas = parse_list(o.table1_betas);
  cfg.mu = o.mu;
  cfg.n = o.n;
  cfg.reps = o.reps;
  cfg.seed = o.seed;
  return emit_csv(risk_table_csv(classify::risk_table(cfg), precision_of(o)));
}

inline std::string cmd_known(const Options& o) {
  const classify::TwoClassSpec s{o.psi0_prob, o.psi1_prob, o.epsilon};
  const auto map = classify::map_rule(s), rb = classify::rb_rule(s);
  const auto em = classify::error_sum(s, map), er = classify::error_sum(s, rb);
  json j{{"map_rule", map},
         {"rb_rule", rb},
         {"map_errors", {{"err0", em.err0}, {"err1", em.err1}, {"sum", em.sum}}},
         {"rb_errors", {{"err0", er.err0}, {"err1", er.err1}, {"sum", er.sum}}}};
  return dump(j);
}

inline std::string cmd_predict(const Options& o) {
  const classify::PredictiveSpec s{o.alpha, o.beta, o.n, o.c_bar, o.f0, o.f1};
  const auto r = classify::predictive_classify(s);
  return dump(json{{"c_map", r.c_map}, {"c_rb", r.c_rb}, {"map_ratio", r.map_ratio}, {"rb_ratio", r.rb_ratio}});
}

inline std::string cmd_regress(const Options& o) {
  regress::RegressionSpec s;
  s.design = to_matrix(parse_csv_numbers(read_text(o.design_path), o.design_path));
  s.response = to_vector(parse_csv_numbers(read_text(o.response_path), o.response_path), o.response_path);
  s.sigma2 = o.sigma2;
  s.tau2 = o.tau2;
  const auto w = to_vector(parse_csv_numbers(read_text(o.w_path), o.w_path), o.w_path);
  const auto f = regress::functional_inference(s, w);
  const auto post = regress::posterior_params(s);
  json j = f;
  j["beta_post"] = std::vector<double>(post.mean.data(), post.mean.data() + post.mean.size());
  j["mle"] = std::vector<double>(post.mle.data(), post.mle.data() + post.mle.size());
  if (o.grid_cells > 0) j["grid_check"] = regress::rb_grid_check(s, w, regress::check_grid(f, o.grid_cells));
  return dump(j);
}

// Experiment configs for the limit commands.

inline std::vector<Grid1D> grid_ladder(const json& cfg) {
  const Grid1D base = parse_grid(cfg.at("grid"));
  const std::size_t steps = cfg.value("ladder_steps", std::size_t{4});
  std::vector<Grid1D> ladder{base};
  for (std::size_t k = 1; k < steps; ++k) ladder.push_back(refine(ladder.back(), 2));
  return ladder;
}

struct ContinuousProblem {
  DensityFamily prior;
  DensityFamily likelihood;  // as a function of psi
};

inline ContinuousProblem continuous_problem(const json& cfg) {
  return {parse_density(cfg.at("prior")), parse_density(cfg.at("likelihood"))};
}

inline double fine_argmax(const std::function<double(double)>& f, const Grid1D& g) {
  const Grid1D fine = refine(g, 16);
  std::vector<double> v(fine.n_cells);
  for (std::size_t i = 0; i < fine.n_cells; ++i) v[i] = f(fine.midpoint(i));
  return fine.midpoint(argmax(v).index);
}

inline std::string cmd_limits(const Options& o, const std::string& which) {
  const json cfg = read_json(o.config_path);
  const auto p = precision_of(o);
  try {
    if (which == "eta") {
      Masses prior, post;
      const std::size_t steps = cfg.value("steps", std::size_t{40});
      if (cfg.contains("model")) {
        const auto doc = parse_model(cfg.at("model"));
        const std::size_t x = cfg.at("x").get<std::size_t>();
        prior = push_forward(doc.model.prior, doc.psi);
        post = psi_posterior(doc.model, doc.psi, x);
      } else {
        const auto ex = limits::geometric_example(cfg.value("ratio", 0.5), cfg.value("tail", 1e-10),
                                                  cfg.value("trials", 40), cfg.value("observed", 20));
        prior = ex.prior;
        post = ex.posterior;
      }
      return emit_csv(trace_csv(limits::eta_limit(prior, post, eta_ladder(prior, steps)), p));
    }

    const auto prob = continuous_problem(cfg);
    auto prior_fn = [d = prob.prior](double v) { return pdf(d, v); };
    auto lik_fn = [d = prob.likelihood](double v) { return pdf(d, v); };
    const auto ladder = grid_ladder(cfg);
    if (which == "lambda") {
      double target;
      if (cfg.contains("target"))
        target = cfg.at("target").get<double>();
      else if (const auto* n = std::get_if<NormalDensity>(&prob.likelihood))
        target = n->mean;
      else
        target = fine_argmax(lik_fn, ladder.back());
      return emit_csv(trace_csv(limits::lambda_limit(prior_fn, lik_fn, ladder, target), p));
    }
    if (which == "map") {
      const double target = cfg.contains("target")
                                ? cfg.at("target").get<double>()
                                : fine_argmax([&](double v) { return prior_fn(v) * lik_fn(v); }, ladder.back());
      return emit_csv(trace_csv(limits::map_limit_contrast(prior_fn, lik_fn, ladder, target), p));
    }
    const double gamma = cfg.value("gamma", 0.95);
    if (which == "region") {
      const std::size_t factor = cfg.value("reference_factor", std::size_t{16});
      return emit_csv(trace_csv(limits::region_limit(prior_fn, lik_fn, gamma, ladder, factor), p));
    }
    if (which == "sandwich") {
      const std::size_t eta_steps = cfg.value("eta_steps", std::size_t{8});
      return emit_csv(sandwich_csv(limits::lpl_sandwich_grid(prior_fn, lik_fn, gamma, ladder, eta_steps), p));
    }
  } catch (const json::exception& e) {
    fail(ErrorCode::Parse, o.config_path, e.what());
  }
  fail(ErrorCode::InvalidSpec, "limits", "unknown experiment " + which);
}

inline bool file_exists(const std::string& path) { return std::ifstream(path).good(); }

}  // namespace detail

/// Runs one command line. Output goes to `out` (or --out); diagnostics to `err`.
inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Relative belief inference and prior-based decision theory", "relbel"};
  app.require_subcommand(1);
  app.fallthrough();
  app.add_option("--out", o.out_path, "Write the report to this file instead of stdout");
  app.add_option("--precision", o.precision, "Number formatting in CSV output: short (6 significant digits) or full")
      ->check(CLI::IsMember({"short", "full"}));

  auto* model = app.add_subcommand("model", "Validate a model; print prior predictive, marginal and posterior");
  model->add_option("--model", o.model_path, "Model JSON file")->required();
  model->add_option("--x", o.x, "Observation index for the posterior");

  auto* evidence = app.add_subcommand("evidence", "Relative belief ratios and the inferences built on them");
  evidence->add_option("--model", o.model_path, "Model JSON file")->required();
  evidence->add_option("--x", o.x, "Observation index")->required();
  evidence->add_option("--gamma", o.gamma, "Credible region level")->check(CLI::Range(0.0, 1.0));
  evidence->add_option("--convention", o.convention, "Credible region convention")
      ->check(CLI::IsMember({"sup-geq", "quantile-gt"}));
  evidence->add_option("--psi0", o.psi0, "Hypothesized psi index (defaults to the estimate)");

  auto* decide = app.add_subcommand("decide", "Bayes rule, prior risk and risk decomposition for a loss");
  decide->add_option("--model", o.model_path, "Model JSON file")->required();
  decide->add_option("--loss", o.loss, "Loss: rb, map or rb-eta")->check(CLI::IsMember({"rb", "map", "rb-eta"}));
  decide->add_option("--eta", o.eta, "Loss cap parameter for rb-eta");

  auto* classify = app.add_subcommand("classify", "Two-class diagnostic classification");
  classify->require_subcommand(1);
  auto* table1 = classify->add_subcommand("table1", "Monte Carlo misclassification table (CSV)");
  table1->add_option("--alpha", o.alpha, "beta prior alpha");
  table1->add_option("--betas", o.table1_betas, "Comma-separated beta prior values");
  table1->add_option("--mu", o.mu, "Mean of the class-1 density N(mu, 1)");
  table1->add_option("--n", o.n, "Number of labelled items");
  table1->add_option("--reps", o.reps, "Replications per beta")->check(CLI::PositiveNumber);
  table1->add_option("--seed", o.seed, "Random seed")->required();
  auto* known = classify->add_subcommand("known", "Known class proportion: MAP and RB rules with error sums");
  known->add_option("--psi0", o.psi0_prob, "P(positive | class 0)");
  known->add_option("--psi1", o.psi1_prob, "P(positive | class 1)");
  known->add_option("--eps", o.epsilon, "Prior probability of class 1");
  auto* predict = classify->add_subcommand("predict", "Predictive labels under a beta prior on the proportion");
  predict->add_option("--alpha", o.alpha, "beta prior alpha");
  predict->add_option("--beta", o.beta, "beta prior beta");
  predict->add_option("--n", o.n, "Number of labelled items");
  predict->add_option("--cbar", o.c_bar, "Fraction of class-1 labels");
  predict->add_option("--f0", o.f0, "Class-0 density at the new point");
  predict->add_option("--f1", o.f1, "Class-1 density at the new point");

  auto* regress = app.add_subcommand("regress", "Normal regression: MAP and RB estimates of w'beta and prediction at w");
  regress->add_option("--design", o.design_path, "Design matrix CSV")->required();
  regress->add_option("--response", o.response_path, "Response CSV")->required();
  regress->add_option("--sigma2", o.sigma2, "Known error variance")->required();
  regress->add_option("--tau2", o.tau2, "Prior variance of each coefficient")->required();
  regress->add_option("--w", o.w_path, "Direction CSV")->required();
  regress->add_option("--grid-check", o.grid_cells, "Also run the grid argmax check with this many cells");

  auto* limits = app.add_subcommand("limits", "Limit experiments, CSV traces for plotting");
  limits->require_subcommand(1);
  std::string which;
  for (const char* name : {"eta", "lambda", "map", "region", "sandwich"}) {
    auto* sub = limits->add_subcommand(name, std::string("Run the ") + name + " experiment");
    sub->add_option("--config", o.config_path, "Experiment JSON")->required();
    sub->callback([&which, name] { which = name; });
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  }

  try {
    for (const std::string* path : {&o.model_path, &o.design_path, &o.response_path, &o.w_path, &o.config_path}) {
      if (!path->empty() && !detail::file_exists(*path)) fail(ErrorCode::Io, *path, "file does not exist");
    }
    std::string report;
    if (model->parsed())
      report = detail::cmd_model(o);
    else if (evidence->parsed())
      report = detail::cmd_evidence(o);
    else if (decide->parsed())
      report = detail::cmd_decide(o);
    else if (table1->parsed())
      report = detail::cmd_table1(o);
    else if (known->parsed())
      report = detail::cmd_known(o);
    else if (predict->parsed())
      report = detail::cmd_predict(o);
    else if (regress->parsed())
      report = detail::cmd_regress(o);
    else if (limits->parsed())
      report = detail::cmd_limits(o, which);

    if (o.out_path.empty()) {
      out << report;
    } else {
      std::ofstream f(o.out_path, std::ios::binary);
      if (!f) fail(ErrorCode::Io, o.out_path, "cannot write output file");
      f << report;
    }
    return kExitOk;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return is_numerical_guard(e.code()) ? kExitNumerical : kExitValidation;
  }
}

}  // namespace relbel::cli
