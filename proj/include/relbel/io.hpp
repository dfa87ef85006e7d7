#pragma once

// JSON ingestion of models and configs, JSON and CSV emission of reports.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "relbel/classify.hpp"
#include "relbel/decision.hpp"
#include "relbel/discretization.hpp"
#include "relbel/error.hpp"
#include "relbel/evidence.hpp"
#include "relbel/limits.hpp"
#include "relbel/model.hpp"
#include "relbel/regress.hpp"

namespace relbel {

using json = nlohmann::json;

NLOHMANN_JSON_SERIALIZE_ENUM(Verdict, {{Verdict::EvidenceFor, "evidence-for"},
                                       {Verdict::EvidenceAgainst, "evidence-against"},
                                       {Verdict::NoEvidence, "no-evidence"}})
NLOHMANN_JSON_SERIALIZE_ENUM(LossKind, {{LossKind::RB, "rb"},
                                        {LossKind::MAP, "map"},
                                        {LossKind::RBEta, "rb-eta"},
                                        {LossKind::RBLambdaEta, "rb-lambda-eta"},
                                        {LossKind::Weighted, "weighted"}})
NLOHMANN_JSON_SERIALIZE_ENUM(CredibleConvention, {{CredibleConvention::SupGeq, "sup-geq"},
                                                  {CredibleConvention::QuantileGt, "quantile-gt"}})

NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(PosteriorReport, posterior, evidence_norm)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(Marginal, prior, predictive)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(EvidenceTable, labels, source_index, prior, posterior, rb, dropped,
                                   normalization)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(Estimate, index, tie)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(RegionReport, members, cutoff, posterior_content, prior_content)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(HypothesisReport, psi0, rb_at_psi0, strength, posterior_mass, verdict)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(RiskDecomposition, total_term, action_term)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(DecisionRule, action_per_x, tie)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(RiskReport, prior_risk, posterior_risk_per_x, decomposition)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(Grid1D, lo, hi, n_cells)

namespace classify {
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(RiskTableRow, beta, map_err0, map_err1, map_sum, rb_err0, rb_err1, rb_sum,
                                   reps, seed, map_sum_se, rb_sum_se)
}

namespace limits {
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(LimitStep, parameter, action, action_value, region_size, region_content,
                                   discrepancy)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(SandwichStep, eta, lpl_size, lower_holds, upper_holds, equal)
}  // namespace limits

namespace regress {

inline void to_json(json& j, const FunctionalReport& f) {
  j = json{{"w", std::vector<double>(f.w.data(), f.w.data() + f.w.size())},
           {"psi_map", f.psi_map},
           {"psi_rb", f.psi_rb},
           {"sigma2_psi", f.sigma2_psi},
           {"sigma2_psi_post", f.sigma2_psi_post},
           {"z_map", f.z_map},
           {"z_rb", f.z_rb},
           {"sigma2_z", f.sigma2_z},
           {"sigma2_z_post", f.sigma2_z_post},
           {"magnifier", f.magnifier}};
}

inline void from_json(const json& j, FunctionalReport& f) {
  const auto w = j.at("w").get<std::vector<double>>();
  f.w = Eigen::Map<const Eigen::VectorXd>(w.data(), static_cast<Eigen::Index>(w.size()));
  j.at("psi_map").get_to(f.psi_map);
  j.at("psi_rb").get_to(f.psi_rb);
  j.at("sigma2_psi").get_to(f.sigma2_psi);
  j.at("sigma2_psi_post").get_to(f.sigma2_psi_post);
  j.at("z_map").get_to(f.z_map);
  j.at("z_rb").get_to(f.z_rb);
  j.at("sigma2_z").get_to(f.sigma2_z);
  j.at("sigma2_z_post").get_to(f.sigma2_z_post);
  j.at("magnifier").get_to(f.magnifier);
}

NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(GridCheck, closed_form, grid_argmax, gap, cell_width)

}  // namespace regress

namespace limits {

inline void to_json(json& j, const LimitTrace& t) {
  j = json{{"experiment", t.experiment}, {"steps", t.steps}, {"target", t.target}, {"threshold", t.threshold}};
  j["stabilization_index"] = t.stabilization_index ? json(*t.stabilization_index) : json(nullptr);
}

inline void from_json(const json& j, LimitTrace& t) {
  j.at("experiment").get_to(t.experiment);
  j.at("steps").get_to(t.steps);
  j.at("target").get_to(t.target);
  j.at("threshold").get_to(t.threshold);
  const auto& s = j.at("stabilization_index");
  t.stabilization_index = s.is_null() ? std::nullopt : std::optional<std::size_t>(s.get<std::size_t>());
}

inline void to_json(json& j, const SandwichReport& r) {
  j = json{{"gamma_requested", r.gamma_requested},
           {"gamma_used", r.gamma_used},
           {"gamma_next", r.gamma_next},
           {"exact", r.exact},
           {"credible_size", r.credible_size},
           {"steps", r.steps},
           {"cell_width", r.cell_width}};
  j["holds_from"] = r.holds_from ? json(*r.holds_from) : json(nullptr);
}

}  // namespace limits

// ---------------------------------------------------------------------------
// Input

inline std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::Io, path, "cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline json read_json(const std::string& path) {
  try {
    return json::parse(read_text(path));
  } catch (const json::exception& e) {
    fail(ErrorCode::Parse, path, e.what());
  }
}

struct ModelDocument {
  FiniteModel model;
  PsiMap psi;
};

/// {"theta": [...], "x": [...], "likelihood": [[...]], "prior": [...],
///  "psi": {"labels": [...], "assignment": [...]}}; psi defaults to identity.
inline ModelDocument parse_model(const json& doc) {
  ModelDocument out;
  try {
    if (doc.contains("theta")) doc.at("theta").get_to(out.model.theta_labels);
    if (doc.contains("x")) doc.at("x").get_to(out.model.x_labels);
    doc.at("likelihood").get_to(out.model.likelihood);
    doc.at("prior").get_to(out.model.prior);
  } catch (const json::exception& e) {
    fail(ErrorCode::Parse, "model", e.what());
  }
  out.model = validate(std::move(out.model));
  if (doc.contains("psi")) {
    try {
      const auto& p = doc.at("psi");
      if (p.contains("labels")) p.at("labels").get_to(out.psi.psi_labels);
      p.at("assignment").get_to(out.psi.assignment);
    } catch (const json::exception& e) {
      fail(ErrorCode::Parse, "psi", e.what());
    }
    out.psi = validate(out.model, std::move(out.psi));
  } else {
    out.psi = PsiMap::identity(out.model);
  }
  return out;
}

inline json model_to_json(const FiniteModel& m, const PsiMap& psi) {
  return json{{"theta", m.theta_labels},
              {"x", m.x_labels},
              {"likelihood", m.likelihood},
              {"prior", m.prior},
              {"psi", {{"labels", psi.psi_labels}, {"assignment", psi.assignment}}}};
}

/// {"family": "normal", "mean": m, "var": v} | {"family": "beta", "alpha": a, "beta": b}
/// | {"family": "uniform", "a": a, "b": b} | {"family": "lognormal", "mean": m, "var": v}
inline DensityFamily parse_density(const json& j) {
  try {
    const auto family = j.at("family").get<std::string>();
    auto positive = [&](const char* key) {
      const double v = j.at(key).get<double>();
      if (!(v > 0.0) || !std::isfinite(v)) fail(ErrorCode::InvalidSpec, key, "must be positive");
      return v;
    };
    if (family == "normal") return NormalDensity{j.at("mean").get<double>(), positive("var")};
    if (family == "beta") return BetaDensity{positive("alpha"), positive("beta")};
    if (family == "uniform") {
      const UniformDensity u{j.at("a").get<double>(), j.at("b").get<double>()};
      if (!(u.a < u.b)) fail(ErrorCode::BadRange, "b", "uniform density needs a < b");
      return u;
    }
    if (family == "lognormal") return LogNormalDensity{j.at("mean").get<double>(), positive("var")};
    fail(ErrorCode::InvalidSpec, "family", "unknown density family " + family);
  } catch (const json::exception& e) {
    fail(ErrorCode::Parse, "density", e.what());
  }
}

inline Grid1D parse_grid(const json& j) {
  try {
    return build_grid(j.at("lo").get<double>(), j.at("hi").get<double>(), j.at("n_cells").get<std::size_t>());
  } catch (const json::exception& e) {
    fail(ErrorCode::Parse, "grid", e.what());
  }
}

/// Plain numeric CSV, row-major; a first line that does not parse as numbers is a header.
inline std::vector<std::vector<double>> parse_csv_numbers(const std::string& text, const std::string& origin) {
  std::vector<std::vector<double>> rows;
  std::istringstream in(text);
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    std::vector<double> row;
    std::istringstream cells(line);
    std::string cell;
    bool numeric = true;
    while (std::getline(cells, cell, ',')) {
      try {
        std::size_t used = 0;
        row.push_back(std::stod(cell, &used));
        if (cell.find_first_not_of(" \t", used) != std::string::npos) numeric = false;
      } catch (const std::exception&) {
        numeric = false;
      }
    }
    if (!numeric) {
      if (first) {
        first = false;
        continue;
      }
      fail(ErrorCode::Parse, origin, "non-numeric CSV row: " + line);
    }
    first = false;
    if (!rows.empty() && rows.front().size() != row.size())
      fail(ErrorCode::Parse, origin, "ragged CSV rows");
    rows.push_back(std::move(row));
  }
  return rows;
}

inline Eigen::MatrixXd to_matrix(const std::vector<std::vector<double>>& rows) {
  if (rows.empty()) return {};
  Eigen::MatrixXd m(rows.size(), rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j) m(i, j) = rows[i][j];
  return m;
}

/// A vector given either as one column or one row.
inline Eigen::VectorXd to_vector(const std::vector<std::vector<double>>& rows, const std::string& origin) {
  const Eigen::MatrixXd m = to_matrix(rows);
  if (m.cols() == 1) return m.col(0);
  if (m.rows() == 1) return m.row(0).transpose();
  fail(ErrorCode::Parse, origin, "expected a single row or column");
}

// ---------------------------------------------------------------------------
// CSV output

enum class Precision { Short, Full };

inline std::string format_number(double v, Precision p) {
  char buf[64];
  std::snprintf(buf, sizeof buf, p == Precision::Full ? "%.17g" : "%.6g", v);
  return buf;
}

inline std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

inline std::string emit_csv(const CsvTable& t) {
  std::string out;
  auto line = [&out](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out += ',';
      out += csv_escape(cells[i]);
    }
    out += "\r\n";
  };
  line(t.header);
  for (const auto& r : t.rows) line(r);
  return out;
}

inline CsvTable risk_table_csv(const std::vector<classify::RiskTableRow>& rows, Precision p) {
  CsvTable t{{"beta", "map_err0", "map_err1", "map_sum", "rb_err0", "rb_err1", "rb_sum", "reps", "seed"}, {}};
  for (const auto& r : rows) {
    t.rows.push_back({format_number(r.beta, p), format_number(r.map_err0, p), format_number(r.map_err1, p),
                      format_number(r.map_sum, p), format_number(r.rb_err0, p), format_number(r.rb_err1, p),
                      format_number(r.rb_sum, p), std::to_string(r.reps), std::to_string(r.seed)});
  }
  return t;
}

inline CsvTable trace_csv(const limits::LimitTrace& trace, Precision p) {
  CsvTable t{{"step", "parameter", "action", "action_value", "region_size", "region_content", "discrepancy"}, {}};
  for (std::size_t i = 0; i < trace.steps.size(); ++i) {
    const auto& s = trace.steps[i];
    t.rows.push_back({std::to_string(i), format_number(s.parameter, p), std::to_string(s.action),
                      format_number(s.action_value, p), std::to_string(s.region_size),
                      format_number(s.region_content, p), format_number(s.discrepancy, p)});
  }
  return t;
}

inline CsvTable sandwich_csv(const std::vector<limits::SandwichReport>& reports, Precision p) {
  CsvTable t{{"table", "cell_width", "gamma_used", "gamma_next", "eta", "credible_size", "lpl_size",
              "lower_holds", "upper_holds", "equal"},
             {}};
  for (std::size_t k = 0; k < reports.size(); ++k) {
    const auto& r = reports[k];
    for (const auto& s : r.steps) {
      t.rows.push_back({std::to_string(k), format_number(r.cell_width, p), format_number(r.gamma_used, p),
                        format_number(r.gamma_next, p), format_number(s.eta, p), std::to_string(r.credible_size),
                        std::to_string(s.lpl_size), s.lower_holds ? "1" : "0", s.upper_holds ? "1" : "0",
                        s.equal ? "1" : "0"});
    }
  }
  return t;
}

}  // namespace relbel
