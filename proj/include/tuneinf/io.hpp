#pragma once

// JSON and CSV output for fits, variance reports and simulation summaries.

#include "tuneinf/harness.hpp"

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iomanip>

namespace tuneinf {

using json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;

inline json to_json(const Vec& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

/// Row-major nested arrays.
inline json to_json(const Mat& m) {
  json a = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    a.push_back(std::move(row));
  }
  return a;
}

inline Vec vec_from_json(const json& a) {
  if (!a.is_array()) throw Error(ErrorCode::InvalidInput, "expected a JSON array");
  Vec v(static_cast<Eigen::Index>(a.size()));
  for (std::size_t i = 0; i < a.size(); ++i) v[static_cast<Eigen::Index>(i)] = a[i].get<double>();
  return v;
}

inline Mat mat_from_json(const json& a) {
  if (!a.is_array()) throw Error(ErrorCode::InvalidInput, "expected a JSON matrix");
  const auto r = static_cast<Eigen::Index>(a.size());
  const auto c = r ? static_cast<Eigen::Index>(a[0].size()) : 0;
  Mat m(r, c);
  for (Eigen::Index i = 0; i < r; ++i) {
    if (static_cast<Eigen::Index>(a[static_cast<std::size_t>(i)].size()) != c)
      throw Error(ErrorCode::InvalidInput, "ragged JSON matrix");
    for (Eigen::Index j = 0; j < c; ++j) m(i, j) = a[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)].get<double>();
  }
  return m;
}

inline json fit_to_json(const FitResult& f) {
  json j;
  j["schema_version"] = kSchemaVersion;
  j["criterion"] = to_string(f.criterion);
  j["theta_hat"] = to_json(f.theta_hat);
  j["lambda_hat"] = to_json(f.lambda_hat);
  j["D_hat"] = to_json(f.D_hat);
  j["J_hat"] = to_json(f.J_hat);
  json bs = json::array();
  for (auto s : f.boundary_status) bs.push_back(to_string(s));
  j["boundary_status"] = bs;
  json fb = json::array();
  for (bool b : f.flat_boundary) fb.push_back(b);
  j["flat_boundary"] = fb;
  j["criterion_value"] = f.criterion_value;
  j["criterion_slope_at_opt"] = to_json(f.criterion_slope_at_opt);
  j["slope_tolerance"] = to_json(f.slope_tolerance);
  j["lambda_domain"] = {{"lower", to_json(f.lambda_domain.lower)}, {"upper", to_json(f.lambda_domain.upper)}};
  j["solver_iterations"] = f.solver_iterations;
  j["residual_norm"] = f.residual_norm;
  j["seed"] = f.seed;
  j["notes"] = f.notes;
  json tr = json::array();
  for (const auto& t : f.trace) {
    json e;
    e["lambda"] = to_json(t.lambda);
    if (t.ok) e["value"] = t.value;
    else e["value"] = nullptr;
    e["ok"] = t.ok;
    e["phase"] = t.phase;
    tr.push_back(std::move(e));
  }
  j["trace"] = std::move(tr);
  return j;
}

inline FitResult fit_from_json(const json& j) {
  if (!j.contains("schema_version") || j["schema_version"].get<int>() != kSchemaVersion)
    throw Error(ErrorCode::InvalidInput, "fit.json has a missing or unsupported schema_version");
  FitResult f;
  try {
    f.criterion = criterion_from_string(j.at("criterion").get<std::string>());
    f.theta_hat = vec_from_json(j.at("theta_hat"));
    f.lambda_hat = vec_from_json(j.at("lambda_hat"));
    f.D_hat = mat_from_json(j.at("D_hat"));
    f.J_hat = mat_from_json(j.at("J_hat"));
    for (const auto& s : j.at("boundary_status")) f.boundary_status.push_back(boundary_from_string(s.get<std::string>()));
    for (const auto& b : j.at("flat_boundary")) f.flat_boundary.push_back(b.get<bool>());
    f.criterion_value = j.at("criterion_value").get<double>();
    f.criterion_slope_at_opt = vec_from_json(j.at("criterion_slope_at_opt"));
    f.slope_tolerance = vec_from_json(j.at("slope_tolerance"));
    f.lambda_domain = Box(vec_from_json(j.at("lambda_domain").at("lower")), vec_from_json(j.at("lambda_domain").at("upper")));
    f.solver_iterations = j.at("solver_iterations").get<int>();
    f.residual_norm = j.at("residual_norm").get<double>();
    f.seed = j.at("seed").get<std::uint64_t>();
    f.notes = j.at("notes").get<std::vector<std::string>>();
    for (const auto& t : j.at("trace")) {
      TracePoint p;
      p.lambda = vec_from_json(t.at("lambda"));
      p.ok = t.at("ok").get<bool>();
      p.value = p.ok ? t.at("value").get<double>() : std::numeric_limits<double>::quiet_NaN();
      p.phase = t.at("phase").get<std::string>();
      f.trace.push_back(std::move(p));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidInput, std::string("malformed fit.json: ") + e.what());
  }
  return f;
}

inline json variance_to_json(const VarianceReport& r) {
  json j;
  j["schema_version"] = kSchemaVersion;
  j["n"] = r.n;
  j["selected"] = to_string(r.selected);
  if (r.V1) j["V1"] = to_json(*r.V1);
  else j["V1"] = nullptr;
  j["V2"] = to_json(r.V2);
  if (r.V_alpha) j["V_alpha"] = to_json(*r.V_alpha);
  else j["V_alpha"] = nullptr;
  j["standard_errors"] = to_json(r.standard_errors);
  json bs = json::array();
  for (auto s : r.boundary_status) bs.push_back(to_string(s));
  j["boundary_status"] = bs;
  j["flags"] = {{"nondegenerate_boundary", r.nondegenerate_boundary},
                {"collapsed", r.collapsed},
                {"flat_limit_suspected", r.flat_limit_suspected}};
  return j;
}

inline json components_to_json(const VarianceComponents& c) {
  json j;
  j["J_hat"] = to_json(c.J_hat);
  j["K_hat"] = to_json(c.K_hat);
  j["D_hat"] = to_json(c.D_hat);
  if (c.full) {
    j["Z1_hat"] = to_json(c.Z1_hat);
    j["Z2_hat"] = to_json(c.Z2_hat);
    j["b_hat"] = to_json(c.b_hat);
    j["W_hat"] = to_json(c.W_hat);
    j["M_hat"] = to_json(c.M_hat);
    j["Kstar_hat"] = to_json(c.Kstar_hat);
    j["Astar"] = to_json(c.Astar);
  }
  return j;
}

inline json summary_to_json(const ReplicationSummary& s) {
  json j;
  j["schema_version"] = kSchemaVersion;
  j["n"] = s.n;
  j["requested"] = s.requested;
  j["failures"] = s.failures;
  j["failure_rate"] = s.failure_rate;
  j["interior_count"] = s.interior_count;
  j["v1_count"] = s.v1_count;
  j["empirical_variance"] = to_json(s.empirical_variance);
  j["mean_V1"] = to_json(s.mean_V1);
  j["mean_V2"] = to_json(s.mean_V2);
  j["mean_selected"] = to_json(s.mean_selected);
  j["abs_error_V1"] = to_json(s.abs_error_V1);
  j["abs_error_V2"] = to_json(s.abs_error_V2);
  j["abs_error_selected"] = to_json(s.abs_error_selected);
  json errs = json::array();
  for (const auto& r : s.replications)
    if (!r.ok) errs.push_back({{"index", r.index}, {"error", r.error}});
  j["failed_replications"] = errs;
  return j;
}

inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

inline void write_json(const std::filesystem::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::InvalidInput, "cannot write " + path.string());
  out << j.dump(2) << '\n';
}

inline json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::InvalidInput, "cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::InvalidInput, path.string() + ": " + e.what());
  }
}

/// lambda columns then the criterion value; failed points have value nan.
inline void write_trace_csv(const std::filesystem::path& path, const FitResult& f) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::InvalidInput, "cannot write " + path.string());
  for (Eigen::Index j = 0; j < f.lambda_hat.size(); ++j) out << "lambda" << j + 1 << ',';
  out << "value,phase\n";
  for (const auto& t : f.trace) {
    for (Eigen::Index j = 0; j < t.lambda.size(); ++j) out << format_double(t.lambda[j]) << ',';
    out << format_double(t.ok ? t.value : std::numeric_limits<double>::quiet_NaN()) << ',' << t.phase << '\n';
  }
}

/// One row per successful replication: index, seed, lambda_hat, theta_hat.
inline void write_draws_csv(const std::filesystem::path& path, const ReplicationSummary& s) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::InvalidInput, "cannot write " + path.string());
  Eigen::Index q = 0, p = 0;
  for (const auto& r : s.replications)
    if (r.ok) {
      q = r.lambda_hat.size();
      p = r.theta_hat.size();
      break;
    }
  out << "index,seed";
  for (Eigen::Index j = 0; j < q; ++j) out << ",lambda" << j + 1;
  for (Eigen::Index j = 0; j < p; ++j) out << ",theta" << j;
  out << '\n';
  for (const auto& r : s.replications) {
    if (!r.ok) continue;
    out << r.index << ',' << r.seed;
    for (Eigen::Index j = 0; j < q; ++j) out << ',' << format_double(r.lambda_hat[j]);
    for (Eigen::Index j = 0; j < p; ++j) out << ',' << format_double(r.theta_hat[j]);
    out << '\n';
  }
}

inline json error_json(const std::string& code, const std::string& message) {
  json j;
  j["schema_version"] = kSchemaVersion;
  j["error"] = {{"code", code}, {"message", message}};
  return j;
}

}  // namespace tuneinf
