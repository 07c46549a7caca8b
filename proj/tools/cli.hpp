#pragma once

// Command-line front end. run_cli() is kept separate from main() so tests
// can drive it in-process.

#include "tuneinf/tuneinf.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace tuneinf::cli {

namespace fs = std::filesystem;

struct RunConfig {
  std::string command;
  std::string model = "ridge-linear";
  std::string loss;  // empty: the model's default loss
  std::string criterion = "cv";
  double lambda_lower = 0.0;
  double lambda_upper = 1.0;
  double lambda = 0.0;  // fit only
  int grid_size = 50;
  std::uint64_t seed = 1;
  std::size_t B = 200;
  std::string input;
  std::string output = ".";
  std::string response = "0";
  std::vector<std::string> covariates;
  double holdout_fraction = 0.5;
  unsigned threads = 0;
  std::string fit_path;
  // simulation
  std::string dgp = "GAUSSMIX_C";
  Eigen::Index n = 100;
  std::vector<double> C_values{0.0, 1.0, 2.0};
  double sigma = 1.0;
  double curvature = 0.0;
  std::vector<double> beta;
  std::vector<Eigen::Index> n_grid{200, 800, 3200};
  int bins = 30;
  bool with_alpha = true;
};

/// Model, loss and data assembled from a config.
struct Problem {
  Dataset data;
  ModelSpec model;
  LossSpec loss;
};

inline const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys{
      "model", "loss", "criterion", "lambda_lower", "lambda_upper", "lambda", "grid_size", "seed", "B", "input",
      "output", "response", "covariates", "holdout_fraction", "threads", "fit", "dgp", "n", "C", "sigma",
      "curvature", "beta", "n_grid", "bins", "with_alpha"};
  return keys;
}

/// Copies keys from a JSON config into cfg unless the same option was
/// given on the command line. Unknown keys are rejected.
inline void apply_config(RunConfig& cfg, const json& j, const std::function<bool(const std::string&)>& given) {
  if (!j.is_object()) throw Error(ErrorCode::InvalidInput, "config must be a JSON object");
  const auto& keys = config_keys();
  for (const auto& [k, v] : j.items())
    if (std::find(keys.begin(), keys.end(), k) == keys.end())
      throw Error(ErrorCode::InvalidInput, "unknown config key '" + k + "'");
  auto take = [&](const char* key, auto& field) {
    if (j.contains(key) && !given(key)) field = j[key].get<std::decay_t<decltype(field)>>();
  };
  try {
    take("model", cfg.model);
    take("loss", cfg.loss);
    take("criterion", cfg.criterion);
    take("lambda_lower", cfg.lambda_lower);
    take("lambda_upper", cfg.lambda_upper);
    take("lambda", cfg.lambda);
    take("grid_size", cfg.grid_size);
    take("seed", cfg.seed);
    take("B", cfg.B);
    take("input", cfg.input);
    take("output", cfg.output);
    if (j.contains("response") && !given("response"))
      cfg.response = j["response"].is_string() ? j["response"].get<std::string>() : std::to_string(j["response"].get<int>());
    take("covariates", cfg.covariates);
    take("holdout_fraction", cfg.holdout_fraction);
    take("threads", cfg.threads);
    take("fit", cfg.fit_path);
    take("dgp", cfg.dgp);
    take("n", cfg.n);
    take("C", cfg.C_values);
    take("sigma", cfg.sigma);
    take("curvature", cfg.curvature);
    take("beta", cfg.beta);
    take("n_grid", cfg.n_grid);
    take("bins", cfg.bins);
    take("with_alpha", cfg.with_alpha);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidInput, std::string("config value has the wrong type: ") + e.what());
  }
}

inline int column_index(const CsvTable& t, const std::string& sel) {
  const int named = t.column(sel);
  if (named >= 0) return named;
  int idx = -1;
  const auto res = std::from_chars(sel.data(), sel.data() + sel.size(), idx);
  if (res.ec != std::errc() || res.ptr != sel.data() + sel.size() || idx < 0 ||
      idx >= static_cast<int>(t.header.size()))
    throw Error(ErrorCode::InvalidInput, "column '" + sel + "' not found");
  return idx;
}

inline Box lambda_box(const RunConfig& cfg) {
  Box b = Box::interval(cfg.lambda_lower, cfg.lambda_upper);
  b.validate_strict();
  return b;
}

/// Built-in model and loss over a regression layout.
inline std::pair<ModelSpec, LossSpec> builtin(const std::string& model, const std::string& loss,
                                              const RegressionLayout& layout, int d, const Box& box) {
  ModelSpec m;
  LossSpec l;
  std::string lname = loss;
  if (model == "ridge-linear") {
    m = ridge_linear_model(layout, box, d);
    if (lname.empty()) lname = "squared-error";
  } else if (model == "ridge-logistic") {
    m = ridge_logistic_model(layout, box, d);
    if (lname.empty()) lname = "brier";
  } else if (model == "hybrid-wls") {
    m = weighted_ls_hybrid_model(layout, box, d);
    if (lname.empty()) lname = "hybrid-wls-loss";
  } else if (model == "gaussian") {
    m = gaussian_likelihood_model(layout.response, d, box);
    if (lname.empty()) lname = "gaussian-nll";
  } else {
    throw Error(ErrorCode::InvalidInput, "unknown model '" + model + "'");
  }
  if (lname == "squared-error") l = squared_error_loss(layout);
  else if (lname == "brier") l = brier_loss(layout);
  else if (lname == "brier-partial") {
    // intercept and first covariate only
    std::vector<bool> mask(static_cast<std::size_t>(layout.p()), false);
    mask[0] = true;
    if (mask.size() > 1) mask[1] = true;
    l = brier_loss(layout, mask);
  } else if (lname == "logistic-nll") l = logistic_deviance_loss(layout);
  else if (lname == "hybrid-wls-loss") l = weighted_ls_hybrid_loss(layout);
  else if (lname == "gaussian-nll") l = gaussian_nll_loss(layout.response);
  else throw Error(ErrorCode::InvalidInput, "unknown loss '" + lname + "'");
  return {complete(std::move(m)), complete(std::move(l))};
}

inline Problem load_problem(const RunConfig& cfg) {
  if (cfg.input.empty()) throw Error(ErrorCode::InvalidInput, "--input is required");
  const Box box = lambda_box(cfg);
  const CsvTable table = read_csv(cfg.input);
  if (cfg.model == "pima") {
    PimaOptions po;
    po.response = table.header.at(static_cast<std::size_t>(column_index(table, cfg.response)));
    po.lambda_domain = box;
    PimaProblem pp = make_pima_model(table, po);
    if (!cfg.loss.empty() && cfg.loss != "brier")
      throw Error(ErrorCode::InvalidInput, "the pima model uses the Brier loss");
    return {std::move(pp.data), complete(std::move(pp.model)), complete(std::move(pp.loss))};
  }
  RegressionLayout layout;
  layout.response = column_index(table, cfg.response);
  if (cfg.covariates.empty()) {
    for (int c = 0; c < static_cast<int>(table.header.size()); ++c)
      if (c != layout.response) layout.covariates.push_back(c);
  } else {
    for (const auto& c : cfg.covariates) layout.covariates.push_back(column_index(table, c));
  }
  const int d = static_cast<int>(table.header.size());
  auto [m, l] = builtin(cfg.model, cfg.loss, layout, d, box);
  return {Dataset(table.values, ColumnRoles{layout.response, layout.covariates}), std::move(m), std::move(l)};
}

inline TuneOptions tune_options(const RunConfig& cfg) {
  TuneOptions t;
  t.criterion.holdout_fraction = cfg.holdout_fraction;
  return t;
}

inline FitResult run_tune(const RunConfig& cfg, const Problem& pr) {
  return tune(pr.model, pr.loss, pr.data, criterion_from_string(cfg.criterion), lambda_box(cfg), cfg.grid_size,
              cfg.seed, tune_options(cfg));
}

inline void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::InvalidInput, "cannot create output directory " + dir);
}

inline int cmd_fit(const RunConfig& cfg) {
  const Problem pr = load_problem(cfg);
  const Box box = lambda_box(cfg);
  const Vec la = Vec::Constant(1, cfg.lambda);
  if (!box.contains(la)) throw Error(ErrorCode::InvalidInput, "--lambda lies outside the lambda box");
  const SolveResult s = solve_theta(pr.model, pr.data, la);
  FitResult f;
  f.theta_hat = s.theta_hat;
  f.lambda_hat = la;
  f.J_hat = s.J_hat;
  f.D_hat = theta_prime(pr.model, pr.data, s);
  f.criterion = CriterionKind::TE;
  f.criterion_value = detail::mean_loss(pr.loss, pr.data, s.theta_hat);
  f.criterion_slope_at_opt = Vec::Zero(1);
  f.slope_tolerance = Vec::Zero(1);
  f.lambda_domain = box;
  f.boundary_status = {cfg.lambda == box.lower[0]   ? BoundaryStatus::LOWER_BOUNDARY
                       : cfg.lambda == box.upper[0] ? BoundaryStatus::UPPER_BOUNDARY
                                                    : BoundaryStatus::INTERIOR};
  f.flat_boundary = {false};
  f.solver_iterations = s.iterations;
  f.residual_norm = s.residual_norm;
  f.seed = cfg.seed;
  f.notes.push_back("lambda fixed by the caller");
  ensure_dir(cfg.output);
  write_json(fs::path(cfg.output) / "fit.json", fit_to_json(f));
  return 0;
}

inline int cmd_tune(const RunConfig& cfg) {
  const Problem pr = load_problem(cfg);
  const FitResult f = run_tune(cfg, pr);
  ensure_dir(cfg.output);
  write_json(fs::path(cfg.output) / "fit.json", fit_to_json(f));
  write_trace_csv(fs::path(cfg.output) / "trace.csv", f);
  return 0;
}

inline int cmd_variance(const RunConfig& cfg) {
  const Problem pr = load_problem(cfg);
  const FitResult f = cfg.fit_path.empty() ? run_tune(cfg, pr) : fit_from_json(read_json(cfg.fit_path));
  if (f.theta_hat.size() != pr.model.p || f.lambda_hat.size() != pr.model.q)
    throw Error(ErrorCode::InvalidInput, "fit.json does not match the model dimensions");
  VarianceOptions vo;
  vo.criterion = tune_options(cfg).criterion;
  const VarianceComponents c = assemble_components(pr.model, pr.loss, pr.data, f, vo);
  VarianceReport r = select_variance(c, f);
  if (cfg.with_alpha && f.interior()) {
    try {
      r.V_alpha = variance_alpha(pr.model, pr.loss, pr.data, f);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::FlatLimitSuspected && e.code() != ErrorCode::SingularJacobian) throw;
      r.flat_limit_suspected = true;
    }
  }
  json j = variance_to_json(r);
  j["theta_hat"] = to_json(f.theta_hat);
  j["lambda_hat"] = to_json(f.lambda_hat);
  j["components"] = components_to_json(c);
  ensure_dir(cfg.output);
  write_json(fs::path(cfg.output) / "variance.json", j);
  if (cfg.fit_path.empty()) write_json(fs::path(cfg.output) / "fit.json", fit_to_json(f));
  return 0;
}

inline DGPSpec dgp_from_config(const RunConfig& cfg) {
  DGPSpec d;
  d.kind = dgp_from_string(cfg.dgp);
  if (d.kind == DGPKind::CUSTOM) throw Error(ErrorCode::InvalidInput, "CUSTOM DGPs are library-only");
  d.n = cfg.n;
  d.sigma = cfg.sigma;
  d.curvature = cfg.curvature;
  if (!cfg.beta.empty()) d.beta = Eigen::Map<const Vec>(cfg.beta.data(), static_cast<Eigen::Index>(cfg.beta.size()));
  return d;
}

/// Pipeline for simulated data: GAUSSMIX_C defaults to the ridge-logistic
/// fit with the intercept-and-x1 Brier loss.
inline PipelineConfig simulation_pipeline(const RunConfig& cfg, const DGPSpec& d) {
  const int k = d.kind == DGPKind::GAUSSMIX_C ? 2 : static_cast<int>(d.beta.size()) - 1;
  const RegressionLayout layout = RegressionLayout::leading_response(k);
  std::string model = cfg.model;
  std::string loss = cfg.loss;
  if (d.kind == DGPKind::GAUSSMIX_C && model == "ridge-linear") {
    model = "ridge-logistic";
    if (loss.empty()) loss = "brier-partial";
  }
  if (d.kind == DGPKind::LOGISTIC_TRUE && model == "ridge-linear") model = "ridge-logistic";
  auto [m, l] = builtin(model, loss, layout, d.d(), lambda_box(cfg));
  PipelineConfig pc;
  pc.model = std::move(m);
  pc.loss = std::move(l);
  pc.criterion = criterion_from_string(cfg.criterion);
  pc.lambda_domain = lambda_box(cfg);
  pc.grid_size = cfg.grid_size;
  pc.tune = tune_options(cfg);
  return pc;
}

inline void write_summary_tables(const fs::path& dir, const std::vector<double>& params,
                                 const std::vector<ReplicationSummary>& sums, const char* param_name) {
  std::ofstream draws(dir / "draws.csv");
  std::ofstream err(dir / "error_vs_C.csv");
  if (!draws || !err) throw Error(ErrorCode::InvalidInput, "cannot write into " + dir.string());
  const Eigen::Index p = sums.front().empirical_variance.rows();
  draws << param_name << ",index,seed,lambda1";
  for (Eigen::Index j = 0; j < p; ++j) draws << ",theta" << j;
  draws << '\n';
  err << param_name << ",j,k,empirical,mean_selected,mean_V2,abs_error_selected,abs_error_V2\n";
  for (std::size_t s = 0; s < sums.size(); ++s) {
    for (const auto& r : sums[s].replications) {
      if (!r.ok) continue;
      draws << format_double(params[s]) << ',' << r.index << ',' << r.seed << ',' << format_double(r.lambda_hat[0]);
      for (Eigen::Index j = 0; j < p; ++j) draws << ',' << format_double(r.theta_hat[j]);
      draws << '\n';
    }
    const auto& S = sums[s];
    for (Eigen::Index a = 0; a < p; ++a)
      for (Eigen::Index b = a; b < p; ++b)
        err << format_double(params[s]) << ',' << a << ',' << b << ',' << format_double(S.empirical_variance(a, b)) << ','
            << format_double(S.mean_selected(a, b)) << ',' << format_double(S.mean_V2(a, b)) << ','
            << format_double(S.abs_error_selected(a, b)) << ',' << format_double(S.abs_error_V2(a, b)) << '\n';
  }
}

inline int cmd_simulate(const RunConfig& cfg) {
  const DGPSpec base = dgp_from_config(cfg);
  std::vector<double> params = base.kind == DGPKind::GAUSSMIX_C ? cfg.C_values : std::vector<double>{cfg.curvature};
  if (params.empty()) throw Error(ErrorCode::InvalidInput, "no C values given");
  std::vector<ReplicationSummary> sums;
  json per = json::array();
  for (double c : params) {
    DGPSpec d = base;
    if (d.kind == DGPKind::GAUSSMIX_C) d.C = c;
    else d.curvature = c;
    const PipelineConfig pc = simulation_pipeline(cfg, d);
    sums.push_back(replicate(d, pc, cfg.B, cfg.seed));
    json s = summary_to_json(sums.back());
    s.erase("schema_version");
    s[base.kind == DGPKind::GAUSSMIX_C ? "C" : "curvature"] = c;
    per.push_back(std::move(s));
  }
  ensure_dir(cfg.output);
  json j;
  j["schema_version"] = kSchemaVersion;
  j["dgp"] = cfg.dgp;
  j["n"] = cfg.n;
  j["B"] = cfg.B;
  j["seed"] = cfg.seed;
  j["criterion"] = cfg.criterion;
  j["runs"] = per;
  write_json(fs::path(cfg.output) / "summary.json", j);
  write_summary_tables(cfg.output, params, sums, base.kind == DGPKind::GAUSSMIX_C ? "C" : "curvature");
  return 0;
}

inline int cmd_bootstrap(const RunConfig& cfg) {
  const Problem pr = load_problem(cfg);
  PipelineConfig pc;
  pc.model = pr.model;
  pc.loss = pr.loss;
  pc.criterion = criterion_from_string(cfg.criterion);
  pc.lambda_domain = lambda_box(cfg);
  pc.grid_size = cfg.grid_size;
  pc.tune = tune_options(cfg);
  pc.compute_variance = false;
  const ReplicationSummary s = bootstrap(pr.data, pc, cfg.B, cfg.seed);
  ensure_dir(cfg.output);
  json j = summary_to_json(s);
  j["B"] = cfg.B;
  j["seed"] = cfg.seed;
  write_json(fs::path(cfg.output) / "summary.json", j);
  write_draws_csv(fs::path(cfg.output) / "draws.csv", s);
  std::ofstream hist(fs::path(cfg.output) / "histogram.csv");
  hist << "coordinate,bin_lower,bin_upper,count\n";
  for (Eigen::Index c = 0; c < pr.model.p; ++c) {
    std::vector<double> x;
    for (const auto& r : s.replications)
      if (r.ok) x.push_back(r.theta_hat[c]);
    const Histogram h = histogram(x, cfg.bins);
    for (std::size_t k = 0; k < h.counts.size(); ++k)
      hist << c << ',' << format_double(h.edges[k]) << ',' << format_double(h.edges[k + 1]) << ',' << h.counts[k] << '\n';
  }
  return 0;
}

/// n |CV_exact - (TE - n^{-1} Tr(J^{-1} C))| on ridge-linear data for each
/// n in the grid, B seeds each.
inline int cmd_stone_check(const RunConfig& cfg) {
  DGPSpec base = dgp_from_config(cfg);
  if (base.kind != DGPKind::LINEAR_GAUSSIAN && base.kind != DGPKind::LOGISTIC_TRUE)
    throw Error(ErrorCode::InvalidInput, "stone-check supports LINEAR_GAUSSIAN and LOGISTIC_TRUE");
  const PipelineConfig pc = simulation_pipeline(cfg, base);
  const Vec la = Vec::Constant(1, cfg.lambda);
  ensure_dir(cfg.output);
  std::ofstream csv(fs::path(cfg.output) / "stone.csv");
  csv << "n,replication,cv_exact,te_trace_corrected,scaled_gap\n";
  json rows = json::array();
  for (Eigen::Index n : cfg.n_grid) {
    std::vector<double> gaps(cfg.B), cvs(cfg.B), tcs(cfg.B);
    parallel_for(cfg.B, [&](std::size_t j) {
      DGPSpec d = base;
      d.n = n;
      d.seed = stream_seed(cfg.seed + static_cast<std::uint64_t>(n), j);
      const Dataset data = simulate(d);
      cvs[j] = loocv_exact(pc.model, pc.loss, data, la).value;
      tcs[j] = te_trace_corrected(pc.model, pc.loss, data, la).value;
      gaps[j] = static_cast<double>(n) * std::abs(cvs[j] - tcs[j]);
    });
    for (std::size_t j = 0; j < cfg.B; ++j)
      csv << n << ',' << j << ',' << format_double(cvs[j]) << ',' << format_double(tcs[j]) << ','
          << format_double(gaps[j]) << '\n';
    std::vector<double> sorted = gaps;
    std::sort(sorted.begin(), sorted.end());
    const std::size_t m = sorted.size();
    const double median = m % 2 ? sorted[m / 2] : 0.5 * (sorted[m / 2 - 1] + sorted[m / 2]);
    rows.push_back({{"n", n}, {"median_scaled_gap", median}});
  }
  json j;
  j["schema_version"] = kSchemaVersion;
  j["lambda"] = cfg.lambda;
  j["B"] = cfg.B;
  j["seed"] = cfg.seed;
  j["results"] = rows;
  write_json(fs::path(cfg.output) / "stone.json", j);
  return 0;
}

inline int exit_code_for(ErrorCode c) { return c == ErrorCode::InvalidInput ? 2 : 1; }

inline void report_error(const std::string& out_dir, const std::string& code, const std::string& msg,
                         std::ostream& err) {
  err << "error: " << msg << '\n';
  if (out_dir.empty()) return;
  try {
    ensure_dir(out_dir);
    write_json(fs::path(out_dir) / "error.json", error_json(code, msg));
  } catch (const Error&) {
  }
}

inline int run_cli(int argc, const char* const* argv, std::ostream& err = std::cerr) {
  RunConfig cfg;
  std::string config_path;
  CLI::App app{"Tuning-aware inference for Z-estimators"};
  app.require_subcommand(1);

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "JSON file with the same keys as the long options");
    sub->add_option("--model", cfg.model, "ridge-linear, ridge-logistic, hybrid-wls, gaussian, pima");
    sub->add_option("--loss", cfg.loss, "Loss; empty for the model default");
    sub->add_option("--criterion", cfg.criterion, "te, cv, cv_fast, te_trace, holdout, aic, bic, tic");
    sub->add_option("--lambda-lower", cfg.lambda_lower);
    sub->add_option("--lambda-upper", cfg.lambda_upper);
    sub->add_option("--grid-size", cfg.grid_size);
    sub->add_option("--seed", cfg.seed);
    sub->add_option("--input", cfg.input, "CSV with a header row");
    sub->add_option("--output", cfg.output, "Output directory");
    sub->add_option("--response", cfg.response, "Response column name or 0-based index");
    sub->add_option("--covariates", cfg.covariates, "Covariate columns (default: all others)");
    sub->add_option("--holdout-fraction", cfg.holdout_fraction);
    sub->add_option("--threads", cfg.threads, "Worker cap; 0 uses all cores");
  };
  auto* fit = app.add_subcommand("fit", "Solve theta at a fixed lambda");
  add_common(fit);
  fit->add_option("--lambda", cfg.lambda);
  auto* tune_cmd = app.add_subcommand("tune", "Tune lambda; writes fit.json and trace.csv");
  add_common(tune_cmd);
  auto* var = app.add_subcommand("variance", "Variance report; writes variance.json");
  add_common(var);
  var->add_option("--fit", cfg.fit_path, "Reuse a fit.json instead of tuning");
  var->add_option("--with-alpha", cfg.with_alpha);
  auto* sim = app.add_subcommand("simulate", "Monte Carlo study; writes draws.csv, summary.json, error_vs_C.csv");
  add_common(sim);
  auto* boot = app.add_subcommand("bootstrap", "Nonparametric bootstrap; writes draws.csv, summary.json, histogram.csv");
  add_common(boot);
  auto* stone = app.add_subcommand("stone-check", "Scaled CV vs trace-corrected TE gap over a grid of n");
  add_common(stone);
  for (auto* sub : {sim, boot, stone}) {
    sub->add_option("-B,--replications", cfg.B);
    sub->add_option("--dgp", cfg.dgp);
    sub->add_option("-n,--n", cfg.n);
    sub->add_option("--C", cfg.C_values);
    sub->add_option("--sigma", cfg.sigma);
    sub->add_option("--curvature", cfg.curvature);
    sub->add_option("--beta", cfg.beta);
    sub->add_option("--n-grid", cfg.n_grid);
    sub->add_option("--bins", cfg.bins);
  }
  stone->add_option("--lambda", cfg.lambda);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
  CLI::App* chosen = app.get_subcommands().front();
  cfg.command = chosen->get_name();

  try {
    if (!config_path.empty()) {
      auto given = [&](const std::string& key) {
        std::string flag = key == "B" ? "replications" : key;
        std::replace(flag.begin(), flag.end(), '_', '-');
        const CLI::Option* o = chosen->get_option_no_throw("--" + flag);
        return o != nullptr && o->count() > 0;
      };
      apply_config(cfg, read_json(config_path), given);
    }
    if (cfg.grid_size < 5) throw Error(ErrorCode::InvalidInput, "grid size must be at least 5");
    set_max_threads(cfg.threads);
    if (cfg.command == "fit") return cmd_fit(cfg);
    if (cfg.command == "tune") return cmd_tune(cfg);
    if (cfg.command == "variance") return cmd_variance(cfg);
    if (cfg.command == "simulate") return cmd_simulate(cfg);
    if (cfg.command == "bootstrap") return cmd_bootstrap(cfg);
    return cmd_stone_check(cfg);
  } catch (const Error& e) {
    report_error(cfg.output, to_string(e.code()), e.what(), err);
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    report_error(cfg.output, "Internal", e.what(), err);
    return 1;
  }
}

}  // namespace tuneinf::cli
