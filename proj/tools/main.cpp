#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <optional>

#include "mlr/csvio.hpp"
#include "mlr/experiments.hpp"
#include "mlr/frames.hpp"
#include "mlr/manifold.hpp"
#include "mlr/moments.hpp"
#include "mlr/regression.hpp"
#include "mlr/theory.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct GlobalOpts {
  std::string config_path;
  std::optional<uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::string> format;
  bool plot = false;
};

json load_config_file(const std::string& path) {
  if (path.empty()) return json::object();
  std::ifstream is(path);
  if (!is) throw mlr::ConfigError("cannot open config file: " + path);
  try {
    return json::parse(is);
  } catch (const std::exception& e) {
    throw mlr::ConfigError(std::string("bad config file: ") + e.what());
  }
}

mlr::ExperimentConfig make_config(const GlobalOpts& opts, const json& file,
                                  mlr::ExperimentKind kind) {
  mlr::ExperimentConfig config;
  config.experiment = kind;
  const std::string section = mlr::to_string(kind);
  if (file.contains(section)) {
    if (!file.at(section).is_object())
      throw mlr::ConfigError("config section '" + section + "' must be a table");
    config.parameters = file.at(section);
  }
  config.seed = opts.seed.value_or(file.value("seed", 0ULL));
  config.out_dir = opts.out.value_or(file.value("out", std::string(".")));
  config.format = opts.format.value_or(file.value("format", std::string("csv")));
  config.plot = opts.plot || file.value("plot", false);
  if (config.format != "csv" && config.format != "json")
    throw mlr::ConfigError("format must be csv or json");
  return config;
}

int run_experiment_command(const GlobalOpts& opts, mlr::ExperimentKind kind) {
  const json file = load_config_file(opts.config_path);
  const auto config = make_config(opts, file, kind);
  const auto result = mlr::run_experiment(config);
  const auto written = mlr::write_result(result, config);
  std::printf("%s done (config %s)\n", result.name.c_str(),
              result.metadata.at("config_hash").get<std::string>().c_str());
  std::printf("summary: %s\n", result.summary.dump().c_str());
  for (const auto& p : written) std::printf("wrote %s\n", p.c_str());
  return 0;
}

json section_or_empty(const json& file, const std::string& name) {
  return file.contains(name) ? file.at(name) : json::object();
}

int run_fit(const GlobalOpts& opts, const std::string& data_path_flag,
            const std::string& target_column_flag, double rtol, bool require_full_rank) {
  const json file = load_config_file(opts.config_path);
  json params = section_or_empty(file, "fit");
  if (!data_path_flag.empty()) params["data"] = data_path_flag;
  if (!target_column_flag.empty()) params["target_column"] = target_column_flag;
  const std::string out_dir = opts.out.value_or(file.value("out", std::string(".")));
  const uint64_t seed = opts.seed.value_or(file.value("seed", 0ULL));

  mlr::RegressionSolution sol;
  if (params.contains("data")) {
    const auto table = mlr::csv::read_table(params.at("data").get<std::string>());
    const std::string target = params.value("target_column", "g");
    const int gcol = table.column(target);
    if (gcol < 0) throw mlr::ConfigError("data file has no column '" + target + "'");
    const Eigen::MatrixXd all = table.numeric();
    Eigen::MatrixXd X(all.rows(), all.cols() - 1);
    int k = 0;
    for (int c = 0; c < all.cols(); ++c)
      if (c != gcol) X.col(k++) = all.col(c);
    sol = mlr::solve_from_data(X, all.col(gcol), rtol);
  } else if (params.contains("manifold")) {
    const auto spec = mlr::ManifoldSpec::from_json(params.at("manifold"));
    const auto g = mlr::Polynomial::from_json(params.at("g"));
    const double L = params.value("L", 0.1);
    const long N = params.value("N", 0L);
    if (N > 0) {
      const auto samples = mlr::sample_uniform(spec, L, static_cast<int>(N), seed);
      sol = mlr::solve_from_data(samples, g.evaluate_rows(samples.points), rtol);
    } else {
      const auto table = mlr::quadrature_moments(spec, g, L);
      sol = mlr::solve_normal_system(mlr::assemble_normal_system(table), rtol,
                                     table.g_squared);
    }
  } else {
    throw mlr::ConfigError("fit needs --data or a 'fit' config section with data/manifold");
  }

  fs::create_directories(out_dir);
  {
    std::vector<std::vector<double>> rows;
    for (Eigen::Index i = 0; i < sol.w.size(); ++i)
      rows.push_back({static_cast<double>(i + 1), sol.w[i]});
    mlr::csv::write_table((fs::path(out_dir) / "fit_solution.csv").string(),
                          {"index", "w"}, rows);
  }
  json summary = {{"rank", sol.rank},
                  {"min_norm_applied", sol.min_norm_applied},
                  {"residual_rms", sol.residual_rms},
                  {"b", sol.b}};
  {
    std::ofstream os(fs::path(out_dir) / "fit_summary.json");
    os << summary.dump(2) << "\n";
  }
  std::printf("%s\n", summary.dump().c_str());
  if (require_full_rank && sol.min_norm_applied) {
    std::fprintf(stderr, "fit is rank-deficient (rank %d of %d)\n", sol.rank,
                 static_cast<int>(sol.w.size()) + 1);
    return 2;
  }
  return 0;
}

int run_predict(const GlobalOpts& opts) {
  const json file = load_config_file(opts.config_path);
  const json params = section_or_empty(file, "predict");
  if (!params.contains("g") || !params.contains("manifold"))
    throw mlr::ConfigError("predict needs a 'predict' section with 'g' and 'manifold'");
  const auto g = mlr::Polynomial::from_json(params.at("g"));
  const auto spec = mlr::ManifoldSpec::from_json(params.at("manifold"));
  const double L = params.value("L", 0.1);
  const double sigma = params.value("sigma", 0.0);
  const std::string out_dir = opts.out.value_or(file.value("out", std::string(".")));

  json out;
  std::vector<std::vector<double>> rows;  // coordinate, value, error_exponent
  switch (spec.kind) {
    case mlr::ManifoldKind::Curve2D: {
      const auto pred = mlr::predict_curve2d(g, spec.curvatures[0]);
      out["w"] = {pred.w_leading[0], pred.w_leading[1]};
      out["b"] = pred.b_leading;
      out["error_order_exponents"] = pred.error_order_exponents;
      if (sigma > 0)
        out["w_y_noisy"] = mlr::predict_curve2d_noisy(g, spec.curvatures[0], L, sigma);
      for (int i = 0; i < 2; ++i)
        rows.push_back({static_cast<double>(i + 1), pred.w_leading[i],
                        static_cast<double>(pred.error_order_exponents[i])});
      rows.push_back({0, pred.b_leading, static_cast<double>(pred.error_order_exponents[2])});
      break;
    }
    case mlr::ManifoldKind::Hypersurface: {
      const auto pred = mlr::predict_hypersurface(g, spec.curvatures, L);
      out["w"] = std::vector<double>(pred.w_leading.data(),
                                     pred.w_leading.data() + pred.w_leading.size());
      out["b"] = pred.predicted_b();
      out["error_order_exponents"] = pred.error_order_exponents;
      for (Eigen::Index i = 0; i < pred.w_leading.size(); ++i)
        rows.push_back({static_cast<double>(i + 1), pred.w_leading[i],
                        static_cast<double>(pred.error_order_exponents[i])});
      rows.push_back({0, pred.predicted_b(),
                      static_cast<double>(pred.error_order_exponents.back())});
      break;
    }
    case mlr::ManifoldKind::SpaceCurve: {
      const int d = spec.ambient_dim;
      Eigen::VectorXd ks(d);
      ks[0] = 1.0;
      ks.tail(d - 1) = spec.nonlinear_quantities;
      json w = json::array();
      for (int n = 1; n <= d; ++n) {
        const auto pred = mlr::predict_curve_nd(g, ks, n, d);
        w.push_back(pred.w_n_leading);
        rows.push_back({static_cast<double>(n), pred.w_n_leading,
                        static_cast<double>(pred.error_exponent)});
      }
      out["w"] = w;
      out["b"] = g.at_zero();
      rows.push_back({0, g.at_zero(), static_cast<double>(mlr::error_order_bias(d))});
      break;
    }
    case mlr::ManifoldKind::CodimK: {
      if (sigma <= 0 || spec.codimension() != 2)
        throw mlr::ConfigError(
            "codim-k prediction is available only for the noisy codimension-2 case "
            "(set sigma > 0)");
      const double wy2 = mlr::predict_codim2_noisy_wy2(g, sigma);
      out["w_y2"] = wy2;
      rows.push_back({static_cast<double>(spec.ambient_dim), wy2, 0.0});
      break;
    }
  }

  fs::create_directories(out_dir);
  mlr::csv::write_table((fs::path(out_dir) / "predict.csv").string(),
                        {"coordinate", "value", "error_exponent"}, rows);
  std::printf("%s\n", out.dump(2).c_str());
  return 0;
}

int run_frenet(const GlobalOpts& opts) {
  const json file = load_config_file(opts.config_path);
  const json params = section_or_empty(file, "frenet");
  if (!params.contains("curve"))
    throw mlr::ConfigError(
        "frenet needs a 'frenet' section with 'curve' (per-coordinate polynomial "
        "coefficient rows)");
  const auto rows = params.at("curve").get<std::vector<std::vector<double>>>();
  const double t = params.value("t", 0.0);
  size_t width = 0;
  for (const auto& r : rows) width = std::max(width, r.size());
  if (rows.size() < 2 || width == 0) throw mlr::ConfigError("curve needs >= 2 coordinates");
  Eigen::MatrixXd coeffs = Eigen::MatrixXd::Zero(rows.size(), width);
  for (size_t i = 0; i < rows.size(); ++i)
    for (size_t j = 0; j < rows[i].size(); ++j) coeffs(i, j) = rows[i][j];

  const mlr::PolyCurve curve(coeffs);
  const int d = curve.dim();
  const auto frame = mlr::generalized_frenet(curve.derivatives(t, d));
  json out = frame.to_json();
  out["nonlinear_quantities"] = [&] {
    const auto ks = mlr::nonlinear_quantities(frame.alphas);
    return std::vector<double>(ks.data(), ks.data() + ks.size());
  }();

  const std::string out_dir = opts.out.value_or(file.value("out", std::string(".")));
  fs::create_directories(out_dir);
  std::ofstream os(fs::path(out_dir) / "frenet.json");
  os << out.dump(2) << "\n";
  std::printf("%s\n", out.dump(2).c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"local linear regression on manifold-structured data"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalOpts opts;
  app.add_option("--config", opts.config_path, "JSON config file");
  uint64_t seed_flag = 0;
  auto* seed_opt = app.add_option("--seed", seed_flag, "RNG seed");
  std::string out_flag, format_flag;
  auto* out_opt = app.add_option("--out", out_flag, "output directory");
  auto* format_opt =
      app.add_option("--format", format_flag, "output format")->check(CLI::IsMember({"csv", "json"}));
  app.add_flag("--plot", opts.plot, "emit SVG plots");

  const std::vector<std::pair<std::string, mlr::ExperimentKind>> experiments = {
      {"sweep-curvature", mlr::ExperimentKind::SweepCurvature},
      {"sweep-noise", mlr::ExperimentKind::SweepNoise},
      {"validate-hypersurface", mlr::ExperimentKind::ValidateHypersurface},
      {"validate-curve", mlr::ExperimentKind::ValidateCurveNd},
      {"degeneracy", mlr::ExperimentKind::Degeneracy},
      {"intrinsic-dim", mlr::ExperimentKind::IntrinsicDim},
      {"bend", mlr::ExperimentKind::Bend},
  };
  for (const auto& [name, kind] : experiments)
    app.add_subcommand(name, "run the " + name + " experiment");

  auto* fit_cmd = app.add_subcommand("fit", "solve a regression from data or a manifold spec");
  std::string fit_data, fit_target;
  double fit_rtol = 1e-10;
  bool fit_require_full_rank = false;
  fit_cmd->add_option("--data", fit_data, "CSV dataset (coordinates + target column)");
  fit_cmd->add_option("--target-column", fit_target, "target column name (default g)");
  fit_cmd->add_option("--rtol", fit_rtol, "singular value cutoff");
  fit_cmd->add_flag("--require-full-rank", fit_require_full_rank,
                    "exit with code 2 when the system is rank-deficient");

  app.add_subcommand("predict", "closed-form coefficient predictions");
  app.add_subcommand("frenet", "Frenet frame of a polynomial curve");

  CLI11_PARSE(app, argc, argv);
  if (*seed_opt) opts.seed = seed_flag;
  if (*out_opt) opts.out = out_flag;
  if (*format_opt) opts.format = format_flag;

  try {
    for (const auto& [name, kind] : experiments)
      if (app.got_subcommand(name)) return run_experiment_command(opts, kind);
    if (app.got_subcommand("fit"))
      return run_fit(opts, fit_data, fit_target, fit_rtol, fit_require_full_rank);
    if (app.got_subcommand("predict")) return run_predict(opts);
    if (app.got_subcommand("frenet")) return run_frenet(opts);
  } catch (const mlr::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 1;
  } catch (const mlr::FlatDirection& e) {
    std::fprintf(stderr, "numeric failure: %s\n", e.what());
    return 2;
  } catch (const mlr::DegenerateFrame& e) {
    std::fprintf(stderr, "numeric failure: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
