#include "mlr/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>

#include "mlr/csvio.hpp"
#include "mlr/frames.hpp"
#include "mlr/idx.hpp"
#include "mlr/manifold.hpp"
#include "mlr/moments.hpp"
#include "mlr/regression.hpp"
#include "mlr/rng.hpp"
#include "mlr/theory.hpp"

namespace mlr {

namespace fs = std::filesystem;

std::string to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::SweepCurvature: return "sweep-curvature";
    case ExperimentKind::SweepNoise: return "sweep-noise";
    case ExperimentKind::ValidateHypersurface: return "validate-hypersurface";
    case ExperimentKind::ValidateCurveNd: return "validate-curve";
    case ExperimentKind::Degeneracy: return "degeneracy";
    case ExperimentKind::IntrinsicDim: return "intrinsic-dim";
    case ExperimentKind::Bend: return "bend";
  }
  throw std::logic_error("unreachable");
}

uint64_t ExperimentConfig::config_hash() const {
  nlohmann::json j = {
      {"experiment", to_string(experiment)}, {"parameters", parameters}, {"seed", seed}};
  const std::string dump = j.dump();
  uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a 64
  for (unsigned char c : dump) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

namespace {

double get_double(const nlohmann::json& p, const std::string& key, double def) {
  if (!p.contains(key)) return def;
  if (!p.at(key).is_number()) throw ConfigError("parameter '" + key + "' must be a number");
  return p.at(key).get<double>();
}

long get_long(const nlohmann::json& p, const std::string& key, long def) {
  if (!p.contains(key)) return def;
  if (!p.at(key).is_number_integer()) throw ConfigError("parameter '" + key + "' must be an integer");
  return p.at(key).get<long>();
}

std::string get_string(const nlohmann::json& p, const std::string& key, const std::string& def) {
  if (!p.contains(key)) return def;
  if (!p.at(key).is_string()) throw ConfigError("parameter '" + key + "' must be a string");
  return p.at(key).get<std::string>();
}

std::vector<double> get_grid(const nlohmann::json& p, const std::string& key,
                             std::vector<double> def) {
  if (!p.contains(key)) return def;
  const auto& j = p.at(key);
  std::vector<double> grid;
  if (j.is_array()) {
    for (const auto& v : j) grid.push_back(v.get<double>());
  } else if (j.is_object()) {
    const double lo = j.at("min").get<double>();
    const double hi = j.at("max").get<double>();
    const int count = j.at("count").get<int>();
    const bool log = j.value("log", false);
    if (count < 1 || lo > hi || (log && lo <= 0)) throw ConfigError("bad grid spec for " + key);
    for (int i = 0; i < count; ++i) {
      const double t = count == 1 ? 0.0 : static_cast<double>(i) / (count - 1);
      grid.push_back(log ? lo * std::pow(hi / lo, t) : lo + (hi - lo) * t);
    }
  } else {
    throw ConfigError("parameter '" + key + "' must be an array or a grid object");
  }
  if (grid.empty()) throw ConfigError("grid '" + key + "' is empty");
  return grid;
}

Polynomial get_polynomial(const nlohmann::json& p, const std::string& key,
                          const Polynomial& def) {
  if (!p.contains(key)) return def;
  try {
    return Polynomial::from_json(p.at(key));
  } catch (const std::exception& e) {
    throw ConfigError(std::string("bad polynomial for '") + key + "': " + e.what());
  }
}

std::vector<double> logspace(double lo, double hi, int count) {
  std::vector<double> out;
  for (int i = 0; i < count; ++i)
    out.push_back(lo * std::pow(hi / lo, static_cast<double>(i) / (count - 1)));
  return out;
}

nlohmann::json base_metadata(const ExperimentConfig& config) {
  char hash[32];
  std::snprintf(hash, sizeof(hash), "%016llx",
                static_cast<unsigned long long>(config.config_hash()));
  return {{"experiment", to_string(config.experiment)},
          {"config_hash", std::string(hash)},
          {"seed", config.seed},
          {"code_version", kCodeVersion}};
}

}  // namespace

Polynomial demo_target_2d() {
  Polynomial g(2);
  g.add_term({2, 0}, 2.0);
  g.add_term({0, 2}, 2.0);
  g.add_term({1, 1}, 6.0);
  g.add_term({1, 0}, 3.0);
  g.add_term({0, 1}, 4.0);
  g.add_term({0, 0}, 10.0);
  return g;
}

Polynomial demo_target_codim2() {
  Polynomial g(4);
  g.add_term({1, 0, 0, 0}, 3.0);
  g.add_term({0, 1, 0, 0}, -2.0);
  g.add_term({0, 0, 1, 0}, 2.0);
  g.add_term({0, 0, 0, 1}, 5.0);
  g.add_term({0, 0, 0, 3}, 1.0);
  return g;
}

Eigen::MatrixXd make_low_rank_dataset(int N, int D, int rank, uint64_t seed, double scale) {
  if (rank < 1 || rank > D) throw std::invalid_argument("rank must be in [1, D]");
  Eigen::MatrixXd X = Eigen::MatrixXd::Zero(N, D);
  for (int c = 0; c < rank; ++c) {
    Rng rng(seed, static_cast<uint64_t>(c));
    for (int r = 0; r < N; ++r) X(r, c) = rng.uniform(-scale, scale);
  }
  return X;
}

double fit_loglog_slope(const std::vector<double>& x, const std::vector<double>& err) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (size_t i = 0; i < x.size() && i < err.size(); ++i) {
    if (x[i] <= 0 || err[i] <= 0) continue;
    const double lx = std::log(x[i]);
    const double ly = std::log(err[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    ++n;
  }
  if (n < 2) return std::numeric_limits<double>::quiet_NaN();
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

std::vector<std::string> write_result(const ExperimentResult& result,
                                      const ExperimentConfig& config) {
  fs::create_directories(config.out_dir);
  std::vector<std::string> written;
  auto path_for = [&](const std::string& leaf) {
    return (fs::path(config.out_dir) / leaf).string();
  };

  const std::string csv_path = path_for(result.name + ".csv");
  csv::write_table(csv_path, result.main.columns, result.main.rows);
  written.push_back(csv_path);
  for (const auto& t : result.extra_tables) {
    const std::string p = path_for(result.name + "_" + t.name + ".csv");
    csv::write_table(p, t.columns, t.rows);
    written.push_back(p);
  }
  if (config.format == "json") {
    nlohmann::json j = {{"columns", result.main.columns},
                        {"rows", result.main.rows},
                        {"metadata", result.metadata},
                        {"summary", result.summary}};
    const std::string p = path_for(result.name + ".json");
    std::ofstream os(p, std::ios::binary);
    os << j.dump(2) << "\n";
    written.push_back(p);
  }
  {
    nlohmann::json meta = result.metadata;
    meta["summary"] = result.summary;
    meta["written_at"] = static_cast<long>(::time(nullptr));
    const std::string p = path_for(result.name + "_meta.json");
    std::ofstream os(p, std::ios::binary);
    os << meta.dump(2) << "\n";
    written.push_back(p);
  }
  if (config.plot) {
    for (const auto& plot : result.plots) {
      const std::string p = path_for(result.name + "_" + plot.name + ".svg");
      svg::write_plot(p, plot.series, plot.options);
      written.push_back(p);
    }
  }
  return written;
}

ExperimentResult run_sweep_curvature(const ExperimentConfig& config) {
  const auto& p = config.parameters;
  const auto kappa_grid = get_grid(p, "kappa_grid", logspace(1e-3, 1.0, 25));
  const double L = get_double(p, "L", 0.1);
  const int N = static_cast<int>(get_long(p, "N", 1000));
  const double rtol = get_double(p, "rtol", 1e-10);
  const Polynomial g = get_polynomial(p, "g", demo_target_2d());
  for (double k : kappa_grid)
    if (k <= 0) throw ConfigError("kappa grid must be positive");

  ExperimentResult result;
  result.name = "sweep-curvature";
  result.main.name = "main";
  result.main.columns = {"kappa",    "wx_mc",    "wy_mc",    "b_mc",      "wx_quad",
                         "wy_quad",  "b_quad",   "wx_theory", "wy_theory", "b_theory",
                         "wy_err_mc", "wy_err_quad"};

  for (double kappa : kappa_grid) {
    const auto spec = ManifoldSpec::curve2d(kappa);
    const auto samples = sample_uniform(spec, L, N, config.seed);
    const auto mc = solve_from_data(samples, g.evaluate_rows(samples.points), rtol);
    const auto table = quadrature_moments(spec, g, L);
    const auto quad = solve_normal_system(assemble_normal_system(table), rtol, table.g_squared);
    const auto pred = predict_curve2d(g, kappa);
    result.main.rows.push_back({kappa, mc.w[0], mc.w[1], mc.b, quad.w[0], quad.w[1], quad.b,
                                pred.w_leading[0], pred.w_leading[1], pred.b_leading,
                                std::abs(mc.w[1] - pred.w_leading[1]),
                                std::abs(quad.w[1] - pred.w_leading[1])});
  }

  PlotSpec plot;
  plot.name = "solutions";
  plot.options = {"regression coefficients vs curvature", "kappa", "coefficient", true, true};
  for (const auto& [label, col] : std::vector<std::pair<std::string, int>>{
           {"w_x (data)", 1}, {"w_y (data)", 2}, {"b (data)", 3}, {"w_y (theory)", 8}}) {
    svg::Series s;
    s.label = label;
    for (const auto& row : result.main.rows) {
      s.x.push_back(row[0]);
      s.y.push_back(row[static_cast<size_t>(col)]);
    }
    plot.series.push_back(std::move(s));
  }
  result.plots.push_back(std::move(plot));

  result.metadata = base_metadata(config);
  result.summary = {{"grid_points", kappa_grid.size()},
                    {"wy_mc_at_first_kappa", result.main.rows.front()[2]},
                    {"wy_mc_at_last_kappa", result.main.rows.back()[2]}};
  return result;
}

ExperimentResult run_sweep_noise(const ExperimentConfig& config) {
  const auto& p = config.parameters;
  const auto sigma_grid = get_grid(p, "sigma_grid", logspace(1e-5, 1e-1, 17));
  const double kappa = get_double(p, "kappa", 0.1);
  const double L = get_double(p, "L", 0.1);
  const int N = static_cast<int>(get_long(p, "N", 100000));
  const int seeds = static_cast<int>(get_long(p, "seeds", 5));
  const double rtol = get_double(p, "rtol", 1e-10);
  const Polynomial g = get_polynomial(p, "g", demo_target_2d());
  const auto scatter_sigmas = get_grid(p, "scatter_sigmas", {0.0, 1e-3, 2e-3});
  const int scatter_max = static_cast<int>(get_long(p, "scatter_max_points", 1000));
  for (double s : sigma_grid)
    if (s < 0) throw ConfigError("sigma grid must be non-negative");

  const auto spec = ManifoldSpec::curve2d(kappa);

  ExperimentResult result;
  result.name = "sweep-noise";
  result.main.name = "main";
  result.main.columns = {"sigma",      "wy_mc_mean", "wy_mc_std", "wx_mc_mean",
                         "b_mc_mean",  "wy_inf",     "wy_theory", "wy_err_mc"};

  for (size_t i = 0; i < sigma_grid.size(); ++i) {
    const double sigma = sigma_grid[i];
    double wy_sum = 0, wy_sq = 0, wx_sum = 0, b_sum = 0;
    for (int s = 0; s < seeds; ++s) {
      auto samples = sample_uniform(spec, L, N, config.seed + 1000ULL * s);
      if (sigma > 0) {
        NoiseSpec noise{Eigen::VectorXd::Constant(1, sigma),
                        config.seed + 1000ULL * s + 7919ULL * (i + 1)};
        samples = add_noise(samples, noise);
      }
      const auto sol = solve_from_data(samples, g.evaluate_rows(samples.points), rtol);
      wy_sum += sol.w[1];
      wy_sq += sol.w[1] * sol.w[1];
      wx_sum += sol.w[0];
      b_sum += sol.b;
    }
    const double wy_mean = wy_sum / seeds;
    const double wy_std =
        seeds > 1 ? std::sqrt(std::max(0.0, (wy_sq - seeds * wy_mean * wy_mean) / (seeds - 1)))
                  : 0.0;

    double wy_inf;
    if (sigma > 0) {
      const auto table =
          quadrature_moments_noisy(spec, g, L, Eigen::VectorXd::Constant(1, sigma));
      wy_inf = solve_normal_system(assemble_normal_system(table), rtol, table.g_squared).w[1];
    } else {
      const auto table = quadrature_moments(spec, g, L);
      wy_inf = solve_normal_system(assemble_normal_system(table), rtol, table.g_squared).w[1];
    }
    const double wy_theory = sigma > 0 ? predict_curve2d_noisy(g, kappa, L, sigma)
                                       : predict_curve2d(g, kappa).w_leading[1];
    result.main.rows.push_back({sigma, wy_mean, wy_std, wx_sum / seeds, b_sum / seeds, wy_inf,
                                wy_theory, std::abs(wy_mean - wy_theory)});
  }

  // data clouds for selected noise levels
  for (size_t k = 0; k < scatter_sigmas.size(); ++k) {
    const double sigma = scatter_sigmas[k];
    auto samples = sample_uniform(spec, L, std::min(N, scatter_max), config.seed);
    if (sigma > 0)
      samples = add_noise(samples, {Eigen::VectorXd::Constant(1, sigma), config.seed + 1});
    NamedTable t;
    t.name = "scatter_" + std::to_string(k);
    t.columns = {"x", "y"};
    svg::Series s;
    s.label = "sigma=" + std::to_string(sigma);
    s.points_only = true;
    for (int r = 0; r < samples.size(); ++r) {
      t.rows.push_back({samples.points(r, 0), samples.points(r, 1)});
      s.x.push_back(samples.points(r, 0));
      s.y.push_back(samples.points(r, 1));
    }
    result.extra_tables.push_back(std::move(t));
    PlotSpec plot;
    plot.name = "scatter_" + std::to_string(k);
    plot.options = {"noisy data cloud " + s.label, "x", "y", false, false};
    plot.series.push_back(std::move(s));
    result.plots.push_back(std::move(plot));
  }

  PlotSpec plot;
  plot.name = "wy";
  plot.options = {"w_y vs noise level", "sigma", "w_y", true, false};
  for (const auto& [label, col] :
       std::vector<std::pair<std::string, int>>{{"w_y (data)", 1}, {"w_y (theory)", 6}}) {
    svg::Series s;
    s.label = label;
    for (const auto& row : result.main.rows) {
      s.x.push_back(row[0]);
      s.y.push_back(row[static_cast<size_t>(col)]);
    }
    plot.series.push_back(std::move(s));
  }
  result.plots.push_back(std::move(plot));

  result.metadata = base_metadata(config);
  result.summary = {{"kappa", kappa}, {"L", L}, {"N", N}, {"seeds", seeds}};
  return result;
}

ExperimentResult run_validate_hypersurface(const ExperimentConfig& config) {
  const auto& p = config.parameters;
  std::vector<long> dims = {3, 4, 5};
  if (p.contains("dims")) dims = p.at("dims").get<std::vector<long>>();
  const int num_targets = static_cast<int>(get_long(p, "num_targets", 10));
  const auto L_grid = get_grid(p, "L_grid", {0.1, 0.05, 0.025, 0.0125});
  const int max_degree = static_cast<int>(get_long(p, "max_degree", 3));
  const double kmin = get_double(p, "kappa_min", 0.5);
  const double kmax = get_double(p, "kappa_max", 2.0);
  const double rtol = get_double(p, "rtol", 1e-10);
  for (long d : dims)
    if (d < 2 || d > 8) throw ConfigError("hypersurface dims must be in [2, 8]");

  ExperimentResult result;
  result.name = "validate-hypersurface";
  result.main.name = "main";
  result.main.columns = {"d", "target", "L", "err_wy", "err_b"};
  NamedTable slopes;
  slopes.name = "slopes";
  slopes.columns = {"d", "target", "slope_wy", "slope_b"};

  double slope_min = std::numeric_limits<double>::max();
  double slope_max = std::numeric_limits<double>::lowest();
  for (long d : dims) {
    for (int t = 0; t < num_targets; ++t) {
      Rng rng(config.seed, static_cast<uint64_t>(d) * 1000 + t);
      Eigen::VectorXd kappas(d - 1);
      for (Eigen::Index i = 0; i < kappas.size(); ++i) {
        const double mag = rng.uniform(kmin, kmax);
        kappas[i] = rng.uniform01() < 0.5 ? -mag : mag;
      }
      const Polynomial g = random_polynomial(static_cast<int>(d), max_degree, rng);
      const auto spec = ManifoldSpec::hypersurface(kappas);

      std::vector<double> errs_wy, errs_b;
      for (double L : L_grid) {
        const auto table = quadrature_moments(spec, g, L);
        const auto sol =
            solve_normal_system(assemble_normal_system(table), rtol, table.g_squared);
        const auto pred = predict_hypersurface(g, kappas, L);
        const double err_wy = std::abs(sol.w[d - 1] - pred.w_leading[d - 1]);
        const double err_b = std::abs(sol.b - pred.predicted_b());
        errs_wy.push_back(err_wy);
        errs_b.push_back(err_b);
        result.main.rows.push_back(
            {static_cast<double>(d), static_cast<double>(t), L, err_wy, err_b});
      }
      const double slope_wy = fit_loglog_slope(L_grid, errs_wy);
      const double slope_b = fit_loglog_slope(L_grid, errs_b);
      slopes.rows.push_back(
          {static_cast<double>(d), static_cast<double>(t), slope_wy, slope_b});
      slope_min = std::min(slope_min, slope_wy);
      slope_max = std::max(slope_max, slope_wy);
    }
  }
  result.extra_tables.push_back(std::move(slopes));

  PlotSpec plot;
  plot.name = "convergence";
  plot.options = {"w_y error vs patch size", "L", "|w_y - theory|", true, true};
  for (long d : dims) {
    svg::Series s;
    s.label = "d=" + std::to_string(d);
    for (const auto& row : result.main.rows)
      if (row[0] == static_cast<double>(d) && row[1] == 0) {
        s.x.push_back(row[2]);
        s.y.push_back(row[3]);
      }
    plot.series.push_back(std::move(s));
  }
  result.plots.push_back(std::move(plot));

  result.metadata = base_metadata(config);
  result.summary = {{"slope_wy_min", slope_min}, {"slope_wy_max", slope_max}};
  return result;
}

ExperimentResult run_validate_curve_nd(const ExperimentConfig& config) {
  const auto& p = config.parameters;
  const int d = static_cast<int>(get_long(p, "d", 5));
  if (d < 2 || d > 7) throw ConfigError("curve dims must be in [2, 7]");
  const int num_targets = static_cast<int>(get_long(p, "num_targets", 3));
  // Default grid stays above the double-precision floor of the graded
  // moment solve: the w_n signal sits ~L^4 below the leading entries, so
  // very small L drowns the measured rates in roundoff.
  const auto L_grid = get_grid(p, "L_grid", {0.2, 0.1, 0.05, 0.025});
  const double rtol = get_double(p, "rtol", 1e-10);
  std::vector<long> ns;
  if (p.contains("ns"))
    ns = p.at("ns").get<std::vector<long>>();
  else
    for (int n = 1; n <= d; ++n) ns.push_back(n);

  ExperimentResult result;
  result.name = "validate-curve";
  result.main.name = "main";
  result.main.columns = {"target", "n", "L", "err_wn"};
  NamedTable slopes;
  slopes.name = "slopes";
  slopes.columns = {"target", "n", "measured_slope", "predicted_exponent"};

  double max_cross_block = 0.0;
  for (int t = 0; t < num_targets; ++t) {
    Rng rng(config.seed, 5000 + static_cast<uint64_t>(t));
    Eigen::VectorXd ks(d);
    ks[0] = 1.0;
    if (p.contains("ks")) {
      const auto v = p.at("ks").get<std::vector<double>>();
      if (static_cast<int>(v.size()) != d) throw ConfigError("ks must have length d (k_1..k_d)");
      for (int i = 0; i < d; ++i) ks[i] = v[i];
    } else {
      for (int i = 1; i < d; ++i) {
        const double mag = rng.uniform(0.3, 1.5);
        ks[i] = rng.uniform01() < 0.5 ? -mag : mag;
      }
    }
    const Polynomial g = random_polynomial(d, d, rng, 0.25, 1.0);
    const auto spec = ManifoldSpec::space_curve(ks.tail(d - 1));

    std::vector<CurveNdPrediction> preds;
    for (long n : ns) preds.push_back(predict_curve_nd(g, ks, static_cast<int>(n), d));

    std::vector<std::vector<double>> errs(ns.size());
    for (double L : L_grid) {
      const auto table = quadrature_moments(spec, g, L);
      const auto sys = assemble_normal_system(table);
      if (L == L_grid.front()) {
        // Coordinate x_i carries parity i; the bias row pairs with the even
        // block. Cross-parity entries must vanish under symmetric quadrature.
        for (int i = 0; i < d + 1; ++i)
          for (int j = 0; j < d + 1; ++j) {
            const int pi = i < d ? (i + 1) % 2 : 0;
            const int pj = j < d ? (j + 1) % 2 : 0;
            if (pi != pj)
              max_cross_block = std::max(max_cross_block, std::abs(sys.matrix_A(i, j)));
          }
      }
      const auto sol = solve_normal_system(sys, rtol, table.g_squared);
      for (size_t k = 0; k < ns.size(); ++k) {
        const double err = std::abs(sol.w[ns[k] - 1] - preds[k].w_n_leading);
        errs[k].push_back(err);
        result.main.rows.push_back(
            {static_cast<double>(t), static_cast<double>(ns[k]), L, err});
      }
    }
    for (size_t k = 0; k < ns.size(); ++k) {
      slopes.rows.push_back({static_cast<double>(t), static_cast<double>(ns[k]),
                             fit_loglog_slope(L_grid, errs[k]),
                             static_cast<double>(preds[k].error_exponent)});
    }
  }
  result.extra_tables.push_back(std::move(slopes));

  PlotSpec plot;
  plot.name = "convergence";
  plot.options = {"coefficient error vs patch size", "L", "|w_n - theory|", true, true};
  for (long n : ns) {
    svg::Series s;
    s.label = "n=" + std::to_string(n);
    for (const auto& row : result.main.rows)
      if (row[0] == 0 && row[1] == static_cast<double>(n)) {
        s.x.push_back(row[2]);
        s.y.push_back(row[3]);
      }
    plot.series.push_back(std::move(s));
  }
  result.plots.push_back(std::move(plot));

  result.metadata = base_metadata(config);
  result.summary = {{"d", d}, {"max_cross_block", max_cross_block}};
  return result;
}

ExperimentResult run_degeneracy_demo(const ExperimentConfig& config) {
  const auto& p = config.parameters;
  const double k11 = get_double(p, "k11", 1.0);
  const double k22 = get_double(p, "k22", 2.0);
  const double L = get_double(p, "L", 0.1);
  const double sigma0 = get_double(p, "sigma", 1e-2);
  const int N = static_cast<int>(get_long(p, "N", 100000));
  const int seeds = static_cast<int>(get_long(p, "seeds", 20));
  const double rtol = get_double(p, "rtol", 1e-10);
  const Polynomial g = get_polynomial(p, "g", demo_target_codim2());
  if (g.ambient_dim() != 4) throw ConfigError("degeneracy target must live in R^4");

  std::vector<Eigen::MatrixXd> forms = {
      (Eigen::MatrixXd(2, 2) << k11, 0, 0, k22).finished(), Eigen::MatrixXd::Zero(2, 2)};
  const auto spec = ManifoldSpec::codim_k(2, forms);
  const double dg_dy2 = predict_codim2_noisy_wy2(g, sigma0);

  // Clean manifold: the y2 row of the normal system is identically zero.
  const auto clean_table = quadrature_moments(spec, g, L);
  const auto clean_sys = assemble_normal_system(clean_table);
  const auto report = diagnose_degeneracy(clean_sys, rtol);
  const auto clean_sol = solve_normal_system(clean_sys, rtol, clean_table.g_squared);

  ExperimentResult result;
  result.name = "degeneracy";
  result.main.name = "main";
  result.main.columns = {"sigma",       "det_rank",   "det_wy2",     "det_err",
                         "mc_rank_min", "mc_wy2_mean", "mc_wy2_std"};

  std::vector<double> det_errs;
  for (const double sigma : {sigma0, sigma0 / 2}) {
    Eigen::VectorXd sig(2);
    sig << 0.0, sigma;
    const auto table = quadrature_moments_noisy(spec, g, L, sig);
    const auto det_sol =
        solve_normal_system(assemble_normal_system(table), rtol, table.g_squared);
    const double det_err = std::abs(det_sol.w[3] - dg_dy2);
    det_errs.push_back(det_err);

    double sum = 0, sq = 0;
    int rank_min = 5;
    for (int s = 0; s < seeds; ++s) {
      auto samples = sample_uniform(spec, L, N, config.seed + s);
      samples = add_noise(samples, {sig, config.seed + 10000ULL + s});
      const auto sol = solve_from_data(samples, g.evaluate_rows(samples.points), rtol);
      sum += sol.w[3];
      sq += sol.w[3] * sol.w[3];
      rank_min = std::min(rank_min, sol.rank);
    }
    const double mean = sum / seeds;
    const double stdev =
        seeds > 1 ? std::sqrt(std::max(0.0, (sq - seeds * mean * mean) / (seeds - 1))) : 0.0;
    result.main.rows.push_back({sigma, static_cast<double>(det_sol.rank), det_sol.w[3],
                                det_err, static_cast<double>(rank_min), mean, stdev});
  }

  result.metadata = base_metadata(config);
  result.summary = {
      {"clean_rank", report.rank},
      {"flat_coordinates", report.flat_coordinates},
      {"clean_wy2_min_norm", clean_sol.w[3]},
      {"clean_min_norm_applied", clean_sol.min_norm_applied},
      {"dg_dy2", dg_dy2},
      {"det_err_ratio", det_errs[1] > 0 ? det_errs[0] / det_errs[1]
                                        : std::numeric_limits<double>::quiet_NaN()}};
  return result;
}

namespace {

int spectrum_cutoff(const Eigen::VectorXd& sv, double gap_threshold) {
  const double tiny = 1e-300;
  for (Eigen::Index i = 0; i + 1 < sv.size(); ++i) {
    if (sv[i] / std::max(sv[i + 1], tiny) > gap_threshold) return static_cast<int>(i) + 1;
  }
  int r = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv[i] > 1e-12 * sv[0]) ++r;
  return std::max(1, r);
}

Eigen::MatrixXd load_intrinsic_data(const nlohmann::json& p, uint64_t seed) {
  const std::string source = get_string(p, "source", "synthetic");
  if (source == "synthetic") {
    const int N = static_cast<int>(get_long(p, "N", 500));
    const int D = static_cast<int>(get_long(p, "D", 100));
    const int rank = static_cast<int>(get_long(p, "rank", 30));
    const double scale = get_double(p, "scale", 1.0);
    return make_low_rank_dataset(N, D, rank, seed, scale);
  }
  if (source == "idx") {
    const std::string images = get_string(p, "idx_images", "");
    if (images.empty()) throw ConfigError("idx source needs 'idx_images'");
    const std::string labels = get_string(p, "idx_labels", "");
    if (!labels.empty())
      return idx::read_idx_filtered(images, labels,
                                    static_cast<int>(get_long(p, "label_filter", 2)));
    return idx::read_idx(images);
  }
  throw ConfigError("source must be 'synthetic' or 'idx'");
}

}  // namespace

ExperimentResult run_intrinsic_dim(const ExperimentConfig& config) {
  const auto& p = config.parameters;
  const double gap_threshold = get_double(p, "gap_threshold", 1e3);
  const double rtol = get_double(p, "rtol", 1e-10);
  const double perturb_value = get_double(p, "perturb_value", 0.18);

  const Eigen::MatrixXd X = load_intrinsic_data(p, config.seed);
  const int D = static_cast<int>(X.cols());

  const auto spectrum = pca_spectrum(X);
  const int cutoff = spectrum_cutoff(spectrum.singular_values, gap_threshold);

  // Random unit-vector linear target.
  Rng rng(config.seed, 999);
  Eigen::VectorXd u(D);
  for (int i = 0; i < D; ++i) u[i] = rng.gaussian();
  u.normalize();
  const Eigen::VectorXd g_values = X * u;

  const auto full = solve_from_data(X, g_values, rtol);
  const Eigen::VectorXd full_pred = evaluate(full, X);
  const double residual_max = (full_pred - g_values).cwiseAbs().maxCoeff();

  std::vector<int> flat;
  for (int i = 0; i < D; ++i)
    if (std::abs(full.w[i]) < 1e-8) flat.push_back(i);

  RegressionSolution perturbed = full;
  for (int i : flat) perturbed.w[i] = perturb_value;
  const double residual_max_perturbed =
      (evaluate(perturbed, X) - g_values).cwiseAbs().maxCoeff();

  const Eigen::MatrixXd projected = project_onto(X, spectrum, cutoff);
  const auto proj = solve_from_data(projected, g_values, rtol);
  const Eigen::VectorXd expected_w = spectrum.components.leftCols(cutoff).transpose() * u;
  const double recovery_err = (proj.w - expected_w).cwiseAbs().maxCoeff();
  const double proj_residual_max =
      (evaluate(proj, projected) - g_values).cwiseAbs().maxCoeff();

  ExperimentResult result;
  result.name = "intrinsic-dim";
  result.main.name = "solution";
  result.main.columns = {"index", "w", "w_minus_u", "w_perturbed"};
  for (int i = 0; i < D; ++i)
    result.main.rows.push_back(
        {static_cast<double>(i + 1), full.w[i], full.w[i] - u[i], perturbed.w[i]});

  NamedTable spec_table;
  spec_table.name = "spectrum";
  spec_table.columns = {"index", "singular_value"};
  for (Eigen::Index i = 0; i < spectrum.singular_values.size(); ++i)
    spec_table.rows.push_back({static_cast<double>(i + 1), spectrum.singular_values[i]});
  result.extra_tables.push_back(std::move(spec_table));

  NamedTable proj_table;
  proj_table.name = "projected_solution";
  proj_table.columns = {"index", "w", "expected_w"};
  for (int i = 0; i < cutoff; ++i)
    proj_table.rows.push_back({static_cast<double>(i + 1), proj.w[i], expected_w[i]});
  result.extra_tables.push_back(std::move(proj_table));

  PlotSpec spec_plot;
  spec_plot.name = "spectrum";
  spec_plot.options = {"singular values", "index", "singular value", false, true};
  svg::Series sv;
  sv.label = "singular values";
  for (Eigen::Index i = 0; i < spectrum.singular_values.size(); ++i) {
    sv.x.push_back(static_cast<double>(i + 1));
    sv.y.push_back(spectrum.singular_values[i]);
  }
  spec_plot.series.push_back(std::move(sv));
  result.plots.push_back(std::move(spec_plot));

  PlotSpec sol_plot;
  sol_plot.name = "solution";
  sol_plot.options = {"full-dimension regression solution", "index", "w_i", false, false};
  svg::Series sw;
  sw.label = "w";
  sw.points_only = true;
  for (int i = 0; i < D; ++i) {
    sw.x.push_back(i + 1);
    sw.y.push_back(full.w[i]);
  }
  sol_plot.series.push_back(std::move(sw));
  result.plots.push_back(std::move(sol_plot));

  result.metadata = base_metadata(config);
  result.summary = {{"cutoff", cutoff},
                    {"full_rank", full.rank},
                    {"full_min_norm_applied", full.min_norm_applied},
                    {"residual_max", residual_max},
                    {"n_flat", flat.size()},
                    {"residual_max_perturbed", residual_max_perturbed},
                    {"perturb_delta", std::abs(residual_max_perturbed - residual_max)},
                    {"projected_rank", proj.rank},
                    {"projected_min_norm_applied", proj.min_norm_applied},
                    {"projected_recovery_err", recovery_err},
                    {"projected_residual_max", proj_residual_max}};
  return result;
}

ExperimentResult run_bend(const ExperimentConfig& config) {
  const auto& p = config.parameters;
  const auto alpha_grid = get_grid(p, "alpha_grid", {1e-4, 1e-6, 1e-8});
  const int N = static_cast<int>(get_long(p, "N", 500));
  const int D = static_cast<int>(get_long(p, "D", 100));
  // Fewer normal directions than tangent dimensions, so the bent features
  // cannot absorb the whole quadratic target and e1 settles at a nonzero
  // alpha-independent level.
  const int rank = static_cast<int>(get_long(p, "rank", 60));
  const double scale = get_double(p, "scale", 1.0);
  const double gap_threshold = get_double(p, "gap_threshold", 1e3);
  const double rtol = get_double(p, "rtol", 1e-10);
  for (double a : alpha_grid)
    if (a <= 0) throw ConfigError("alpha grid must be positive");

  Polynomial g(D);
  if (p.contains("g")) {
    g = Polynomial::from_json(p.at("g"));
    if (g.ambient_dim() != D) throw ConfigError("bend target dimension must equal D");
  } else {
    // quadratic analog: 0.02 sum x_i^2 + 0.01 sum x_i
    for (int i = 0; i < D; ++i) {
      std::vector<int> e(D, 0);
      e[i] = 2;
      g.add_term(e, 0.02);
      e[i] = 1;
      g.add_term(e, 0.01);
    }
  }

  const Eigen::MatrixXd X = make_low_rank_dataset(N, D, rank, config.seed, scale);
  const auto spectrum = pca_spectrum(X);
  const int cutoff = spectrum_cutoff(spectrum.singular_values, gap_threshold);
  const Eigen::MatrixXd projected = project_onto(X, spectrum, cutoff);
  const Eigen::MatrixXd X_tilde =
      (projected * spectrum.components.leftCols(cutoff).transpose()).rowwise() +
      spectrum.mean.transpose();
  const Eigen::MatrixXd normals = spectrum.components.rightCols(D - cutoff);

  // Out-of-sample points: step off the data subspace along all normals.
  const Eigen::VectorXd normal_shift = 0.1 * normals.rowwise().sum();
  const Eigen::MatrixXd X_out = X_tilde.rowwise() + normal_shift.transpose();
  const Eigen::VectorXd g_out = g.evaluate_rows(X_out);

  SampleSet base;
  base.points = X_tilde;
  base.tangent_dim = cutoff;
  base.half_width_L = scale;
  base.seed = config.seed;

  ExperimentResult result;
  result.name = "bend";
  result.main.name = "main";
  result.main.columns = {"alpha", "w_norm", "e1", "e2"};

  for (double alpha : alpha_grid) {
    const auto bent = bend_dataset(base, normals, alpha, config.seed + 31);
    const Eigen::VectorXd g_bent = g.evaluate_rows(bent.points);
    const auto sol = solve_from_data(bent.points, g_bent, rtol);
    const double e1 = (evaluate(sol, bent.points) - g_bent).norm();
    const double e2 = (evaluate(sol, X_out) - g_out).norm();
    result.main.rows.push_back({alpha, sol.w.norm(), e1, e2});
  }

  PlotSpec plot;
  plot.name = "scaling";
  plot.options = {"bending magnitude vs solution size", "alpha", "", true, true};
  for (const auto& [label, col] : std::vector<std::pair<std::string, int>>{
           {"|w|", 1}, {"e1 (in-sample)", 2}, {"e2 (out-of-sample)", 3}}) {
    svg::Series s;
    s.label = label;
    for (const auto& row : result.main.rows) {
      s.x.push_back(row[0]);
      s.y.push_back(row[static_cast<size_t>(col)]);
    }
    plot.series.push_back(std::move(s));
  }
  result.plots.push_back(std::move(plot));

  result.metadata = base_metadata(config);
  result.summary = {{"cutoff", cutoff}, {"normal_count", D - cutoff}};
  return result;
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
  switch (config.experiment) {
    case ExperimentKind::SweepCurvature: return run_sweep_curvature(config);
    case ExperimentKind::SweepNoise: return run_sweep_noise(config);
    case ExperimentKind::ValidateHypersurface: return run_validate_hypersurface(config);
    case ExperimentKind::ValidateCurveNd: return run_validate_curve_nd(config);
    case ExperimentKind::Degeneracy: return run_degeneracy_demo(config);
    case ExperimentKind::IntrinsicDim: return run_intrinsic_dim(config);
    case ExperimentKind::Bend: return run_bend(config);
  }
  throw std::logic_error("unreachable");
}

}  // namespace mlr
