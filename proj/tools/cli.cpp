#include "cli.hpp"

#include "cogom/errors.hpp"
#include "cogom/estimator.hpp"
#include "cogom/io.hpp"
#include "cogom/metrics.hpp"
#include "cogom/parallel.hpp"
#include "cogom/selection.hpp"
#include "cogom/simulation.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <mutex>
#include <optional>
#include <ostream>
#include <sstream>

namespace cogom::cli {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

namespace {

constexpr const char* kVersion = "0.1.0";

Json number(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

Json numbers(const std::vector<double>& v) {
  Json out = Json::array();
  for (const double x : v) out.push_back(number(x));
  return out;
}

Json numbers(const Vector& v) { return numbers(std::vector<double>(v.data(), v.data() + v.size())); }

Json shape(const DenseMatrix& m) { return Json::array({m.rows(), m.cols()}); }

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    throw IoError("cannot create output directory '" + dir.string() + "'");
  }
}

Json manifest_base(const std::string& command, const std::vector<std::string>& args) {
  Json m;
  m["tool"] = "cogom";
  m["version"] = kVersion;
  m["command"] = command;
  // Re-running `cogom <command> <args...> --output DIR` reproduces the run.
  std::vector<std::string> rerun;
  for (std::size_t i = 1; i < args.size(); ++i) {
    if (args[i] == "--output" || args[i] == "-o") {
      ++i;
      continue;
    }
    if (args[i].rfind("--output=", 0) == 0) continue;
    rerun.push_back(args[i]);
  }
  m["args"] = rerun;
  return m;
}

std::vector<double> parse_list(const std::string& text, const char* what) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto parsed = io::parse_matrix_csv(item, what);
    if (parsed.size() != 1) throw ArgumentError(std::string("bad value in ") + what);
    out.push_back(parsed(0, 0));
  }
  if (out.empty()) throw ArgumentError(std::string(what) + " must not be empty");
  return out;
}

// ---------------------------------------------------------------- inputs

struct Inputs {
  DenseMatrix r;
  DenseMatrix x;
  bool has_x = false;
  fs::path dir;  // where truth files are looked up
};

Inputs load_inputs(const std::string& input, const std::string& covariates, bool no_covariates) {
  if (input.empty()) throw ArgumentError("--input is required");
  Inputs in;
  fs::path r_path = input;
  if (fs::is_directory(r_path)) {
    in.dir = r_path;
    r_path /= "R.csv";
  } else {
    in.dir = r_path.parent_path();
  }
  if (!fs::exists(r_path)) throw IoError("response file '" + r_path.string() + "' not found");
  in.r = io::read_matrix_csv(r_path);
  if (in.r.size() == 0) throw ValidationError(r_path.string() + ": response matrix is empty");

  fs::path x_path;
  if (!covariates.empty()) {
    x_path = covariates;
    if (!fs::exists(x_path)) throw IoError("covariate file '" + x_path.string() + "' not found");
  } else if (!no_covariates && fs::exists(in.dir / "X.csv")) {
    x_path = in.dir / "X.csv";
  }
  if (!x_path.empty()) {
    in.x = io::read_matrix_csv(x_path);
    if (in.x.size() == 0) {
      in.x.resize(in.r.rows(), 0);
    } else {
      in.has_x = true;
    }
  } else {
    in.x.resize(in.r.rows(), 0);
  }
  return in;
}

std::optional<Factors> load_truth(const fs::path& dir) {
  const fs::path pi = dir / "truth_pi.csv";
  const fs::path theta = dir / "truth_theta.csv";
  if (!fs::exists(pi) || !fs::exists(theta)) return std::nullopt;
  Factors t;
  t.pi = io::read_matrix_csv(pi);
  t.theta = io::read_matrix_csv(theta);
  if (fs::exists(dir / "truth_m.csv")) t.m = io::read_matrix_csv(dir / "truth_m.csv");
  return t;
}

// ------------------------------------------------------- shared fit flags

struct FitFlags {
  std::size_t k = 3;
  std::string method = "heteropca";
  std::size_t hetero_iters = 10;
  double hetero_tol = 1e-6;
  double trunc_eps = 0.001;
  bool allow_fractional = false;
};

void add_fit_flags(CLI::App* cmd, FitFlags& f) {
  cmd->add_option("--k", f.k, "number of extreme profiles")->capture_default_str();
  cmd->add_option("--hetero-iters", f.hetero_iters, "HeteroPCA iteration cap")
      ->capture_default_str();
  cmd->add_option("--hetero-tol", f.hetero_tol, "HeteroPCA relative stopping tolerance")
      ->capture_default_str();
  cmd->add_option("--trunc-eps", f.trunc_eps, "clamp Theta into [eps, 1 - eps]")
      ->capture_default_str();
  cmd->add_flag("--allow-fractional", f.allow_fractional,
                "accept responses anywhere in [0, 1] instead of only 0/1");
}

FitConfig to_fit_config(const FitFlags& f, GramEstimator estimator) {
  FitConfig cfg;
  cfg.k = f.k;
  cfg.gram_estimator = estimator;
  cfg.hetero.max_iters = f.hetero_iters;
  cfg.hetero.tol = f.hetero_tol;
  cfg.trunc_eps = f.trunc_eps;
  cfg.require_binary = !f.allow_fractional;
  return cfg;
}

Json fit_config_json(const FitConfig& cfg) {
  Json j;
  j["k"] = cfg.k;
  j["alpha"] = cfg.alpha;
  j["gram_estimator"] = to_string(cfg.gram_estimator);
  j["hetero_iters"] = cfg.hetero.max_iters;
  j["hetero_tol"] = cfg.hetero.tol;
  j["trunc_eps"] = cfg.trunc_eps;
  j["require_binary"] = cfg.require_binary;
  return j;
}

Json aligned_json(const AlignedError& a) {
  Json j;
  j["permutation"] = a.permutation;
  j["mae_pi"] = number(a.mae_pi);
  j["mae_theta"] = number(a.mae_theta);
  j["mae_m"] = a.mae_m ? number(*a.mae_m) : Json(nullptr);
  j["two_to_inf_pi"] = number(a.two_to_inf_pi);
  j["max_abs_pi"] = number(a.max_abs_pi);
  j["max_abs_theta"] = number(a.max_abs_theta);
  return j;
}

// ------------------------------------------------------------- simulate

struct SimulateFlags {
  std::size_t n = 200;
  std::optional<std::size_t> j, w;
  std::size_t k = 3;
  std::string dirichlet;
  std::string theta_law = "uniform";
  double theta_a = 1.0, theta_b = 1.0;
  std::string m_law = "normal";
  double m_mean = 0.0, m_sd = 1.0, m_bound = 3.0;
  double sigma = 0.5;
  std::optional<double> beta_het;
  std::string noise_axis = "rows";
  bool pure = false;
  bool noiseless = false;
};

void add_simulation_flags(CLI::App* cmd, SimulateFlags& f) {
  cmd->add_option("--n", f.n, "subjects")->capture_default_str();
  cmd->add_option("--j", f.j, "items (default N/10)");
  cmd->add_option("--w", f.w, "covariates (default N/20)");
  cmd->add_option("--k", f.k, "extreme profiles")->capture_default_str();
  cmd->add_option("--dirichlet", f.dirichlet, "comma-separated concentrations (default ones)");
  cmd->add_option("--theta-law", f.theta_law, "uniform | beta")
      ->check(CLI::IsMember({"uniform", "beta"}))
      ->capture_default_str();
  cmd->add_option("--theta-a", f.theta_a, "Beta a")->capture_default_str();
  cmd->add_option("--theta-b", f.theta_b, "Beta b")->capture_default_str();
  cmd->add_option("--m-law", f.m_law, "normal | truncated")
      ->check(CLI::IsMember({"normal", "truncated"}))
      ->capture_default_str();
  cmd->add_option("--m-mean", f.m_mean)->capture_default_str();
  cmd->add_option("--m-sd", f.m_sd)->capture_default_str();
  cmd->add_option("--m-bound", f.m_bound)->capture_default_str();
  cmd->add_option("--sigma", f.sigma, "homoskedastic covariate noise sd")->capture_default_str();
  cmd->add_option("--beta-het", f.beta_het, "power-law heteroskedastic noise exponent");
  cmd->add_option("--noise-axis", f.noise_axis, "rows | columns")
      ->check(CLI::IsMember({"rows", "columns"}))
      ->capture_default_str();
  cmd->add_flag("--pure", f.pure, "set the first K rows of Pi to the identity");
  cmd->add_flag("--noiseless", f.noiseless, "R is the exact mean Pi Theta^T");
}

SimStudyConfig to_sim_config(const SimulateFlags& f, std::uint64_t seed) {
  SimStudyConfig c;
  c.n = f.n;
  c.j = f.j.value_or(f.n / 10);
  c.w = f.w.value_or(f.n / 20);
  c.k = f.k;
  if (c.k > c.n) {
    throw ArgumentError("K=" + std::to_string(c.k) + " exceeds N=" + std::to_string(c.n));
  }
  if (!f.dirichlet.empty()) c.dirichlet = parse_list(f.dirichlet, "--dirichlet");
  if (f.theta_law == "beta") {
    c.theta_law.kind = ThetaLaw::Kind::kBeta;
    c.theta_law.a = f.theta_a;
    c.theta_law.b = f.theta_b;
  }
  if (f.m_law == "truncated") {
    c.m_law.kind = MLaw::Kind::kTruncatedNormal;
    c.m_law.mean = f.m_mean;
    c.m_law.sd = f.m_sd;
    c.m_law.bound = f.m_bound;
  }
  c.x_noise.sigma = f.sigma;
  if (f.beta_het) {
    c.x_noise.kind = XNoise::Kind::kPowerLaw;
    c.x_noise.beta_het = *f.beta_het;
  }
  c.x_noise.axis = f.noise_axis == "columns" ? XNoise::Axis::kColumns : XNoise::Axis::kRows;
  c.inject_pure = f.pure;
  c.sample_responses = !f.noiseless;
  c.seed = seed;
  c.validate();
  return c;
}

Json sim_config_json(const SimStudyConfig& c) {
  Json j;
  j["n"] = c.n;
  j["j"] = c.j;
  j["w"] = c.w;
  j["k"] = c.k;
  j["dirichlet"] = c.dirichlet_or_default();
  j["theta_law"] = c.theta_law.kind == ThetaLaw::Kind::kBeta
                       ? Json{{"kind", "beta"}, {"a", c.theta_law.a}, {"b", c.theta_law.b}}
                       : Json{{"kind", "uniform"}};
  j["m_law"] = c.m_law.kind == MLaw::Kind::kTruncatedNormal
                   ? Json{{"kind", "truncated"},
                          {"mean", c.m_law.mean},
                          {"sd", c.m_law.sd},
                          {"bound", c.m_law.bound}}
                   : Json{{"kind", "normal"}};
  if (c.x_noise.kind == XNoise::Kind::kPowerLaw) {
    j["x_noise"] = {{"kind", "power-law"},
                    {"beta_het", c.x_noise.beta_het},
                    {"axis", c.x_noise.axis == XNoise::Axis::kRows ? "rows" : "columns"}};
  } else {
    j["x_noise"] = {{"kind", "homoskedastic"}, {"sigma", c.x_noise.sigma}};
  }
  j["inject_pure"] = c.inject_pure;
  j["sample_responses"] = c.sample_responses;
  j["seed"] = c.seed;
  return j;
}

int cmd_simulate(const SimulateFlags& f, std::uint64_t seed, const std::string& output,
                 const std::vector<std::string>& args, std::ostream& out) {
  if (output.empty()) throw ArgumentError("--output is required");
  const SimStudyConfig cfg = to_sim_config(f, seed);
  const SimDataset d = generate(cfg);
  const fs::path dir = output;
  ensure_dir(dir);
  io::write_matrix_csv(dir / "R.csv", d.r);
  io::write_matrix_csv(dir / "X.csv", d.x);
  io::write_matrix_csv(dir / "truth_pi.csv", d.pi);
  io::write_matrix_csv(dir / "truth_theta.csv", d.theta);
  io::write_matrix_csv(dir / "truth_m.csv", d.m);

  Json m = manifest_base("simulate", args);
  m["config"] = sim_config_json(cfg);
  m["shapes"] = {{"R", shape(d.r)},
                 {"X", shape(d.x)},
                 {"truth_pi", shape(d.pi)},
                 {"truth_theta", shape(d.theta)},
                 {"truth_m", shape(d.m)}};
  m["clipped_means"] = d.clipped_means;
  io::write_text(dir / "manifest.json", dump(m));
  out << "wrote N=" << cfg.n << " J=" << cfg.j << " W=" << cfg.w << " K=" << cfg.k << " to "
      << dir.string() << "\n";
  return kOk;
}

// ------------------------------------------------------------------ fit

int cmd_fit(const std::string& input, const std::string& covariates, bool no_covariates,
            const FitFlags& ff, std::optional<double> alpha_flag, const std::string& output,
            const std::vector<std::string>& args, std::ostream& out) {
  if (output.empty()) throw ArgumentError("--output is required");
  GramEstimator estimator = GramEstimator::kHeteroPca;
  double alpha = alpha_flag.value_or(0.0);
  if (ff.method == "plain") {
    estimator = GramEstimator::kPlain;
  } else if (ff.method == "gom-svd" || ff.method == "stacked") {
    estimator = GramEstimator::kPlain;
    const double fixed = ff.method == "stacked" ? 1.0 : 0.0;
    if (alpha_flag && *alpha_flag != fixed) {
      throw ArgumentError("--method " + ff.method + " fixes alpha=" + io::format_double(fixed));
    }
    alpha = fixed;
  }
  FitConfig cfg = to_fit_config(ff, estimator);
  cfg.alpha = alpha;
  cfg.validate();

  const Inputs in = load_inputs(input, covariates, no_covariates);
  if (cfg.alpha > 0.0 && !in.has_x) throw ArgumentError("covariates required for alpha > 0");
  const GomModel model = fit(in.r, in.x, cfg);

  const fs::path dir = output;
  ensure_dir(dir);
  io::write_matrix_csv(dir / "pi.csv", model.pi);
  io::write_matrix_csv(dir / "theta.csv", model.theta);
  io::write_matrix_csv(dir / "m.csv", model.m);
  io::write_matrix_csv(dir / "eigenvalues.csv", DenseMatrix(model.eig.values));

  Json m = manifest_base("fit", args);
  m["config"] = fit_config_json(cfg);
  m["input"] = fs::absolute(in.dir).string();
  m["shapes"] = {{"R", shape(in.r)}, {"X", shape(in.x)}};
  m["pure_subjects"] = model.pure_subjects.indices;
  m["eigenvalues"] = numbers(model.eig.values);
  if (const auto truth = load_truth(in.dir)) {
    Factors est{model.pi, model.theta, model.m};
    if (truth->pi.rows() == est.pi.rows() && truth->pi.cols() == est.pi.cols() &&
        truth->theta.rows() == est.theta.rows() && truth->theta.cols() == est.theta.cols()) {
      if (truth->m.rows() != est.m.rows() || truth->m.cols() != est.m.cols()) {
        est.m.resize(0, 0);
      }
      m["metrics"] = aligned_json(align(est, *truth));
    }
  }
  io::write_text(dir / "manifest.json", dump(m));

  out << "K=" << cfg.k << " alpha=" << io::format_double(cfg.alpha) << " pure_subjects=[";
  for (std::size_t i = 0; i < model.pure_subjects.size(); ++i) {
    out << (i ? ", " : "") << model.pure_subjects.indices[i];
  }
  out << "]\n";
  return kOk;
}

// ------------------------------------------------------------------- cv

std::vector<double> resolve_grid(const std::string& spec, const DenseMatrix& r,
                                 const DenseMatrix& x, const FitConfig& cfg) {
  if (spec.empty() || spec == "default") return default_alpha_grid_for(r, x, cfg);
  if (spec.rfind("linspace:", 0) == 0) {
    const auto parts = parse_list(spec.substr(9), "--alpha-grid linspace");
    if (parts.size() != 3 || parts[2] < 1 || parts[2] != std::floor(parts[2])) {
      throw ArgumentError("--alpha-grid linspace:LO,HI,COUNT");
    }
    const auto count = static_cast<std::size_t>(parts[2]);
    std::vector<double> grid(count);
    for (std::size_t i = 0; i < count; ++i) {
      grid[i] = count == 1 ? parts[0]
                           : parts[0] + (parts[1] - parts[0]) * static_cast<double>(i) /
                                            static_cast<double>(count - 1);
    }
    return grid;
  }
  return parse_list(spec, "--alpha-grid");
}

struct CvFlags {
  std::string alpha_grid = "default";
  std::size_t folds = 5;
  bool ipw = false;
  double smooth_span = 0.75;
};

Json cv_report_json(const CvReport& rep) {
  Json j;
  j["alphas"] = numbers(rep.alphas);
  Json mae = Json::array();
  for (Eigen::Index i = 0; i < rep.mae.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index f = 0; f < rep.mae.cols(); ++f) row.push_back(number(rep.mae(i, f)));
    mae.push_back(row);
  }
  j["mae"] = mae;
  j["mean_mae"] = numbers(rep.mean_mae);
  j["smoothed"] = numbers(rep.smoothed);
  j["selected_alpha"] = rep.selected_alpha;
  j["selected_index"] = rep.selected_index;
  j["folds"] = rep.folds;
  j["seed"] = rep.seed;
  Json failures = Json::array();
  for (const auto& f : rep.failures) {
    failures.push_back({{"alpha_index", f.alpha_index}, {"fold", f.fold}, {"message", f.message}});
  }
  j["failures"] = failures;
  return j;
}

int cmd_cv(const std::string& input, const std::string& covariates, bool no_covariates,
           const FitFlags& ff, const CvFlags& cf, std::uint64_t seed, std::size_t threads,
           const std::string& output, const std::vector<std::string>& args, std::ostream& out) {
  if (output.empty()) throw ArgumentError("--output is required");
  CvConfig cv;
  cv.fit = to_fit_config(ff, gram_estimator_from_string(ff.method));
  cv.fit.validate();
  const Inputs in = load_inputs(input, covariates, no_covariates);
  cv.alphas = resolve_grid(cf.alpha_grid, in.r, in.x, cv.fit);
  if (!in.has_x && std::any_of(cv.alphas.begin(), cv.alphas.end(), [](double a) { return a > 0; })) {
    throw ArgumentError("covariates required for alpha > 0");
  }
  cv.folds = cf.folds;
  cv.seed = seed;
  cv.ipw = cf.ipw;
  cv.smoothing_span = cf.smooth_span;
  cv.threads = resolve_threads(threads);
  const CvReport rep = cross_validate_alpha(in.r, in.x, cv);

  const fs::path dir = output;
  ensure_dir(dir);
  Json report = cv_report_json(rep);
  report["config"] = fit_config_json(cv.fit);
  report["config"].erase("alpha");
  report["config"]["ipw"] = cv.ipw;
  report["config"]["smoothing_span"] = cv.smoothing_span;
  report["config"]["smoothing_degree"] = cv.smoothing_degree;
  report["config"]["smoothing_axis"] =
      cv.smoothing_axis == SmoothingAxis::kGridRank ? "grid-rank" : "alpha";
  io::write_text(dir / "cv_report.json", dump(report));

  std::string curve = "alpha,mean_mae,smoothed\n";
  for (std::size_t i = 0; i < rep.alphas.size(); ++i) {
    curve += io::format_double(rep.alphas[i]) + "," + io::format_double(rep.mean_mae[i]) + "," +
             io::format_double(rep.smoothed[i]) + "\n";
  }
  io::write_text(dir / "cv_curve.csv", curve);

  Json m = manifest_base("cv", args);
  m["config"] = report["config"];
  m["input"] = fs::absolute(in.dir).string();
  m["alphas"] = numbers(cv.alphas);
  m["folds"] = cv.folds;
  m["seed"] = cv.seed;
  m["selected_alpha"] = rep.selected_alpha;
  io::write_text(dir / "manifest.json", dump(m));

  out << "selected alpha=" << io::format_double(rep.selected_alpha) << " (index "
      << rep.selected_index << " of " << rep.alphas.size() << ")\n";
  return kOk;
}

// ------------------------------------------------------------ benchmark

struct Method {
  std::string name;
  enum class Kind { kTuned, kFixed } kind = Kind::kTuned;
  GramEstimator estimator = GramEstimator::kHeteroPca;
  double alpha = 0.0;
};

Method parse_method(const std::string& name) {
  Method m;
  m.name = name;
  if (name == "cogom") return m;
  if (name == "gom-svd" || name == "stacked") {
    m.kind = Method::Kind::kFixed;
    m.estimator = GramEstimator::kPlain;
    m.alpha = name == "stacked" ? 1.0 : 0.0;
    return m;
  }
  const std::string prefix = "cogom-alpha=";
  if (name.rfind(prefix, 0) == 0) {
    m.kind = Method::Kind::kFixed;
    m.alpha = parse_list(name.substr(prefix.size()), "method alpha").front();
    if (!(m.alpha >= 0.0)) throw ArgumentError("method alpha must be non-negative");
    return m;
  }
  throw ArgumentError("unknown benchmark method '" + name +
                      "' (expected cogom, gom-svd, stacked or cogom-alpha=<value>)");
}

const std::vector<std::string> kAllMetrics = {"mae_pi", "mae_theta", "mae_m", "two_to_inf_pi",
                                              "alpha"};

template <typename T>
T get_or(const Json& j, const char* key, T fallback) {
  return j.contains(key) ? j.at(key).get<T>() : fallback;
}

SimStudyConfig design_from_json(const Json& d) {
  SimulateFlags f;
  f.n = get_or<std::size_t>(d, "n", f.n);
  if (d.contains("j")) f.j = d.at("j").get<std::size_t>();
  if (d.contains("w")) f.w = d.at("w").get<std::size_t>();
  f.k = get_or<std::size_t>(d, "k", f.k);
  f.sigma = get_or<double>(d, "sigma", f.sigma);
  if (d.contains("beta_het")) f.beta_het = d.at("beta_het").get<double>();
  f.noise_axis = get_or<std::string>(d, "noise_axis", f.noise_axis);
  f.pure = get_or<bool>(d, "pure", false);
  f.noiseless = get_or<bool>(d, "noiseless", false);
  if (d.contains("theta_law")) {
    const Json& t = d.at("theta_law");
    f.theta_law = get_or<std::string>(t, "kind", "uniform");
    f.theta_a = get_or<double>(t, "a", 1.0);
    f.theta_b = get_or<double>(t, "b", 1.0);
  }
  if (d.contains("m_law")) {
    const Json& t = d.at("m_law");
    f.m_law = get_or<std::string>(t, "kind", "normal");
    f.m_mean = get_or<double>(t, "mean", 0.0);
    f.m_sd = get_or<double>(t, "sd", 1.0);
    f.m_bound = get_or<double>(t, "bound", 3.0);
  }
  SimStudyConfig c = to_sim_config(f, 0);
  if (d.contains("dirichlet")) c.dirichlet = d.at("dirichlet").get<std::vector<double>>();
  c.validate();
  return c;
}

struct CellResult {
  std::vector<double> values;  // one per metric
  std::vector<std::string> status;
};

int cmd_benchmark(const std::string& spec_path, std::size_t threads, const std::string& output,
                  const std::vector<std::string>& args, std::ostream& out) {
  if (spec_path.empty()) throw ArgumentError("--config is required");
  if (output.empty()) throw ArgumentError("--output is required");
  Json spec;
  try {
    spec = Json::parse(io::read_text(spec_path));
  } catch (const Json::parse_error& e) {
    throw ValidationError(spec_path + ": " + e.what());
  }

  Json resolved;
  std::vector<std::string> design_names;
  std::vector<SimStudyConfig> designs;
  std::vector<Method> methods;
  std::vector<std::uint64_t> seeds;
  std::vector<std::string> metrics = kAllMetrics;
  CvConfig cv_base;
  std::string grid_spec = "default";
  try {
    if (!spec.contains("designs") || !spec.at("designs").is_array() || spec.at("designs").empty()) {
      throw ArgumentError("benchmark spec needs a non-empty 'designs' array");
    }
    for (std::size_t i = 0; i < spec.at("designs").size(); ++i) {
      const Json& d = spec.at("designs").at(i);
      design_names.push_back(get_or<std::string>(d, "name", "design" + std::to_string(i)));
      designs.push_back(design_from_json(d));
    }
    const auto method_names = spec.contains("methods")
                                  ? spec.at("methods").get<std::vector<std::string>>()
                                  : std::vector<std::string>{"cogom", "gom-svd", "stacked"};
    if (method_names.empty()) throw ArgumentError("benchmark spec lists no methods");
    for (const auto& name : method_names) methods.push_back(parse_method(name));
    if (spec.contains("seeds")) {
      seeds = spec.at("seeds").get<std::vector<std::uint64_t>>();
    } else {
      const auto reps = get_or<std::size_t>(spec, "replicates", 1);
      const auto base = get_or<std::uint64_t>(spec, "base_seed", 0);
      for (std::size_t i = 0; i < reps; ++i) seeds.push_back(base + i);
    }
    if (seeds.empty()) throw ArgumentError("benchmark spec has no seeds");
    if (spec.contains("metrics")) {
      metrics = spec.at("metrics").get<std::vector<std::string>>();
      for (const auto& name : metrics) {
        if (std::find(kAllMetrics.begin(), kAllMetrics.end(), name) == kAllMetrics.end()) {
          throw ArgumentError("unknown metric '" + name + "'");
        }
      }
    }
    const Json cv = spec.value("cv", Json::object());
    cv_base.folds = get_or<std::size_t>(cv, "folds", 5);
    cv_base.ipw = get_or<bool>(cv, "ipw", false);
    cv_base.smoothing_span = get_or<double>(cv, "smooth_span", 0.75);
    if (cv.contains("grid")) {
      grid_spec = cv.at("grid").is_string() ? cv.at("grid").get<std::string>() : std::string();
      if (cv.at("grid").is_array()) {
        std::ostringstream ss;
        const auto g = cv.at("grid").get<std::vector<double>>();
        for (std::size_t i = 0; i < g.size(); ++i) ss << (i ? "," : "") << io::format_double(g[i]);
        grid_spec = ss.str();
      }
    }
    cv_base.fit.hetero.max_iters = get_or<std::size_t>(spec, "hetero_iters", 10);
    cv_base.fit.trunc_eps = get_or<double>(spec, "trunc_eps", 0.001);
  } catch (const Json::exception& e) {
    throw ValidationError(spec_path + ": " + e.what());
  }

  const std::size_t cells = designs.size() * methods.size() * seeds.size();
  std::vector<CellResult> results(cells);
  std::mutex sink;
  parallel_for(cells, resolve_threads(threads), [&](std::size_t cell) {
    const std::size_t s = cell % seeds.size();
    const std::size_t mi = (cell / seeds.size()) % methods.size();
    const std::size_t di = cell / (seeds.size() * methods.size());
    CellResult res;
    res.values.assign(metrics.size(), std::numeric_limits<double>::quiet_NaN());
    res.status.assign(metrics.size(), "ok");
    try {
      SimStudyConfig dc = designs[di];
      dc.seed = seeds[s];
      const SimDataset d = generate(dc);
      const Method& method = methods[mi];
      FitConfig fc = cv_base.fit;
      fc.k = dc.k;
      fc.gram_estimator = method.estimator;
      fc.require_binary = dc.sample_responses;
      if (method.kind == Method::Kind::kTuned) {
        CvConfig cv = cv_base;
        cv.fit = fc;
        cv.seed = seeds[s];
        cv.alphas = resolve_grid(grid_spec, d.r, d.x, fc);
        fc.alpha = cross_validate_alpha(d.r, d.x, cv).selected_alpha;
      } else {
        fc.alpha = method.alpha;
      }
      const GomModel model = fit(d.r, d.x, fc);
      const AlignedError a = align({model.pi, model.theta, model.m}, {d.pi, d.theta, d.m});
      for (std::size_t t = 0; t < metrics.size(); ++t) {
        const auto& name = metrics[t];
        if (name == "mae_pi") res.values[t] = a.mae_pi;
        if (name == "mae_theta") res.values[t] = a.mae_theta;
        if (name == "two_to_inf_pi") res.values[t] = a.two_to_inf_pi;
        if (name == "alpha") res.values[t] = fc.alpha;
        if (name == "mae_m") {
          if (a.mae_m) {
            res.values[t] = *a.mae_m;
          } else {
            res.status[t] = "not-applicable";
          }
        }
      }
    } catch (const std::exception& e) {
      std::string msg = e.what();
      std::replace(msg.begin(), msg.end(), ',', ';');
      std::replace(msg.begin(), msg.end(), '\n', ' ');
      std::fill(res.status.begin(), res.status.end(), "failed: " + msg);
      std::fill(res.values.begin(), res.values.end(), std::numeric_limits<double>::quiet_NaN());
    }
    const std::lock_guard<std::mutex> lock(sink);
    results[cell] = std::move(res);
  });

  const fs::path dir = output;
  ensure_dir(dir);
  std::string csv = "design,method,seed,metric,value,status\n";
  Json summary = Json::array();
  std::size_t failed_rows = 0;
  for (std::size_t di = 0; di < designs.size(); ++di) {
    for (std::size_t mi = 0; mi < methods.size(); ++mi) {
      std::vector<std::vector<double>> per_metric(metrics.size());
      std::vector<std::size_t> n_failed(metrics.size(), 0);
      for (std::size_t s = 0; s < seeds.size(); ++s) {
        const CellResult& res = results[(di * methods.size() + mi) * seeds.size() + s];
        for (std::size_t t = 0; t < metrics.size(); ++t) {
          csv += design_names[di] + "," + methods[mi].name + "," + std::to_string(seeds[s]) + "," +
                 metrics[t] + "," + io::format_double(res.values[t]) + "," + res.status[t] + "\n";
          if (res.status[t] == "ok") {
            per_metric[t].push_back(res.values[t]);
          } else if (res.status[t].rfind("failed", 0) == 0) {
            ++n_failed[t];
            ++failed_rows;
          }
        }
      }
      for (std::size_t t = 0; t < metrics.size(); ++t) {
        summary.push_back({{"design", design_names[di]},
                           {"method", methods[mi].name},
                           {"metric", metrics[t]},
                           {"median", number(median(per_metric[t]))},
                           {"n_ok", per_metric[t].size()},
                           {"n_failed", n_failed[t]}});
      }
    }
  }
  io::write_text(dir / "results.csv", csv);
  io::write_text(dir / "summary.json", dump(Json{{"medians", summary}}));

  Json m = manifest_base("benchmark", args);
  m["spec"] = spec;
  Json design_json = Json::array();
  for (std::size_t i = 0; i < designs.size(); ++i) {
    Json dj = sim_config_json(designs[i]);
    dj.erase("seed");
    dj["name"] = design_names[i];
    design_json.push_back(dj);
  }
  m["resolved"] = {{"designs", design_json},
                   {"methods", [&] {
                      Json a = Json::array();
                      for (const auto& mm : methods) a.push_back(mm.name);
                      return a;
                    }()},
                   {"seeds", seeds},
                   {"metrics", metrics},
                   {"cv",
                    {{"folds", cv_base.folds},
                     {"ipw", cv_base.ipw},
                     {"smooth_span", cv_base.smoothing_span},
                     {"grid", grid_spec}}}};
  m["rows"] = cells * metrics.size();
  m["failed_rows"] = failed_rows;
  io::write_text(dir / "manifest.json", dump(m));
  out << "ran " << cells << " cells (" << cells * metrics.size() << " rows, " << failed_rows
      << " failed) into " << dir.string() << "\n";
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Covariate-assisted spectral estimation of grade of membership models", "cogom"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  std::uint64_t seed = 0;
  std::size_t threads = 0;
  std::string input, output, covariates, config;
  bool no_covariates = false;
  std::optional<double> alpha;
  SimulateFlags sim;
  FitFlags fit_flags;
  CvFlags cv_flags;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--seed", seed, "random seed")->capture_default_str();
    cmd->add_option("--threads", threads, "worker threads (default: COGOM_THREADS or 1)");
    cmd->add_option("--output,-o", output, "output directory");
  };
  auto add_inputs = [&](CLI::App* cmd) {
    cmd->add_option("--input,-i", input, "directory holding R.csv (and X.csv), or an R file");
    cmd->add_option("--covariates", covariates, "covariate CSV (overrides X.csv)");
    cmd->add_flag("--no-covariates", no_covariates, "ignore X.csv in the input directory");
  };

  auto* simulate = app.add_subcommand("simulate", "draw a synthetic dataset with ground truth");
  add_common(simulate);
  add_simulation_flags(simulate, sim);

  auto* fit_cmd = app.add_subcommand("fit", "estimate Pi, Theta and M");
  add_common(fit_cmd);
  add_inputs(fit_cmd);
  add_fit_flags(fit_cmd, fit_flags);
  fit_cmd->add_option("--alpha", alpha, "balance parameter (default 0)");
  fit_cmd->add_option("--method", fit_flags.method, "heteropca | plain | gom-svd | stacked")
      ->check(CLI::IsMember({"heteropca", "plain", "gom-svd", "stacked"}))
      ->capture_default_str();

  auto* cv_cmd = app.add_subcommand("cv", "cross-validate the balance parameter");
  add_common(cv_cmd);
  add_inputs(cv_cmd);
  add_fit_flags(cv_cmd, fit_flags);
  cv_cmd->add_option("--method", fit_flags.method, "heteropca | plain")
      ->check(CLI::IsMember({"heteropca", "plain"}))
      ->capture_default_str();
  cv_cmd->add_option("--alpha-grid", cv_flags.alpha_grid,
                     "default | comma list | linspace:LO,HI,COUNT")
      ->capture_default_str();
  cv_cmd->add_option("--folds", cv_flags.folds)->capture_default_str();
  cv_cmd->add_flag("--ipw", cv_flags.ipw, "rescale retained entries by k/(k-1)");
  cv_cmd->add_option("--smooth-span", cv_flags.smooth_span, "loess span (0 disables)")
      ->capture_default_str();

  auto* bench = app.add_subcommand("benchmark", "run a designs x methods x seeds grid");
  bench->add_option("--config,-c", config, "benchmark spec JSON");
  bench->add_option("--threads", threads, "worker threads (default: COGOM_THREADS or 1)");
  bench->add_option("--output,-o", output, "output directory");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUserError;
  }

  try {
    if (*simulate) return cmd_simulate(sim, seed, output, args, out);
    if (*fit_cmd) {
      return cmd_fit(input, covariates, no_covariates, fit_flags, alpha, output, args, out);
    }
    if (*cv_cmd) {
      return cmd_cv(input, covariates, no_covariates, fit_flags, cv_flags, seed, threads, output,
                    args, out);
    }
    if (*bench) return cmd_benchmark(config, threads, output, args, out);
  } catch (const IoError& e) {
    err << "error: " << e.what() << "\n";
    return kIoFailure;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kNumericalFailure;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kUserError;
  }
  return kUserError;
}

}  // namespace cogom::cli
