#ifndef BAYESRVM_CLI_HPP
#define BAYESRVM_CLI_HPP

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "bayesrvm/algorithms.hpp"
#include "bayesrvm/data.hpp"
#include "bayesrvm/errors.hpp"
#include "bayesrvm/eval.hpp"
#include "bayesrvm/kernel.hpp"
#include "bayesrvm/model.hpp"

namespace bayesrvm {

constexpr const char* kFormatVersion = "1";

// Flat configuration for one CLI invocation. Every field has a default
// except the dataset paths of real-data runs; the whole struct round-trips
// through the key=value manifest format.
struct RunConfig {
  std::string subcommand;
  std::uint64_t seed = 1;
  std::string out_dir = ".";

  // data source / CSV schema
  std::string dataset_path;
  std::string test_path;
  std::string model_path;
  int label_column = -1;
  std::string positive_label = "1";
  std::string delimiter = ",";
  bool header = false;
  bool standardize = false;

  // simulation scenario
  SimSpec sim;

  // training
  std::string algorithm = "generic";
  std::size_t iterations = 5000;
  std::size_t burn_in = 500;
  double a = 1.0;
  double b = 1.0 / 999.0;
  double c = 1.0;
  double d = 1.0 / 999.0;
  std::string gamma_mode = "median";  // median | fixed
  double gamma = 1.0;
  std::size_t thin = 1;

  // experiment protocol
  std::string algorithms = "generic,hierarchical";
  std::size_t repeats = 20;
  std::string scenarios = "30:30,15:30,12:30,6:30,3:30";  // np:nn pairs
  unsigned threads = 0;

  KernelConfig kernel_config() const {
    KernelConfig k;
    if (gamma_mode == "median") {
      k.bandwidth_mode = BandwidthMode::median_heuristic;
    } else if (gamma_mode == "fixed") {
      k.bandwidth_mode = BandwidthMode::fixed;
      k.gamma = gamma;
    } else {
      throw config_error("gamma_mode must be 'median' or 'fixed'");
    }
    return k;
  }

  CsvSchema csv_schema() const {
    if (delimiter.size() != 1)
      throw config_error("delimiter must be a single character");
    return CsvSchema{label_column, positive_label, delimiter[0], header};
  }

  TrainConfig train_config() const {
    TrainConfig t;
    t.iterations = iterations;
    t.burn_in = burn_in;
    t.generic = GenericHyper{a, b};
    t.hier_init.c = c;
    t.hier_init.d = d;
    t.thin = thin;
    t.rng = RngStream(seed);
    return t;
  }
};

namespace detail {

inline std::string fmt_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline double parse_double(const std::string& s, const std::string& key) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw config_error("cannot parse number '" + s + "' for key " + key);
  }
}

inline std::uint64_t parse_u64(const std::string& s, const std::string& key) {
  try {
    std::size_t pos = 0;
    const unsigned long long v = std::stoull(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw config_error("cannot parse integer '" + s + "' for key " + key);
  }
}

inline bool parse_bool(const std::string& s, const std::string& key) {
  if (s == "true" || s == "1") return true;
  if (s == "false" || s == "0") return false;
  throw config_error("cannot parse boolean '" + s + "' for key " + key);
}

inline std::vector<double> parse_list(const std::string& s, const std::string& key,
                                      std::size_t expect) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) out.push_back(parse_double(tok, key));
  if (out.size() != expect)
    throw config_error("key " + key + " expects " + std::to_string(expect) +
                       " comma-separated values");
  return out;
}

inline std::string join_list(std::initializer_list<double> vals) {
  std::string s;
  for (double v : vals) {
    if (!s.empty()) s += ',';
    s += fmt_g17(v);
  }
  return s;
}

// Whole-file atomic write: temp file in the same directory, then rename.
inline void write_file_atomic(const std::filesystem::path& path,
                              const std::string& content) {
  std::error_code ec;
  std::filesystem::create_directories(path.parent_path(), ec);
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw io_error("cannot write '" + tmp.string() + "'");
    out << content;
    if (!out.flush()) throw io_error("write failed for '" + tmp.string() + "'");
  }
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw io_error("cannot rename into '" + path.string() + "'");
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("cannot open '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace detail

// key=value serialization of a RunConfig. out_dir is deliberately not part
// of the manifest; the run is defined by its parameters, not its location.
inline std::string serialize_config(const RunConfig& cfg) {
  std::string s;
  const auto put = [&s](const std::string& k, const std::string& v) {
    s += k;
    s += '=';
    s += v;
    s += '\n';
  };
  put("format_version", kFormatVersion);
  put("subcommand", cfg.subcommand);
  put("seed", std::to_string(cfg.seed));
  put("dataset", cfg.dataset_path);
  put("test", cfg.test_path);
  put("model", cfg.model_path);
  put("label_column", std::to_string(cfg.label_column));
  put("positive_label", cfg.positive_label);
  put("delimiter", cfg.delimiter);
  put("header", cfg.header ? "true" : "false");
  put("standardize", cfg.standardize ? "true" : "false");
  put("n_pos", std::to_string(cfg.sim.n_pos));
  put("n_neg", std::to_string(cfg.sim.n_neg));
  put("mu_neg", detail::join_list({cfg.sim.mu_neg[0], cfg.sim.mu_neg[1]}));
  put("mu_pos", detail::join_list({cfg.sim.mu_pos[0], cfg.sim.mu_pos[1]}));
  put("sigma_neg", detail::join_list({cfg.sim.sigma_neg(0, 0), cfg.sim.sigma_neg(0, 1),
                                      cfg.sim.sigma_neg(1, 0), cfg.sim.sigma_neg(1, 1)}));
  put("sigma_pos", detail::join_list({cfg.sim.sigma_pos(0, 0), cfg.sim.sigma_pos(0, 1),
                                      cfg.sim.sigma_pos(1, 0), cfg.sim.sigma_pos(1, 1)}));
  put("algorithm", cfg.algorithm);
  put("iterations", std::to_string(cfg.iterations));
  put("burn_in", std::to_string(cfg.burn_in));
  put("a", detail::fmt_g17(cfg.a));
  put("b", detail::fmt_g17(cfg.b));
  put("c", detail::fmt_g17(cfg.c));
  put("d", detail::fmt_g17(cfg.d));
  put("gamma_mode", cfg.gamma_mode);
  put("gamma", detail::fmt_g17(cfg.gamma));
  put("thin", std::to_string(cfg.thin));
  put("algorithms", cfg.algorithms);
  put("repeats", std::to_string(cfg.repeats));
  put("scenarios", cfg.scenarios);
  put("threads", std::to_string(cfg.threads));
  return s;
}

// Applies one key=value pair. Keys prefixed result_ are run outputs echoed
// into manifests and are skipped on reload.
inline void apply_config_pair(RunConfig& cfg, const std::string& key,
                              const std::string& value) {
  using detail::parse_bool;
  using detail::parse_double;
  using detail::parse_list;
  using detail::parse_u64;
  if (key.rfind("result_", 0) == 0) return;
  if (key == "format_version") {
    if (value != kFormatVersion)
      throw config_error("unsupported config format_version " + value);
  } else if (key == "subcommand") {
    cfg.subcommand = value;
  } else if (key == "seed") {
    cfg.seed = parse_u64(value, key);
  } else if (key == "out_dir") {
    cfg.out_dir = value;
  } else if (key == "dataset") {
    cfg.dataset_path = value;
  } else if (key == "test") {
    cfg.test_path = value;
  } else if (key == "model") {
    cfg.model_path = value;
  } else if (key == "label_column") {
    cfg.label_column = static_cast<int>(parse_double(value, key));
  } else if (key == "positive_label") {
    cfg.positive_label = value;
  } else if (key == "delimiter") {
    cfg.delimiter = value;
  } else if (key == "header") {
    cfg.header = parse_bool(value, key);
  } else if (key == "standardize") {
    cfg.standardize = parse_bool(value, key);
  } else if (key == "n_pos") {
    cfg.sim.n_pos = parse_u64(value, key);
  } else if (key == "n_neg") {
    cfg.sim.n_neg = parse_u64(value, key);
  } else if (key == "mu_neg") {
    const auto v = parse_list(value, key, 2);
    cfg.sim.mu_neg << v[0], v[1];
  } else if (key == "mu_pos") {
    const auto v = parse_list(value, key, 2);
    cfg.sim.mu_pos << v[0], v[1];
  } else if (key == "sigma_neg") {
    const auto v = parse_list(value, key, 4);
    cfg.sim.sigma_neg << v[0], v[1], v[2], v[3];
  } else if (key == "sigma_pos") {
    const auto v = parse_list(value, key, 4);
    cfg.sim.sigma_pos << v[0], v[1], v[2], v[3];
  } else if (key == "algorithm") {
    cfg.algorithm = value;
  } else if (key == "iterations") {
    cfg.iterations = parse_u64(value, key);
  } else if (key == "burn_in") {
    cfg.burn_in = parse_u64(value, key);
  } else if (key == "a") {
    cfg.a = parse_double(value, key);
  } else if (key == "b") {
    cfg.b = parse_double(value, key);
  } else if (key == "c") {
    cfg.c = parse_double(value, key);
  } else if (key == "d") {
    cfg.d = parse_double(value, key);
  } else if (key == "gamma_mode") {
    cfg.gamma_mode = value;
  } else if (key == "gamma") {
    cfg.gamma = parse_double(value, key);
  } else if (key == "thin") {
    cfg.thin = parse_u64(value, key);
  } else if (key == "algorithms") {
    cfg.algorithms = value;
  } else if (key == "repeats") {
    cfg.repeats = parse_u64(value, key);
  } else if (key == "scenarios") {
    cfg.scenarios = value;
  } else if (key == "threads") {
    cfg.threads = static_cast<unsigned>(parse_u64(value, key));
  } else {
    throw config_error("unknown config key '" + key + "'");
  }
}

inline void load_config_file(RunConfig& cfg, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open config '" + path + "'");
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw config_error("config '" + path + "' line " + std::to_string(line_no) +
                         ": expected key=value");
    apply_config_pair(cfg, line.substr(0, eq), line.substr(eq + 1));
  }
}

// ---------------------------------------------------------------------
// dataset / model / trace serialization
// ---------------------------------------------------------------------

inline std::string dataset_to_csv(const Dataset& d) {
  std::string s;
  for (Eigen::Index i = 0; i < d.X.rows(); ++i) {
    for (Eigen::Index j = 0; j < d.X.cols(); ++j) {
      s += detail::fmt_g17(d.X(i, j));
      s += ',';
    }
    s += std::to_string(d.y[static_cast<std::size_t>(i)]);
    s += '\n';
  }
  return s;
}

// Self-contained fitted model: prediction needs the kernel bandwidth and
// the training points, so both live in the file next to w_hat.
struct ModelFile {
  std::string algorithm = "generic";
  double gamma = 1.0;
  Eigen::VectorXd w_hat;
  Eigen::MatrixXd X_train;
  bool standardized = false;
  Eigen::VectorXd feat_mean, feat_sd;
};

inline std::string serialize_model(const ModelFile& m) {
  std::string s = "bayesrvm-model v" + std::string(kFormatVersion) + "\n";
  s += "algorithm=" + m.algorithm + "\n";
  s += "gamma=" + detail::fmt_g17(m.gamma) + "\n";
  s += "n_train=" + std::to_string(m.X_train.rows()) + "\n";
  s += "feature_dim=" + std::to_string(m.X_train.cols()) + "\n";
  s += "standardized=" + std::string(m.standardized ? "true" : "false") + "\n";
  if (m.standardized) {
    s += "[feature_scaling]\n";
    for (Eigen::Index j = 0; j < m.feat_mean.size(); ++j)
      s += detail::fmt_g17(m.feat_mean[j]) + "," + detail::fmt_g17(m.feat_sd[j]) + "\n";
  }
  s += "[w_hat]\n";
  for (Eigen::Index i = 0; i < m.w_hat.size(); ++i)
    s += detail::fmt_g17(m.w_hat[i]) + "\n";
  s += "[train_features]\n";
  for (Eigen::Index i = 0; i < m.X_train.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.X_train.cols(); ++j) {
      if (j) s += ',';
      s += detail::fmt_g17(m.X_train(i, j));
    }
    s += '\n';
  }
  return s;
}

inline ModelFile load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open model '" + path + "'");
  std::string line;
  if (!std::getline(in, line) ||
      line != "bayesrvm-model v" + std::string(kFormatVersion))
    throw input_error("model '" + path + "': bad header");
  ModelFile m;
  Eigen::Index n = 0, dim = 0;
  std::string section;
  std::vector<double> w;
  std::vector<std::pair<double, double>> scaling;
  std::vector<std::vector<double>> feats;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '[') {
      section = line;
      continue;
    }
    if (section.empty()) {
      const std::size_t eq = line.find('=');
      if (eq == std::string::npos)
        throw input_error("model '" + path + "': expected key=value, got " + line);
      const std::string key = line.substr(0, eq), value = line.substr(eq + 1);
      if (key == "algorithm")
        m.algorithm = value;
      else if (key == "gamma")
        m.gamma = detail::parse_double(value, key);
      else if (key == "n_train")
        n = static_cast<Eigen::Index>(detail::parse_u64(value, key));
      else if (key == "feature_dim")
        dim = static_cast<Eigen::Index>(detail::parse_u64(value, key));
      else if (key == "standardized")
        m.standardized = detail::parse_bool(value, key);
      else
        throw input_error("model '" + path + "': unknown key " + key);
    } else if (section == "[feature_scaling]") {
      const auto v = detail::parse_list(line, "feature_scaling", 2);
      scaling.emplace_back(v[0], v[1]);
    } else if (section == "[w_hat]") {
      w.push_back(detail::parse_double(line, "w_hat"));
    } else if (section == "[train_features]") {
      std::vector<double> row;
      std::stringstream ss(line);
      std::string tok;
      while (std::getline(ss, tok, ','))
        row.push_back(detail::parse_double(tok, "train_features"));
      feats.push_back(std::move(row));
    } else {
      throw input_error("model '" + path + "': unknown section " + section);
    }
  }
  if (static_cast<Eigen::Index>(feats.size()) != n ||
      static_cast<Eigen::Index>(w.size()) != n + 1)
    throw input_error("model '" + path + "': inconsistent block sizes");
  m.w_hat = Eigen::Map<Eigen::VectorXd>(w.data(), static_cast<Eigen::Index>(w.size()));
  m.X_train.resize(n, dim);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (static_cast<Eigen::Index>(feats[static_cast<std::size_t>(i)].size()) != dim)
      throw input_error("model '" + path + "': feature row arity mismatch");
    for (Eigen::Index j = 0; j < dim; ++j)
      m.X_train(i, j) = feats[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  }
  if (m.standardized) {
    if (static_cast<Eigen::Index>(scaling.size()) != dim)
      throw input_error("model '" + path + "': scaling block size mismatch");
    m.feat_mean.resize(dim);
    m.feat_sd.resize(dim);
    for (Eigen::Index j = 0; j < dim; ++j) {
      m.feat_mean[j] = scaling[static_cast<std::size_t>(j)].first;
      m.feat_sd[j] = scaling[static_cast<std::size_t>(j)].second;
    }
  }
  return m;
}

inline std::string trace_to_csv(const GibbsTrace& trace) {
  const Eigen::Index p = trace.w_history.cols();
  const bool hyper = trace.hyper_history.rows() > 0;
  std::string s;
  for (Eigen::Index k = 0; k < p; ++k) s += "w" + std::to_string(k) + ",";
  for (Eigen::Index k = 0; k < p; ++k) s += "eta" + std::to_string(k) + ",";
  if (hyper) {
    s += "rho,mu,tau2\n";
  } else {
    s.back() = '\n';
  }
  for (Eigen::Index r = 0; r < trace.w_history.rows(); ++r) {
    for (Eigen::Index k = 0; k < p; ++k)
      s += detail::fmt_g17(trace.w_history(r, k)) + ",";
    for (Eigen::Index k = 0; k < p; ++k)
      s += detail::fmt_g17(trace.eta_history(r, k)) + ",";
    if (hyper) {
      s += detail::fmt_g17(trace.hyper_history(r, 0)) + "," +
           detail::fmt_g17(trace.hyper_history(r, 1)) + "," +
           detail::fmt_g17(trace.hyper_history(r, 2)) + "\n";
    } else {
      s.back() = '\n';
    }
  }
  return s;
}

// ---------------------------------------------------------------------
// subcommands
// ---------------------------------------------------------------------

namespace detail {

inline void standardize_columns(Eigen::MatrixXd& X, Eigen::VectorXd& mean,
                                Eigen::VectorXd& sd) {
  mean = X.colwise().mean();
  sd.resize(X.cols());
  for (Eigen::Index j = 0; j < X.cols(); ++j) {
    const double var =
        (X.col(j).array() - mean[j]).square().sum() / std::max<double>(1, X.rows() - 1);
    sd[j] = var > 0.0 ? std::sqrt(var) : 1.0;
    X.col(j) = (X.col(j).array() - mean[j]) / sd[j];
  }
}

inline Dataset load_dataset(const RunConfig& cfg, const std::string& path) {
  Dataset d = load_csv(path, cfg.csv_schema());
  d.validate();
  return d;
}

inline std::string manifest_with_results(
    const RunConfig& cfg,
    const std::vector<std::pair<std::string, std::string>>& results) {
  std::string s = serialize_config(cfg);
  for (const auto& [k, v] : results) s += "result_" + k + "=" + v + "\n";
  return s;
}

}  // namespace detail

// simulate: draw one train set and one same-sized test set from the
// scenario and write them as CSVs plus a manifest.
inline void cmd_simulate(const RunConfig& cfg) {
  RngStream rng(cfg.seed);
  const Dataset train = simulate_gaussian(cfg.sim, rng);
  const Dataset test = simulate_gaussian(cfg.sim, rng);
  const std::filesystem::path dir(cfg.out_dir);
  detail::write_file_atomic(dir / "train.csv", dataset_to_csv(train));
  detail::write_file_atomic(dir / "test.csv", dataset_to_csv(test));
  std::vector<std::pair<std::string, std::string>> results;
  results.emplace_back("b", detail::fmt_g17(imbalance_index(train)));
  detail::write_file_atomic(dir / "manifest.txt",
                            detail::manifest_with_results(cfg, results));
}

// train: fit the selected algorithm on a CSV dataset; writes the
// self-contained model file, the full parameter trace, and a manifest
// echoing the training accuracy.
inline void cmd_train(const RunConfig& cfg) {
  if (cfg.dataset_path.empty())
    throw config_error("train: --dataset is required");
  Dataset train_data = detail::load_dataset(cfg, cfg.dataset_path);

  ModelFile model;
  model.standardized = cfg.standardize;
  if (cfg.standardize)
    detail::standardize_columns(train_data.X, model.feat_mean, model.feat_sd);

  const KernelConfig kcfg = cfg.kernel_config();
  model.gamma = resolve_gamma(train_data.X, kcfg);
  model.algorithm = cfg.algorithm;
  model.X_train = train_data.X;

  const KernelConfig fixed{model.gamma, BandwidthMode::fixed};
  const DesignMatrix phi = build_train_design(train_data.X, fixed);
  const FitResult fit = train(parse_algorithm(cfg.algorithm), phi, train_data.y,
                              cfg.train_config());
  model.w_hat = fit.w_hat.w;

  const Predictions pred = predict(fit.w_hat, phi);
  const double train_acc =
      compute_metrics(train_data.y, pred.labels, MetricScope::global);

  const std::filesystem::path dir(cfg.out_dir);
  detail::write_file_atomic(dir / "model.txt", serialize_model(model));
  detail::write_file_atomic(dir / "trace.csv", trace_to_csv(fit.trace));
  std::vector<std::pair<std::string, std::string>> results;
  results.emplace_back("train_accuracy", detail::fmt_g17(train_acc));
  results.emplace_back("clamp_events", std::to_string(fit.trace.clamp_events));
  results.emplace_back("ridge_repairs", std::to_string(fit.trace.ridge_repairs));
  detail::write_file_atomic(dir / "manifest.txt",
                            detail::manifest_with_results(cfg, results));
}

// evaluate: score a saved model on a test CSV; writes per-point
// predictions and a metrics report.
inline void cmd_evaluate(const RunConfig& cfg) {
  if (cfg.model_path.empty() || cfg.test_path.empty())
    throw config_error("evaluate: --model and --test are required");
  const ModelFile model = load_model(cfg.model_path);
  Dataset test = detail::load_dataset(cfg, cfg.test_path);
  if (test.X.cols() != model.X_train.cols())
    throw input_error("evaluate: test feature dimension " +
                      std::to_string(test.X.cols()) + " does not match model (" +
                      std::to_string(model.X_train.cols()) + ")");
  if (model.standardized)
    for (Eigen::Index j = 0; j < test.X.cols(); ++j)
      test.X.col(j) = (test.X.col(j).array() - model.feat_mean[j]) / model.feat_sd[j];

  const KernelConfig fixed{model.gamma, BandwidthMode::fixed};
  const DesignMatrix phi_test = build_test_design(test.X, model.X_train, fixed);
  const Predictions pred = predict(WeightState{model.w_hat}, phi_test);

  std::string pred_csv = "index,probability,label\n";
  for (Eigen::Index i = 0; i < phi_test.rows(); ++i)
    pred_csv += std::to_string(i) + "," + detail::fmt_g17(pred.probabilities[i]) +
                "," + std::to_string(pred.labels[static_cast<std::size_t>(i)]) + "\n";

  std::string metrics_csv = "metric,value,n,n_pos\n";
  const double rg = compute_metrics(test.y, pred.labels, MetricScope::global);
  const std::size_t npos = test.count(1);
  metrics_csv += "r_g_test," + format_fixed4(rg) + "," + std::to_string(test.size()) +
                 "," + std::to_string(npos) + "\n";
  metrics_csv += "r_p_test,";
  metrics_csv += npos ? format_fixed4(compute_metrics(test.y, pred.labels,
                                                      MetricScope::positive))
                      : "";
  metrics_csv += "," + std::to_string(test.size()) + "," + std::to_string(npos) + "\n";

  const std::filesystem::path dir(cfg.out_dir);
  detail::write_file_atomic(dir / "predictions.csv", pred_csv);
  detail::write_file_atomic(dir / "metrics.csv", metrics_csv);
  detail::write_file_atomic(dir / "manifest.txt",
                            detail::manifest_with_results(cfg, {}));
}

// experiment: the repeated-simulation protocol over a scenario list and an
// algorithm list; writes the summary table as CSV and aligned text.
inline void cmd_experiment(const RunConfig& cfg) {
  if (cfg.repeats == 0) throw config_error("experiment: repeats must be >= 1");
  std::vector<ScenarioSpec> scenarios;
  {
    std::stringstream ss(cfg.scenarios);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      const std::size_t colon = tok.find(':');
      if (colon == std::string::npos)
        throw config_error("experiment: scenario '" + tok + "' is not np:nn");
      ScenarioSpec sc;
      sc.sim = cfg.sim;
      sc.sim.n_pos = detail::parse_u64(tok.substr(0, colon), "scenarios");
      sc.sim.n_neg = detail::parse_u64(tok.substr(colon + 1), "scenarios");
      char buf[64];
      std::snprintf(buf, sizeof buf, "b=%g",
                    static_cast<double>(sc.sim.n_neg) /
                        static_cast<double>(sc.sim.n_pos));
      sc.name = std::string(buf) + "(np=" + std::to_string(sc.sim.n_pos) +
                ",nn=" + std::to_string(sc.sim.n_neg) + ")";
      scenarios.push_back(sc);
    }
  }
  if (scenarios.empty()) throw config_error("experiment: no scenarios given");

  std::vector<AlgorithmId> algos;
  {
    std::stringstream ss(cfg.algorithms);
    std::string tok;
    while (std::getline(ss, tok, ',')) algos.push_back(parse_algorithm(tok));
  }
  if (algos.empty()) throw config_error("experiment: no algorithms given");

  const KernelConfig kcfg = cfg.kernel_config();
  const TrainConfig tcfg = cfg.train_config();
  RngStream rng(cfg.seed);
  std::vector<RepeatSummary> rows;
  std::uint64_t pair_id = 0;
  for (const auto& sc : scenarios)
    for (const auto id : algos)
      rows.push_back(run_repeats(sc, id, tcfg, kcfg, cfg.repeats,
                                 rng.child(pair_id++), cfg.threads));

  const TableRendering table = summarize_table(rows);
  const std::filesystem::path dir(cfg.out_dir);
  detail::write_file_atomic(dir / "summary.csv", table.csv);
  detail::write_file_atomic(dir / "summary.txt", table.text);
  detail::write_file_atomic(dir / "manifest.txt",
                            detail::manifest_with_results(cfg, {}));
}

inline void run_subcommand(const RunConfig& cfg) {
  if (cfg.subcommand == "simulate")
    cmd_simulate(cfg);
  else if (cfg.subcommand == "train")
    cmd_train(cfg);
  else if (cfg.subcommand == "evaluate")
    cmd_evaluate(cfg);
  else if (cfg.subcommand == "experiment")
    cmd_experiment(cfg);
  else
    throw config_error("unknown subcommand '" + cfg.subcommand + "'");
}

}  // namespace bayesrvm

#endif  // BAYESRVM_CLI_HPP
