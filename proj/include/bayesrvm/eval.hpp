#ifndef BAYESRVM_EVAL_HPP
#define BAYESRVM_EVAL_HPP

#include <array>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <limits>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "bayesrvm/algorithms.hpp"
#include "bayesrvm/data.hpp"
#include "bayesrvm/errors.hpp"
#include "bayesrvm/kernel.hpp"

namespace bayesrvm {

enum class MetricScope { global, positive };

// Fraction of agreements; global over all points, positive over the
// positive class only.
inline double compute_metrics(const Labels& y_true, const Labels& y_pred,
                              MetricScope scope) {
  if (y_true.size() != y_pred.size())
    throw input_error("compute_metrics: length mismatch");
  if (y_true.empty()) throw input_error("compute_metrics: empty labels");
  validate_labels(y_true);
  validate_labels(y_pred);
  std::size_t denom = 0, hits = 0;
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    if (scope == MetricScope::positive && y_true[i] != 1) continue;
    ++denom;
    if (y_true[i] == y_pred[i]) ++hits;
  }
  if (denom == 0)
    throw input_error("compute_metrics: positive scope undefined without positives");
  return static_cast<double>(hits) / static_cast<double>(denom);
}

constexpr std::array<const char*, 8> kMetricNames = {
    "r_g_train", "r_p_train", "r_g_test", "r_p_test",
    "r_g_stest", "r_p_stest", "r_g_ltest", "r_p_ltest"};

// The eight per-run accuracy criteria plus the sizes they were computed on.
struct MetricsReport {
  std::array<std::optional<double>, 8> values;
  std::size_t n_train = 0, n_pos_train = 0;
  std::size_t n_test = 0, n_pos_test = 0;
  std::size_t n_stest = 0, n_pos_stest = 0;
  std::size_t n_ltest = 0, n_pos_ltest = 0;
};

// One simulation scenario of the repeat protocol: the training SimSpec
// plus the sizes of the three extra test sets. The same-size test always
// mirrors the training sizes; smaller/larger default to train/3 and
// 3x train, preserving the imbalance index.
struct ScenarioSpec {
  SimSpec sim;
  std::size_t n_pos_stest = 0, n_neg_stest = 0;  // 0 = derive train/3
  std::size_t n_pos_ltest = 0, n_neg_ltest = 0;  // 0 = derive 3x train
  std::string name;

  std::size_t pos_stest() const {
    return n_pos_stest ? n_pos_stest
                       : static_cast<std::size_t>(std::llround(sim.n_pos / 3.0));
  }
  std::size_t neg_stest() const {
    return n_neg_stest ? n_neg_stest
                       : static_cast<std::size_t>(std::llround(sim.n_neg / 3.0));
  }
  std::size_t pos_ltest() const { return n_pos_ltest ? n_pos_ltest : 3 * sim.n_pos; }
  std::size_t neg_ltest() const { return n_neg_ltest ? n_neg_ltest : 3 * sim.n_neg; }

  std::string descriptor() const {
    if (!name.empty()) return name;
    char buf[96];
    std::snprintf(buf, sizeof buf, "sim(np=%zu,nn=%zu)", sim.n_pos, sim.n_neg);
    return buf;
  }
};

struct RepeatSummary {
  std::string scenario;
  AlgorithmId algorithm_id = AlgorithmId::generic;
  std::size_t repeats = 0;
  std::array<double, 8> mean{};
  std::array<double, 8> sd{};  // NaN when repeats == 1
};

namespace detail {

inline SimSpec sized(const SimSpec& base, std::size_t n_pos, std::size_t n_neg) {
  SimSpec s = base;
  s.n_pos = n_pos;
  s.n_neg = n_neg;
  return s;
}

// One repeat: fresh train / test / stest / ltest sets, one training run,
// all eight criteria.
inline MetricsReport one_repeat(const ScenarioSpec& sc, AlgorithmId id,
                                const TrainConfig& cfg, const KernelConfig& kcfg,
                                const RngStream& stream) {
  RngStream data_rng = stream.child(0);
  const Dataset train_data = simulate_gaussian(sc.sim, data_rng);
  const Dataset test = simulate_gaussian(sc.sim, data_rng);
  const Dataset stest =
      simulate_gaussian(sized(sc.sim, sc.pos_stest(), sc.neg_stest()), data_rng);
  const Dataset ltest =
      simulate_gaussian(sized(sc.sim, sc.pos_ltest(), sc.neg_ltest()), data_rng);

  const DesignMatrix phi = build_train_design(train_data.X, kcfg);
  TrainConfig run_cfg = cfg;
  run_cfg.rng = stream.child(1);
  const FitResult fit = train(id, phi, train_data.y, run_cfg);

  MetricsReport rep;
  rep.n_train = train_data.size();
  rep.n_pos_train = train_data.count(1);
  rep.n_test = test.size();
  rep.n_pos_test = test.count(1);
  rep.n_stest = stest.size();
  rep.n_pos_stest = stest.count(1);
  rep.n_ltest = ltest.size();
  rep.n_pos_ltest = ltest.count(1);

  const auto score = [&](const Dataset& d, std::size_t slot_g, std::size_t slot_p) {
    const DesignMatrix phi_d = build_test_design(d.X, train_data.X, kcfg);
    const Predictions pred = evaluate_fit(fit, phi_d, d.y);
    rep.values[slot_g] = compute_metrics(d.y, pred.labels, MetricScope::global);
    rep.values[slot_p] = compute_metrics(d.y, pred.labels, MetricScope::positive);
  };
  score(train_data, 0, 1);
  score(test, 2, 3);
  score(stest, 4, 5);
  score(ltest, 6, 7);
  return rep;
}

}  // namespace detail

// The repeat protocol: every repeat redraws all four datasets and trains
// from scratch on its own child stream, so results do not depend on the
// execution order; repeats may fan out over threads. A failing repeat
// aborts the whole summary with its index attached.
inline RepeatSummary run_repeats(const ScenarioSpec& scenario,
                                 AlgorithmId algorithm_id, const TrainConfig& cfg,
                                 const KernelConfig& kcfg, std::size_t repeats,
                                 const RngStream& rng, unsigned threads = 0) {
  if (repeats < 1) throw config_error("run_repeats: need at least one repeat");
  cfg.validate();

  std::vector<MetricsReport> reports(repeats);
  std::vector<std::exception_ptr> failures(repeats);
  if (threads == 0) threads = std::thread::hardware_concurrency();
  threads = std::max(1u, std::min<unsigned>(threads, repeats));

  std::atomic<std::size_t> next{0};
  const auto worker = [&]() {
    for (;;) {
      const std::size_t r = next.fetch_add(1);
      if (r >= repeats) return;
      try {
        reports[r] = detail::one_repeat(scenario, algorithm_id, cfg, kcfg,
                                        rng.child(r));
      } catch (...) {
        failures[r] = std::current_exception();
      }
    }
  };
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned i = 0; i < threads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  for (std::size_t r = 0; r < repeats; ++r) {
    if (!failures[r]) continue;
    try {
      std::rethrow_exception(failures[r]);
    } catch (const std::runtime_error& e) {
      throw numerical_error("run_repeats: repeat " + std::to_string(r + 1) +
                            " failed: " + e.what());
    }
  }

  RepeatSummary out;
  out.scenario = scenario.descriptor();
  out.algorithm_id = algorithm_id;
  out.repeats = repeats;
  for (std::size_t m = 0; m < 8; ++m) {
    double sum = 0.0;
    for (const auto& rep : reports) sum += rep.values[m].value();
    const double mean = sum / static_cast<double>(repeats);
    out.mean[m] = mean;
    if (repeats == 1) {
      out.sd[m] = std::numeric_limits<double>::quiet_NaN();
    } else {
      double ss = 0.0;
      for (const auto& rep : reports) {
        const double d = rep.values[m].value() - mean;
        ss += d * d;
      }
      out.sd[m] = std::sqrt(ss / static_cast<double>(repeats - 1));
    }
  }
  return out;
}

// Four-decimal cell formatting. Values are rendered at 9 decimals first so
// a number sitting a binary hair under a .xxxx5 boundary still rounds up,
// the way a human reads such values.
inline std::string format_fixed4(double v) {
  if (!std::isfinite(v)) return "n/a";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9f", v);
  std::string s(buf);
  const std::size_t cut = s.find('.') + 5;
  const bool round_up = s[cut] >= '5';
  s.erase(cut);
  if (round_up) {
    bool carry = true;
    for (std::size_t i = cut; carry && i-- > 0;) {
      if (s[i] == '.') continue;
      if (s[i] == '-') break;
      if (s[i] != '9') {
        ++s[i];
        carry = false;
      } else {
        s[i] = '0';
      }
    }
    if (carry) s.insert(s[0] == '-' ? 1 : 0, "1");
  }
  return s;
}

struct TableRendering {
  std::string csv;
  std::string text;
};

// Renders a list of repeat summaries as both a flat CSV
// (scenario,algorithm,metric,mean,sd,R) and an aligned text table with
// "mean (sd)" cells.
inline TableRendering summarize_table(const std::vector<RepeatSummary>& rows) {
  TableRendering out;
  out.csv = "scenario,algorithm,metric,mean,sd,R\n";
  for (const auto& row : rows) {
    for (std::size_t m = 0; m < 8; ++m) {
      out.csv += row.scenario;
      out.csv += ',';
      out.csv += algorithm_name(row.algorithm_id);
      out.csv += ',';
      out.csv += kMetricNames[m];
      out.csv += ',';
      out.csv += format_fixed4(row.mean[m]);
      out.csv += ',';
      out.csv += std::isnan(row.sd[m]) ? "" : format_fixed4(row.sd[m]);
      out.csv += ',';
      out.csv += std::to_string(row.repeats);
      out.csv += '\n';
    }
  }

  std::vector<std::vector<std::string>> cells;
  std::vector<std::string> header{"scenario", "algorithm"};
  for (const char* name : kMetricNames) header.push_back(name);
  cells.push_back(header);
  for (const auto& row : rows) {
    std::vector<std::string> line{row.scenario, algorithm_name(row.algorithm_id)};
    for (std::size_t m = 0; m < 8; ++m) {
      std::string cell = format_fixed4(row.mean[m]);
      cell += " (";
      cell += std::isnan(row.sd[m]) ? "n/a" : format_fixed4(row.sd[m]);
      cell += ")";
      line.push_back(cell);
    }
    cells.push_back(line);
  }
  std::vector<std::size_t> width(cells.front().size(), 0);
  for (const auto& line : cells)
    for (std::size_t c = 0; c < line.size(); ++c)
      width[c] = std::max(width[c], line[c].size());
  for (const auto& line : cells) {
    for (std::size_t c = 0; c < line.size(); ++c) {
      out.text += line[c];
      if (c + 1 < line.size())
        out.text += std::string(width[c] - line[c].size() + 2, ' ');
    }
    out.text += '\n';
  }
  return out;
}

}  // namespace bayesrvm

#endif  // BAYESRVM_EVAL_HPP
