#ifndef BAYESRVM_DATA_HPP
#define BAYESRVM_DATA_HPP

#include <Eigen/Dense>
#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "bayesrvm/errors.hpp"
#include "bayesrvm/model.hpp"
#include "bayesrvm/rng.hpp"
#include "bayesrvm/samplers.hpp"

namespace bayesrvm {

struct Dataset {
  Eigen::MatrixXd X;  // one row per point
  Labels y;
  std::string name;

  std::size_t size() const { return y.size(); }
  std::size_t count(int label) const {
    return static_cast<std::size_t>(std::count(y.begin(), y.end(), label));
  }
  // Degenerate sets (one class only) are allowed but callers should check.
  bool single_class() const { return count(1) == 0 || count(-1) == 0; }

  void validate() const {
    if (y.empty() || X.rows() != static_cast<Eigen::Index>(y.size()))
      throw input_error("Dataset: feature rows must match label count (>=1)");
    if (!X.allFinite()) throw input_error("Dataset: non-finite feature value");
    validate_labels(y);
  }
};

// Two-Gaussian simulation scenario; the defaults give well-separated
// 2-D classes with unequal spreads.
struct SimSpec {
  Eigen::Vector2d mu_neg{7.0, 8.0};
  Eigen::Vector2d mu_pos{13.0, 15.0};
  Eigen::Matrix2d sigma_neg{{10.0, 3.0}, {3.0, 8.0}};
  Eigen::Matrix2d sigma_pos{{1.0, 0.0}, {0.0, 2.0}};
  std::size_t n_pos = 3;
  std::size_t n_neg = 30;

  void validate() const {
    if (n_pos == 0 && n_neg == 0)
      throw input_error("SimSpec: need at least one point");
    for (const auto* s : {&sigma_neg, &sigma_pos}) {
      if ((*s - s->transpose()).cwiseAbs().maxCoeff() > 1e-12)
        throw input_error("SimSpec: covariance not symmetric");
      Eigen::LLT<Eigen::Matrix2d> llt(*s);
      if (llt.info() != Eigen::Success)
        throw input_error("SimSpec: covariance not positive definite");
    }
  }
};

struct SplitSpec {
  double train_fraction = 0.5;
  bool stratified = true;
  RngStream rng{0};
};

// Draws n_neg points from N(mu_neg, sigma_neg) labeled -1 followed by
// n_pos points from N(mu_pos, sigma_pos) labeled +1.
inline Dataset simulate_gaussian(const SimSpec& spec, RngStream& rng) {
  spec.validate();
  Dataset d;
  d.name = "sim";
  d.X.resize(spec.n_neg + spec.n_pos, 2);
  d.y.reserve(spec.n_neg + spec.n_pos);
  Eigen::Index r = 0;
  for (std::size_t i = 0; i < spec.n_neg; ++i, ++r) {
    d.X.row(r) = mvn_sample(spec.mu_neg, spec.sigma_neg, rng);
    d.y.push_back(-1);
  }
  for (std::size_t i = 0; i < spec.n_pos; ++i, ++r) {
    d.X.row(r) = mvn_sample(spec.mu_pos, spec.sigma_pos, rng);
    d.y.push_back(1);
  }
  return d;
}

// b = N_n / N_p; undefined without positive examples.
inline double imbalance_index(const Dataset& d) {
  const std::size_t np = d.count(1);
  if (np == 0)
    throw input_error("imbalance_index: undefined (no positive examples)");
  return static_cast<double>(d.count(-1)) / static_cast<double>(np);
}

struct CsvSchema {
  int label_column = -1;  // -1 = last column
  std::string positive_label = "1";
  char delimiter = ',';
  bool header = false;
};

namespace detail {

inline std::vector<std::string> split_line(const std::string& line, char delim) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == delim) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

inline double parse_feature(const std::string& tok, std::size_t line_no) {
  const char* b = tok.data();
  const char* e = b + tok.size();
  while (b < e && (*b == ' ' || *b == '\t')) ++b;
  while (e > b && (*(e - 1) == ' ' || *(e - 1) == '\t')) --e;
  double v = 0.0;
  const auto res = std::from_chars(b, e, v);
  if (res.ec != std::errc() || res.ptr != e || !std::isfinite(v))
    throw input_error("load_csv: non-numeric feature '" + tok + "' on line " +
                      std::to_string(line_no));
  return v;
}

inline std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r");
  std::size_t e = s.find_last_not_of(" \t\r");
  return b == std::string::npos ? "" : s.substr(b, e - b + 1);
}

}  // namespace detail

// Reads a delimited numeric file with one label column; the declared
// positive token maps to +1, every other label value to -1. Row order is
// preserved.
inline Dataset load_csv(const std::string& path, const CsvSchema& schema = {}) {
  std::ifstream in(path);
  if (!in) throw io_error("load_csv: cannot open '" + path + "'");

  std::vector<std::vector<double>> rows;
  Labels labels;
  std::string line;
  std::size_t line_no = 0;
  std::size_t arity = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (schema.header && line_no == 1) continue;
    if (line.empty()) continue;
    auto toks = detail::split_line(line, schema.delimiter);
    if (arity == 0) {
      arity = toks.size();
      if (arity < 2)
        throw input_error("load_csv: need at least one feature and a label, line " +
                          std::to_string(line_no));
    } else if (toks.size() != arity) {
      throw input_error("load_csv: ragged row (" + std::to_string(toks.size()) +
                        " fields, expected " + std::to_string(arity) +
                        ") on line " + std::to_string(line_no));
    }
    const std::size_t lcol =
        schema.label_column < 0 ? arity - 1 : static_cast<std::size_t>(schema.label_column);
    if (lcol >= arity)
      throw input_error("load_csv: label column " + std::to_string(lcol) +
                        " out of range on line " + std::to_string(line_no));
    std::vector<double> feat;
    feat.reserve(arity - 1);
    for (std::size_t j = 0; j < arity; ++j) {
      if (j == lcol) continue;
      feat.push_back(detail::parse_feature(toks[j], line_no));
    }
    labels.push_back(detail::trim(toks[lcol]) == schema.positive_label ? 1 : -1);
    rows.push_back(std::move(feat));
  }
  if (rows.empty()) throw input_error("load_csv: no data rows in '" + path + "'");

  Dataset d;
  d.name = path;
  d.y = std::move(labels);
  d.X.resize(rows.size(), rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j)
      d.X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  return d;
}

namespace detail {

// round-half-up on the train side; fixed so splits are reproducible
inline std::size_t train_count(double fraction, std::size_t class_size) {
  return static_cast<std::size_t>(
      std::floor(fraction * static_cast<double>(class_size) + 0.5));
}

}  // namespace detail

// Random split; with stratification each class is split independently so
// both halves keep the same imbalance index up to rounding.
inline std::pair<Dataset, Dataset> stratified_split(const Dataset& d,
                                                    const SplitSpec& spec) {
  d.validate();
  if (!(spec.train_fraction > 0.0 && spec.train_fraction <= 1.0))
    throw config_error("stratified_split: train_fraction must be in (0,1]");

  RngStream rng = spec.rng;
  std::vector<std::size_t> train_idx, test_idx;
  const auto split_class = [&](const std::vector<std::size_t>& members) {
    std::vector<std::size_t> order(members);
    for (std::size_t i = order.size(); i > 1; --i)
      std::swap(order[i - 1], order[rng.bounded(i)]);
    const std::size_t k = detail::train_count(spec.train_fraction, order.size());
    train_idx.insert(train_idx.end(), order.begin(), order.begin() + k);
    test_idx.insert(test_idx.end(), order.begin() + k, order.end());
  };

  if (spec.stratified) {
    std::vector<std::size_t> pos, neg;
    for (std::size_t i = 0; i < d.size(); ++i)
      (d.y[i] == 1 ? pos : neg).push_back(i);
    if (pos.empty() || neg.empty())
      throw input_error("stratified_split: both classes must be present");
    split_class(neg);
    split_class(pos);
  } else {
    std::vector<std::size_t> all(d.size());
    std::iota(all.begin(), all.end(), 0);
    split_class(all);
  }
  std::sort(train_idx.begin(), train_idx.end());
  std::sort(test_idx.begin(), test_idx.end());

  const auto take = [&](const std::vector<std::size_t>& idx, const char* tag) {
    Dataset out;
    out.name = d.name + "/" + tag;
    out.X.resize(static_cast<Eigen::Index>(idx.size()), d.X.cols());
    out.y.reserve(idx.size());
    for (std::size_t i = 0; i < idx.size(); ++i) {
      out.X.row(static_cast<Eigen::Index>(i)) = d.X.row(static_cast<Eigen::Index>(idx[i]));
      out.y.push_back(d.y[idx[i]]);
    }
    return out;
  };
  return {take(train_idx, "train"), take(test_idx, "test")};
}

}  // namespace bayesrvm

#endif  // BAYESRVM_DATA_HPP
