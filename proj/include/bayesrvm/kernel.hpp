#ifndef BAYESRVM_KERNEL_HPP
#define BAYESRVM_KERNEL_HPP

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "bayesrvm/errors.hpp"

namespace bayesrvm {

enum class BandwidthMode { fixed, median_heuristic };

struct KernelConfig {
  double gamma = 1.0;  // RBF bandwidth
  BandwidthMode bandwidth_mode = BandwidthMode::median_heuristic;

  void validate() const {
    if (bandwidth_mode == BandwidthMode::fixed && !(gamma > 0.0))
      throw config_error("KernelConfig: gamma must be > 0 in fixed mode");
  }
};

// Design matrix: a leading ones column followed by the kernel block.
// rows = number of evaluation points, cols = n+1 where n is the size of
// the training set the kernel columns were built against.
struct DesignMatrix {
  Eigen::MatrixXd values;
  std::size_t source_train_size = 0;

  Eigen::Index rows() const { return values.rows(); }
  Eigen::Index cols() const { return values.cols(); }
};

// K(x1,x2) = exp(-||x1-x2||^2 / (2 gamma^2)). Values below the double
// range flush to 0 rather than erroring; distant points contribute
// nothing either way.
inline double rbf_kernel(const Eigen::VectorXd& x1, const Eigen::VectorXd& x2,
                         double gamma) {
  if (x1.size() != x2.size())
    throw input_error("rbf_kernel: dimension mismatch (" +
                      std::to_string(x1.size()) + " vs " +
                      std::to_string(x2.size()) + ")");
  if (!(gamma > 0.0)) throw input_error("rbf_kernel: gamma must be > 0");
  const double d2 = (x1 - x2).squaredNorm();
  return std::exp(-d2 / (2.0 * gamma * gamma));
}

// Median of all pairwise Euclidean distances. Falls back to the smallest
// positive distance when the median is 0 (duplicate-heavy data).
inline double median_heuristic_gamma(const Eigen::MatrixXd& X) {
  const Eigen::Index n = X.rows();
  if (n < 2)
    throw config_error("median_heuristic_gamma: need at least 2 points");
  std::vector<double> dists;
  dists.reserve(static_cast<std::size_t>(n) * (n - 1) / 2);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j)
      dists.push_back((X.row(i) - X.row(j)).norm());
  std::sort(dists.begin(), dists.end());
  const std::size_t m = dists.size();
  double med = (m % 2 == 1) ? dists[m / 2]
                            : 0.5 * (dists[m / 2 - 1] + dists[m / 2]);
  if (med == 0.0) {
    auto it = std::find_if(dists.begin(), dists.end(),
                           [](double d) { return d > 0.0; });
    if (it == dists.end())
      throw config_error("median_heuristic_gamma: all points identical");
    med = *it;
  }
  return med;
}

inline double resolve_gamma(const Eigen::MatrixXd& X_train,
                            const KernelConfig& cfg) {
  cfg.validate();
  return cfg.bandwidth_mode == BandwidthMode::median_heuristic
             ? median_heuristic_gamma(X_train)
             : cfg.gamma;
}

// n x (n+1) training design: ones column, then the symmetric kernel block.
inline DesignMatrix build_train_design(const Eigen::MatrixXd& X_train,
                                       const KernelConfig& cfg) {
  const Eigen::Index n = X_train.rows();
  if (n < 1) throw input_error("build_train_design: empty training set");
  const double gamma = resolve_gamma(X_train, cfg);
  DesignMatrix phi;
  phi.source_train_size = static_cast<std::size_t>(n);
  phi.values.resize(n, n + 1);
  phi.values.col(0).setOnes();
  for (Eigen::Index i = 0; i < n; ++i) {
    phi.values(i, i + 1) = 1.0;
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double k = rbf_kernel(X_train.row(i), X_train.row(j), gamma);
      phi.values(i, j + 1) = k;
      phi.values(j, i + 1) = k;
    }
  }
  return phi;
}

// m x (n+1) test design: row j = (1, K(x_j, x_1^train), ..., K(x_j, x_n^train)).
inline DesignMatrix build_test_design(const Eigen::MatrixXd& X_test,
                                      const Eigen::MatrixXd& X_train,
                                      const KernelConfig& cfg) {
  if (X_test.cols() != X_train.cols())
    throw input_error("build_test_design: feature dimension mismatch");
  const Eigen::Index m = X_test.rows();
  const Eigen::Index n = X_train.rows();
  if (n < 1) throw input_error("build_test_design: empty training set");
  const double gamma = resolve_gamma(X_train, cfg);
  DesignMatrix phi;
  phi.source_train_size = static_cast<std::size_t>(n);
  phi.values.resize(m, n + 1);
  phi.values.col(0).setOnes();
  for (Eigen::Index j = 0; j < m; ++j)
    for (Eigen::Index i = 0; i < n; ++i)
      phi.values(j, i + 1) = rbf_kernel(X_test.row(j), X_train.row(i), gamma);
  return phi;
}

}  // namespace bayesrvm

#endif  // BAYESRVM_KERNEL_HPP
