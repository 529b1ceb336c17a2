#ifndef BAYESRVM_ALGORITHMS_HPP
#define BAYESRVM_ALGORITHMS_HPP

#include <Eigen/Dense>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>

#include "bayesrvm/errors.hpp"
#include "bayesrvm/kernel.hpp"
#include "bayesrvm/model.hpp"
#include "bayesrvm/rng.hpp"
#include "bayesrvm/samplers.hpp"

namespace bayesrvm {

enum class AlgorithmId { original, generic, hierarchical };

inline const char* algorithm_name(AlgorithmId id) {
  switch (id) {
    case AlgorithmId::original: return "original";
    case AlgorithmId::generic: return "generic";
    case AlgorithmId::hierarchical: return "hierarchical";
  }
  return "?";
}

inline AlgorithmId parse_algorithm(const std::string& s) {
  if (s == "original") return AlgorithmId::original;
  if (s == "generic") return AlgorithmId::generic;
  if (s == "hierarchical") return AlgorithmId::hierarchical;
  throw config_error("unknown algorithm '" + s +
                     "' (expected original|generic|hierarchical)");
}

struct TrainConfig {
  std::size_t iterations = 5000;  // T
  std::size_t burn_in = 500;      // B
  GenericHyper generic{};
  HierHyper hier_init{};  // starting (mu, rho, tau2) plus fixed (c, d)
  std::optional<Eigen::VectorXd> init_w;
  std::optional<Eigen::VectorXd> init_eta;
  RngStream rng{0};
  std::size_t thin = 1;  // trace storage stride; the estimator always uses
                         // every post-burn-in iteration

  // Test hooks for isolating the hyperprior layer; never set in normal runs.
  struct Hooks {
    bool disable_likelihood = false;  // skip the w block (w stays at init)
    bool freeze_eta = false;          // skip the eta block
  } hooks;

  void validate() const {
    if (iterations == 0) throw config_error("TrainConfig: iterations must be >= 1");
    if (burn_in >= iterations)
      throw config_error("TrainConfig: burn_in must be < iterations");
    if (thin == 0) throw config_error("TrainConfig: thin must be >= 1");
    generic.validate();
    hier_init.validate();
  }
};

// Per-iteration parameter history. Burn-in rows are flagged by the
// burn_in field, never deleted. hyper_history columns are (rho, mu, tau2)
// and stay empty for the non-hierarchical trainers.
struct GibbsTrace {
  Eigen::MatrixXd w_history;
  Eigen::MatrixXd eta_history;
  Eigen::MatrixXd hyper_history;
  std::size_t burn_in = 0;
  std::size_t thin = 1;
  std::size_t clamp_events = 0;
  std::size_t ridge_repairs = 0;
};

struct FitResult {
  WeightState w_hat;  // posterior mean over post-burn-in draws, or the
                      // Laplace-method output for the original algorithm
  AlgorithmId algorithm_id = AlgorithmId::generic;
  GibbsTrace trace;
};

namespace detail {

inline void check_training_inputs(const DesignMatrix& phi, const Labels& y) {
  validate_labels(y);
  if (phi.rows() != static_cast<Eigen::Index>(y.size()))
    throw input_error("training: design rows do not match label count");
  if (phi.cols() != phi.rows() + 1)
    throw input_error("training: design must have n+1 columns");
}

[[noreturn]] inline void rethrow_with_context(const char* trainer, std::size_t t,
                                              const char* block, std::size_t k,
                                              const std::runtime_error& e,
                                              bool is_config) {
  const std::string msg = std::string(trainer) + ": iteration " +
                          std::to_string(t + 1) + ", " + block + "-coordinate " +
                          std::to_string(k) + ": " + e.what();
  if (is_config) throw config_error(msg);
  throw numerical_error(msg);
}

// One Gibbs sweep over the weight block: each w_k is drawn exactly from
// its log-concave conditional with ARS, keeping the score cache phi*w
// in sync.
inline void sweep_weights(const char* trainer, std::size_t t,
                          const DesignMatrix& phi, const Labels& y,
                          const Eigen::VectorXd& eta, Eigen::VectorXd& w,
                          Eigen::VectorXd& scores, std::size_t& clamp_events,
                          RngStream& rng) {
  for (Eigen::Index k = 0; k < w.size(); ++k) {
    const Eigen::VectorXd col = phi.values.col(k);
    const double alpha_k = clamped_exp_eta(eta[k], &clamp_events);
    LogDensity target = weight_conditional_from_scores(
        scores - col * w[k], col, y, alpha_k);
    try {
      const double wk = ars_sample(target, bracketing_abscissae(target, w[k]), rng);
      scores += col * (wk - w[k]);
      w[k] = wk;
    } catch (const config_error& e) {
      rethrow_with_context(trainer, t, "w", static_cast<std::size_t>(k), e, true);
    } catch (const numerical_error& e) {
      rethrow_with_context(trainer, t, "w", static_cast<std::size_t>(k), e, false);
    }
  }
}

}  // namespace detail

// Algorithm: the Generic Bayesian Gibbs trainer. Alternates exact ARS
// draws of each weight conditional with the conjugate Gamma update of the
// precisions; the estimate is the post-burn-in mean of the w draws.
inline FitResult train_generic(const DesignMatrix& phi, const Labels& y,
                               const TrainConfig& cfg) {
  cfg.validate();
  detail::check_training_inputs(phi, y);
  const Eigen::Index p = phi.cols();
  const std::size_t T = cfg.iterations, B = cfg.burn_in;

  Eigen::VectorXd w = cfg.init_w.value_or(Eigen::VectorXd::Zero(p));
  Eigen::VectorXd eta = cfg.init_eta.value_or(Eigen::VectorXd::Zero(p));
  if (w.size() != p || eta.size() != p)
    throw config_error("train_generic: init vectors must have length n+1");
  RngStream rng = cfg.rng;

  const std::size_t stored = (T + cfg.thin - 1) / cfg.thin;
  FitResult fit;
  fit.algorithm_id = AlgorithmId::generic;
  fit.trace.w_history.resize(stored, p);
  fit.trace.eta_history.resize(stored, p);
  fit.trace.burn_in = B;
  fit.trace.thin = cfg.thin;

  Eigen::VectorXd w_sum = Eigen::VectorXd::Zero(p);
  Eigen::VectorXd scores = phi.values * w;
  for (std::size_t t = 0; t < T; ++t) {
    if (!cfg.hooks.disable_likelihood)
      detail::sweep_weights("train_generic", t, phi, y, eta, w, scores,
                            fit.trace.clamp_events, rng);
    eta = sample_alpha_generic(WeightState{w}, cfg.generic, rng).eta;
    if (t % cfg.thin == 0) {
      fit.trace.w_history.row(t / cfg.thin) = w;
      fit.trace.eta_history.row(t / cfg.thin) = eta;
    }
    if (t >= B) w_sum += w;
    scores = phi.values * w;
  }
  fit.w_hat.w = w_sum / static_cast<double>(T - B);
  return fit;
}

// Algorithm: the Fully Hierarchical Bayesian Gibbs trainer. Per iteration:
// w block (ARS), eta block (ARS on the hierarchical conditional), rho
// (ratio of uniforms), then the closed-form mu and tau2 conditionals.
inline FitResult train_hierarchical(const DesignMatrix& phi, const Labels& y,
                                    const TrainConfig& cfg) {
  cfg.validate();
  detail::check_training_inputs(phi, y);
  const Eigen::Index p = phi.cols();
  const std::size_t n = static_cast<std::size_t>(phi.rows());
  const std::size_t T = cfg.iterations, B = cfg.burn_in;

  Eigen::VectorXd w = cfg.init_w.value_or(Eigen::VectorXd::Zero(p));
  Eigen::VectorXd eta = cfg.init_eta.value_or(Eigen::VectorXd::Zero(p));
  if (w.size() != p || eta.size() != p)
    throw config_error("train_hierarchical: init vectors must have length n+1");
  HierHyper h = cfg.hier_init;
  RngStream rng = cfg.rng;

  const std::size_t stored = (T + cfg.thin - 1) / cfg.thin;
  FitResult fit;
  fit.algorithm_id = AlgorithmId::hierarchical;
  fit.trace.w_history.resize(stored, p);
  fit.trace.eta_history.resize(stored, p);
  fit.trace.hyper_history.resize(stored, 3);
  fit.trace.burn_in = B;
  fit.trace.thin = cfg.thin;

  Eigen::VectorXd w_sum = Eigen::VectorXd::Zero(p);
  Eigen::VectorXd scores = phi.values * w;
  for (std::size_t t = 0; t < T; ++t) {
    if (!cfg.hooks.disable_likelihood)
      detail::sweep_weights("train_hierarchical", t, phi, y, eta, w, scores,
                            fit.trace.clamp_events, rng);

    if (!cfg.hooks.freeze_eta) {
      for (Eigen::Index k = 0; k < p; ++k) {
        LogDensity target = log_conditional_eta(
            static_cast<std::size_t>(k), WeightState{w}, AlphaState{eta}, h, n);
        try {
          eta[k] = ars_sample(target, bracketing_abscissae(target, eta[k]), rng);
        } catch (const config_error& e) {
          detail::rethrow_with_context("train_hierarchical", t, "eta",
                                       static_cast<std::size_t>(k), e, true);
        } catch (const numerical_error& e) {
          detail::rethrow_with_context("train_hierarchical", t, "eta",
                                       static_cast<std::size_t>(k), e, false);
        }
      }
    }

    const AlphaState alpha{eta};
    try {
      h.rho = ratio_of_uniforms_sample(log_conditional_rho(alpha, h, n), rng);
    } catch (const numerical_error& e) {
      throw numerical_error("train_hierarchical: iteration " +
                            std::to_string(t + 1) + ", rho draw: " + e.what());
    }
    h.mu = sample_mu(alpha, h, n, rng);
    h.tau2 = sample_tau2(alpha, h, n, rng);

    if (t % cfg.thin == 0) {
      const std::size_t r = t / cfg.thin;
      fit.trace.w_history.row(r) = w;
      fit.trace.eta_history.row(r) = eta;
      fit.trace.hyper_history(r, 0) = h.rho;
      fit.trace.hyper_history(r, 1) = h.mu;
      fit.trace.hyper_history(r, 2) = h.tau2;
    }
    if (t >= B) w_sum += w;
    scores = phi.values * w;
  }
  fit.w_hat.w = w_sum / static_cast<double>(T - B);
  return fit;
}

// Algorithm: the original Newton/Laplace trainer. Outer cycles alternate
// one Newton step on w (fixed alpha) with the evidence-style alpha update
// alpha_s = gamma_s / w_s^2, gamma_s = 1 - alpha_s * (H^-1)_ss, stopping
// early once the Newton increment stalls. Output is the Laplace-method
// estimate H^-1 Phi' B y at the converged mode, with pruned components
// (alpha at the 1e12 cap) zeroed.
inline FitResult train_original(const DesignMatrix& phi, const Labels& y,
                                const TrainConfig& cfg) {
  cfg.validate();
  detail::check_training_inputs(phi, y);
  const Eigen::Index n = phi.rows();
  const Eigen::Index p = phi.cols();
  const std::size_t T = cfg.iterations;
  constexpr double kAlphaCap = 1e12;
  constexpr double kAlphaFloor = 1e-12;

  Eigen::VectorXd w = cfg.init_w.value_or(Eigen::VectorXd::Zero(p));
  Eigen::VectorXd alpha = cfg.init_eta
                              ? cfg.init_eta->array().exp().matrix().eval()
                              : Eigen::VectorXd::Ones(p);
  Eigen::VectorXd ylab(n), ytilde(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    ylab[i] = y[static_cast<std::size_t>(i)];
    ytilde[i] = 0.5 * (1.0 + ylab[i]);
  }

  FitResult fit;
  fit.algorithm_id = AlgorithmId::original;

  const auto assemble = [&](const Eigen::VectorXd& wc, Eigen::VectorXd& s,
                            Eigen::VectorXd& bdiag, Eigen::MatrixXd& H) {
    const Eigen::VectorXd z = phi.values * wc;
    s.resize(n);
    bdiag.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      s[i] = sigmoid(z[i]);
      bdiag[i] = s[i] * (1.0 - s[i]);
    }
    H = phi.values.transpose() * bdiag.asDiagonal() * phi.values;
    H.diagonal() += alpha;
  };

  const auto factor = [&](Eigen::MatrixXd& H) {
    Eigen::LDLT<Eigen::MatrixXd> ldlt(H);
    if (ldlt.info() != Eigen::Success || ldlt.rcond() < 1e-12) {
      H.diagonal().array() += 1e-8;
      ++fit.trace.ridge_repairs;
      ldlt.compute(H);
      if (ldlt.info() != Eigen::Success)
        throw numerical_error("train_original: Hessian factorization failed");
    }
    return ldlt;
  };

  std::vector<Eigen::VectorXd> w_rows, a_rows;
  Eigen::VectorXd s, bdiag;
  Eigen::MatrixXd H;
  for (std::size_t t = 0; t < T; ++t) {
    // Step 1: Newton update of w at fixed alpha.
    assemble(w, s, bdiag, H);
    const Eigen::VectorXd grad =
        phi.values.transpose() * (ytilde - s) - alpha.cwiseProduct(w);
    auto ldlt = factor(H);
    const Eigen::VectorXd dw = ldlt.solve(grad);
    w += dw;
    w_rows.push_back(w);
    a_rows.push_back(alpha);
    if (dw.cwiseAbs().maxCoeff() < 1e-8) break;

    // Step 2: update alpha at the new w. gamma_s uses the posterior
    // covariance diagonal (H^-1)_ss; the printed H_ss variant makes
    // 1 - alpha_s H_ss negative for any informative component.
    assemble(w, s, bdiag, H);
    ldlt = factor(H);
    const Eigen::MatrixXd Hinv =
        ldlt.solve(Eigen::MatrixXd::Identity(p, p));
    for (Eigen::Index k = 0; k < p; ++k) {
      const double gamma_k = 1.0 - alpha[k] * Hinv(k, k);
      const double w2 = w[k] * w[k];
      double a_new = (w2 > 0.0) ? gamma_k / w2 : kAlphaCap;
      if (!(a_new < kAlphaCap)) a_new = kAlphaCap;
      alpha[k] = std::max(a_new, kAlphaFloor);
    }
  }

  // Output line: w_MP = H^-1 Phi' B y evaluated at the converged mode.
  assemble(w, s, bdiag, H);
  auto ldlt = factor(H);
  Eigen::VectorXd w_mp =
      ldlt.solve(phi.values.transpose() * bdiag.cwiseProduct(ylab));
  for (Eigen::Index k = 0; k < p; ++k)
    if (alpha[k] >= kAlphaCap) w_mp[k] = 0.0;  // pruned components

  const std::size_t rows = w_rows.size();
  fit.trace.w_history.resize(rows, p);
  fit.trace.eta_history.resize(rows, p);
  for (std::size_t r = 0; r < rows; ++r) {
    fit.trace.w_history.row(r) = w_rows[r];
    fit.trace.eta_history.row(r) = a_rows[r].array().log();
  }
  fit.trace.burn_in = std::min(cfg.burn_in, rows);
  fit.trace.thin = 1;
  fit.w_hat.w = w_mp;
  return fit;
}

inline FitResult train(AlgorithmId id, const DesignMatrix& phi, const Labels& y,
                       const TrainConfig& cfg) {
  switch (id) {
    case AlgorithmId::original: return train_original(phi, y, cfg);
    case AlgorithmId::generic: return train_generic(phi, y, cfg);
    case AlgorithmId::hierarchical: return train_hierarchical(phi, y, cfg);
  }
  throw config_error("train: unknown algorithm id");
}

// Predictions of a fitted model on a test design built against the same
// training set.
inline Predictions evaluate_fit(const FitResult& fit, const DesignMatrix& phi_test,
                                const Labels& y_test) {
  if (phi_test.cols() != fit.w_hat.w.size())
    throw input_error("evaluate_fit: test design columns do not match the fit");
  if (phi_test.rows() != static_cast<Eigen::Index>(y_test.size()))
    throw input_error("evaluate_fit: test design rows do not match labels");
  validate_labels(y_test);
  return predict(fit.w_hat, phi_test);
}

}  // namespace bayesrvm

#endif  // BAYESRVM_ALGORITHMS_HPP
