#ifndef BAYESRVM_MODEL_HPP
#define BAYESRVM_MODEL_HPP

#include <Eigen/Dense>
#include <cmath>
#include <cstddef>
#include <memory>
#include <string>
#include <vector>

#include "bayesrvm/errors.hpp"
#include "bayesrvm/kernel.hpp"
#include "bayesrvm/samplers.hpp"

namespace bayesrvm {

using Labels = std::vector<int>;  // entries in {-1, +1}

// Weight vector w = (w_0, ..., w_n); index 0 is the bias.
struct WeightState {
  Eigen::VectorXd w;
};

// Per-weight precisions stored as eta_s = log(alpha_s).
struct AlphaState {
  Eigen::VectorXd eta;
};

// Gamma hyperprior on each alpha_s, shape-rate convention.
struct GenericHyper {
  double a = 1.0;
  double b = 1.0 / 999.0;

  void validate() const {
    if (!(a > 0.0) || !(b > 0.0))
      throw config_error("GenericHyper: a and b must be > 0");
  }
};

// Scalar layer of the hierarchical model: eta ~ N(mu*1, tau2*Sigma) with
// Sigma = (1-rho)I + rho*11'. Sigma is never materialized; everything is
// expressed through (mu, rho, tau2). (c, d) parameterize the Gamma prior
// on tau^-2.
struct HierHyper {
  double mu = 0.0;
  double rho = 0.5;
  double tau2 = 100.0;
  double c = 1.0;
  double d = 1.0 / 999.0;

  void validate() const {
    if (!(rho > 0.0 && rho < 1.0))
      throw config_error("HierHyper: rho must lie in (0,1)");
    if (!(tau2 > 0.0)) throw config_error("HierHyper: tau2 must be > 0");
    if (!(c > 0.0) || !(d > 0.0))
      throw config_error("HierHyper: c and d must be > 0");
  }
};

// eta is clamped to +-40 before exponentiation: exp(40)*w^2 is already far
// past any useful precision scale, and exp(710) overflows.
constexpr double kEtaClamp = 40.0;

inline double clamped_exp_eta(double eta, std::size_t* clamp_events = nullptr) {
  if (eta > kEtaClamp || eta < -kEtaClamp) {
    if (clamp_events) ++*clamp_events;
    eta = std::clamp(eta, -kEtaClamp, kEtaClamp);
  }
  return std::exp(eta);
}

inline double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// log(sigma(z)) without overflow for large |z|.
inline double log_sigmoid(double z) {
  if (z >= 0.0) return -std::log1p(std::exp(-z));
  return z - std::log1p(std::exp(z));
}

inline void validate_labels(const Labels& y) {
  for (std::size_t i = 0; i < y.size(); ++i)
    if (y[i] != 1 && y[i] != -1)
      throw input_error("labels must be -1 or +1, got " + std::to_string(y[i]) +
                        " at row " + std::to_string(i));
}

// Bernoulli log likelihood of the training labels under scores phi*w.
// With y in {-1,+1} the two exponents collapse to log(sigma(y_i * z_i)).
inline double log_likelihood(const WeightState& w, const DesignMatrix& phi,
                             const Labels& y) {
  validate_labels(y);
  if (phi.rows() != static_cast<Eigen::Index>(y.size()))
    throw input_error("log_likelihood: row count does not match labels");
  if (phi.cols() != w.w.size())
    throw input_error("log_likelihood: design columns do not match weights");
  const Eigen::VectorXd z = phi.values * w.w;
  double ll = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) ll += log_sigmoid(y[i] * z[i]);
  return ll;
}

namespace detail {

struct WeightCondData {
  Eigen::VectorXd base;  // phi*w with coordinate k removed
  Eigen::VectorXd col;   // column k of phi
  std::vector<double> ytilde;
  double alpha_k;
};

}  // namespace detail

// Conditional of one weight coordinate given everything else, built from
// precomputed scores: base_i = phi_i*w - phi_{i,k}*w_k. Trainers keep the
// score vector cached across the Gibbs sweep and call this directly.
inline LogDensity weight_conditional_from_scores(Eigen::VectorXd base,
                                                 Eigen::VectorXd col,
                                                 const Labels& y,
                                                 double alpha_k) {
  auto data = std::make_shared<detail::WeightCondData>();
  data->base = std::move(base);
  data->col = std::move(col);
  data->alpha_k = alpha_k;
  data->ytilde.resize(y.size());
  for (std::size_t i = 0; i < y.size(); ++i)
    data->ytilde[i] = 0.5 * (1.0 + y[i]);

  LogDensity dens;
  dens.log_f = [data](double v) {
    double lf = -0.5 * data->alpha_k * v * v;
    for (Eigen::Index i = 0; i < data->base.size(); ++i) {
      const double z = data->base[i] + data->col[i] * v;
      lf += data->ytilde[static_cast<std::size_t>(i)] > 0.5 ? log_sigmoid(z)
                                                            : log_sigmoid(-z);
    }
    return lf;
  };
  dens.dlog_f = [data](double v) {
    double g = -data->alpha_k * v;
    for (Eigen::Index i = 0; i < data->base.size(); ++i) {
      const double z = data->base[i] + data->col[i] * v;
      g += data->col[i] *
           (data->ytilde[static_cast<std::size_t>(i)] - sigmoid(z));
    }
    return g;
  };
  return dens;
}

// log p(w_k | others): likelihood plus the N(0, alpha_k^-1) prior term,
// with the analytic first derivative attached.
inline LogDensity log_conditional_w(std::size_t k, const WeightState& w,
                                    const AlphaState& alpha,
                                    const DesignMatrix& phi, const Labels& y) {
  if (k >= static_cast<std::size_t>(w.w.size()))
    throw input_error("log_conditional_w: index out of range");
  validate_labels(y);
  const Eigen::VectorXd col =
      phi.values.rows() > 0 ? Eigen::VectorXd(phi.values.col(k))
                            : Eigen::VectorXd(0);
  Eigen::VectorXd base = phi.values * w.w;
  if (base.size() > 0) base -= col * w.w[k];
  const double alpha_k = clamped_exp_eta(alpha.eta[k]);
  return weight_conditional_from_scores(std::move(base), col, y, alpha_k);
}

// log p(eta_k | others) for the hierarchical layer:
//   eta/2 - exp(eta) w_k^2 / 2
//   - [1+(n-1)rho] (eta-mu)^2 / [2 tau2 (1-rho)(1+n rho)]
//   + rho (eta-mu) sum_{s!=k}(eta_s-mu) / [tau2 (1-rho)(1+n rho)]
inline LogDensity log_conditional_eta(std::size_t k, const WeightState& w,
                                      const AlphaState& alpha,
                                      const HierHyper& h, std::size_t n) {
  if (alpha.eta.size() != static_cast<Eigen::Index>(n + 1))
    throw input_error("log_conditional_eta: eta length must be n+1");
  if (k > n) throw input_error("log_conditional_eta: index out of range");
  h.validate();

  const double wk2 = w.w[k] * w.w[k];
  const double mu = h.mu;
  const double nn = static_cast<double>(n);
  const double denom = h.tau2 * (1.0 - h.rho) * (1.0 + nn * h.rho);
  const double quad = (1.0 + (nn - 1.0) * h.rho) / (2.0 * denom);
  const double sum_other = (alpha.eta.array() - mu).sum() - (alpha.eta[k] - mu);
  const double lin = h.rho * sum_other / denom;

  // exp(e) is deliberately unclamped: the derivative must be exact for the
  // tangent hull, and the strong negative pull keeps samplers far away from
  // the overflow range. wk2 = 0 would turn that pull off, so guard the
  // product against inf * 0.
  const auto exp_term = [wk2](double e) {
    return wk2 > 0.0 ? 0.5 * std::exp(e) * wk2 : 0.0;
  };
  LogDensity dens;
  dens.log_f = [exp_term, mu, quad, lin](double e) {
    const double de = e - mu;
    return 0.5 * e - exp_term(e) - quad * de * de + lin * de;
  };
  dens.dlog_f = [exp_term, mu, quad, lin](double e) {
    return 0.5 - exp_term(e) - 2.0 * quad * (e - mu) + lin;
  };
  return dens;
}

// Closed-form second derivative of log p(eta_k | others); the exp term is
// the likelihood-side curvature, the constant is the hyperprior's.
inline double eta_conditional_hessian(double eta_k, double w_k,
                                      const HierHyper& h, std::size_t n) {
  const double nn = static_cast<double>(n);
  return -0.5 * std::exp(eta_k) * w_k * w_k -
         (1.0 + (nn - 1.0) * h.rho) /
             (h.tau2 * (1.0 - h.rho) * (1.0 + nn * h.rho));
}

// alpha_s | w_s ~ Gamma(a + 1/2, b + w_s^2/2), drawn independently per
// coordinate and returned on the eta = log(alpha) scale.
inline AlphaState sample_alpha_generic(const WeightState& w,
                                       const GenericHyper& g, RngStream& rng) {
  g.validate();
  AlphaState out;
  out.eta.resize(w.w.size());
  for (Eigen::Index s = 0; s < w.w.size(); ++s) {
    const double rate = g.b + 0.5 * w.w[s] * w.w[s];
    out.eta[s] = std::log(gamma_sample(g.a + 0.5, rate, rng));
  }
  return out;
}

// log p(rho | others) on (0,1):
//   -(n/2) log(1-rho) - log(1+n rho)/2 - S1/[2 tau2 (1-rho)]
//   + rho S2^2/[2 tau2 (1-rho)(1+n rho)]
// with S1 = sum (eta_s-mu)^2 and S2 = sum (eta_s-mu) over all n+1 entries.
inline LogDensity log_conditional_rho(const AlphaState& alpha,
                                      const HierHyper& h, std::size_t n) {
  if (alpha.eta.size() != static_cast<Eigen::Index>(n + 1))
    throw input_error("log_conditional_rho: eta length must be n+1");
  const double S1 = (alpha.eta.array() - h.mu).square().sum();
  const double S2 = (alpha.eta.array() - h.mu).sum();
  const double tau2 = h.tau2;
  const double nn = static_cast<double>(n);

  LogDensity dens;
  dens.support_lo = 0.0;
  dens.support_hi = 1.0;
  dens.log_f = [S1, S2, tau2, nn](double rho) {
    if (!(rho > 0.0 && rho < 1.0)) return -kInf;
    const double om = 1.0 - rho;
    const double cp = 1.0 + nn * rho;
    return -0.5 * nn * std::log(om) - 0.5 * std::log(cp) -
           S1 / (2.0 * tau2 * om) + rho * S2 * S2 / (2.0 * tau2 * om * cp);
  };
  return dens;
}

// mu | others ~ N(mean(eta), tau2 (1+n rho)/(n+1)).
inline double sample_mu(const AlphaState& alpha, const HierHyper& h,
                        std::size_t n, RngStream& rng) {
  if (alpha.eta.size() != static_cast<Eigen::Index>(n + 1))
    throw input_error("sample_mu: eta length must be n+1");
  const double nn = static_cast<double>(n);
  const double mean = alpha.eta.mean();
  const double var = h.tau2 * (1.0 + nn * h.rho) / (nn + 1.0);
  return normal_sample(mean, var, rng);
}

// tau^-2 | others ~ Gamma(c + (n+1)/2, d + increment/2) where the
// increment S1/(1-rho) - rho S2^2/[(1-rho)(1+n rho)] is the quadratic form
// (eta-mu1)' Sigma^-1 (eta-mu1); it is nonnegative whenever Sigma is PD.
inline double sample_tau2(const AlphaState& alpha, const HierHyper& h,
                          std::size_t n, RngStream& rng) {
  if (alpha.eta.size() != static_cast<Eigen::Index>(n + 1))
    throw input_error("sample_tau2: eta length must be n+1");
  const double nn = static_cast<double>(n);
  const double S1 = (alpha.eta.array() - h.mu).square().sum();
  const double S2 = (alpha.eta.array() - h.mu).sum();
  const double om = 1.0 - h.rho;
  double increment = S1 / om - h.rho * S2 * S2 / (om * (1.0 + nn * h.rho));
  if (increment < -1e-10)
    throw numerical_error(
        "sample_tau2: negative rate increment (eta/rho bookkeeping bug): " +
        std::to_string(increment));
  increment = std::max(increment, 0.0);
  const double precision =
      gamma_sample(h.c + 0.5 * (nn + 1.0), h.d + 0.5 * increment, rng);
  return 1.0 / precision;
}

struct Predictions {
  Labels labels;
  Eigen::VectorXd probabilities;
};

// Class probabilities sigma(phi*w) and hard labels sign(prob - 1/2),
// with the tie broken toward +1 (sign(0) = +1).
inline Predictions predict(const WeightState& w, const DesignMatrix& phi) {
  if (phi.cols() != w.w.size())
    throw input_error("predict: design columns do not match weight length");
  const Eigen::VectorXd z = phi.values * w.w;
  Predictions out;
  out.probabilities.resize(z.size());
  out.labels.resize(static_cast<std::size_t>(z.size()));
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    out.probabilities[i] = sigmoid(z[i]);
    out.labels[static_cast<std::size_t>(i)] = z[i] >= 0.0 ? 1 : -1;
  }
  return out;
}

// Marginal prior of one weight after integrating alpha out of the
// N(0,alpha^-1) x Gamma(a,b) pair: a Student-t with log density
//   a log b + lgamma(a+1/2) - log(2 pi)/2 - lgamma(a) - (a+1/2) log(b + w^2/2).
inline double student_t_log_marginal(double w, const GenericHyper& g) {
  g.validate();
  return g.a * std::log(g.b) + std::lgamma(g.a + 0.5) -
         0.5 * std::log(2.0 * M_PI) - std::lgamma(g.a) -
         (g.a + 0.5) * std::log(g.b + 0.5 * w * w);
}

}  // namespace bayesrvm

#endif  // BAYESRVM_MODEL_HPP
