#ifndef BAYESRVM_SAMPLERS_HPP
#define BAYESRVM_SAMPLERS_HPP

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "bayesrvm/errors.hpp"
#include "bayesrvm/rng.hpp"

namespace bayesrvm {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Unnormalized log density on an open interval. dlog_f may be left empty;
// samplers that need it fall back to central finite differences.
struct LogDensity {
  std::function<double(double)> log_f;
  std::function<double(double)> dlog_f;
  double support_lo = -kInf;
  double support_hi = kInf;
};

namespace detail {

inline double fd_dlog(const LogDensity& t, double x) {
  const double h = 1e-6 * std::max(1.0, std::abs(x));
  return (t.log_f(x + h) - t.log_f(x - h)) / (2.0 * h);
}

inline double eval_dlog(const LogDensity& t, double x) {
  return t.dlog_f ? t.dlog_f(x) : fd_dlog(t, x);
}

// Piecewise-exponential upper hull built from tangents at the abscissae,
// after Gilks & Wild (1992). Everything is kept in "offset space":
// h = log_f - offset, so exp() of hull ordinates stays in range.
struct ArsHull {
  std::vector<double> x, h, hp;  // sorted abscissae, log_f, dlog_f
  std::vector<double> z;         // z[i] = right edge of piece i; z[k-1] = hi
  std::vector<double> logmass;   // log of each piece's envelope area
  double lo, hi;
  double offset = 0.0;

  static constexpr double kFlatSlope = 1e-11;
  static constexpr double kConcavityTol = 1e-8;

  std::size_t size() const { return x.size(); }

  // Intersection of the tangents at points i and i+1. Near-parallel
  // tangents (a linear stretch of log_f) meet anywhere between the two
  // abscissae; use the midpoint.
  double intersect(std::size_t i) const {
    const double dh = hp[i] - hp[i + 1];
    if (std::abs(dh) < kFlatSlope * (1.0 + std::abs(hp[i])))
      return 0.5 * (x[i] + x[i + 1]);
    double zi = (h[i + 1] - h[i] - x[i + 1] * hp[i + 1] + x[i] * hp[i]) / dh;
    return std::clamp(zi, x[i], x[i + 1]);
  }

  // log of the area under exp(h[i] + (t - x[i]) * hp[i]) for t in [zl, zr].
  double piece_logmass(std::size_t i, double zl, double zr) const {
    const double s = hp[i];
    if (zl == -kInf && s <= 0.0)
      throw numerical_error("ars_sample: envelope not integrable on the left");
    if (zr == kInf && s >= 0.0)
      throw numerical_error("ars_sample: envelope not integrable on the right");
    if (std::abs(s) < kFlatSlope) return h[i] + std::log(zr - zl);
    const double c = h[i] - x[i] * s;
    if (s > 0.0) {
      if (zl == -kInf) return c + s * zr - std::log(s);
      return c + s * zr + std::log1p(-std::exp(s * (zl - zr))) - std::log(s);
    }
    if (zr == kInf) return c + s * zl - std::log(-s);
    return c + s * zl + std::log1p(-std::exp(s * (zr - zl))) - std::log(-s);
  }

  void rebuild() {
    const std::size_t k = size();
    z.assign(k, hi);
    logmass.assign(k, -kInf);
    for (std::size_t i = 0; i + 1 < k; ++i) {
      if (hp[i] - hp[i + 1] < -kConcavityTol)
        throw numerical_error(
            "ars_sample: non-concave target detected at abscissa x=" +
            std::to_string(x[i + 1]));
      z[i] = intersect(i);
    }
    double zl = lo;
    for (std::size_t i = 0; i < k; ++i) {
      logmass[i] = piece_logmass(i, zl, z[i]);
      zl = z[i];
    }
  }

  double upper(std::size_t i, double t) const { return h[i] + (t - x[i]) * hp[i]; }

  // Chord lower hull; -inf outside [x.front(), x.back()].
  double lower(double t) const {
    if (t < x.front() || t > x.back()) return -kInf;
    const auto it = std::upper_bound(x.begin(), x.end(), t);
    std::size_t j = static_cast<std::size_t>(it - x.begin());
    if (j == 0) return h.front();
    if (j >= size()) return h.back();
    --j;
    const double span = x[j + 1] - x[j];
    if (span <= 0.0) return h[j];
    return h[j] + (t - x[j]) * (h[j + 1] - h[j]) / span;
  }

  // Draw from the normalized envelope: pick a piece by mass, then invert
  // the exponential CDF inside it. Returns (x, piece index).
  std::pair<double, std::size_t> sample_envelope(RngStream& rng) const {
    const std::size_t k = size();
    const double m = *std::max_element(logmass.begin(), logmass.end());
    if (!std::isfinite(m))
      throw numerical_error("ars_sample: degenerate envelope mass");
    double total = 0.0;
    std::vector<double> wgt(k);
    for (std::size_t i = 0; i < k; ++i) total += wgt[i] = std::exp(logmass[i] - m);
    double u = rng.uniform() * total;
    std::size_t i = 0;
    while (i + 1 < k && u > wgt[i]) u -= wgt[i++];

    const double zl = (i == 0) ? lo : z[i - 1];
    const double zr = z[i];
    const double s = hp[i];
    const double v = rng.uniform();
    double t;
    if (std::abs(s) < kFlatSlope) {
      t = zl + v * (zr - zl);
    } else if (s > 0.0) {
      t = (zl == -kInf) ? zr + std::log(v) / s
                        : zr + std::log(v + (1.0 - v) * std::exp(s * (zl - zr))) / s;
    } else {
      t = (zr == kInf) ? zl + std::log1p(-v) / s
                       : zl + std::log1p(-v + v * std::exp(s * (zr - zl))) / s;
    }
    t = std::clamp(t, (zl == -kInf) ? -kHuge : zl, (zr == kInf) ? kHuge : zr);
    return {t, i};
  }

  void insert(double t, double ht, double hpt) {
    const auto it = std::lower_bound(x.begin(), x.end(), t);
    const std::size_t j = static_cast<std::size_t>(it - x.begin());
    // skip points indistinguishable from an existing abscissa
    if (j < size() && std::abs(x[j] - t) < 1e-13 * (1.0 + std::abs(t))) return;
    if (j > 0 && std::abs(x[j - 1] - t) < 1e-13 * (1.0 + std::abs(t))) return;
    x.insert(x.begin() + j, t);
    h.insert(h.begin() + j, ht);
    hp.insert(hp.begin() + j, hpt);
    rebuild();
  }

  static constexpr double kHuge = 1e300;
};

}  // namespace detail

// One exact draw from a log-concave target via adaptive rejection sampling
// (tangent upper hull, chord lower-hull squeeze). init_abscissae must
// contain at least two interior points; when the support is unbounded on a
// side, the points must bracket the mode on that side (a positive slope on
// the left, a negative slope on the right).
inline double ars_sample(const LogDensity& target,
                         const std::vector<double>& init_abscissae,
                         RngStream& rng) {
  detail::ArsHull hull;
  hull.lo = target.support_lo;
  hull.hi = target.support_hi;

  std::vector<double> init(init_abscissae);
  std::sort(init.begin(), init.end());
  for (double t : init) {
    if (!(t > hull.lo && t < hull.hi)) continue;
    if (!hull.x.empty() && std::abs(t - hull.x.back()) < 1e-13 * (1.0 + std::abs(t)))
      continue;
    hull.x.push_back(t);
  }
  if (hull.x.size() < 2)
    throw config_error("ars_sample: need at least 2 distinct interior abscissae");

  hull.h.resize(hull.x.size());
  hull.hp.resize(hull.x.size());
  for (std::size_t i = 0; i < hull.x.size(); ++i) {
    hull.h[i] = target.log_f(hull.x[i]);
    hull.hp[i] = detail::eval_dlog(target, hull.x[i]);
    if (!std::isfinite(hull.h[i]) || !std::isfinite(hull.hp[i]))
      throw numerical_error("ars_sample: non-finite log density at abscissa x=" +
                            std::to_string(hull.x[i]));
  }
  hull.offset = *std::max_element(hull.h.begin(), hull.h.end());
  for (double& v : hull.h) v -= hull.offset;

  const bool open_left = (hull.lo == -kInf);
  const bool open_right = (hull.hi == kInf);
  if (open_left && !(hull.hp.front() > 0.0))
    throw config_error(
        "ars_sample: mode not bracketed on the left (no abscissa with positive slope)");
  if (open_right && !(hull.hp.back() < 0.0))
    throw config_error(
        "ars_sample: mode not bracketed on the right (no abscissa with negative slope)");

  hull.rebuild();

  constexpr int kMaxRefinements = 500;
  for (int iter = 0; iter < kMaxRefinements; ++iter) {
    auto [t, piece] = hull.sample_envelope(rng);
    const double u_t = hull.upper(piece, t);
    const double l_t = hull.lower(t);
    const double logu = std::log(rng.uniform());

    if (logu <= l_t - u_t) return t;  // squeeze accept, no target eval

    double ht = target.log_f(t) - hull.offset;
    double hpt = detail::eval_dlog(target, t);
    if (!std::isfinite(ht) || !std::isfinite(hpt)) {
      // The candidate landed so far out in a tail that the density
      // underflows (e.g. an exp() overflow cliff): a certain rejection.
      // Refine the hull at the nearest finite point so the envelope learns
      // how steep the tail really is, then propose again.
      const double anchor =
          t < hull.x.front() ? hull.x.front() : hull.x.back();
      bool refined = false;
      double tq = t;
      for (int pull = 0; pull < 200; ++pull) {
        tq = 0.5 * (tq + anchor);
        const double hq = target.log_f(tq) - hull.offset;
        const double hpq = detail::eval_dlog(target, tq);
        if (std::isfinite(hq) && std::isfinite(hpq)) {
          hull.insert(tq, hq, hpq);
          refined = true;
          break;
        }
      }
      if (!refined)
        throw numerical_error("ars_sample: non-finite log density at x=" +
                              std::to_string(t));
      continue;
    }
    if (ht - u_t > detail::ArsHull::kConcavityTol)
      throw numerical_error(
          "ars_sample: tangent hull fell below the density at x=" +
          std::to_string(t) + " (non-concave target)");
    if (l_t - ht > detail::ArsHull::kConcavityTol)
      throw numerical_error(
          "ars_sample: chord fell above the density at x=" + std::to_string(t) +
          " (non-concave target)");

    if (logu <= std::min(ht, u_t) - u_t) return t;
    hull.insert(t, ht, hpt);
  }
  throw numerical_error("ars_sample: no acceptance after 500 hull refinements");
}

// Initial ARS abscissae around a center point (typically the previous Gibbs
// value, which sits near the mode once the chain has settled): probe
// center +/- 1, 4, 16, ... and keep the subset that brackets the mode.
// Bounded support sides need no bracket; any interior point does.
inline std::vector<double> bracketing_abscissae(const LogDensity& target,
                                                double center) {
  const double lo = target.support_lo, hi = target.support_hi;
  if (center <= lo || center >= hi)
    center = (lo == -kInf || hi == kInf) ? 0.0 : 0.5 * (lo + hi);

  double left = center - 1.0, right = center + 1.0;
  if (lo == -kInf) {
    for (double step = 1.0; step <= 0x1p40; step *= 4.0) {
      left = center - step;
      if (detail::eval_dlog(target, left) > 0.0) break;
    }
  } else {
    left = std::max(center - 1.0, 0.5 * (lo + center));
  }
  if (hi == kInf) {
    for (double step = 1.0; step <= 0x1p40; step *= 4.0) {
      right = center + step;
      if (detail::eval_dlog(target, right) < 0.0) break;
    }
  } else {
    right = std::min(center + 1.0, 0.5 * (center + hi));
  }

  // pull probes back toward the center while the density underflows the
  // double range there (the bracket sign only gets stronger on the way in)
  const auto pull_finite = [&](double probe) {
    for (int i = 0; i < 200 && !std::isfinite(target.log_f(probe)); ++i)
      probe = 0.5 * (probe + center);
    return probe;
  };
  left = pull_finite(left);
  right = pull_finite(right);

  std::vector<double> pts{left, right};
  if (center > left && center < right) pts.insert(pts.begin() + 1, center);
  return pts;
}

// One exact draw from a bounded-support target by the ratio-of-uniforms
// method. The bounding rectangle [0,a] x [b-,b+] with a = sup sqrt(f) and
// b+- = sup/inf x*sqrt(f) comes from a 4096-point grid search, every bound
// inflated by 5%.
inline double ratio_of_uniforms_sample(const LogDensity& target, RngStream& rng) {
  const double lo = target.support_lo, hi = target.support_hi;
  if (!std::isfinite(lo) || !std::isfinite(hi) || !(hi > lo))
    throw config_error("ratio_of_uniforms_sample: bounded support required");

  constexpr int kGrid = 4096;
  const double step = (hi - lo) / kGrid;
  double offset = -kInf;
  std::vector<double> logf(kGrid);
  for (int i = 0; i < kGrid; ++i) {
    const double t = lo + (i + 0.5) * step;
    const double v = target.log_f(t);
    if (std::isnan(v) || v == kInf)
      throw numerical_error(
          "ratio_of_uniforms_sample: non-finite target at grid point x=" +
          std::to_string(t));
    logf[i] = v;
    offset = std::max(offset, v);
  }
  if (!std::isfinite(offset))
    throw numerical_error("ratio_of_uniforms_sample: target vanishes on the whole grid");

  double a = 0.0, vlo = kInf, vhi = -kInf;
  for (int i = 0; i < kGrid; ++i) {
    const double t = lo + (i + 0.5) * step;
    const double sf = std::exp(0.5 * (logf[i] - offset));
    a = std::max(a, sf);
    vlo = std::min(vlo, t * sf);
    vhi = std::max(vhi, t * sf);
  }
  a *= 1.05;
  vlo *= (vlo < 0.0) ? 1.05 : 0.95;
  vhi *= (vhi > 0.0) ? 1.05 : 0.95;

  constexpr long kMaxProposals = 1000000;
  for (long i = 0; i < kMaxProposals; ++i) {
    const double u = a * rng.uniform();
    const double v = vlo + (vhi - vlo) * rng.uniform();
    const double t = v / u;
    if (!(t > lo && t < hi)) continue;
    if (2.0 * std::log(u) <= target.log_f(t) - offset) return t;
  }
  throw numerical_error(
      "ratio_of_uniforms_sample: acceptance rate below 1e-4 after 1e6 proposals");
}

namespace detail {

inline double std_normal(RngStream& rng) {
  const double u1 = rng.uniform();
  const double u2 = rng.uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

}  // namespace detail

// Gamma draw in the shape-rate convention (mean = shape/rate), via
// Marsaglia & Tsang (2000).
inline double gamma_sample(double shape, double rate, RngStream& rng) {
  if (!(shape > 0.0)) throw input_error("gamma_sample: shape must be > 0");
  if (!(rate > 0.0)) throw input_error("gamma_sample: rate must be > 0");
  if (shape < 1.0) {
    const double g = gamma_sample(shape + 1.0, 1.0, rng);
    const double boost = std::pow(rng.uniform(), 1.0 / shape);
    const double r = g * boost / rate;
    return r > 0.0 ? r : std::numeric_limits<double>::min();
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double z, v;
    do {
      z = detail::std_normal(rng);
      v = 1.0 + c * z;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = rng.uniform();
    if (u < 1.0 - 0.0331 * z * z * z * z) return d * v / rate;
    if (std::log(u) < 0.5 * z * z + d * (1.0 - v + std::log(v))) return d * v / rate;
  }
}

inline double normal_sample(double mean, double variance, RngStream& rng) {
  if (!(variance > 0.0)) throw input_error("normal_sample: variance must be > 0");
  return mean + std::sqrt(variance) * detail::std_normal(rng);
}

// Multivariate normal draw through a pivoted LDL^T factorization; accepts
// any symmetric positive semi-definite covariance.
inline Eigen::VectorXd mvn_sample(const Eigen::VectorXd& mean,
                                  const Eigen::MatrixXd& covariance,
                                  RngStream& rng) {
  const Eigen::Index d = mean.size();
  if (covariance.rows() != d || covariance.cols() != d)
    throw input_error("mvn_sample: covariance shape does not match mean");
  const double scale = std::max(1.0, covariance.cwiseAbs().maxCoeff());
  if ((covariance - covariance.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
    throw input_error("mvn_sample: covariance not symmetric");

  Eigen::LDLT<Eigen::MatrixXd> ldlt(covariance);
  if (ldlt.info() != Eigen::Success)
    throw input_error("mvn_sample: covariance factorization failed");
  Eigen::VectorXd diag = ldlt.vectorD();
  for (Eigen::Index i = 0; i < d; ++i) {
    if (diag[i] < -1e-9 * scale)
      throw input_error("mvn_sample: covariance not positive semi-definite");
    diag[i] = std::max(diag[i], 0.0);
  }

  Eigen::VectorXd z(d);
  for (Eigen::Index i = 0; i < d; ++i) z[i] = detail::std_normal(rng);
  Eigen::VectorXd y = diag.cwiseSqrt().cwiseProduct(z);
  y = ldlt.matrixL() * y;
  return mean + ldlt.transpositionsP().transpose() * y;
}

}  // namespace bayesrvm

#endif  // BAYESRVM_SAMPLERS_HPP
