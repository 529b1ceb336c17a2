#include <catch_amalgamated.hpp>
#include <cmath>
#include <vector>

#include "bayesrvm/samplers.hpp"
#include "oracles.hpp"

using namespace bayesrvm;

namespace {

LogDensity std_normal_target() {
  LogDensity t;
  t.log_f = [](double x) { return -0.5 * x * x; };
  t.dlog_f = [](double x) { return -x; };
  return t;
}

}  // namespace

TEST_CASE("ars_sample: standard normal passes a KS test") {
  const LogDensity target = std_normal_target();
  RngStream rng(101);
  std::vector<double> draws;
  draws.reserve(10000);
  for (int i = 0; i < 10000; ++i)
    draws.push_back(ars_sample(target, {-1.3, 0.4, 0.9}, rng));
  const double ks = oracles::ks_statistic(draws, [](double x) {
    return oracles::normal_cdf(x);
  });
  CHECK(ks < 0.02);
}

TEST_CASE("ars_sample: exponential(1) on (0,inf)") {
  LogDensity target;
  target.support_lo = 0.0;
  target.log_f = [](double x) { return -x; };
  target.dlog_f = [](double) { return -1.0; };
  RngStream rng(102);
  std::vector<double> draws;
  for (int i = 0; i < 10000; ++i)
    draws.push_back(ars_sample(target, {0.5, 2.0}, rng));
  // analytic mean 1, sd 1
  CHECK_THAT(oracles::mean(draws), Catch::Matchers::WithinAbs(1.0, 3.0 / 100.0));
  for (double d : draws) REQUIRE(d > 0.0);
}

TEST_CASE("ars_sample: non-log-concave target is rejected") {
  // equal mixture of N(-3,1) and N(3,1); the dip at 0 breaks concavity
  LogDensity target;
  target.log_f = [](double x) {
    const double a = std::exp(-0.5 * (x + 3) * (x + 3));
    const double b = std::exp(-0.5 * (x - 3) * (x - 3));
    return std::log(0.5 * a + 0.5 * b);
  };
  target.dlog_f = [](double x) {
    const double a = std::exp(-0.5 * (x + 3) * (x + 3));
    const double b = std::exp(-0.5 * (x - 3) * (x - 3));
    return (-(x + 3) * a - (x - 3) * b) / (a + b);
  };
  RngStream rng(103);
  CHECK_THROWS_AS(ars_sample(target, {-4.0, -1.5, 1.5, 4.0}, rng),
                  numerical_error);
}

TEST_CASE("ars_sample: bracketing and input contracts") {
  const LogDensity target = std_normal_target();
  RngStream rng(104);
  // fewer than two interior points
  CHECK_THROWS_AS(ars_sample(target, {0.0}, rng), config_error);
  // all points left of the mode on doubly-unbounded support
  CHECK_THROWS_AS(ars_sample(target, {-3.0, -2.0}, rng), config_error);
  CHECK_THROWS_AS(ars_sample(target, {2.0, 3.0}, rng), config_error);
}

TEST_CASE("ars_sample: determinism per RngStream") {
  const LogDensity target = std_normal_target();
  RngStream a(555), b(555);
  for (int i = 0; i < 50; ++i) {
    const double da = ars_sample(target, {-1.0, 1.0}, a);
    const double db = ars_sample(target, {-1.0, 1.0}, b);
    REQUIRE(da == db);
  }
}

TEST_CASE("ars hull brackets the density") {
  // white-box: lower hull <= log_f <= upper hull on a constructed hull
  const LogDensity target = std_normal_target();
  detail::ArsHull hull;
  hull.lo = -kInf;
  hull.hi = kInf;
  hull.x = {-2.0, -0.5, 0.4, 1.7};
  for (double x : hull.x) {
    hull.h.push_back(target.log_f(x));
    hull.hp.push_back(target.dlog_f(x));
  }
  hull.rebuild();
  RngStream rng(7);
  for (int i = 0; i < 100; ++i) {
    const double x = rng.uniform(-4.0, 4.0);
    std::size_t piece = 0;
    while (piece + 1 < hull.size() && x > hull.z[piece]) ++piece;
    const double up = hull.upper(piece, x);
    const double low = hull.lower(x);
    const double f = target.log_f(x);
    CHECK(up >= f - 1e-8);
    CHECK(low <= f + 1e-8);
  }
}

TEST_CASE("bracketing_abscissae straddles the mode") {
  LogDensity shifted;
  shifted.log_f = [](double x) { return -0.5 * (x - 37.0) * (x - 37.0); };
  shifted.dlog_f = [](double x) { return -(x - 37.0); };
  const auto pts = bracketing_abscissae(shifted, 0.0);
  REQUIRE(pts.size() >= 2);
  CHECK(shifted.dlog_f(pts.front()) > 0.0);
  CHECK(shifted.dlog_f(pts.back()) < 0.0);
  RngStream rng(9);
  const double draw = ars_sample(shifted, pts, rng);
  CHECK(std::abs(draw - 37.0) < 6.0);
}

TEST_CASE("ratio_of_uniforms_sample: uniform(0,1)") {
  LogDensity target;
  target.support_lo = 0.0;
  target.support_hi = 1.0;
  target.log_f = [](double) { return 0.0; };
  RngStream rng(201);
  std::vector<double> draws;
  for (int i = 0; i < 10000; ++i)
    draws.push_back(ratio_of_uniforms_sample(target, rng));
  const double ks = oracles::ks_statistic(draws, [](double x) {
    return oracles::uniform_cdf(x);
  });
  CHECK(ks < 0.02);
  for (double d : draws) REQUIRE((d > 0.0 && d < 1.0));
}

TEST_CASE("ratio_of_uniforms_sample: Beta(2,2) mean") {
  LogDensity target;
  target.support_lo = 0.0;
  target.support_hi = 1.0;
  target.log_f = [](double x) { return std::log(x * (1.0 - x)); };
  RngStream rng(202);
  std::vector<double> draws;
  for (int i = 0; i < 10000; ++i)
    draws.push_back(ratio_of_uniforms_sample(target, rng));
  // symmetry forces mean 1/2; sd of Beta(2,2) is sqrt(0.05)
  CHECK_THAT(oracles::mean(draws),
             Catch::Matchers::WithinAbs(0.5, 3.0 * std::sqrt(0.05) / 100.0));
}

TEST_CASE("ratio_of_uniforms_sample: equicorrelation conditional density") {
  // the rho conditional with hand-fixed eta, mu, tau2, n, written out
  // directly from its formula
  const std::vector<double> eta = {0.4, -1.1, 2.0, 0.9, -0.3};
  const double mu = 0.3, tau2 = 1.2;
  const double nn = 4.0;  // n+1 = 5 components
  double S1 = 0.0, S2 = 0.0;
  for (double e : eta) {
    S1 += (e - mu) * (e - mu);
    S2 += (e - mu);
  }
  LogDensity target;
  target.support_lo = 0.0;
  target.support_hi = 1.0;
  target.log_f = [=](double r) {
    if (!(r > 0.0 && r < 1.0)) return -kInf;
    const double om = 1.0 - r, cp = 1.0 + nn * r;
    return -0.5 * nn * std::log(om) - 0.5 * std::log(cp) -
           S1 / (2.0 * tau2 * om) + r * S2 * S2 / (2.0 * tau2 * om * cp);
  };

  RngStream rng(203);
  std::vector<double> draws;
  draws.reserve(50000);
  for (int i = 0; i < 50000; ++i)
    draws.push_back(ratio_of_uniforms_sample(target, rng));

  const auto expected = oracles::grid_density(target.log_f, 0.0, 1.0, 512);
  const auto observed = oracles::histogram(draws, 0.0, 1.0, 512);
  CHECK(oracles::total_variation(expected, observed) < 0.05);
}

TEST_CASE("ratio_of_uniforms_sample: contract errors") {
  RngStream rng(204);
  LogDensity unbounded;
  unbounded.log_f = [](double) { return 0.0; };
  CHECK_THROWS_AS(ratio_of_uniforms_sample(unbounded, rng), config_error);

  LogDensity nan_target;
  nan_target.support_lo = 0.0;
  nan_target.support_hi = 1.0;
  nan_target.log_f = [](double x) {
    return x > 0.5 ? std::numeric_limits<double>::quiet_NaN() : 0.0;
  };
  CHECK_THROWS_AS(ratio_of_uniforms_sample(nan_target, rng), numerical_error);
}

TEST_CASE("gamma_sample moments and validation") {
  RngStream rng(301);
  std::vector<double> d1;
  for (int i = 0; i < 10000; ++i) d1.push_back(gamma_sample(1.0, 1.0, rng));
  CHECK_THAT(oracles::mean(d1), Catch::Matchers::WithinAbs(1.0, 0.03));

  // mean = shape/rate = 1.5 * 999 = 1498.5, sd = sqrt(1.5) * 999
  std::vector<double> d2;
  for (int i = 0; i < 10000; ++i)
    d2.push_back(gamma_sample(1.5, 1.0 / 999.0, rng));
  CHECK_THAT(oracles::mean(d2),
             Catch::Matchers::WithinAbs(1498.5, 3.0 * std::sqrt(1.5) * 999.0 / 100.0));

  // sub-unit shapes go through the boost branch
  std::vector<double> d3;
  for (int i = 0; i < 10000; ++i) d3.push_back(gamma_sample(0.5, 2.0, rng));
  CHECK_THAT(oracles::mean(d3),
             Catch::Matchers::WithinAbs(0.25, 3.0 * std::sqrt(0.5) / 2.0 / 100.0));
  for (double v : d3) REQUIRE(v > 0.0);

  CHECK_THROWS_AS(gamma_sample(0.0, 1.0, rng), input_error);
  CHECK_THROWS_AS(gamma_sample(1.0, 0.0, rng), input_error);
}

TEST_CASE("normal_sample distribution and validation") {
  RngStream rng(302);
  std::vector<double> d;
  for (int i = 0; i < 10000; ++i) d.push_back(normal_sample(0.0, 1.0, rng));
  CHECK(oracles::ks_statistic(d, [](double x) { return oracles::normal_cdf(x); }) <
        0.02);

  std::vector<double> d2;
  for (int i = 0; i < 10000; ++i) d2.push_back(normal_sample(5.0, 4.0, rng));
  // sd of the sample variance is roughly sqrt(2/n) * sigma^2
  CHECK_THAT(oracles::variance(d2),
             Catch::Matchers::WithinAbs(4.0, 3.0 * std::sqrt(2.0 / 10000.0) * 4.0));

  CHECK_THROWS_AS(normal_sample(0.0, 0.0, rng), input_error);
  CHECK_THROWS_AS(normal_sample(0.0, -1.0, rng), input_error);
}

TEST_CASE("mvn_sample: identity covariance") {
  RngStream rng(303);
  const Eigen::VectorXd mean = Eigen::VectorXd::Zero(2);
  const Eigen::MatrixXd cov = Eigen::MatrixXd::Identity(2, 2);
  std::vector<double> c0, c1;
  for (int i = 0; i < 10000; ++i) {
    const Eigen::VectorXd x = mvn_sample(mean, cov, rng);
    c0.push_back(x[0]);
    c1.push_back(x[1]);
  }
  for (auto* comp : {&c0, &c1})
    CHECK(oracles::ks_statistic(*comp, [](double x) {
            return oracles::normal_cdf(x);
          }) < 0.02);
}

TEST_CASE("mvn_sample: negative-class covariance from the simulation setup") {
  RngStream rng(304);
  Eigen::VectorXd mean(2);
  mean << 7.0, 8.0;
  Eigen::MatrixXd cov(2, 2);
  cov << 10.0, 3.0, 3.0, 8.0;
  Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(2, 2);
  Eigen::Vector2d msum = Eigen::Vector2d::Zero();
  const int n = 10000;
  std::vector<Eigen::VectorXd> xs;
  for (int i = 0; i < n; ++i) {
    xs.push_back(mvn_sample(mean, cov, rng));
    msum += xs.back();
  }
  const Eigen::Vector2d m = msum / n;
  for (const auto& x : xs) sum += (x - m) * (x - m).transpose();
  const Eigen::MatrixXd sample_cov = sum / (n - 1);
  CHECK((sample_cov - cov).norm() < 0.10 * cov.norm());
}

TEST_CASE("mvn_sample: covariance validation") {
  RngStream rng(305);
  const Eigen::VectorXd mean = Eigen::VectorXd::Zero(2);
  Eigen::MatrixXd asym(2, 2);
  asym << 1.0, 0.5, 0.2, 1.0;
  CHECK_THROWS_AS(mvn_sample(mean, asym, rng), input_error);

  Eigen::MatrixXd indef(2, 2);
  indef << 1.0, 2.0, 2.0, 1.0;
  CHECK_THROWS_AS(mvn_sample(mean, indef, rng), input_error);

  // singular PSD covariance is fine: components coincide
  Eigen::MatrixXd rank1(2, 2);
  rank1 << 1.0, 1.0, 1.0, 1.0;
  const Eigen::VectorXd x = mvn_sample(mean, rank1, rng);
  CHECK_THAT(x[0], Catch::Matchers::WithinAbs(x[1], 1e-12));
}

TEST_CASE("sampler draws are bit-identical for equal rng state") {
  RngStream a(42), b(42);
  for (int i = 0; i < 20; ++i) {
    REQUIRE(gamma_sample(2.5, 0.7, a) == gamma_sample(2.5, 0.7, b));
    REQUIRE(normal_sample(1.0, 2.0, a) == normal_sample(1.0, 2.0, b));
  }
}

TEST_CASE("LogDensity: supplied derivative matches finite differences") {
  const LogDensity t = std_normal_target();
  RngStream rng(44);
  for (int i = 0; i < 20; ++i) {
    const double x = rng.uniform(-3.0, 3.0);
    const double fd = oracles::fd1(t.log_f, x);
    CHECK_THAT(t.dlog_f(x),
               Catch::Matchers::WithinAbs(fd, 1e-5 * std::max(1.0, std::abs(fd))));
  }
}
