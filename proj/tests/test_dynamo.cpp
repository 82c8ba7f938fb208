#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "ricciflux/dynamo.hpp"

namespace {

using namespace ricciflux;
using std::numbers::pi;

Vec vec(std::initializer_list<double> xs) {
  Vec v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v(i++) = x;
  return v;
}

Mat random_rotation(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::Matrix3d a;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) a(i, j) = n(rng);
  Eigen::HouseholderQR<Eigen::Matrix3d> qr(a);
  return Mat(Eigen::Matrix3d(qr.householderQ()));
}

TEST(FiniteTimeLyapunov, Examples) {
  const auto none = finite_time_lyapunov(vec({1, 1, 1}), 5.0);
  EXPECT_EQ(none.lambdas.cwiseAbs().maxCoeff(), 0.0);

  const auto s = finite_time_lyapunov(vec({std::exp(2.0), 1.0, std::exp(-2.0)}), 1.0);
  EXPECT_NEAR(s.lambdas(0), 1.0, 1e-15);
  EXPECT_NEAR(s.lambdas(1), 0.0, 1e-15);
  EXPECT_NEAR(s.lambdas(2), -1.0, 1e-15);
  EXPECT_NEAR(s.gammas(0), -1.0, 1e-15);

  const Vec L = vec({3.0, 0.2, 7.0});
  const auto a = finite_time_lyapunov(L, 2.0), b = finite_time_lyapunov(L, 4.0);
  for (int i = 0; i < 3; ++i) EXPECT_DOUBLE_EQ(b.lambdas(i), 0.5 * a.lambdas(i));

  EXPECT_THROW(finite_time_lyapunov(L, 0.0), Error);
  EXPECT_THROW(finite_time_lyapunov(vec({1.0, 0.0}), 1.0), Error);
}

TEST(InfiniteLyapunov, ExactExponentialStretching) {
  std::vector<std::pair<Vec, double>> series;
  for (double t : {10.0, 20.0, 40.0}) series.push_back({vec({std::exp(0.6 * t)}), t});
  const auto lim = infinite_lyapunov(series);
  EXPECT_NEAR(lim[0].estimate, 0.3, 1e-15);
  EXPECT_LT(lim[0].error_bar, 1e-14);
}

TEST(InfiniteLyapunov, ConstantStretchingDecays) {
  double prev = 1e300;
  for (double scale : {1.0, 10.0, 100.0}) {
    std::vector<std::pair<Vec, double>> series;
    for (double t : {10.0, 20.0, 40.0}) series.push_back({vec({5.0}), scale * t});
    const double est = infinite_lyapunov(series)[0].estimate;
    EXPECT_LT(std::abs(est), prev);
    prev = std::abs(est);
  }
  EXPECT_LT(prev, 1e-3);
}

TEST(InfiniteLyapunov, SubexponentialCorrectionBound) {
  std::vector<std::pair<Vec, double>> series;
  for (double t : {10.0, 20.0, 40.0}) series.push_back({vec({std::exp(0.6 * t) * t}), t});
  const auto lim = infinite_lyapunov(series);
  EXPECT_LE(std::abs(lim[0].estimate - 0.3), std::abs(std::log(40.0) / 80.0) + 1e-15);
  EXPECT_GT(lim[0].error_bar, 0.0);
  EXPECT_THROW(infinite_lyapunov({series[0], series[1]}), Error);
  EXPECT_THROW(infinite_lyapunov({series[0], series[2], series[1]}), Error);
}

TEST(MetricFromLyapunov, Examples) {
  const Mat I = Mat::Identity(3, 3);
  EXPECT_LT((metric_from_lyapunov(vec({1, 1, 1}), I) - I).cwiseAbs().maxCoeff(), 1e-16);
  const Mat g = metric_from_lyapunov(vec({4, 1, 1}), I);
  EXPECT_EQ(g(0, 0), 4.0);
  EXPECT_EQ(g(1, 1), 1.0);
  EXPECT_EQ(g(0, 1), 0.0);
  Mat bad = I;
  bad(0, 1) = 1e-6;
  EXPECT_THROW(metric_from_lyapunov(vec({1, 1, 1}), bad), Error);
  EXPECT_THROW(metric_from_lyapunov(vec({1, -1, 1}), I), Error);
}

TEST(MetricFromLyapunov, EigenvaluesRoundTrip) {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> logu(std::log(1e-3), std::log(1e3));
  for (int trial = 0; trial < 200; ++trial) {
    const Vec L = vec({std::exp(logu(rng)), std::exp(logu(rng)), std::exp(logu(rng))});
    const Mat F = random_rotation(rng);
    const auto eig = jacobi_eigen(metric_from_lyapunov(L, F));
    Vec sorted = L;
    std::sort(sorted.data(), sorted.data() + 3);
    const auto back = finite_time_lyapunov(eig.values, 1.0);
    for (int i = 0; i < 3; ++i) {
      EXPECT_LE(std::abs(back.Lambdas(i) - sorted(i)), 1e-12 * sorted(2));
      EXPECT_NEAR(back.lambdas(i), 0.5 * std::log(sorted(i)), 1e-12 * sorted(2) / sorted(i));
    }
  }
}

TEST(DynamoConstraint, Examples) {
  const auto v = dynamo_constraint(FlowField::uniform(-0.1, 0, 0, 1.0), pi / 4, 1.0);
  EXPECT_NEAR(v.margin, 0.9, 1e-15);
  EXPECT_TRUE(v.satisfied);
  EXPECT_TRUE(v.contract_ok);
  EXPECT_TRUE(v.stretch_ok);
  EXPECT_NEAR(v.margin_spectrum, 0.8, 1e-15);

  const auto z = dynamo_constraint(FlowField::uniform(-0.1, 0, 0, 1.0), 0.0, 1.0);
  EXPECT_FALSE(z.satisfied);

  const auto b = dynamo_constraint(FlowField::uniform(0.0, 0, 0, 2.0), pi / 4, 1.0);
  EXPECT_TRUE(b.satisfied);
  EXPECT_NEAR(b.margin, 2.0, 1e-15);
  EXPECT_FALSE(b.contract_ok);

  EXPECT_THROW(dynamo_constraint(FlowField::uniform(-0.1, 0, 0, 1.0), pi / 2, 1.0), Error);
}

TEST(DynamoConstraint, VerdictInvariantUnderPositiveScaling) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int k = 0; k < 200; ++k) {
    const double vr = u(rng), w = 2 * u(rng), th = 1.4 * u(rng), r = 0.1 + std::abs(u(rng));
    const double a = 0.01 + 5.0 * std::abs(u(rng));
    const auto v1 = dynamo_constraint(FlowField::uniform(vr, 0, 0, w), th, r);
    const auto v2 = dynamo_constraint(FlowField::uniform(a * vr, 0, 0, a * w), th, r);
    EXPECT_EQ(v1.satisfied, v2.satisfied);
    EXPECT_EQ(v1.stretch_ok, v2.stretch_ok);
    EXPECT_EQ(v1.contract_ok, v2.contract_ok);
    EXPECT_NEAR(v2.margin, a * v1.margin, 1e-12 * (1 + std::abs(a * v1.margin)));
  }
}

TEST(FieldGrowth, Examples) {
  const auto z = field_growth(FlowField::uniform(0, 0, 0, 3.0), 0.4, 1.0, 10.0);
  EXPECT_EQ(z.rate_theta, 0.0);
  EXPECT_EQ(z.rate_s, 0.0);
  EXPECT_EQ(z.amplification_s, 1.0);

  const auto g = field_growth(FlowField::uniform(-0.1, 0, 0, 2.0), pi / 4, 1.0, 10.0);
  EXPECT_NEAR(g.rate_theta, -0.1, 1e-15);
  EXPECT_NEAR(g.rate_s, -0.3, 1e-15);
  EXPECT_NEAR(g.amplification_theta, std::exp(-1.0), 1e-14);
  EXPECT_NEAR(g.amplification_s, std::exp(-3.0), 1e-14);

  const auto w0 = field_growth(FlowField::uniform(0.7, 0, 0, 0.0), 1.0, 2.0, 1.0);
  EXPECT_EQ(w0.rate_s, w0.rate_theta);
}

TEST(FieldGrowth, RatesOddInRadialVelocity) {
  for (double vr : {0.1, 0.5, 2.0}) {
    const auto p = field_growth(FlowField::uniform(vr, 0, 0, 1.3), 0.6, 0.8, 1.0);
    const auto m = field_growth(FlowField::uniform(-vr, 0, 0, 1.3), 0.6, 0.8, 1.0);
    EXPECT_DOUBLE_EQ(p.rate_theta, -m.rate_theta);
    EXPECT_DOUBLE_EQ(p.rate_s, -m.rate_s);
  }
}

// Direct complex arithmetic, written out independently of the library.
std::complex<double> cl_brute(double eps, double kappa) {
  const std::complex<double> disc = eps * eps * (1 - kappa * kappa) * (1 - kappa * kappa) - 4 * kappa;
  return (std::complex<double>(-eps * (1 + kappa * kappa)) + std::sqrt(disc)) / 2.0;
}

TEST(ChiconeLatushkin, Examples) {
  const auto a = chicone_latushkin_lambda(0.0, 4.0);
  EXPECT_NEAR(a.real(), 0.0, 1e-15);
  EXPECT_NEAR(a.imag(), 2.0, 1e-15);
  EXPECT_NEAR(std::abs(chicone_latushkin_lambda(1.0, 0.0)), 0.0, 1e-15);
  const auto c = chicone_latushkin_lambda(1.0, -4.0);
  EXPECT_NEAR(c.real(), 0.5 * (-17.0 + std::sqrt(241.0)), 1e-14);
  EXPECT_NEAR(c.real(), -0.7379, 1e-4);
  EXPECT_EQ(c.imag(), 0.0);
  for (double eps : {0.0, 0.01, 0.5, 2.0})
    for (double k : {-3.0, -0.5, 0.0, 0.7, 5.0}) EXPECT_LT(std::abs(chicone_latushkin_lambda(eps, k) - cl_brute(eps, k)), 1e-13);
  EXPECT_THROW(chicone_latushkin_lambda(-1e-3, 1.0), Error);
}

TEST(IdealLambda, ExamplesAndContinuity) {
  EXPECT_EQ(ideal_lambda(4.0), std::complex<double>(0.0, 2.0));
  EXPECT_EQ(ideal_lambda(0.0), std::complex<double>(0.0, 0.0));
  EXPECT_EQ(ideal_lambda(-4.0), std::complex<double>(2.0, 0.0));
  for (double k : {1.0, 4.0, 9.0}) EXPECT_LT(std::abs(chicone_latushkin_lambda(1e-8, k) - ideal_lambda(k)), 1e-6);
  for (double k : {-0.5, -4.0, -9.0}) {
    const auto l = chicone_latushkin_lambda(0.0, k);
    EXPECT_EQ(l.imag(), 0.0);
    EXPECT_GT(l.real(), 0.0);
    EXPECT_NEAR(l.real(), std::sqrt(-k), 1e-14);
  }
}

TEST(ChiconeLatushkin, LinearInEpsilonNearIdealLimit) {
  // |lambda_eps - lambda_0| / eps approaches (1 + kappa^2) / 2 as eps -> 0.
  for (double k : {1.0, 2.5, 4.0, 10.0}) {
    const double c3 = std::abs(chicone_latushkin_lambda(1e-3, k) - ideal_lambda(k)) / 1e-3;
    const double c5 = std::abs(chicone_latushkin_lambda(1e-5, k) - ideal_lambda(k)) / 1e-5;
    EXPECT_NEAR(c5, 0.5 * (1 + k * k), 1e-3 * (1 + k * k));
    EXPECT_LT(std::abs(c3 - c5), 0.05 * c5);
  }
}

TEST(FastDynamo, Examples) {
  EXPECT_TRUE(fast_dynamo_condition(10.0, -4.0));
  EXPECT_FALSE(fast_dynamo_condition(10.0, 1.0));
  EXPECT_FALSE(fast_dynamo_condition(1.0, -4.0));
  EXPECT_THROW(fast_dynamo_condition(0.0, -1.0), Error);
  EXPECT_DOUBLE_EQ(epsilon_from_reynolds(50.0), 0.02);
}

TEST(RicciToLyapunov, Examples) {
  const auto z = ricci_to_lyapunov(vec({0, 0, 0}));
  EXPECT_EQ(z.gammas.cwiseAbs().maxCoeff(), 0.0);
  EXPECT_TRUE(z.flagged.empty());
  const auto n = ricci_to_lyapunov(vec({-1, -2, -3}));
  EXPECT_EQ(n.gammas, vec({1, 2, 3}));
  EXPECT_TRUE(n.flagged.empty());
  const auto f = ricci_to_lyapunov(vec({0.5, -1, 0}));
  EXPECT_EQ(f.gammas, vec({-0.5, 1, 0}));
  ASSERT_EQ(f.flagged.size(), 1u);
  EXPECT_EQ(f.flagged[0], 0);
}

}  // namespace
