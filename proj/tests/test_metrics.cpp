#include <gtest/gtest.h>

#include <numeric>

#include "mra/error.hpp"
#include "mra/metrics.hpp"
#include "test_util.hpp"

using namespace mra;
using namespace mra::test;

namespace {

Eigen::VectorXcd rotate(const CoeffLayout& layout, const Eigen::VectorXcd& x, double phi) {
  Eigen::VectorXcd out(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) out(i) = x(i) * std::polar(1.0, -layout.angular(i) * phi);
  return out;
}

double dense_grid_error(const CoeffLayout& layout, const Eigen::VectorXcd& est,
                        const Eigen::VectorXcd& truth, int points) {
  // Recurrence on e^{ik phi} keeps the 10^6-point scan cheap.
  const int b = layout.bandwidth();
  std::vector<Complex> c(2 * b + 1, 0.0);
  for (Eigen::Index i = 0; i < layout.size(); ++i) c[layout.angular(i) + b] += std::conj(truth(i)) * est(i);
  const double base = est.squaredNorm() + truth.squaredNorm();
  double best = std::numeric_limits<double>::infinity();
  for (int j = 0; j < points; ++j) {
    const double phi = kTwoPi * j / points;
    double g = 0.0;
    for (int k = -b; k <= b; ++k) g += (c[k + b] * std::polar(1.0, k * phi)).real();
    best = std::min(best, base - 2.0 * g);
  }
  return best / truth.squaredNorm();
}

}  // namespace

TEST(RecoveryError, IdentityIsZero) {
  Rng rng(1);
  const TrigSignal x = random_signal(5, rng);
  const auto r = recovery_error(x, x);
  EXPECT_EQ(r.relative_error, 0.0);
  EXPECT_EQ(r.best_angle, 0.0);
}

TEST(RecoveryError, GaugeInvariance) {
  Rng rng(2);
  const FBImage img = random_image(4, 2, rng);
  const FBImage moved(img.layout(), rotate(img.layout(), img.coeffs(), 0.3));
  const auto r = recovery_error(moved, img);
  EXPECT_LE(r.relative_error, 1e-12);
  EXPECT_NEAR(r.best_angle, 0.3, 1e-9);
  EXPECT_LT((r.aligned_estimate - img.coeffs()).norm(), 1e-10);
}

TEST(RecoveryError, MatchesDenseGrid) {
  Rng rng(3);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    const int b = 5;
    const auto layout = CoeffLayout::one_d(b);
    const Eigen::VectorXcd x = random_coeffs(layout, rng);
    Eigen::VectorXcd est = rotate(layout, x, 1.7 * trial);
    for (Eigen::Index i = 0; i < est.size(); ++i) est(i) += 0.4 * Complex(g(rng), g(rng));
    const double fine = recovery_error(layout, est, x).relative_error;
    const int points = trial < 5 ? 1000000 : 100000;
    const double brute = dense_grid_error(layout, est, x, points);
    EXPECT_LE(fine, brute + 1e-9);
    if (trial < 5) EXPECT_NEAR(fine, brute, 1e-9 * std::max(1.0, brute));
  }
}

TEST(RecoveryError, InvariantUnderJointRotation) {
  Rng rng(4);
  const auto layout = CoeffLayout::uniform(3, 2);
  const Eigen::VectorXcd x = random_coeffs(layout, rng);
  const Eigen::VectorXcd est = random_coeffs(layout, rng);
  const double a = recovery_error(layout, est, x).relative_error;
  const double b =
      recovery_error(layout, rotate(layout, est, 2.2), rotate(layout, x, 2.2)).relative_error;
  EXPECT_NEAR(a, b, 1e-12);
}

TEST(RecoveryError, NeverAboveUnaligned) {
  Rng rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const auto layout = CoeffLayout::one_d(3);
    const Eigen::VectorXcd x = random_coeffs(layout, rng);
    const Eigen::VectorXcd est = random_coeffs(layout, rng);
    const auto r = recovery_error(layout, est, x);
    EXPECT_LE(r.relative_error, (est - x).squaredNorm() / x.squaredNorm() + 1e-15);
    EXPECT_NEAR(r.relative_error, (r.aligned_estimate - x).squaredNorm() / x.squaredNorm(), 1e-12);
    EXPECT_GE(r.best_angle, 0.0);
    EXPECT_LT(r.best_angle, kTwoPi);
  }
}

TEST(RecoveryError, ZeroTruthThrows) {
  const auto layout = CoeffLayout::one_d(1);
  EXPECT_THROW(recovery_error(layout, Eigen::VectorXcd::Ones(3), Eigen::VectorXcd::Zero(3)),
               MraError);
}

TEST(Snr, ExperimentImage) {
  Rng rng(6);
  const FBImage img = make_experiment_signal_2d(10, 2, rng);
  EXPECT_NEAR(snr(img, 1.0), 1.0, 1e-15);
  EXPECT_NEAR(snr(img, 0.1), 100.0, 1e-11);
  EXPECT_NEAR(sigma_for_snr(img, 100.0), 0.1, 1e-15);
  EXPECT_NEAR(sigma_for_snr(img, 1.0), 1.0, 1e-15);
  const FBImage scaled(img.layout(), 3.0 * img.coeffs());
  EXPECT_NEAR(snr(scaled, 0.7), 9.0 * snr(img, 0.7), 1e-12);
}

TEST(Snr, RoundTrip) {
  Rng rng(7);
  const TrigSignal x = random_signal(4, rng);
  for (double s : {0.1, 1.0, 100.0}) EXPECT_NEAR(snr(x, sigma_for_snr(x, s)), s, 1e-12 * s);
  EXPECT_THROW(snr(x, 0.0), MraError);
  EXPECT_THROW(sigma_for_snr(x, -1.0), MraError);
}

TEST(Aggregate, PercentileBand) {
  std::vector<double> v(100);
  std::iota(v.begin(), v.end(), 1.0);
  const auto a = aggregate(v, 0.2);
  EXPECT_NEAR(a.median, 50.5, 1e-12);
  EXPECT_NEAR(a.lower, 30.7, 1e-12);
  EXPECT_NEAR(a.upper, 70.3, 1e-12);
}

TEST(Aggregate, Degenerate) {
  const std::vector<double> c(7, 2.5);
  const auto a = aggregate(c);
  EXPECT_EQ(a.median, 2.5);
  EXPECT_EQ(a.lower, 2.5);
  EXPECT_EQ(a.upper, 2.5);
  const std::vector<double> one{4.0};
  const auto b = aggregate(one);
  EXPECT_EQ(b.lower, 4.0);
  EXPECT_EQ(b.upper, 4.0);
  EXPECT_THROW(aggregate(std::vector<double>{}), MraError);
}

TEST(Aggregate, RelativeToMedian) {
  const std::vector<double> v{1.0, 2.0, 3.0};
  const auto a = aggregate(v, 0.2, MarginMode::RelativeToMedian);
  EXPECT_DOUBLE_EQ(a.lower, 1.6);
  EXPECT_DOUBLE_EQ(a.upper, 2.4);
}
