#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "mra/error.hpp"
#include "mra/signal_model.hpp"
#include "mra/spectral.hpp"

using namespace mra;

namespace {

double s_b_direct(const RotationDistribution& rho) {
  const int n = 2 * rho.bandwidth() + 1;
  double s = 0.0;
  for (int k = 1; k < n; ++k) {
    s += std::norm(rho.at(k) - rho.at(-(n - k))) * k * (n - k) / n;
  }
  return s;
}

RotationDistribution random_distribution(int b, Rng& rng, double scale) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<Complex> pos(2 * b);
  for (auto& c : pos) c = scale * Complex(u(rng), u(rng));
  return RotationDistribution::from_positive(b, pos);
}

}  // namespace

TEST(ExperimentSignal, UnitModulusRealImage) {
  Rng rng(7);
  const FBImage img = make_experiment_signal_2d(10, 2, rng);
  ASSERT_EQ(img.coeffs().size(), 42);
  for (Eigen::Index i = 0; i < img.coeffs().size(); ++i) {
    EXPECT_NEAR(std::abs(img.coeffs()(i)), 1.0, 1e-15);
  }
  EXPECT_TRUE(img.is_real(0.0));
  EXPECT_TRUE(img.uniform_radial());
}

TEST(ExperimentSignal, BandwidthZeroIsSign) {
  int plus = 0;
  for (int seed = 0; seed < 40; ++seed) {
    Rng rng(seed);
    const FBImage img = make_experiment_signal_2d(0, 1, rng);
    ASSERT_EQ(img.coeffs().size(), 1);
    const Complex c = img.coeffs()(0);
    EXPECT_EQ(c.imag(), 0.0);
    EXPECT_EQ(std::abs(c.real()), 1.0);
    plus += c.real() > 0;
  }
  EXPECT_GT(plus, 0);
  EXPECT_LT(plus, 40);
}

TEST(ExperimentSignal, ConjugateSymmetry) {
  Rng rng(3);
  const FBImage img = make_experiment_signal_2d(2, 1, rng);
  for (int k = -2; k <= 2; ++k) {
    EXPECT_EQ(img.at(-k, 0), std::conj(img.at(k, 0)));
  }
  const TrigSignal sig = make_experiment_signal_1d(4, rng);
  EXPECT_TRUE(sig.is_real(0.0));
}

TEST(ExperimentDistribution, CirculantAndNonnegative) {
  for (int seed = 0; seed < 20; ++seed) {
    Rng rng(seed);
    const auto rho = make_experiment_distribution(10, rng);
    EXPECT_LT(s_b_direct(rho), 1e-12);
    EXPECT_GE(rho.min_density(), -1e-12);
    EXPECT_TRUE(rho.sampleable());
    EXPECT_EQ(rho.at(0), Complex(1.0 / kTwoPi, 0.0));
  }
}

TEST(ExperimentDistribution, FixedPointOfProjection) {
  Rng rng(11);
  const auto rho = make_experiment_distribution(2, rng);
  for (int k = 1; k <= 4; ++k) {
    EXPECT_LT(std::abs(rho.at(k) - rho.at(-(5 - k))), 1e-15);
  }
}

TEST(ExperimentDistribution, PositivityFloorIsMet) {
  Rng rng(5);
  const double floor = 0.2 / kTwoPi;
  const auto rho = make_experiment_distribution(10, rng, floor);
  EXPECT_GE(rho.min_density(), floor - 1e-12);
  // The floor is attained: the shrinkage is the largest admissible.
  EXPECT_NEAR(rho.min_density(), floor, 1e-3 * floor);
}

TEST(ExperimentDistribution, DegenerateFloorThrows) {
  Rng rng(1);
  try {
    make_experiment_distribution(3, rng, 1.0 / kTwoPi);
    FAIL();
  } catch (const MraError& e) {
    EXPECT_EQ(e.kind(), ErrorKind::DegenerateDraw);
  }
}

TEST(RotationDistribution, UniformHasZeroDistance) {
  const auto rho = RotationDistribution::uniform(1);
  EXPECT_EQ(s_b_direct(rho), 0.0);
  EXPECT_NEAR(rho.min_density(), 1.0 / kTwoPi, 1e-15);
  const std::vector<Complex> zeros(2, Complex(0.0, 0.0));
  EXPECT_EQ(RotationDistribution::from_positive(1, zeros).coeffs(), rho.coeffs());
}

TEST(RotationDistribution, FromCoeffsValidates) {
  Eigen::VectorXcd c = RotationDistribution::uniform(1).coeffs();
  c(0) = Complex(0.01, 0.02);
  EXPECT_THROW(RotationDistribution::from_coeffs(1, c), MraError);  // not conjugate symmetric
  c(4) = std::conj(c(0));
  EXPECT_NO_THROW(RotationDistribution::from_coeffs(1, c));
  c(2) = 0.2;
  EXPECT_THROW(RotationDistribution::from_coeffs(1, c), MraError);  // not normalized
}

TEST(RotationDistribution, DensitySynthesis) {
  Rng rng(2);
  const auto rho = random_distribution(3, rng, 0.02);
  for (double theta : {0.0, 0.7, 2.0, 5.9}) {
    Complex s = 0.0;
    for (int k = -6; k <= 6; ++k) s += rho.at(k) * std::polar(1.0, k * theta);
    EXPECT_NEAR(rho.density(theta), s.real(), 1e-14);
  }
  const auto grid = rho.density_grid(64);
  EXPECT_NEAR(grid[10], rho.density(kTwoPi * 10 / 64), 1e-14);
}

TEST(RotationDistribution, RotatedShiftsDensity) {
  Rng rng(4);
  const auto rho = random_distribution(2, rng, 0.03);
  const auto r = rho.rotated(0.9);
  EXPECT_NEAR(r.density(1.3), rho.density(1.3 - 0.9), 1e-14);
  EXPECT_LT((rho.rotated(kTwoPi).coeffs() - rho.coeffs()).norm(), 1e-14);
}

TEST(Perturb, ZeroIsIdentity) {
  Rng rng(8);
  const auto rho = make_experiment_distribution(5, rng);
  EXPECT_EQ(perturb_distribution(rho, 0.0).coeffs(), rho.coeffs());
}

TEST(Perturb, Invertible) {
  Rng rng(9);
  const auto rho = make_experiment_distribution(10, rng);
  const auto back = perturb_distribution(perturb_distribution(rho, 0.37), -0.37);
  EXPECT_LT((back.coeffs() - rho.coeffs()).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Perturb, BandwidthOneDistance) {
  const Complex c(0.05, 0.03);
  const std::vector<Complex> pos{c, std::conj(c)};  // rho[1] = rho[-2]
  const auto rho = RotationDistribution::from_positive(1, pos);
  EXPECT_LT(circulant_distance(rho), 1e-30);
  const double eta = 0.4;
  const auto p = perturb_distribution(rho, eta);
  // Pairs (1,-2) and (2,-1) each contribute 2/3 |c|^2 |e^{i eta} - e^{-i eta sqrt 2}|^2.
  const double expect = 4.0 / 3.0 * std::norm(c) *
                        std::norm(std::polar(1.0, eta) - std::polar(1.0, -eta * std::sqrt(2.0)));
  EXPECT_NEAR(circulant_distance(p), expect, 1e-15);
  EXPECT_NEAR(s_b_direct(p), expect, 1e-15);
}

TEST(Perturb, ExperimentScaleDistance) {
  std::vector<double> s_b;
  for (int seed = 0; seed < 64; ++seed) {
    Rng rng(1000 + seed);
    const auto rho = make_experiment_distribution(10, rng, 0.2 / kTwoPi);
    s_b.push_back(circulant_distance(perturb_distribution(rho, 0.1)));
  }
  std::nth_element(s_b.begin(), s_b.begin() + 32, s_b.end());
  EXPECT_NEAR(s_b[32], 0.0014, 0.2 * 0.0014);
}

TEST(Perturb, MayLoseSampleabilityWithoutError) {
  // (1/2pi)(1 + 0.9 cos t + 0.5 cos 2t) is positive; shifting the relative phase
  // of the two harmonics by pi makes it negative near t = pi.
  const std::vector<Complex> pos{Complex(0.45 / kTwoPi, 0.0), Complex(0.25 / kTwoPi, 0.0)};
  const auto rho = RotationDistribution::from_positive(1, pos);
  ASSERT_TRUE(rho.sampleable());
  const double eta = std::numbers::pi / (2.0 - std::sqrt(2.0));
  const auto p = perturb_distribution(rho, eta);
  EXPECT_FALSE(p.sampleable());
  EXPECT_LT(p.min_density(), 0.0);
}

TEST(Sampling, UniformKolmogorovSmirnov) {
  Rng rng(21);
  auto angles = sample_rotations(RotationDistribution::uniform(3), 100000, rng);
  std::sort(angles.begin(), angles.end());
  double ks = 0.0;
  const double n = static_cast<double>(angles.size());
  for (std::size_t i = 0; i < angles.size(); ++i) {
    const double f = angles[i] / kTwoPi;
    ks = std::max({ks, std::abs(f - i / n), std::abs(f - (i + 1) / n)});
  }
  EXPECT_LT(ks, 0.01);
  EXPECT_GE(angles.front(), 0.0);
  EXPECT_LT(angles.back(), kTwoPi);
}

TEST(Sampling, EmptyRequest) {
  Rng rng(1);
  EXPECT_TRUE(sample_rotations(RotationDistribution::uniform(2), 0, rng).empty());
}

TEST(Sampling, CharacteristicFunctionMatches) {
  Rng rng(33);
  const auto rho = make_experiment_distribution(3, rng);
  const auto angles = sample_rotations(rho, 1000000, rng);
  for (int k = -6; k <= 6; ++k) {
    Complex mean = 0.0;
    for (double phi : angles) mean += std::polar(1.0, -k * phi);
    mean /= static_cast<double>(angles.size());
    EXPECT_LT(std::abs(mean - kTwoPi * rho.at(k)), 5e-3) << "k=" << k;
  }
}

TEST(Sampling, NonSampleableThrows) {
  const std::vector<Complex> pos{Complex(0.4, 0.0), 0.0};
  const auto rho = RotationDistribution::from_positive(1, pos);
  ASSERT_FALSE(rho.sampleable());
  Rng rng(1);
  try {
    sample_rotations(rho, 10, rng);
    FAIL();
  } catch (const MraError& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NotSampleable);
  }
  Eigen::VectorXcd x = Eigen::VectorXcd::Ones(3);
  EXPECT_THROW(generate_observations(TrigSignal(1, x), rho, 5, 0.1, rng), MraError);
}

TEST(Observations, NoiselessRowsAreRotatedCopies) {
  Rng rng(12);
  const TrigSignal x = make_experiment_signal_1d(4, rng);
  const auto batch = generate_observations(x, RotationDistribution::uniform(4), 50, 0.0, rng);
  ASSERT_EQ(batch.size(), 50);
  ASSERT_TRUE(batch.true_angles.has_value());
  for (Eigen::Index i = 0; i < batch.size(); ++i) {
    const double phi = (*batch.true_angles)[static_cast<std::size_t>(i)];
    for (int k = -4; k <= 4; ++k) {
      const Complex y = batch.data(i, k + 4);
      EXPECT_LT(std::abs(y - x.at(k) * std::polar(1.0, -k * phi)), 1e-14);
      EXPECT_EQ(std::abs(y), std::abs(x.at(k) * std::polar(1.0, -k * phi)));
    }
  }
}

TEST(Observations, NoiseVarianceConvention) {
  Rng rng(13);
  const FBImage img(CoeffLayout::uniform(3, 1), Eigen::VectorXcd::Zero(7));
  const auto batch = generate_observations(img, RotationDistribution::uniform(3), 100000, 1.0, rng);
  const double n = static_cast<double>(batch.size());
  for (int k = 0; k <= 3; ++k) {
    const auto col = batch.data.col(k + 3);
    const double vr = col.real().squaredNorm() / n;
    const double vi = col.imag().squaredNorm() / n;
    if (k == 0) {
      EXPECT_NEAR(vr, 1.0, 0.05);
      EXPECT_EQ(vi, 0.0);
    } else {
      EXPECT_NEAR(vr, 0.5, 0.025);
      EXPECT_NEAR(vi, 0.5, 0.025);
    }
  }
}

TEST(Observations, ConjugationRule) {
  Rng rng(14);
  const FBImage img = make_experiment_signal_2d(3, 2, rng);
  const auto rho = make_experiment_distribution(3, rng);
  const auto batch = generate_observations(img, rho, 200, 0.7, rng);
  const auto& layout = batch.layout;
  for (Eigen::Index i = 0; i < batch.size(); ++i) {
    for (int k = 0; k <= 3; ++k) {
      for (int q = 0; q < 2; ++q) {
        EXPECT_EQ(batch.data(i, layout.index(-k, q)), std::conj(batch.data(i, layout.index(k, q))));
      }
    }
  }
}

TEST(Observations, BandwidthMismatchThrows) {
  Rng rng(1);
  const TrigSignal x(2, Eigen::VectorXcd::Ones(5));
  EXPECT_THROW(generate_observations(x, RotationDistribution::uniform(3), 3, 0.1, rng), MraError);
}
