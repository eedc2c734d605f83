#pragma once

#include <Eigen/Core>

#include <complex>
#include <functional>
#include <numbers>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "mra/coeff_layout.hpp"

namespace mra {

using Complex = std::complex<double>;
using Rng = std::mt19937_64;

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;
inline constexpr int kDensityGrid = 8192;

/// 1-D B-bandlimited signal on the circle, stored as x[-B..B].
class TrigSignal {
 public:
  TrigSignal(int bandwidth, Eigen::VectorXcd coeffs);

  int bandwidth() const noexcept { return bandwidth_; }
  const Eigen::VectorXcd& coeffs() const noexcept { return coeffs_; }
  Complex at(int k) const { return coeffs_(k + bandwidth_); }
  CoeffLayout layout() const { return CoeffLayout::one_d(bandwidth_); }
  /// x[-k] == conj(x[k]) within `tol` (absolute).
  bool is_real(double tol = 1e-12) const;

 private:
  int bandwidth_;
  Eigen::VectorXcd coeffs_;
};

/// Density of the rotation angle, stored as rho[-2B..2B] with
/// rho[k] = (1/2pi) * integral rho(theta) e^{-ik theta} dtheta, so that
/// E[e^{-ik phi}] = 2pi rho[k] and rho(theta) = sum_k rho[k] e^{ik theta}.
class RotationDistribution {
 public:
  /// rho[0] = 1/(2pi); `positive` holds rho[1..2B], negatives are conjugates.
  static RotationDistribution from_positive(int bandwidth, std::span<const Complex> positive);
  static RotationDistribution uniform(int bandwidth);
  /// Full coefficient vector; normalization and conjugate symmetry are checked to `tol`.
  static RotationDistribution from_coeffs(int bandwidth, Eigen::VectorXcd coeffs, double tol = 1e-12);

  /// Bandwidth B of the signal this distribution pairs with (coefficients span -2B..2B).
  int bandwidth() const noexcept { return bandwidth_; }
  const Eigen::VectorXcd& coeffs() const noexcept { return coeffs_; }
  Complex at(int k) const { return coeffs_(k + 2 * bandwidth_); }

  double density(double theta) const;
  /// rho(2 pi j / points) for j = 0..points-1.
  std::vector<double> density_grid(int points = kDensityGrid) const;
  double min_density(int points = kDensityGrid) const;
  /// Density is nonnegative (to 1e-12) on the 8192-point grid.
  bool sampleable() const noexcept { return sampleable_; }

  /// Distribution of phi + alpha: rho[k] -> e^{-ik alpha} rho[k].
  RotationDistribution rotated(double alpha) const;

 private:
  RotationDistribution(int bandwidth, Eigen::VectorXcd coeffs, bool check_positivity);

  int bandwidth_;
  Eigen::VectorXcd coeffs_;
  bool sampleable_ = false;
};

/// Bandlimited image in a Fourier-Bessel basis: x[k,q] over the layout's index set.
class FBImage {
 public:
  FBImage(CoeffLayout layout, Eigen::VectorXcd coeffs);

  const CoeffLayout& layout() const noexcept { return layout_; }
  const Eigen::VectorXcd& coeffs() const noexcept { return coeffs_; }
  int bandwidth() const noexcept { return layout_.bandwidth(); }
  Complex at(int k, int q) const { return coeffs_(layout_.index(k, q)); }
  bool is_real(double tol = 1e-12) const;
  bool uniform_radial() const noexcept { return layout_.uniform_radial(); }

 private:
  CoeffLayout layout_;
  Eigen::VectorXcd coeffs_;
};

enum class Representation { OneD, TwoD };

struct ObservationBatch {
  Representation representation = Representation::OneD;
  CoeffLayout layout;
  Eigen::MatrixXcd data;  // one observation per row
  double sigma = 0.0;
  std::optional<std::vector<double>> true_angles;

  Eigen::Index size() const noexcept { return data.rows(); }
};

/// Inverse-CDF sampler over a grid evaluation of the density.
class RotationSampler {
 public:
  explicit RotationSampler(const RotationDistribution& rho, int grid = kDensityGrid);

  double operator()(Rng& rng) const;

 private:
  double step_;
  std::vector<double> cdf_;  // grid + 1 nodes, cdf_.front() == 0, cdf_.back() == 1
};

/// Unit-modulus coefficients with uniform phases, real image (x[0,q] = +-1).
FBImage make_experiment_signal_2d(int bandwidth, int radial, Rng& rng);
/// 1-D analog of make_experiment_signal_2d.
TrigSignal make_experiment_signal_1d(int bandwidth, Rng& rng);

/// Random distribution whose Toeplitz matrix is exactly circulant (S_B = 0),
/// shrunk toward uniform until min density >= tol_pos.
RotationDistribution make_experiment_distribution(int bandwidth, Rng& rng, double tol_pos = 0.0);

/// rho[k] -> e^{i eta sqrt(k)} rho[k] for k = 1..2B.
RotationDistribution perturb_distribution(const RotationDistribution& rho, double eta);

std::vector<double> sample_rotations(const RotationDistribution& rho, std::size_t n, Rng& rng,
                                     int grid = kDensityGrid);

using ObservationSink = std::function<void(const Eigen::VectorXcd& observation, double angle)>;

/// Draws n observations of `coeffs` (laid out per `layout`) one at a time and
/// hands each to `sink`. generate_observations is this with a row-collecting sink.
void stream_observations(const CoeffLayout& layout, const Eigen::VectorXcd& coeffs,
                         const RotationDistribution& rho, std::size_t n, double sigma, Rng& rng,
                         const ObservationSink& sink);

ObservationBatch generate_observations(const TrigSignal& signal, const RotationDistribution& rho,
                                       std::size_t n, double sigma, Rng& rng);
ObservationBatch generate_observations(const FBImage& image, const RotationDistribution& rho,
                                       std::size_t n, double sigma, Rng& rng);

}  // namespace mra
