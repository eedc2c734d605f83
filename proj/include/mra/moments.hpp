#pragma once

#include <Eigen/Core>

#include "mra/signal_model.hpp"

namespace mra {

/// First and second moments of the observations, with the noise level they carry.
struct MomentPair {
  Eigen::VectorXcd m1;
  Eigen::MatrixXcd m2;  // Hermitian
  double sigma = 0.0;
  bool debiased = false;

  Eigen::Index dim() const noexcept { return m1.size(); }
};

/// M1[k] = 2pi x[k] rho[k],  M2[k1,k2] = 2pi x[k1] conj(x[k2]) rho[k1-k2] + sigma^2 [k1 == k2].
MomentPair population_moments_1d(const TrigSignal& signal, const RotationDistribution& rho,
                                 double sigma);
/// Block form of the above: every (k1,q1),(k2,q2) entry uses rho[k1-k2].
MomentPair population_moments_2d(const FBImage& image, const RotationDistribution& rho,
                                 double sigma);
/// Layout-generic closed form behind both of the above.
MomentPair population_moments(const CoeffLayout& layout, const Eigen::VectorXcd& coeffs,
                              const RotationDistribution& rho, double sigma);

/// Streaming accumulator for (1/n) sum y and (1/n) sum y y^*.
///
/// Observations are buffered into column blocks and folded in with a Hermitian
/// rank-k update, so the sum order depends only on the order of `add` calls.
class MomentAccumulator {
 public:
  explicit MomentAccumulator(Eigen::Index dim, Eigen::Index block = 256);

  void add(const Eigen::VectorXcd& y);
  std::size_t count() const noexcept { return count_; }
  MomentPair finalize(double sigma);

 private:
  void flush();

  Eigen::Index dim_;
  Eigen::MatrixXcd buffer_;
  Eigen::Index filled_ = 0;
  std::size_t count_ = 0;
  Eigen::VectorXcd sum1_;
  Eigen::MatrixXcd sum2_;  // lower triangle only until finalize
};

MomentPair empirical_moments(const ObservationBatch& batch);

/// Empirical moments of n fresh observations without materializing them.
MomentPair streamed_moments(const CoeffLayout& layout, const Eigen::VectorXcd& coeffs,
                            const RotationDistribution& rho, std::size_t n, double sigma, Rng& rng);

/// M2 <- M2 - sigma^2 I, then Hermitian re-symmetrization.
MomentPair debias(const MomentPair& m);

}  // namespace mra
