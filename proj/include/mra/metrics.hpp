#pragma once

#include <Eigen/Core>

#include <span>

#include "mra/coeff_layout.hpp"
#include "mra/signal_model.hpp"

namespace mra {

struct ErrorReport {
  double relative_error = 0.0;       // min_phi ||est - e^{-ik phi} x||^2 / ||x||^2
  double best_angle = 0.0;           // minimizing phi in [0, 2pi)
  Eigen::VectorXcd aligned_estimate; // e^{ik phi} est, in the truth's frame
};

/// Rotation-aligned relative squared error, minimized over continuous phi.
ErrorReport recovery_error(const CoeffLayout& layout, const Eigen::VectorXcd& estimate,
                           const Eigen::VectorXcd& truth);
ErrorReport recovery_error(const TrigSignal& estimate, const TrigSignal& truth);
ErrorReport recovery_error(const FBImage& estimate, const FBImage& truth);
/// Treats rho[-2B..2B] as a 2B-bandlimited signal.
ErrorReport recovery_error(const RotationDistribution& estimate, const RotationDistribution& truth);

/// Total in-band signal power over total in-band noise power.
double snr(const Eigen::VectorXcd& coeffs, double sigma);
double snr(const TrigSignal& signal, double sigma);
double snr(const FBImage& image, double sigma);

double sigma_for_snr(const Eigen::VectorXcd& coeffs, double target_snr);
double sigma_for_snr(const TrigSignal& signal, double target_snr);
double sigma_for_snr(const FBImage& image, double target_snr);

enum class MarginMode {
  PercentileBand,   // percentiles 0.5 -/+ margin
  RelativeToMedian, // median * (1 -/+ margin)
};

struct Aggregate {
  double median = 0.0;
  double lower = 0.0;
  double upper = 0.0;
};

/// Linear-interpolation percentile of `values`, p in [0, 1].
double percentile(std::span<const double> values, double p);
Aggregate aggregate(std::span<const double> errors, double margin = 0.2,
                    MarginMode mode = MarginMode::PercentileBand);

}  // namespace mra
