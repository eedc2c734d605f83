#include "mra/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "mra/error.hpp"

namespace mra {

namespace {

constexpr int kGridPerFrequency = 16;
constexpr int kNewtonSteps = 30;

// Re sum_k c_k e^{ik phi} and its first two derivatives.
struct TrigValue {
  double f, df, d2f;
};

TrigValue evaluate(const std::vector<Complex>& c, int bandwidth, double phi) {
  TrigValue v{0.0, 0.0, 0.0};
  for (int k = -bandwidth; k <= bandwidth; ++k) {
    const Complex term = c[static_cast<std::size_t>(k + bandwidth)] * std::polar(1.0, k * phi);
    v.f += term.real();
    v.df += -k * term.imag();
    v.d2f += -static_cast<double>(k) * k * term.real();
  }
  return v;
}

double wrap(double phi) {
  phi = std::fmod(phi, kTwoPi);
  if (phi < 0.0) phi += kTwoPi;
  if (phi >= kTwoPi) phi = 0.0;
  return phi;
}

}  // namespace

ErrorReport recovery_error(const CoeffLayout& layout, const Eigen::VectorXcd& estimate,
                           const Eigen::VectorXcd& truth) {
  if (estimate.size() != layout.size() || truth.size() != layout.size()) {
    throw MraError(ErrorKind::InvalidArgument, "estimate and truth shapes differ");
  }
  const double norm = truth.squaredNorm();
  if (!(norm > 0.0)) {
    throw MraError(ErrorKind::InvalidArgument, "truth has zero norm");
  }
  const int bandwidth = layout.bandwidth();
  // ||est - e^{-ik phi} x||^2 = const - 2 Re sum_k e^{ik phi} c_k.
  std::vector<Complex> c(2 * static_cast<std::size_t>(bandwidth) + 1, Complex(0.0));
  for (Eigen::Index i = 0; i < layout.size(); ++i) {
    c[static_cast<std::size_t>(layout.angular(i) + bandwidth)] += std::conj(truth(i)) * estimate(i);
  }

  const int grid = kGridPerFrequency * (2 * bandwidth + 1);
  double phi = 0.0;
  double best = -std::numeric_limits<double>::infinity();
  for (int j = 0; j < grid; ++j) {
    const double t = kTwoPi * j / grid;
    const double f = evaluate(c, bandwidth, t).f;
    if (f > best) {
      best = f;
      phi = t;
    }
  }
  for (int step = 0; step < kNewtonSteps; ++step) {
    const TrigValue v = evaluate(c, bandwidth, phi);
    if (!(v.d2f < 0.0)) break;
    const double next = phi - v.df / v.d2f;
    if (evaluate(c, bandwidth, next).f < v.f) break;
    phi = next;
  }
  phi = wrap(phi);

  ErrorReport report;
  report.best_angle = phi;
  report.aligned_estimate.resize(estimate.size());
  for (Eigen::Index i = 0; i < estimate.size(); ++i) {
    report.aligned_estimate(i) = estimate(i) * std::polar(1.0, layout.angular(i) * phi);
  }
  report.relative_error = (report.aligned_estimate - truth).squaredNorm() / norm;
  return report;
}

ErrorReport recovery_error(const TrigSignal& estimate, const TrigSignal& truth) {
  if (estimate.bandwidth() != truth.bandwidth()) {
    throw MraError(ErrorKind::InvalidArgument, "estimate and truth shapes differ");
  }
  return recovery_error(truth.layout(), estimate.coeffs(), truth.coeffs());
}

ErrorReport recovery_error(const FBImage& estimate, const FBImage& truth) {
  if (!(estimate.layout() == truth.layout())) {
    throw MraError(ErrorKind::InvalidArgument, "estimate and truth shapes differ");
  }
  return recovery_error(truth.layout(), estimate.coeffs(), truth.coeffs());
}

ErrorReport recovery_error(const RotationDistribution& estimate,
                           const RotationDistribution& truth) {
  if (estimate.bandwidth() != truth.bandwidth()) {
    throw MraError(ErrorKind::InvalidArgument, "estimate and truth shapes differ");
  }
  return recovery_error(CoeffLayout::one_d(2 * truth.bandwidth()), estimate.coeffs(),
                        truth.coeffs());
}

// ---------------------------------------------------------------------------

double snr(const Eigen::VectorXcd& coeffs, double sigma) {
  if (!(sigma > 0.0)) throw MraError(ErrorKind::InvalidArgument, "sigma must be positive");
  if (coeffs.size() == 0) throw MraError(ErrorKind::EmptyInput, "empty signal");
  return coeffs.squaredNorm() / (static_cast<double>(coeffs.size()) * sigma * sigma);
}

double snr(const TrigSignal& signal, double sigma) { return snr(signal.coeffs(), sigma); }
double snr(const FBImage& image, double sigma) { return snr(image.coeffs(), sigma); }

double sigma_for_snr(const Eigen::VectorXcd& coeffs, double target_snr) {
  if (!(target_snr > 0.0)) throw MraError(ErrorKind::InvalidArgument, "target SNR must be positive");
  if (coeffs.size() == 0) throw MraError(ErrorKind::EmptyInput, "empty signal");
  return std::sqrt(coeffs.squaredNorm() / (static_cast<double>(coeffs.size()) * target_snr));
}

double sigma_for_snr(const TrigSignal& signal, double target_snr) {
  return sigma_for_snr(signal.coeffs(), target_snr);
}
double sigma_for_snr(const FBImage& image, double target_snr) {
  return sigma_for_snr(image.coeffs(), target_snr);
}

// ---------------------------------------------------------------------------

double percentile(std::span<const double> values, double p) {
  if (values.empty()) throw MraError(ErrorKind::EmptyInput, "percentile of an empty set");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  p = std::clamp(p, 0.0, 1.0);
  const double pos = p * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

Aggregate aggregate(std::span<const double> errors, double margin, MarginMode mode) {
  if (errors.empty()) throw MraError(ErrorKind::EmptyInput, "nothing to aggregate");
  Aggregate out;
  out.median = percentile(errors, 0.5);
  if (mode == MarginMode::PercentileBand) {
    out.lower = percentile(errors, 0.5 - margin);
    out.upper = percentile(errors, 0.5 + margin);
  } else {
    out.lower = out.median * (1.0 - margin);
    out.upper = out.median * (1.0 + margin);
  }
  return out;
}

}  // namespace mra
