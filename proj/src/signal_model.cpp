#include "mra/signal_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "mra/error.hpp"

namespace mra {

namespace {

constexpr double kSampleTolerance = 1e-12;

void require(bool ok, const char* what) {
  if (!ok) throw MraError(ErrorKind::InvalidArgument, what);
}

bool conj_symmetric(const CoeffLayout& layout, const Eigen::VectorXcd& c, double tol) {
  for (Eigen::Index i = 0; i < layout.size(); ++i) {
    const int k = layout.angular(i);
    if (k < 0) continue;
    const Eigen::Index mirror = layout.index(-k, layout.radial_index(i));
    if (std::abs(c(i) - std::conj(c(mirror))) > tol) return false;
  }
  return true;
}

// rho(2 pi j / points) from the positive half of the spectrum, using an exact
// table of roots of unity rather than repeated multiplication.
std::vector<double> evaluate_density(const Eigen::VectorXcd& coeffs, int bandwidth, int points) {
  require(points > 0, "density grid must be positive");
  std::vector<Complex> roots(static_cast<std::size_t>(points));
  for (int m = 0; m < points; ++m) {
    roots[static_cast<std::size_t>(m)] = std::polar(1.0, kTwoPi * m / points);
  }
  const int top = 2 * bandwidth;
  const double dc = coeffs(top).real();
  std::vector<double> out(static_cast<std::size_t>(points), dc);
  for (int k = 1; k <= top; ++k) {
    const Complex c = coeffs(top + k);
    const long long kk = k;
    for (int j = 0; j < points; ++j) {
      const auto m = static_cast<std::size_t>((kk * j) % points);
      out[static_cast<std::size_t>(j)] += 2.0 * (c * roots[m]).real();
    }
  }
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------

TrigSignal::TrigSignal(int bandwidth, Eigen::VectorXcd coeffs)
    : bandwidth_(bandwidth), coeffs_(std::move(coeffs)) {
  require(bandwidth_ >= 0, "bandwidth must be nonnegative");
  require(coeffs_.size() == 2 * bandwidth_ + 1, "signal needs 2B+1 coefficients");
}

bool TrigSignal::is_real(double tol) const {
  return conj_symmetric(layout(), coeffs_, tol);
}

// ---------------------------------------------------------------------------

RotationDistribution::RotationDistribution(int bandwidth, Eigen::VectorXcd coeffs,
                                           bool check_positivity)
    : bandwidth_(bandwidth), coeffs_(std::move(coeffs)) {
  if (check_positivity) {
    sampleable_ = min_density() >= -kSampleTolerance;
  }
}

RotationDistribution RotationDistribution::from_positive(int bandwidth,
                                                         std::span<const Complex> positive) {
  require(bandwidth >= 0, "bandwidth must be nonnegative");
  require(positive.size() == 2 * static_cast<std::size_t>(bandwidth),
          "expected 2B positive-frequency coefficients");
  const int top = 2 * bandwidth;
  Eigen::VectorXcd c(2 * top + 1);
  c(top) = 1.0 / kTwoPi;
  for (int k = 1; k <= top; ++k) {
    c(top + k) = positive[static_cast<std::size_t>(k - 1)];
    c(top - k) = std::conj(c(top + k));
  }
  return RotationDistribution(bandwidth, std::move(c), true);
}

RotationDistribution RotationDistribution::uniform(int bandwidth) {
  std::vector<Complex> zeros(2 * static_cast<std::size_t>(std::max(bandwidth, 0)));
  return from_positive(bandwidth, zeros);
}

RotationDistribution RotationDistribution::from_coeffs(int bandwidth, Eigen::VectorXcd coeffs,
                                                       double tol) {
  require(bandwidth >= 0, "bandwidth must be nonnegative");
  require(coeffs.size() == 4 * bandwidth + 1, "distribution needs 4B+1 coefficients");
  const int top = 2 * bandwidth;
  require(std::abs(coeffs(top) - Complex(1.0 / kTwoPi, 0.0)) <= tol,
          "distribution must satisfy rho[0] = 1/(2pi)");
  for (int k = 1; k <= top; ++k) {
    require(std::abs(coeffs(top - k) - std::conj(coeffs(top + k))) <= tol,
            "distribution must be conjugate symmetric");
  }
  return RotationDistribution(bandwidth, std::move(coeffs), true);
}

double RotationDistribution::density(double theta) const {
  const int top = 2 * bandwidth_;
  double value = coeffs_(top).real();
  for (int k = 1; k <= top; ++k) {
    value += 2.0 * (coeffs_(top + k) * std::polar(1.0, k * theta)).real();
  }
  return value;
}

std::vector<double> RotationDistribution::density_grid(int points) const {
  return evaluate_density(coeffs_, bandwidth_, points);
}

double RotationDistribution::min_density(int points) const {
  const auto grid = density_grid(points);
  return *std::min_element(grid.begin(), grid.end());
}

RotationDistribution RotationDistribution::rotated(double alpha) const {
  const int top = 2 * bandwidth_;
  Eigen::VectorXcd c = coeffs_;
  for (int k = 1; k <= top; ++k) {
    c(top + k) = coeffs_(top + k) * std::polar(1.0, -k * alpha);
    c(top - k) = std::conj(c(top + k));
  }
  // A rotation shifts the density, so its sign pattern carries over.
  RotationDistribution out(bandwidth_, std::move(c), false);
  out.sampleable_ = sampleable_;
  return out;
}

// ---------------------------------------------------------------------------

FBImage::FBImage(CoeffLayout layout, Eigen::VectorXcd coeffs)
    : layout_(std::move(layout)), coeffs_(std::move(coeffs)) {
  require(coeffs_.size() == layout_.size(), "image needs |I| coefficients");
}

bool FBImage::is_real(double tol) const { return conj_symmetric(layout_, coeffs_, tol); }

// ---------------------------------------------------------------------------

RotationSampler::RotationSampler(const RotationDistribution& rho, int grid)
    : step_(kTwoPi / grid) {
  if (!rho.sampleable()) {
    throw MraError(ErrorKind::NotSampleable, "rotation distribution has negative density");
  }
  auto values = rho.density_grid(grid);
  for (double& v : values) v = std::max(v, 0.0);
  cdf_.resize(values.size() + 1);
  cdf_[0] = 0.0;
  for (std::size_t j = 0; j < values.size(); ++j) {
    const double next = values[(j + 1) % values.size()];
    cdf_[j + 1] = cdf_[j] + 0.5 * step_ * (values[j] + next);
  }
  const double total = cdf_.back();
  if (!(total > 0.0)) {
    throw MraError(ErrorKind::NotSampleable, "rotation distribution has no mass");
  }
  for (double& c : cdf_) c /= total;
  cdf_.back() = 1.0;
}

double RotationSampler::operator()(Rng& rng) const {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const double u = unif(rng);
  // First node with cdf > u; the bin before it has positive mass.
  const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
  const auto hi = static_cast<std::size_t>(std::min<std::ptrdiff_t>(
      std::max<std::ptrdiff_t>(it - cdf_.begin(), 1), static_cast<std::ptrdiff_t>(cdf_.size()) - 1));
  const std::size_t lo = hi - 1;
  const double width = cdf_[hi] - cdf_[lo];
  const double frac = width > 0.0 ? (u - cdf_[lo]) / width : 0.0;
  double theta = (static_cast<double>(lo) + frac) * step_;
  if (theta >= kTwoPi) theta = 0.0;
  return theta;
}

// ---------------------------------------------------------------------------

FBImage make_experiment_signal_2d(int bandwidth, int radial, Rng& rng) {
  require(bandwidth >= 0 && radial >= 1, "need B >= 0 and Q >= 1");
  const auto layout = CoeffLayout::uniform(bandwidth, radial);
  Eigen::VectorXcd c(layout.size());
  std::uniform_real_distribution<double> phase(0.0, kTwoPi);
  std::bernoulli_distribution coin(0.5);
  for (int q = 0; q < radial; ++q) {
    c(layout.index(0, q)) = coin(rng) ? 1.0 : -1.0;
  }
  for (int k = 1; k <= bandwidth; ++k) {
    for (int q = 0; q < radial; ++q) {
      const Complex v = std::polar(1.0, phase(rng));
      c(layout.index(k, q)) = v;
      c(layout.index(-k, q)) = std::conj(v);
    }
  }
  return FBImage(layout, std::move(c));
}

TrigSignal make_experiment_signal_1d(int bandwidth, Rng& rng) {
  const FBImage image = make_experiment_signal_2d(bandwidth, 1, rng);
  return TrigSignal(bandwidth, image.coeffs());
}

RotationDistribution make_experiment_distribution(int bandwidth, Rng& rng, double tol_pos) {
  require(bandwidth >= 1, "need B >= 1");
  const int top = 2 * bandwidth;
  const int n = top + 1;
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<Complex> drawn(static_cast<std::size_t>(top));
  for (auto& c : drawn) {
    const double re = unif(rng);
    const double im = unif(rng);
    c = Complex(re, im);
  }
  auto coeff = [&](int k) {  // drawn coefficient at k in [-2B, 2B] \ {0}
    return k > 0 ? drawn[static_cast<std::size_t>(k - 1)]
                 : std::conj(drawn[static_cast<std::size_t>(-k - 1)]);
  };
  // Replace each coefficient by the nearest-circulant first column, which
  // satisfies rho[k] = rho[-(2B+1-k)] exactly.
  std::vector<Complex> circ(static_cast<std::size_t>(top));
  for (int k = 1; k <= top; ++k) {
    circ[static_cast<std::size_t>(k - 1)] =
        (static_cast<double>(k) * coeff(-(n - k)) + static_cast<double>(n - k) * coeff(k)) /
        static_cast<double>(n);
  }

  // rho = rho0 + gamma * f with f the non-DC part; the constraint is linear in gamma.
  const double rho0 = 1.0 / kTwoPi;
  if (!(tol_pos < rho0)) {
    throw MraError(ErrorKind::DegenerateDraw, "positivity floor at or above the uniform density");
  }
  auto shape = RotationDistribution::from_positive(bandwidth, circ).density_grid();
  double gamma = 1.0;
  for (double value : shape) {
    const double f = value - rho0;
    if (f < 0.0) gamma = std::min(gamma, (rho0 - tol_pos) / -f);
  }
  if (!(gamma > 1e-6)) {
    throw MraError(ErrorKind::DegenerateDraw, "no shrinkage factor achieves positivity");
  }
  for (auto& c : circ) c *= gamma;
  return RotationDistribution::from_positive(bandwidth, circ);
}

RotationDistribution perturb_distribution(const RotationDistribution& rho, double eta) {
  const int top = 2 * rho.bandwidth();
  std::vector<Complex> positive(static_cast<std::size_t>(top));
  for (int k = 1; k <= top; ++k) {
    positive[static_cast<std::size_t>(k - 1)] =
        std::polar(1.0, eta * std::sqrt(static_cast<double>(k))) * rho.at(k);
  }
  return RotationDistribution::from_positive(rho.bandwidth(), positive);
}

std::vector<double> sample_rotations(const RotationDistribution& rho, std::size_t n, Rng& rng,
                                     int grid) {
  if (!rho.sampleable()) {
    throw MraError(ErrorKind::NotSampleable, "rotation distribution has negative density");
  }
  std::vector<double> out;
  if (n == 0) return out;
  const RotationSampler sampler(rho, grid);
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(sampler(rng));
  return out;
}

void stream_observations(const CoeffLayout& layout, const Eigen::VectorXcd& coeffs,
                         const RotationDistribution& rho, std::size_t n, double sigma, Rng& rng,
                         const ObservationSink& sink) {
  require(coeffs.size() == layout.size(), "coefficients do not match layout");
  require(rho.bandwidth() == layout.bandwidth(), "signal and distribution bandwidths differ");
  require(sigma >= 0.0, "sigma must be nonnegative");
  if (n == 0) return;
  const RotationSampler sampler(rho);
  std::normal_distribution<double> normal(0.0, 1.0);
  const int bandwidth = layout.bandwidth();
  const double half = sigma / std::sqrt(2.0);
  std::vector<Complex> phase(static_cast<std::size_t>(bandwidth) + 1);
  Eigen::VectorXcd y(layout.size());
  for (std::size_t i = 0; i < n; ++i) {
    const double phi = sampler(rng);
    for (int k = 0; k <= bandwidth; ++k) {
      phase[static_cast<std::size_t>(k)] = std::polar(1.0, -k * phi);
    }
    for (int q = 0; q < layout.radial(0); ++q) {
      const Eigen::Index idx = layout.offset(0) + q;
      y(idx) = coeffs(idx) + sigma * normal(rng);
    }
    for (int k = 1; k <= bandwidth; ++k) {
      const Complex rot = phase[static_cast<std::size_t>(k)];
      const Eigen::Index pos = layout.offset(k);
      const Eigen::Index neg = layout.offset(-k);
      for (int q = 0; q < layout.radial(k); ++q) {
        const double re = normal(rng);
        const double im = normal(rng);
        const Complex eps(half * re, half * im);
        y(pos + q) = coeffs(pos + q) * rot + eps;
        y(neg + q) = coeffs(neg + q) * std::conj(rot) + std::conj(eps);
      }
    }
    sink(y, phi);
  }
}

namespace {

ObservationBatch collect(Representation rep, const CoeffLayout& layout,
                         const Eigen::VectorXcd& coeffs, const RotationDistribution& rho,
                         std::size_t n, double sigma, Rng& rng) {
  ObservationBatch batch;
  batch.representation = rep;
  batch.layout = layout;
  batch.sigma = sigma;
  batch.data.resize(static_cast<Eigen::Index>(n), layout.size());
  std::vector<double> angles;
  angles.reserve(n);
  Eigen::Index row = 0;
  stream_observations(layout, coeffs, rho, n, sigma, rng,
                      [&](const Eigen::VectorXcd& y, double phi) {
                        batch.data.row(row++) = y.transpose();
                        angles.push_back(phi);
                      });
  batch.true_angles = std::move(angles);
  return batch;
}

}  // namespace

ObservationBatch generate_observations(const TrigSignal& signal, const RotationDistribution& rho,
                                       std::size_t n, double sigma, Rng& rng) {
  return collect(Representation::OneD, signal.layout(), signal.coeffs(), rho, n, sigma, rng);
}

ObservationBatch generate_observations(const FBImage& image, const RotationDistribution& rho,
                                       std::size_t n, double sigma, Rng& rng) {
  return collect(Representation::TwoD, image.layout(), image.coeffs(), rho, n, sigma, rng);
}

}  // namespace mra
