#include "mra/moments.hpp"

#include <Eigen/Dense>

#include "mra/error.hpp"

namespace mra {

MomentPair population_moments(const CoeffLayout& layout, const Eigen::VectorXcd& coeffs,
                              const RotationDistribution& rho, double sigma) {
  if (coeffs.size() != layout.size()) {
    throw MraError(ErrorKind::InvalidArgument, "coefficients do not match layout");
  }
  if (rho.bandwidth() != layout.bandwidth()) {
    throw MraError(ErrorKind::InvalidArgument, "signal and distribution bandwidths differ");
  }
  const Eigen::Index d = layout.size();
  MomentPair m;
  m.sigma = sigma;
  m.m1.resize(d);
  m.m2.resize(d, d);
  for (Eigen::Index i = 0; i < d; ++i) {
    m.m1(i) = kTwoPi * coeffs(i) * rho.at(layout.angular(i));
  }
  for (Eigen::Index j = 0; j < d; ++j) {
    const Complex xj = std::conj(coeffs(j));
    const int kj = layout.angular(j);
    for (Eigen::Index i = 0; i < d; ++i) {
      m.m2(i, j) = kTwoPi * coeffs(i) * xj * rho.at(layout.angular(i) - kj);
    }
    m.m2(j, j) += sigma * sigma;
  }
  return m;
}

MomentPair population_moments_1d(const TrigSignal& signal, const RotationDistribution& rho,
                                 double sigma) {
  return population_moments(signal.layout(), signal.coeffs(), rho, sigma);
}

MomentPair population_moments_2d(const FBImage& image, const RotationDistribution& rho,
                                 double sigma) {
  return population_moments(image.layout(), image.coeffs(), rho, sigma);
}

// ---------------------------------------------------------------------------

MomentAccumulator::MomentAccumulator(Eigen::Index dim, Eigen::Index block)
    : dim_(dim),
      buffer_(dim, block),
      sum1_(Eigen::VectorXcd::Zero(dim)),
      sum2_(Eigen::MatrixXcd::Zero(dim, dim)) {
  if (dim < 1 || block < 1) {
    throw MraError(ErrorKind::InvalidArgument, "accumulator needs positive dimensions");
  }
}

void MomentAccumulator::add(const Eigen::VectorXcd& y) {
  if (y.size() != dim_) {
    throw MraError(ErrorKind::InvalidArgument, "observation length mismatch");
  }
  buffer_.col(filled_++) = y;
  ++count_;
  if (filled_ == buffer_.cols()) flush();
}

void MomentAccumulator::flush() {
  if (filled_ == 0) return;
  const auto block = buffer_.leftCols(filled_);
  sum1_ += block.rowwise().sum();
  sum2_.selfadjointView<Eigen::Lower>().rankUpdate(block);
  filled_ = 0;
}

MomentPair MomentAccumulator::finalize(double sigma) {
  if (count_ == 0) {
    throw MraError(ErrorKind::EmptyInput, "no observations accumulated");
  }
  flush();
  const double inv = 1.0 / static_cast<double>(count_);
  MomentPair m;
  m.sigma = sigma;
  m.m1 = sum1_ * inv;
  m.m2 = Eigen::MatrixXcd(sum2_.selfadjointView<Eigen::Lower>()) * inv;
  for (Eigen::Index i = 0; i < dim_; ++i) m.m2(i, i) = m.m2(i, i).real();
  return m;
}

MomentPair empirical_moments(const ObservationBatch& batch) {
  if (batch.data.rows() == 0) {
    throw MraError(ErrorKind::EmptyInput, "empty observation batch");
  }
  MomentAccumulator acc(batch.data.cols());
  Eigen::VectorXcd y(batch.data.cols());
  for (Eigen::Index i = 0; i < batch.data.rows(); ++i) {
    y = batch.data.row(i).transpose();
    acc.add(y);
  }
  return acc.finalize(batch.sigma);
}

MomentPair streamed_moments(const CoeffLayout& layout, const Eigen::VectorXcd& coeffs,
                            const RotationDistribution& rho, std::size_t n, double sigma,
                            Rng& rng) {
  if (n == 0) {
    throw MraError(ErrorKind::EmptyInput, "empty observation batch");
  }
  MomentAccumulator acc(layout.size());
  stream_observations(layout, coeffs, rho, n, sigma, rng,
                      [&](const Eigen::VectorXcd& y, double) { acc.add(y); });
  return acc.finalize(sigma);
}

MomentPair debias(const MomentPair& m) {
  if (m.debiased) {
    throw MraError(ErrorKind::AlreadyDebiased, "moments are already debiased");
  }
  MomentPair out = m;
  out.m2.diagonal().array() -= m.sigma * m.sigma;
  out.m2 = (0.5 * (out.m2 + out.m2.adjoint())).eval();
  out.debiased = true;
  return out;
}

}  // namespace mra
