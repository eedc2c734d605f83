#include "mra/freq_march.hpp"

#include <cmath>
#include <string>

#include "mra/error.hpp"

namespace mra {

namespace {

constexpr double kPositiveGuard = 1e-12;
constexpr double kPhaseGuard = 1e-14;
constexpr double kWeightSumTol = 1e-12;

const std::vector<double>& weights_for(const std::optional<MarchWeights>& table, std::size_t slot,
                                       std::size_t expected, std::vector<double>& fallback) {
  if (table) {
    if (slot >= table->size() || (*table)[slot].size() != expected) {
      throw MraError(ErrorKind::InvalidArgument, "robust weight table has the wrong shape");
    }
    double sum = 0.0;
    for (double w : (*table)[slot]) sum += w;
    if (std::abs(sum - 1.0) > kWeightSumTol) {
      throw MraError(ErrorKind::InvalidArgument, "robust weights must sum to one");
    }
    return (*table)[slot];
  }
  fallback.assign(expected, 1.0 / static_cast<double>(expected));
  return fallback;
}

double positive_real(Complex value, const char* what) {
  if (!(value.real() > kPositiveGuard)) {
    throw MraError(ErrorKind::InconsistentMoments,
                   std::string(what) + " must be real positive, got " + std::to_string(value.real()));
  }
  return value.real();
}

MomentPair ensure_debiased(const MomentPair& m) { return m.debiased ? m : debias(m); }

}  // namespace

const Eigen::VectorXcd& RecoveryResult::coeffs() const {
  return std::visit([](const auto& s) -> const Eigen::VectorXcd& { return s.coeffs(); },
                    signal_est);
}

CoeffLayout RecoveryResult::layout() const {
  return std::visit([](const auto& s) { return CoeffLayout(s.layout()); }, signal_est);
}

Eigen::MatrixXcd fm_ratio_matrix(const MomentPair& m, const CoeffLayout& shape,
                                 const FMOptions& opts, Diagnostics& diagnostics) {
  const Eigen::Index d = shape.size();
  if (m.m1.size() != d || m.m2.rows() != d || m.m2.cols() != d) {
    throw MraError(ErrorKind::InvalidArgument, "moment dimensions do not match the layout");
  }
  const double max_m1 = m.m1.cwiseAbs().maxCoeff();
  const double guard = opts.tol_m1_relative * max_m1;
  double min_m1 = max_m1;
  for (Eigen::Index i = 0; i < d; ++i) {
    const double a = std::abs(m.m1(i));
    min_m1 = std::min(min_m1, a);
    if (!(a > guard)) {
      throw MraError(ErrorKind::VanishingMoment,
                     "first moment vanishes at k = " + std::to_string(shape.angular(i)));
    }
  }
  diagnostics["min_abs_m1"] = min_m1;

  const int bandwidth = shape.bandwidth();
  const int n = 2 * bandwidth + 1;
  auto entry = [&](Eigen::Index i, Eigen::Index j) {
    return kTwoPi * m.m2(i, j) / (m.m1(i) * std::conj(m.m1(j)));
  };
  Eigen::MatrixXcd ratio(n, n);
  for (int k1 = -bandwidth; k1 <= bandwidth; ++k1) {
    for (int k2 = -bandwidth; k2 <= bandwidth; ++k2) {
      Complex value;
      if (opts.variant == FMVariant::Plain) {
        value = entry(shape.offset(k1), shape.offset(k2));
      } else {
        const int q1n = shape.radial(k1);
        const int q2n = shape.radial(k2);
        const double uniform = 1.0 / (static_cast<double>(q1n) * q2n);
        double total = 0.0;
        value = 0.0;
        for (int q1 = 0; q1 < q1n; ++q1) {
          for (int q2 = 0; q2 < q2n; ++q2) {
            const double w = opts.weights_q ? opts.weights_q(k1, k2, q1, q2) : uniform;
            total += w;
            value += w * entry(shape.offset(k1) + q1, shape.offset(k2) + q2);
          }
        }
        if (opts.weights_q && std::abs(total - 1.0) > kWeightSumTol) {
          throw MraError(ErrorKind::InvalidArgument, "radial weights must sum to one per block");
        }
      }
      ratio(k1 + bandwidth, k2 + bandwidth) = value;
    }
  }
  return ratio;
}

Eigen::VectorXcd fm_march(const Eigen::MatrixXcd& ratio, int bandwidth, const FMOptions& opts,
                          Diagnostics& diagnostics) {
  const int top = 2 * bandwidth;
  auto S = [&](int k1, int k2) { return ratio(k1 + bandwidth, k2 + bandwidth); };
  Eigen::VectorXcd rho = Eigen::VectorXcd::Zero(top + 1);  // rho[0..2B]
  rho(0) = 1.0 / kTwoPi;
  if (bandwidth == 0) return rho;

  // Gauge: rho[1] real positive.
  const double s11 = positive_real(S(1, 1), "S[1,1]");
  diagnostics["re_s11"] = s11;
  diagnostics["gauge_rho1_phase"] = 0.0;
  rho(1) = std::sqrt(1.0 / (kTwoPi * s11));

  const bool robust = opts.variant == FMVariant::Robust;
  std::vector<double> fallback;
  for (int k = 2; k <= bandwidth; ++k) {
    if (!robust) {
      rho(k) = rho(1) / (S(k, k - 1) * std::conj(rho(k - 1)));
      continue;
    }
    const auto& w = weights_for(opts.weights_omega, static_cast<std::size_t>(k),
                                static_cast<std::size_t>(k - 1), fallback);
    Complex path = 0.0;
    for (int kp = 1; kp <= k - 1; ++kp) {
      path += w[static_cast<std::size_t>(kp - 1)] * rho(k - kp) / (S(k, kp) * std::conj(rho(kp)));
    }
    if (!(std::abs(path) > kPhaseGuard)) {
      throw MraError(ErrorKind::UndefinedPhase,
                     "averaged march estimate vanishes at k = " + std::to_string(k));
    }
    const double skk = positive_real(S(k, k), "S[k,k]");
    rho(k) = (path / std::abs(path)) / std::sqrt(kTwoPi * skk);
    diagnostics["magnitude_residual_" + std::to_string(k)] = std::abs(std::abs(path) - std::abs(rho(k)));
  }
  for (int k = bandwidth + 1; k <= top; ++k) {
    if (!robust) {
      rho(k) = S(k - bandwidth, -bandwidth) * rho(k - bandwidth) * rho(bandwidth);
      continue;
    }
    const auto& w = weights_for(opts.weights_omega_tilde, static_cast<std::size_t>(k - bandwidth - 1),
                                static_cast<std::size_t>(2 * bandwidth - k + 1), fallback);
    Complex value = 0.0;
    for (int kp = k - bandwidth; kp <= bandwidth; ++kp) {
      value += w[static_cast<std::size_t>(kp - (k - bandwidth))] * S(k - kp, -kp) * rho(k - kp) *
               rho(kp);
    }
    rho(k) = value;
  }
  return rho;
}

namespace {

RotationDistribution to_distribution(const Eigen::VectorXcd& half, int bandwidth) {
  std::vector<Complex> positive(static_cast<std::size_t>(2 * bandwidth));
  for (int k = 1; k <= 2 * bandwidth; ++k) positive[static_cast<std::size_t>(k - 1)] = half(k);
  return RotationDistribution::from_positive(bandwidth, positive);
}

Eigen::VectorXcd divide_out(const Eigen::VectorXcd& m1, const CoeffLayout& shape,
                            const RotationDistribution& rho) {
  Eigen::VectorXcd x(m1.size());
  for (Eigen::Index i = 0; i < m1.size(); ++i) {
    x(i) = m1(i) / (kTwoPi * rho.at(shape.angular(i)));
  }
  return x;
}

}  // namespace

RecoveryResult fm_recover_1d(const MomentPair& m, const FMOptions& opts) {
  const Eigen::Index d = m.m1.size();
  if (d < 1 || d % 2 == 0) {
    throw MraError(ErrorKind::InvalidArgument, "1-D moments need odd length 2B+1");
  }
  const int bandwidth = static_cast<int>((d - 1) / 2);
  const auto shape = CoeffLayout::one_d(bandwidth);
  const MomentPair db = ensure_debiased(m);
  Diagnostics diag;
  const Eigen::MatrixXcd ratio = fm_ratio_matrix(db, shape, opts, diag);
  const Eigen::VectorXcd half = fm_march(ratio, bandwidth, opts, diag);
  auto rho = to_distribution(half, bandwidth);
  TrigSignal x(bandwidth, divide_out(db.m1, shape, rho));
  return RecoveryResult{std::move(x), std::move(rho), std::move(diag)};
}

RecoveryResult fm_recover_1d_robust(const MomentPair& m, FMOptions opts) {
  opts.variant = FMVariant::Robust;
  return fm_recover_1d(m, opts);
}

RecoveryResult fm_recover_2d(const MomentPair& m, const CoeffLayout& shape,
                             const FMOptions& opts) {
  const MomentPair db = ensure_debiased(m);
  Diagnostics diag;
  const Eigen::MatrixXcd ratio = fm_ratio_matrix(db, shape, opts, diag);
  const Eigen::VectorXcd half = fm_march(ratio, shape.bandwidth(), opts, diag);
  auto rho = to_distribution(half, shape.bandwidth());
  FBImage x(shape, divide_out(db.m1, shape, rho));
  return RecoveryResult{std::move(x), std::move(rho), std::move(diag)};
}

}  // namespace mra
