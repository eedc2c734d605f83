#include "mra/spectral.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <string>

#include "mra/error.hpp"

namespace mra {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kAnchorGuard = 1e-12;

struct EigenPairs {
  Eigen::VectorXd values;   // descending
  Eigen::MatrixXcd vectors; // matching columns
};

EigenPairs hermitian_eig(const Eigen::MatrixXcd& a) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(a);
  if (solver.info() != Eigen::Success) {
    throw MraError(ErrorKind::InconsistentMoments, "Hermitian eigendecomposition failed");
  }
  EigenPairs out;
  out.values = solver.eigenvalues().reverse();
  out.vectors = solver.eigenvectors().rowwise().reverse();
  return out;
}

EigenPairs drop_zero(const EigenPairs& all, double rank_tol) {
  const double top = all.values.cwiseAbs().maxCoeff();
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < all.values.size(); ++i) {
    if (std::abs(all.values(i)) > rank_tol * top) keep.push_back(i);
  }
  EigenPairs out;
  out.values.resize(static_cast<Eigen::Index>(keep.size()));
  out.vectors.resize(all.vectors.rows(), static_cast<Eigen::Index>(keep.size()));
  for (std::size_t j = 0; j < keep.size(); ++j) {
    out.values(static_cast<Eigen::Index>(j)) = all.values(keep[j]);
    out.vectors.col(static_cast<Eigen::Index>(j)) = all.vectors.col(keep[j]);
  }
  return out;
}

double min_distance_excluding(const Eigen::VectorXd& values, double target, int skip) {
  double best = kInf;
  for (Eigen::Index j = 0; j < values.size(); ++j) {
    if (j == skip) continue;
    best = std::min(best, std::abs(values(j) - target));
  }
  return best;
}

int uniform_radial_or_throw(const CoeffLayout& layout) {
  if (!layout.uniform_radial()) {
    throw MraError(ErrorKind::NonUniformRadial, "operation requires Q_k = Q for all k");
  }
  return layout.radial(0);
}

}  // namespace

// ---------------------------------------------------------------------------

CirculantApprox circulant_project(const RotationDistribution& rho) {
  const int bandwidth = rho.bandwidth();
  const int n = 2 * bandwidth + 1;
  CirculantApprox out;
  out.v_opt.resize(n);
  out.v_opt(0) = rho.at(0);
  for (int k = 1; k < n; ++k) {
    out.v_opt(k) = (static_cast<double>(k) * rho.at(-(n - k)) +
                    static_cast<double>(n - k) * rho.at(k)) /
                   static_cast<double>(n);
  }
  out.s_b = circulant_distance(rho);
  return out;
}

double circulant_distance(const RotationDistribution& rho) {
  const int n = 2 * rho.bandwidth() + 1;
  double total = 0.0;
  for (int k = 1; k < n; ++k) {
    const double weight = static_cast<double>(k) * (n - k) / n;
    total += std::norm(rho.at(k) - rho.at(-(n - k))) * weight;
  }
  return total;
}

Eigen::MatrixXcd toeplitz_matrix(const RotationDistribution& rho) {
  const int n = 2 * rho.bandwidth() + 1;
  Eigen::MatrixXcd t(n, n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) t(i, j) = rho.at(i - j);
  }
  return t;
}

Eigen::MatrixXcd circulant_matrix(const Eigen::VectorXcd& first_column) {
  const Eigen::Index n = first_column.size();
  Eigen::MatrixXcd c(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) c(i, j) = first_column(((i - j) % n + n) % n);
  }
  return c;
}

Eigen::MatrixXcd block_ones(const Eigen::MatrixXcd& base, int radial) {
  if (radial < 1) throw MraError(ErrorKind::InvalidArgument, "radial bandwidth must be positive");
  const Eigen::Index r = radial;
  Eigen::MatrixXcd out(base.rows() * r, base.cols() * r);
  for (Eigen::Index j = 0; j < base.cols(); ++j) {
    for (Eigen::Index i = 0; i < base.rows(); ++i) {
      out.block(i * r, j * r, r, r).setConstant(base(i, j));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

std::pair<int, double> select_isolated(const Eigen::VectorXd& descending, double tie_tol) {
  if (descending.size() == 0) {
    throw MraError(ErrorKind::RankDeficient, "no eigenvalues to choose from");
  }
  int best = 0;
  double best_gap = -1.0;
  for (Eigen::Index k = 0; k < descending.size(); ++k) {
    const double gap = min_distance_excluding(descending, descending(k), static_cast<int>(k));
    const bool wider = gap > best_gap + tie_tol;
    const bool tied = std::abs(gap - best_gap) <= tie_tol || (std::isinf(gap) && std::isinf(best_gap));
    if (wider || (tied && std::abs(descending(k)) > std::abs(descending(best)))) {
      best = static_cast<int>(k);
      best_gap = gap;
    }
  }
  return {best, best_gap};
}

namespace {

SpectralRun spectral_core(const MomentPair& m, const CoeffLayout& shape,
                          const SpectralOptions& opts, bool drop_null) {
  const Eigen::Index d = shape.size();
  if (m.m1.size() != d || m.m2.rows() != d || m.m2.cols() != d) {
    throw MraError(ErrorKind::InvalidArgument, "moment dimensions do not match the layout");
  }
  const MomentPair db = m.debiased ? m : debias(m);
  const Eigen::VectorXd power = db.m2.diagonal().real();
  for (Eigen::Index i = 0; i < d; ++i) {
    if (!(power(i) > 0.0)) {
      throw MraError(ErrorKind::InconsistentMoments,
                     "nonpositive power spectrum at k = " + std::to_string(shape.angular(i)));
    }
  }
  const Eigen::VectorXd inv_root = power.cwiseSqrt().cwiseInverse();
  const Eigen::MatrixXcd normalized = inv_root.asDiagonal() * db.m2 * inv_root.asDiagonal();

  EigenPairs eig = hermitian_eig(normalized);
  if (drop_null) {
    eig = drop_zero(eig, opts.rank_tol);
    if (eig.values.size() == 0) {
      throw MraError(ErrorKind::RankDeficient, "no eigenvalue above the rank threshold");
    }
  }
  const auto [kappa, gap] = select_isolated(eig.values, opts.tie_tol);

  const Eigen::Index anchor = shape.offset(0);
  Eigen::VectorXcd phases = std::sqrt(static_cast<double>(d)) * eig.vectors.col(kappa);
  if (!(std::abs(phases(anchor)) > kAnchorGuard)) {
    throw MraError(ErrorKind::UndefinedPhase, "eigenvector vanishes at the phase anchor");
  }
  const Complex beta = std::polar(1.0, std::arg(db.m1(anchor)) - std::arg(phases(anchor)));
  phases *= beta;
  const Eigen::VectorXcd estimate = power.cwiseSqrt().cast<Complex>().cwiseProduct(phases);

  // rho is identifiable only for |k| <= B; per-q estimates are averaged.
  const int bandwidth = shape.bandwidth();
  std::vector<Complex> positive(static_cast<std::size_t>(2 * bandwidth), Complex(0.0));
  Diagnostics diag;
  for (int k = 0; k <= bandwidth; ++k) {
    Complex sum = 0.0;
    const int qn = shape.radial(k);
    for (int q = 0; q < qn; ++q) {
      const Eigen::Index i = shape.offset(k) + q;
      sum += db.m1(i) / (kTwoPi * estimate(i));
    }
    const Complex value = sum / static_cast<double>(qn);
    if (k == 0) {
      diag["rho0_raw"] = value.real();
    } else {
      positive[static_cast<std::size_t>(k - 1)] = value;
    }
  }
  diag["rho_recovered_up_to"] = bandwidth;
  diag["kappa"] = kappa;
  diag["gap"] = gap;

  SpectralRun run{RecoveryResult{FBImage(shape, estimate),
                                 RotationDistribution::from_positive(bandwidth, positive),
                                 std::move(diag)},
                  SpectralReport{}};
  if (shape.is_one_d()) {
    run.result.signal_est = TrigSignal(bandwidth, estimate);
  }
  run.report.eigenvalues = eig.values;
  run.report.kappa = kappa;
  run.report.gap = gap;
  run.report.phase_estimate = phases;
  return run;
}

}  // namespace

SpectralRun spectral_recover_1d(const MomentPair& m, const SpectralOptions& opts) {
  const Eigen::Index d = m.m1.size();
  if (d < 1 || d % 2 == 0) {
    throw MraError(ErrorKind::InvalidArgument, "1-D moments need odd length 2B+1");
  }
  return spectral_core(m, CoeffLayout::one_d(static_cast<int>((d - 1) / 2)), opts, false);
}

SpectralRun spectral_recover_2d(const MomentPair& m, const CoeffLayout& shape,
                                const SpectralOptions& opts) {
  const int radial = uniform_radial_or_throw(shape);
  // With Q = 1 the block structure is trivial and the 1-D path applies verbatim.
  return spectral_core(m, shape, opts, radial > 1);
}

// ---------------------------------------------------------------------------

namespace {

SpectralReport bound_core(const CoeffLayout& layout, const Eigen::VectorXcd& x,
                          const RotationDistribution& rho, const KappaPolicy& policy,
                          const SpectralRun* run) {
  const int radial = uniform_radial_or_throw(layout);
  if (rho.bandwidth() != layout.bandwidth()) {
    throw MraError(ErrorKind::InvalidArgument, "signal and distribution bandwidths differ");
  }
  const int bandwidth = layout.bandwidth();
  const int n = 2 * bandwidth + 1;
  const auto approx = circulant_project(rho);
  const Eigen::MatrixXcd t = toeplitz_matrix(rho);
  const Eigen::MatrixXcd c = circulant_matrix(approx.v_opt);

  EigenPairs eig_t;
  EigenPairs eig_c;
  if (radial == 1) {
    eig_t = hermitian_eig(t);
    eig_c = hermitian_eig(c);
  } else {
    eig_t = drop_zero(hermitian_eig(block_ones(t, radial)), policy.rank_tol);
    eig_c = drop_zero(hermitian_eig(block_ones(c, radial)), policy.rank_tol);
  }

  SpectralReport report;
  report.eigenvalues = eig_t.values;
  report.circulant_eigenvalues = eig_c.values;
  report.s_b = approx.s_b;
  report.p_max = x.cwiseAbs2().maxCoeff();
  report.conditions.non_vanishing = x.cwiseAbs().minCoeff() > 0.0;

  if (policy.fixed) {
    report.kappa = *policy.fixed;
  } else if (run != nullptr) {
    report.kappa = run->report.kappa;
  } else {
    report.kappa = select_isolated(eig_t.values).first;
  }
  const int kappa = report.kappa;
  if (kappa < 0 || kappa >= eig_t.values.size() || kappa >= eig_c.values.size()) {
    return report;  // kappa has no counterpart in one of the spectra: not applicable
  }
  const double lt = eig_t.values(kappa);
  const double lc = eig_c.values(kappa);
  report.gap = min_distance_excluding(eig_t.values, lt, kappa);

  const double delta = std::max(min_distance_excluding(eig_t.values, lc, kappa),
                                min_distance_excluding(eig_c.values, lt, kappa));
  report.delta_kappa = delta;

  const double scale_t = eig_t.values.cwiseAbs().maxCoeff();
  const double scale_c = eig_c.values.cwiseAbs().maxCoeff();
  report.conditions.simple_eigenspaces =
      report.gap > policy.simple_tol * scale_t &&
      min_distance_excluding(eig_c.values, lc, kappa) > policy.simple_tol * scale_c;

  const double distance = static_cast<double>(radial) * radial * approx.s_b;
  report.conditions.distance_within_gap = distance <= delta * delta;
  if (report.conditions.distance_within_gap) {
    const double ratio = std::isinf(delta) ? 0.0 : distance / (delta * delta);
    report.bound = 2.0 * radial * n * report.p_max * (1.0 - std::sqrt(1.0 - ratio));
  }

  if (run != nullptr) {
    const Eigen::VectorXcd& phases = run->report.phase_estimate;
    const Eigen::VectorXcd& estimate = run->result.coeffs();
    if (phases.size() != x.size() || estimate.size() != x.size()) {
      throw MraError(ErrorKind::InvalidArgument, "recovery run does not match the ground truth");
    }
    // Circulant eigenvector for lambda^C_kappa is the Fourier vector
    // Phi_l[k] = e^{-ik 2pi l/n}; pick l by its Rayleigh quotient.
    int best_l = 0;
    double best_miss = kInf;
    for (int l = 0; l < n; ++l) {
      Eigen::VectorXcd u(n);
      for (int k = -bandwidth; k <= bandwidth; ++k) {
        u(k + bandwidth) = std::polar(1.0 / std::sqrt(static_cast<double>(n)), -kTwoPi * k * l / n);
      }
      const double mu = radial * (u.adjoint() * c * u)(0).real();
      if (std::abs(mu - lc) < best_miss) {
        best_miss = std::abs(mu - lc);
        best_l = l;
      }
    }
    Complex inner = 0.0;
    double discrete = 0.0;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      const Complex shift = std::polar(1.0, -kTwoPi * layout.angular(i) * best_l / n);
      inner += std::conj(phases(i)) * shift * (x(i) / std::abs(x(i)));
      discrete += std::norm(estimate(i) - shift * x(i));
    }
    report.matched_rotation = best_l;
    report.discrete_error_sq = discrete;
    report.conditions.sign = inner.real() >= -1e-12 * static_cast<double>(x.size())
                                 ? SignCondition::Holds
                                 : SignCondition::Violated;
  }
  report.conditions_met = report.conditions.all();
  return report;
}

template <class Signal>
RotationBound min_over_rotations(const Signal& x, const RotationDistribution& rho, int grid_size,
                                 const KappaPolicy& policy, const SpectralRun* run,
                                 int refine_iterations) {
  if (grid_size < 1) throw MraError(ErrorKind::InvalidArgument, "grid_size must be positive");
  const CoeffLayout layout = x.layout();
  auto evaluate = [&](double alpha) {
    Eigen::VectorXcd counter(x.coeffs().size());
    for (Eigen::Index i = 0; i < counter.size(); ++i) {
      counter(i) = x.coeffs()(i) * std::polar(1.0, layout.angular(i) * alpha);
    }
    return RotationBound{alpha, bound_core(layout, counter, rho.rotated(alpha), policy, run)};
  };

  std::optional<RotationBound> best_met;
  std::optional<RotationBound> best_any;
  RotationBound identity;
  for (int j = 0; j < grid_size; ++j) {
    RotationBound candidate = evaluate(kTwoPi * j / grid_size);
    if (j == 0) identity = candidate;
    if (!candidate.report.bound) continue;
    const double b = *candidate.report.bound;
    if (!best_any || b < *best_any->report.bound) best_any = candidate;
    if (candidate.report.conditions_met && (!best_met || b < *best_met->report.bound)) {
      best_met = candidate;
    }
  }
  std::optional<RotationBound>& best = best_met ? best_met : best_any;
  if (!best) return identity;
  if (refine_iterations <= 0) return *best;

  // Golden-section search on the bound near the best grid angle; a candidate
  // is admissible if it keeps the conditions the incumbent satisfies.
  const bool need_met = best_met.has_value();
  auto value = [&](const RotationBound& r) {
    if (!r.report.bound || (need_met && !r.report.conditions_met)) return kInf;
    return *r.report.bound;
  };
  const double step = kTwoPi / grid_size;
  const double ratio = (std::sqrt(5.0) - 1.0) / 2.0;
  double lo = best->best_angle - step, hi = best->best_angle + step;
  RotationBound c = evaluate(hi - ratio * (hi - lo));
  RotationBound d = evaluate(lo + ratio * (hi - lo));
  for (int it = 0; it < refine_iterations; ++it) {
    if (value(c) < value(*best)) best = c;
    if (value(d) < value(*best)) best = d;
    if (value(c) <= value(d)) {
      hi = d.best_angle;
      d = c;
      c = evaluate(hi - ratio * (hi - lo));
    } else {
      lo = c.best_angle;
      c = d;
      d = evaluate(lo + ratio * (hi - lo));
    }
  }
  if (value(c) < value(*best)) best = c;
  if (value(d) < value(*best)) best = d;
  RotationBound out = *best;
  out.best_angle = std::fmod(out.best_angle + 2.0 * kTwoPi, kTwoPi);
  return out;
}

}  // namespace

SpectralReport davis_kahan_bound_1d(const TrigSignal& x, const RotationDistribution& rho,
                                    const KappaPolicy& policy, const SpectralRun* run) {
  return bound_core(x.layout(), x.coeffs(), rho, policy, run);
}

SpectralReport davis_kahan_bound_2d(const FBImage& x, const RotationDistribution& rho,
                                    const KappaPolicy& policy, const SpectralRun* run) {
  return bound_core(x.layout(), x.coeffs(), rho, policy, run);
}

RotationBound min_bound_over_rotations(const TrigSignal& x, const RotationDistribution& rho,
                                       int grid_size, const KappaPolicy& policy,
                                       const SpectralRun* run, int refine_iterations) {
  return min_over_rotations(x, rho, grid_size, policy, run, refine_iterations);
}

RotationBound min_bound_over_rotations(const FBImage& x, const RotationDistribution& rho,
                                       int grid_size, const KappaPolicy& policy,
                                       const SpectralRun* run, int refine_iterations) {
  return min_over_rotations(x, rho, grid_size, policy, run, refine_iterations);
}

}  // namespace mra
