#pragma once

#include <Eigen/Core>

#include <optional>

#include "mra/freq_march.hpp"
#include "mra/moments.hpp"
#include "mra/signal_model.hpp"

namespace mra {

/// Nearest circulant matrix to the Toeplitz matrix T[k1,k2] = rho[k1-k2].
struct CirculantApprox {
  Eigen::VectorXcd v_opt;  // first column, length 2B+1
  double s_b = 0.0;        // squared Frobenius distance ||T - C||^2
};

CirculantApprox circulant_project(const RotationDistribution& rho);
/// S_B(rho) evaluated from its closed-form sum.
double circulant_distance(const RotationDistribution& rho);

/// (2B+1) x (2B+1) Toeplitz matrix T[i,j] = rho[i-j].
Eigen::MatrixXcd toeplitz_matrix(const RotationDistribution& rho);
/// Circulant matrix with first column v: C[i,j] = v[(i-j) mod n].
Eigen::MatrixXcd circulant_matrix(const Eigen::VectorXcd& first_column);
/// Replaces every entry of `base` by a Q x Q block of that value.
Eigen::MatrixXcd block_ones(const Eigen::MatrixXcd& base, int radial);

struct SpectralOptions {
  /// Eigenvalues with |lambda| <= rank_tol * max|lambda| count as zero (2-D only).
  double rank_tol = 1e-8;
  /// Gap ties within this are broken toward the larger |lambda|.
  double tie_tol = 1e-12;
};

enum class SignCondition { Holds, Violated, Assumed };

/// The four hypotheses of the eigenvector-perturbation bound.
struct BoundConditions {
  bool non_vanishing = false;
  bool simple_eigenspaces = false;
  SignCondition sign = SignCondition::Assumed;
  bool distance_within_gap = false;

  bool all() const noexcept {
    return non_vanishing && simple_eigenspaces && distance_within_gap &&
           sign != SignCondition::Violated;
  }
};

struct SpectralReport {
  Eigen::VectorXd eigenvalues;  // descending; the nonzero ones in 2-D
  int kappa = 0;
  double gap = 0.0;
  std::optional<double> delta_kappa;
  std::optional<double> s_b;
  std::optional<double> bound;
  BoundConditions conditions;
  bool conditions_met = false;

  // Evaluation side.
  double p_max = 0.0;
  Eigen::VectorXd circulant_eigenvalues;
  std::optional<int> matched_rotation;     // l of the Phi_{2 pi l / (2B+1)} alignment
  std::optional<double> discrete_error_sq; // ||x_est - Phi_l x||^2 at that l

  // Recovery side: anchored phase vector sqrt(n) * beta * v_kappa.
  Eigen::VectorXcd phase_estimate;
};

struct SpectralRun {
  RecoveryResult result;
  SpectralReport report;
};

SpectralRun spectral_recover_1d(const MomentPair& m, const SpectralOptions& opts = {});
SpectralRun spectral_recover_2d(const MomentPair& m, const CoeffLayout& shape,
                                const SpectralOptions& opts = {});

/// argmax_k min_{k' != k} |lambda_k' - lambda_k| over descending eigenvalues,
/// returning (kappa, gap).
std::pair<int, double> select_isolated(const Eigen::VectorXd& descending, double tie_tol = 1e-12);

struct KappaPolicy {
  /// Fixed index; otherwise the isolated-eigenvalue rule on the Toeplitz
  /// spectrum (what the recovery picks from exact moments), or the run's kappa.
  std::optional<int> fixed;
  double rank_tol = 1e-8;
  /// Eigenvalues closer than simple_tol * max|lambda| count as degenerate.
  double simple_tol = 1e-9;
};

/// Evaluates the perturbation bound for ground truth (x, rho). If `run` is
/// given, its kappa is used and the sign hypothesis is checked against it.
SpectralReport davis_kahan_bound_1d(const TrigSignal& x, const RotationDistribution& rho,
                                    const KappaPolicy& policy = {},
                                    const SpectralRun* run = nullptr);
SpectralReport davis_kahan_bound_2d(const FBImage& x, const RotationDistribution& rho,
                                    const KappaPolicy& policy = {},
                                    const SpectralRun* run = nullptr);

struct RotationBound {
  double best_angle = 0.0;
  SpectralReport report;
};

/// Minimizes the bound over rho -> rho rotated by alpha on a uniform grid. The
/// truth is counter-rotated so the pair generates the same moments. With
/// refine_iterations > 0 the best grid angle is then polished by golden-section
/// search within one grid step on either side.
RotationBound min_bound_over_rotations(const TrigSignal& x, const RotationDistribution& rho,
                                       int grid_size, const KappaPolicy& policy = {},
                                       const SpectralRun* run = nullptr,
                                       int refine_iterations = 0);
RotationBound min_bound_over_rotations(const FBImage& x, const RotationDistribution& rho,
                                       int grid_size, const KappaPolicy& policy = {},
                                       const SpectralRun* run = nullptr,
                                       int refine_iterations = 0);

}  // namespace mra
