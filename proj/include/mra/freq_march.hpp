#pragma once

#include <Eigen/Core>

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "mra/moments.hpp"
#include "mra/signal_model.hpp"

namespace mra {

enum class FMVariant { Plain, Robust };

/// Per-frequency averaging weights for the robust march. `at(k)` lists the
/// weights of every valid k' in increasing order; each list sums to one.
using MarchWeights = std::vector<std::vector<double>>;

/// Weight of entry (k1,q1,k2,q2) when collapsing the radial index of the 2-D ratio matrix.
using RadialWeightFn = std::function<double(int k1, int k2, int q1, int q2)>;

struct FMOptions {
  FMVariant variant = FMVariant::Plain;
  /// Indexed by k for 2 <= k <= B; entry j weighs k' = j + 1 (k' = 1..k-1).
  std::optional<MarchWeights> weights_omega;
  /// Indexed by k - B - 1 for B+1 <= k <= 2B; entry j weighs k' = k - B + j (k' = k-B..B).
  std::optional<MarchWeights> weights_omega_tilde;
  /// Robust 2-D reduction; uniform over (q1,q2) when empty.
  RadialWeightFn weights_q;
  /// |M1| entries at or below tol_m1_relative * max|M1| are treated as vanishing.
  double tol_m1_relative = 1e-10;
};

using Diagnostics = std::map<std::string, double>;

struct RecoveryResult {
  std::variant<TrigSignal, FBImage> signal_est;
  RotationDistribution rho_est;
  Diagnostics diagnostics;

  const Eigen::VectorXcd& coeffs() const;
  CoeffLayout layout() const;
};

RecoveryResult fm_recover_1d(const MomentPair& m, const FMOptions& opts = {});
/// fm_recover_1d with the robust variant forced on.
RecoveryResult fm_recover_1d_robust(const MomentPair& m, FMOptions opts = {});
RecoveryResult fm_recover_2d(const MomentPair& m, const CoeffLayout& shape,
                             const FMOptions& opts = {});

/// Ratio matrix S[k1,k2] = rho[k1-k2] / (rho[k1] conj(rho[k2])) estimated from
/// debiased moments, for -B <= k1,k2 <= B (row/col index k + B).
Eigen::MatrixXcd fm_ratio_matrix(const MomentPair& debiased, const CoeffLayout& shape,
                                 const FMOptions& opts, Diagnostics& diagnostics);

/// Marches rho[0..2B] out of a reduced ratio matrix.
Eigen::VectorXcd fm_march(const Eigen::MatrixXcd& ratio, int bandwidth, const FMOptions& opts,
                          Diagnostics& diagnostics);

}  // namespace mra
