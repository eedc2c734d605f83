#pragma once

#include <Eigen/Core>

#include <vector>

namespace mra {

/// Index map for a bandlimited coefficient vector.
///
/// Entries are ordered lexicographically by angular frequency k = -B..B and
/// then by radial index q = 0..Q_|k|-1. A 1-D signal is the special case
/// Q_k = 1 for every k, so the flat index of frequency k is k + B.
class CoeffLayout {
 public:
  CoeffLayout() : CoeffLayout(one_d(0)) {}

  static CoeffLayout one_d(int bandwidth);
  /// `radial[k]` is Q_k for k = 0..B; negative frequencies mirror it.
  static CoeffLayout two_d(int bandwidth, std::vector<int> radial);
  static CoeffLayout uniform(int bandwidth, int radial);

  int bandwidth() const noexcept { return bandwidth_; }
  int radial(int k) const { return radial_.at(static_cast<std::size_t>(k < 0 ? -k : k)); }
  const std::vector<int>& radial_bandwidths() const noexcept { return radial_; }
  bool is_one_d() const noexcept { return one_d_; }
  bool uniform_radial() const noexcept;

  Eigen::Index size() const noexcept { return static_cast<Eigen::Index>(angular_.size()); }
  /// Flat index of (k, 0).
  Eigen::Index offset(int k) const;
  Eigen::Index index(int k, int q) const;
  int angular(Eigen::Index i) const { return angular_[static_cast<std::size_t>(i)]; }
  int radial_index(Eigen::Index i) const { return radial_index_[static_cast<std::size_t>(i)]; }

  bool operator==(const CoeffLayout& other) const noexcept {
    return bandwidth_ == other.bandwidth_ && radial_ == other.radial_;
  }

 private:
  CoeffLayout(int bandwidth, std::vector<int> radial, bool one_d);

  int bandwidth_ = 0;
  bool one_d_ = true;
  std::vector<int> radial_;
  std::vector<Eigen::Index> offsets_;  // per k + B
  std::vector<int> angular_;
  std::vector<int> radial_index_;
};

}  // namespace mra
