#include "mra/coeff_layout.hpp"

#include <algorithm>
#include <string>

#include "mra/error.hpp"

namespace mra {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "invalid argument";
    case ErrorKind::DegenerateDraw: return "degenerate draw";
    case ErrorKind::NotSampleable: return "distribution not sampleable";
    case ErrorKind::VanishingMoment: return "vanishing first moment";
    case ErrorKind::InconsistentMoments: return "inconsistent moments";
    case ErrorKind::UndefinedPhase: return "undefined phase";
    case ErrorKind::NonUniformRadial: return "non-uniform radial bandwidth";
    case ErrorKind::RankDeficient: return "rank deficient";
    case ErrorKind::AlreadyDebiased: return "already debiased";
    case ErrorKind::EmptyInput: return "empty input";
    case ErrorKind::Config: return "configuration error";
  }
  return "unknown";
}

CoeffLayout::CoeffLayout(int bandwidth, std::vector<int> radial, bool one_d)
    : bandwidth_(bandwidth), one_d_(one_d), radial_(std::move(radial)) {
  if (bandwidth_ < 0) {
    throw MraError(ErrorKind::InvalidArgument, "bandwidth must be nonnegative");
  }
  if (radial_.size() != static_cast<std::size_t>(bandwidth_) + 1) {
    throw MraError(ErrorKind::InvalidArgument,
                   "expected " + std::to_string(bandwidth_ + 1) + " radial bandwidths");
  }
  if (std::any_of(radial_.begin(), radial_.end(), [](int q) { return q < 1; })) {
    throw MraError(ErrorKind::InvalidArgument, "radial bandwidths must be positive");
  }
  offsets_.reserve(2 * static_cast<std::size_t>(bandwidth_) + 1);
  for (int k = -bandwidth_; k <= bandwidth_; ++k) {
    offsets_.push_back(static_cast<Eigen::Index>(angular_.size()));
    for (int q = 0; q < this->radial(k); ++q) {
      angular_.push_back(k);
      radial_index_.push_back(q);
    }
  }
}

CoeffLayout CoeffLayout::one_d(int bandwidth) {
  return CoeffLayout(bandwidth, std::vector<int>(static_cast<std::size_t>(std::max(bandwidth, 0)) + 1, 1),
                     true);
}

CoeffLayout CoeffLayout::two_d(int bandwidth, std::vector<int> radial) {
  return CoeffLayout(bandwidth, std::move(radial), false);
}

CoeffLayout CoeffLayout::uniform(int bandwidth, int radial) {
  if (bandwidth < 0) {
    throw MraError(ErrorKind::InvalidArgument, "bandwidth must be nonnegative");
  }
  return two_d(bandwidth, std::vector<int>(static_cast<std::size_t>(bandwidth) + 1, radial));
}

bool CoeffLayout::uniform_radial() const noexcept {
  return std::all_of(radial_.begin(), radial_.end(), [&](int q) { return q == radial_.front(); });
}

Eigen::Index CoeffLayout::offset(int k) const {
  if (k < -bandwidth_ || k > bandwidth_) {
    throw MraError(ErrorKind::InvalidArgument, "angular frequency out of band");
  }
  return offsets_[static_cast<std::size_t>(k + bandwidth_)];
}

Eigen::Index CoeffLayout::index(int k, int q) const {
  const Eigen::Index base = offset(k);
  if (q < 0 || q >= radial(k)) {
    throw MraError(ErrorKind::InvalidArgument, "radial index out of band");
  }
  return base + q;
}

}  // namespace mra
