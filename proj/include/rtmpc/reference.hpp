#pragma once

#include <algorithm>
#include <stdexcept>
#include <utility>
#include <vector>

#include "rtmpc/types.hpp"

namespace rtmpc {

/// Piecewise-constant setpoint schedule, queried by absolute basic-period
/// index. Lookups past the last segment hold its value.
template <typename Scalar = double>
class ReferenceSignal {
 public:
  struct Segment {
    Index start;
    VectorX<Scalar> value;
  };

  ReferenceSignal() = default;

  explicit ReferenceSignal(std::vector<Segment> segments) : segments_(std::move(segments)) {
    if (segments_.empty()) throw std::invalid_argument("ReferenceSignal: empty schedule");
    if (segments_.front().start != 0) {
      throw std::invalid_argument("ReferenceSignal: first segment must start at 0");
    }
    for (std::size_t i = 1; i < segments_.size(); ++i) {
      if (segments_[i].start <= segments_[i - 1].start) {
        throw std::invalid_argument("ReferenceSignal: segment starts must be strictly increasing");
      }
      if (segments_[i].value.size() != segments_.front().value.size()) {
        throw std::invalid_argument("ReferenceSignal: inconsistent setpoint dimension");
      }
    }
  }

  static ReferenceSignal constant(VectorX<Scalar> value) {
    return ReferenceSignal({Segment{0, std::move(value)}});
  }

  static ReferenceSignal constant(Scalar value) {
    return constant(VectorX<Scalar>::Constant(1, value));
  }

  /// Square-wave schedule toggling between +amplitude and -amplitude every
  /// half_period basic periods, with enough segments to cover total length.
  static ReferenceSignal alternating(Scalar amplitude, Index half_period, Index total_length) {
    if (half_period < 1) throw std::invalid_argument("ReferenceSignal: half_period must be >= 1");
    std::vector<Segment> segs;
    Scalar level = amplitude;
    for (Index start = 0; start <= total_length; start += half_period) {
      segs.push_back(Segment{start, VectorX<Scalar>::Constant(1, level)});
      level = -level;
    }
    return ReferenceSignal(std::move(segs));
  }

  Index dim() const { return segments_.front().value.size(); }

  const std::vector<Segment>& segments() const { return segments_; }

  const VectorX<Scalar>& at(Index k) const {
    auto it = std::upper_bound(segments_.begin(), segments_.end(), k,
                               [](Index key, const Segment& s) { return key < s.start; });
    return std::prev(it)->value;
  }

  /// Setpoints at steps k0+1 ... k0+count, stacked into one vector.
  VectorX<Scalar> stacked(Index k0, Index count) const {
    const Index ny = dim();
    VectorX<Scalar> out(count * ny);
    for (Index k = 0; k < count; ++k) {
      out.segment(k * ny, ny) = at(k0 + k + 1);
    }
    return out;
  }

 private:
  std::vector<Segment> segments_;
};

}  // namespace rtmpc
