#pragma once

#include <algorithm>
#include <cstdint>

namespace uavsched {

// Linear anneal from start to end over decay_frames, constant afterwards.
struct EpsilonSchedule {
  double start = 1.0;
  double end = 0.05;
  std::int64_t decay_frames = 1;

  double operator()(std::int64_t frame) const {
    if (decay_frames <= 0 || frame >= decay_frames) return end;
    const double t = static_cast<double>(std::max<std::int64_t>(frame, 0)) / static_cast<double>(decay_frames);
    return std::clamp(start + (end - start) * t, std::min(start, end), std::max(start, end));
  }

  static EpsilonSchedule constant(double eps) { return {eps, eps, 0}; }
};

}  // namespace uavsched
