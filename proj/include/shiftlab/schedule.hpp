#pragma once

#include <stdexcept>

namespace shiftlab {

// Linear decay from start to end over the first `fraction` of training,
// constant end value afterward.
struct EpsilonSchedule {
  double start = 0.9;
  double end = 0.05;
  double fraction = 0.2;
};

inline double epsilon_at(const EpsilonSchedule& s, double progress) {
  if (!(progress >= 0.0 && progress <= 1.0))
    throw std::invalid_argument("epsilon_at: progress must be in [0, 1]");
  if (!(s.fraction > 0.0 && s.fraction <= 1.0))
    throw std::invalid_argument("epsilon_at: fraction must be in (0, 1]");
  if (progress >= s.fraction) return s.end;
  return s.start + (s.end - s.start) * (progress / s.fraction);
}

}  // namespace shiftlab
