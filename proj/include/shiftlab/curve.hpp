#pragma once

#include <string>
#include <vector>

namespace shiftlab {

// One logged sample of a named per-run metric. `step` counts cumulative
// environment steps, `episode` the episode the sample belongs to.
struct CurvePoint {
  long long step = 0;
  int episode = 0;
  std::string metric;
  double value = 0.0;
};

std::vector<double> metric_series(const std::vector<CurvePoint>& points,
                                  const std::string& metric);

// mean of the per-episode values of a metric; with 0/1 success flags this is
// the normalized area under the success curve
double metric_mean(const std::vector<CurvePoint>& points, const std::string& metric);

// 1-based index of the first episode where the metric is positive, or
// fallback when it never is
int first_positive_episode(const std::vector<CurvePoint>& points,
                           const std::string& metric, int fallback);

}  // namespace shiftlab
