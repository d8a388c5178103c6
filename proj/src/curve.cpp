#include "shiftlab/curve.hpp"

namespace shiftlab {

std::vector<double> metric_series(const std::vector<CurvePoint>& points,
                                  const std::string& metric) {
  std::vector<double> out;
  for (const CurvePoint& p : points)
    if (p.metric == metric) out.push_back(p.value);
  return out;
}

double metric_mean(const std::vector<CurvePoint>& points, const std::string& metric) {
  double sum = 0.0;
  long n = 0;
  for (const CurvePoint& p : points) {
    if (p.metric == metric) {
      sum += p.value;
      ++n;
    }
  }
  return n > 0 ? sum / static_cast<double>(n) : 0.0;
}

int first_positive_episode(const std::vector<CurvePoint>& points,
                           const std::string& metric, int fallback) {
  for (const CurvePoint& p : points)
    if (p.metric == metric && p.value > 0.0) return p.episode;
  return fallback;
}

}  // namespace shiftlab
