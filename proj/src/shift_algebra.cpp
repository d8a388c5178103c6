#include "shiftlab/shift_algebra.hpp"

#include <cmath>
#include <iostream>
#include <stdexcept>

namespace shiftlab {

ShiftSpec make_shift(double b) { return ShiftSpec{1.0, b}; }

bool valid(const OfuWeights& w) {
  return w.beta >= 0.0 && w.beta <= 1.0 && w.b_plus > 0.0 && w.b_minus < 0.0;
}

double offset_of(const ShiftSpec& shift, double gamma) {
  if (!(gamma >= 0.0 && gamma < 1.0))
    throw std::domain_error("offset_of: gamma must be in [0, 1)");
  if (!std::isfinite(shift.b))
    throw std::domain_error("offset_of: shift bias must be finite");
  return shift.b / (1.0 - gamma);
}

DiscountedOffset discounted_offset(const ShiftSpec& shift, double gamma) {
  return DiscountedOffset{gamma, offset_of(shift, gamma)};
}

double debias_lower(double q_shifted, const ShiftSpec& shift, double gamma) {
  return q_shifted - offset_of(shift, gamma);
}

double debias_upper(double q_shifted, const ShiftSpec& shift, double gamma) {
  return q_shifted - offset_of(shift, gamma);
}

double combine_constants(const OfuWeights& w) {
  return (1.0 - w.beta) * w.b_plus + w.beta * w.b_minus;
}

double ofu_combine(double q_plus, double q_minus, const OfuWeights& w,
                   double gamma) {
  const double c_r = combine_constants(w);
  return (1.0 - w.beta) * q_plus + w.beta * q_minus - offset_of(make_shift(c_r), gamma);
}

std::vector<double> mc_regression_sequence(double q0, double target, double eta,
                                           int steps) {
  std::vector<double> seq;
  seq.reserve(static_cast<std::size_t>(steps) + 1);
  double q = q0;
  seq.push_back(q);
  for (int t = 0; t < steps; ++t) {
    q = q - 2.0 * eta * (q - target);
    seq.push_back(q);
  }
  return seq;
}

double verify_proposition1(double q0, double q_star, double eta, int steps,
                           const OfuWeights& w, double gamma) {
  if (eta >= 0.5)
    std::cerr << "verify_proposition1: eta >= 0.5 gives no contraction\n";
  const double c_r = combine_constants(w);
  const double off_plus = offset_of(make_shift(w.b_plus), gamma);
  const double off_minus = offset_of(make_shift(w.b_minus), gamma);
  const double off_c = offset_of(make_shift(c_r), gamma);

  const auto seq_plus = mc_regression_sequence(q0, q_star + off_plus, eta, steps);
  const auto seq_minus = mc_regression_sequence(q0, q_star + off_minus, eta, steps);
  const auto seq_c = mc_regression_sequence(q0, q_star + off_c, eta, steps);

  double worst = 0.0;
  for (std::size_t t = 0; t < seq_c.size(); ++t) {
    const double eps_plus = (seq_plus[t] - off_plus) - q_star;
    const double eps_minus = (seq_minus[t] - off_minus) - q_star;
    const double eps_c = (seq_c[t] - off_c) - q_star;
    const double violation =
        std::fabs((1.0 - w.beta) * eps_plus + w.beta * eps_minus - eps_c);
    if (violation > worst) worst = violation;
  }
  return worst;
}

std::vector<std::size_t> argmax_set(const std::vector<double>& q) {
  std::vector<std::size_t> best;
  if (q.empty()) return best;
  double m = q[0];
  for (double v : q)
    if (v > m) m = v;
  for (std::size_t i = 0; i < q.size(); ++i)
    if (q[i] == m) best.push_back(i);
  return best;
}

bool argmax_invariance_check(const std::vector<double>& q_values,
                             const ShiftSpec& shift, double gamma) {
  if (q_values.empty()) throw std::invalid_argument("argmax_invariance_check: empty vector");
  if (!(shift.k > 0.0)) throw std::invalid_argument("argmax_invariance_check: k must be positive");
  const double off = offset_of(shift, gamma);
  std::vector<double> transformed(q_values.size());
  for (std::size_t i = 0; i < q_values.size(); ++i)
    transformed[i] = shift.k * q_values[i] + off;
  return argmax_set(q_values) == argmax_set(transformed);
}

double remark2_paired_update_discrepancy(double theta, double s, double k,
                                         double eta, double a_opt, double curv) {
  const auto updated = [&](double scale, double lr) {
    const double a = theta * s;
    const double dq_da = scale * (-2.0 * curv * (a - a_opt));
    return theta + lr * dq_da * s;  // gradient ascent on Q(s, mu(s))
  };
  return std::fabs(updated(k, eta / k) - updated(1.0, eta));
}

}  // namespace shiftlab
