#pragma once

#include <cstddef>
#include <vector>

namespace shiftlab {

// Affine reward transform r' = k*r + b. All agents keep k = 1; the scale
// factor only participates in the algebraic checks below.
struct ShiftSpec {
  double k = 1.0;
  double b = 0.0;
};

ShiftSpec make_shift(double b);

// b/(1-gamma), the uniform change a per-step bias b induces on optimal
// Q-values.
struct DiscountedOffset {
  double gamma = 0.0;
  double offset = 0.0;
};

struct OfuWeights {
  double beta = 0.5;    // in [0, 1]
  double b_plus = 0.5;  // > 0
  double b_minus = -0.5;  // < 0
};

bool valid(const OfuWeights& w);

// b/(1-gamma). Throws std::domain_error unless 0 <= gamma < 1.
double offset_of(const ShiftSpec& shift, double gamma);
DiscountedOffset discounted_offset(const ShiftSpec& shift, double gamma);

// Debiased value estimates: subtract the induced offset from a Q-value
// learned on shifted rewards. With b > 0 the result lower-bounds the
// optimal value, with b < 0 it upper-bounds it.
double debias_lower(double q_shifted, const ShiftSpec& shift, double gamma);
double debias_upper(double q_shifted, const ShiftSpec& shift, double gamma);

// c_r = (1-beta)*b_plus + beta*b_minus
double combine_constants(const OfuWeights& w);

// (1-beta)*q_plus + beta*q_minus - ((1-beta)*b_plus + beta*b_minus)/(1-gamma)
double ofu_combine(double q_plus, double q_minus, const OfuWeights& w, double gamma);

// Scalar MC-regression iterates q_t = q_{t-1} - 2*eta*(q_{t-1} - target);
// returns the sequence q_0..q_steps (steps+1 entries).
std::vector<double> mc_regression_sequence(double q0, double target, double eta,
                                           int steps);

// Runs three scalar regressions toward targets shifted by b_plus, b_minus
// and c_r (all starting from q0) and returns the largest absolute violation
// of the combination identity (1-beta)*eps_plus + beta*eps_minus = eps_c
// over the first `steps` iterates, where eps is the error against each
// debiased target. Exact up to rounding; warns to stderr when eta >= 0.5
// (no contraction) but still runs.
double verify_proposition1(double q0, double q_star, double eta, int steps,
                           const OfuWeights& w, double gamma = 0.9);

// Index set of maximal entries, exact comparison.
std::vector<std::size_t> argmax_set(const std::vector<double>& q);

// True iff argmax(q) and argmax(k*q + b/(1-gamma)) coincide as index sets.
bool argmax_invariance_check(const std::vector<double>& q_values,
                             const ShiftSpec& shift, double gamma);

// Paired deterministic-policy-gradient update for a scalar linear policy
// mu(s) = theta*s against the quadratic critic Q(s,a) = -curv*(a - a_opt)^2.
// Returns |theta' under (k*Q, eta/k) - theta' under (Q, eta)|.
double remark2_paired_update_discrepancy(double theta, double s, double k,
                                         double eta, double a_opt, double curv);

}  // namespace shiftlab
