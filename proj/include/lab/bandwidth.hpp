#pragma once
// Exact uplink bandwidth split for a set of devices that each upload d_n bits
// over a shared band of W Hz at rate R_n = b_n W log2(1 + p_n h_n / (b_n W s2)).
//
// solve_allocation minimizes sum_n w_n * d_n / R_n(b_n) subject to
// sum_n b_n = 1, b_n > 0. The problem is strictly convex; the optimum is
// characterized by a shared multiplier eta (bandwidth price) and per-device
// multipliers phi_n (rate-constraint prices), from which b_n has a closed
// form in the Lambert W function (b_from_duals). The solver itself searches
// the duals through an algebraically equivalent reduction: at the optimum
// each device satisfies
//
//   chi(g_n) = eta * c_n^2 * W / (w_n d_n ln 2),   g_n = 1 + c_n / b_n,
//   c_n = p_n h_n / (W s2),   chi(g) = (ln g - 1 + 1/g) * ((g-1)/ln g)^2,
//
// with chi strictly increasing, so each device reduces to one monotone
// scalar equation and the outer problem to a monotone search on eta.

#include <vector>

namespace lab::bw {

// Principal branch W0 on [-1/e, inf). Halley iteration with a branch-point
// series start; relative residual |W e^W - x| <= 1e-12 |x| across the domain.
double lambert_w0(double x);

struct AllocationProblem {
  std::vector<double> data_bits;   // d_n >= 0; d_n = 0 excludes the device
  std::vector<double> gain;        // h_n > 0
  std::vector<double> power_w;     // p_n > 0
  std::vector<double> weight;      // w_n > 0
  double bandwidth_hz = 0.0;       // W
  double noise_psd_w = 0.0;        // s2

  void validate() const;  // throws std::invalid_argument
};

struct Allocation {
  std::vector<double> share;    // b_n, sums to 1 over active devices
  std::vector<double> tx_time;  // d_n / R_n(b_n), 0 for excluded devices
  std::vector<double> phi;      // per-device dual, 0 for excluded
  double eta = 0.0;             // shared dual (0 when no device is active)
  double objective = 0.0;       // sum_n w_n * tx_time_n
  int outer_iterations = 0;
};

// Closed-form stationarity: optimal share of one device given the duals.
// Requires eta > 0, phi > 0. Underflows to 0 when eta/phi is so large that
// the device would receive a share below double precision.
double b_from_duals(double eta, double phi, double gain, double power_w,
                    double bandwidth_hz, double noise_psd_w);

Allocation solve_allocation(const AllocationProblem& prob);

// Independent reference: derivative matching with nested bisection on the
// raw rate formula. Slow but has no code or algebra in common with
// solve_allocation beyond the rate definition. Used by tests and the
// command-line cross-check.
Allocation oracle_allocation(const AllocationProblem& prob);

}  // namespace lab::bw
