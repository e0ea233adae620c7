#include "lab/bandwidth.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace lab::bw {

namespace {
constexpr double kLn2 = 0.6931471805599453;
constexpr double kEInv = 0.36787944117144233;  // 1/e
}  // namespace

double lambert_w0(double x) {
  if (!(x >= -kEInv)) {
    if (x >= -kEInv - 1e-9)  // forgive rounding at the branch point
      x = -kEInv;
    else
      throw std::domain_error("lambert_w0: x < -1/e");
  }
  if (x == 0.0) return x;  // keeps the sign of zero

  double w;
  if (x < -0.25) {
    // branch-point expansion in p = sqrt(2(ex+1))
    const double p = std::sqrt(2.0 * (M_E * x + 1.0));
    w = -1.0 + p * (1.0 + p * (-1.0 / 3.0 + p * (11.0 / 72.0)));
    if (p < 5e-3) return w;  // series already below 1e-12 residual
  } else if (x < 0.25) {
    w = x * (1.0 + x * (-1.0 + x * 1.5));
  } else if (x < 3.0) {
    w = 0.5 * std::log1p(x) + 0.2;
  } else {
    const double l1 = std::log(x), l2 = std::log(l1);
    w = l1 - l2 + l2 / l1;
  }

  for (int it = 0; it < 100; ++it) {
    const double ew = std::exp(w);
    const double f = w * ew - x;
    const double wp1 = w + 1.0;
    double step = f / (ew * wp1 - (w + 2.0) * f / (2.0 * wp1));
    const double wn = w - step;
    if (std::abs(wn - w) <= 2e-16 * (1.0 + std::abs(wn))) {
      w = wn;
      break;
    }
    w = wn;
  }
  return w;
}

namespace {

// chi(g) = (ln g - 1 + 1/g) * ((g-1)/ln g)^2 parameterized by e = g-1 > 0.
// Strictly increasing from 0 (e -> 0) to infinity. Returns chi and its
// derivative with respect to ln e.
struct ChiVal {
  double chi;
  double dchi_dlne;
};

ChiVal chi_eval(double e) {
  const double lg = std::log1p(e);
  const double g = 1.0 + e;
  double phi;  // ln g - 1 + 1/g, cancellation-safe
  if (e < 1e-4) {
    phi = e * e * (0.5 + e * (-2.0 / 3.0 + e * (0.75 - e * 0.8)));
  } else {
    phi = lg - e / g;
  }
  const double q = e / lg;  // (g-1)/ln g
  const double chi = phi * q * q;
  const double dphi_dg = e / (g * g);
  const double dq_dg = phi / (lg * lg);
  const double dchi_dg = dphi_dg * q * q + 2.0 * phi * q * dq_dg;
  return {chi, dchi_dg * e};
}

// Inverse of chi: the unique e > 0 with chi(1 + e) = t, t > 0.
double chi_inverse(double t) {
  double e;
  if (t < 0.4) {
    e = std::sqrt(2.0 * t);  // chi ~ e^2/2 for small e
  } else {
    // chi ~ g^2 / ln g for large g
    const double gl = std::max(2.0, std::log(t));
    e = std::sqrt(t * gl);
  }

  double lo = e, hi = e;
  if (chi_eval(lo).chi > t) {
    do {
      lo *= 0.125;
    } while (chi_eval(lo).chi > t && lo > 1e-300);
  } else {
    do {
      hi *= 8.0;
    } while (chi_eval(hi).chi < t && hi < 1e300);
  }

  double x = std::log(std::sqrt(lo * hi));
  e = std::exp(x);
  for (int it = 0; it < 80; ++it) {
    const ChiVal cv = chi_eval(e);
    const double f = cv.chi - t;
    if (f > 0.0)
      hi = std::min(hi, e);
    else
      lo = std::max(lo, e);
    if (std::abs(f) <= 1e-14 * t) break;
    double xn = x - f / cv.dchi_dlne;
    double en = std::exp(xn);
    if (!(en > lo && en < hi)) {
      en = std::sqrt(lo * hi);
      xn = std::log(en);
    }
    if (std::abs(xn - x) <= 1e-15 * (1.0 + std::abs(x))) {
      x = xn;
      e = en;
      break;
    }
    x = xn;
    e = en;
  }
  return e;
}

}  // namespace

void AllocationProblem::validate() const {
  const std::size_t n = data_bits.size();
  if (n == 0) throw std::invalid_argument("allocation: empty problem");
  if (gain.size() != n || power_w.size() != n || weight.size() != n)
    throw std::invalid_argument("allocation: mismatched vector sizes");
  if (!(bandwidth_hz > 0.0)) throw std::invalid_argument("allocation: bandwidth_hz must be > 0");
  if (!(noise_psd_w > 0.0)) throw std::invalid_argument("allocation: noise_psd_w must be > 0");
  for (std::size_t i = 0; i < n; ++i) {
    if (!(data_bits[i] >= 0.0) || !std::isfinite(data_bits[i]))
      throw std::invalid_argument("allocation: data_bits must be finite and >= 0");
    if (data_bits[i] == 0.0) continue;  // excluded device, other fields unused
    if (!(gain[i] > 0.0) || !std::isfinite(gain[i]))
      throw std::invalid_argument("allocation: gain must be finite and > 0");
    if (!(power_w[i] > 0.0) || !std::isfinite(power_w[i]))
      throw std::invalid_argument("allocation: power_w must be finite and > 0");
    if (!(weight[i] > 0.0) || !std::isfinite(weight[i]))
      throw std::invalid_argument("allocation: weight must be finite and > 0");
  }
}

double b_from_duals(double eta, double phi, double gain, double power_w,
                    double bandwidth_hz, double noise_psd_w) {
  if (!(eta > 0.0) || !(phi > 0.0))
    throw std::invalid_argument("b_from_duals: duals must be > 0");
  const double c = power_w * gain / (bandwidth_hz * noise_psd_w);
  const double s = 1.0 + eta * kLn2 / (phi * bandwidth_hz);
  const double w = lambert_w0(-std::exp(-s));
  return -c / (1.0 + 1.0 / w);
}

Allocation solve_allocation(const AllocationProblem& prob) {
  prob.validate();
  const int n = static_cast<int>(prob.data_bits.size());
  const double W = prob.bandwidth_hz;

  Allocation out;
  out.share.assign(n, 0.0);
  out.tx_time.assign(n, 0.0);
  out.phi.assign(n, 0.0);

  std::vector<int> act;
  for (int i = 0; i < n; ++i)
    if (prob.data_bits[i] > 0.0) act.push_back(i);
  if (act.empty()) return out;

  const int m = static_cast<int>(act.size());
  std::vector<double> c(m), k(m), e(m), dlne(m);
  for (int j = 0; j < m; ++j) {
    const int i = act[j];
    c[j] = prob.power_w[i] * prob.gain[i] / (W * prob.noise_psd_w);
    k[j] = prob.weight[i] * prob.data_bits[i] * kLn2 / (c[j] * c[j] * W);
  }

  // share sum and its derivative with respect to ln eta
  auto sum_shares = [&](double eta, double* dS_dlneta) {
    double S = 0.0, dS = 0.0;
    for (int j = 0; j < m; ++j) {
      const double t = eta / k[j];
      e[j] = chi_inverse(t);
      const ChiVal cv = chi_eval(e[j]);
      const double b = c[j] / e[j];
      S += b;
      dS -= b * t / cv.dchi_dlne;  // d b_j / d ln eta
    }
    if (dS_dlneta) *dS_dlneta = dS;
    return S;
  };

  // initial eta: pretend equal shares, take the geometric mean of the
  // per-device prices that would imply
  double log_eta0 = 0.0;
  for (int j = 0; j < m; ++j)
    log_eta0 += std::log(k[j] * chi_eval(m * c[j]).chi);
  log_eta0 /= m;

  double lo = std::exp(log_eta0), hi = lo;
  int iters = 0;
  if (sum_shares(lo, nullptr) < 1.0) {  // S decreasing in eta
    do {
      lo /= 64.0;
      ++iters;
    } while (sum_shares(lo, nullptr) < 1.0 && lo > 1e-300);
  } else {
    do {
      hi *= 64.0;
      ++iters;
    } while (sum_shares(hi, nullptr) > 1.0 && hi < 1e300);
  }

  double y = 0.5 * (std::log(lo) + std::log(hi));
  double eta = std::exp(y);
  for (int it = 0; it < 100; ++it) {
    ++iters;
    double dS;
    const double S = sum_shares(eta, &dS);
    const double f = S - 1.0;
    if (f > 0.0)
      lo = std::max(lo, eta);
    else
      hi = std::min(hi, eta);
    if (std::abs(f) <= 1e-13) break;
    double yn = y - f / dS;
    double en = std::exp(yn);
    if (!(en > lo && en < hi)) {
      en = std::sqrt(lo * hi);
      yn = std::log(en);
    }
    if (std::abs(yn - y) <= 1e-15 * (1.0 + std::abs(y))) {
      y = yn;
      eta = en;
      sum_shares(eta, nullptr);
      break;
    }
    y = yn;
    eta = en;
  }

  out.eta = eta;
  out.outer_iterations = iters;
  for (int j = 0; j < m; ++j) {
    const int i = act[j];
    const double b = c[j] / e[j];
    const double rate = b * W * std::log1p(e[j]) / kLn2;
    const double tau = prob.data_bits[i] / rate;
    out.share[i] = b;
    out.tx_time[i] = tau;
    out.phi[i] = prob.weight[i] * tau * tau / prob.data_bits[i];
    out.objective += prob.weight[i] * tau;
  }
  return out;
}

Allocation oracle_allocation(const AllocationProblem& prob) {
  prob.validate();
  const int n = static_cast<int>(prob.data_bits.size());
  const double W = prob.bandwidth_hz;

  Allocation out;
  out.share.assign(n, 0.0);
  out.tx_time.assign(n, 0.0);
  out.phi.assign(n, 0.0);

  std::vector<int> act;
  for (int i = 0; i < n; ++i)
    if (prob.data_bits[i] > 0.0) act.push_back(i);
  if (act.empty()) return out;

  auto rate = [&](double b, double cc) { return b * W * std::log2(1.0 + cc / b); };
  auto drate = [&](double b, double cc) {
    const double r = cc / b;
    return W * std::log2(1.0 + r) - (W / kLn2) * r / (1.0 + r);
  };
  // marginal cost of f(b) = w d / R(b); increasing in b, from -inf to 0
  auto marginal = [&](int i, double b) {
    const double cc = prob.power_w[i] * prob.gain[i] / (W * prob.noise_psd_w);
    const double R = rate(b, cc);
    return -prob.weight[i] * prob.data_bits[i] * drate(b, cc) / (R * R);
  };
  auto share_for = [&](int i, double mu) {
    double lo = std::log(1e-18), hi = std::log(1e6);
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (marginal(i, std::exp(mid)) < -mu)
        lo = mid;
      else
        hi = mid;
    }
    return std::exp(0.5 * (lo + hi));
  };
  auto total = [&](double mu) {
    double S = 0.0;
    for (int i : act) S += share_for(i, mu);
    return S;
  };

  double mu_lo = 1.0, mu_hi = 1.0;
  if (total(mu_lo) < 1.0) {
    while (total(mu_lo) < 1.0 && mu_lo > 1e-280) mu_lo /= 256.0;
  } else {
    while (total(mu_hi) > 1.0 && mu_hi < 1e280) mu_hi *= 256.0;
  }
  double llo = std::log(mu_lo), lhi = std::log(mu_hi);
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (llo + lhi);
    if (total(std::exp(mid)) > 1.0)
      llo = mid;  // shares too big -> raise the price
    else
      lhi = mid;
  }
  const double mu = std::exp(0.5 * (llo + lhi));

  out.eta = mu;
  for (int i : act) {
    const double b = share_for(i, mu);
    const double cc = prob.power_w[i] * prob.gain[i] / (W * prob.noise_psd_w);
    const double R = rate(b, cc);
    out.share[i] = b;
    out.tx_time[i] = prob.data_bits[i] / R;
    out.phi[i] = prob.weight[i] * prob.data_bits[i] / (R * R);
    out.objective += prob.weight[i] * out.tx_time[i];
  }
  return out;
}

}  // namespace lab::bw
