#include "lab/env.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "lab/rng.hpp"

namespace lab::env {

double data_size_bits(int native_w, int native_h, int level) {
  if (level < 0) throw std::invalid_argument("data_size_bits: level < 0");
  const int div = 1 << level;
  if (native_w % div != 0 || native_h % div != 0)
    throw std::invalid_argument("data_size_bits: resolution not divisible by 2^level");
  return 24.0 * (native_w / div) * static_cast<double>(native_h / div);
}

double degradation_latency(int native_w, int native_h, int level,
                           double px_per_s) {
  if (level == 0) return 0.0;
  // sum_{k=1..level} 4^-(k-1) = (4/3) (1 - 4^-level)
  const double passes = (4.0 / 3.0) * (1.0 - std::pow(4.0, -level));
  return static_cast<double>(native_w) * native_h * passes / px_per_s;
}

double edge_compute_latency(int native_w, int native_h, int level,
                            double px_per_s, double base_s) {
  const double px = static_cast<double>(native_w) * native_h * std::pow(4.0, -level);
  return base_s + px / px_per_s;
}

double transmission_time(double bits, double share, double gain,
                         double power_w, double bandwidth_hz,
                         double noise_psd_w) {
  if (bits <= 0.0) return 0.0;
  if (share <= 0.0) return std::numeric_limits<double>::infinity();
  const double band = share * bandwidth_hz;
  const double rate = band * std::log2(1.0 + power_w * gain / (band * noise_psd_w));
  return bits / rate;
}

double mean_gain(double distance_m, double antenna_gain, double carrier_hz,
                 double pathloss_exponent) {
  if (distance_m <= 0.0) throw std::invalid_argument("mean_gain: distance must be > 0");
  const double wavelength_factor = 2.99792458e8 / (4.0 * M_PI * carrier_hz * distance_m);
  return antenna_gain * std::pow(wavelength_factor, pathloss_exponent);
}

std::pair<double, double> track_position(double arc, double w, double h) {
  const double per = 2.0 * (w + h);
  double s = std::fmod(arc, per);
  if (s < 0.0) s += per;
  const double hw = 0.5 * w, hh = 0.5 * h;
  if (s < w) return {-hw + s, -hh};            // bottom edge, left to right
  s -= w;
  if (s < h) return {hw, -hh + s};             // right edge, up
  s -= h;
  if (s < w) return {hw - s, hh};              // top edge, right to left
  s -= w;
  return {-hw, hh - s};                        // left edge, down
}

double iou(const Box& a, const Box& b) {
  const double ix = std::max(0.0, std::min(a.x2, b.x2) - std::max(a.x1, b.x1));
  const double iy = std::max(0.0, std::min(a.y2, b.y2) - std::max(a.y1, b.y1));
  const double inter = ix * iy;
  const double area_a = (a.x2 - a.x1) * (a.y2 - a.y1);
  const double area_b = (b.x2 - b.x1) * (b.y2 - b.y1);
  return inter / (area_a + area_b - inter);
}

double detection_accuracy(const std::vector<Box>& predicted,
                          const std::vector<Box>& ground_truth,
                          double iou_threshold) {
  if (ground_truth.empty())
    throw std::invalid_argument("detection_accuracy: empty ground truth");
  auto check = [](const Box& b) {
    if (!(b.x2 > b.x1) || !(b.y2 > b.y1))
      throw std::invalid_argument("detection_accuracy: degenerate box");
  };
  for (const Box& b : predicted) check(b);
  for (const Box& b : ground_truth) check(b);

  int matched = 0;
  for (const Box& gt : ground_truth) {
    double best = 0.0;
    for (const Box& pr : predicted) best = std::max(best, iou(gt, pr));
    if (best >= iou_threshold) ++matched;
  }
  return static_cast<double>(matched) / static_cast<double>(ground_truth.size());
}

Environment::Environment(SystemConfig cfg, std::uint64_t master_seed)
    : cfg_(std::move(cfg)) {
  cfg_.finalize();
  cfg_.validate();
  const std::uint64_t env_seed = rng::stream_seed(master_seed, streams::kEnv);
  mobility_seed_ = rng::stream_seed(env_seed, "mobility");
  content_seed_ = rng::stream_seed(env_seed, "content");
  alpha_seed_ = rng::stream_seed(env_seed, "oracle-alpha");
  conf_seed_ = rng::stream_seed(env_seed, "oracle-conf");
  channel_seed_ = rng::stream_seed(master_seed, streams::kChannel);

  const int n = cfg_.n_devices;
  arc0_.resize(n);
  content_.resize(n);
  dist_.assign(n, 0.0);
  gain_.assign(n, 0.0);
  for (int i = 0; i < n; ++i) {
    // start spread along one long edge of the track
    arc0_[i] = cfg_.track_w_m * rng::keyed_u01(mobility_seed_, i);
    content_[i] = cfg_.content_init_lo +
                  (cfg_.content_init_hi - cfg_.content_init_lo) *
                      rng::keyed_u01(content_seed_, i, 0);
  }
}

void Environment::begin_slot(int t) {
  if (t != t_ + 1)
    throw std::logic_error("Environment::begin_slot: slots must advance by 1");
  t_ = t;
  const int n = cfg_.n_devices;
  for (int i = 0; i < n; ++i) {
    const auto [x, y] =
        track_position(arc0_[i] + cfg_.step_m * t, cfg_.track_w_m, cfg_.track_h_m);
    dist_[i] = std::hypot(x, y);
    const double hbar = mean_gain(dist_[i], cfg_.antenna_gain, cfg_.carrier_hz,
                                  cfg_.pathloss_exponent);
    gain_[i] = hbar * rng::keyed_exp1(channel_seed_, t, i);

    // slowly mixing frame content, reflected into (0, 1]
    double c = cfg_.content_mean +
               cfg_.content_coeff * (content_[i] - cfg_.content_mean) +
               cfg_.content_sd * rng::keyed_normal(content_seed_, i, t);
    for (int r = 0; r < 8 && (c <= 0.0 || c > 1.0); ++r) {
      if (c > 1.0) c = 2.0 - c;
      if (c <= 0.0) c = -c;
    }
    content_[i] = std::clamp(c, 1e-12, 1.0);
  }
}

std::pair<double, double> Environment::query_oracle(int device, int level) const {
  if (t_ == 0) throw std::logic_error("query_oracle: begin_slot not called");
  const double g_deg =
      1.0 / (1.0 + cfg_.oracle_gamma * (std::pow(4.0, level) - 1.0));
  const double sd = cfg_.oracle_noise_frac * cfg_.alpha_max;
  double alpha = cfg_.alpha_max * content_[device] * g_deg +
                 sd * rng::keyed_normal(alpha_seed_, device, t_, level);
  alpha = std::clamp(alpha, 0.0, cfg_.alpha_max);
  double conf = alpha / cfg_.alpha_max +
                cfg_.conf_noise_sd * rng::keyed_normal(conf_seed_, device, t_, level);
  conf = std::clamp(conf, 0.0, 1.0);
  return {alpha, conf};
}

SlotRecord Environment::evaluate(const DegradationAction& action,
                                 const std::vector<double>& shares) const {
  if (t_ == 0) throw std::logic_error("evaluate: begin_slot not called");
  const int n = cfg_.n_devices;
  if (static_cast<int>(action.size()) != n || static_cast<int>(shares.size()) != n)
    throw std::invalid_argument("evaluate: action/shares size mismatch");

  SlotRecord r;
  r.t = t_;
  r.action = action;
  r.share = shares;
  r.gain = gain_;
  r.alpha.resize(n);
  r.conf.resize(n);
  r.tau_degrade.resize(n);
  r.tau_tx.resize(n);
  r.tau_edge.resize(n);
  r.util.resize(n);
  for (int i = 0; i < n; ++i) {
    const int a = action[i];
    if (a < 0 || a >= cfg_.n_levels)
      throw std::invalid_argument("evaluate: level out of range");
    const double bits = data_size_bits(cfg_.native_w[i], cfg_.native_h[i], a);
    r.tau_degrade[i] = degradation_latency(cfg_.native_w[i], cfg_.native_h[i], a,
                                           cfg_.degrade_px_per_s[i]);
    r.tau_tx[i] = transmission_time(bits, shares[i], gain_[i], cfg_.tx_power_w[i],
                                    cfg_.bandwidth_hz, cfg_.noise_psd_w);
    r.tau_edge[i] = edge_compute_latency(cfg_.native_w[i], cfg_.native_h[i], a,
                                         cfg_.edge_px_per_s, cfg_.edge_base_s);
    const auto [alpha, conf] = query_oracle(i, a);
    r.alpha[i] = alpha;
    r.conf[i] = conf;
    r.util[i] = alpha - cfg_.latency_weight[i] *
                            (r.tau_degrade[i] + r.tau_tx[i] + r.tau_edge[i]);
    r.total_utility += r.util[i];
  }
  return r;
}

}  // namespace lab::env
