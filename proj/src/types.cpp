#include "lab/types.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace lab {

namespace {

template <typename T>
void broadcast(std::vector<T>& v, int n, T def, const char* name) {
  if (v.empty()) v.assign(n, def);
  if (static_cast<int>(v.size()) == 1 && n > 1) v.assign(n, v[0]);
  if (static_cast<int>(v.size()) != n)
    throw std::invalid_argument(std::string(name) +
                                ": expected 1 or n_devices values");
}

}  // namespace

void SystemConfig::finalize() {
  broadcast(tx_power_w, n_devices, 0.1, "tx_power_w");
  broadcast(latency_weight, n_devices, 1.0, "latency_weight");
  broadcast(native_w, n_devices, 1920, "native_w");
  broadcast(native_h, n_devices, 1200, "native_h");
  broadcast(degrade_px_per_s, n_devices, 1e8, "degrade_px_per_s");
}

long long SystemConfig::action_space_size() const {
  long long s = 1;
  for (int n = 0; n < n_devices; ++n) {
    s *= n_levels;
    if (s > enum_cap) return enum_cap + 1;
  }
  return s;
}

int SystemConfig::k_initial() const {
  if (k_init > 0) return k_init;
  const long long space = action_space_size();
  return static_cast<int>(std::min<long long>(8LL * n_devices, space));
}

void SystemConfig::validate() const {
  auto fail = [](const std::string& m) { throw std::invalid_argument(m); };
  if (n_devices < 1) fail("n_devices must be >= 1");
  if (n_levels < 1) fail("n_levels must be >= 1");
  if (bandwidth_hz <= 0) fail("bandwidth_hz must be > 0");
  if (noise_psd_w <= 0) fail("noise_psd_w must be > 0");
  if (iou_threshold <= 0 || iou_threshold > 1)
    fail("iou_threshold must lie in (0, 1]");
  if (horizon < 1) fail("horizon must be >= 1");
  if (pathloss_exponent <= 0) fail("pathloss_exponent must be > 0");
  if (antenna_gain <= 0) fail("antenna_gain must be > 0");
  if (carrier_hz <= 0) fail("carrier_hz must be > 0");
  const int div = 1 << (n_levels - 1);
  for (int n = 0; n < n_devices; ++n) {
    if (tx_power_w[n] <= 0) fail("tx_power_w must be > 0");
    if (latency_weight[n] < 0) fail("latency_weight must be >= 0");
    if (native_w[n] < 1 || native_h[n] < 1) fail("native resolution must be >= 1");
    if (native_w[n] % div != 0 || native_h[n] % div != 0)
      fail("native resolution must be divisible by 2^(n_levels-1)");
    if (degrade_px_per_s[n] <= 0) fail("degrade_px_per_s must be > 0");
  }
  if (edge_px_per_s <= 0) fail("edge_px_per_s must be > 0");
  if (edge_base_s < 0) fail("edge_base_s must be >= 0");
  if (track_w_m <= 0 || track_h_m <= 0) fail("track dimensions must be > 0");
  if (step_m <= 0) fail("step_m must be > 0");
  if (content_coeff < 0 || content_coeff >= 1)
    fail("content_coeff must lie in [0, 1)");
  if (alpha_max <= 0) fail("alpha_max must be > 0");
  if (oracle_gamma < 0) fail("oracle_gamma must be >= 0");
  if (history_len < 1) fail("history_len must be >= 1");
  if (replay_capacity < 1) fail("replay_capacity must be >= 1");
  if (batch_size < 1) fail("batch_size must be >= 1");
  if (batch_size > replay_capacity) fail("batch_size must be <= replay_capacity");
  if (train_every < 1) fail("train_every must be >= 1");
  if (refit_every < 1) fail("refit_every must be >= 1");
  if (k_adapt_every < 1) fail("k_adapt_every must be >= 1");
  if (bo_capacity < 1) fail("bo_capacity must be >= 1");
  if (learning_rate <= 0) fail("learning_rate must be > 0");
  if (ucb_beta < 0) fail("ucb_beta must be >= 0");
  if (k_init < 0) fail("k_init must be >= 0 (0 = auto)");
  if (k_init > action_space_size()) fail("k_init exceeds the action space");
  for (int h : hidden)
    if (h < 1) fail("hidden widths must be >= 1");
  if (enum_cap < 1) fail("enum_cap must be >= 1");
  if (grad_clip <= 0) fail("grad_clip must be > 0");
  if (refit_max_iter < 1) fail("refit_max_iter must be >= 1");
}

std::vector<double> encode_one_hot(const DegradationAction& a, int n_levels) {
  std::vector<double> v(a.size() * static_cast<std::size_t>(n_levels), 0.0);
  for (std::size_t n = 0; n < a.size(); ++n) {
    if (a[n] < 0 || a[n] >= n_levels)
      throw std::invalid_argument("encode_one_hot: level out of range");
    v[n * n_levels + a[n]] = 1.0;
  }
  return v;
}

DegradationAction decode_one_hot(const std::vector<double>& v, int n_devices,
                                 int n_levels) {
  if (v.size() != static_cast<std::size_t>(n_devices) * n_levels)
    throw std::invalid_argument("decode_one_hot: size mismatch");
  DegradationAction a(n_devices, -1);
  for (int n = 0; n < n_devices; ++n) {
    int hits = 0;
    for (int l = 0; l < n_levels; ++l) {
      const double x = v[static_cast<std::size_t>(n) * n_levels + l];
      if (x == 1.0) {
        a[n] = l;
        ++hits;
      } else if (x != 0.0) {
        throw std::invalid_argument("decode_one_hot: entries must be 0 or 1");
      }
    }
    if (hits != 1)
      throw std::invalid_argument("decode_one_hot: need exactly one 1 per device");
  }
  return a;
}

DegradationAction action_from_index(long long i, int n_devices, int n_levels) {
  DegradationAction a(n_devices, 0);
  for (int n = n_devices - 1; n >= 0; --n) {
    a[n] = static_cast<int>(i % n_levels);
    i /= n_levels;
  }
  return a;
}

long long index_from_action(const DegradationAction& a, int n_levels) {
  long long i = 0;
  for (int level : a) i = i * n_levels + level;
  return i;
}

SlotObservation SlotObservation::zeros(int n_devices, int n_levels) {
  SlotObservation o;
  o.gain.assign(n_devices, 0.0);
  o.prev_alpha.assign(n_devices, 0.0);
  o.prev_tau.assign(n_devices, 0.0);
  o.prev_onehot.assign(static_cast<std::size_t>(n_devices) * n_levels, 0.0);
  o.prev_share.assign(n_devices, 0.0);
  o.prev_utility = 0.0;
  return o;
}

void SlotState::push(SlotObservation obs) {
  window.push_back(std::move(obs));
  while (static_cast<int>(window.size()) > capacity) window.pop_front();
}

}  // namespace lab
