#pragma once
// Wireless edge-inference environment: devices move on a rectangular track
// around the edge server, upload degraded frames over Rayleigh block fading,
// and receive detection results from a synthetic content oracle.
//
// All randomness is keyed by (seed, slot, device[, level]), so re-evaluating
// a slot under a different action never perturbs anything else. Policies run
// against separate Environment instances built from the same seed and see
// identical realizations.

#include <cstdint>
#include <utility>
#include <vector>

#include "lab/types.hpp"

namespace lab::env {

// --- standalone pieces of the model -----------------------------------------

// Frame payload after `level` halvings per axis, 24 bits per pixel.
double data_size_bits(int native_w, int native_h, int level);

// On-device downscale cost: each halving pass runs over the previous
// resolution, so the total pixel count is native * sum_{k=1..level} 4^-(k-1).
// Zero when level == 0 (frame sent as captured).
double degradation_latency(int native_w, int native_h, int level,
                           double px_per_s);

// Edge-side inference cost on the degraded frame plus fixed overhead.
double edge_compute_latency(int native_w, int native_h, int level,
                            double px_per_s, double base_s);

// Upload time of `bits` over the fraction `share` of band `bandwidth_hz`
// with receive gain `gain`. +inf when share == 0 and bits > 0.
double transmission_time(double bits, double share, double gain,
                         double power_w, double bandwidth_hz,
                         double noise_psd_w);

// Distance-dependent mean channel gain (antenna gain times free-space
// wavelength factor raised to the path-loss exponent).
double mean_gain(double distance_m, double antenna_gain, double carrier_hz,
                 double pathloss_exponent);

// Point on the axis-aligned rectangle boundary (width w, height h, centred
// at the origin) at counterclockwise arc length `arc` from the bottom-left
// corner. Used by the mobility model; exposed for tests.
std::pair<double, double> track_position(double arc, double w, double h);

// --- detection scoring -------------------------------------------------------

struct Box {
  double x1, y1, x2, y2;  // requires x2 > x1, y2 > y1
};

double iou(const Box& a, const Box& b);

// Fraction of ground-truth boxes matched by at least one prediction with
// IoU >= threshold. Throws when ground truth is empty or a box is degenerate.
double detection_accuracy(const std::vector<Box>& predicted,
                          const std::vector<Box>& ground_truth,
                          double iou_threshold);

// --- per-slot outcome --------------------------------------------------------

struct SlotRecord {
  int t = 0;
  DegradationAction action;
  std::vector<double> share;
  std::vector<double> gain;
  std::vector<double> alpha;        // confidence sums from the oracle
  std::vector<double> conf;         // normalized accuracy in [0, 1]
  std::vector<double> tau_degrade;  // seconds
  std::vector<double> tau_tx;
  std::vector<double> tau_edge;
  std::vector<double> util;         // alpha_n - w_n * (sum of latencies)
  double total_utility = 0.0;
};

class Environment {
 public:
  Environment(SystemConfig cfg, std::uint64_t master_seed);

  const SystemConfig& config() const { return cfg_; }
  int slot() const { return t_; }

  // Advance to slot t (sequential, starting at 1): move devices one step
  // along the track, evolve frame content, draw this slot's fading. Gains
  // are fixed for the duration of the slot.
  void begin_slot(int t);

  const std::vector<double>& gains() const { return gain_; }
  const std::vector<double>& distances() const { return dist_; }
  double content(int n) const { return content_[n]; }

  // Realized outcome of playing (action, shares) in the current slot.
  // Pure: probing alternatives does not disturb the environment.
  SlotRecord evaluate(const DegradationAction& action,
                      const std::vector<double>& shares) const;

  // Oracle response for one device at the current slot.
  std::pair<double, double> query_oracle(int device, int level) const;

 private:
  SystemConfig cfg_;
  std::uint64_t mobility_seed_, content_seed_, alpha_seed_, conf_seed_,
      channel_seed_;
  int t_ = 0;
  std::vector<double> arc0_;     // initial arc positions on the track
  std::vector<double> content_;  // C_n(t) in (0, 1]
  std::vector<double> dist_, gain_;
};

}  // namespace lab::env
