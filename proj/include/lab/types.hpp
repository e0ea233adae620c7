#pragma once
// Shared value types: system configuration, degradation actions and their
// one-hot encoding, per-slot observations.

#include <cstdint>
#include <deque>
#include <string>
#include <vector>

namespace lab {

// Named substreams derived from the master seed. Every consumer of
// randomness takes its own stream so runs stay reproducible when one
// module changes how much randomness it draws.
namespace streams {
inline constexpr const char* kEnv = "env";                   // content process, oracle noise
inline constexpr const char* kChannel = "channel";           // small-scale fading
inline constexpr const char* kActorNoise = "actor-noise";    // candidate perturbations
inline constexpr const char* kActorSample = "actor-sample";  // categorical draws, minibatches
inline constexpr const char* kActorInit = "actor-init";      // weight init
inline constexpr const char* kPolicyRandom = "policy-random";
}  // namespace streams

enum class Acquisition { kUcb, kEi, kPi };

struct SystemConfig {
  // Devices and radio
  int n_devices = 3;                    // N
  int n_levels = 4;                     // degradation levels per device, A
  double bandwidth_hz = 5e6;            // shared uplink bandwidth W
  std::vector<double> tx_power_w;       // per device, default 0.1
  double noise_psd_w = 3.9810717055349694e-21;  // -174 dBm/Hz in W/Hz
  std::vector<double> latency_weight;   // per device, default 1.0
  std::vector<int> native_w;            // per device, default 1920
  std::vector<int> native_h;            // per device, default 1200
  double iou_threshold = 0.5;
  int horizon = 3000;                   // slots per run
  double pathloss_exponent = 2.4;
  double antenna_gain = 4.11;
  double carrier_hz = 2.4e9;

  // Latency model
  std::vector<double> degrade_px_per_s;  // on-device downscale throughput, default 1e8
  double edge_px_per_s = 2e8;            // edge inference throughput
  double edge_base_s = 0.01;             // fixed edge overhead per frame

  // Mobility (rectangular track centred on the edge server)
  double track_w_m = 100.0;
  double track_h_m = 50.0;
  double step_m = 2.5;

  // Synthetic content process and detection oracle
  double content_mean = 0.75;
  double content_coeff = 0.95;
  double content_sd = 0.08;
  double content_init_lo = 0.5;
  double content_init_hi = 1.0;
  double alpha_max = 2.0;          // per-device confidence-sum ceiling
  double oracle_gamma = 0.05;      // degradation sensitivity of the oracle
  double oracle_noise_frac = 0.05; // sd of alpha noise as a fraction of alpha_max
  double conf_noise_sd = 0.02;     // extra noise on normalized accuracy

  // Controller
  int history_len = 1;        // l
  int replay_capacity = 512;  // J_D
  int batch_size = 128;       // J_D^s
  int train_every = 20;       // slots between actor updates
  int refit_every = 20;       // slots between GP hyperparameter refits
  int k_adapt_every = 32;     // slots between candidate-count adaptations
  int bo_capacity = 256;      // J_B, GP cache window
  double learning_rate = 0.01;
  double ucb_beta = 2.0;
  int k_init = 0;             // 0 = auto: min(8N, A^N)
  std::vector<int> hidden = {128, 128};
  Acquisition acquisition = Acquisition::kUcb;
  long long enum_cap = 100000;  // refuse exhaustive enumeration beyond this
  double grad_clip = 5.0;
  int refit_max_iter = 40;

  // Resolve defaults that depend on other fields (per-device vectors,
  // auto K_1). Call once after construction/parsing.
  void finalize();
  // Throws std::invalid_argument naming the offending field.
  void validate() const;

  long long action_space_size() const;  // A^N, saturating at enum_cap+1
  int k_initial() const;
};

// One degradation level per device, each in [0, A).
using DegradationAction = std::vector<int>;

// One-hot layout: device-major, N blocks of A entries.
std::vector<double> encode_one_hot(const DegradationAction& a, int n_levels);
// Requires exactly one 1.0 per device block.
DegradationAction decode_one_hot(const std::vector<double>& v, int n_devices,
                                 int n_levels);

// Enumeration order for exhaustive sweeps: index i maps to levels where
// device 0 is the most significant digit base A.
DegradationAction action_from_index(long long i, int n_devices, int n_levels);
long long index_from_action(const DegradationAction& a, int n_levels);

// What a controller sees at the start of slot t: this slot's channel gains
// plus the realized outcome of slot t-1 (zeros at t=1).
struct SlotObservation {
  std::vector<double> gain;        // h_t, per device
  std::vector<double> prev_alpha;  // per device confidence sums
  std::vector<double> prev_tau;    // per device total latency, seconds
  std::vector<double> prev_onehot; // previous action, N*A
  std::vector<double> prev_share;  // previous bandwidth fractions
  double prev_utility = 0.0;

  static SlotObservation zeros(int n_devices, int n_levels);
};

// Rolling window of the last l observations, newest at the back,
// zero-padded when fewer than l slots have elapsed.
struct SlotState {
  int capacity = 1;
  std::deque<SlotObservation> window;

  explicit SlotState(int l = 1) : capacity(l) {}
  void push(SlotObservation obs);
};

}  // namespace lab
