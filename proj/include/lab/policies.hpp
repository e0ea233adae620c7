#pragma once
// Per-slot controllers. Each policy sees the same observation record and
// returns a degradation action; the harness then allocates bandwidth,
// realizes the slot, and feeds the outcome back through observe().
//
//   lab         learned actor proposes candidates, GP critic picks one
//   full_bo     GP critic scored over the exhaustive action space
//   ideal       oracle: probes every action against the live environment
//   delay_obli  never degrades (level 0 everywhere)
//   delay_min   always degrades fully (level A-1 everywhere)
//   random      uniform level per device
//
// decide() and observe() alternate strictly, once per slot, starting at
// slot 1.

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "lab/actor.hpp"
#include "lab/env.hpp"
#include "lab/gp.hpp"
#include "lab/rng.hpp"
#include "lab/types.hpp"

namespace lab::policy {

struct Decision {
  DegradationAction action;
  long long k_evaluated = 1;  // actions scored while deciding this slot
  int chosen_rank = 0;        // 1-based rank in the candidate list, 0 if n/a
};

class Policy {
 public:
  virtual ~Policy() = default;
  virtual const char* name() const = 0;
  virtual Decision decide(const SlotObservation& obs, int slot) = 0;
  // Realized outcome of the action the harness played. Default: stateless.
  virtual void observe(const env::SlotRecord& rec, int slot) {
    (void)rec;
    (void)slot;
  }
};

// Continuous GP features for a gain vector: log10 per device. Gains spread
// over orders of magnitude, so the RBF metric lives in log space.
std::vector<double> gain_features(const std::vector<double>& gains);

// Shares for a fixed action at the current gains. Devices whose latency
// weight is zero still need uplink time, so they enter the water-filling
// problem with weight one; realized utilities keep the true weight.
std::vector<double> allocate_shares(const SystemConfig& cfg,
                                    const std::vector<double>& gains,
                                    const DegradationAction& action);

class LabPolicy : public Policy {
 public:
  LabPolicy(const SystemConfig& cfg, std::uint64_t master_seed);
  const char* name() const override { return "lab"; }
  Decision decide(const SlotObservation& obs, int slot) override;
  void observe(const env::SlotRecord& rec, int slot) override;

  int current_k() const { return k_; }
  const gp::Cache& cache() const { return cache_; }
  const actor::PreferenceNet& net() const { return net_; }
  const gp::KernelParams& kernel_params() const { return params_; }

 private:
  SystemConfig cfg_;
  int k_init_;
  rng::Stream sample_, noise_;
  actor::PreferenceNet net_;
  SlotState state_;
  actor::ReplayMemory replay_;
  gp::Cache cache_;
  gp::RollingModel rolling_;
  gp::KernelParams params_;
  int k_ = 0;
  std::vector<int> ranks_;            // chosen ranks since the last adaptation
  std::vector<double> last_feats_;    // input the net saw this slot
};

class FullBoPolicy : public Policy {
 public:
  FullBoPolicy(const SystemConfig& cfg);
  const char* name() const override { return "full_bo"; }
  Decision decide(const SlotObservation& obs, int slot) override;
  void observe(const env::SlotRecord& rec, int slot) override;

  const gp::Cache& cache() const { return cache_; }
  const gp::KernelParams& kernel_params() const { return params_; }

 private:
  SystemConfig cfg_;
  std::vector<DegradationAction> all_actions_;
  gp::Cache cache_;
  gp::RollingModel rolling_;
  gp::KernelParams params_;
};

// Upper bound: plays the utility-maximizing action by probing the live
// environment (pure evaluation, no state disturbance).
class IdealPolicy : public Policy {
 public:
  IdealPolicy(const SystemConfig& cfg, const env::Environment* probe);
  const char* name() const override { return "ideal"; }
  Decision decide(const SlotObservation& obs, int slot) override;

 private:
  SystemConfig cfg_;
  const env::Environment* env_;
  std::vector<DegradationAction> all_actions_;
};

class FixedLevelPolicy : public Policy {
 public:
  FixedLevelPolicy(const SystemConfig& cfg, int level, const char* token);
  const char* name() const override { return token_; }
  Decision decide(const SlotObservation& obs, int slot) override;

 private:
  DegradationAction action_;
  const char* token_;
};

class RandomPolicy : public Policy {
 public:
  RandomPolicy(const SystemConfig& cfg, std::uint64_t master_seed);
  const char* name() const override { return "random"; }
  Decision decide(const SlotObservation& obs, int slot) override;

 private:
  int n_devices_, n_levels_;
  rng::Stream draw_;
};

// Known policy tokens, in reporting order.
const std::vector<std::string>& policy_tokens();

// `probe` is required for "ideal" and ignored elsewhere. The config must be
// finalized and valid. Throws on an unknown token.
std::unique_ptr<Policy> make_policy(const std::string& token,
                                    const SystemConfig& cfg,
                                    std::uint64_t master_seed,
                                    const env::Environment* probe);

}  // namespace lab::policy
