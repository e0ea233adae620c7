#pragma once
// Experiment driver: plays one policy against one seeded environment for a
// full horizon, or a set of policies against common random numbers so every
// policy sees identical fading, content, and oracle draws.

#include <cstdint>
#include <string>
#include <vector>

#include "lab/env.hpp"
#include "lab/policies.hpp"
#include "lab/types.hpp"

namespace lab::harness {

// Observation for the slot whose gains are `gains`; `prev` is the realized
// record of the previous slot (null at t = 1).
SlotObservation make_observation(const std::vector<double>& gains,
                                 const env::SlotRecord* prev,
                                 const SystemConfig& cfg);

struct SlotResult {
  env::SlotRecord rec;
  long long k_evaluated = 1;
  int chosen_rank = 0;
  double decision_seconds = 0.0;
};

// Per-run aggregates. alpha/tau/conf sum over devices first, then average
// over slots; utility averages the per-slot totals.
struct Aggregates {
  double alpha_bar = 0.0;
  double tau_bar = 0.0;
  double conf_bar = 0.0;
  double utility_bar = 0.0;
  double k_mean = 0.0;
  double decision_seconds_median = 0.0;
};

struct RunResult {
  std::string policy;
  std::uint64_t seed = 0;
  std::vector<SlotResult> slots;
  Aggregates agg;
};

Aggregates aggregate(const std::vector<SlotResult>& slots);

// One policy, one seed, full horizon.
RunResult run_policy(const SystemConfig& cfg, const std::string& token,
                     std::uint64_t seed);

// Paired sweep: every (policy, seed) pair runs against a fresh environment
// built from the same seed, so slot randomness is common across policies.
// Results are ordered policy-major, matching the input token order.
std::vector<RunResult> run_bench(const SystemConfig& cfg,
                                 const std::vector<std::string>& tokens,
                                 const std::vector<std::uint64_t>& seeds);

}  // namespace lab::harness
