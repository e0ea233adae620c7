#include <algorithm>
#include <cmath>
#include <set>

#include "doctest.h"
#include "lab/bandwidth.hpp"
#include "lab/env.hpp"
#include "lab/harness.hpp"
#include "lab/policies.hpp"

using namespace lab;

namespace {

SystemConfig tiny_config() {
  SystemConfig cfg;
  cfg.n_devices = 2;
  cfg.n_levels = 2;
  cfg.horizon = 40;
  cfg.replay_capacity = 32;
  cfg.batch_size = 8;
  cfg.train_every = 10;
  cfg.refit_every = 20;
  cfg.k_adapt_every = 16;
  cfg.bo_capacity = 32;
  cfg.hidden = {16};
  cfg.refit_max_iter = 15;
  cfg.finalize();
  cfg.validate();
  return cfg;
}

}  // namespace

TEST_CASE("fixed policies play their level everywhere") {
  SystemConfig cfg = tiny_config();
  auto obli = policy::make_policy("delay_obli", cfg, 1, nullptr);
  auto mini = policy::make_policy("delay_min", cfg, 1, nullptr);
  SlotObservation obs = SlotObservation::zeros(cfg.n_devices, cfg.n_levels);
  obs.gain = {1e-9, 2e-9};
  for (int t = 1; t <= 5; ++t) {
    const auto d0 = obli->decide(obs, t);
    const auto d1 = mini->decide(obs, t);
    CHECK(d0.action == DegradationAction{0, 0});
    CHECK(d1.action == DegradationAction{1, 1});
    CHECK(d0.k_evaluated == 1);
    CHECK(d0.chosen_rank == 0);
  }
}

TEST_CASE("random policy is seed-deterministic and in range") {
  SystemConfig cfg = tiny_config();
  cfg.n_levels = 4;
  cfg.finalize();
  SlotObservation obs = SlotObservation::zeros(cfg.n_devices, cfg.n_levels);
  obs.gain = {1e-9, 2e-9};

  auto p1 = policy::make_policy("random", cfg, 7, nullptr);
  auto p2 = policy::make_policy("random", cfg, 7, nullptr);
  auto p3 = policy::make_policy("random", cfg, 8, nullptr);
  bool any_diff = false;
  std::set<int> seen;
  for (int t = 1; t <= 64; ++t) {
    const auto a = p1->decide(obs, t).action;
    const auto b = p2->decide(obs, t).action;
    const auto c = p3->decide(obs, t).action;
    CHECK(a == b);
    any_diff = any_diff || (a != c);
    for (int lvl : a) {
      CHECK(lvl >= 0);
      CHECK(lvl < 4);
      seen.insert(lvl);
    }
  }
  CHECK(any_diff);
  CHECK(seen.size() == 4);  // all levels reachable
}

TEST_CASE("share allocation treats zero-weight devices as weight one") {
  SystemConfig cfg = tiny_config();
  cfg.latency_weight = {0.0, 1.0};
  cfg.finalize();
  // Identical radios and identical payloads: with the fallback the devices
  // are symmetric, so the optimal split is exactly even.
  const std::vector<double> gains{3e-9, 3e-9};
  const auto shares = policy::allocate_shares(cfg, gains, {0, 0});
  REQUIRE(shares.size() == 2);
  CHECK(shares[0] == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(shares[0] + shares[1] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("share allocation favors the heavier payload") {
  SystemConfig cfg = tiny_config();
  const std::vector<double> gains{3e-9, 3e-9};
  // Device 0 sends the full frame, device 1 a downscaled one.
  const auto shares = policy::allocate_shares(cfg, gains, {0, 1});
  CHECK(shares[0] > shares[1]);
  CHECK(shares[0] + shares[1] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("observation construction carries the previous record") {
  SystemConfig cfg = tiny_config();
  const std::vector<double> gains{1e-9, 4e-9};

  const SlotObservation first = harness::make_observation(gains, nullptr, cfg);
  CHECK(first.gain == gains);
  CHECK(first.prev_utility == 0.0);
  for (double v : first.prev_alpha) CHECK(v == 0.0);

  env::SlotRecord rec;
  rec.action = {1, 0};
  rec.share = {0.3, 0.7};
  rec.alpha = {0.8, 1.2};
  rec.conf = {0.4, 0.6};
  rec.tau_degrade = {0.01, 0.0};
  rec.tau_tx = {0.5, 1.5};
  rec.tau_edge = {0.02, 0.08};
  rec.total_utility = -1.25;
  const SlotObservation next = harness::make_observation(gains, &rec, cfg);
  CHECK(next.prev_alpha == rec.alpha);
  CHECK(next.prev_share == rec.share);
  CHECK(next.prev_utility == -1.25);
  CHECK(next.prev_tau[0] == doctest::Approx(0.53));
  CHECK(next.prev_tau[1] == doctest::Approx(1.58));
  CHECK(next.prev_onehot == encode_one_hot({1, 0}, cfg.n_levels));
}

TEST_CASE("factory rejects bad requests") {
  SystemConfig cfg = tiny_config();
  CHECK_THROWS(policy::make_policy("nope", cfg, 1, nullptr));
  CHECK_THROWS(policy::make_policy("ideal", cfg, 1, nullptr));  // no probe
}

TEST_CASE("enumeration cap guards exhaustive policies") {
  SystemConfig cfg;
  cfg.n_devices = 12;
  cfg.n_levels = 4;  // 4^12 = 16.7M >> cap
  cfg.finalize();
  CHECK_THROWS(policy::make_policy("full_bo", cfg, 1, nullptr));
}

TEST_CASE("ideal dominates every policy slot by slot under paired seeds") {
  SystemConfig cfg = tiny_config();
  const std::vector<std::string> tokens{"ideal", "random", "delay_obli",
                                        "delay_min"};
  const auto runs = harness::run_bench(cfg, tokens, {11, 12});
  REQUIRE(runs.size() == tokens.size() * 2);

  auto find_run = [&](const std::string& pol, std::uint64_t seed)
      -> const harness::RunResult& {
    for (const auto& r : runs)
      if (r.policy == pol && r.seed == seed) return r;
    REQUIRE(false);
    return runs.front();
  };

  for (std::uint64_t seed : {11ull, 12ull}) {
    const auto& ideal = find_run("ideal", seed);
    for (const auto& tok : tokens) {
      const auto& run = find_run(tok, seed);
      REQUIRE(run.slots.size() == ideal.slots.size());
      for (std::size_t t = 0; t < run.slots.size(); ++t) {
        // Common random numbers: identical channel realizations.
        CHECK(run.slots[t].rec.gain == ideal.slots[t].rec.gain);
        CHECK(run.slots[t].rec.total_utility <=
              ideal.slots[t].rec.total_utility + 1e-9);
      }
    }
  }
}

TEST_CASE("ideal picks the per-slot argmax over the full action space") {
  SystemConfig cfg = tiny_config();
  cfg.horizon = 10;
  env::Environment environment(cfg, 33);
  auto ideal = policy::make_policy("ideal", environment.config(), 33, &environment);

  for (int t = 1; t <= cfg.horizon; ++t) {
    environment.begin_slot(t);
    const SlotObservation obs =
        harness::make_observation(environment.gains(), nullptr, cfg);
    const auto d = ideal->decide(obs, t);
    CHECK(d.k_evaluated == 4);  // 2 devices, 2 levels

    // Recompute the exhaustive max independently.
    double best = -1e300;
    for (int i = 0; i < 4; ++i) {
      const DegradationAction a = action_from_index(i, 2, 2);
      const auto shares = policy::allocate_shares(cfg, environment.gains(), a);
      best = std::max(best, environment.evaluate(a, shares).total_utility);
    }
    const auto chosen_shares =
        policy::allocate_shares(cfg, environment.gains(), d.action);
    CHECK(environment.evaluate(d.action, chosen_shares).total_utility ==
          doctest::Approx(best).epsilon(1e-12));
  }
}

TEST_CASE("full enumeration critic reports the whole action space") {
  SystemConfig cfg = tiny_config();
  cfg.horizon = 30;
  const auto run = harness::run_policy(cfg, "full_bo", 5);
  REQUIRE(run.slots.size() == 30);
  for (const auto& s : run.slots) {
    CHECK(s.k_evaluated == 4);
    CHECK(s.chosen_rank == 0);
  }
  // Determinism end to end.
  const auto again = harness::run_policy(cfg, "full_bo", 5);
  for (std::size_t t = 0; t < run.slots.size(); ++t) {
    CHECK(run.slots[t].rec.action == again.slots[t].rec.action);
    CHECK(run.slots[t].rec.total_utility == again.slots[t].rec.total_utility);
  }
}

TEST_CASE("learning controller runs the full loop and stays deterministic") {
  SystemConfig cfg = tiny_config();
  cfg.horizon = 80;
  const auto run = harness::run_policy(cfg, "lab", 3);
  REQUIRE(run.slots.size() == 80);

  const int k_init = cfg.k_initial();
  CHECK(k_init == 4);  // min(8*2, 2^2)
  for (const auto& s : run.slots) {
    CHECK(s.k_evaluated >= 1);
    CHECK(s.k_evaluated <= k_init);
    CHECK(s.chosen_rank >= 1);
    CHECK(s.chosen_rank <= s.k_evaluated);
    for (int lvl : s.rec.action) {
      CHECK(lvl >= 0);
      CHECK(lvl < cfg.n_levels);
    }
  }
  CHECK(run.agg.k_mean <= k_init);

  const auto again = harness::run_policy(cfg, "lab", 3);
  for (std::size_t t = 0; t < run.slots.size(); ++t) {
    CHECK(run.slots[t].rec.action == again.slots[t].rec.action);
    CHECK(run.slots[t].rec.total_utility == again.slots[t].rec.total_utility);
    CHECK(run.slots[t].k_evaluated == again.slots[t].k_evaluated);
  }
}

TEST_CASE("learning controller beats blind baselines on a medium run") {
  // Long enough for the critic to see utility differences between actions;
  // the learned loop should clear the uniform-random baseline.
  SystemConfig cfg = tiny_config();
  cfg.horizon = 300;
  const auto runs =
      harness::run_bench(cfg, {"lab", "random"}, {101, 202, 303});
  double lab_sum = 0.0, rnd_sum = 0.0;
  for (const auto& r : runs)
    (r.policy == "lab" ? lab_sum : rnd_sum) += r.agg.utility_bar;
  CHECK(lab_sum > rnd_sum);
}
