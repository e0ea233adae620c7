#pragma once
// Gaussian-process critic over (channel gains, degradation action, slot).
//
// Kernel: k(z, z') = tmp * (rbf + cat + rbf * cat) with
//   rbf = var_cont * exp(-1/2 sum_m ((h_m - h'_m)/len_m)^2)   (standardized h)
//   cat = (var_cat / N) * |{n : a_n == a'_n}|
//   tmp = (1 - recency)^(|t - t'| / 2)
// The posterior and marginal likelihood follow the standard zero-mean GP
// equations with observation noise noise_sd^2.

#include <cstdint>
#include <deque>
#include <vector>

#include <Eigen/Dense>

#include "lab/types.hpp"

namespace lab::gp {

struct KernelParams {
  double var_cont = 1.0;
  std::vector<double> length;  // one per continuous dimension
  double var_cat = 1.0;
  double recency = 0.01;       // in [0, 1)
  double noise_sd = 0.1;
  void validate(int cont_dim) const;
};

struct Entry {
  std::vector<double> h;  // continuous features (callers pass log-scale gains)
  DegradationAction a;
  int t = 0;
  double y = 0.0;
};

// Sliding observation window, capacity J_B, oldest evicted first.
class Cache {
 public:
  explicit Cache(int capacity);
  void append(Entry e);
  int size() const { return static_cast<int>(buf_.size()); }
  bool empty() const { return buf_.empty(); }
  int capacity() const { return cap_; }
  const Entry& operator[](int i) const { return buf_[i]; }
  double best_y() const;  // max observed y; requires non-empty

 private:
  std::deque<Entry> buf_;
  int cap_;
};

// Per-dimension affine map fitted on the cached continuous features.
// Degenerate dimensions (fewer than 2 points or zero spread) map with
// scale 1 so queries stay finite.
struct Standardizer {
  std::vector<double> mean, sd;
  static Standardizer fit(const Cache& cache, int dim);
  std::vector<double> apply(const std::vector<double>& h) const;
};

double kernel(const std::vector<double>& hz1, const DegradationAction& a1, int t1,
              const std::vector<double>& hz2, const DegradationAction& a2, int t2,
              const KernelParams& p);

struct Posterior {
  double mean = 0.0;
  double var = 0.0;
};

// Immutable fitted model: factorization of K + noise^2 I over one cache
// snapshot. Empty caches give the prior.
class Model {
 public:
  Model() = default;
  // Fits on a cache snapshot. By default the feature standardization is
  // computed from the same snapshot; pass `st` to pin it (the rolling
  // variant freezes it between parameter refits).
  static Model fit(const Cache& cache, const KernelParams& p,
                   const Standardizer* st = nullptr);

  Posterior posterior(const std::vector<double>& h_raw, const DegradationAction& a,
                      int t) const;
  // Candidates share (h, t); exploits the common continuous/temporal factors.
  void posterior_batch(const std::vector<double>& h_raw,
                       const std::vector<DegradationAction>& cands, int t,
                       std::vector<Posterior>& out) const;

  double log_marginal() const { return lml_; }
  int size() const { return n_; }
  double jitter() const { return jitter_; }
  const KernelParams& params() const { return params_; }
  const Standardizer& standardizer() const { return std_; }

 private:
  friend class RollingModel;
  void factorize(const Cache& cache, Eigen::MatrixXd K);

  KernelParams params_;
  Standardizer std_;
  int n_ = 0;
  double jitter_ = 0.0;
  double lml_ = 0.0;
  Eigen::MatrixXd L_;        // lower Cholesky of K + noise^2 I (+ jitter)
  Eigen::VectorXd alpha_;    // (K + noise^2 I)^-1 y
  std::vector<std::vector<double>> hz_;  // standardized cached h
  std::vector<DegradationAction> act_;
  std::vector<int> slot_;
};

// Same results as Model::fit each slot, but reuses the unchanged part of the
// Gram matrix while the window slides. Rebuilds from scratch whenever the
// parameters change.
class RollingModel {
 public:
  explicit RollingModel(int capacity) : cap_(capacity) {}
  // Call after cache.append(e); `cache` must reflect the slide already.
  void update(const Cache& cache, const KernelParams& p);
  void invalidate() { gram_valid_ = false; }
  const Model& model() const { return model_; }

 private:
  int cap_;
  bool gram_valid_ = false;
  KernelParams last_params_;
  Eigen::MatrixXd gram_;  // kernel matrix without noise, cache order
  Model model_;
};

// Marginal likelihood of the cache under the kernel, with the analytic
// gradient in the unconstrained parameterization
// (log var_cont, log length..., log var_cat, logit recency, log noise_sd).
double log_marginal(const Cache& cache, const KernelParams& p);
struct LmlGrad {
  double value = 0.0;
  Eigen::VectorXd grad;
};
LmlGrad log_marginal_with_grad(const Cache& cache, const KernelParams& p);

// theta <-> params maps for the refit optimizer (exposed for tests).
Eigen::VectorXd params_to_theta(const KernelParams& p);
KernelParams theta_to_params(const Eigen::VectorXd& t, int cont_dim);

KernelParams initial_params(const Cache& cache, int cont_dim);

struct RefitResult {
  KernelParams params;
  double lml_before = 0.0;
  double lml_after = 0.0;
  int iterations = 0;
};
// L-BFGS ascent on the marginal likelihood; never returns parameters worse
// than the starting point.
RefitResult refit(const Cache& cache, const KernelParams& start, int max_iter);

double acquisition(double mean, double sd, Acquisition kind, double beta,
                   double best_y);

struct Selection {
  int index = 0;    // position in the candidate list, ties -> lowest
  double acq = 0.0;
  std::vector<double> values;  // acquisition per candidate
};
Selection select_action(const Model& m, const std::vector<double>& h_raw,
                        const std::vector<DegradationAction>& cands, int t,
                        Acquisition kind, double beta, double best_y);

}  // namespace lab::gp
