#include "lab/kernels.hpp"

#include <atomic>
#include <cmath>
#include <functional>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace lab::par {

namespace {
std::atomic<bool> g_enabled{true};

// kernel column pieces for one (cached entry, candidate) pair
inline int match_count(const DegradationAction& a, const DegradationAction& b) {
  int m = 0;
  for (std::size_t i = 0; i < a.size(); ++i) m += (a[i] == b[i]);
  return m;
}

inline void one_column(const Eigen::MatrixXd& L, const Eigen::VectorXd& alpha,
                       const std::vector<double>& coef_a,
                       const std::vector<double>& coef_b,
                       const std::vector<DegradationAction>& cached,
                       const DegradationAction& cand, double cat_scale,
                       double kss, gp::Posterior& out) {
  const int n = static_cast<int>(coef_a.size());
  Eigen::VectorXd k(n);
  for (int j = 0; j < n; ++j)
    k(j) = coef_a[j] + coef_b[j] * cat_scale * match_count(cached[j], cand);
  out.mean = k.dot(alpha);
  L.triangularView<Eigen::Lower>().solveInPlace(k);
  const double var = kss - k.squaredNorm();
  out.var = var > 0.0 ? var : 0.0;
}
}  // namespace

bool enabled() { return g_enabled.load(std::memory_order_relaxed); }
void set_enabled(bool on) { g_enabled.store(on, std::memory_order_relaxed); }
bool compiled_with_openmp() {
#ifdef _OPENMP
  return true;
#else
  return false;
#endif
}

void build_gram_serial(const std::vector<std::vector<double>>& hz,
                       const std::vector<DegradationAction>& acts,
                       const std::vector<int>& slots,
                       const gp::KernelParams& p, Eigen::MatrixXd& K) {
  const int n = static_cast<int>(hz.size());
  K.resize(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j <= i; ++j) {
      const double v = gp::kernel(hz[i], acts[i], slots[i], hz[j], acts[j],
                                  slots[j], p);
      K(i, j) = v;
      K(j, i) = v;
    }
}

void build_gram_omp(const std::vector<std::vector<double>>& hz,
                    const std::vector<DegradationAction>& acts,
                    const std::vector<int>& slots, const gp::KernelParams& p,
                    Eigen::MatrixXd& K) {
  const int n = static_cast<int>(hz.size());
  K.resize(n, n);
#pragma omp parallel for schedule(dynamic, 8)
  for (int i = 0; i < n; ++i)
    for (int j = 0; j <= i; ++j) {
      const double v = gp::kernel(hz[i], acts[i], slots[i], hz[j], acts[j],
                                  slots[j], p);
      K(i, j) = v;
      K(j, i) = v;
    }
}

void build_gram(const std::vector<std::vector<double>>& hz,
                const std::vector<DegradationAction>& acts,
                const std::vector<int>& slots, const gp::KernelParams& p,
                Eigen::MatrixXd& K) {
  if (compiled_with_openmp() && enabled())
    build_gram_omp(hz, acts, slots, p, K);
  else
    build_gram_serial(hz, acts, slots, p, K);
}

void batch_posterior_serial(const Eigen::MatrixXd& L, const Eigen::VectorXd& alpha,
                            const std::vector<double>& coef_a,
                            const std::vector<double>& coef_b,
                            const std::vector<DegradationAction>& cached,
                            const std::vector<DegradationAction>& cands,
                            double cat_scale, double kss,
                            std::vector<gp::Posterior>& out) {
  out.resize(cands.size());
  for (std::size_t k = 0; k < cands.size(); ++k)
    one_column(L, alpha, coef_a, coef_b, cached, cands[k], cat_scale, kss, out[k]);
}

void batch_posterior_omp(const Eigen::MatrixXd& L, const Eigen::VectorXd& alpha,
                         const std::vector<double>& coef_a,
                         const std::vector<double>& coef_b,
                         const std::vector<DegradationAction>& cached,
                         const std::vector<DegradationAction>& cands,
                         double cat_scale, double kss,
                         std::vector<gp::Posterior>& out) {
  out.resize(cands.size());
  const long long m = static_cast<long long>(cands.size());
#pragma omp parallel for schedule(static)
  for (long long k = 0; k < m; ++k)
    one_column(L, alpha, coef_a, coef_b, cached, cands[k], cat_scale, kss, out[k]);
}

void batch_posterior(const Eigen::MatrixXd& L, const Eigen::VectorXd& alpha,
                     const std::vector<double>& coef_a,
                     const std::vector<double>& coef_b,
                     const std::vector<DegradationAction>& cached,
                     const std::vector<DegradationAction>& cands,
                     double cat_scale, double kss, std::vector<gp::Posterior>& out) {
  if (compiled_with_openmp() && enabled())
    batch_posterior_omp(L, alpha, coef_a, coef_b, cached, cands, cat_scale, kss, out);
  else
    batch_posterior_serial(L, alpha, coef_a, coef_b, cached, cands, cat_scale, kss,
                           out);
}

void map_indices_serial(long long count, const std::function<void(long long)>& f) {
  for (long long i = 0; i < count; ++i) f(i);
}

void map_indices_omp(long long count, const std::function<void(long long)>& f) {
#pragma omp parallel for schedule(dynamic, 16)
  for (long long i = 0; i < count; ++i) f(i);
}

void map_indices(long long count, const std::function<void(long long)>& f) {
  if (compiled_with_openmp() && enabled())
    map_indices_omp(count, f);
  else
    map_indices_serial(count, f);
}

}  // namespace lab::par
