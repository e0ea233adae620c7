#pragma once
// Data-parallel inner loops. Every function has a serial reference and an
// OpenMP variant computing bit-identical results (each output element is
// written by exactly one iteration, so thread count never changes values).
// The dispatching wrappers pick the OpenMP path when it is compiled in and
// enabled at runtime.

#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "lab/gp.hpp"

namespace lab::par {

bool enabled();
void set_enabled(bool on);
bool compiled_with_openmp();

// Gram matrix of the composite kernel over cache entries (no noise on the
// diagonal). hz are standardized continuous features.
void build_gram_serial(const std::vector<std::vector<double>>& hz,
                       const std::vector<DegradationAction>& acts,
                       const std::vector<int>& slots,
                       const gp::KernelParams& p, Eigen::MatrixXd& K);
void build_gram_omp(const std::vector<std::vector<double>>& hz,
                    const std::vector<DegradationAction>& acts,
                    const std::vector<int>& slots, const gp::KernelParams& p,
                    Eigen::MatrixXd& K);
void build_gram(const std::vector<std::vector<double>>& hz,
                const std::vector<DegradationAction>& acts,
                const std::vector<int>& slots, const gp::KernelParams& p,
                Eigen::MatrixXd& K);

// Posterior for a batch of candidates sharing the continuous/temporal part.
// Column k of the cross-kernel is coef_a[j] + coef_b[j] * cat_scale *
// match(cached[j], cands[k]); mean/var come from the cached factorization.
void batch_posterior_serial(const Eigen::MatrixXd& L, const Eigen::VectorXd& alpha,
                            const std::vector<double>& coef_a,
                            const std::vector<double>& coef_b,
                            const std::vector<DegradationAction>& cached,
                            const std::vector<DegradationAction>& cands,
                            double cat_scale, double kss,
                            std::vector<gp::Posterior>& out);
void batch_posterior_omp(const Eigen::MatrixXd& L, const Eigen::VectorXd& alpha,
                         const std::vector<double>& coef_a,
                         const std::vector<double>& coef_b,
                         const std::vector<DegradationAction>& cached,
                         const std::vector<DegradationAction>& cands,
                         double cat_scale, double kss,
                         std::vector<gp::Posterior>& out);
void batch_posterior(const Eigen::MatrixXd& L, const Eigen::VectorXd& alpha,
                     const std::vector<double>& coef_a,
                     const std::vector<double>& coef_b,
                     const std::vector<DegradationAction>& cached,
                     const std::vector<DegradationAction>& cands,
                     double cat_scale, double kss, std::vector<gp::Posterior>& out);

// out[i] = f(i) fan-out over an index range (action enumeration, seed
// sweeps). f must be safe to call concurrently.
void map_indices_serial(long long count, const std::function<void(long long)>& f);
void map_indices_omp(long long count, const std::function<void(long long)>& f);
void map_indices(long long count, const std::function<void(long long)>& f);

}  // namespace lab::par
