// Microbenchmark comparing the serial reference kernels against the OpenMP
// variants. Prints one table row per (kernel, size): median wall time of each
// variant and the speedup. Single-core machines should hover around 1.0x.
#include <algorithm>
#include <chrono>
#include <cstdio>
#include <functional>
#include <vector>

#include "lab/gp.hpp"
#include "lab/kernels.hpp"
#include "lab/rng.hpp"

using namespace lab;
using clock_t_ = std::chrono::steady_clock;

namespace {

double median_ms(const std::function<void()>& f, int reps) {
  std::vector<double> times;
  f();  // warm up
  for (int r = 0; r < reps; ++r) {
    const auto t0 = clock_t_::now();
    f();
    const auto t1 = clock_t_::now();
    times.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());
  }
  std::sort(times.begin(), times.end());
  return times[times.size() / 2];
}

void row(const char* kernel, int size, double serial, double omp) {
  std::printf("%-16s %8d %12.3f %12.3f %10.2fx\n", kernel, size, serial, omp,
              serial / omp);
}

}  // namespace

int main() {
  std::printf("OpenMP compiled: %s, enabled: %s\n",
              par::compiled_with_openmp() ? "yes" : "no",
              par::enabled() ? "yes" : "no");
  std::printf("%-16s %8s %12s %12s %10s\n", "kernel", "size", "serial ms",
              "omp ms", "speedup");

  rng::Stream g(1);
  const int cont_dim = 3, devices = 4;
  gp::KernelParams p;
  p.var_cont = 0.9;
  p.var_cat = 0.7;
  p.noise_sd = 0.2;
  p.recency = 0.02;
  p.length.assign(cont_dim, 0.8);

  for (int n : {64, 128, 256, 512}) {
    std::vector<std::vector<double>> hz;
    std::vector<DegradationAction> acts;
    std::vector<int> slots;
    for (int i = 0; i < n; ++i) {
      std::vector<double> h(cont_dim);
      for (double& v : h) v = g.normal();
      hz.push_back(h);
      DegradationAction a(devices);
      for (int& lvl : a) lvl = static_cast<int>(g.below(4));
      acts.push_back(a);
      slots.push_back(i + 1);
    }
    Eigen::MatrixXd K;
    const double s =
        median_ms([&] { par::build_gram_serial(hz, acts, slots, p, K); }, 9);
    const double o =
        median_ms([&] { par::build_gram_omp(hz, acts, slots, p, K); }, 9);
    row("build_gram", n, s, o);

    if (n == 64) {
      par::build_gram_serial(hz, acts, slots, p, K);
      K.diagonal().array() += p.noise_sd * p.noise_sd;
      const Eigen::MatrixXd L = K.llt().matrixL();
      Eigen::VectorXd y(n);
      for (int i = 0; i < n; ++i) y(i) = g.normal();
      const Eigen::VectorXd alpha =
          L.transpose().triangularView<Eigen::Upper>().solve(
              L.triangularView<Eigen::Lower>().solve(y));
      std::vector<double> ca(n, 0.1), cb(n, 0.5);
      for (int m : {64, 256, 1024}) {
        std::vector<DegradationAction> cands;
        for (int c = 0; c < m; ++c) {
          DegradationAction a(devices);
          for (int& lvl : a) lvl = static_cast<int>(g.below(4));
          cands.push_back(a);
        }
        std::vector<gp::Posterior> out;
        const double bs = median_ms(
            [&] {
              par::batch_posterior_serial(L, alpha, ca, cb, acts, cands, 0.5,
                                          1.2, out);
            },
            9);
        const double bo = median_ms(
            [&] {
              par::batch_posterior_omp(L, alpha, ca, cb, acts, cands, 0.5, 1.2,
                                       out);
            },
            9);
        row("batch_posterior", m, bs, bo);
      }
    }
  }

  for (int n : {1000, 10000}) {
    std::vector<double> sink(n);
    auto work = [&sink](long long i) {
      rng::Stream s(static_cast<std::uint64_t>(i) + 7);
      double acc = 0.0;
      for (int k = 0; k < 200; ++k) acc += s.normal();
      sink[i] = acc;
    };
    const double s = median_ms([&] { par::map_indices_serial(n, work); }, 5);
    const double o = median_ms([&] { par::map_indices_omp(n, work); }, 5);
    row("map_indices", n, s, o);
  }
  return 0;
}
