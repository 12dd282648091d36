// Times the serial reference against the OpenMP path for each data-parallel
// kernel and checks that the outputs match bitwise.
#include <chrono>
#include <cstdio>
#include <cstring>
#include <vector>

#include "ergo/decompose.hpp"
#include "ergo/influence.hpp"
#include "ergo/ips.hpp"
#include "ergo/pca.hpp"
#include "ergo/rng.hpp"

using namespace ergo;
using Clock = std::chrono::steady_clock;

namespace {

double ms_since(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

void row(const char* name, double serial_ms, double parallel_ms, bool equal) {
  std::printf("%-36s %10.1f ms %10.1f ms   x%-5.2f %s\n", name, serial_ms, parallel_ms,
              serial_ms / parallel_ms, equal ? "bitwise-equal" : "MISMATCH");
}

}  // namespace

int main(int argc, char** argv) {
  int scale = 1;
  if (argc > 1 && std::strcmp(argv[1], "--small") == 0) scale = 0;

  std::printf("%-36s %13s %13s   %-6s %s\n", "kernel", "serial", "openmp", "speedup",
              "check");

  {
    // synchronous window pushforward, 14 -> 13 binary sites
    const auto phi = xor_noise(0.1);
    const SiteSet j = SiteSet::interval(0, scale ? 12 : 9);
    const SiteSet nj = neighbourhood_of(j, phi.neighbourhood());
    RandomStream rng(1);
    PatternDist<double> src;
    src.window = nj;
    src.alphabet = 2;
    src.weights.resize(pow_size(2, nj.size()));
    double sum = 0.0;
    for (double& w : src.weights) {
      w = rng.uniform01();
      sum += w;
    }
    for (double& w : src.weights) w /= sum;

    auto t0 = Clock::now();
    const auto a = pca_window_pushforward(phi, src, j, Exec::serial);
    const double ts = ms_since(t0);
    t0 = Clock::now();
    const auto b = pca_window_pushforward(phi, src, j, Exec::parallel);
    const double tp = ms_since(t0);
    row("pca window pushforward", ts, tp, a.weights == b.weights);
  }

  {
    // uniformized kernel application on a ring
    TorusModel<double> model{xor_noise(0.1), TorusSpec{{scale ? 16 : 12}}};
    TorusGenerator<double> gen(model);
    RandomStream rng(2);
    std::vector<double> mu(gen.states());
    double sum = 0.0;
    for (double& w : mu) {
      w = rng.uniform01();
      sum += w;
    }
    for (double& w : mu) w /= sum;

    auto t0 = Clock::now();
    const auto a = uniformization_evolve(gen, mu, 1.0, 1e-10, Exec::serial);
    const double ts = ms_since(t0);
    t0 = Clock::now();
    const auto b = uniformization_evolve(gen, mu, 1.0, 1e-10, Exec::parallel);
    const double tp = ms_since(t0);
    row("uniformization exp(tL)", ts, tp, a.dist == b.dist);
  }

  {
    // event-driven replicas
    TorusModel<double> model{xor_noise(0.1), TorusSpec{{64}}};
    const auto zeros = InitialMeasure<double>::uniform_symbol(0, 1);
    const std::vector<double> cps{1.0, 2.0, 4.0, 8.0};
    const SiteSet window = SiteSet::interval(0, 3);
    const int replicas = scale ? 100000 : 20000;

    auto t0 = Clock::now();
    const auto a = simulate_ips(model, zeros, cps, replicas, 3, window, Exec::serial);
    const double ts = ms_since(t0);
    t0 = Clock::now();
    const auto b = simulate_ips(model, zeros, cps, replicas, 3, window, Exec::parallel);
    const double tp = ms_since(t0);
    bool equal = true;
    for (std::size_t c = 0; c < cps.size(); ++c) {
      equal = equal && a.checkpoints[c].counts == b.checkpoints[c].counts;
    }
    row("ips monte carlo replicas", ts, tp, equal);
  }

  {
    // growth-process escape estimation
    Neighbourhood sym(1, {{-1}, {0}, {1}});
    const SiteSet a_set = SiteSet::interval(0, 0);
    const int replicas = scale ? 200000 : 40000;

    auto t0 = Clock::now();
    const auto a = escape_probability_estimate(sym, a_set, 2.0, 6.0, replicas, 4, Exec::serial);
    const double ts = ms_since(t0);
    t0 = Clock::now();
    const auto b =
        escape_probability_estimate(sym, a_set, 2.0, 6.0, replicas, 4, Exec::parallel);
    const double tp = ms_since(t0);
    row("growth escape replicas", ts, tp, a.escapes == b.escapes);
  }

  {
    // sdpi trial batch
    const auto qu = MarginalDist<double>::uniform(2);
    const auto theta = noise_matrix(0.2, qu);
    const int trials = scale ? 20000 : 4000;

    auto t0 = Clock::now();
    const auto a = sdpi_verify(theta, qu, 6, true, trials, 5, Exec::serial);
    const double ts = ms_since(t0);
    t0 = Clock::now();
    const auto b = sdpi_verify(theta, qu, 6, true, trials, 5, Exec::parallel);
    const double tp = ms_since(t0);
    row("sdpi trial batch", ts, tp, a.max_ratio == b.max_ratio);
  }

  return 0;
}
