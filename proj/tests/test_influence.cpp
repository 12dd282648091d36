#include <doctest.h>

#include <cmath>
#include <unordered_set>

#include "ergo/influence.hpp"
#include "ergo/rng.hpp"

using namespace ergo;

namespace {

struct SiteKey {
  std::size_t operator()(const Site& s) const {
    std::size_t h = 1469598103934665603ull;
    for (int c : s) {
      h ^= static_cast<std::size_t>(static_cast<unsigned>(c));
      h *= 1099511628211ull;
    }
    return h;
  }
};

// Independent oracle: discrete-time chain with step h, each infected site
// fires with probability h per step.
SiteSet growth_oracle(const Neighbourhood& N, const SiteSet& A, double t, double h,
                      RandomStream& rng) {
  std::vector<Site> infected(A.sites().begin(), A.sites().end());
  std::unordered_set<Site, SiteKey> seen(infected.begin(), infected.end());
  const int steps = static_cast<int>(std::llround(t / h));
  for (int step = 0; step < steps; ++step) {
    const std::size_t count = infected.size();  // only the old frontier fires
    for (std::size_t i = 0; i < count; ++i) {
      if (rng.uniform01() <= h) {
        for (const Site& o : N.offsets()) {
          Site s = site_add(infected[i], o);
          if (seen.insert(s).second) infected.push_back(std::move(s));
        }
      }
    }
  }
  return SiteSet(std::move(infected));
}

// Same chain driven by per-(site, step) hashed ticks, shared between runs.
SiteSet growth_shared_ticks(const Neighbourhood& N, const SiteSet& A, int steps, double h,
                            std::uint64_t seed) {
  std::vector<Site> infected(A.sites().begin(), A.sites().end());
  std::unordered_set<Site, SiteKey> seen(infected.begin(), infected.end());
  SiteKey key;
  for (int step = 0; step < steps; ++step) {
    const std::size_t count = infected.size();
    for (std::size_t i = 0; i < count; ++i) {
      const std::uint64_t mixed =
          RandomStream::mix(seed ^ key(infected[i]), static_cast<std::uint64_t>(step));
      const double u = static_cast<double>(mixed >> 11) * 0x1.0p-53;
      if (u < h) {
        for (const Site& o : N.offsets()) {
          Site s = site_add(infected[i], o);
          if (seen.insert(s).second) infected.push_back(std::move(s));
        }
      }
    }
  }
  return SiteSet(std::move(infected));
}

}  // namespace

TEST_CASE("growth basics") {
  Neighbourhood sym(1, {{-1}, {0}, {1}});
  const SiteSet a = SiteSet::interval(0, 0);

  CHECK(simulate_growth(sym, a, 0.0, 1) == a);

  Neighbourhood zero(1, {{0}});
  CHECK(simulate_growth(zero, a, 25.0, 1) == a);

  Neighbourhood no_origin(1, {{1}});
  CHECK_THROWS_AS(simulate_growth(no_origin, a, 1.0, 1), InvalidArgument);

  // the infected set only grows along N-dilations: Pi^t(A) within N^K(A)
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto res = simulate_growth_detailed(sym, a, 1.5, seed);
    CHECK(res.infected.is_subset_of(
        iterated_neighbourhood(a, sym, static_cast<int>(res.events))));
    CHECK(a.is_subset_of(res.infected));
  }
}

TEST_CASE("growth law matches the discrete-time oracle") {
  Neighbourhood sym(1, {{-1}, {0}, {1}});
  const SiteSet a = SiteSet::interval(0, 0);
  const int replicas = 3000;
  const double t = 1.0;

  double lib_sum = 0.0, lib_sq = 0.0;
  for (int r = 0; r < replicas; ++r) {
    const double n =
        static_cast<double>(simulate_growth(sym, a, t, RandomStream::mix(5, r)).size());
    lib_sum += n;
    lib_sq += n * n;
  }
  RandomStream oracle_rng(77);
  double ora_sum = 0.0, ora_sq = 0.0;
  for (int r = 0; r < replicas; ++r) {
    const double n = static_cast<double>(growth_oracle(sym, a, t, 1e-3, oracle_rng).size());
    ora_sum += n;
    ora_sq += n * n;
  }
  const double lib_mean = lib_sum / replicas;
  const double ora_mean = ora_sum / replicas;
  const double lib_var = lib_sq / replicas - lib_mean * lib_mean;
  const double ora_var = ora_sq / replicas - ora_mean * ora_mean;
  const double se = std::sqrt(lib_var / replicas + ora_var / replicas);
  CHECK(lib_mean > 1.0);  // it does grow
  CHECK(std::fabs(lib_mean - ora_mean) <= 3.0 * se);
}

TEST_CASE("monotone coupling under a shared event stream") {
  Neighbourhood sym(1, {{-1}, {0}, {1}});
  const SiteSet a = SiteSet::interval(0, 0);
  const SiteSet b = SiteSet(std::vector<Site>{{0}, {3}, {-2}});
  REQUIRE(a.is_subset_of(b));
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    const auto from_a = growth_shared_ticks(sym, a, 800, 1e-3, seed);
    const auto from_b = growth_shared_ticks(sym, b, 800, 1e-3, seed);
    CHECK(from_a.is_subset_of(from_b));
  }
}

TEST_CASE("escape probability estimation") {
  Neighbourhood sym(1, {{-1}, {0}, {1}});
  const SiteSet a = SiteSet::interval(0, 0);

  // a window so large that escape is impossible at desk scale
  const auto huge = escape_probability_estimate(sym, a, 0.5, 200.0, 2000, 3);
  CHECK(huge.p_hat == 0.0);

  Neighbourhood zero(1, {{0}});
  const auto none = escape_probability_estimate(zero, a, 2.0, 2.0, 500, 3);
  CHECK(none.p_hat == 0.0);

  // empirical escape frequency stays under the bound (plus noise allowance)
  for (double ell : {12.0, 24.0}) {
    for (double t : {0.5, 1.0}) {
      const auto est = escape_probability_estimate(sym, a, t, ell, 4000, 17);
      const double bound = escape_probability_bound(1, 3, ell, t);
      CHECK(est.p_hat <= bound + 3.0 * est.std_err);
    }
  }
}

TEST_CASE("escape probability bound values") {
  // rho = 2, ell = 16, t = 1: e^{-(16 ln 8 - 15)} evaluated independently
  CHECK(escape_probability_bound(1, 2, 16.0, 1.0) ==
        doctest::Approx(1.1614e-8).epsilon(1e-3));
  // small ell makes the exponent nonpositive: the bound is vacuous
  CHECK(escape_probability_bound(1, 3, 2.0, 1.0) == 1.0);
  CHECK(escape_probability_bound(5, 3, 2.0, 1.0) == 1.0);
  // linear in |A| below the clamp
  const double one = escape_probability_bound(1, 2, 16.0, 1.0);
  const double two = escape_probability_bound(2, 2, 16.0, 1.0);
  CHECK(two == doctest::Approx(2.0 * one));
  CHECK_THROWS_AS(escape_probability_bound(1, 2, 1.0, 1.0), InvalidArgument);
}

TEST_CASE("Poisson Chernoff bound dominates exact tails") {
  // frozen values evaluated from the closed form
  CHECK(chernoff_poisson(1.0, 10.0) == doctest::Approx(8.1031e-7).epsilon(1e-3));
  CHECK(chernoff_poisson(4.0, 8.0) == doctest::Approx(0.21330).epsilon(1e-3));
  CHECK_THROWS_AS(chernoff_poisson(4.0, 4.0), InvalidArgument);
  CHECK_THROWS_AS(chernoff_poisson(0.0, 1.0), InvalidArgument);

  // exact upper tail by direct summation
  auto exact_tail = [](double mu, double a) {
    const int from = static_cast<int>(std::ceil(a));
    double pmf = std::exp(-mu);
    double below = 0.0;
    for (int k = 0; k < from; ++k) {
      below += pmf;
      pmf *= mu / (k + 1);
    }
    return 1.0 - below;
  };
  CHECK(exact_tail(1.0, 10.0) == doctest::Approx(1.1142e-7).epsilon(1e-3));
  CHECK(exact_tail(4.0, 8.0) == doctest::Approx(0.051134).epsilon(1e-3));

  RandomStream rng(59);
  for (int trial = 0; trial < 50; ++trial) {
    const double mu = 0.5 + 6.0 * rng.uniform01();
    const double a = mu + 0.5 + 8.0 * rng.uniform01();
    CHECK(chernoff_poisson(mu, a) >= exact_tail(mu, a));
  }
}

TEST_CASE("secondary concentration claim") {
  Neighbourhood right(1, {{0}, {1}});  // rho = 2
  const SiteSet a = SiteSet::interval(0, 0);

  // the formula window is enormous compared to the actual growth
  const auto ok = secondary_claim_check(right, a, 1.0, 0.5, 2000, 23);
  CHECK(ok.pass);
  CHECK(ok.window_steps == 16);
  CHECK(ok.estimate.p_hat == 0.0);

  // at t = 0 with eps just below |A| the window degenerates to A itself
  const auto degenerate = secondary_claim_check(right, a, 0.0, 0.99, 500, 23);
  CHECK(degenerate.window_steps == 0);
  CHECK(degenerate.pass);

  // an adversarially small window shows the check is not vacuous
  Neighbourhood sym(1, {{-1}, {0}, {1}});
  const auto tiny = escape_frequency(sym, a, 2.0, iterated_neighbourhood(a, sym, 1), 2000, 23);
  CHECK(tiny.p_hat > 0.5);  // almost every replica escapes N^1(A) by t = 2
  CHECK_FALSE(tiny.p_hat <= 0.5 + 3.0 * tiny.std_err);
}
