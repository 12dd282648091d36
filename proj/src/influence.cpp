#include "ergo/influence.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <unordered_set>

#include "ergo/rng.hpp"

namespace ergo {

namespace {

struct SiteHash {
  std::size_t operator()(const Site& s) const {
    std::size_t h = 0x811c9dc5u;
    for (int c : s) {
      h ^= static_cast<std::size_t>(static_cast<unsigned>(c));
      h *= 0x01000193u;
      h ^= h >> 17;
    }
    return h;
  }
};

// Runs one growth replica; with a containment window, stops as soon as a site
// escapes it (the verdict is already decided).
bool grow(const Neighbourhood& N, const SiteSet& A, double horizon, RandomStream& stream,
          const SiteSet* window, std::vector<Site>& infected, std::uint64_t* events) {
  infected.assign(A.sites().begin(), A.sites().end());
  std::unordered_set<Site, SiteHash> seen(infected.begin(), infected.end());
  if (window) {
    for (const Site& s : infected) {
      if (!window->contains(s)) return true;
    }
  }
  double t = 0.0;
  while (!infected.empty()) {
    t += stream.exponential(static_cast<double>(infected.size()));
    if (t > horizon) break;
    const std::size_t idx = stream.below(infected.size());
    const Site k = infected[idx];
    if (events) ++*events;
    for (const Site& o : N.offsets()) {
      Site s = site_add(k, o);
      if (seen.insert(s).second) {
        if (window && !window->contains(s)) return true;
        infected.push_back(std::move(s));
      }
    }
  }
  return false;
}

}  // namespace

GrowthResult simulate_growth_detailed(const Neighbourhood& N, const SiteSet& A, double t,
                                      std::uint64_t seed) {
  if (t < 0.0) throw InvalidArgument("growth time must be >= 0");
  if (!N.contains_origin()) throw InvalidArgument("growth needs 0 in N");
  RandomStream stream(seed);
  GrowthResult result;
  std::vector<Site> infected;
  grow(N, A, t, stream, nullptr, infected, &result.events);
  result.infected = SiteSet(std::move(infected));
  return result;
}

SiteSet simulate_growth(const Neighbourhood& N, const SiteSet& A, double t,
                        std::uint64_t seed) {
  return simulate_growth_detailed(N, A, t, seed).infected;
}

EscapeEstimate escape_frequency(const Neighbourhood& N, const SiteSet& A, double t,
                                const SiteSet& window, int replicas, std::uint64_t seed,
                                Exec mode) {
  if (replicas < 1) throw InvalidArgument("replica count must be >= 1");
  if (t < 0.0) throw InvalidArgument("time must be >= 0");
  if (!N.contains_origin()) throw InvalidArgument("growth needs 0 in N");

  std::uint64_t escapes = 0;
  const bool parallel = (mode == Exec::parallel);
#pragma omp parallel if (parallel)
  {
    std::vector<Site> scratch;
    std::uint64_t local = 0;
#pragma omp for schedule(static)
    for (std::int64_t r = 0; r < replicas; ++r) {
      RandomStream stream(seed, static_cast<std::uint64_t>(r));
      if (grow(N, A, t, stream, &window, scratch, nullptr)) ++local;
    }
#pragma omp critical
    escapes += local;
  }

  EscapeEstimate est;
  est.escapes = escapes;
  est.replicas = replicas;
  est.p_hat = static_cast<double>(escapes) / static_cast<double>(replicas);
  est.std_err = std::sqrt(est.p_hat * (1.0 - est.p_hat) / static_cast<double>(replicas));
  return est;
}

EscapeEstimate escape_probability_estimate(const Neighbourhood& N, const SiteSet& A, double t,
                                           double ell, int replicas, std::uint64_t seed,
                                           Exec mode) {
  if (!(ell > 0.0)) throw InvalidArgument("ell must be positive");
  const int steps = static_cast<int>(std::floor(ell * t));
  const SiteSet window = iterated_neighbourhood(A, N, steps);
  return escape_frequency(N, A, t, window, replicas, seed, mode);
}

double escape_probability_bound(std::size_t a, std::size_t rho, double ell, double t) {
  if (!(ell > 1.0)) throw InvalidArgument("the escape bound needs ell > 1");
  if (t < 0.0) throw InvalidArgument("time must be >= 0");
  const double exponent = ell * std::log(ell / static_cast<double>(rho)) - ell + 1.0;
  const double raw = static_cast<double>(a) * std::exp(-exponent * t);
  return std::min(1.0, raw);
}

double chernoff_poisson(double mu, double a) {
  if (!(mu > 0.0)) throw InvalidArgument("mean must be positive");
  if (!(a > mu)) throw InvalidArgument("the Chernoff bound needs a > mu");
  return std::exp(-a * std::log(a / mu) + a - mu);
}

SecondaryClaimResult secondary_claim_check(const Neighbourhood& N, const SiteSet& A, double t,
                                           double eps, int replicas, std::uint64_t seed,
                                           Exec mode) {
  SecondaryClaimResult result;
  result.eps = eps;
  result.window_steps = influence_window_steps(A.size(), N.size(), eps, t);
  const SiteSet window = iterated_neighbourhood(A, N, result.window_steps);
  result.estimate = escape_frequency(N, A, t, window, replicas, seed, mode);
  result.pass = result.estimate.p_hat <= eps + 3.0 * result.estimate.std_err;
  return result;
}

void write_csv(std::ostream& out, const std::vector<InfluenceReportRow>& rows) {
  out << "t,ell,bound,p_hat,std_err,replicas\n";
  char buf[160];
  for (const InfluenceReportRow& r : rows) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g,%d", r.t, r.ell, r.bound,
                  r.p_hat, r.std_err, r.replicas);
    out << buf << '\n';
  }
}

}  // namespace ergo
