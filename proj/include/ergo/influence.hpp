#ifndef ERGO_INFLUENCE_HPP
#define ERGO_INFLUENCE_HPP

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "ergo/exec.hpp"
#include "ergo/lattice.hpp"

namespace ergo {

// The growth process equal in law to the backwards influence region: every
// infected site carries a rate-1 clock, and a tick infects its whole
// neighbourhood.  Simulated by the jump chain (holding time Exponential over
// the infected count, site uniform over infected), which is exact in law.
struct GrowthResult {
  SiteSet infected;
  std::uint64_t events = 0;
};

GrowthResult simulate_growth_detailed(const Neighbourhood& N, const SiteSet& A, double t,
                                      std::uint64_t seed);
SiteSet simulate_growth(const Neighbourhood& N, const SiteSet& A, double t,
                        std::uint64_t seed);

struct EscapeEstimate {
  double p_hat = 0.0;
  double std_err = 0.0;
  std::uint64_t escapes = 0;
  int replicas = 0;
};

// Fraction of replicas whose growth leaves `window` by time t.  Replica r is
// driven by stream (seed, r); aggregation is a commutative count, so the
// result is identical for any thread count.
EscapeEstimate escape_frequency(const Neighbourhood& N, const SiteSet& A, double t,
                                const SiteSet& window, int replicas, std::uint64_t seed,
                                Exec mode = default_exec());

// Escape from N^{floor(ell t)}(A).
EscapeEstimate escape_probability_estimate(const Neighbourhood& N, const SiteSet& A, double t,
                                           double ell, int replicas, std::uint64_t seed,
                                           Exec mode = default_exec());

// |A| e^{-(ell ln(ell/rho) - ell + 1) t}, clamped to [0,1] for reporting;
// values at or above 1 are vacuous.
double escape_probability_bound(std::size_t a, std::size_t rho, double ell, double t);

// Chernoff bound for the Poisson upper tail: P(Pois(mu) >= a) <= exp(-a
// ln(a/mu) + a - mu), valid for a > mu.
double chernoff_poisson(double mu, double a);

// Empirical check of the eps-window claim: escape frequency from the
// concentration window N_{eps,t}(A) stays below eps (within 3 SE).
struct SecondaryClaimResult {
  bool pass = false;
  double eps = 0.0;
  EscapeEstimate estimate;
  int window_steps = 0;
};

SecondaryClaimResult secondary_claim_check(const Neighbourhood& N, const SiteSet& A, double t,
                                           double eps, int replicas, std::uint64_t seed,
                                           Exec mode = default_exec());

struct InfluenceReportRow {
  double t = 0.0;
  double ell = 0.0;
  double bound = 0.0;
  double p_hat = 0.0;
  double std_err = 0.0;
  int replicas = 0;
};

// CSV: t,ell,bound,p_hat,std_err,replicas.
void write_csv(std::ostream& out, const std::vector<InfluenceReportRow>& rows);

}  // namespace ergo

#endif
