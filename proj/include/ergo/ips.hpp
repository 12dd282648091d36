#ifndef ERGO_IPS_HPP
#define ERGO_IPS_HPP

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "ergo/pca.hpp"

namespace ergo {

// --- Window-local exact computations against a product measure -------------
//
// These work directly on the infinite lattice: lambda_q is a product measure,
// so every cylinder value only involves a finite window.

// Joint law on N(k) u {k} of (X restricted to the neighbourhood, Y_k) where
// X ~ product q and Y_k is the resampled symbol at k.
template <class T>
PatternDist<T> single_site_pushforward(const LocalRule<T>& phi, const MarginalDist<T>& q,
                                       const Site& k);

// lambda Phi-hat_k = lambda for the origin (all k are equivalent by shift
// invariance): max cylinder deviation of the single-site pushforward from the
// product measure.  Exact verdict in rational mode.
template <class T>
StationarityReport<T> check_ips_local_stationary(const LocalRule<T>& phi,
                                                 const MarginalDist<T>& q);

// (lambda L)([w]) = sum_{k in J} ((lambda Phi-hat_k)([w]) - lambda([w])).
// Updates outside J do not move the J-marginal, so the sum over J is the full
// generator action on the cylinder.
template <class T>
T generator_on_cylinder(const LocalRule<T>& phi, const MarginalDist<T>& q, const SiteSet& J,
                        std::span<const int> w);

// Exhaustive |(lambda L)([w])| over box windows with sides up to L.
template <class T>
StationarityReport<T> check_ips_stationary_bernoulli(const LocalRule<T>& phi,
                                                     const MarginalDist<T>& q, int L,
                                                     std::size_t cap = default_state_cap());

// --- Finite-torus exact evolution ------------------------------------------

template <class T>
struct TorusModel {
  LocalRule<T> rule;
  TorusSpec torus;

  void validate() const;
  std::size_t states() const { return pow_size(rule.alphabet(), torus.site_count()); }
};

// Matrix-free generator L = sum_k (Phi-hat_k - I) over torus states, with
// uniformized kernel P = I + L/Lambda, Lambda = #sites.  P equals the
// asynchronous kernel for the whole torus.  All applications are gathers over
// predecessors with a fixed summation order, so serial and parallel paths
// agree bitwise, in rational mode too.
template <class T>
class TorusGenerator {
 public:
  explicit TorusGenerator(TorusModel<T> model, std::size_t cap = default_torus_cap());

  const TorusModel<T>& model() const { return model_; }
  std::size_t states() const { return states_; }
  std::size_t sites() const { return sites_; }
  double uniformization_rate() const { return static_cast<double>(sites_); }

  std::vector<T> apply_single_site(std::span<const T> mu, std::size_t site,
                                   Exec mode = default_exec()) const;
  std::vector<T> apply_L(std::span<const T> mu, Exec mode = default_exec()) const;
  std::vector<T> apply_P(std::span<const T> mu, Exec mode = default_exec()) const;

  // Marginal of a (possibly signed) state vector on a window of torus sites.
  PatternDist<T> marginal(std::span<const T> mu, const SiteSet& window) const;

  std::vector<T> initial_state_dist(const InitialMeasure<T>& mu0) const;
  std::vector<T> product_state_dist(const MarginalDist<T>& q) const;

  // Dense rate matrix, for small systems and tests.
  SquareMatrix<T> dense_L() const;

 private:
  std::size_t row_of(std::span<const int> digits, std::size_t site, int replaced) const;

  TorusModel<T> model_;
  std::size_t sites_ = 0;
  std::size_t states_ = 0;
  std::vector<std::vector<std::uint32_t>> nbr_;  // per site: torus indices of k+N
  std::vector<std::size_t> place_;               // sigma^(n-1-i) per site
};

struct UniformizationResult {
  std::vector<double> dist;
  double tail_bound = 0.0;     // truncated Poisson tail (< tol)
  double renormalization = 0;  // factor applied to make the result sum to 1
  int terms = 0;               // K: highest Poisson order used
};

// exp(tL) by uniformization: sum_k e^{-Lt}(Lt)^k/k! mu P^k truncated once the
// Poisson tail drops below tol, then renormalized.
UniformizationResult uniformization_evolve(const TorusGenerator<double>& gen,
                                           std::vector<double> mu0, double t,
                                           double tol = 1e-10, Exec mode = default_exec());

// dD_J/dt = sum_w (mu L)([w]) ln(mu([w]) / lambda([w])).  Rejects windows
// where mu's marginal vanishes (the derivative formula needs mu([w]) > 0).
double entropy_derivative_exact(const TorusGenerator<double>& gen,
                                std::span<const double> mu_t, std::span<const double> lambda,
                                const SiteSet& J, Exec mode = default_exec());

// D_J(0) e^{-kappa t} + ((1-kappa)/kappa) |N| ln(1/q_min) |boundary(J)|.
// The statement in print has a typo on its left-hand side; this is the
// corrected reading consistent with integrating the derivative bound.
double entropy_evolution_bound_ips(double d0, double kappa, const Neighbourhood& N,
                                   const MarginalDist<double>& q, const SiteSet& J, double t,
                                   const std::optional<TorusSpec>& torus = std::nullopt);

// --- Monte Carlo -------------------------------------------------------------

struct SimulationCheckpoint {
  double t = 0.0;
  PatternDist<double> empirical;
  std::vector<double> std_err;          // binomial SE per pattern
  std::vector<std::uint64_t> counts;
  std::optional<PatternDist<double>> exact;  // filled by callers that have one
};

struct SimulationResult {
  SiteSet window;
  int replicas = 0;
  std::vector<SimulationCheckpoint> checkpoints;
};

// Event-driven simulation with the uniformized single event stream: holding
// times Exponential(#sites), site uniform, symbol from phi.  Replica r draws
// from stream (seed, r) in the fixed order (holding, site, symbol), so output
// is byte-identical for any thread count.
SimulationResult simulate_ips(const TorusModel<double>& model,
                              const InitialMeasure<double>& init,
                              std::span<const double> checkpoints, int replicas,
                              std::uint64_t seed, const SiteSet& window,
                              Exec mode = default_exec());

// CSV: checkpoint_t,pattern,empirical_prob,std_err,exact_prob_if_available.
void write_csv(std::ostream& out, const SimulationResult& result);

}  // namespace ergo

#endif
