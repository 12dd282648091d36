#ifndef ERGO_PCA_HPP
#define ERGO_PCA_HPP

#include <optional>
#include <vector>

#include "ergo/caps.hpp"
#include "ergo/decompose.hpp"
#include "ergo/exec.hpp"
#include "ergo/measures.hpp"

namespace ergo {

// Initial measure of an evolution: a Bernoulli product, a deterministic
// configuration (periodic extension of a symbol block), or an explicit
// distribution on a window with product extension outside it.
template <class T>
struct InitialMeasure {
  enum class Kind { product, point, explicit_window };

  Kind kind = Kind::product;
  MarginalDist<T> marginal;         // product mode; outside marginal otherwise
  std::vector<int> period_sides;    // point: block side lengths (d entries)
  std::vector<int> point_symbols;   // point: block symbols, row-major
  PatternDist<T> window_dist;       // explicit_window

  static InitialMeasure product_of(MarginalDist<T> q) {
    InitialMeasure m;
    m.kind = Kind::product;
    m.marginal = std::move(q);
    return m;
  }

  // All sites carry the periodic extension of `symbols` over a block with the
  // given sides; uniform_symbol() below is the common all-same-symbol case.
  static InitialMeasure point(std::vector<int> sides, std::vector<int> symbols) {
    InitialMeasure m;
    m.kind = Kind::point;
    m.period_sides = std::move(sides);
    m.point_symbols = std::move(symbols);
    std::size_t vol = 1;
    for (int s : m.period_sides) {
      if (s < 1) throw InvalidArgument("period sides must be >= 1");
      vol *= static_cast<std::size_t>(s);
    }
    if (vol != m.point_symbols.size())
      throw InvalidArgument("point block symbol count mismatch");
    return m;
  }

  static InitialMeasure uniform_symbol(int symbol, int dimension) {
    return point(std::vector<int>(static_cast<std::size_t>(dimension), 1), {symbol});
  }

  static InitialMeasure explicit_window(PatternDist<T> dist, MarginalDist<T> outside) {
    InitialMeasure m;
    m.kind = Kind::explicit_window;
    m.window_dist = std::move(dist);
    m.marginal = std::move(outside);
    return m;
  }

  int symbol_at(const Site& s) const {
    std::size_t idx = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
      int c = s[i] % period_sides[i];
      if (c < 0) c += period_sides[i];
      idx = idx * static_cast<std::size_t>(period_sides[i]) + static_cast<std::size_t>(c);
    }
    return point_symbols[idx];
  }
};

// Marginal of the initial measure on a finite window.
template <class T>
PatternDist<T> marginal_on(const InitialMeasure<T>& mu, const SiteSet& window, int alphabet);

// True when the measure-level relative entropy of mu0 against any Bernoulli
// measure is infinite (point masses on the infinite lattice).
template <class T>
bool has_infinite_entropy(const InitialMeasure<T>& mu) {
  return mu.kind == InitialMeasure<T>::Kind::point;
}

// D_S(mu0 || lambda_q) for finite-entropy initial measures, and the universal
// cap |S| ln(1/q_min) for point masses.  Computed from the product structure,
// no big vectors.
double initial_bound_entropy_on(const InitialMeasure<double>& mu,
                                const MarginalDist<double>& q, const SiteSet& S);

// Row-stochastic window kernel from Sigma^{N(J)} to Sigma^J with entries
// prod_{k in J} phi((sigma^k u)_N, w_k).  Dense; guarded by the state cap.
template <class T>
std::vector<std::vector<T>> pca_window_kernel(const LocalRule<T>& phi, const SiteSet& J,
                                              std::size_t cap = default_state_cap());

// One synchronous step: pushes a distribution on N(J) forward to J.  The
// source window must be exactly N(J).  Output entry order is accumulated in a
// fixed order, so serial and OpenMP paths agree bitwise (also in rational
// mode).
template <class T>
PatternDist<T> pca_window_pushforward(const LocalRule<T>& phi, const PatternDist<T>& src,
                                      const SiteSet& J, Exec mode = default_exec());

// mu0 Phi^t marginal on J, evolved exactly through the shrinking window chain
// N^t(J) -> ... -> J.
template <class T>
PatternDist<T> evolve_window_dist(const LocalRule<T>& phi, const InitialMeasure<T>& mu0,
                                  const SiteSet& J, int steps,
                                  std::size_t cap = default_state_cap(),
                                  Exec mode = default_exec());

struct TrajectoryRecord {
  double t = 0.0;
  PatternDist<double> dist;      // marginal on J
  double d_nats = 0.0;           // D_J(mu Phi^t || lambda_q); +inf for point mass at t=0
  double tv = 0.0;               // TV distance to lambda_J
  double iterated_bound = 0.0;   // (1-kappa)^t D_{N^t(J)}(mu0 || lambda)
  double envelope = 0.0;         // alpha1 e^{-beta1 t} n^d
  double pinsker = 0.0;          // sqrt(d_nats / 2)
};

struct ConvergenceTrajectory {
  SiteSet window;
  std::vector<TrajectoryRecord> records;  // t = 0..steps
};

struct EvolveOptions {
  std::size_t cap = default_state_cap();
  std::optional<double> beta1;  // envelope exponent; default (-ln(1-kappa))/2
  Exec mode = default_exec();
};

// Exact trajectory with entropy/TV readouts against lambda_{q_ref} and both
// theoretical bound columns (populated when kappa > 0).
ConvergenceTrajectory evolve_pca_exact(const LocalRule<double>& phi,
                                       const InitialMeasure<double>& mu0, const SiteSet& J,
                                       int steps,
                                       const std::optional<MarginalDist<double>>& q_ref,
                                       const EvolveOptions& opts = {});

// CSV columns: t,D_J_nats,TV,iterated_bound,envelope_alpha1_exp,pinsker_of_D.
// Infinite D serializes as the literal `inf`.
void write_csv(std::ostream& out, const ConvergenceTrajectory& traj);

template <class T>
struct StationarityReport {
  T max_deviation{};
  bool exact = false;       // rational mode: deviations are exact
  bool stationary = false;  // exact zero, or within 1e-12 in float mode
  SiteSet witness_window;
  std::vector<int> witness_pattern;
  std::size_t identities_checked = 0;
};

// Checks (lambda Phi)([w]) = lambda([w]) for every pattern w over every box
// window with side lengths up to L sites per axis.  Exact verdict in rational
// mode.
template <class T>
StationarityReport<T> check_pca_stationary(const LocalRule<T>& phi, const MarginalDist<T>& q,
                                           int L, std::size_t cap = default_state_cap());

// 1D finitary criterion for N = (0,1): stationarity of lambda_q follows from
// the identities for all words of length <= sigma + 1.
template <class T>
StationarityReport<T> check_piatetski_shapiro(const LocalRule<T>& phi,
                                              const MarginalDist<T>& q,
                                              std::size_t cap = default_state_cap());

// b(t) = (1-kappa)^t D_{N^t(J)}(mu0 || lambda) for t = 0..steps, with the
// Lemma cap substituted when mu0 has infinite entropy.  Rejects kappa = 0.
std::vector<double> iterated_decay_bound(const LocalRule<double>& phi,
                                         const MarginalDist<double>& q,
                                         const InitialMeasure<double>& mu0, const SiteSet& J,
                                         int steps);

struct ErgodicityConstants {
  double alpha = 0.0;   // sqrt(alpha1 / 2)
  double beta = 0.0;    // beta1 / 2
  double kappa = 0.0;
  double q_min = 0.0;
  double alpha1 = 0.0;
  double beta1 = 0.0;
  int radius = 0;
  int dimension = 0;
};

// The proof's explicit constants: alpha1 = ln(1/q_min) sup_{t>=0} (1-kappa)^t
// e^{beta1 t} (1+2rt)^d, for any 0 < beta1 < -ln(1-kappa).
ErgodicityConstants theorem_constants(const LocalRule<double>& phi,
                                      const MarginalDist<double>& q, double beta1);

// t_mix(J, eps) <= (d / 2 beta) ln n + (ln alpha - ln eps) / beta.
double mixing_time_bound(double alpha, double beta, int dimension, int diameter, double eps);

// First recorded t with TV < eps at every recorded s >= t; empty when the
// trajectory never settles below eps.  A single-measure surrogate of the
// sup-over-mu mixing time (a lower-bound witness).
std::optional<double> empirical_mixing_time(const ConvergenceTrajectory& traj, double eps);

}  // namespace ergo

#endif
