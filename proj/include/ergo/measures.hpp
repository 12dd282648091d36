#ifndef ERGO_MEASURES_HPP
#define ERGO_MEASURES_HPP

#include <cmath>
#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

#include "ergo/lattice.hpp"
#include "ergo/rules.hpp"

namespace ergo {

// Explicit probability vector over Sigma^J for a finite window J.  Weights
// are indexed by the base-sigma encoding of patterns in canonical window
// order (first site most significant).
template <class T>
struct PatternDist {
  SiteSet window;
  int alphabet = 0;
  std::vector<T> weights;

  std::size_t size() const { return weights.size(); }

  void validate() const {
    if (weights.size() != pow_size(alphabet, window.size()))
      throw InvalidArgument("pattern distribution weight count mismatch");
    T sum{};
    for (const T& w : weights) {
      if (w < T{}) throw InvalidArgument("negative pattern weight");
      sum += w;
    }
    if (!sums_to_one(sum)) throw InvalidArgument("pattern weights must sum to 1");
  }

  static PatternDist point_mass(const SiteSet& window, int alphabet,
                                std::span<const int> pattern) {
    PatternDist p;
    p.window = window;
    p.alphabet = alphabet;
    p.weights.assign(pow_size(alphabet, window.size()), T{});
    if constexpr (is_rational_v<T>) {
      p.weights[pattern_index(pattern, alphabet)] = Rational(1);
    } else {
      p.weights[pattern_index(pattern, alphabet)] = 1.0;
    }
    return p;
  }
};

template <class T>
PatternDist<T> bernoulli_marginal(const MarginalDist<T>& q, const SiteSet& J);

// Sums weights over the coordinates outside `sub` (which must be a subset of
// p's window).
template <class T>
PatternDist<T> marginalize(const PatternDist<T>& p, const SiteSet& sub);

template <class T>
PatternDist<double> dist_to_float(const PatternDist<T>& p);

// D(p || r) in nats with the conventions 0 log 0 = 0 and x log(x/0) = +inf;
// +inf is a normal return value, not an error.
double relative_entropy(const PatternDist<double>& p, const PatternDist<double>& r);

// D((A | C) || (A' | C')) where C is the `given` part of the shared window
// and A is the rest.  Satisfies the chain rule
//   D(p || r) = D(p_C || r_C) + conditional_relative_entropy(p, r, C).
double conditional_relative_entropy(const PatternDist<double>& p,
                                    const PatternDist<double>& r,
                                    const SiteSet& given);

// D((A | C) || A') against a plain marginal reference on A.
double conditional_relative_entropy_vs_marginal(const PatternDist<double>& p,
                                                const SiteSet& part_a,
                                                const PatternDist<double>& ref_a);

// I(A : B) = D(p || p_A x p_B) >= 0 for the split A = `part`, B = rest.
double mutual_information(const PatternDist<double>& p, const SiteSet& part);

double total_variation(const PatternDist<double>& p, const PatternDist<double>& r);
Rational total_variation(const PatternDist<Rational>& p, const PatternDist<Rational>& r);

// Pinsker: TV(p, r) <= sqrt(D(p||r) / 2).
double pinsker_bound(double relative_entropy_nats);

// |A| log(1/q_min): the universal cap on D((X_A | X_B) || Z_A).
double entropy_upper_bound(std::size_t window_size, const MarginalDist<double>& q);

// CSV with columns pattern (base-sigma digit string in window order), weight.
void write_csv(std::ostream& out, const PatternDist<double>& p);
void write_csv(std::ostream& out, const PatternDist<Rational>& p);

inline constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace ergo

#endif
