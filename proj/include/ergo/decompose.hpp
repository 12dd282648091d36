#ifndef ERGO_DECOMPOSE_HPP
#define ERGO_DECOMPOSE_HPP

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "ergo/exec.hpp"
#include "ergo/measures.hpp"
#include "ergo/rules.hpp"

namespace ergo {

template <class T>
using SquareMatrix = std::vector<std::vector<T>>;

// The representation phi = kappa q + (1-kappa) psi of a rule as a psi-system
// composed with zero-range memoryless noise theta(a,b) = (1-kappa)1_a(b) +
// kappa q(b).
template <class T>
struct NoiseDecomposition {
  T kappa;
  MarginalDist<T> q;
  LocalRule<T> psi;
  SquareMatrix<T> theta;
};

// Largest admissible noise level: min over the table of phi(w,b)/q(b).
// Positive iff phi is strictly positive; always in [0,1] for stochastic phi.
template <class T>
T max_noise_level(const LocalRule<T>& phi, const MarginalDist<T>& q);

// Splits phi at level kappa; rejects kappa > max_noise_level (psi would go
// negative) and kappa = 1 (psi undefined, phi is pure noise).
template <class T>
NoiseDecomposition<T> decompose(const LocalRule<T>& phi, const MarginalDist<T>& q,
                                const T& kappa);

template <class T>
SquareMatrix<T> noise_matrix(const T& kappa, const MarginalDist<T>& q);

// theta^{-1} = I/(1-kappa) - kappa Q/(1-kappa) with Q the rows-equal-q matrix;
// singular at kappa = 1.
template <class T>
SquareMatrix<T> noise_inverse(const T& kappa, const MarginalDist<T>& q);

template <class T>
SquareMatrix<T> matrix_multiply(const SquareMatrix<T>& a, const SquareMatrix<T>& b);

// Exact pushforward of a distribution on n sites through theta acting
// per-coordinate: synchronously (tensor power) or asynchronously (uniform
// random coordinate).  Works for any square matrix, stochastic or not, so
// the same code applies the noise inverse.
template <class T>
PatternDist<T> product_kernel_apply(const SquareMatrix<T>& theta, bool synchronous,
                                    const PatternDist<T>& p);

struct SdpiTrial {
  std::int64_t trial;  // -1..-(sigma^n) are the point masses, 0.. the samples
  double d_before;
  double d_after;
  double ratio;
};

struct SdpiReport {
  double kappa = 0.0;
  double bound = 0.0;
  double max_ratio = 0.0;
  bool pass = false;
  bool synchronous = true;
  int arity = 0;
  std::vector<SdpiTrial> trials;
};

// Samples `trials` Dirichlet(1,...,1) distributions plus all sigma^n point
// masses and checks D(p theta_n || q^n) / D(p || q^n) against the contraction
// bound 1-kappa (synchronous) or 1-kappa/n (asynchronous), with kappa
// computed from theta internally.  Requires q theta = q.
SdpiReport sdpi_verify(const SquareMatrix<double>& theta, const MarginalDist<double>& q,
                       int arity, bool synchronous, int trials, std::uint64_t seed,
                       Exec mode = default_exec());

// CSV rows (trial, D_before, D_after, ratio) plus a summary line.
void write_csv(std::ostream& out, const SdpiReport& report);

}  // namespace ergo

#endif
