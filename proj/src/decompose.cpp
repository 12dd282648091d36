#include "ergo/decompose.hpp"

#include <cstdio>
#include <ostream>

#include "ergo/rng.hpp"

namespace ergo {

template <class T>
T max_noise_level(const LocalRule<T>& phi, const MarginalDist<T>& q) {
  q.validate();
  if (!q.strictly_positive()) throw InvalidArgument("max_noise_level needs strictly positive q");
  if (phi.alphabet() != q.alphabet) throw InvalidArgument("alphabet mismatch");
  bool first = true;
  T best{};
  for (std::size_t r = 0; r < phi.rows(); ++r) {
    for (int b = 0; b < phi.alphabet(); ++b) {
      const T ratio = phi.entry(r, b) / q.weights[static_cast<std::size_t>(b)];
      if (first || ratio < best) {
        best = ratio;
        first = false;
      }
    }
  }
  return best;
}

template <class T>
NoiseDecomposition<T> decompose(const LocalRule<T>& phi, const MarginalDist<T>& q,
                                const T& kappa) {
  const T one = T(1);
  if (!(kappa > T{})) throw InvalidArgument("decompose needs kappa > 0");
  if (!(kappa < one))
    throw InvalidArgument("decompose needs kappa < 1 (phi is pure noise at kappa = 1)");
  const T max_kappa = max_noise_level(phi, q);
  if (kappa > max_kappa)
    throw InvalidArgument("kappa exceeds the maximum noise level; psi would be negative");

  std::vector<std::vector<T>> psi_table(phi.rows(), std::vector<T>(phi.alphabet()));
  for (std::size_t r = 0; r < phi.rows(); ++r) {
    for (int b = 0; b < phi.alphabet(); ++b) {
      psi_table[r][static_cast<std::size_t>(b)] =
          (phi.entry(r, b) - kappa * q.weights[static_cast<std::size_t>(b)]) / (one - kappa);
    }
  }
  LocalRule<T> psi(phi.alphabet(), phi.neighbourhood(), std::move(psi_table));
  const auto report = validate_rule(psi);
  if (!report.ok()) throw InvalidArgument("decomposition produced an invalid psi");

  return NoiseDecomposition<T>{kappa, q, std::move(psi), noise_matrix(kappa, q)};
}

template <class T>
SquareMatrix<T> noise_matrix(const T& kappa, const MarginalDist<T>& q) {
  if (kappa < T{} || kappa > T(1)) throw InvalidArgument("kappa must be in [0,1]");
  const int sigma = q.alphabet;
  SquareMatrix<T> theta(static_cast<std::size_t>(sigma),
                        std::vector<T>(static_cast<std::size_t>(sigma)));
  for (int a = 0; a < sigma; ++a) {
    for (int b = 0; b < sigma; ++b) {
      T v = kappa * q.weights[static_cast<std::size_t>(b)];
      if (a == b) v += T(1) - kappa;
      theta[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] = v;
    }
  }
  return theta;
}

template <class T>
SquareMatrix<T> noise_inverse(const T& kappa, const MarginalDist<T>& q) {
  if (!(kappa < T(1))) throw InvalidArgument("noise matrix is singular at kappa = 1");
  const int sigma = q.alphabet;
  const T scale = T(1) / (T(1) - kappa);
  SquareMatrix<T> inv(static_cast<std::size_t>(sigma),
                      std::vector<T>(static_cast<std::size_t>(sigma)));
  for (int a = 0; a < sigma; ++a) {
    for (int b = 0; b < sigma; ++b) {
      T v = -kappa * scale * q.weights[static_cast<std::size_t>(b)];
      if (a == b) v += scale;
      inv[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] = v;
    }
  }
  return inv;
}

template <class T>
SquareMatrix<T> matrix_multiply(const SquareMatrix<T>& a, const SquareMatrix<T>& b) {
  const std::size_t n = a.size();
  SquareMatrix<T> c(n, std::vector<T>(n, T{}));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < n; ++k) {
      for (std::size_t j = 0; j < n; ++j) {
        c[i][j] += a[i][k] * b[k][j];
      }
    }
  }
  return c;
}

namespace {

// Applies `theta` at one coordinate of a pattern distribution, in place.
template <class T>
void apply_at_coordinate(const SquareMatrix<T>& theta, int sigma, std::size_t stride,
                         const std::vector<T>& in, std::vector<T>& out) {
  const std::size_t block = stride * static_cast<std::size_t>(sigma);
  for (std::size_t base = 0; base < in.size(); base += block) {
    for (std::size_t off = 0; off < stride; ++off) {
      for (int b = 0; b < sigma; ++b) {
        T acc{};
        for (int a = 0; a < sigma; ++a) {
          acc += in[base + off + static_cast<std::size_t>(a) * stride] *
                 theta[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)];
        }
        out[base + off + static_cast<std::size_t>(b) * stride] = acc;
      }
    }
  }
}

}  // namespace

template <class T>
PatternDist<T> product_kernel_apply(const SquareMatrix<T>& theta, bool synchronous,
                                    const PatternDist<T>& p) {
  const int sigma = p.alphabet;
  if (theta.size() != static_cast<std::size_t>(sigma))
    throw InvalidArgument("per-site matrix must be sigma x sigma");
  const std::size_t n = p.window.size();
  if (p.weights.size() != pow_size(sigma, n))
    throw InvalidArgument("pattern distribution size mismatch");

  PatternDist<T> out;
  out.window = p.window;
  out.alphabet = sigma;

  if (synchronous) {
    std::vector<T> cur = p.weights;
    std::vector<T> next(cur.size());
    std::size_t stride = 1;
    for (std::size_t i = 0; i < n; ++i) {
      apply_at_coordinate(theta, sigma, stride, cur, next);
      cur.swap(next);
      stride *= static_cast<std::size_t>(sigma);
    }
    out.weights = std::move(cur);
  } else {
    std::vector<T> acc(p.weights.size(), T{});
    std::vector<T> tmp(p.weights.size());
    std::size_t stride = 1;
    for (std::size_t i = 0; i < n; ++i) {
      apply_at_coordinate(theta, sigma, stride, p.weights, tmp);
      for (std::size_t j = 0; j < acc.size(); ++j) acc[j] += tmp[j];
      stride *= static_cast<std::size_t>(sigma);
    }
    const T inv_n = T(1) / T(static_cast<int>(n));
    for (T& v : acc) v *= inv_n;
    out.weights = std::move(acc);
  }
  return out;
}

SdpiReport sdpi_verify(const SquareMatrix<double>& theta, const MarginalDist<double>& q,
                       int arity, bool synchronous, int trials, std::uint64_t seed,
                       Exec mode) {
  q.validate();
  if (!q.strictly_positive()) throw InvalidArgument("sdpi_verify needs strictly positive q");
  const int sigma = q.alphabet;
  if (theta.size() != static_cast<std::size_t>(sigma))
    throw InvalidArgument("theta must be sigma x sigma");
  if (arity < 1) throw InvalidArgument("arity must be >= 1");
  if (trials < 0) throw InvalidArgument("trial count must be >= 0");

  // Stationarity precondition q theta = q.
  for (int b = 0; b < sigma; ++b) {
    double acc = 0.0;
    for (int a = 0; a < sigma; ++a) {
      acc += q.weights[static_cast<std::size_t>(a)] *
             theta[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)];
    }
    if (std::fabs(acc - q.weights[static_cast<std::size_t>(b)]) > kFloatSumTolerance)
      throw InvalidArgument("q is not stationary for theta");
  }

  // kappa comes from the table, never from the caller.
  double kappa = kInf;
  for (int a = 0; a < sigma; ++a) {
    for (int b = 0; b < sigma; ++b) {
      kappa = std::min(kappa, theta[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] /
                                  q.weights[static_cast<std::size_t>(b)]);
    }
  }

  SdpiReport report;
  report.kappa = kappa;
  report.synchronous = synchronous;
  report.arity = arity;
  report.bound = synchronous ? 1.0 - kappa : 1.0 - kappa / arity;

  const SiteSet window = SiteSet::interval(0, arity - 1);
  const PatternDist<double> ref = bernoulli_marginal(q, window);
  const std::size_t point_masses = pow_size(sigma, static_cast<std::size_t>(arity));
  const std::size_t total = point_masses + static_cast<std::size_t>(trials);
  report.trials.resize(total);

  auto run_one = [&](std::size_t i) {
    PatternDist<double> p;
    p.window = window;
    p.alphabet = sigma;
    std::int64_t label;
    if (i < point_masses) {
      p.weights.assign(ref.weights.size(), 0.0);
      p.weights[i] = 1.0;
      label = -static_cast<std::int64_t>(i) - 1;
    } else {
      // Flat Dirichlet via normalized exponentials; the (seed, trial) pair
      // fully determines the sample.
      const std::uint64_t trial = i - point_masses;
      RandomStream stream(seed, trial);
      p.weights.resize(ref.weights.size());
      double sum = 0.0;
      for (double& w : p.weights) {
        w = -std::log(stream.uniform01());
        sum += w;
      }
      for (double& w : p.weights) w /= sum;
      label = static_cast<std::int64_t>(trial);
    }
    const double before = relative_entropy(p, ref);
    const PatternDist<double> pushed = product_kernel_apply(theta, synchronous, p);
    const double after = relative_entropy(pushed, ref);
    const double ratio = before > 0.0 ? after / before : 0.0;
    report.trials[i] = SdpiTrial{label, before, after, ratio};
  };

  if (mode == Exec::parallel) {
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < static_cast<std::int64_t>(total); ++i) {
      run_one(static_cast<std::size_t>(i));
    }
  } else {
    for (std::size_t i = 0; i < total; ++i) run_one(i);
  }

  double max_ratio = 0.0;
  for (const SdpiTrial& t : report.trials) max_ratio = std::max(max_ratio, t.ratio);
  report.max_ratio = max_ratio;
  report.pass = max_ratio <= report.bound + 1e-9;
  return report;
}

void write_csv(std::ostream& out, const SdpiReport& report) {
  char buf[128];
  out << "trial,D_before,D_after,ratio\n";
  for (const SdpiTrial& t : report.trials) {
    std::snprintf(buf, sizeof buf, "%lld,%.17g,%.17g,%.17g",
                  static_cast<long long>(t.trial), t.d_before, t.d_after, t.ratio);
    out << buf << '\n';
  }
  std::snprintf(buf, sizeof buf, "# summary max_ratio=%.17g bound=%.17g kappa=%.17g pass=%d",
                report.max_ratio, report.bound, report.kappa, report.pass ? 1 : 0);
  out << buf << '\n';
}

template double max_noise_level(const LocalRule<double>&, const MarginalDist<double>&);
template Rational max_noise_level(const LocalRule<Rational>&, const MarginalDist<Rational>&);
template NoiseDecomposition<double> decompose(const LocalRule<double>&,
                                              const MarginalDist<double>&, const double&);
template NoiseDecomposition<Rational> decompose(const LocalRule<Rational>&,
                                                const MarginalDist<Rational>&, const Rational&);
template SquareMatrix<double> noise_matrix(const double&, const MarginalDist<double>&);
template SquareMatrix<Rational> noise_matrix(const Rational&, const MarginalDist<Rational>&);
template SquareMatrix<double> noise_inverse(const double&, const MarginalDist<double>&);
template SquareMatrix<Rational> noise_inverse(const Rational&, const MarginalDist<Rational>&);
template SquareMatrix<double> matrix_multiply(const SquareMatrix<double>&,
                                              const SquareMatrix<double>&);
template SquareMatrix<Rational> matrix_multiply(const SquareMatrix<Rational>&,
                                                const SquareMatrix<Rational>&);
template PatternDist<double> product_kernel_apply(const SquareMatrix<double>&, bool,
                                                  const PatternDist<double>&);
template PatternDist<Rational> product_kernel_apply(const SquareMatrix<Rational>&, bool,
                                                    const PatternDist<Rational>&);

}  // namespace ergo
