#include "ergo/pca.hpp"

#include <algorithm>
#include <cstdio>
#include <ostream>

namespace ergo {

namespace {

// Positions (in the canonical order of S = N(J)) of the neighbourhood of each
// target site, in neighbourhood offset order.
std::vector<std::vector<std::uint32_t>> neighbour_positions(const SiteSet& J,
                                                            const Neighbourhood& N,
                                                            const SiteSet& S) {
  std::vector<std::vector<std::uint32_t>> pos(J.size(),
                                              std::vector<std::uint32_t>(N.size()));
  for (std::size_t k = 0; k < J.size(); ++k) {
    for (std::size_t j = 0; j < N.size(); ++j) {
      pos[k][j] = static_cast<std::uint32_t>(S.index_of(site_add(J[k], N.offsets()[j])));
    }
  }
  return pos;
}

void decode_digits(std::size_t idx, int sigma, std::span<int> out) {
  for (std::size_t i = out.size(); i-- > 0;) {
    out[i] = static_cast<int>(idx % static_cast<std::size_t>(sigma));
    idx /= static_cast<std::size_t>(sigma);
  }
}

}  // namespace

template <class T>
std::vector<std::vector<T>> pca_window_kernel(const LocalRule<T>& phi, const SiteSet& J,
                                              std::size_t cap) {
  const Neighbourhood& N = phi.neighbourhood();
  if (J.empty()) throw InvalidArgument("window must be nonempty");
  if (J.dimension() != N.dimension()) throw InvalidArgument("window dimension mismatch");
  const SiteSet S = neighbourhood_of(J, N);
  const int sigma = phi.alphabet();
  const std::size_t rows = pow_size(sigma, S.size());
  const std::size_t cols = pow_size(sigma, J.size());
  if (rows > cap)
    throw CapExceeded("window kernel source |N(J)| = " + std::to_string(S.size()), rows, cap);
  if (cols > cap)
    throw CapExceeded("window kernel target |J| = " + std::to_string(J.size()), cols, cap);

  const auto pos = neighbour_positions(J, N, S);
  std::vector<std::vector<T>> kernel(rows, std::vector<T>(cols));
  std::vector<int> u_digits(S.size());
  std::vector<int> w_digits(J.size());
  std::vector<std::size_t> rowidx(J.size());
  for (std::size_t u = 0; u < rows; ++u) {
    decode_digits(u, sigma, u_digits);
    for (std::size_t k = 0; k < J.size(); ++k) {
      std::size_t r = 0;
      for (std::uint32_t p : pos[k]) {
        r = r * static_cast<std::size_t>(sigma) + static_cast<std::size_t>(u_digits[p]);
      }
      rowidx[k] = r;
    }
    for (std::size_t w = 0; w < cols; ++w) {
      decode_digits(w, sigma, w_digits);
      T v;
      if constexpr (is_rational_v<T>) {
        v = Rational(1);
      } else {
        v = 1.0;
      }
      for (std::size_t k = 0; k < J.size(); ++k) {
        v *= phi.entry(rowidx[k], w_digits[k]);
      }
      kernel[u][w] = v;
    }
  }
  return kernel;
}

template <class T>
PatternDist<T> pca_window_pushforward(const LocalRule<T>& phi, const PatternDist<T>& src,
                                      const SiteSet& J, Exec mode) {
  const Neighbourhood& N = phi.neighbourhood();
  const SiteSet S = neighbourhood_of(J, N);
  if (!(src.window == S))
    throw InvalidArgument("pushforward source window must be exactly N(J)");
  if (src.alphabet != phi.alphabet()) throw InvalidArgument("alphabet mismatch");
  const int sigma = phi.alphabet();
  const std::size_t m = J.size();
  const std::size_t out_size = pow_size(sigma, m);
  const std::size_t src_size = src.weights.size();
  const auto pos = neighbour_positions(J, N, S);

  PatternDist<T> out;
  out.window = J;
  out.alphabet = sigma;
  out.weights.assign(out_size, T{});

  // Chunked gather: row indices of each source pattern are computed once per
  // chunk, then every output entry accumulates the chunk's terms in a fixed
  // order.  Serial and parallel paths are bitwise identical.
  constexpr std::size_t kChunk = 4096;
  std::vector<std::size_t> rowbuf(kChunk * m);
  std::vector<std::uint32_t> nz;  // chunk-local indices of nonzero weights
  nz.reserve(kChunk);
  std::vector<int> u_digits(S.size());

  const bool parallel = (mode == Exec::parallel);
  for (std::size_t chunk_lo = 0; chunk_lo < src_size; chunk_lo += kChunk) {
    const std::size_t chunk_hi = std::min(src_size, chunk_lo + kChunk);
    nz.clear();
    for (std::size_t u = chunk_lo; u < chunk_hi; ++u) {
      if (src.weights[u] == T{}) continue;  // skipping exact zeros is exact
      const std::size_t local = u - chunk_lo;
      nz.push_back(static_cast<std::uint32_t>(local));
      decode_digits(u, sigma, u_digits);
      for (std::size_t k = 0; k < m; ++k) {
        std::size_t r = 0;
        for (std::uint32_t p : pos[k]) {
          r = r * static_cast<std::size_t>(sigma) + static_cast<std::size_t>(u_digits[p]);
        }
        rowbuf[local * m + k] = r;
      }
    }

#pragma omp parallel for schedule(static) if (parallel)
    for (std::int64_t w = 0; w < static_cast<std::int64_t>(out_size); ++w) {
      std::vector<int> w_digits(m);
      decode_digits(static_cast<std::size_t>(w), sigma, w_digits);
      T acc{};
      for (std::uint32_t local : nz) {
        T term = src.weights[chunk_lo + local];
        for (std::size_t k = 0; k < m; ++k) {
          term *= phi.entry(rowbuf[local * m + k], w_digits[k]);
        }
        acc += term;
      }
      out.weights[static_cast<std::size_t>(w)] += acc;
    }
  }
  return out;
}

template <class T>
PatternDist<T> marginal_on(const InitialMeasure<T>& mu, const SiteSet& window, int alphabet) {
  using Kind = typename InitialMeasure<T>::Kind;
  switch (mu.kind) {
    case Kind::product:
      return bernoulli_marginal(mu.marginal, window);
    case Kind::point: {
      std::vector<int> pattern;
      pattern.reserve(window.size());
      for (const Site& s : window.sites()) pattern.push_back(mu.symbol_at(s));
      return PatternDist<T>::point_mass(window, alphabet, pattern);
    }
    case Kind::explicit_window: {
      std::vector<Site> inside;
      for (const Site& s : mu.window_dist.window.sites()) {
        if (window.contains(s)) inside.push_back(s);
      }
      const SiteSet A(std::move(inside));
      const PatternDist<T> dist_a = marginalize(mu.window_dist, A);
      std::vector<std::size_t> pos_a;
      std::vector<std::size_t> pos_out;
      for (std::size_t i = 0; i < window.size(); ++i) {
        if (A.contains(window[i])) {
          pos_a.push_back(i);
        } else {
          pos_out.push_back(i);
        }
      }
      PatternDist<T> out;
      out.window = window;
      out.alphabet = alphabet;
      const std::size_t n = pow_size(alphabet, window.size());
      out.weights.resize(n);
      std::vector<int> digits(window.size());
      for (std::size_t idx = 0; idx < n; ++idx) {
        decode_digits(idx, alphabet, digits);
        std::size_t a_idx = 0;
        for (std::size_t p : pos_a) {
          a_idx = a_idx * static_cast<std::size_t>(alphabet) +
                  static_cast<std::size_t>(digits[p]);
        }
        T w = dist_a.weights.empty() ? T{} : dist_a.weights[a_idx];
        if (dist_a.weights.empty()) {
          if constexpr (is_rational_v<T>) {
            w = Rational(1);
          } else {
            w = 1.0;
          }
        }
        for (std::size_t p : pos_out) {
          w *= mu.marginal.weights[static_cast<std::size_t>(digits[p])];
        }
        out.weights[idx] = w;
      }
      return out;
    }
  }
  throw InvalidArgument("unknown initial measure kind");
}

double initial_bound_entropy_on(const InitialMeasure<double>& mu,
                                const MarginalDist<double>& q, const SiteSet& S) {
  using Kind = InitialMeasure<double>::Kind;
  switch (mu.kind) {
    case Kind::point:
      return entropy_upper_bound(S.size(), q);
    case Kind::product: {
      double per_site = 0.0;
      for (int a = 0; a < q.alphabet; ++a) {
        const double p = mu.marginal.weights[static_cast<std::size_t>(a)];
        if (p == 0.0) continue;
        if (q.weights[static_cast<std::size_t>(a)] == 0.0) return kInf;
        per_site += p * std::log(p / q.weights[static_cast<std::size_t>(a)]);
      }
      return static_cast<double>(S.size()) * per_site;
    }
    case Kind::explicit_window: {
      std::vector<Site> inside;
      for (const Site& s : mu.window_dist.window.sites()) {
        if (S.contains(s)) inside.push_back(s);
      }
      const SiteSet A(std::move(inside));
      const PatternDist<double> dist_a = marginalize(mu.window_dist, A);
      const PatternDist<double> ref_a = bernoulli_marginal(q, A);
      double d = A.empty() ? 0.0 : relative_entropy(dist_a, ref_a);
      double per_site = 0.0;
      for (int a = 0; a < q.alphabet; ++a) {
        const double p = mu.marginal.weights[static_cast<std::size_t>(a)];
        if (p == 0.0) continue;
        if (q.weights[static_cast<std::size_t>(a)] == 0.0) return kInf;
        per_site += p * std::log(p / q.weights[static_cast<std::size_t>(a)]);
      }
      return d + static_cast<double>(S.size() - A.size()) * per_site;
    }
  }
  throw InvalidArgument("unknown initial measure kind");
}

namespace {

std::vector<SiteSet> window_chain(const SiteSet& J, const Neighbourhood& N, int steps) {
  std::vector<SiteSet> chain;
  chain.reserve(static_cast<std::size_t>(steps) + 1);
  chain.push_back(J);
  for (int i = 1; i <= steps; ++i) chain.push_back(neighbourhood_of(chain.back(), N));
  return chain;
}

}  // namespace

template <class T>
PatternDist<T> evolve_window_dist(const LocalRule<T>& phi, const InitialMeasure<T>& mu0,
                                  const SiteSet& J, int steps, std::size_t cap, Exec mode) {
  if (steps < 0) throw InvalidArgument("step count must be >= 0");
  const auto chain = window_chain(J, phi.neighbourhood(), steps);
  const std::size_t top = pow_size(phi.alphabet(), chain.back().size());
  if (top > cap)
    throw CapExceeded("evolution window |N^t(J)| = " + std::to_string(chain.back().size()),
                      top, cap);
  PatternDist<T> cur = marginal_on(mu0, chain.back(), phi.alphabet());
  for (int tau = steps; tau >= 1; --tau) {
    cur = pca_window_pushforward(phi, cur, chain[static_cast<std::size_t>(tau) - 1], mode);
  }
  return cur;
}

ConvergenceTrajectory evolve_pca_exact(const LocalRule<double>& phi,
                                       const InitialMeasure<double>& mu0, const SiteSet& J,
                                       int steps,
                                       const std::optional<MarginalDist<double>>& q_ref,
                                       const EvolveOptions& opts) {
  if (steps < 0) throw InvalidArgument("step count must be >= 0");
  if (!phi.neighbourhood().contains_origin())
    throw InvalidArgument("trajectory readouts need 0 in N (window chain must contain J)");
  const auto chain = window_chain(J, phi.neighbourhood(), steps);
  const std::size_t top = pow_size(phi.alphabet(), chain.back().size());
  if (top > opts.cap)
    throw CapExceeded("evolution window |N^t(J)| = " + std::to_string(chain.back().size()),
                      top, opts.cap);

  ConvergenceTrajectory traj;
  traj.window = J;

  // Reference measure and bound machinery.
  std::optional<PatternDist<double>> lambda_j;
  double kappa = 0.0;
  double alpha1 = 0.0;
  double beta1 = 0.0;
  bool have_bounds = false;
  if (q_ref) {
    q_ref->validate();
    lambda_j = bernoulli_marginal(*q_ref, J);
    if (q_ref->strictly_positive()) {
      kappa = max_noise_level(phi, *q_ref);
      if (kappa > 0.0) {
        have_bounds = true;
        if (kappa < 1.0) {
          beta1 = opts.beta1 ? *opts.beta1 : 0.5 * (-std::log1p(-kappa));
        } else {
          beta1 = opts.beta1 ? *opts.beta1 : 1.0;
        }
        alpha1 = theorem_constants(phi, *q_ref, beta1).alpha1;
      }
    }
  }
  int diameter = 0;
  for (int side : J.bounding_sides()) diameter = std::max(diameter, side);

  PatternDist<double> cur = marginal_on(mu0, chain.back(), phi.alphabet());
  for (int t = 0; t <= steps; ++t) {
    TrajectoryRecord rec;
    rec.t = static_cast<double>(t);
    rec.dist = marginalize(cur, J);
    rec.d_nats = std::nan("");
    rec.tv = std::nan("");
    rec.iterated_bound = std::nan("");
    rec.envelope = std::nan("");
    rec.pinsker = std::nan("");
    if (lambda_j) {
      rec.d_nats = (t == 0 && has_infinite_entropy(mu0))
                       ? kInf
                       : relative_entropy(rec.dist, *lambda_j);
      rec.tv = total_variation(rec.dist, *lambda_j);
      rec.pinsker = pinsker_bound(rec.d_nats);
      if (have_bounds) {
        const double d0 =
            initial_bound_entropy_on(mu0, *q_ref, chain[static_cast<std::size_t>(t)]);
        rec.iterated_bound = std::pow(1.0 - kappa, t) * d0;
        rec.envelope = alpha1 * std::exp(-beta1 * t) *
                       std::pow(static_cast<double>(diameter), phi.dimension());
      }
    }
    traj.records.push_back(std::move(rec));
    if (t < steps) {
      cur = pca_window_pushforward(phi, cur, chain[static_cast<std::size_t>(steps - t) - 1],
                                   opts.mode);
    }
  }
  return traj;
}

void write_csv(std::ostream& out, const ConvergenceTrajectory& traj) {
  out << "t,D_J_nats,TV,iterated_bound,envelope_alpha1_exp,pinsker_of_D\n";
  char buf[256];
  for (const TrajectoryRecord& r : traj.records) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g", r.t, r.d_nats,
                  r.tv, r.iterated_bound, r.envelope, r.pinsker);
    out << buf << '\n';
  }
}

namespace {

template <class T>
bool deviation_is_zero(const T& dev) {
  if constexpr (is_rational_v<T>) {
    return dev == 0;
  } else {
    return dev <= kFloatSumTolerance;
  }
}

// Enumerates side vectors in {1..L}^d in lexicographic order.
bool next_sides(std::vector<int>& sides, int L) {
  for (std::size_t i = sides.size(); i-- > 0;) {
    if (++sides[i] <= L) return true;
    sides[i] = 1;
  }
  return false;
}

template <class T>
void stationarity_scan(const LocalRule<T>& phi, const MarginalDist<T>& q, const SiteSet& J,
                       std::size_t cap, StationarityReport<T>& report) {
  const SiteSet S = neighbourhood_of(J, phi.neighbourhood());
  const std::size_t src_size = pow_size(phi.alphabet(), S.size());
  if (src_size > cap)
    throw CapExceeded("stationarity check |N(J)| = " + std::to_string(S.size()), src_size,
                      cap);
  const PatternDist<T> src = bernoulli_marginal(q, S);
  const PatternDist<T> pushed = pca_window_pushforward(phi, src, J, Exec::serial);
  const PatternDist<T> ref = bernoulli_marginal(q, J);
  for (std::size_t idx = 0; idx < pushed.weights.size(); ++idx) {
    const T dev = abs_value(pushed.weights[idx] - ref.weights[idx]);
    ++report.identities_checked;
    if (dev > report.max_deviation) {
      report.max_deviation = dev;
      report.witness_window = J;
      report.witness_pattern = pattern_of(idx, phi.alphabet(), J.size());
    }
  }
}

}  // namespace

template <class T>
StationarityReport<T> check_pca_stationary(const LocalRule<T>& phi, const MarginalDist<T>& q,
                                           int L, std::size_t cap) {
  q.validate();
  if (!q.strictly_positive()) throw InvalidArgument("stationarity check needs q > 0");
  if (L < 1) throw InvalidArgument("L must be >= 1");
  StationarityReport<T> report;
  report.exact = is_rational_v<T>;
  const int d = phi.dimension();
  std::vector<int> sides(static_cast<std::size_t>(d), 1);
  do {
    Site lo(static_cast<std::size_t>(d), 0);
    Site hi(static_cast<std::size_t>(d));
    for (int i = 0; i < d; ++i) hi[static_cast<std::size_t>(i)] = sides[static_cast<std::size_t>(i)] - 1;
    stationarity_scan(phi, q, SiteSet::box(lo, hi), cap, report);
  } while (next_sides(sides, L));
  report.stationary = deviation_is_zero(report.max_deviation);
  return report;
}

template <class T>
StationarityReport<T> check_piatetski_shapiro(const LocalRule<T>& phi,
                                              const MarginalDist<T>& q, std::size_t cap) {
  q.validate();
  if (!q.strictly_positive()) throw InvalidArgument("stationarity check needs q > 0");
  if (phi.dimension() != 1 || phi.neighbourhood().offsets() != std::vector<Site>{{0}, {1}})
    throw InvalidArgument("finitary criterion applies to 1D rules with N = (0, 1)");
  StationarityReport<T> report;
  report.exact = is_rational_v<T>;
  for (int len = 1; len <= phi.alphabet() + 1; ++len) {
    stationarity_scan(phi, q, SiteSet::interval(0, len - 1), cap, report);
  }
  report.stationary = deviation_is_zero(report.max_deviation);
  return report;
}

std::vector<double> iterated_decay_bound(const LocalRule<double>& phi,
                                         const MarginalDist<double>& q,
                                         const InitialMeasure<double>& mu0, const SiteSet& J,
                                         int steps) {
  q.validate();
  if (!q.strictly_positive()) throw InvalidArgument("decay bound needs q > 0");
  const double kappa = max_noise_level(phi, q);
  if (!(kappa > 0.0))
    throw InvalidArgument("decay bound is vacuous for kappa = 0 (rule not strictly positive)");
  std::vector<double> bound;
  bound.reserve(static_cast<std::size_t>(steps) + 1);
  SiteSet window = J;
  for (int t = 0; t <= steps; ++t) {
    bound.push_back(std::pow(1.0 - kappa, t) * initial_bound_entropy_on(mu0, q, window));
    if (t < steps) window = neighbourhood_of(window, phi.neighbourhood());
  }
  return bound;
}

ErgodicityConstants theorem_constants(const LocalRule<double>& phi,
                                      const MarginalDist<double>& q, double beta1) {
  q.validate();
  if (!q.strictly_positive()) throw InvalidArgument("theorem constants need q > 0");
  const double kappa = max_noise_level(phi, q);
  if (!(kappa > 0.0)) throw InvalidArgument("theorem constants need kappa > 0");
  ErgodicityConstants c;
  c.kappa = kappa;
  c.q_min = q.min_weight();
  c.radius = phi.neighbourhood().radius();
  c.dimension = phi.dimension();
  c.beta1 = beta1;

  const double log_qmin_inv = std::log(1.0 / c.q_min);
  if (kappa >= 1.0) {
    // (1-kappa)^t vanishes for every t > 0; only the t = 0 term remains.
    if (!(beta1 > 0.0)) throw InvalidArgument("beta1 must be positive");
    c.alpha1 = log_qmin_inv;
  } else {
    const double limit = -std::log1p(-kappa);
    if (!(beta1 > 0.0 && beta1 < limit))
      throw InvalidArgument("beta1 must lie in (0, -ln(1-kappa))");
    // g(t) = c0 t + d ln(1+2rt) with c0 < 0 is unimodal; its maximum sits
    // where the log-derivative turns negative.
    const double c0 = beta1 + std::log1p(-kappa);
    const double r = static_cast<double>(c.radius);
    const double d = static_cast<double>(c.dimension);
    double t_peak = 0.0;
    if (r > 0.0) {
      t_peak = std::max(0.0, (-2.0 * r * d / c0 - 1.0) / (2.0 * r));
    }
    const double g = c0 * t_peak + d * std::log(1.0 + 2.0 * r * t_peak);
    c.alpha1 = log_qmin_inv * std::exp(g);
  }
  c.alpha = std::sqrt(c.alpha1 / 2.0);
  c.beta = beta1 / 2.0;
  return c;
}

double mixing_time_bound(double alpha, double beta, int dimension, int diameter, double eps) {
  if (!(alpha > 0.0 && beta > 0.0)) throw InvalidArgument("alpha and beta must be positive");
  if (dimension < 1 || diameter < 1) throw InvalidArgument("dimension and diameter must be >= 1");
  if (!(eps > 0.0)) throw InvalidArgument("eps must be positive");
  return (static_cast<double>(dimension) / (2.0 * beta)) * std::log(diameter) +
         (std::log(alpha) - std::log(eps)) / beta;
}

std::optional<double> empirical_mixing_time(const ConvergenceTrajectory& traj, double eps) {
  if (traj.records.empty()) throw InvalidArgument("empty trajectory");
  std::ptrdiff_t last_bad = -1;
  for (std::ptrdiff_t i = static_cast<std::ptrdiff_t>(traj.records.size()) - 1; i >= 0; --i) {
    if (!(traj.records[static_cast<std::size_t>(i)].tv < eps)) {
      last_bad = i;
      break;
    }
  }
  if (last_bad < 0) return traj.records.front().t;
  if (last_bad + 1 >= static_cast<std::ptrdiff_t>(traj.records.size())) return std::nullopt;
  return traj.records[static_cast<std::size_t>(last_bad) + 1].t;
}

template std::vector<std::vector<double>> pca_window_kernel(const LocalRule<double>&,
                                                            const SiteSet&, std::size_t);
template std::vector<std::vector<Rational>> pca_window_kernel(const LocalRule<Rational>&,
                                                              const SiteSet&, std::size_t);
template PatternDist<double> pca_window_pushforward(const LocalRule<double>&,
                                                    const PatternDist<double>&,
                                                    const SiteSet&, Exec);
template PatternDist<Rational> pca_window_pushforward(const LocalRule<Rational>&,
                                                      const PatternDist<Rational>&,
                                                      const SiteSet&, Exec);
template PatternDist<double> marginal_on(const InitialMeasure<double>&, const SiteSet&, int);
template PatternDist<Rational> marginal_on(const InitialMeasure<Rational>&, const SiteSet&,
                                           int);
template PatternDist<double> evolve_window_dist(const LocalRule<double>&,
                                                const InitialMeasure<double>&, const SiteSet&,
                                                int, std::size_t, Exec);
template PatternDist<Rational> evolve_window_dist(const LocalRule<Rational>&,
                                                  const InitialMeasure<Rational>&,
                                                  const SiteSet&, int, std::size_t, Exec);
template StationarityReport<double> check_pca_stationary(const LocalRule<double>&,
                                                         const MarginalDist<double>&, int,
                                                         std::size_t);
template StationarityReport<Rational> check_pca_stationary(const LocalRule<Rational>&,
                                                           const MarginalDist<Rational>&, int,
                                                           std::size_t);
template StationarityReport<double> check_piatetski_shapiro(const LocalRule<double>&,
                                                            const MarginalDist<double>&,
                                                            std::size_t);
template StationarityReport<Rational> check_piatetski_shapiro(const LocalRule<Rational>&,
                                                              const MarginalDist<Rational>&,
                                                              std::size_t);

}  // namespace ergo
