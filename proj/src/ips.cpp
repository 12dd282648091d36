#include "ergo/ips.hpp"

#include <algorithm>
#include <cstdio>
#include <ostream>
#include <set>

#include "ergo/rng.hpp"

namespace ergo {

namespace {

void decode_digits(std::size_t idx, int sigma, std::span<int> out) {
  for (std::size_t i = out.size(); i-- > 0;) {
    out[i] = static_cast<int>(idx % static_cast<std::size_t>(sigma));
    idx /= static_cast<std::size_t>(sigma);
  }
}

template <class T>
T one_value() {
  if constexpr (is_rational_v<T>) {
    return Rational(1);
  } else {
    return 1.0;
  }
}

SiteSet offsets_as_sites(const Neighbourhood& N) {
  return SiteSet(std::vector<Site>(N.offsets().begin(), N.offsets().end()));
}

}  // namespace

template <class T>
PatternDist<T> single_site_pushforward(const LocalRule<T>& phi, const MarginalDist<T>& q,
                                       const Site& k) {
  q.validate();
  if (!q.strictly_positive()) throw InvalidArgument("pushforward needs strictly positive q");
  if (static_cast<int>(k.size()) != phi.dimension())
    throw InvalidArgument("site dimension mismatch");
  const Neighbourhood& N = phi.neighbourhood();
  const int sigma = phi.alphabet();

  SiteSet window = set_union(translate(offsets_as_sites(N), k), SiteSet(std::vector<Site>{k}));
  const std::size_t k_pos = window.index_of(k);
  std::vector<std::size_t> nbr_pos(N.size());
  for (std::size_t j = 0; j < N.size(); ++j) {
    nbr_pos[j] = window.index_of(site_add(k, N.offsets()[j]));
  }

  PatternDist<T> out;
  out.window = window;
  out.alphabet = sigma;
  out.weights.assign(pow_size(sigma, window.size()), T{});
  std::vector<int> digits(window.size());
  for (std::size_t v = 0; v < out.weights.size(); ++v) {
    decode_digits(v, sigma, digits);
    // Weight of the unchanged coordinates, then marginalize over the
    // pre-update symbol a at site k.
    T base = one_value<T>();
    for (std::size_t i = 0; i < window.size(); ++i) {
      if (i == k_pos) continue;
      base *= q.weights[static_cast<std::size_t>(digits[i])];
    }
    T acc{};
    for (int a = 0; a < sigma; ++a) {
      std::size_t row = 0;
      for (std::size_t j = 0; j < N.size(); ++j) {
        const int d = (nbr_pos[j] == k_pos) ? a : digits[nbr_pos[j]];
        row = row * static_cast<std::size_t>(sigma) + static_cast<std::size_t>(d);
      }
      acc += q.weights[static_cast<std::size_t>(a)] * phi.entry(row, digits[k_pos]);
    }
    out.weights[v] = base * acc;
  }
  return out;
}

template <class T>
StationarityReport<T> check_ips_local_stationary(const LocalRule<T>& phi,
                                                 const MarginalDist<T>& q) {
  const Site origin(static_cast<std::size_t>(phi.dimension()), 0);
  const PatternDist<T> pushed = single_site_pushforward(phi, q, origin);
  const PatternDist<T> ref = bernoulli_marginal(q, pushed.window);
  StationarityReport<T> report;
  report.exact = is_rational_v<T>;
  for (std::size_t idx = 0; idx < pushed.weights.size(); ++idx) {
    const T dev = abs_value(pushed.weights[idx] - ref.weights[idx]);
    ++report.identities_checked;
    if (dev > report.max_deviation) {
      report.max_deviation = dev;
      report.witness_window = pushed.window;
      report.witness_pattern = pattern_of(idx, phi.alphabet(), pushed.window.size());
    }
  }
  if constexpr (is_rational_v<T>) {
    report.stationary = (report.max_deviation == 0);
  } else {
    report.stationary = report.max_deviation <= kFloatSumTolerance;
  }
  return report;
}

template <class T>
T generator_on_cylinder(const LocalRule<T>& phi, const MarginalDist<T>& q, const SiteSet& J,
                        std::span<const int> w) {
  q.validate();
  if (!q.strictly_positive()) throw InvalidArgument("generator action needs q > 0");
  if (w.size() != J.size()) throw InvalidArgument("pattern length must match window");
  const Neighbourhood& N = phi.neighbourhood();
  const int sigma = phi.alphabet();

  T lambda_w = one_value<T>();
  for (int s : w) lambda_w *= q.weights[static_cast<std::size_t>(s)];

  T total{};
  std::vector<int> digits;
  for (std::size_t ki = 0; ki < J.size(); ++ki) {
    const Site& k = J[ki];
    const SiteSet V = set_union(J, translate(offsets_as_sites(N), k));
    const std::size_t k_pos = V.index_of(k);
    std::vector<std::size_t> nbr_pos(N.size());
    for (std::size_t j = 0; j < N.size(); ++j) {
      nbr_pos[j] = V.index_of(site_add(k, N.offsets()[j]));
    }
    std::vector<std::ptrdiff_t> j_pos(V.size(), -1);  // V position -> J position
    for (std::size_t i = 0; i < J.size(); ++i) j_pos[V.index_of(J[i])] = static_cast<std::ptrdiff_t>(i);

    // (lambda Phi-hat_k)([w]): sum over pre-update patterns x on V that agree
    // with w off k, weighting by the product measure and the update kernel.
    T push{};
    digits.assign(V.size(), 0);
    const std::size_t count = pow_size(sigma, V.size());
    for (std::size_t x = 0; x < count; ++x) {
      decode_digits(x, sigma, digits);
      bool compatible = true;
      for (std::size_t i = 0; i < V.size() && compatible; ++i) {
        if (j_pos[i] >= 0 && i != k_pos &&
            digits[i] != w[static_cast<std::size_t>(j_pos[i])]) {
          compatible = false;
        }
      }
      if (!compatible) continue;
      T weight = one_value<T>();
      for (std::size_t i = 0; i < V.size(); ++i) {
        weight *= q.weights[static_cast<std::size_t>(digits[i])];
      }
      std::size_t row = 0;
      for (std::size_t j = 0; j < N.size(); ++j) {
        row = row * static_cast<std::size_t>(sigma) +
              static_cast<std::size_t>(digits[nbr_pos[j]]);
      }
      push += weight * phi.entry(row, w[ki]);
    }
    total += push - lambda_w;
  }
  return total;
}

namespace {

bool next_sides(std::vector<int>& sides, int L) {
  for (std::size_t i = sides.size(); i-- > 0;) {
    if (++sides[i] <= L) return true;
    sides[i] = 1;
  }
  return false;
}

}  // namespace

template <class T>
StationarityReport<T> check_ips_stationary_bernoulli(const LocalRule<T>& phi,
                                                     const MarginalDist<T>& q, int L,
                                                     std::size_t cap) {
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
    const SiteSet J = SiteSet::box(lo, hi);
    const std::size_t patterns = pow_size(phi.alphabet(), J.size());
    if (patterns > cap)
      throw CapExceeded("cylinder battery |J| = " + std::to_string(J.size()), patterns, cap);
    for (std::size_t idx = 0; idx < patterns; ++idx) {
      const std::vector<int> w = pattern_of(idx, phi.alphabet(), J.size());
      const T dev = abs_value(generator_on_cylinder(phi, q, J, w));
      ++report.identities_checked;
      if (dev > report.max_deviation) {
        report.max_deviation = dev;
        report.witness_window = J;
        report.witness_pattern = w;
      }
    }
  } while (next_sides(sides, L));
  if constexpr (is_rational_v<T>) {
    report.stationary = (report.max_deviation == 0);
  } else {
    report.stationary = report.max_deviation <= kFloatSumTolerance;
  }
  return report;
}

// --- TorusGenerator ---------------------------------------------------------

template <class T>
void TorusModel<T>::validate() const {
  torus.validate();
  if (rule.dimension() != torus.dimension())
    throw InvalidArgument("rule and torus dimension mismatch");
  int min_side = torus.sides[0];
  for (int s : torus.sides) min_side = std::min(min_side, s);
  if (rule.neighbourhood().radius() >= min_side)
    throw InvalidArgument("neighbourhood radius must be smaller than every torus side");
  std::set<std::size_t> wrapped;
  for (const Site& o : rule.neighbourhood().offsets()) {
    if (!wrapped.insert(torus.site_index(o)).second)
      throw InvalidArgument("neighbourhood offsets collide when wrapped on the torus");
  }
}

template <class T>
TorusGenerator<T>::TorusGenerator(TorusModel<T> model, std::size_t cap)
    : model_(std::move(model)) {
  model_.validate();
  sites_ = model_.torus.site_count();
  states_ = model_.states();
  if (states_ > cap)
    throw CapExceeded("torus state space", states_, cap);
  const int sigma = model_.rule.alphabet();
  const Neighbourhood& N = model_.rule.neighbourhood();
  nbr_.resize(sites_);
  for (std::size_t s = 0; s < sites_; ++s) {
    const Site site = model_.torus.site_at(s);
    nbr_[s].resize(N.size());
    for (std::size_t j = 0; j < N.size(); ++j) {
      nbr_[s][j] =
          static_cast<std::uint32_t>(model_.torus.site_index(site_add(site, N.offsets()[j])));
    }
  }
  place_.resize(sites_);
  std::size_t place = 1;
  for (std::size_t i = sites_; i-- > 0;) {
    place_[i] = place;
    place *= static_cast<std::size_t>(sigma);
  }
}

template <class T>
std::size_t TorusGenerator<T>::row_of(std::span<const int> digits, std::size_t site,
                                      int replaced) const {
  const int sigma = model_.rule.alphabet();
  std::size_t row = 0;
  for (std::uint32_t p : nbr_[site]) {
    const int d = (p == site) ? replaced : digits[p];
    row = row * static_cast<std::size_t>(sigma) + static_cast<std::size_t>(d);
  }
  return row;
}

namespace {

inline std::size_t shifted_state(std::size_t y, int from, int to, std::size_t place) {
  return static_cast<std::size_t>(static_cast<std::int64_t>(y) +
                                  static_cast<std::int64_t>(to - from) *
                                      static_cast<std::int64_t>(place));
}

}  // namespace

template <class T>
std::vector<T> TorusGenerator<T>::apply_single_site(std::span<const T> mu, std::size_t site,
                                                    Exec mode) const {
  if (mu.size() != states_) throw InvalidArgument("state vector size mismatch");
  const int sigma = model_.rule.alphabet();
  std::vector<T> out(states_);
  const bool parallel = (mode == Exec::parallel);
#pragma omp parallel if (parallel)
  {
    std::vector<int> digits(sites_);
#pragma omp for schedule(static)
    for (std::int64_t y = 0; y < static_cast<std::int64_t>(states_); ++y) {
      decode_digits(static_cast<std::size_t>(y), sigma, digits);
      const int yk = digits[site];
      T acc{};
      for (int a = 0; a < sigma; ++a) {
        const std::size_t pred = shifted_state(static_cast<std::size_t>(y), yk, a, place_[site]);
        acc += mu[pred] * model_.rule.entry(row_of(digits, site, a), yk);
      }
      out[static_cast<std::size_t>(y)] = acc;
    }
  }
  return out;
}

template <class T>
std::vector<T> TorusGenerator<T>::apply_L(std::span<const T> mu, Exec mode) const {
  if (mu.size() != states_) throw InvalidArgument("state vector size mismatch");
  const int sigma = model_.rule.alphabet();
  std::vector<T> out(states_);
  const bool parallel = (mode == Exec::parallel);
#pragma omp parallel if (parallel)
  {
    std::vector<int> digits(sites_);
#pragma omp for schedule(static)
    for (std::int64_t y = 0; y < static_cast<std::int64_t>(states_); ++y) {
      decode_digits(static_cast<std::size_t>(y), sigma, digits);
      T acc{};
      for (std::size_t site = 0; site < sites_; ++site) {
        const int yk = digits[site];
        for (int a = 0; a < sigma; ++a) {
          const std::size_t pred =
              shifted_state(static_cast<std::size_t>(y), yk, a, place_[site]);
          acc += mu[pred] * model_.rule.entry(row_of(digits, site, a), yk);
        }
      }
      T n_mu = mu[static_cast<std::size_t>(y)];
      if constexpr (is_rational_v<T>) {
        n_mu *= Rational(static_cast<long>(sites_));
      } else {
        n_mu *= static_cast<double>(sites_);
      }
      out[static_cast<std::size_t>(y)] = acc - n_mu;
    }
  }
  return out;
}

template <class T>
std::vector<T> TorusGenerator<T>::apply_P(std::span<const T> mu, Exec mode) const {
  if (mu.size() != states_) throw InvalidArgument("state vector size mismatch");
  const int sigma = model_.rule.alphabet();
  std::vector<T> out(states_);
  const bool parallel = (mode == Exec::parallel);
#pragma omp parallel if (parallel)
  {
    std::vector<int> digits(sites_);
#pragma omp for schedule(static)
    for (std::int64_t y = 0; y < static_cast<std::int64_t>(states_); ++y) {
      decode_digits(static_cast<std::size_t>(y), sigma, digits);
      T acc{};
      for (std::size_t site = 0; site < sites_; ++site) {
        const int yk = digits[site];
        for (int a = 0; a < sigma; ++a) {
          const std::size_t pred =
              shifted_state(static_cast<std::size_t>(y), yk, a, place_[site]);
          acc += mu[pred] * model_.rule.entry(row_of(digits, site, a), yk);
        }
      }
      // P = I + L/Lambda collapses to the average of the single-site kernels.
      if constexpr (is_rational_v<T>) {
        out[static_cast<std::size_t>(y)] = acc / Rational(static_cast<long>(sites_));
      } else {
        out[static_cast<std::size_t>(y)] = acc / static_cast<double>(sites_);
      }
    }
  }
  return out;
}

template <class T>
PatternDist<T> TorusGenerator<T>::marginal(std::span<const T> mu, const SiteSet& window) const {
  if (mu.size() != states_) throw InvalidArgument("state vector size mismatch");
  const int sigma = model_.rule.alphabet();
  std::vector<std::size_t> pos;
  pos.reserve(window.size());
  {
    std::set<std::size_t> seen;
    for (const Site& s : window.sites()) {
      const std::size_t p = model_.torus.site_index(s);
      if (!seen.insert(p).second)
        throw InvalidArgument("window sites collide when wrapped on the torus");
      pos.push_back(p);
    }
  }
  PatternDist<T> out;
  out.window = window;
  out.alphabet = sigma;
  out.weights.assign(pow_size(sigma, window.size()), T{});
  std::vector<int> digits(sites_);
  for (std::size_t y = 0; y < states_; ++y) {
    decode_digits(y, sigma, digits);
    std::size_t idx = 0;
    for (std::size_t p : pos) {
      idx = idx * static_cast<std::size_t>(sigma) + static_cast<std::size_t>(digits[p]);
    }
    out.weights[idx] += mu[y];
  }
  return out;
}

template <class T>
std::vector<T> TorusGenerator<T>::initial_state_dist(const InitialMeasure<T>& mu0) const {
  using Kind = typename InitialMeasure<T>::Kind;
  const int sigma = model_.rule.alphabet();
  std::vector<T> dist(states_, T{});
  switch (mu0.kind) {
    case Kind::point: {
      std::size_t idx = 0;
      for (std::size_t s = 0; s < sites_; ++s) {
        idx = idx * static_cast<std::size_t>(sigma) +
              static_cast<std::size_t>(mu0.symbol_at(model_.torus.site_at(s)));
      }
      dist[idx] = one_value<T>();
      return dist;
    }
    case Kind::product: {
      std::vector<int> digits(sites_);
      for (std::size_t y = 0; y < states_; ++y) {
        decode_digits(y, sigma, digits);
        T w = one_value<T>();
        for (std::size_t s = 0; s < sites_; ++s) {
          w *= mu0.marginal.weights[static_cast<std::size_t>(digits[s])];
        }
        dist[y] = w;
      }
      return dist;
    }
    case Kind::explicit_window: {
      std::vector<std::size_t> wpos;
      std::set<std::size_t> inside;
      for (const Site& s : mu0.window_dist.window.sites()) {
        const std::size_t p = model_.torus.site_index(s);
        if (!inside.insert(p).second)
          throw InvalidArgument("window sites collide when wrapped on the torus");
        wpos.push_back(p);
      }
      std::vector<int> digits(sites_);
      for (std::size_t y = 0; y < states_; ++y) {
        decode_digits(y, sigma, digits);
        std::size_t widx = 0;
        for (std::size_t p : wpos) {
          widx = widx * static_cast<std::size_t>(sigma) + static_cast<std::size_t>(digits[p]);
        }
        T w = mu0.window_dist.weights[widx];
        for (std::size_t s = 0; s < sites_; ++s) {
          if (inside.count(s)) continue;
          w *= mu0.marginal.weights[static_cast<std::size_t>(digits[s])];
        }
        dist[y] = w;
      }
      return dist;
    }
  }
  throw InvalidArgument("unknown initial measure kind");
}

template <class T>
std::vector<T> TorusGenerator<T>::product_state_dist(const MarginalDist<T>& q) const {
  InitialMeasure<T> mu = InitialMeasure<T>::product_of(q);
  return initial_state_dist(mu);
}

template <class T>
SquareMatrix<T> TorusGenerator<T>::dense_L() const {
  const int sigma = model_.rule.alphabet();
  SquareMatrix<T> L(states_, std::vector<T>(states_, T{}));
  std::vector<int> digits(sites_);
  for (std::size_t x = 0; x < states_; ++x) {
    decode_digits(x, sigma, digits);
    for (std::size_t site = 0; site < sites_; ++site) {
      const int xk = digits[site];
      const std::size_t row = row_of(digits, site, xk);
      for (int b = 0; b < sigma; ++b) {
        const std::size_t y = shifted_state(x, xk, b, place_[site]);
        L[x][y] += model_.rule.entry(row, b);
        if (b == xk) L[x][y] -= one_value<T>();
      }
    }
  }
  return L;
}

UniformizationResult uniformization_evolve(const TorusGenerator<double>& gen,
                                           std::vector<double> mu0, double t, double tol,
                                           Exec mode) {
  if (mu0.size() != gen.states()) throw InvalidArgument("state vector size mismatch");
  if (t < 0.0) throw InvalidArgument("time must be >= 0");
  if (!(tol > 0.0)) throw InvalidArgument("tolerance must be positive");

  const double rate = gen.uniformization_rate() * t;
  UniformizationResult result;
  if (rate == 0.0) {
    result.dist = std::move(mu0);
    result.renormalization = 1.0;
    result.terms = 0;
    return result;
  }

  std::vector<double> acc(mu0.size(), 0.0);
  double pmf = std::exp(-rate);
  double cumulative = pmf;
  for (std::size_t i = 0; i < mu0.size(); ++i) acc[i] = pmf * mu0[i];
  std::vector<double> v = std::move(mu0);
  int k = 0;
  while (cumulative < 1.0 - tol) {
    ++k;
    v = gen.apply_P(v, mode);
    pmf *= rate / static_cast<double>(k);
    cumulative += pmf;
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += pmf * v[i];
  }
  double sum = 0.0;
  for (double w : acc) sum += w;
  for (double& w : acc) w /= sum;
  result.dist = std::move(acc);
  result.tail_bound = 1.0 - cumulative;
  result.renormalization = 1.0 / sum;
  result.terms = k;
  return result;
}

double entropy_derivative_exact(const TorusGenerator<double>& gen,
                                std::span<const double> mu_t, std::span<const double> lambda,
                                const SiteSet& J, Exec mode) {
  const std::vector<double> mu_L = gen.apply_L(mu_t, mode);
  const PatternDist<double> l_J = gen.marginal(mu_L, J);
  const PatternDist<double> m_J = gen.marginal(mu_t, J);
  const PatternDist<double> ref_J = gen.marginal(lambda, J);
  double deriv = 0.0;
  for (std::size_t w = 0; w < m_J.weights.size(); ++w) {
    if (!(m_J.weights[w] > 0.0)) {
      std::string pattern;
      for (int d : pattern_of(w, m_J.alphabet, J.size())) pattern += std::to_string(d);
      throw InvalidArgument("entropy derivative undefined: mu([" + pattern + "]) = 0");
    }
    deriv += l_J.weights[w] * std::log(m_J.weights[w] / ref_J.weights[w]);
  }
  return deriv;
}

double entropy_evolution_bound_ips(double d0, double kappa, const Neighbourhood& N,
                                   const MarginalDist<double>& q, const SiteSet& J, double t,
                                   const std::optional<TorusSpec>& torus) {
  if (!(kappa > 0.0 && kappa <= 1.0)) throw InvalidArgument("bound needs kappa in (0,1]");
  if (t < 0.0) throw InvalidArgument("time must be >= 0");
  q.validate();
  if (!q.strictly_positive()) throw InvalidArgument("bound needs q > 0");
  const SiteSet boundary = torus ? inner_boundary(J, N, *torus) : inner_boundary(J, N);
  const double log_qmin_inv = std::log(1.0 / q.min_weight());
  return d0 * std::exp(-kappa * t) + ((1.0 - kappa) / kappa) * static_cast<double>(N.size()) *
                                         log_qmin_inv * static_cast<double>(boundary.size());
}

SimulationResult simulate_ips(const TorusModel<double>& model,
                              const InitialMeasure<double>& init,
                              std::span<const double> checkpoints, int replicas,
                              std::uint64_t seed, const SiteSet& window, Exec mode) {
  model.validate();
  if (replicas < 1) throw InvalidArgument("replica count must be >= 1");
  for (std::size_t i = 1; i < checkpoints.size(); ++i) {
    if (!(checkpoints[i] > checkpoints[i - 1]))
      throw InvalidArgument("checkpoints must be strictly increasing");
  }
  if (!checkpoints.empty() && checkpoints.front() < 0.0)
    throw InvalidArgument("checkpoints must be >= 0");

  const int sigma = model.rule.alphabet();
  const std::size_t n_sites = model.torus.site_count();
  const Neighbourhood& N = model.rule.neighbourhood();

  // Per-site neighbour indices and window positions on the torus.
  std::vector<std::vector<std::uint32_t>> nbr(n_sites);
  for (std::size_t s = 0; s < n_sites; ++s) {
    const Site site = model.torus.site_at(s);
    nbr[s].resize(N.size());
    for (std::size_t j = 0; j < N.size(); ++j) {
      nbr[s][j] =
          static_cast<std::uint32_t>(model.torus.site_index(site_add(site, N.offsets()[j])));
    }
  }
  std::vector<std::size_t> wpos;
  for (const Site& s : window.sites()) wpos.push_back(model.torus.site_index(s));

  const std::size_t patterns = pow_size(sigma, window.size());
  const std::size_t n_cp = checkpoints.size();
  std::vector<std::vector<std::uint64_t>> counts(n_cp,
                                                 std::vector<std::uint64_t>(patterns, 0));

  using Kind = InitialMeasure<double>::Kind;

  auto run_replica = [&](std::uint64_t r, std::vector<std::vector<std::uint64_t>>& local) {
    RandomStream stream(seed, r);
    std::vector<int> state(n_sites);
    // Initial configuration; draws happen in canonical site order.
    switch (init.kind) {
      case Kind::point:
        for (std::size_t s = 0; s < n_sites; ++s) {
          state[s] = init.symbol_at(model.torus.site_at(s));
        }
        break;
      case Kind::product:
        for (std::size_t s = 0; s < n_sites; ++s) {
          state[s] = stream.sample_row(init.marginal.weights);
        }
        break;
      case Kind::explicit_window: {
        const int widx = stream.sample_row(init.window_dist.weights);
        const std::vector<int> wpat =
            pattern_of(static_cast<std::size_t>(widx), sigma, init.window_dist.window.size());
        std::vector<bool> fixed(n_sites, false);
        for (std::size_t i = 0; i < init.window_dist.window.sites().size(); ++i) {
          const std::size_t p = model.torus.site_index(init.window_dist.window[i]);
          state[p] = wpat[i];
          fixed[p] = true;
        }
        for (std::size_t s = 0; s < n_sites; ++s) {
          if (!fixed[s]) state[s] = stream.sample_row(init.marginal.weights);
        }
        break;
      }
    }

    auto window_pattern = [&]() {
      std::size_t idx = 0;
      for (std::size_t p : wpos) {
        idx = idx * static_cast<std::size_t>(sigma) + static_cast<std::size_t>(state[p]);
      }
      return idx;
    };

    double t = 0.0;
    std::size_t cp = 0;
    while (cp < n_cp && checkpoints[cp] <= 0.0) {
      ++local[cp][window_pattern()];
      ++cp;
    }
    while (cp < n_cp) {
      const double dt = stream.exponential(static_cast<double>(n_sites));
      const double t_next = t + dt;
      while (cp < n_cp && checkpoints[cp] < t_next) {
        ++local[cp][window_pattern()];  // state at the checkpoint is pre-event
        ++cp;
      }
      if (cp >= n_cp) break;
      const std::size_t site = stream.below(n_sites);
      std::size_t row = 0;
      for (std::uint32_t p : nbr[site]) {
        row = row * static_cast<std::size_t>(sigma) + static_cast<std::size_t>(state[p]);
      }
      state[site] = stream.sample_row(model.rule.row(row));
      t = t_next;
    }
  };

  if (mode == Exec::parallel) {
#pragma omp parallel
    {
      std::vector<std::vector<std::uint64_t>> local(
          n_cp, std::vector<std::uint64_t>(patterns, 0));
#pragma omp for schedule(static)
      for (std::int64_t r = 0; r < replicas; ++r) {
        run_replica(static_cast<std::uint64_t>(r), local);
      }
#pragma omp critical
      {
        for (std::size_t c = 0; c < n_cp; ++c) {
          for (std::size_t p = 0; p < patterns; ++p) counts[c][p] += local[c][p];
        }
      }
    }
  } else {
    for (std::int64_t r = 0; r < replicas; ++r) {
      run_replica(static_cast<std::uint64_t>(r), counts);
    }
  }

  SimulationResult result;
  result.window = window;
  result.replicas = replicas;
  result.checkpoints.resize(n_cp);
  for (std::size_t c = 0; c < n_cp; ++c) {
    SimulationCheckpoint& out = result.checkpoints[c];
    out.t = checkpoints[c];
    out.counts = counts[c];
    out.empirical.window = window;
    out.empirical.alphabet = sigma;
    out.empirical.weights.resize(patterns);
    out.std_err.resize(patterns);
    for (std::size_t p = 0; p < patterns; ++p) {
      const double phat =
          static_cast<double>(counts[c][p]) / static_cast<double>(replicas);
      out.empirical.weights[p] = phat;
      out.std_err[p] = std::sqrt(phat * (1.0 - phat) / static_cast<double>(replicas));
    }
  }
  return result;
}

void write_csv(std::ostream& out, const SimulationResult& result) {
  out << "checkpoint_t,pattern,empirical_prob,std_err,exact_prob_if_available\n";
  char buf[160];
  for (const SimulationCheckpoint& cp : result.checkpoints) {
    for (std::size_t p = 0; p < cp.empirical.weights.size(); ++p) {
      std::string pattern;
      for (int d : pattern_of(p, cp.empirical.alphabet, result.window.size())) {
        pattern += std::to_string(d);
      }
      std::snprintf(buf, sizeof buf, "%.17g,%s,%.17g,%.17g", cp.t, pattern.c_str(),
                    cp.empirical.weights[p], cp.std_err[p]);
      out << buf;
      if (cp.exact) {
        std::snprintf(buf, sizeof buf, ",%.17g", cp.exact->weights[p]);
        out << buf;
      } else {
        out << ',';
      }
      out << '\n';
    }
  }
}

template PatternDist<double> single_site_pushforward(const LocalRule<double>&,
                                                     const MarginalDist<double>&, const Site&);
template PatternDist<Rational> single_site_pushforward(const LocalRule<Rational>&,
                                                       const MarginalDist<Rational>&,
                                                       const Site&);
template StationarityReport<double> check_ips_local_stationary(const LocalRule<double>&,
                                                               const MarginalDist<double>&);
template StationarityReport<Rational> check_ips_local_stationary(const LocalRule<Rational>&,
                                                                 const MarginalDist<Rational>&);
template double generator_on_cylinder(const LocalRule<double>&, const MarginalDist<double>&,
                                      const SiteSet&, std::span<const int>);
template Rational generator_on_cylinder(const LocalRule<Rational>&,
                                        const MarginalDist<Rational>&, const SiteSet&,
                                        std::span<const int>);
template StationarityReport<double> check_ips_stationary_bernoulli(
    const LocalRule<double>&, const MarginalDist<double>&, int, std::size_t);
template StationarityReport<Rational> check_ips_stationary_bernoulli(
    const LocalRule<Rational>&, const MarginalDist<Rational>&, int, std::size_t);
template struct TorusModel<double>;
template struct TorusModel<Rational>;
template class TorusGenerator<double>;
template class TorusGenerator<Rational>;

}  // namespace ergo
