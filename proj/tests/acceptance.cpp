// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure.  Every tolerance is pinned here, in code.
#include <cmath>
#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

#include "ergo/decompose.hpp"
#include "ergo/influence.hpp"
#include "ergo/ips.hpp"
#include "ergo/pca.hpp"
#include "ergo/rng.hpp"

using namespace ergo;

namespace {

int failures = 0;

void report(int number, const std::string& what, bool pass, const std::string& detail) {
  std::printf("[%s] criterion %d: %s (%s)\n", pass ? "PASS" : "FAIL", number, what.c_str(),
              detail.c_str());
  if (!pass) ++failures;
}

LocalRule<Rational> biased_xor(const Rational& eps) {
  Neighbourhood nb(1, {{0}, {1}});
  std::vector<int> f{0, 1, 1, 0};
  std::vector<std::vector<Rational>> theta{{1 - eps, eps}, {Rational(0), Rational(1)}};
  return surjective_ca_noise(2, nb, f, theta);
}

double state_divergence(const TorusGenerator<double>& gen, std::span<const double> mu,
                        std::span<const double> lambda, const SiteSet& window) {
  return relative_entropy(gen.marginal(mu, window), gen.marginal(lambda, window));
}

void criterion1() {
  const auto qu = MarginalDist<Rational>::uniform(2);
  const auto phi = xor_noise(Rational(1, 10));
  const auto full = check_pca_stationary(phi, qu, 4);
  const auto ps = check_piatetski_shapiro(phi, qu);
  const auto biased = check_pca_stationary(biased_xor(Rational(1, 10)), qu, 1);
  const bool pass = full.exact && full.max_deviation == 0 && ps.stationary &&
                    biased.max_deviation == Rational(1, 20);
  std::ostringstream detail;
  detail << "exact deviations: xor " << format_rational(full.max_deviation) << ", finitary "
         << format_rational(ps.max_deviation) << ", biased "
         << format_rational(biased.max_deviation) << " = 1/20";
  report(1, "exact PCA stationarity in rational mode", pass, detail.str());
}

// Criterion 2 keeps its trajectory for criterion 10.
ConvergenceTrajectory criterion2() {
  const auto phi = xor_noise(0.1);
  const auto q = MarginalDist<double>::uniform(2);
  const auto zeros = InitialMeasure<double>::uniform_symbol(0, 1);
  const SiteSet j = SiteSet::interval(0, 3);
  const int T = 8;
  EvolveOptions opts;
  opts.beta1 = 0.11;

  const auto traj = evolve_pca_exact(phi, zeros, j, T, q, opts);
  const auto enlarged =
      evolve_pca_exact(phi, zeros, neighbourhood_of(j, phi.neighbourhood()), T - 1, q, opts);

  bool pass = true;
  double worst_slack = kInf;
  for (int t = 1; t <= T; ++t) {
    const double d = traj.records[static_cast<std::size_t>(t)].d_nats;
    const double contract = 0.8 * enlarged.records[static_cast<std::size_t>(t - 1)].d_nats;
    const double cap = std::pow(0.8, t) * (4.0 + t) * std::log(2.0);
    pass = pass && d <= contract + 1e-9 && d <= cap;
    worst_slack = std::min(worst_slack, std::min(contract + 1e-9 - d, cap - d));
  }
  char detail[128];
  std::snprintf(detail, sizeof detail, "t = 1..8, min slack %.3e", worst_slack);
  report(2, "one-step entropy contraction and iterated cap", pass, detail);
  return traj;
}

void criterion3() {
  const auto qu = MarginalDist<double>::uniform(2);
  const auto theta = noise_matrix(0.2, qu);
  bool pass = true;
  double worst = 0.0;
  for (int n = 1; n <= 3; ++n) {
    const auto sync = sdpi_verify(theta, qu, n, true, 1000, 2024);
    const auto async = sdpi_verify(theta, qu, n, false, 1000, 2024);
    pass = pass && sync.max_ratio <= 0.8 + 1e-9 &&
           async.max_ratio <= 1.0 - 0.2 / n + 1e-9;
    worst = std::max(worst, sync.max_ratio / sync.bound);
    worst = std::max(worst, async.max_ratio / async.bound);
  }

  // weak DPI on 1000 random (p, r, theta) triples
  RandomStream rng(71);
  const SiteSet w1 = SiteSet::interval(0, 0);
  auto simplex = [&](std::size_t n) {
    std::vector<double> v(n);
    double s = 0.0;
    for (double& x : v) {
      x = -std::log(rng.uniform01());
      s += x;
    }
    for (double& x : v) x /= s;
    return v;
  };
  for (int trial = 0; trial < 1000 && pass; ++trial) {
    const int sigma = 2 + static_cast<int>(rng.below(2));
    PatternDist<double> p{w1, sigma, simplex(static_cast<std::size_t>(sigma))};
    PatternDist<double> r{w1, sigma, simplex(static_cast<std::size_t>(sigma))};
    SquareMatrix<double> m(static_cast<std::size_t>(sigma));
    for (auto& row : m) row = simplex(static_cast<std::size_t>(sigma));
    const double before = relative_entropy(p, r);
    const double after = relative_entropy(product_kernel_apply(m, true, p),
                                          product_kernel_apply(m, true, r));
    pass = pass && after <= before + 1e-12;
  }
  char detail[128];
  std::snprintf(detail, sizeof detail,
                "max ratio/bound %.6f over n = 1..3, weak DPI on 1000 triples", worst);
  report(3, "strong and weak data processing inequalities", pass, detail);
}

void criterion4() {
  std::vector<Rational> kappas{Rational(1, 4), Rational(1, 2), Rational(3, 4)};
  std::vector<MarginalDist<Rational>> qs{
      MarginalDist<Rational>::uniform(2),
      MarginalDist<Rational>{2, {Rational(9, 10), Rational(1, 10)}}};
  bool pass = true;
  for (const auto& k : kappas) {
    for (const auto& q : qs) {
      const auto prod = matrix_multiply(noise_matrix(k, q), noise_inverse(k, q));
      for (std::size_t i = 0; i < prod.size(); ++i) {
        for (std::size_t j = 0; j < prod.size(); ++j) {
          pass = pass && prod[i][j] == (i == j ? 1 : 0);
        }
      }
    }
  }
  report(4, "noise matrix times its inverse is exactly the identity", pass,
         "kappa in {1/4,1/2,3/4}, q in {uniform, (9/10,1/10)}");
}

void criterion5() {
  const auto qu = MarginalDist<Rational>::uniform(2);
  const auto rule = copy_flip_hold(Rational(1, 4));
  const auto gen = check_ips_stationary_bernoulli(rule, qu, 4);
  const auto local = check_ips_local_stationary(rule, qu);
  const bool pass = gen.exact && gen.max_deviation == 0 &&
                    local.max_deviation == Rational(1, 16);
  std::ostringstream detail;
  detail << "generator deviation " << format_rational(gen.max_deviation) << " over "
         << gen.identities_checked << " cylinders; local deviation "
         << format_rational(local.max_deviation) << " = 1/16";
  report(5, "stationary but not locally stationary, exactly", pass, detail.str());
}

void criterion6() {
  TorusModel<double> model{xor_noise(0.1), TorusSpec{{6}}};
  TorusGenerator<double> gen(model);
  const auto lambda = gen.product_state_dist(MarginalDist<double>::uniform(2));
  const SiteSet j = SiteSet::interval(0, 2);
  auto mu0 = gen.initial_state_dist(InitialMeasure<double>::uniform_symbol(0, 1));

  bool pass = true;
  double worst_fd = 0.0, worst_forms = 0.0;
  for (double t : {0.5, 1.0, 2.0}) {
    const auto mu_t = uniformization_evolve(gen, mu0, t, 1e-13).dist;
    const double exact = entropy_derivative_exact(gen, mu_t, lambda, j);

    const double h = 1e-4;
    const double d_plus = state_divergence(
        gen, uniformization_evolve(gen, mu0, t + h, 1e-13).dist, lambda, j);
    const double d_minus = state_divergence(
        gen, uniformization_evolve(gen, mu0, t - h, 1e-13).dist, lambda, j);
    const double fd = (d_plus - d_minus) / (2.0 * h);
    const double rel = std::fabs(exact - fd) / std::fabs(exact);
    worst_fd = std::max(worst_fd, rel);
    pass = pass && rel <= 1e-6;

    // asynchronous-updating form
    std::vector<double> avg(gen.states(), 0.0);
    for (const Site& k : j.sites()) {
      const auto one = gen.apply_single_site(mu_t, model.torus.site_index(k));
      for (std::size_t i = 0; i < avg.size(); ++i) avg[i] += one[i];
    }
    for (double& v : avg) v /= static_cast<double>(j.size());
    const auto m_push = gen.marginal(std::span<const double>(avg), j);
    const auto m_now = gen.marginal(std::span<const double>(mu_t), j);
    const auto m_ref = gen.marginal(std::span<const double>(lambda), j);
    const double rhs = static_cast<double>(j.size()) *
                       (relative_entropy(m_push, m_ref) - relative_entropy(m_push, m_now) -
                        relative_entropy(m_now, m_ref));
    worst_forms = std::max(worst_forms, std::fabs(exact - rhs));
    pass = pass && std::fabs(exact - rhs) <= 1e-9;
  }
  char detail[128];
  std::snprintf(detail, sizeof detail,
                "max fd relative error %.2e (tol 1e-6), max form gap %.2e (tol 1e-9)",
                worst_fd, worst_forms);
  report(6, "entropy derivative identities on a 6-site ring", pass, detail);
}

void criterion7() {
  TorusModel<double> model{xor_noise(0.1), TorusSpec{{6}}};
  TorusGenerator<double> gen(model);
  const auto lambda = gen.product_state_dist(MarginalDist<double>::uniform(2));
  const SiteSet full = SiteSet::interval(0, 5);
  auto mu0 = gen.initial_state_dist(InitialMeasure<double>::uniform_symbol(0, 1));

  const double d_start = state_divergence(
      gen, uniformization_evolve(gen, mu0, 0.01, 1e-12).dist, lambda, full);
  bool pass = true;
  double min_slack = kInf;
  for (double t : {0.5, 1.0, 2.0, 4.0}) {
    const double dt = state_divergence(
        gen, uniformization_evolve(gen, mu0, t, 1e-12).dist, lambda, full);
    const double bound = d_start * std::exp(-0.2 * (t - 0.01)) + 1e-9;
    pass = pass && dt <= bound;
    min_slack = std::min(min_slack, bound - dt);
  }
  char detail[128];
  std::snprintf(detail, sizeof detail, "D(0+) = %.4f, min slack %.3e", d_start, min_slack);
  report(7, "whole-torus exponential entropy decay", pass, detail);
}

void criterion8() {
  Neighbourhood sym(1, {{-1}, {0}, {1}});  // rho = 3
  const SiteSet a = SiteSet::interval(0, 0);
  bool pass = true;
  double worst_margin = kInf;
  for (double ell : {6.0, 12.0, 24.0}) {
    for (double t : {0.5, 1.0, 2.0}) {
      const auto est = escape_probability_estimate(sym, a, t, ell, 10000, 424242);
      const double bound = escape_probability_bound(1, 3, ell, t);
      const double margin = bound + 3.0 * est.std_err - est.p_hat;
      pass = pass && margin >= 0.0;
      worst_margin = std::min(worst_margin, margin);
    }
  }

  // Chernoff bound dominates exact Poisson tails on 50 pairs
  auto exact_tail = [](double mu, double threshold) {
    const int from = static_cast<int>(std::ceil(threshold));
    double pmf = std::exp(-mu);
    double below = 0.0;
    for (int k = 0; k < from; ++k) {
      below += pmf;
      pmf *= mu / (k + 1);
    }
    return 1.0 - below;
  };
  RandomStream rng(73);
  for (int trial = 0; trial < 50; ++trial) {
    const double mu = 0.5 + 6.0 * rng.uniform01();
    const double threshold = mu + 0.5 + 8.0 * rng.uniform01();
    pass = pass && chernoff_poisson(mu, threshold) >= exact_tail(mu, threshold);
  }
  char detail[128];
  std::snprintf(detail, sizeof detail,
                "9 grid cells at 10^4 replicas, min margin %.3e; 50 tail pairs",
                worst_margin);
  report(8, "influence concentration bound dominates simulation", pass, detail);
}

void criterion9() {
  TorusModel<double> model{xor_noise(0.1), TorusSpec{{10}}};
  const auto zeros = InitialMeasure<double>::uniform_symbol(0, 1);
  const SiteSet window = SiteSet::interval(0, 3);
  const std::vector<double> cps{1.0, 2.0, 4.0};
  const int replicas = 20000;

  auto sim = simulate_ips(model, zeros, cps, replicas, 31337, window);
  TorusGenerator<double> gen(model);
  auto mu0 = gen.initial_state_dist(zeros);

  bool pass = true;
  double worst_sigma = 0.0;
  for (std::size_t c = 0; c < cps.size(); ++c) {
    const auto exact = gen.marginal(
        std::span<const double>(uniformization_evolve(gen, mu0, cps[c], 1e-12).dist),
        window);
    sim.checkpoints[c].exact = exact;
    for (std::size_t p = 0; p < exact.weights.size(); ++p) {
      // SE from the exact probability: the empirical SE degenerates at 0 hits
      const double se = std::sqrt(exact.weights[p] * (1.0 - exact.weights[p]) /
                                  static_cast<double>(replicas));
      const double gap =
          std::fabs(sim.checkpoints[c].empirical.weights[p] - exact.weights[p]);
      pass = pass && gap <= 3.0 * se;
      if (se > 0.0) worst_sigma = std::max(worst_sigma, gap / se);
    }
  }

  // byte-identical rerun (and thread-count independence)
  auto rerun = simulate_ips(model, zeros, cps, replicas, 31337, window);
  std::ostringstream csv_a, csv_b;
  write_csv(csv_a, rerun);
  auto sim_plain = simulate_ips(model, zeros, cps, replicas, 31337, window, Exec::serial);
  write_csv(csv_b, sim_plain);
  pass = pass && csv_a.str() == csv_b.str();

  char detail[128];
  std::snprintf(detail, sizeof detail,
                "48 cylinder probabilities, worst |gap|/SE = %.2f; rerun byte-identical",
                worst_sigma);
  report(9, "Monte Carlo agrees with uniformization and replays exactly", pass, detail);
}

void criterion10(const ConvergenceTrajectory& traj) {
  const double formula = mixing_time_bound(2.0, 0.1, 1, 10, 0.01);
  bool pass = std::fabs(formula - 64.496) <= 1e-3;

  const auto constants =
      theorem_constants(xor_noise(0.1), MarginalDist<double>::uniform(2), 0.11);
  const double eps = 0.25;
  const double predicted = mixing_time_bound(constants.alpha, constants.beta, 1, 4, eps);
  const auto empirical = empirical_mixing_time(traj, eps);
  pass = pass && empirical.has_value() && *empirical <= predicted;

  char detail[160];
  std::snprintf(detail, sizeof detail,
                "formula %.6f; empirical witness t = %.0f <= envelope crossing %.1f at eps "
                "= %.2f",
                formula, empirical ? *empirical : -1.0, predicted, eps);
  report(10, "mixing-time formula and envelope crossing", pass, detail);
}

}  // namespace

int main() {
  criterion1();
  const auto traj = criterion2();
  criterion3();
  criterion4();
  criterion5();
  criterion6();
  criterion7();
  criterion8();
  criterion9();
  criterion10(traj);
  if (failures == 0) {
    std::printf("acceptance: all 10 criteria passed\n");
  } else {
    std::printf("acceptance: %d criteria FAILED\n", failures);
  }
  return failures == 0 ? 0 : 1;
}
