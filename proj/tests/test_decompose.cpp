#include <doctest.h>

#include <cmath>
#include <sstream>

#include "ergo/decompose.hpp"
#include "ergo/rng.hpp"

using namespace ergo;

namespace {

MarginalDist<double> random_marginal(RandomStream& rng, int sigma) {
  MarginalDist<double> q;
  q.alphabet = sigma;
  q.weights.resize(sigma);
  double sum = 0.0;
  for (double& w : q.weights) {
    w = 0.05 + rng.uniform01();
    sum += w;
  }
  for (double& w : q.weights) w /= sum;
  return q;
}

std::vector<double> random_simplex(RandomStream& rng, std::size_t n) {
  std::vector<double> p(n);
  double sum = 0.0;
  for (double& w : p) {
    w = -std::log(rng.uniform01());
    sum += w;
  }
  for (double& w : p) w /= sum;
  return p;
}

}  // namespace

TEST_CASE("max noise level") {
  const auto qu = MarginalDist<Rational>::uniform(2);
  CHECK(max_noise_level(xor_noise(Rational(1, 10)), qu) == Rational(1, 5));
  CHECK(max_noise_level(xor_noise(Rational(1, 2)), qu) == 1);
  CHECK(max_noise_level(copy_flip_hold(Rational(1, 4)), qu) == 0);

  MarginalDist<Rational> zero{2, {Rational(1), Rational(0)}};
  CHECK_THROWS_AS(max_noise_level(xor_noise(Rational(1, 10)), zero), InvalidArgument);
}

TEST_CASE("noise decomposition of the noisy XOR rule") {
  const auto qu = MarginalDist<Rational>::uniform(2);
  const auto phi = xor_noise(Rational(1, 10));
  const auto nd = decompose(phi, qu, Rational(1, 5));

  // psi is the deterministic XOR rule
  std::vector<int> w00{0, 0}, w01{0, 1}, w10{1, 0}, w11{1, 1};
  CHECK(nd.psi.entry(pattern_index(w00, 2), 0) == 1);
  CHECK(nd.psi.entry(pattern_index(w01, 2), 1) == 1);
  CHECK(nd.psi.entry(pattern_index(w10, 2), 1) == 1);
  CHECK(nd.psi.entry(pattern_index(w11, 2), 0) == 1);

  // decomposition identity, exactly
  for (std::size_t r = 0; r < phi.rows(); ++r) {
    for (int b = 0; b < 2; ++b) {
      CHECK(nd.kappa * qu.weights[b] + (1 - nd.kappa) * nd.psi.entry(r, b) ==
            phi.entry(r, b));
    }
  }

  // kappa at the max leaves a zero in psi; smaller kappa keeps psi positive
  const auto smaller = decompose(phi, qu, Rational(1, 10));
  CHECK(smaller.psi.strictly_positive());
  CHECK_FALSE(nd.psi.strictly_positive());

  CHECK_THROWS_AS(decompose(phi, qu, Rational(3, 10)), InvalidArgument);
  CHECK_THROWS_AS(decompose(xor_noise(Rational(1, 2)), qu, Rational(1)), InvalidArgument);
}

TEST_CASE("noise matrix fixes q") {
  const auto qu = MarginalDist<Rational>::uniform(2);
  const auto id = noise_matrix(Rational(0), qu);
  CHECK(id[0][0] == 1);
  CHECK(id[0][1] == 0);

  const auto full = noise_matrix(Rational(1), qu);
  CHECK(full[0][0] == Rational(1, 2));
  CHECK(full[1][0] == Rational(1, 2));

  const auto half = noise_matrix(Rational(1, 2), qu);
  CHECK(half[0][0] == Rational(3, 4));
  CHECK(half[0][1] == Rational(1, 4));
  CHECK(half[1][0] == Rational(1, 4));
  CHECK(half[1][1] == Rational(3, 4));

  // q theta = q for a grid of kappa and q
  for (int num = 0; num <= 4; ++num) {
    MarginalDist<Rational> q{2, {Rational(9, 10), Rational(1, 10)}};
    const auto theta = noise_matrix(rational_of(num, 4), q);
    for (int b = 0; b < 2; ++b) {
      Rational acc = q.weights[0] * theta[0][b] + q.weights[1] * theta[1][b];
      CHECK(acc == q.weights[b]);
    }
  }
}

TEST_CASE("noise inverse") {
  const auto qu = MarginalDist<Rational>::uniform(2);
  const auto id = noise_inverse(Rational(0), qu);
  CHECK(id[0][0] == 1);
  CHECK(id[1][0] == 0);

  const auto inv = noise_inverse(Rational(1, 2), qu);
  CHECK(inv[0][0] == Rational(3, 2));
  CHECK(inv[0][1] == Rational(-1, 2));
  CHECK(inv[1][0] == Rational(-1, 2));
  CHECK(inv[1][1] == Rational(3, 2));

  // theta * theta^{-1} = I exactly over the acceptance grid
  std::vector<Rational> kappas{Rational(1, 4), Rational(1, 2), Rational(3, 4)};
  std::vector<MarginalDist<Rational>> qs{
      MarginalDist<Rational>::uniform(2),
      MarginalDist<Rational>{2, {Rational(9, 10), Rational(1, 10)}}};
  for (const auto& k : kappas) {
    for (const auto& q : qs) {
      const auto prod = matrix_multiply(noise_matrix(k, q), noise_inverse(k, q));
      for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j) CHECK(prod[i][j] == (i == j ? 1 : 0));
      }
    }
  }

  CHECK_THROWS_AS(noise_inverse(Rational(1), qu), InvalidArgument);
}

TEST_CASE("product kernel apply") {
  const auto qu = MarginalDist<double>::uniform(2);
  const SiteSet w3 = SiteSet::interval(0, 2);
  RandomStream rng(23);
  PatternDist<double> p{w3, 2, random_simplex(rng, 8)};

  // identity noise leaves p unchanged
  const auto id = noise_matrix(0.0, qu);
  const auto same = product_kernel_apply(id, true, p);
  for (std::size_t i = 0; i < 8; ++i) CHECK(same.weights[i] == doctest::Approx(p.weights[i]));

  // n = 1: synchronous and asynchronous coincide
  PatternDist<double> p1{SiteSet::interval(0, 0), 2, {0.3, 0.7}};
  const auto theta = noise_matrix(0.4, qu);
  const auto s1 = product_kernel_apply(theta, true, p1);
  const auto a1 = product_kernel_apply(theta, false, p1);
  CHECK(s1.weights[0] == doctest::Approx(a1.weights[0]));

  // full replacement sends anything to the product of q
  const auto full = noise_matrix(1.0, qu);
  const auto out = product_kernel_apply(full, true, p);
  for (double v : out.weights) CHECK(v == doctest::Approx(0.125));
}

TEST_CASE("noise kernel is injective at finite volume") {
  RandomStream rng(29);
  const SiteSet w3 = SiteSet::interval(0, 2);
  for (int trial = 0; trial < 20; ++trial) {
    auto q = random_marginal(rng, 2);
    const double kappa = 0.1 + 0.8 * rng.uniform01();
    PatternDist<double> p{w3, 2, random_simplex(rng, 8)};
    const auto pushed = product_kernel_apply(noise_matrix(kappa, q), true, p);
    const auto back = product_kernel_apply(noise_inverse(kappa, q), true, pushed);
    for (std::size_t i = 0; i < 8; ++i) {
      CHECK(back.weights[i] == doctest::Approx(p.weights[i]).epsilon(1e-9));
    }
  }
}

TEST_CASE("weak data processing inequality") {
  RandomStream rng(31);
  const SiteSet w1 = SiteSet::interval(0, 0);
  for (int trial = 0; trial < 1000; ++trial) {
    const int sigma = 2 + static_cast<int>(rng.below(2));
    PatternDist<double> p{w1, sigma, random_simplex(rng, static_cast<std::size_t>(sigma))};
    PatternDist<double> r{w1, sigma, random_simplex(rng, static_cast<std::size_t>(sigma))};
    SquareMatrix<double> theta(sigma);
    for (auto& row : theta) row = random_simplex(rng, static_cast<std::size_t>(sigma));
    const double before = relative_entropy(p, r);
    const double after = relative_entropy(product_kernel_apply(theta, true, p),
                                          product_kernel_apply(theta, true, r));
    CHECK(after <= before + 1e-12);
  }
}

TEST_CASE("sdpi_verify") {
  const auto qu = MarginalDist<double>::uniform(2);
  const auto theta = noise_matrix(0.2, qu);

  SUBCASE("single point mass ratio matches the worked value") {
    auto report = sdpi_verify(theta, qu, 1, true, 0, 1, Exec::serial);
    CHECK(report.kappa == doctest::Approx(0.2));
    CHECK(report.bound == doctest::Approx(0.8));
    REQUIRE(report.trials.size() == 2);
    CHECK(report.trials[0].d_before == doctest::Approx(std::log(2.0)));
    CHECK(report.trials[0].d_after == doctest::Approx(0.36806420716849715));
    CHECK(report.trials[0].ratio == doctest::Approx(0.531));
    CHECK(report.pass);
  }

  SUBCASE("synchronous point masses for n = 3 stay under 1 - kappa") {
    auto report = sdpi_verify(theta, qu, 3, true, 0, 1, Exec::serial);
    CHECK(report.trials.size() == 8);
    CHECK(report.max_ratio <= 0.8 + 1e-9);
    CHECK(report.pass);
  }

  SUBCASE("asynchronous with kappa = 1 contracts by 1 - 1/n") {
    const auto pure = noise_matrix(1.0, qu);
    auto report = sdpi_verify(pure, qu, 2, false, 500, 7, Exec::serial);
    CHECK(report.kappa == doctest::Approx(1.0));
    CHECK(report.bound == doctest::Approx(0.5));
    CHECK(report.pass);
  }

  SUBCASE("non-stationary q is rejected") {
    MarginalDist<double> skew{2, {0.7, 0.3}};
    CHECK_THROWS_AS(sdpi_verify(theta, skew, 2, true, 10, 1), InvalidArgument);
  }

  SUBCASE("report is seed-deterministic") {
    auto a = sdpi_verify(theta, qu, 2, true, 100, 99, Exec::serial);
    auto b = sdpi_verify(theta, qu, 2, true, 100, 99, Exec::serial);
    REQUIRE(a.trials.size() == b.trials.size());
    CHECK(a.max_ratio == b.max_ratio);
    for (std::size_t i = 0; i < a.trials.size(); ++i) {
      CHECK(a.trials[i].d_before == b.trials[i].d_before);
      CHECK(a.trials[i].ratio == b.trials[i].ratio);
    }
    std::ostringstream csv;
    write_csv(csv, a);
    CHECK(csv.str().find("# summary") != std::string::npos);
  }
}
