#include <doctest.h>

#include <cmath>
#include <sstream>

#include "ergo/measures.hpp"
#include "ergo/rng.hpp"

using namespace ergo;

namespace {

PatternDist<double> random_dist(RandomStream& rng, const SiteSet& window, int sigma) {
  PatternDist<double> p;
  p.window = window;
  p.alphabet = sigma;
  p.weights.resize(pow_size(sigma, window.size()));
  double sum = 0.0;
  for (double& w : p.weights) {
    w = -std::log(rng.uniform01());
    sum += w;
  }
  for (double& w : p.weights) w /= sum;
  return p;
}

PatternDist<double> two_site(double w00, double w01, double w10, double w11) {
  PatternDist<double> p;
  p.window = SiteSet::interval(0, 1);
  p.alphabet = 2;
  p.weights = {w00, w01, w10, w11};
  return p;
}

}  // namespace

TEST_CASE("bernoulli marginal") {
  const auto q = MarginalDist<double>::uniform(2);
  const auto p = bernoulli_marginal(q, SiteSet::interval(0, 2));
  REQUIRE(p.weights.size() == 8);
  for (double w : p.weights) CHECK(w == doctest::Approx(0.125));

  MarginalDist<double> biased{2, {0.9, 0.1}};
  const auto single = bernoulli_marginal(biased, SiteSet::interval(0, 0));
  CHECK(single.weights[0] == doctest::Approx(0.9));
  CHECK(single.weights[1] == doctest::Approx(0.1));

  const auto pair = bernoulli_marginal(biased, SiteSet::interval(0, 1));
  std::vector<int> w11{1, 1};
  CHECK(pair.weights[pattern_index(w11, 2)] == doctest::Approx(0.01));

  const auto exact = bernoulli_marginal(MarginalDist<Rational>::uniform(2),
                                        SiteSet::interval(0, 2));
  for (const Rational& w : exact.weights) CHECK(w == Rational(1, 8));
}

TEST_CASE("marginalize") {
  RandomStream rng(7);
  const auto p = random_dist(rng, SiteSet::interval(0, 2), 2);
  const auto same = marginalize(p, p.window);
  for (std::size_t i = 0; i < p.weights.size(); ++i) {
    CHECK(same.weights[i] == doctest::Approx(p.weights[i]));
  }

  const auto u2 = bernoulli_marginal(MarginalDist<double>::uniform(2),
                                     SiteSet::interval(0, 1));
  const auto u1 = marginalize(u2, SiteSet::interval(0, 0));
  CHECK(u1.weights[0] == doctest::Approx(0.5));

  std::vector<int> pat{0, 1};
  const auto point = PatternDist<double>::point_mass(SiteSet::interval(0, 1), 2, pat);
  const auto second = marginalize(point, SiteSet::interval(1, 1));
  CHECK(second.weights[0] == 0.0);
  CHECK(second.weights[1] == 1.0);

  CHECK_THROWS_AS(marginalize(point, SiteSet::interval(1, 2)), InvalidArgument);
}

TEST_CASE("relative entropy values") {
  const SiteSet j = SiteSet::interval(0, 0);
  PatternDist<double> p{j, 2, {1.0, 0.0}};
  PatternDist<double> u{j, 2, {0.5, 0.5}};
  CHECK(relative_entropy(p, p) == 0.0);
  CHECK(relative_entropy(p, u) == doctest::Approx(std::log(2.0)));

  PatternDist<double> biased{j, 2, {0.9, 0.1}};
  CHECK(relative_entropy(biased, u) ==
        doctest::Approx(0.9 * std::log(1.8) + 0.1 * std::log(0.2)));
  CHECK(relative_entropy(biased, u) == doctest::Approx(0.36806420716849715));

  // charging a null set of the reference gives +inf
  PatternDist<double> null_ref{j, 2, {1.0, 0.0}};
  PatternDist<double> charge{j, 2, {0.5, 0.5}};
  CHECK(relative_entropy(charge, null_ref) == kInf);

  PatternDist<double> other{SiteSet::interval(1, 1), 2, {0.5, 0.5}};
  CHECK_THROWS_AS(relative_entropy(p, other), InvalidArgument);
}

TEST_CASE("chain rule for conditional relative entropy") {
  RandomStream rng(11);
  const SiteSet window = SiteSet::interval(0, 2);
  const SiteSet given = SiteSet::interval(0, 0);
  for (int trial = 0; trial < 50; ++trial) {
    const auto p = random_dist(rng, window, 2);
    const auto r = random_dist(rng, window, 2);
    const double joint = relative_entropy(p, r);
    const double margin = relative_entropy(marginalize(p, given), marginalize(r, given));
    const double cond = conditional_relative_entropy(p, r, given);
    CHECK(joint == doctest::Approx(margin + cond).epsilon(1e-12));
    CHECK(cond >= -1e-12);
  }

  // product joints: conditional equals the marginal divergence on the A part
  MarginalDist<double> pa{2, {0.7, 0.3}};
  MarginalDist<double> ra{2, {0.4, 0.6}};
  MarginalDist<double> common{2, {0.2, 0.8}};
  const SiteSet a = SiteSet::interval(1, 1);
  const SiteSet b = SiteSet::interval(0, 0);
  PatternDist<double> p = bernoulli_marginal(common, b);
  PatternDist<double> pj{SiteSet::interval(0, 1), 2, {}};
  PatternDist<double> rj{SiteSet::interval(0, 1), 2, {}};
  pj.weights = {0.2 * 0.7, 0.2 * 0.3, 0.8 * 0.7, 0.8 * 0.3};
  rj.weights = {0.2 * 0.4, 0.2 * 0.6, 0.8 * 0.4, 0.8 * 0.6};
  const double expect = relative_entropy(bernoulli_marginal(pa, a), bernoulli_marginal(ra, a));
  CHECK(conditional_relative_entropy(pj, rj, b) == doctest::Approx(expect));
}

TEST_CASE("conditioning on common information only increases divergence") {
  RandomStream rng(13);
  for (int trial = 0; trial < 50; ++trial) {
    // joints (A,C) and (A',C) with a shared C marginal
    const SiteSet window = SiteSet::interval(0, 1);
    const SiteSet c = SiteSet::interval(0, 0);
    const SiteSet a = SiteSet::interval(1, 1);
    double pc = 0.2 + 0.6 * rng.uniform01();
    auto conditional = [&](double w0) {
      return std::vector<double>{w0, 1.0 - w0};
    };
    auto p_a0 = conditional(rng.uniform01());
    auto p_a1 = conditional(rng.uniform01());
    auto r_a0 = conditional(rng.uniform01());
    auto r_a1 = conditional(rng.uniform01());
    PatternDist<double> p{window, 2,
                          {pc * p_a0[0], pc * p_a0[1], (1 - pc) * p_a1[0], (1 - pc) * p_a1[1]}};
    PatternDist<double> r{window, 2,
                          {pc * r_a0[0], pc * r_a0[1], (1 - pc) * r_a1[0], (1 - pc) * r_a1[1]}};
    const double plain = relative_entropy(marginalize(p, a), marginalize(r, a));
    const double conditioned = conditional_relative_entropy(p, r, c);
    CHECK(plain <= conditioned + 1e-12);
  }
}

TEST_CASE("mutual information") {
  const SiteSet part = SiteSet::interval(0, 0);
  const auto prod = two_site(0.35, 0.35, 0.15, 0.15);
  CHECK(mutual_information(prod, part) == doctest::Approx(0.0).epsilon(1e-12));

  const auto corr = two_site(0.5, 0.0, 0.0, 0.5);
  CHECK(mutual_information(corr, part) == doctest::Approx(std::log(2.0)));

  // D((A|C) || A') = D(A || A') + I(A:C) for random joints and references
  RandomStream rng(17);
  for (int trial = 0; trial < 50; ++trial) {
    const auto p = random_dist(rng, SiteSet::interval(0, 1), 2);
    const SiteSet a = SiteSet::interval(1, 1);
    auto ref = random_dist(rng, a, 2);
    const double lhs = conditional_relative_entropy_vs_marginal(p, a, ref);
    const double rhs = relative_entropy(marginalize(p, a), ref) + mutual_information(p, a);
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
  }
}

TEST_CASE("total variation and Pinsker") {
  const SiteSet j = SiteSet::interval(0, 0);
  PatternDist<double> a{j, 2, {1.0, 0.0}};
  PatternDist<double> b{j, 2, {0.0, 1.0}};
  PatternDist<double> u{j, 2, {0.5, 0.5}};
  PatternDist<double> biased{j, 2, {0.9, 0.1}};
  CHECK(total_variation(a, a) == 0.0);
  CHECK(total_variation(a, b) == 1.0);
  CHECK(total_variation(biased, u) == doctest::Approx(0.4));

  CHECK(pinsker_bound(0.0) == 0.0);
  CHECK(pinsker_bound(2.0) == doctest::Approx(1.0));
  CHECK(total_variation(biased, u) <= pinsker_bound(relative_entropy(biased, u)));

  RandomStream rng(19);
  for (int trial = 0; trial < 100; ++trial) {
    const auto p = random_dist(rng, SiteSet::interval(0, 1), 2);
    const auto r = random_dist(rng, SiteSet::interval(0, 1), 2);
    CHECK(relative_entropy(p, r) >= -1e-15);
    CHECK(total_variation(p, r) <= pinsker_bound(relative_entropy(p, r)) + 1e-12);
  }
}

TEST_CASE("entropy upper bound") {
  const auto u = MarginalDist<double>::uniform(2);
  CHECK(entropy_upper_bound(3, u) == doctest::Approx(3.0 * std::log(2.0)));
  CHECK(entropy_upper_bound(0, u) == 0.0);
  MarginalDist<double> biased{2, {0.9, 0.1}};
  CHECK(entropy_upper_bound(1, biased) == doctest::Approx(std::log(10.0)));

  MarginalDist<double> degenerate{2, {1.0, 0.0}};
  CHECK_THROWS_AS(entropy_upper_bound(1, degenerate), InvalidArgument);

  // the bound is attained by the worst point mass
  const SiteSet window = SiteSet::interval(0, 2);
  const auto lambda = bernoulli_marginal(biased, window);
  double max_d = 0.0;
  for (std::size_t i = 0; i < lambda.weights.size(); ++i) {
    PatternDist<double> point{window, 2, std::vector<double>(8, 0.0)};
    point.weights[i] = 1.0;
    max_d = std::max(max_d, relative_entropy(point, lambda));
  }
  CHECK(max_d == doctest::Approx(entropy_upper_bound(3, biased)));
}

TEST_CASE("pattern distribution CSV") {
  const auto q = MarginalDist<Rational>::uniform(2);
  const auto p = bernoulli_marginal(q, SiteSet::interval(0, 1));
  std::ostringstream out;
  write_csv(out, p);
  CHECK(out.str() == "pattern,weight\n00,1/4\n01,1/4\n10,1/4\n11,1/4\n");
}
