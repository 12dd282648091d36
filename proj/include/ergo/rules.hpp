#ifndef ERGO_RULES_HPP
#define ERGO_RULES_HPP

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "ergo/errors.hpp"
#include "ergo/lattice.hpp"
#include "ergo/rational.hpp"

namespace ergo {

// Base-sigma value of a symbol word, first symbol most significant.  Row
// indices of rule tables and weight indices of pattern distributions both use
// this encoding.
std::size_t pattern_index(std::span<const int> word, int alphabet);
std::vector<int> pattern_of(std::size_t index, int alphabet, std::size_t length);
std::size_t pow_size(int alphabet, std::size_t exponent);

// Single-site marginal q over the alphabet {0, ..., sigma-1}.
template <class T>
struct MarginalDist {
  int alphabet = 0;
  std::vector<T> weights;

  static MarginalDist uniform(int sigma) {
    MarginalDist q;
    q.alphabet = sigma;
    if constexpr (is_rational_v<T>) {
      q.weights.assign(static_cast<std::size_t>(sigma), Rational(1, sigma));
    } else {
      q.weights.assign(static_cast<std::size_t>(sigma), 1.0 / sigma);
    }
    return q;
  }

  void validate() const {
    if (alphabet < 2) throw InvalidArgument("alphabet size must be >= 2");
    if (weights.size() != static_cast<std::size_t>(alphabet))
      throw InvalidArgument("marginal weight count mismatch");
    T sum{};
    for (const T& w : weights) {
      if (w < T{}) throw InvalidArgument("negative marginal weight");
      sum += w;
    }
    if (!sums_to_one(sum)) throw InvalidArgument("marginal weights must sum to 1");
  }

  T min_weight() const {  // q_min
    T m = weights.at(0);
    for (const T& w : weights) {
      if (w < m) m = w;
    }
    return m;
  }

  bool strictly_positive() const { return min_weight() > T{}; }
};

// Local transition rule phi: Sigma^N x Sigma -> [0,1].  The table row for a
// neighbourhood word w is row pattern_index(w); the neighbourhood order is
// part of the rule's identity and is serialized with it.
template <class T>
class LocalRule {
 public:
  LocalRule(int alphabet, Neighbourhood neighbourhood,
            std::vector<std::vector<T>> table)
      : alphabet_(alphabet),
        neighbourhood_(std::move(neighbourhood)),
        table_(std::move(table)) {
    if (alphabet_ < 2) throw InvalidArgument("alphabet size must be >= 2");
    const std::size_t rows = pow_size(alphabet_, neighbourhood_.size());
    if (table_.size() != rows)
      throw InvalidArgument("rule table must have sigma^|N| rows");
    for (const auto& row : table_) {
      if (row.size() != static_cast<std::size_t>(alphabet_))
        throw InvalidArgument("rule table row must have sigma entries");
    }
  }

  int alphabet() const { return alphabet_; }
  int dimension() const { return neighbourhood_.dimension(); }
  const Neighbourhood& neighbourhood() const { return neighbourhood_; }
  std::size_t rows() const { return table_.size(); }
  const std::vector<std::vector<T>>& table() const { return table_; }
  const std::vector<T>& row(std::size_t r) const { return table_.at(r); }
  const T& entry(std::size_t r, int b) const { return table_[r][static_cast<std::size_t>(b)]; }

  bool strictly_positive() const {
    for (const auto& row : table_) {
      for (const T& v : row) {
        if (!(v > T{})) return false;
      }
    }
    return true;
  }

 private:
  int alphabet_;
  Neighbourhood neighbourhood_;
  std::vector<std::vector<T>> table_;
};

struct RuleIssue {
  std::size_t row;
  std::string what;
};

struct RuleValidationReport {
  std::vector<RuleIssue> issues;
  bool strictly_positive = false;
  bool ok() const { return issues.empty(); }
};

template <class T>
RuleValidationReport validate_rule(const LocalRule<T>& rule) {
  RuleValidationReport report;
  report.strictly_positive = rule.strictly_positive();
  for (std::size_t r = 0; r < rule.rows(); ++r) {
    T sum{};
    bool negative = false;
    for (const T& v : rule.row(r)) {
      if (v < T{}) negative = true;
      sum += v;
    }
    if (negative) report.issues.push_back({r, "negative entry"});
    if (!sums_to_one(sum)) report.issues.push_back({r, "row does not sum to 1"});
  }
  return report;
}

// --- Example rule constructors ------------------------------------------

// 1D binary rule on N = (0, 1): output is the XOR of the two neighbours,
// flipped with probability eps.  Uniform Bernoulli is stationary for it.
template <class T>
LocalRule<T> xor_noise(const T& eps);

// 1D binary rule on N = (-1, 0, 1): with probability eps copy the right
// neighbour, with probability eps copy the flipped left neighbour, otherwise
// hold.  Its Bernoulli-1/2 measure is stationary for the IPS but not locally
// stationary, and the rule is not strictly positive.
template <class T>
LocalRule<T> copy_flip_hold(const T& eps);

// Vasilyev construction: every context matrix phi_u(a,b) := phi(ua,b) must
// have q as a stationary distribution.  contexts[u] is indexed by the word u
// over N minus its last offset.  Rejects (naming the offending context) when
// q phi_u != q.
template <class T>
LocalRule<T> vasilyev_rule(const Neighbourhood& neighbourhood,
                           const std::vector<std::vector<std::vector<T>>>& contexts,
                           const MarginalDist<T>& q);

// Perturbation of a deterministic CA with zero-range noise:
// phi(w, b) = theta(f(w), b).  `f` maps row index -> symbol.
template <class T>
LocalRule<T> surjective_ca_noise(int alphabet, const Neighbourhood& neighbourhood,
                                 const std::vector<int>& f,
                                 const std::vector<std::vector<T>>& theta);

// Converts a rational-mode object to its float-mode counterpart.
LocalRule<double> to_float(const LocalRule<Rational>& rule);
MarginalDist<double> to_float(const MarginalDist<Rational>& q);

}  // namespace ergo

#endif
