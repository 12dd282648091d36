#include "ergo/rules.hpp"

#include <algorithm>

namespace ergo {

std::size_t pow_size(int alphabet, std::size_t exponent) {
  std::size_t n = 1;
  for (std::size_t i = 0; i < exponent; ++i) {
    if (n > (static_cast<std::size_t>(-1) / static_cast<std::size_t>(alphabet)))
      throw CapExceeded("pattern space overflows size_t", exponent, 64);
    n *= static_cast<std::size_t>(alphabet);
  }
  return n;
}

std::size_t pattern_index(std::span<const int> word, int alphabet) {
  std::size_t idx = 0;
  for (int s : word) {
    if (s < 0 || s >= alphabet) throw InvalidArgument("symbol out of range");
    idx = idx * static_cast<std::size_t>(alphabet) + static_cast<std::size_t>(s);
  }
  return idx;
}

std::vector<int> pattern_of(std::size_t index, int alphabet, std::size_t length) {
  std::vector<int> word(length);
  for (std::size_t i = length; i-- > 0;) {
    word[i] = static_cast<int>(index % static_cast<std::size_t>(alphabet));
    index /= static_cast<std::size_t>(alphabet);
  }
  return word;
}

namespace {

template <class T>
T from_int(int v) {
  if constexpr (is_rational_v<T>) {
    return Rational(v);
  } else {
    return static_cast<double>(v);
  }
}

}  // namespace

template <class T>
LocalRule<T> xor_noise(const T& eps) {
  if (!(eps > T{} && eps < from_int<T>(1)))
    throw InvalidArgument("xor_noise needs eps in (0,1)");
  Neighbourhood nb(1, {{0}, {1}});
  std::vector<std::vector<T>> table(4, std::vector<T>(2));
  for (int w0 = 0; w0 < 2; ++w0) {
    for (int w1 = 0; w1 < 2; ++w1) {
      const int out = w0 ^ w1;
      auto& row = table[static_cast<std::size_t>(w0 * 2 + w1)];
      row[static_cast<std::size_t>(out)] = from_int<T>(1) - eps;
      row[static_cast<std::size_t>(1 - out)] = eps;
    }
  }
  return LocalRule<T>(2, std::move(nb), std::move(table));
}

template <class T>
LocalRule<T> copy_flip_hold(const T& eps) {
  if (!(eps > T{} && 2 * eps <= from_int<T>(1)))
    throw InvalidArgument("copy_flip_hold needs eps in (0, 1/2]");
  Neighbourhood nb(1, {{-1}, {0}, {1}});
  std::vector<std::vector<T>> table(8, std::vector<T>(2, T{}));
  for (int wl = 0; wl < 2; ++wl) {
    for (int w0 = 0; w0 < 2; ++w0) {
      for (int wr = 0; wr < 2; ++wr) {
        auto& row = table[static_cast<std::size_t>(wl * 4 + w0 * 2 + wr)];
        row[static_cast<std::size_t>(wr)] += eps;          // copy right neighbour
        row[static_cast<std::size_t>(1 - wl)] += eps;      // copy flipped left neighbour
        row[static_cast<std::size_t>(w0)] += from_int<T>(1) - 2 * eps;  // hold
      }
    }
  }
  return LocalRule<T>(2, std::move(nb), std::move(table));
}

template <class T>
LocalRule<T> vasilyev_rule(const Neighbourhood& neighbourhood,
                           const std::vector<std::vector<std::vector<T>>>& contexts,
                           const MarginalDist<T>& q) {
  q.validate();
  const int sigma = q.alphabet;
  if (neighbourhood.size() < 1) throw InvalidArgument("neighbourhood must be nonempty");
  const std::size_t context_count = pow_size(sigma, neighbourhood.size() - 1);
  if (contexts.size() != context_count)
    throw InvalidArgument("need one context matrix per word over N minus its last offset");

  std::vector<std::vector<T>> table(pow_size(sigma, neighbourhood.size()),
                                    std::vector<T>(static_cast<std::size_t>(sigma)));
  for (std::size_t u = 0; u < context_count; ++u) {
    const auto& m = contexts[u];
    if (m.size() != static_cast<std::size_t>(sigma))
      throw InvalidArgument("context matrix must be sigma x sigma");
    for (int a = 0; a < sigma; ++a) {
      if (m[static_cast<std::size_t>(a)].size() != static_cast<std::size_t>(sigma))
        throw InvalidArgument("context matrix must be sigma x sigma");
      T sum{};
      for (const T& v : m[static_cast<std::size_t>(a)]) {
        if (v < T{}) throw InvalidArgument("context matrix has a negative entry");
        sum += v;
      }
      if (!sums_to_one(sum)) throw InvalidArgument("context matrix row must sum to 1");
    }
    // q must be stationary for this context: (q m)(b) == q(b) for all b.
    for (int b = 0; b < sigma; ++b) {
      T acc{};
      for (int a = 0; a < sigma; ++a) {
        acc += q.weights[static_cast<std::size_t>(a)] *
               m[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)];
      }
      const T diff = acc - q.weights[static_cast<std::size_t>(b)];
      bool bad;
      if constexpr (is_rational_v<T>) {
        bad = (diff != 0);
      } else {
        bad = std::fabs(diff) > kFloatSumTolerance;
      }
      if (bad) {
        std::vector<int> word = pattern_of(u, sigma, neighbourhood.size() - 1);
        std::string name;
        for (int s : word) name += std::to_string(s);
        throw InvalidArgument("context " + name + " does not have q as a stationary distribution");
      }
    }
    for (int a = 0; a < sigma; ++a) {
      table[u * static_cast<std::size_t>(sigma) + static_cast<std::size_t>(a)] =
          m[static_cast<std::size_t>(a)];
    }
  }
  return LocalRule<T>(sigma, neighbourhood, std::move(table));
}

template <class T>
LocalRule<T> surjective_ca_noise(int alphabet, const Neighbourhood& neighbourhood,
                                 const std::vector<int>& f,
                                 const std::vector<std::vector<T>>& theta) {
  const std::size_t rows = pow_size(alphabet, neighbourhood.size());
  if (f.size() != rows) throw InvalidArgument("CA map must be total on Sigma^N");
  if (theta.size() != static_cast<std::size_t>(alphabet))
    throw InvalidArgument("noise matrix must be sigma x sigma");
  for (const auto& row : theta) {
    if (row.size() != static_cast<std::size_t>(alphabet))
      throw InvalidArgument("noise matrix must be sigma x sigma");
    T sum{};
    for (const T& v : row) {
      if (v < T{}) throw InvalidArgument("noise matrix has a negative entry");
      sum += v;
    }
    if (!sums_to_one(sum)) throw InvalidArgument("noise matrix row must sum to 1");
  }
  std::vector<std::vector<T>> table(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    const int image = f[r];
    if (image < 0 || image >= alphabet) throw InvalidArgument("CA map symbol out of range");
    table[r] = theta[static_cast<std::size_t>(image)];
  }
  return LocalRule<T>(alphabet, neighbourhood, std::move(table));
}

LocalRule<double> to_float(const LocalRule<Rational>& rule) {
  std::vector<std::vector<double>> table(rule.rows(), std::vector<double>(rule.alphabet()));
  for (std::size_t r = 0; r < rule.rows(); ++r) {
    for (int b = 0; b < rule.alphabet(); ++b) {
      table[r][static_cast<std::size_t>(b)] = to_double(rule.entry(r, b));
    }
  }
  return LocalRule<double>(rule.alphabet(), rule.neighbourhood(), std::move(table));
}

MarginalDist<double> to_float(const MarginalDist<Rational>& q) {
  MarginalDist<double> out;
  out.alphabet = q.alphabet;
  out.weights.reserve(q.weights.size());
  for (const Rational& w : q.weights) out.weights.push_back(to_double(w));
  return out;
}

template LocalRule<double> xor_noise(const double&);
template LocalRule<Rational> xor_noise(const Rational&);
template LocalRule<double> copy_flip_hold(const double&);
template LocalRule<Rational> copy_flip_hold(const Rational&);
template LocalRule<double> vasilyev_rule(const Neighbourhood&,
                                         const std::vector<std::vector<std::vector<double>>>&,
                                         const MarginalDist<double>&);
template LocalRule<Rational> vasilyev_rule(const Neighbourhood&,
                                           const std::vector<std::vector<std::vector<Rational>>>&,
                                           const MarginalDist<Rational>&);
template LocalRule<double> surjective_ca_noise(int, const Neighbourhood&,
                                               const std::vector<int>&,
                                               const std::vector<std::vector<double>>&);
template LocalRule<Rational> surjective_ca_noise(int, const Neighbourhood&,
                                                 const std::vector<int>&,
                                                 const std::vector<std::vector<Rational>>&);

}  // namespace ergo
