#include "ergo/measures.hpp"

#include <ostream>

namespace ergo {

template <class T>
PatternDist<T> bernoulli_marginal(const MarginalDist<T>& q, const SiteSet& J) {
  PatternDist<T> p;
  p.window = J;
  p.alphabet = q.alphabet;
  const std::size_t n = pow_size(q.alphabet, J.size());
  p.weights.resize(n);
  for (std::size_t idx = 0; idx < n; ++idx) {
    T w;
    if constexpr (is_rational_v<T>) {
      w = Rational(1);
    } else {
      w = 1.0;
    }
    std::size_t rest = idx;
    for (std::size_t pos = J.size(); pos-- > 0;) {
      const int sym = static_cast<int>(rest % static_cast<std::size_t>(q.alphabet));
      rest /= static_cast<std::size_t>(q.alphabet);
      w *= q.weights[static_cast<std::size_t>(sym)];
    }
    p.weights[idx] = w;
  }
  return p;
}

namespace {

// Strides for extracting the digits of `sub` positions out of a full-window
// pattern index: digit at window position i has place value sigma^{m-1-i}.
std::vector<std::size_t> positions_in(const SiteSet& window, const SiteSet& sub) {
  if (!sub.is_subset_of(window)) throw InvalidArgument("window is not a subset");
  std::vector<std::size_t> pos;
  pos.reserve(sub.size());
  for (const Site& s : sub.sites()) pos.push_back(window.index_of(s));
  return pos;
}

}  // namespace

template <class T>
PatternDist<T> marginalize(const PatternDist<T>& p, const SiteSet& sub) {
  const std::vector<std::size_t> pos = positions_in(p.window, sub);
  PatternDist<T> out;
  out.window = sub;
  out.alphabet = p.alphabet;
  out.weights.assign(pow_size(p.alphabet, sub.size()), T{});
  const std::size_t m = p.window.size();
  std::vector<int> digits(m);
  for (std::size_t idx = 0; idx < p.weights.size(); ++idx) {
    std::size_t rest = idx;
    for (std::size_t i = m; i-- > 0;) {
      digits[i] = static_cast<int>(rest % static_cast<std::size_t>(p.alphabet));
      rest /= static_cast<std::size_t>(p.alphabet);
    }
    std::size_t sub_idx = 0;
    for (std::size_t j : pos) {
      sub_idx = sub_idx * static_cast<std::size_t>(p.alphabet) +
                static_cast<std::size_t>(digits[j]);
    }
    out.weights[sub_idx] += p.weights[idx];
  }
  return out;
}

template <class T>
PatternDist<double> dist_to_float(const PatternDist<T>& p) {
  PatternDist<double> out;
  out.window = p.window;
  out.alphabet = p.alphabet;
  out.weights.reserve(p.weights.size());
  for (const T& w : p.weights) out.weights.push_back(to_double(w));
  return out;
}

double relative_entropy(const PatternDist<double>& p, const PatternDist<double>& r) {
  if (!(p.window == r.window) || p.alphabet != r.alphabet)
    throw InvalidArgument("relative entropy needs matching windows");
  double d = 0.0;
  for (std::size_t i = 0; i < p.weights.size(); ++i) {
    const double pi = p.weights[i];
    if (pi == 0.0) continue;
    if (r.weights[i] == 0.0) return kInf;
    d += pi * std::log(pi / r.weights[i]);
  }
  return d;
}

double conditional_relative_entropy(const PatternDist<double>& p,
                                    const PatternDist<double>& r,
                                    const SiteSet& given) {
  if (!(p.window == r.window) || p.alphabet != r.alphabet)
    throw InvalidArgument("conditional relative entropy needs matching windows");
  const PatternDist<double> pc = marginalize(p, given);
  const PatternDist<double> rc = marginalize(r, given);
  const std::vector<std::size_t> pos = positions_in(p.window, given);
  const std::size_t m = p.window.size();
  std::vector<int> digits(m);
  double d = 0.0;
  for (std::size_t idx = 0; idx < p.weights.size(); ++idx) {
    const double pw = p.weights[idx];
    if (pw == 0.0) continue;
    std::size_t rest = idx;
    for (std::size_t i = m; i-- > 0;) {
      digits[i] = static_cast<int>(rest % static_cast<std::size_t>(p.alphabet));
      rest /= static_cast<std::size_t>(p.alphabet);
    }
    std::size_t c_idx = 0;
    for (std::size_t j : pos) {
      c_idx = c_idx * static_cast<std::size_t>(p.alphabet) +
              static_cast<std::size_t>(digits[j]);
    }
    // pw > 0 implies pc > 0; the reference conditional may vanish.
    const double rw = r.weights[idx];
    const double rcw = rc.weights[c_idx];
    if (rw == 0.0 || rcw == 0.0) return kInf;
    d += pw * (std::log(pw / pc.weights[c_idx]) - std::log(rw / rcw));
  }
  return d;
}

double conditional_relative_entropy_vs_marginal(const PatternDist<double>& p,
                                                const SiteSet& part_a,
                                                const PatternDist<double>& ref_a) {
  if (!(ref_a.window == part_a))
    throw InvalidArgument("reference must live on the conditioned part");
  const SiteSet given = [&] {
    std::vector<Site> rest;
    for (const Site& s : p.window.sites()) {
      if (!part_a.contains(s)) rest.push_back(s);
    }
    return SiteSet(std::move(rest));
  }();
  const PatternDist<double> pc = marginalize(p, given);
  const std::vector<std::size_t> pos_c = positions_in(p.window, given);
  const std::vector<std::size_t> pos_a = positions_in(p.window, part_a);
  const std::size_t m = p.window.size();
  std::vector<int> digits(m);
  double d = 0.0;
  for (std::size_t idx = 0; idx < p.weights.size(); ++idx) {
    const double pw = p.weights[idx];
    if (pw == 0.0) continue;
    std::size_t rest = idx;
    for (std::size_t i = m; i-- > 0;) {
      digits[i] = static_cast<int>(rest % static_cast<std::size_t>(p.alphabet));
      rest /= static_cast<std::size_t>(p.alphabet);
    }
    std::size_t c_idx = 0;
    for (std::size_t j : pos_c) {
      c_idx = c_idx * static_cast<std::size_t>(p.alphabet) +
              static_cast<std::size_t>(digits[j]);
    }
    std::size_t a_idx = 0;
    for (std::size_t j : pos_a) {
      a_idx = a_idx * static_cast<std::size_t>(p.alphabet) +
              static_cast<std::size_t>(digits[j]);
    }
    if (ref_a.weights[a_idx] == 0.0) return kInf;
    d += pw * (std::log(pw / pc.weights[c_idx]) - std::log(ref_a.weights[a_idx]));
  }
  return d;
}

double mutual_information(const PatternDist<double>& p, const SiteSet& part) {
  const SiteSet rest = [&] {
    std::vector<Site> r;
    for (const Site& s : p.window.sites()) {
      if (!part.contains(s)) r.push_back(s);
    }
    return SiteSet(std::move(r));
  }();
  const PatternDist<double> pa = marginalize(p, part);
  const PatternDist<double> pb = marginalize(p, rest);
  const std::vector<std::size_t> pos_a = positions_in(p.window, part);
  const std::vector<std::size_t> pos_b = positions_in(p.window, rest);
  const std::size_t m = p.window.size();
  std::vector<int> digits(m);
  double d = 0.0;
  for (std::size_t idx = 0; idx < p.weights.size(); ++idx) {
    const double pw = p.weights[idx];
    if (pw == 0.0) continue;
    std::size_t rest_i = idx;
    for (std::size_t i = m; i-- > 0;) {
      digits[i] = static_cast<int>(rest_i % static_cast<std::size_t>(p.alphabet));
      rest_i /= static_cast<std::size_t>(p.alphabet);
    }
    std::size_t a_idx = 0;
    for (std::size_t j : pos_a) {
      a_idx = a_idx * static_cast<std::size_t>(p.alphabet) +
              static_cast<std::size_t>(digits[j]);
    }
    std::size_t b_idx = 0;
    for (std::size_t j : pos_b) {
      b_idx = b_idx * static_cast<std::size_t>(p.alphabet) +
              static_cast<std::size_t>(digits[j]);
    }
    d += pw * std::log(pw / (pa.weights[a_idx] * pb.weights[b_idx]));
  }
  return d < 0.0 ? 0.0 : d;  // clamp float round-off on independent inputs
}

double total_variation(const PatternDist<double>& p, const PatternDist<double>& r) {
  if (!(p.window == r.window)) throw InvalidArgument("total variation needs matching windows");
  double s = 0.0;
  for (std::size_t i = 0; i < p.weights.size(); ++i) {
    s += std::fabs(p.weights[i] - r.weights[i]);
  }
  return 0.5 * s;
}

Rational total_variation(const PatternDist<Rational>& p, const PatternDist<Rational>& r) {
  if (!(p.window == r.window)) throw InvalidArgument("total variation needs matching windows");
  Rational s = 0;
  for (std::size_t i = 0; i < p.weights.size(); ++i) {
    s += abs(p.weights[i] - r.weights[i]);
  }
  return s / 2;
}

double pinsker_bound(double relative_entropy_nats) {
  if (relative_entropy_nats < 0.0) throw InvalidArgument("relative entropy must be >= 0");
  return std::sqrt(relative_entropy_nats / 2.0);
}

double entropy_upper_bound(std::size_t window_size, const MarginalDist<double>& q) {
  const double q_min = q.min_weight();
  if (!(q_min > 0.0)) throw InvalidArgument("entropy bound needs strictly positive q");
  return static_cast<double>(window_size) * std::log(1.0 / q_min);
}

namespace {

template <class T, class Fmt>
void write_csv_impl(std::ostream& out, const PatternDist<T>& p, Fmt&& fmt) {
  out << "pattern,weight\n";
  for (std::size_t idx = 0; idx < p.weights.size(); ++idx) {
    const std::vector<int> digits = pattern_of(idx, p.alphabet, p.window.size());
    for (int d : digits) out << d;
    out << ',' << fmt(p.weights[idx]) << '\n';
  }
}

}  // namespace

void write_csv(std::ostream& out, const PatternDist<double>& p) {
  char buf[32];
  write_csv_impl(out, p, [&](double w) {
    std::snprintf(buf, sizeof buf, "%.17g", w);
    return std::string(buf);
  });
}

void write_csv(std::ostream& out, const PatternDist<Rational>& p) {
  write_csv_impl(out, p, [](const Rational& w) { return format_rational(w); });
}

template PatternDist<double> bernoulli_marginal(const MarginalDist<double>&, const SiteSet&);
template PatternDist<Rational> bernoulli_marginal(const MarginalDist<Rational>&, const SiteSet&);
template PatternDist<double> marginalize(const PatternDist<double>&, const SiteSet&);
template PatternDist<Rational> marginalize(const PatternDist<Rational>&, const SiteSet&);
template PatternDist<double> dist_to_float(const PatternDist<double>&);
template PatternDist<double> dist_to_float(const PatternDist<Rational>&);

}  // namespace ergo
