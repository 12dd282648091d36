// Command-line surface: rule files in, verdicts and CSV reports out.
//
// Exit codes: 0 success/pass, 1 file/flag/parse errors, 2 rule not strictly
// positive (decompose), 3 stationarity deviation found, 4 state cap exceeded.
#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "ergo/caps.hpp"
#include "ergo/decompose.hpp"
#include "ergo/influence.hpp"
#include "ergo/ips.hpp"
#include "ergo/pca.hpp"
#include "ergo/rule_io.hpp"

using namespace ergo;

namespace {

template <class T>
MarginalDist<T> parse_q(const std::string& text, int sigma) {
  if (text == "uniform") return MarginalDist<T>::uniform(sigma);
  MarginalDist<T> q;
  q.alphabet = sigma;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if constexpr (is_rational_v<T>) {
      q.weights.push_back(parse_rational(item));
    } else {
      if (item.find('/') != std::string::npos) {
        q.weights.push_back(to_double(parse_rational(item)));
      } else {
        q.weights.push_back(std::stod(item));
      }
    }
  }
  q.validate();
  return q;
}

SiteSet parse_window(const std::string& text) {
  std::vector<Site> sites;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    sites.push_back({std::stoi(item)});
  }
  if (sites.empty()) throw InvalidArgument("window must be nonempty");
  return SiteSet(std::move(sites));
}

std::vector<double> parse_times(const std::string& text) {
  std::vector<double> times;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) times.push_back(std::stod(item));
  return times;
}

template <class T>
InitialMeasure<T> parse_init(const std::string& text, const MarginalDist<T>& q) {
  if (text == "zeros") return InitialMeasure<T>::uniform_symbol(0, 1);
  if (text == "ones") return InitialMeasure<T>::uniform_symbol(1, 1);
  if (text == "product") return InitialMeasure<T>::product_of(q);
  if (text.rfind("word:", 0) == 0) {
    std::vector<int> symbols;
    for (char c : text.substr(5)) {
      if (c < '0' || c > '9') throw InvalidArgument("init word must be digits");
      symbols.push_back(c - '0');
    }
    if (symbols.empty()) throw InvalidArgument("init word must be nonempty");
    return InitialMeasure<T>::point({static_cast<int>(symbols.size())}, symbols);
  }
  throw InvalidArgument("unknown init '" + text + "' (zeros|ones|product|word:...)");
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot open '" + path + "' for writing");
  return out;
}

template <class T>
void print_matrix(const char* name, const SquareMatrix<T>& m) {
  std::printf("%s:\n", name);
  for (const auto& row : m) {
    std::printf(" ");
    for (const T& v : row) {
      if constexpr (is_rational_v<T>) {
        std::printf(" %s", format_rational(v).c_str());
      } else {
        std::printf(" %.17g", v);
      }
    }
    std::printf("\n");
  }
}

template <class T>
int run_decompose(const LocalRule<T>& rule, const std::string& q_text,
                  const std::string& kappa_text) {
  const auto q = parse_q<T>(q_text, rule.alphabet());
  if (!q.strictly_positive()) {
    std::fprintf(stderr, "error: q must be strictly positive\n");
    return 1;
  }
  const T max_kappa = max_noise_level(rule, q);
  if (!(max_kappa > T{})) {
    std::fprintf(stderr, "error: rule not strictly positive (kappa = 0)\n");
    return 2;
  }
  T kappa = max_kappa;
  if (!kappa_text.empty()) {
    if constexpr (is_rational_v<T>) {
      kappa = parse_rational(kappa_text);
    } else {
      kappa = std::stod(kappa_text);
    }
  }
  if constexpr (is_rational_v<T>) {
    std::printf("kappa = %s (max %s)\n", format_rational(kappa).c_str(),
                format_rational(max_kappa).c_str());
  } else {
    std::printf("kappa = %.17g (max %.17g)\n", to_double(kappa), to_double(max_kappa));
  }
  if (!(kappa < T(1))) {
    std::printf("rule is pure noise at kappa = 1: phi(w,.) = q for every w\n");
    print_matrix("theta", noise_matrix(T(1), q));
    std::printf("theta is singular at kappa = 1; no inverse\n");
    return 0;
  }
  const auto nd = decompose(rule, q, kappa);
  std::printf("psi table (rows in pattern order):\n");
  for (std::size_t r = 0; r < nd.psi.rows(); ++r) {
    std::printf(" ");
    for (int b = 0; b < nd.psi.alphabet(); ++b) {
      if constexpr (is_rational_v<T>) {
        std::printf(" %s", format_rational(nd.psi.entry(r, b)).c_str());
      } else {
        std::printf(" %.17g", nd.psi.entry(r, b));
      }
    }
    std::printf("\n");
  }
  print_matrix("theta", nd.theta);
  print_matrix("theta_inverse", noise_inverse(kappa, q));
  return 0;
}

template <class T>
std::string format_value(const T& v) {
  if constexpr (is_rational_v<T>) {
    return format_rational(v);
  } else {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
  }
}

// Per-cylinder report: for the generator path the value is (lambda L)([w]),
// otherwise the signed deviation of the pushed-forward cylinder mass.
template <class T>
void write_cylinder_csv(std::ostream& out, const LocalRule<T>& rule,
                        const MarginalDist<T>& q, int L, bool ips, bool local,
                        bool finitary) {
  out << "cylinder,value\n";
  auto emit = [&](const SiteSet& window, std::size_t idx, const T& value) {
    std::string pattern;
    for (int d : pattern_of(idx, rule.alphabet(), window.size())) {
      pattern += std::to_string(d);
    }
    out << pattern << ',' << format_value(value) << '\n';
  };
  if (local) {
    const Site origin(static_cast<std::size_t>(rule.dimension()), 0);
    const auto pushed = single_site_pushforward(rule, q, origin);
    const auto ref = bernoulli_marginal(q, pushed.window);
    for (std::size_t i = 0; i < pushed.weights.size(); ++i) {
      emit(pushed.window, i, pushed.weights[i] - ref.weights[i]);
    }
    return;
  }
  const int max_len = finitary ? rule.alphabet() + 1 : L;
  for (int len = 1; len <= max_len; ++len) {
    const SiteSet window = SiteSet::interval(0, len - 1);
    if (ips) {
      for (std::size_t i = 0; i < pow_size(rule.alphabet(), window.size()); ++i) {
        const auto w = pattern_of(i, rule.alphabet(), window.size());
        emit(window, i, generator_on_cylinder(rule, q, window, w));
      }
    } else {
      const auto src = bernoulli_marginal(q, neighbourhood_of(window, rule.neighbourhood()));
      const auto pushed = pca_window_pushforward(rule, src, window, Exec::serial);
      const auto ref = bernoulli_marginal(q, window);
      for (std::size_t i = 0; i < pushed.weights.size(); ++i) {
        emit(window, i, pushed.weights[i] - ref.weights[i]);
      }
    }
  }
}

template <class T>
int run_check_stationary(const LocalRule<T>& rule, const std::string& q_text, int L,
                         bool ips, bool local, bool finitary, std::size_t cap,
                         const std::string& out_path) {
  const auto q = parse_q<T>(q_text, rule.alphabet());
  StationarityReport<T> report;
  const char* what;
  if (local) {
    report = check_ips_local_stationary(rule, q);
    what = "local stationarity (single-site kernels)";
  } else if (ips) {
    report = check_ips_stationary_bernoulli(rule, q, L, cap);
    what = "stationarity for the continuous-time generator";
  } else if (finitary) {
    report = check_piatetski_shapiro(rule, q, cap);
    what = "1D finitary stationarity criterion";
  } else {
    report = check_pca_stationary(rule, q, L, cap);
    what = "synchronous (PCA) stationarity";
  }
  if (!out_path.empty()) {
    auto out = open_out(out_path);
    write_cylinder_csv(out, rule, q, L, ips, local, finitary);
  }
  const std::string dev = format_value(report.max_deviation);
  std::printf("%s: checked %zu identities, max deviation %s (%s)\n", what,
              report.identities_checked, dev.c_str(),
              report.exact ? "exact" : "float, tol 1e-12");
  if (report.stationary) {
    std::printf("verdict: stationary\n");
    return 0;
  }
  std::string pattern;
  for (int d : report.witness_pattern) pattern += std::to_string(d);
  std::printf("verdict: NOT stationary; witness cylinder [%s] on window of size %zu\n",
              pattern.c_str(), report.witness_window.size());
  return 3;
}

int run_evolve_pca(const LocalRule<double>& rule, const MarginalDist<double>& q,
                   const InitialMeasure<double>& init, const SiteSet& window, int steps,
                   std::size_t cap, const std::string& out_path) {
  EvolveOptions opts;
  opts.cap = cap;
  const auto traj = evolve_pca_exact(rule, init, window, steps, q, opts);
  if (out_path.empty()) {
    write_csv(std::cout, traj);
  } else {
    auto out = open_out(out_path);
    write_csv(out, traj);
  }
  return 0;
}

int run_evolve_ips(const LocalRule<double>& rule, const MarginalDist<double>& q,
                   const InitialMeasure<double>& init, const SiteSet& window, int torus_n,
                   const std::vector<double>& times, std::size_t cap,
                   const std::string& out_path) {
  TorusModel<double> model{rule, TorusSpec{{torus_n}}};
  TorusGenerator<double> gen(model, cap);
  const auto lambda = gen.product_state_dist(q);
  auto mu0 = gen.initial_state_dist(init);
  const double kappa = q.strictly_positive() ? max_noise_level(rule, q) : 0.0;

  std::ostringstream csv;
  csv << "t,D_J_nats,TV,iterated_bound,envelope_alpha1_exp,pinsker_of_D\n";
  char buf[200];
  const double d0 = relative_entropy(gen.marginal(std::span<const double>(mu0), window),
                                     gen.marginal(std::span<const double>(lambda), window));
  for (double t : times) {
    const auto mu_t = uniformization_evolve(gen, mu0, t, 1e-10).dist;
    const auto m = gen.marginal(std::span<const double>(mu_t), window);
    const auto ref = gen.marginal(std::span<const double>(lambda), window);
    const double d = relative_entropy(m, ref);
    const double tv = total_variation(m, ref);
    const double bound =
        kappa > 0.0 ? entropy_evolution_bound_ips(d0, kappa, rule.neighbourhood(), q, window,
                                                  t, model.torus)
                    : std::nan("");
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g", t, d, tv, bound,
                  std::nan(""), pinsker_bound(d));
    csv << buf << '\n';
  }
  if (out_path.empty()) {
    std::cout << csv.str();
  } else {
    open_out(out_path) << csv.str();
  }
  return 0;
}

int run_evolve_simulate(const LocalRule<double>& rule, const MarginalDist<double>& q,
                        const InitialMeasure<double>& init, const SiteSet& window,
                        int torus_n, const std::vector<double>& times, int replicas,
                        std::uint64_t seed, std::size_t cap, const std::string& out_path) {
  TorusModel<double> model{rule, TorusSpec{{torus_n}}};
  auto sim = simulate_ips(model, init, times, replicas, seed, window);
  // fill the exact column when the state space is small enough to evolve
  if (model.states() <= 4096) {
    TorusGenerator<double> gen(model, cap);
    auto mu0 = gen.initial_state_dist(init);
    for (auto& cp : sim.checkpoints) {
      cp.exact = gen.marginal(
          std::span<const double>(uniformization_evolve(gen, mu0, cp.t, 1e-10).dist),
          window);
    }
  }
  (void)q;
  if (out_path.empty()) {
    write_csv(std::cout, sim);
  } else {
    auto out = open_out(out_path);
    write_csv(out, sim);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"verification and simulation toolkit for PCA and finite-range IPS"};
  app.require_subcommand(1);
  app.fallthrough();  // global flags may follow the subcommand

  int parallel = -1;
  app.add_option("--parallel", parallel,
                 "replica/row parallelism: 0 = serial, k = use k threads");
  std::size_t cap = default_state_cap();
  app.add_option("--cap", cap, "state cap override (also ERGO_STATE_CAP)");

  // make-rule
  auto* mk = app.add_subcommand("make-rule", "write a built-in example rule file");
  std::string mk_kind, mk_eps = "1/10", mk_mode = "rational", mk_out;
  mk->add_option("--kind", mk_kind, "xor-noise | copy-flip-hold")->required();
  mk->add_option("--eps", mk_eps, "noise parameter (p/q in rational mode)");
  mk->add_option("--mode", mk_mode, "rational | float");
  mk->add_option("--out", mk_out, "output path")->required();

  // decompose
  auto* dc = app.add_subcommand("decompose", "noise decomposition phi = kappa q + (1-kappa) psi");
  std::string dc_rule, dc_q = "uniform", dc_kappa;
  dc->add_option("--rule", dc_rule, "rule file")->required();
  dc->add_option("--q", dc_q, "uniform or comma weights");
  dc->add_option("--kappa", dc_kappa, "noise level (default: the maximum)");

  // check-stationary
  auto* cs = app.add_subcommand("check-stationary", "Bernoulli stationarity checks");
  std::string cs_rule, cs_q = "uniform";
  int cs_L = 4;
  bool cs_ips = false, cs_local = false, cs_finitary = false, cs_float_ok = false;
  cs->add_option("--rule", cs_rule, "rule file")->required();
  cs->add_option("--q", cs_q, "uniform or comma weights");
  cs->add_option("--L", cs_L, "max window side length");
  cs->add_flag("--ips", cs_ips, "check the continuous-time generator instead of the PCA kernel");
  cs->add_flag("--local", cs_local, "check single-site (local) stationarity");
  cs->add_flag("--finitary", cs_finitary, "1D finitary criterion (N = (0,1))");
  cs->add_flag("--mode-float", cs_float_ok, "accept float-mode rules (verdict within 1e-12)");
  std::string cs_out;
  cs->add_option("--out", cs_out, "per-cylinder CSV report path");

  // evolve
  auto* ev = app.add_subcommand("evolve", "exact or Monte Carlo evolution with entropy readouts");
  std::string ev_rule, ev_q = "uniform", ev_init = "zeros", ev_window = "0,1,2,3", ev_out;
  std::string ev_times;
  int ev_steps = 10, ev_torus = 8, ev_replicas = 10000;
  std::uint64_t ev_seed = 1;
  bool ev_pca = false, ev_ips = false, ev_sim = false;
  ev->add_option("--rule", ev_rule, "rule file")->required();
  ev->add_option("--q", ev_q, "reference marginal");
  ev->add_option("--init", ev_init, "zeros | ones | product | word:0101");
  ev->add_option("--window", ev_window, "comma list of 1D sites");
  ev->add_option("--steps", ev_steps, "PCA steps");
  ev->add_option("--times", ev_times, "IPS checkpoints, comma list");
  ev->add_option("--torus", ev_torus, "ring size for IPS modes");
  ev->add_option("--replicas", ev_replicas, "simulation replicas");
  ev->add_option("--seed", ev_seed, "simulation seed");
  ev->add_flag("--exact-pca", ev_pca, "exact synchronous evolution");
  ev->add_flag("--exact-ips", ev_ips, "exact continuous-time evolution (uniformization)");
  ev->add_flag("--simulate", ev_sim, "event-driven Monte Carlo");
  ev->add_option("--out", ev_out, "CSV output path (default stdout)");

  // sdpi
  auto* sd = app.add_subcommand("sdpi", "entropy contraction verification for product kernels");
  double sd_kappa = 0.2;
  std::string sd_q = "uniform", sd_out;
  int sd_n = 1, sd_trials = 1000;
  std::uint64_t sd_seed = 1;
  bool sd_sync = false, sd_async = false;
  sd->add_option("--theta-from-noise", sd_kappa, "build theta as the noise matrix")->required();
  sd->add_option("--q", sd_q, "replacement distribution");
  sd->add_option("--n", sd_n, "number of components");
  sd->add_option("--trials", sd_trials, "random simplex samples");
  sd->add_option("--seed", sd_seed, "sample seed");
  sd->add_flag("--sync", sd_sync, "synchronous product kernel");
  sd->add_flag("--async", sd_async, "asynchronous (random coordinate) kernel");
  sd->add_option("--out", sd_out, "CSV output path");

  // influence
  auto* in = app.add_subcommand("influence", "growth-process escape probabilities");
  int in_rho = 3, in_replicas = 10000;
  std::string in_ells = "16", in_ts = "2", in_out;
  std::uint64_t in_seed = 1;
  in->add_option("--rho", in_rho, "1D neighbourhood size (centred)");
  in->add_option("--ell", in_ells, "speed factors, comma list");
  in->add_option("--t", in_ts, "times, comma list");
  in->add_option("--replicas", in_replicas, "replicas per cell");
  in->add_option("--seed", in_seed, "seed");
  in->add_option("--out", in_out, "CSV output path");

  // mixing-bound
  auto* mx = app.add_subcommand("mixing-bound", "mixing time bound from (alpha, beta)");
  double mx_alpha = 1.0, mx_beta = 0.1, mx_eps = 0.01;
  int mx_d = 1, mx_n = 1;
  mx->add_option("--alpha", mx_alpha)->required();
  mx->add_option("--beta", mx_beta)->required();
  mx->add_option("--d", mx_d)->required();
  mx->add_option("--n", mx_n)->required();
  mx->add_option("--eps", mx_eps)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  if (parallel == 0) {
    set_default_exec(Exec::serial);
  } else if (parallel > 0) {
    set_default_exec(Exec::parallel);
    set_exec_threads(parallel);
  }

  try {
    if (mk->parsed()) {
      if (mk_mode != "rational" && mk_mode != "float") {
        std::fprintf(stderr, "error: --mode must be rational or float\n");
        return 1;
      }
      RuleVariant rule = [&]() -> RuleVariant {
        if (mk_mode == "rational") {
          const Rational eps = parse_rational(mk_eps);
          if (mk_kind == "xor-noise") return xor_noise(eps);
          if (mk_kind == "copy-flip-hold") return copy_flip_hold(eps);
        } else {
          const double eps =
              mk_eps.find('/') != std::string::npos ? to_double(parse_rational(mk_eps))
                                                    : std::stod(mk_eps);
          if (mk_kind == "xor-noise") return xor_noise(eps);
          if (mk_kind == "copy-flip-hold") return copy_flip_hold(eps);
        }
        throw InvalidArgument("unknown rule kind '" + mk_kind + "'");
      }();
      save_rule(mk_out, rule);
      std::printf("wrote %s (%s, %s)\n", mk_out.c_str(), mk_kind.c_str(), mk_mode.c_str());
      return 0;
    }

    if (dc->parsed()) {
      const auto rule = load_rule(dc_rule);
      return std::visit([&](const auto& r) { return run_decompose(r, dc_q, dc_kappa); },
                        rule);
    }

    if (cs->parsed()) {
      const auto rule = load_rule(cs_rule);
      if (!is_rational_mode(rule) && !cs_float_ok) {
        std::fprintf(stderr,
                     "error: stationarity verdicts default to rational mode; re-save the "
                     "rule in rational mode or pass --mode-float\n");
        return 1;
      }
      return std::visit(
          [&](const auto& r) {
            return run_check_stationary(r, cs_q, cs_L, cs_ips, cs_local, cs_finitary, cap,
                                        cs_out);
          },
          rule);
    }

    if (ev->parsed()) {
      if (static_cast<int>(ev_pca) + static_cast<int>(ev_ips) + static_cast<int>(ev_sim) != 1) {
        std::fprintf(stderr, "error: pick exactly one of --exact-pca, --exact-ips, --simulate\n");
        return 1;
      }
      const auto loaded = load_rule(ev_rule);
      const LocalRule<double> rule = std::holds_alternative<LocalRule<double>>(loaded)
                                         ? std::get<LocalRule<double>>(loaded)
                                         : to_float(std::get<LocalRule<Rational>>(loaded));
      const auto q = parse_q<double>(ev_q, rule.alphabet());
      const auto init = parse_init<double>(ev_init, q);
      const auto window = parse_window(ev_window);
      if (ev_pca) return run_evolve_pca(rule, q, init, window, ev_steps, cap, ev_out);
      const auto times = parse_times(ev_times.empty() ? "0.5,1,2,4" : ev_times);
      if (ev_ips) return run_evolve_ips(rule, q, init, window, ev_torus, times, cap, ev_out);
      return run_evolve_simulate(rule, q, init, window, ev_torus, times, ev_replicas,
                                 ev_seed, cap, ev_out);
    }

    if (sd->parsed()) {
      if (sd_sync == sd_async) {
        std::fprintf(stderr, "error: pick exactly one of --sync, --async\n");
        return 1;
      }
      const auto q = parse_q<double>(sd_q, 2);
      const auto theta = noise_matrix(sd_kappa, q);
      const auto reportv = sdpi_verify(theta, q, sd_n, sd_sync, sd_trials, sd_seed);
      std::printf("kappa = %.6f, bound = %.6f, max ratio = %.6f over %zu inputs: %s\n",
                  reportv.kappa, reportv.bound, reportv.max_ratio, reportv.trials.size(),
                  reportv.pass ? "pass" : "FAIL");
      if (!sd_out.empty()) {
        auto out = open_out(sd_out);
        write_csv(out, reportv);
      }
      return reportv.pass ? 0 : 3;
    }

    if (in->parsed()) {
      if (in_rho < 1) {
        std::fprintf(stderr, "error: --rho must be >= 1\n");
        return 1;
      }
      std::vector<Site> offsets;
      const int lo = -((in_rho - 1) / 2);
      for (int i = 0; i < in_rho; ++i) offsets.push_back({lo + i});
      Neighbourhood nb(1, offsets);
      const SiteSet a = SiteSet::interval(0, 0);
      std::vector<InfluenceReportRow> rows;
      bool all_ok = true;
      for (double t : parse_times(in_ts)) {
        for (double ell : parse_times(in_ells)) {
          const auto est = escape_probability_estimate(nb, a, t, ell, in_replicas, in_seed);
          const double bound = escape_probability_bound(a.size(), nb.size(), ell, t);
          rows.push_back({t, ell, bound, est.p_hat, est.std_err, est.replicas});
          all_ok = all_ok && est.p_hat <= bound + 3.0 * est.std_err;
          std::printf("t=%g ell=%g: p_hat=%.6g (se %.3g) <= bound %.6g: %s\n", t, ell,
                      est.p_hat, est.std_err, bound,
                      est.p_hat <= bound + 3.0 * est.std_err ? "ok" : "VIOLATED");
        }
      }
      if (!in_out.empty()) {
        auto out = open_out(in_out);
        write_csv(out, rows);
      }
      return all_ok ? 0 : 3;
    }

    if (mx->parsed()) {
      const double bound = mixing_time_bound(mx_alpha, mx_beta, mx_d, mx_n, mx_eps);
      std::printf("t_mix(J, eps) <= %.2f  (exact: %.10g)\n", bound, bound);
      return 0;
    }
  } catch (const CapExceeded& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 4;
  } catch (const ParseError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
