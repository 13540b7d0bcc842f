#include "birkhoff/resonance.hpp"

#include <boost/multiprecision/cpp_int.hpp>
#include <algorithm>
#include <cmath>
#include <sstream>

namespace birkhoff {

namespace {

using Rational = boost::multiprecision::cpp_rational;

std::string join_query(std::span<const std::int8_t> sigma,
                       std::span<const ModeIndex> n) {
  std::ostringstream os;
  for (std::size_t i = 0; i < sigma.size(); ++i) {
    if (i) os << " ";
    os << (sigma[i] > 0 ? "+" : "-") << n[i].str();
  }
  return os.str();
}

}  // namespace

std::string DivisorQuery::str() const { return join_query(sigma, n); }

long LFormQuery::l1() const {
  long s = 0;
  for (long l : ell) s += std::abs(l);
  return s;
}

std::string LFormQuery::str() const {
  std::ostringstream os;
  for (std::size_t i = 0; i < ell.size(); ++i) {
    if (i) os << " ";
    os << (ell[i] >= 0 ? "+" : "") << ell[i] << "*w[" << m[i].str() << "]";
  }
  return os.str();
}

LFormQuery to_lform(const FrequencyFamily& omega, const DivisorQuery& q) {
  std::map<int, long> tally;  // group id -> signed sum
  std::map<int, ModeIndex> leader;
  for (int i = 0; i < q.arity(); ++i) {
    int g = omega.group_of(q.n[i]);
    tally[g] += q.sigma[i];
    auto it = leader.find(g);
    if (it == leader.end() || q.n[i] < it->second) leader[g] = q.n[i];
  }
  std::vector<std::pair<ModeIndex, long>> entries;
  for (const auto& [g, l] : tally)
    if (l != 0) entries.emplace_back(leader[g], l);
  std::sort(entries.begin(), entries.end(),
            [](const auto& a, const auto& b) {
              double ja = a.first.jb(), jb = b.first.jb();
              if (ja != jb) return ja < jb;
              return a.first < b.first;
            });
  LFormQuery out;
  for (auto& [m, l] : entries) {
    out.m.push_back(m);
    out.ell.push_back(l);
  }
  return out;
}

double kappa(const FrequencyFamily& omega, std::span<const std::int8_t> sigma,
             std::span<const ModeIndex> n) {
  if (sigma.size() != n.size()) throw InvalidInput("kappa: arity mismatch");
  std::map<int, long> tally;
  for (std::size_t i = 0; i < sigma.size(); ++i)
    tally[omega.group_of(n[i])] += sigma[i];
  double k = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n.size(); ++i)
    if (tally[omega.group_of(n[i])] != 0) k = std::min(k, n[i].jb());
  return k;
}

double small_divisor(const FrequencyFamily& omega, const DivisorQuery& q) {
  if (q.sigma.size() != q.n.size())
    throw InvalidInput("small_divisor: arity mismatch");
  double s = 0;
  for (int i = 0; i < q.arity(); ++i)
    s += double(q.sigma[i]) * omega.at(q.n[i]);
  return s;
}

double small_divisor(const FrequencyFamily& omega, const LFormQuery& q) {
  double s = 0;
  for (std::size_t i = 0; i < q.ell.size(); ++i)
    s += double(q.ell[i]) * omega.at(q.m[i]);
  return s;
}

bool is_paired(const FrequencyFamily& omega,
               std::span<const std::int8_t> sigma,
               std::span<const ModeIndex> n) {
  if (sigma.size() != n.size())
    throw InvalidInput("is_paired: arity mismatch");
  if (sigma.size() % 2 != 0) return false;
  std::map<int, long> tally;
  for (std::size_t i = 0; i < sigma.size(); ++i)
    tally[omega.group_of(n[i])] += sigma[i];
  for (const auto& [g, t] : tally)
    if (t != 0) return false;
  return true;
}

namespace {

struct PairData {
  ModeIndex n;
  std::int8_t sigma;
  double omega;
  long omega_int;  // valid when the family is integer valued
  int group;
  double jb;
};

struct ScanAccum {
  NonResonanceCertificate cert;
  std::map<double, double> buckets;  // kappa -> min |divisor|
  double near_tol = 0;
  bool integral = false;

  void see(std::span<const PairData* const> tuple, double div_abs,
           bool exact_zero, double kap) {
    ++cert.scanned;
    auto record_query = [&] {
      DivisorQuery q;
      for (const PairData* p : tuple) {
        q.sigma.push_back(p->sigma);
        q.n.push_back(p->n);
      }
      return q;
    };
    if (exact_zero) {
      cert.violations.push_back(record_query());
      return;
    }
    if (div_abs < near_tol) cert.near_resonances.push_back(record_query());
    if (div_abs < cert.min_divisor) {
      cert.min_divisor = div_abs;
      cert.worst = record_query();
    }
    auto [it, fresh] = buckets.try_emplace(kap, div_abs);
    if (!fresh) it->second = std::min(it->second, div_abs);
  }
};

/// Enumerates sorted (sigma, n) tuples, arity-major then lexicographic, and
/// feeds every non-paired query with kappa <= n_max_cut to the accumulator.
void scan_monomials(const FrequencyFamily& omega, int r, double n_max_cut,
                    const Lattice& range, ScanAccum& acc) {
  std::vector<PairData> pairs;
  for (const auto& n : range.modes()) {
    if (!omega.lattice.contains(n))
      throw InvalidInput("scan: index range exceeds the frequency lattice");
    for (int s : {-1, +1}) {
      PairData p;
      p.n = n;
      p.sigma = std::int8_t(s);
      p.omega = omega.at(n);
      p.omega_int = std::lround(p.omega);
      p.group = omega.group_of(n);
      p.jb = n.jb();
      pairs.push_back(p);
    }
  }
  const int P = int(pairs.size());
  const bool integral = omega.integer_valued;
  std::vector<const PairData*> tuple;
  std::vector<int> gids;
  std::vector<long> gsum;

  // Tally per-group signed sums for the current tuple.
  auto evaluate_leaf = [&](double div, long div_int) {
    const int a = int(tuple.size());
    gids.clear();
    gsum.clear();
    for (const PairData* p : tuple) {
      int g = p->group;
      int slot = -1;
      for (std::size_t i = 0; i < gids.size(); ++i)
        if (gids[i] == g) slot = int(i);
      if (slot < 0) {
        gids.push_back(g);
        gsum.push_back(p->sigma);
      } else {
        gsum[slot] += p->sigma;
      }
    }
    double kap = std::numeric_limits<double>::infinity();
    for (const PairData* p : tuple) {
      for (std::size_t i = 0; i < gids.size(); ++i)
        if (gids[i] == p->group && gsum[i] != 0) {
          kap = std::min(kap, p->jb);
          break;
        }
    }
    if (!std::isfinite(kap)) {
      // fully paired (even arity) or impossible for odd arity
      if (a % 2 == 0) ++acc.cert.paired_count;
      return;
    }
    if (kap > n_max_cut) return;
    bool exact_zero = integral && div_int == 0;
    acc.see(tuple, std::abs(div), exact_zero, kap);
  };

  // depth-first over nondecreasing pair ids
  auto rec = [&](auto&& self, int first, double div, long div_int,
                 int remaining) -> void {
    if (!tuple.empty()) evaluate_leaf(div, div_int);
    if (remaining == 0) return;
    for (int p = first; p < P; ++p) {
      tuple.push_back(&pairs[p]);
      self(self, p, div + pairs[p].sigma * pairs[p].omega,
           div_int + pairs[p].sigma * pairs[p].omega_int, remaining - 1);
      tuple.pop_back();
    }
  };
  rec(rec, 0, 0.0, 0, r);
}

}  // namespace

NonResonanceCertificate verify_strong_nonresonance(
    const FrequencyFamily& omega, int r, double n_max, Lattice index_range) {
  ScanAccum acc;
  acc.cert.order = r;
  acc.cert.n_max = n_max;
  acc.cert.index_range = index_range;
  acc.near_tol = 1e-12 * r * std::max(1.0, omega.max_abs_omega);
  scan_monomials(omega, r, n_max, index_range, acc);

  auto& cert = acc.cert;
  for (const auto& [kap, m] : acc.buckets)
    cert.bucket_minima.emplace_back(kap, m);
  // beta from least squares over bucket minima, then gamma lowered so that
  // every scanned query satisfies |div| >= gamma kappa^{-beta}
  double beta = 0;
  if (cert.bucket_minima.size() >= 2) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int c = 0;
    for (const auto& [kap, m] : cert.bucket_minima) {
      if (m <= 0) continue;
      double x = std::log(kap), y = std::log(m);
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
      ++c;
    }
    if (c >= 2 && sxx * c - sx * sx > 1e-12)
      beta = std::max(0.0, -(c * sxy - sx * sy) / (c * sxx - sx * sx));
  }
  double gamma = std::numeric_limits<double>::infinity();
  for (const auto& [kap, m] : cert.bucket_minima)
    gamma = std::min(gamma, m * std::pow(kap, beta));
  if (!std::isfinite(gamma)) gamma = 0;
  cert.beta = beta;
  cert.gamma = gamma;
  return cert;
}

NonResonanceCertificate verify_limited_nonresonance(
    const FrequencyFamily& omega, int r, double N, Lattice index_range) {
  ScanAccum acc;
  acc.cert.order = r;
  acc.cert.n_max = N;
  acc.cert.index_range = index_range;
  acc.cert.limited = true;
  acc.near_tol = 1e-12 * r * std::max(1.0, omega.max_abs_omega);
  scan_monomials(omega, r, N, index_range, acc);
  auto& cert = acc.cert;
  for (const auto& [kap, m] : acc.buckets)
    cert.bucket_minima.emplace_back(kap, m);
  cert.beta = 0.0;
  cert.gamma =
      std::isfinite(cert.min_divisor) && cert.scanned > 0 ? cert.min_divisor
                                                          : 0.0;
  return cert;
}

namespace {

/// Enumerates ell-form queries: injective sorted index tuples of the range
/// with nonzero integer weights, |ell|_1 <= r; ell canonical up to global
/// sign (first weight positive).
void for_each_lform(const FrequencyFamily& omega, const Lattice& range, int r,
                    const std::function<void(const LFormQuery&)>& fn) {
  auto ms = range.modes();
  std::sort(ms.begin(), ms.end(), [](const ModeIndex& a, const ModeIndex& b) {
    if (a.jb() != b.jb()) return a.jb() < b.jb();
    return a < b;
  });
  const int M = int(ms.size());
  LFormQuery q;
  auto rec = [&](auto&& self, int first, int budget) -> void {
    if (!q.ell.empty()) fn(q);
    if (budget == 0) return;
    for (int i = first; i < M; ++i) {
      q.m.push_back(ms[i]);
      // weights: |l| in [1, budget]; sign free except the first weight
      for (int mag = 1; mag <= budget; ++mag) {
        for (int sg : {+1, -1}) {
          if (q.ell.empty() && sg < 0) continue;  // global sign dedup
          q.ell.push_back(long(sg) * mag);
          self(self, i + 1, budget - mag);
          q.ell.pop_back();
        }
      }
      q.m.pop_back();
    }
  };
  rec(rec, 0, r);
  (void)omega;
}

double dist_to_integers(double x) { return std::abs(x - std::round(x)); }

}  // namespace

std::pair<double, double> fit_weak_params(const FrequencyFamily& omega, int r,
                                          double mu, Lattice index_range) {
  std::map<double, double> buckets;  // <m_last> -> min over queries, h
  for_each_lform(omega, index_range, r, [&](const LFormQuery& q) {
    double base = small_divisor(omega, q);
    double worst = std::numeric_limits<double>::infinity();
    long hl1 = q.l1();
    for (int h = -r; h <= r; ++h) {
      (void)hl1;
      worst = std::min(worst, dist_to_integers(base + h * mu));
    }
    double key = q.m.back().jb();
    auto [it, fresh] = buckets.try_emplace(key, worst);
    if (!fresh) it->second = std::min(it->second, worst);
  });
  double alpha = 0;
  {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int c = 0;
    for (const auto& [kap, m] : buckets) {
      if (m <= 0) continue;
      double x = std::log(kap), y = std::log(m);
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
      ++c;
    }
    if (c >= 2 && sxx * c - sx * sx > 1e-12)
      alpha = std::max(0.0, -(c * sxy - sx * sy) / (c * sxx - sx * sx));
  }
  double gamma = std::numeric_limits<double>::infinity();
  for (const auto& [kap, m] : buckets)
    gamma = std::min(gamma, m * std::pow(kap, alpha));
  if (!std::isfinite(gamma)) gamma = 0;
  return {alpha, gamma};
}

std::pair<double, double> fit_accumulation(const FrequencyFamily& omega,
                                           double mu) {
  std::vector<std::pair<double, double>> pts;  // (<n>, |omega - Z - mu|)
  for (const auto& [n, w] : omega.omega) {
    double e = dist_to_integers(w - mu);
    pts.emplace_back(n.jb(), e);
  }
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int c = 0;
  for (auto& [jb, e] : pts) {
    if (e <= 0) continue;
    double x = std::log(jb), y = std::log(e);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++c;
  }
  double nu = 1.0;
  if (c >= 2 && sxx * c - sx * sx > 1e-12)
    nu = std::max(0.0, -(c * sxy - sx * sy) / (c * sxx - sx * sx));
  double C = 0;
  for (auto& [jb, e] : pts) C = std::max(C, e * std::pow(jb, nu));
  return {C, nu};
}

BootstrapResult bootstrap_weak_to_strong(const BootstrapParams& params,
                                         const FrequencyFamily& omega,
                                         Lattice index_range) {
  if (!(params.alpha > 0) || !(params.gamma > 0) || !(params.C > 0) ||
      !(params.nu > 0) || params.r < 1)
    throw InvalidInput("bootstrap: alpha, gamma, C, nu > 0 and r >= 1");

  // weak hypothesis on the scanned range
  for_each_lform(omega, index_range, params.r, [&](const LFormQuery& q) {
    double base = small_divisor(omega, q);
    double bound =
        params.gamma * std::pow(q.m.back().jb(), -params.alpha);
    for (int h = -params.r; h <= params.r; ++h) {
      double d = dist_to_integers(base + h * params.mu);
      if (d < bound)
        throw HypothesisFailure(
            "bootstrap: weak non-resonance fails for " + q.str() +
                " (h=" + std::to_string(h) + ")",
            "{\"query\":\"" + q.str() + "\",\"h\":" + std::to_string(h) +
                ",\"dist\":" + std::to_string(d) + "}");
    }
  });
  // accumulation hypothesis
  for (const auto& [n, w] : omega.omega) {
    if (!index_range.contains(n)) continue;
    double e = dist_to_integers(w - params.mu);
    if (e > params.C * std::pow(n.jb(), -params.nu))
      throw HypothesisFailure(
          "bootstrap: accumulation hypothesis fails at n=" + n.str(),
          "{\"n\":\"" + n.str() + "\",\"dist\":" + std::to_string(e) + "}");
  }

  BootstrapResult res;
  double beta = params.alpha, eta = params.gamma;
  res.steps.push_back({1, beta, eta, 0, 0, 0});
  for (int rf = 1; rf < params.r; ++rf) {
    double eta1 = eta / 2.0;
    double eta2 = params.gamma *
                  std::pow(eta / (2.0 * params.C * params.r),
                           params.alpha / params.nu);
    double beta2 = params.alpha * beta / params.nu;
    eta = std::min(eta1, eta2);
    beta = std::max(beta, beta2);
    res.steps.push_back({rf + 1, beta, eta, eta1, eta2, beta2});
  }
  res.beta = beta;
  res.eta = eta;

  // verification of the strong bound on the scanned range
  res.worst_margin = std::numeric_limits<double>::infinity();
  res.verified = true;
  for_each_lform(omega, index_range, params.r, [&](const LFormQuery& q) {
    double d = std::abs(small_divisor(omega, q));
    double bound = res.eta * std::pow(q.m.front().jb(), -res.beta);
    double margin = d / bound;
    if (margin < res.worst_margin) {
      res.worst_margin = margin;
      res.worst = q;
    }
    if (d < bound) res.verified = false;
  });
  return res;
}

PartialFractionResult partial_fraction_divisor(std::span<const long> ell,
                                               std::span<const long> n) {
  if (ell.size() != n.size() || ell.empty())
    throw InvalidInput("partial_fraction_divisor: matching nonempty tuples");
  for (std::size_t i = 0; i < n.size(); ++i) {
    if (n[i] < 0 || (i + 1 < n.size() && !(n[i] < n[i + 1])))
      throw InvalidInput(
          "partial_fraction_divisor: need 0 <= n_1 < ... < n_r");
    if (ell[i] == 0)
      throw InvalidInput("partial_fraction_divisor: ell entries nonzero");
  }
  const long r_star = long(n.size());
  std::optional<PartialFractionResult> best;
  Rational best_abs = 0;
  for (long j = 1; j <= 5 * r_star; ++j) {
    bool excluded = false;
    for (long nk : n)
      if (j == nk || j == 2 * nk) excluded = true;
    if (excluded) continue;
    Rational sum = 0;
    for (std::size_t k = 0; k < n.size(); ++k) {
      long num = ell[k];
      long den = 4 * n[k] * n[k] - j * j;
      if (den < 0) {
        num = -num;
        den = -den;
      }
      sum += Rational(num, den);
    }
    Rational a = sum < 0 ? Rational(-sum) : sum;
    if (!best || a > best_abs) {
      best_abs = a;
      PartialFractionResult res;
      res.j = int(j);
      res.value = double(boost::multiprecision::numerator(a)) /
                  double(boost::multiprecision::denominator(a));
      std::ostringstream os;
      os << boost::multiprecision::numerator(sum) << "/"
         << boost::multiprecision::denominator(sum);
      res.exact = os.str();
      best = res;
    }
  }
  if (!best)
    throw InternalError("partial_fraction_divisor: admissible j set empty");
  return *best;
}

SeparationResult second_derivative_separation(const EigenSystem& E,
                                              std::span<const long> ell,
                                              std::span<const long> n) {
  if (!E.has_dirichlet() || !E.has_neumann())
    throw InvalidInput(
        "second_derivative_separation: Dirichlet and Neumann spectra of the "
        "same potential required (periodic-even system)");
  auto pf = partial_fraction_divisor(ell, n);
  Potential W;
  W.cos_coef.assign(pf.j + 1, 0.0);
  W.cos_coef[pf.j] = 1.0;

  SeparationResult out;
  out.j = pf.j;
  for (std::size_t k = 0; k < n.size(); ++k) {
    if (n[k] == 0) {
      out.second_derivative +=
          2.0 * double(ell[k]) * eigenvalue_second_derivative(E, 0, W).value;
    } else {
      out.second_derivative +=
          double(ell[k]) *
          (eigenvalue_second_derivative(E, int(n[k]), W).value +
           eigenvalue_second_derivative(E, -int(n[k]), W).value);
    }
    out.reference +=
        2.0 * double(ell[k]) / double(4 * n[k] * n[k] - pf.j * pf.j);
  }
  return out;
}

namespace {
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t trial) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (trial + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}
}  // namespace

GenericityReport genericity_montecarlo(const GenericityConfig& cfg) {
  GenericityReport rep;
  rep.law = cfg.law;
  rep.s = cfg.s;
  rep.trials = cfg.trials;
  rep.r = cfg.r;
  rep.N = cfg.N;
  rep.index_range = cfg.index_range;
  rep.seed = cfg.seed;
  rep.condition_norm_below = cfg.condition_norm_below;
  if (cfg.trials <= 0) return rep;

  const int radius = cfg.index_range.radius;
  const int galerkin =
      cfg.galerkin_dim > 0 ? cfg.galerkin_dim : std::max(8 * radius, 32);

  for (int t = 0; t < cfg.trials; ++t) {
    std::mt19937_64 rng(mix_seed(cfg.seed, std::uint64_t(t)));
    GenericityTrial trial;
    trial.trial = std::uint64_t(t);

    NonResonanceCertificate cert;
    if (cfg.law == PotentialLaw::UniformConvolution) {
      auto vhat = random_uniform_convolution(cfg.s, radius, rng);
      double norm = 0;
      for (auto& [nn, v] : vhat)
        norm = std::max(norm, std::abs(v) * std::pow(nn.jb(), cfg.s));
      trial.potential_norm = norm;
      auto om = nls2_frequencies(vhat, radius);
      cert = verify_strong_nonresonance(om, cfg.r, cfg.N, cfg.index_range);
    } else {
      Potential V;
      int rejections = 0;
      for (;;) {
        V = (cfg.law == PotentialLaw::GaussianFourier)
                ? random_gaussian_fourier(cfg.s, cfg.potential_modes, rng)
                : random_gaussian_cosine(cfg.s, cfg.potential_modes, rng);
        double norm = (cfg.law == PotentialLaw::GaussianFourier)
                          ? V.h1_norm_T()
                          : V.h1_norm_0pi();
        trial.potential_norm = norm;
        if (!cfg.condition_norm_below || norm < *cfg.condition_norm_below)
          break;
        if (++rejections >= 1000)
          throw InvalidInput(
              "genericity_montecarlo: conditioning rejected 1000 samples");
      }
      trial.rejections = rejections;
      if (cfg.law == PotentialLaw::GaussianFourier) {
        auto E = dirichlet_spectrum(V, radius, galerkin);
        cert = verify_strong_nonresonance(E.frequencies(), cfg.r, cfg.N,
                                          cfg.index_range);
      } else {
        auto E = periodic_spectrum_even(V, radius, galerkin);
        cert = verify_limited_nonresonance(E.frequencies(), cfg.r, cfg.N,
                                           cfg.index_range);
      }
    }
    trial.min_divisor = cert.min_divisor;
    trial.violations = cert.violations.size();
    rep.total_violations += int(cert.violations.size());
    rep.per_trial.push_back(trial);
  }
  int clean = 0;
  for (auto& t : rep.per_trial)
    if (t.violations == 0) ++clean;
  rep.violation_free_fraction = double(clean) / double(cfg.trials);

  std::vector<std::uint64_t> order(rep.per_trial.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::uint64_t a, std::uint64_t b) {
    return rep.per_trial[a].min_divisor < rep.per_trial[b].min_divisor;
  });
  order.resize(std::min<std::size_t>(order.size(), 5));
  rep.worst_trials = order;
  return rep;
}

}  // namespace birkhoff
