#include "birkhoff/normalform.hpp"

#include <random>

#include "birkhoff/resonance.hpp"

namespace birkhoff {

SplitResult split_resonant(const PolyHamiltonian& Q,
                           const FrequencyFamily& omega, double N) {
  SplitResult out{PolyHamiltonian(Q.lattice), PolyHamiltonian(Q.lattice)};
  std::vector<std::int8_t> sig;
  std::vector<ModeIndex> idx;
  for (const auto& [deg, keys] : Q.terms) {
    for (const auto& [key, c] : keys) {
      sig.clear();
      idx.clear();
      for (const auto& p : key) {
        sig.push_back(p.sigma);
        idx.push_back(p.n);
      }
      double kap = kappa(omega, sig, idx);
      (kap <= N ? out.low : out.resonant).terms[deg][key] = c;
    }
  }
  return out;
}

HomologicalResult solve_homological(const PolyHamiltonian& L,
                                    const FrequencyFamily& omega,
                                    double divisor_floor) {
  HomologicalResult out;
  out.chi = PolyHamiltonian(L.lattice);
  for (const auto& [deg, keys] : L.terms) {
    for (const auto& [key, c] : keys) {
      double div = 0;
      for (const auto& p : key) div += double(p.sigma) * omega.at(p.n);
      if (std::abs(div) <= divisor_floor || div == 0.0)
        throw ResonanceViolation(
            "solve_homological: divisor " + std::to_string(div) +
                " below floor at key " + key_str(key),
            "{\"key\":\"" + key_str(key) +
                "\",\"divisor\":" + std::to_string(div) + "}");
      out.min_divisor = std::min(out.min_divisor, std::abs(div));
      // c / (i div) = -i c / div
      out.chi.terms[deg][key] = Complex(0.0, -1.0 / div) * c;
    }
  }
  return out;
}

LieExpandResult lie_expand(const QuadraticDiagonal& Z2,
                           const std::map<int, PolyHamiltonian>& Qs,
                           const PolyHamiltonian& chi, int r, int r_star,
                           int ledger_max_degree) {
  const Lattice lat = chi.lattice;
  LieExpandResult out;
  out.tail = PolyHamiltonian(lat);
  out.q_new = Qs;
  if (chi.empty()) return out;

  // {chi, Z2} = -L reconstructs the eliminated part
  PolyHamiltonian L = Z2.poisson_with(chi) * -1.0;

  auto route = [&](int deg, const PolyHamiltonian& term, double coef) {
    if (deg < r) {
      auto it = out.q_new.find(deg);
      if (it == out.q_new.end())
        it = out.q_new.emplace(deg, PolyHamiltonian(lat)).first;
      it->second += term * coef;
    } else if (deg <= ledger_max_degree) {
      out.tail += term * coef;
    }
  };

  // ad_chi^k chains from each Q^(j*), Taylor weights 1/k!
  for (const auto& [j_star, q] : Qs) {
    if (q.empty()) continue;
    PolyHamiltonian a = q;
    double factorial = 1.0;
    for (int k = 1;; ++k) {
      int deg = j_star + k * (r_star - 2);
      if (deg >= r && deg > ledger_max_degree) break;
      a = poisson_bracket(chi, a);
      if (a.empty()) break;
      factorial *= k;
      route(deg, a, 1.0 / factorial);
    }
  }
  // Q#^(r_star) = Q^(r_star) - L = U
  route(r_star, L, -1.0);
  // -ad_chi^k L / (k+1)! chain (iterated brackets of Z2)
  {
    PolyHamiltonian a = L;
    double factorial = 1.0;  // (k+1)! running
    for (int k = 1;; ++k) {
      int deg = r_star + k * (r_star - 2);
      if (deg >= r && deg > ledger_max_degree) break;
      a = poisson_bracket(chi, a);
      if (a.empty()) break;
      factorial *= (k + 1);
      route(deg, a, -1.0 / factorial);
    }
  }
  return out;
}

State ComposedFlow::apply(const State& u) const {
  FlowOptions opts;
  opts.want_roundtrip = false;
  State x = u;
  for (const PolyHamiltonian* chi : gens) x = flow(*chi, x, time, tol, opts).u;
  return x;
}

std::pair<State, Eigen::MatrixXd> ComposedFlow::apply_with_differential(
    const State& u) const {
  FlowOptions opts;
  opts.want_roundtrip = false;
  opts.want_differential = true;
  opts.symplectic_samples = 0;
  DenseMap map(lattice);
  Eigen::MatrixXd M =
      Eigen::MatrixXd::Identity(2 * map.size(), 2 * map.size());
  State x = u;
  for (const PolyHamiltonian* chi : gens) {
    auto res = flow(*chi, x, time, tol, opts);
    M = (*res.dphi) * M;
    x = res.u;
  }
  return {x, M};
}

ComposedFlow NormalFormOutput::tau1() const {
  ComposedFlow f;
  f.time = 1.0;
  f.tol = config.flow_tol;
  f.lattice = q_res.lattice;
  // tau1 = Phi_{chi_1} o ... o Phi_{chi_K}: apply the last generator first
  for (auto it = generators.rbegin(); it != generators.rend(); ++it)
    f.gens.push_back(&*it);
  return f;
}

ComposedFlow NormalFormOutput::tau0() const {
  ComposedFlow f;
  f.time = -1.0;
  f.tol = config.flow_tol;
  f.lattice = q_res.lattice;
  for (const auto& g : generators) f.gens.push_back(&g);
  return f;
}

double NormalFormOutput::evaluate_h(const State& u) const {
  return z2.value(u) + evaluate(p_input, u);
}

double NormalFormOutput::remainder(const State& u) const {
  return evaluate_h(tau1().apply(u)) - z2.value(u) - evaluate(q_res, u);
}

double NormalFormOutput::ledger_value(const State& u) const {
  return evaluate(tail_ledger, u);
}

namespace {

/// Measured vector-field constant: max over unit-norm probes of
/// ||grad chi(u)||_{h^s} / ||chi||_{q,alpha} (grad chi is homogeneous).
double vector_field_constant(const PolyHamiltonian& chi, double s,
                             double chi_norm, std::uint64_t seed) {
  if (chi.empty() || chi_norm == 0) return 0.0;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  auto ms = chi.lattice.modes();
  double best = 0;
  for (int t = 0; t < 24; ++t) {
    State u(chi.lattice);
    for (const auto& n : ms) u.amp[n] = Complex{g(rng), g(rng)};
    double nn = u.hs_norm(s);
    for (auto& [n, a] : u.amp) a /= nn;
    best = std::max(best, gradient(chi, u).hs_norm(s));
  }
  // basis probes catch concentrated generators
  for (const auto& n : ms) {
    State u(chi.lattice);
    u.amp[n] = std::pow(n.jb(), -s);
    best = std::max(best, gradient(chi, u).hs_norm(s));
  }
  return 2.0 * best / chi_norm;  // factor-2 sampling safety
}

}  // namespace

NormalFormOutput birkhoff_normal_form(const QuadraticDiagonal& Z2,
                                      const PolyHamiltonian& P,
                                      const NormalFormConfig& config) {
  const int p = config.p, r = config.r;
  if (!(3 <= p && p <= r))
    throw InvalidInput("birkhoff_normal_form: need 3 <= p <= r");
  if (!(config.N >= 1 && config.N <= config.N_max))
    throw InvalidInput("birkhoff_normal_form: need 1 <= N <= N_max");
  if (!(config.eta > 0)) throw InvalidInput("birkhoff_normal_form: eta > 0");
  const int max_deg = std::max(p, r - 1);
  if (!P.empty() && (P.min_degree() < p || P.max_degree() > max_deg))
    throw InvalidInput(
        "birkhoff_normal_form: P degrees must lie in [p, max(p, r-1)]");
  const int ledger_cut =
      config.ledger_max_degree > 0 ? config.ledger_max_degree : r + 1;

  NormalFormOutput out;
  out.config = config;
  out.z2 = Z2;
  out.p_input = P;
  out.q_res = PolyHamiltonian(P.lattice);
  out.tail_ledger = PolyHamiltonian(P.lattice);

  std::map<int, PolyHamiltonian> Qs;
  for (int j = p; j <= max_deg; ++j) Qs.emplace(j, P.homogeneous_part(j));

  // (C, b) recursion state; N-exponents carry the admitted certificate's
  // beta_{r_star}, C's come from the measured norms.
  std::map<int, double> b2;
  for (int j = p; j <= max_deg; ++j) b2[j] = 0.0;
  double b1 = 0.0, C1 = 1.0;
  out.epsilon0 = std::numeric_limits<double>::infinity();

  const int last_step = (r == p) ? p : r - 1;
  for (int r_star = p; r_star <= last_step; ++r_star) {
    StepCertificate step;
    step.r_star = r_star;

    auto [L, U] = split_resonant(Qs.at(r_star), Z2.omega, config.N);
    (void)U;
    double beta_r = 0.0, gamma_r = 0.0;
    if (auto it = config.resonance_constants.find(r_star);
        it != config.resonance_constants.end()) {
      gamma_r = it->second.first;
      beta_r = it->second.second;
    }
    step.divisor_floor =
        std::max(config.gamma_floor,
                 gamma_r > 0 ? gamma_r * std::pow(config.N, -beta_r) : 0.0);

    PolyHamiltonian chi(P.lattice);
    if (!L.empty()) {
      auto hom = solve_homological(L, Z2.omega, step.divisor_floor);
      chi = std::move(hom.chi);
      step.min_divisor = hom.min_divisor;
      out.min_divisor = std::min(out.min_divisor, hom.min_divisor);
    }
    step.chi_norm = norm_q_alpha(chi, config.q, config.alpha);

    auto lie = lie_expand(Z2, Qs, chi, r, r_star, ledger_cut);
    // transport the previous ledger through the same conjugation
    if (!out.tail_ledger.empty() && !chi.empty()) {
      PolyHamiltonian a = out.tail_ledger;
      PolyHamiltonian transported = out.tail_ledger;
      double factorial = 1.0;
      for (int k = 1;; ++k) {
        if (a.empty() || a.min_degree() + (r_star - 2) > ledger_cut) break;
        a = poisson_bracket(chi, a);
        for (auto it = a.terms.begin(); it != a.terms.end();) {
          if (it->first > ledger_cut)
            it = a.terms.erase(it);
          else
            ++it;
        }
        if (a.empty()) break;
        factorial *= k;
        transported += a * (1.0 / factorial);
      }
      out.tail_ledger = std::move(transported);
    }
    step.ledger_mass_added = lie.tail.coefficient_mass();
    out.tail_ledger += lie.tail;
    Qs = std::move(lie.q_new);
    for (auto& [j, qh] : Qs)
      step.q_norms[j] = norm_q_alpha(qh, config.q, config.alpha);

    // measured admissible radius of this step's flow
    if (!chi.empty()) {
      double cvf = vector_field_constant(chi, config.s, step.chi_norm,
                                         0xb1f + std::uint64_t(r_star));
      double K = std::pow(3.0, r_star - 1) * cvf;
      step.eps1 = (K > 0 && step.chi_norm > 0)
                      ? std::pow(K * step.chi_norm, -1.0 / (r_star - 2))
                      : std::numeric_limits<double>::infinity();
      out.epsilon0 = std::min(out.epsilon0, step.eps1 / 3.0);

      double b_chi = beta_r + b2[r_star];
      double C_chi = step.chi_norm * std::pow(config.eta, r_star - 2) /
                     std::pow(config.N, b_chi);
      if (K > 0 && C_chi > 0)
        C1 = std::max(
            {C1, 3.0 * std::pow(K * C_chi, 1.0 / (r_star - 2)), 3.0});
      b1 = std::max(b1, b_chi / (r_star - 2));
      std::map<int, double> b2_new = b2;
      for (int j = r_star + 1; j <= max_deg; ++j) {
        for (int j_star = p; j_star <= max_deg; ++j_star) {
          int diff = j - j_star;
          if (diff > 0 && diff % (r_star - 2) == 0)
            b2_new[j] = std::max(
                b2_new[j], (diff / (r_star - 2)) * b_chi + b2[j_star]);
        }
      }
      b2 = std::move(b2_new);
    }

    out.generators.push_back(std::move(chi));
    out.steps.push_back(std::move(step));
  }

  for (auto& [j, qh] : Qs) out.q_res += qh;
  out.proof_b = b1;
  out.proof_C = C1;
  if (!std::isfinite(out.epsilon0)) out.epsilon0 = config.eta;

  // certificate sanity: every Q_res key must have kappa > N
  for (const auto& [deg, keys] : out.q_res.terms) {
    for (const auto& [key, c] : keys) {
      if (std::abs(c) == 0.0) continue;
      std::vector<std::int8_t> sig;
      std::vector<ModeIndex> idx;
      for (const auto& pr : key) {
        sig.push_back(pr.sigma);
        idx.push_back(pr.n);
      }
      if (kappa(Z2.omega, sig, idx) <= config.N)
        throw InternalError(
            "birkhoff_normal_form: resonant part kept a kappa <= N key " +
            key_str(key));
    }
  }
  return out;
}

ConjugacyReport verify_conjugacy(const NormalFormOutput& out, int samples,
                                 double radius, std::uint64_t seed) {
  ConjugacyReport rep;
  rep.samples = samples;
  rep.radius = radius;
  rep.dtau_bound = std::pow(2.0, out.config.r - out.config.p);
  const double s = out.config.s;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  auto t0 = out.tau0();
  auto t1 = out.tau1();
  DenseMap map(out.q_res.lattice);
  auto opnorm = [&](const Eigen::MatrixXd& M, double ss) {
    Eigen::VectorXd w = map.jb_weights(ss);
    Eigen::MatrixXd scaled = M;
    for (int i = 0; i < map.size(); ++i) {
      scaled.row(2 * i) *= w[i];
      scaled.row(2 * i + 1) *= w[i];
      scaled.col(2 * i) /= w[i];
      scaled.col(2 * i + 1) /= w[i];
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(scaled);
    return svd.singularValues()[0];
  };

  for (int t = 0; t < samples; ++t) {
    State u(out.q_res.lattice);
    for (const auto& n : out.q_res.lattice.modes())
      u.amp[n] = Complex{g(rng), g(rng)};
    double nn = u.hs_norm(s);
    if (nn > 0)
      for (auto& [n, a] : u.amp) a *= radius / nn;

    auto [v, dtau0] = t0.apply_with_differential(u);
    auto [back, dtau1] = t1.apply_with_differential(v);

    State diff = back;
    for (const auto& [n, a] : u.amp) diff.amp[n] -= a;
    rep.max_roundtrip = std::max(rep.max_roundtrip, diff.hs_norm(s));

    double bound = std::pow(u.hs_norm(s) / out.epsilon0, out.config.p - 2) *
                   u.hs_norm(s);
    State d0 = v;
    for (const auto& [n, a] : u.amp) d0.amp[n] -= a;
    State fwd = t1.apply(u);
    State d1 = fwd;
    for (const auto& [n, a] : u.amp) d1.amp[n] -= a;
    if (bound > 0)
      rep.max_closeness_ratio =
          std::max({rep.max_closeness_ratio, d0.hs_norm(s) / bound,
                    d1.hs_norm(s) / bound});

    double rem = out.remainder(u);
    double defect = std::abs(out.evaluate_h(t1.apply(u)) - out.z2.value(u) -
                             evaluate(out.q_res, u) - rem);
    rep.max_defect = std::max(rep.max_defect, defect);
    double led = out.ledger_value(u);
    rep.max_ledger_mismatch =
        std::max(rep.max_ledger_mismatch,
                 std::abs(rem - led) / std::max(std::abs(rem), 1e-300));

    rep.max_dtau_hs =
        std::max({rep.max_dtau_hs, opnorm(dtau0, s), opnorm(dtau1, s)});
    rep.max_dtau_hneg =
        std::max({rep.max_dtau_hneg, opnorm(dtau0, -s), opnorm(dtau1, -s)});
  }
  rep.roundtrip_ok = rep.max_roundtrip <= 10 * out.config.flow_tol;
  rep.closeness_ok = rep.max_closeness_ratio <= 1.0 + 1e-9;
  rep.dtau_ok = rep.max_dtau_hs <= rep.dtau_bound &&
                rep.max_dtau_hneg <= rep.dtau_bound;
  return rep;
}

RemainderScaling remainder_scaling(const NormalFormOutput& out,
                                   std::span<const double> radii,
                                   int directions, std::uint64_t seed) {
  RemainderScaling rs;
  const double s = out.config.s;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  auto lat = out.q_res.lattice;
  auto ms = lat.modes();

  // base state and probe directions shared across radii so the slope fit
  // is clean
  State base(lat);
  for (const auto& n : ms) base.amp[n] = Complex{g(rng), g(rng)};
  double bn = base.hs_norm(s);
  for (auto& [n, a] : base.amp) a /= bn;
  std::vector<State> dirs;
  for (int d = 0; d < directions; ++d) {
    State e(lat);
    for (const auto& n : ms) e.amp[n] = Complex{g(rng), g(rng)};
    dirs.push_back(e);
  }

  for (double radius : radii) {
    State u = base;
    for (auto& [n, a] : u.amp) a *= radius;
    double best = 0;
    for (const auto& e : dirs) {
      double fd_eps = 1e-3 * radius;
      State up = u, um = u;
      for (const auto& [n, a] : e.amp) {
        up.amp[n] += fd_eps * a;
        um.amp[n] -= fd_eps * a;
      }
      double der = (out.remainder(up) - out.remainder(um)) / (2 * fd_eps);
      double en = e.hs_norm(-s);
      if (en > 0) best = std::max(best, std::abs(der) / en);
    }
    rs.points.emplace_back(radius, best);
    if (best > 1e-300) rs.exact_zero = false;
  }
  if (!rs.exact_zero && rs.points.size() >= 2) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int c = 0;
    for (auto& [x0, y0] : rs.points) {
      if (y0 <= 0) continue;
      double x = std::log(x0), y = std::log(y0);
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
      ++c;
    }
    if (c >= 2) rs.slope = (c * sxy - sx * sy) / (c * sxx - sx * sx);
  }
  return rs;
}

}  // namespace birkhoff
