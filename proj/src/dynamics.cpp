#include "birkhoff/dynamics.hpp"

#include <cmath>
#include <numbers>
#include <random>

namespace birkhoff {

namespace {
constexpr double kPi = std::numbers::pi;

Eigen::VectorXcd apply_real(const Eigen::MatrixXd& A,
                            const Eigen::VectorXcd& v) {
  return A * v.real() + Complex(0, 1) * (A * v.imag()).eval();
}
}  // namespace

int NonlinearityLadder::min_order() const {
  for (const auto& [j, gj] : terms) {
    bool nonzero = false;
    for (double c : gj.cos_coef) nonzero |= (c != 0.0);
    for (double c : gj.sin_coef) nonzero |= (c != 0.0);
    if (nonzero) return j;
  }
  return 99;  // identically zero nonlinearity
}

double NonlinearityLadder::value(double x, double y) const {
  double acc = 0;
  for (const auto& [j, gj] : terms) {
    double f = 1;
    for (int t = 2; t <= j; ++t) f *= t;
    acc += gj.value(x) * std::pow(y, j) / f;
  }
  return acc;
}

double NonlinearityLadder::antiderivative(double x, double y) const {
  double acc = 0;
  for (const auto& [j, gj] : terms) {
    double f = 1;
    for (int t = 2; t <= j + 1; ++t) f *= t;
    acc += gj.value(x) * std::pow(y, j + 1) / f;
  }
  return acc;
}

double ModelSpec::s_default() const {
  return kind == ModelKind::KG1D ? 0.5 : 1.0;
}

int ModelSpec::p_order() const {
  int j0 = g.min_order();
  return kind == ModelKind::KG1D ? j0 + 1 : 2 * j0 + 2;
}

Lattice Simulator::state_lattice() const {
  switch (spec_.kind) {
    case ModelKind::KG1D:
      return positive_line(spec_.truncation_radius);
    case ModelKind::NLS1D_Dir:
      return positive_line(int(sturm_->dir_vals.size()));
    case ModelKind::NLS1D_Per:
      return full_line(int(sturm_->dir_vals.size()));
    case ModelKind::NLS2D_Conv:
      return square(spec_.truncation_radius);
  }
  return {};
}

Simulator::Simulator(ModelSpec spec) : spec_(std::move(spec)) {
  const int R = spec_.truncation_radius;
  switch (spec_.kind) {
    case ModelKind::KG1D: {
      if (!(spec_.mass > -1.0)) throw InvalidInput("KG requires m > -1");
      omega_ = kg_frequencies(spec_.mass, R);
      int kg_max = 0, j_max = 1;
      for (const auto& [j, gj] : spec_.g.terms) {
        kg_max = std::max(kg_max, gj.max_wavenumber());
        j_max = std::max(j_max, j);
      }
      int intervals = kg_max + (j_max + 1) * R + 16;
      grid_.resize(intervals + 1);
      quad_w_.assign(intervals + 1, kPi / intervals);
      quad_w_.front() *= 0.5;
      quad_w_.back() *= 0.5;
      for (int i = 0; i <= intervals; ++i) grid_[i] = kPi * i / intervals;
      Eigen::MatrixXd S(intervals + 1, R);
      for (int i = 0; i <= intervals; ++i)
        for (int k = 1; k <= R; ++k)
          S(i, k - 1) = std::sqrt(2.0 / kPi) * std::sin(k * grid_[i]);
      to_grid_ = S;
      Eigen::MatrixXd W = Eigen::MatrixXd::Zero(intervals + 1, intervals + 1);
      for (int i = 0; i <= intervals; ++i) W(i, i) = quad_w_[i];
      from_grid_ = S.transpose() * W;
      colloc_x_ = grid_;
      break;
    }
    case ModelKind::NLS1D_Dir: {
      int D = spec_.galerkin_dim > 0 ? spec_.galerkin_dim
                                     : std::max(4 * R, 32);
      sturm_ = dirichlet_spectrum(spec_.V, R, D);
      std::map<ModeIndex, double> om;
      for (int n = 1; n <= D; ++n) om[mode(n)] = sturm_->dir_vals[n - 1];
      omega_ = frequencies_from_map(positive_line(D), std::move(om));
      colloc_x_.resize(D);
      for (int i = 0; i < D; ++i) colloc_x_[i] = (i + 1) * kPi / (D + 1);
      quad_w_.assign(D, kPi / (D + 1));
      Eigen::MatrixXd S(D, D);
      for (int i = 0; i < D; ++i)
        for (int k = 0; k < D; ++k)
          S(i, k) = std::sqrt(2.0 / (D + 1)) *
                    std::sin((i + 1.0) * (k + 1.0) * kPi / (D + 1));
      double c = std::sqrt((D + 1) / kPi);
      to_grid_ = c * S * sturm_->dir_vecs;
      from_grid_ = (1.0 / c) * sturm_->dir_vecs.transpose() * S.transpose();
      break;
    }
    case ModelKind::NLS1D_Per: {
      int D = spec_.galerkin_dim > 0 ? spec_.galerkin_dim
                                     : std::max(4 * R, 32);
      sturm_ = periodic_spectrum_even(spec_.V, R, D);
      const int M = 2 * D + 1;
      std::map<ModeIndex, double> om;
      for (int n = 1; n <= D; ++n) {
        om[mode(n)] = sturm_->dir_vals[n - 1];
        om[mode(-n)] = sturm_->neu_vals[n];
      }
      om[mode(0)] = sturm_->neu_vals[0];
      omega_ = frequencies_from_map(full_line(D), std::move(om));
      colloc_x_.resize(M);
      for (int j = 0; j < M; ++j) colloc_x_[j] = 2.0 * kPi * j / M;
      quad_w_.assign(M, 2.0 * kPi / M);
      // trig layout: [a0; a_1..a_D; b_1..b_D] in the orthonormal T basis
      Eigen::MatrixXd T(M, M);
      for (int j = 0; j < M; ++j) {
        T(j, 0) = 1.0 / std::sqrt(2.0 * kPi);
        for (int k = 1; k <= D; ++k) {
          T(j, k) = std::cos(k * colloc_x_[j]) / std::sqrt(kPi);
          T(j, D + k) = std::sin(k * colloc_x_[j]) / std::sqrt(kPi);
        }
      }
      // Sturm -> trig block map: modes ordered -D..D
      Eigen::MatrixXd B = Eigen::MatrixXd::Zero(M, M);
      for (int n = 0; n <= D; ++n)          // column of w_{-n}
        for (int k = 0; k <= D; ++k) B(k, D - n) = sturm_->neu_vecs(k, n);
      for (int n = 1; n <= D; ++n)          // column of w_{n}
        for (int k = 1; k <= D; ++k)
          B(D + k, D + n) = sturm_->dir_vecs(k - 1, n - 1);
      to_grid_ = T * B;
      from_grid_ = (2.0 * kPi / M) * B.transpose() * T.transpose();
      break;
    }
    case ModelKind::NLS2D_Conv: {
      omega_ = nls2_frequencies(spec_.vhat, R);
      const int M = 2 * R + 1;
      dft_.resize(M, M);
      for (int j = 0; j < M; ++j)
        for (int a = 0; a < M; ++a) {
          double phase = 2.0 * kPi * j * (a - R) / M;
          dft_(j, a) = std::polar(1.0, phase);
        }
      break;
    }
  }
}

Eigen::VectorXcd Simulator::half_linear_phase(double dt) const {
  auto ms = state_lattice().modes();
  Eigen::VectorXcd ph(Eigen::Index(ms.size()));
  for (std::size_t i = 0; i < ms.size(); ++i)
    ph[Eigen::Index(i)] = std::polar(1.0, -omega_.at(ms[i]) * dt / 2);
  return ph;
}

void Simulator::step(Eigen::VectorXcd& w, double dt) const {
  switch (spec_.kind) {
    case ModelKind::KG1D: {
      // nonlinear sub-flow in real variables: Phi fixed, Psi += dt g(x,Phi)
      const int R = spec_.truncation_radius;
      Eigen::VectorXd phi(R), psi(R);
      for (int k = 0; k < R; ++k) {
        double rt = std::sqrt(omega_.at(mode(k + 1)));
        phi[k] = w[k].real() / rt;
        psi[k] = w[k].imag() * rt;
      }
      Eigen::VectorXd phig = to_grid_ * phi;
      Eigen::VectorXd gg(phig.size());
      for (int i = 0; i < phig.size(); ++i)
        gg[i] = spec_.g.value(colloc_x_[i], phig[i]);
      psi += dt * (from_grid_ * gg);
      for (int k = 0; k < R; ++k) {
        double rt = std::sqrt(omega_.at(mode(k + 1)));
        w[k] = Complex(phi[k] * rt, psi[k] / rt);
      }
      break;
    }
    case ModelKind::NLS1D_Dir:
    case ModelKind::NLS1D_Per: {
      Eigen::VectorXcd grid = apply_real(to_grid_, w);
      for (int i = 0; i < grid.size(); ++i) {
        double y = std::norm(grid[i]);
        grid[i] *= std::polar(1.0, -dt * spec_.g.value(colloc_x_[i], y));
      }
      w = apply_real(from_grid_, grid);
      break;
    }
    case ModelKind::NLS2D_Conv: {
      const int R = spec_.truncation_radius;
      const int M = 2 * R + 1;
      Eigen::MatrixXcd W(M, M);
      auto ms = state_lattice().modes();
      for (std::size_t i = 0; i < ms.size(); ++i)
        W(ms[i].c[0] + R, ms[i].c[1] + R) = w[Eigen::Index(i)];
      Eigen::MatrixXcd U = dft_ * W * dft_.transpose();
      for (int a = 0; a < M; ++a)
        for (int b = 0; b < M; ++b)
          U(a, b) *= std::polar(1.0, -dt * std::norm(U(a, b)));
      W = (dft_.adjoint() * U * dft_.conjugate()) / double(M) / double(M);
      for (std::size_t i = 0; i < ms.size(); ++i)
        w[Eigen::Index(i)] = W(ms[i].c[0] + R, ms[i].c[1] + R);
      break;
    }
  }
}

double Simulator::energy(const State& u) const {
  DenseMap map(state_lattice());
  Eigen::VectorXcd w = map.to_dense(u);
  double quad = 0;
  auto ms = map.modes;
  for (std::size_t i = 0; i < ms.size(); ++i)
    quad += 0.5 * omega_.at(ms[i]) * std::norm(w[Eigen::Index(i)]);
  switch (spec_.kind) {
    case ModelKind::KG1D: {
      const int R = spec_.truncation_radius;
      Eigen::VectorXd phi(R);
      for (int k = 0; k < R; ++k)
        phi[k] = w[k].real() / std::sqrt(omega_.at(mode(k + 1)));
      Eigen::VectorXd phig = to_grid_ * phi;
      double nl = 0;
      for (int i = 0; i < phig.size(); ++i)
        nl += quad_w_[i] * spec_.g.antiderivative(colloc_x_[i], phig[i]);
      return quad - nl;
    }
    case ModelKind::NLS1D_Dir:
    case ModelKind::NLS1D_Per: {
      Eigen::VectorXcd grid = apply_real(to_grid_, w);
      double nl = 0;
      for (int i = 0; i < grid.size(); ++i)
        nl += quad_w_[i] *
              spec_.g.antiderivative(colloc_x_[i], std::norm(grid[i]));
      return quad + 0.5 * nl;
    }
    case ModelKind::NLS2D_Conv: {
      const int R = spec_.truncation_radius;
      const int M = 2 * R + 1;
      Eigen::MatrixXcd W = Eigen::MatrixXcd::Zero(M, M);
      for (std::size_t i = 0; i < ms.size(); ++i)
        W(ms[i].c[0] + R, ms[i].c[1] + R) = w[Eigen::Index(i)];
      Eigen::MatrixXcd U = dft_ * W * dft_.transpose();
      double quart = 0;
      for (int a = 0; a < M; ++a)
        for (int b = 0; b < M; ++b) {
          double y = std::norm(U(a, b));
          quart += y * y;
        }
      return quad + quart / (4.0 * M * M);
    }
  }
  return quad;
}

double Simulator::mass(const State& u) const {
  double s = 0;
  for (const auto& [n, a] : u.amp) s += std::norm(a);
  return s;
}

Trace Simulator::run(const State& u0, double T, double dt,
                     IntegrateOptions opts) const {
  Lattice lat = state_lattice();
  DenseMap map(lat);
  for (const auto& [n, a] : u0.amp)
    if (!lat.contains(n))
      throw InvalidInput("Simulator::run: initial datum outside the state "
                         "lattice " +
                         lat.str());
  Eigen::VectorXcd w = Eigen::VectorXcd::Zero(map.size());
  for (const auto& [n, a] : u0.amp) w[map.pos.at(n)] = a;

  Trace tr;
  tr.kind = spec_.kind;
  tr.s = spec_.s_default();
  tr.dt = dt;
  const bool is_nls = spec_.kind != ModelKind::KG1D;

  for (const auto& grp : omega_.groups)
    if (grp.front().jb() <= opts.track_cut) tr.tracked.push_back(grp.front());
  if (opts.store_amplitudes) tr.amp_modes = map.modes;
  tr.J.resize(tr.tracked.size());
  tr.amplitudes.resize(tr.amp_modes.size());
  if (spec_.kind == ModelKind::KG1D) tr.En.resize(tr.tracked.size());

  auto record = [&](double t) {
    State u = map.to_state(w);
    tr.times.push_back(t);
    tr.hs_norm.push_back(u.hs_norm(tr.s));
    tr.energy.push_back(energy(u));
    tr.mass.push_back(is_nls ? mass(u) : 0.0);
    for (std::size_t gidx = 0; gidx < tr.tracked.size(); ++gidx) {
      double J = 0;
      for (const auto& k : omega_.groups[omega_.group_of(tr.tracked[gidx])])
        J += std::norm(w[map.pos.at(k)]);
      tr.J[gidx].push_back(J);
      if (spec_.kind == ModelKind::KG1D)
        tr.En[gidx].push_back(0.5 * kPi *
                              std::norm(w[map.pos.at(tr.tracked[gidx])]));
    }
    for (std::size_t i = 0; i < tr.amp_modes.size(); ++i)
      tr.amplitudes[i].push_back(std::abs(w[Eigen::Index(i)]));
  };

  const long n_steps = std::lround(std::abs(T) / std::abs(dt));
  const double sgn = T >= 0 ? 1.0 : -1.0;
  Eigen::VectorXcd half = half_linear_phase(sgn * std::abs(dt));
  const double norm0 = std::max(w.norm(), 1e-12);

  record(0.0);
  for (long k = 0; k < n_steps; ++k) {
    w.array() *= half.array();
    step(w, sgn * std::abs(dt));
    w.array() *= half.array();
    if (w.norm() > opts.blowup_factor * norm0) {
      tr.aborted = true;
      record(sgn * (k + 1) * std::abs(dt));
      break;
    }
    if ((k + 1) % opts.stride == 0 || k + 1 == n_steps)
      record(sgn * (k + 1) * std::abs(dt));
  }
  return tr;
}

Trace integrate(const ModelSpec& model, const State& u0, double T, double dt,
                IntegrateOptions opts) {
  return Simulator(model).run(u0, T, dt, opts);
}

State kg_complexify(std::span<const double> phi, std::span<const double> psi,
                    double m) {
  if (!(m > -1.0)) throw InvalidInput("kg_complexify: m > -1 required");
  if (phi.size() != psi.size())
    throw InvalidInput("kg_complexify: size mismatch");
  State u(positive_line(int(phi.size())));
  for (std::size_t k = 0; k < phi.size(); ++k) {
    double n = double(k + 1);
    double rt = std::pow(n * n + m, 0.25);
    Complex a{rt * phi[k], psi[k] / rt};
    if (a != Complex{}) u.amp[mode(int(k + 1))] = a;
  }
  return u;
}

std::pair<std::vector<double>, std::vector<double>> kg_decomplexify(
    const State& u, double m) {
  int R = u.lattice.radius;
  std::vector<double> phi(R, 0.0), psi(R, 0.0);
  for (const auto& [n, a] : u.amp) {
    double rt = std::pow(double(n.c[0]) * n.c[0] + m, 0.25);
    phi[n.c[0] - 1] = a.real() / rt;
    psi[n.c[0] - 1] = a.imag() * rt;
  }
  return {phi, psi};
}

double harmonic_energy(std::span<const double> phi,
                       std::span<const double> psi, double m, int n) {
  // int_0^pi sin(nx) f = sqrt(pi/2) f_n for orthonormal coefficients
  double wn = std::sqrt(double(n) * n + m);
  double a = std::sqrt(kPi / 2) * phi[n - 1];
  double b = std::sqrt(kPi / 2) * psi[n - 1];
  return wn * a * a + b * b / wn;
}

CoercivityReport coercivity_check(const ModelSpec& model, const State& u) {
  Simulator sim(model);
  CoercivityReport rep;
  double rho = 0;
  if (model.kind == ModelKind::NLS1D_Dir ||
      model.kind == ModelKind::NLS1D_Per) {
    for (int i = 0; i <= 256; ++i)
      rho = std::max(rho, std::abs(model.V.value(kPi * i / 256)));
  } else if (model.kind == ModelKind::NLS2D_Conv) {
    for (const auto& [n, v] : model.vhat) rho += std::abs(v);
  }
  const double s = model.s_default();
  double base_ratio = 0;
  for (double scale : {1.0, 0.5, 0.25, 0.125, 0.0625}) {
    State su = u;
    for (auto& [n, a] : su.amp) a *= scale;
    double nn = su.hs_norm(s);
    if (nn == 0) {
      rep.sweep.push_back({scale, 0.0, 0.0});
      continue;
    }
    double func = sim.energy(su);
    if (model.kind != ModelKind::KG1D) func += (rho + 1) * sim.mass(su);
    rep.sweep.push_back({scale, nn * nn, func});
    double ratio = func / (nn * nn);
    if (ratio <= 0) {
      rep.within_validated = false;
      continue;
    }
    rep.lambda = std::max({rep.lambda, ratio, 1.0 / ratio});
    if (base_ratio == 0) base_ratio = ratio;
  }
  // flag amplitudes where the nonlinearity overwhelms the quadratic part
  if (!rep.sweep.empty() && rep.sweep.front()[2] > 0 && base_ratio > 0) {
    double smallest = rep.sweep.back()[2] /
                      std::max(rep.sweep.back()[1], 1e-300);
    if (smallest > 0 &&
        (base_ratio / smallest > 2.0 || smallest / base_ratio > 2.0))
      rep.within_validated = false;
  }
  return rep;
}

std::vector<DriftRow> track_superactions(const Trace& trace, double b_exp,
                                         double p_exp, double eps) {
  if (trace.times.empty())
    throw InvalidInput("track_superactions: empty trace");
  std::vector<DriftRow> rows;
  for (std::size_t g = 0; g < trace.tracked.size(); ++g) {
    DriftRow row;
    row.rep = trace.tracked[g];
    double j0 = trace.J[g].front();
    for (std::size_t t = 0; t < trace.times.size(); ++t) {
      double d = std::abs(trace.J[g][t] - j0);
      if (d > row.sup_drift) {
        row.sup_drift = d;
        row.t_at = trace.times[t];
      }
    }
    row.normalized = row.sup_drift / (std::pow(row.rep.jb(), b_exp) *
                                      std::pow(eps, p_exp));
    rows.push_back(row);
  }
  return rows;
}

ScalingReport scaling_experiment(const ModelSpec& model,
                                 const ScalingConfig& cfg) {
  if (cfg.eps_list.size() < 1)
    throw InvalidInput("scaling_experiment: eps_list nonempty");
  Simulator sim(model);
  ScalingReport rep;
  const double s = model.s_default();
  std::map<double, std::vector<double>> drifts_by_eps;

  for (double eps : cfg.eps_list) {
    for (std::uint64_t seed : cfg.seeds) {
      ScalingCell cell;
      cell.eps = eps;
      cell.seed = seed;
      cell.T = std::min(std::pow(eps, -(cfg.r - cfg.p)), cfg.T_cap);
      State u0 = random_state_hs(sim.state_lattice(), s, eps, seed);
      IntegrateOptions opts;
      opts.stride = 16;
      opts.track_cut = cfg.track_cut;
      opts.store_amplitudes = false;
      Trace tr = sim.run(u0, cell.T, cfg.dt, opts);
      cell.aborted = tr.aborted;
      auto rows = track_superactions(tr, 0.0, 1.0, 1.0);
      for (const auto& row : rows)
        cell.max_low_drift = std::max(cell.max_low_drift, row.sup_drift);
      drifts_by_eps[eps].push_back(cell.max_low_drift);
      rep.cells.push_back(cell);
      if (cell.max_low_drift > 1e-300) rep.exact_zero = false;
      if (eps == cfg.eps_list.back() && seed == cfg.seeds.front())
        rep.per_mode = track_superactions(tr, 0.0, double(cfg.p), eps);
    }
  }
  if (!rep.exact_zero) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int c = 0;
    for (const auto& [eps, ds] : drifts_by_eps) {
      double mean_log = 0;
      int m = 0;
      for (double d : ds)
        if (d > 0) {
          mean_log += std::log(d);
          ++m;
        }
      if (m == 0) continue;
      mean_log /= m;
      double x = std::log(eps);
      sx += x;
      sy += mean_log;
      sxx += x * x;
      sxy += x * mean_log;
      ++c;
    }
    if (c >= 2) rep.slope = (c * sxy - sx * sy) / (c * sxx - sx * sx);
  }
  return rep;
}

Trace nls_sturm_simulate(const Potential& V, const NonlinearityLadder& g,
                         const State& u0, double T, double dt, int radius,
                         int galerkin_dim, IntegrateOptions opts) {
  ModelSpec spec;
  spec.kind = ModelKind::NLS1D_Dir;
  spec.V = V;
  spec.g = g;
  spec.truncation_radius = radius;
  spec.galerkin_dim = galerkin_dim;
  return Simulator(spec).run(u0, T, dt, opts);
}

Trace nls2d_simulate(const std::map<ModeIndex, double>& vhat, const State& u0,
                     double T, double dt, int radius, IntegrateOptions opts) {
  ModelSpec spec;
  spec.kind = ModelKind::NLS2D_Conv;
  spec.vhat = vhat;
  spec.truncation_radius = radius;
  spec.g.terms[1] = Potential::constant(1.0);  // cubic |u|^2 u
  return Simulator(spec).run(u0, T, dt, opts);
}

std::vector<double> orbital_alignment_error(const Trace& trace, double s) {
  if (trace.amp_modes.empty())
    throw InvalidInput("orbital_alignment_error: amplitudes not stored");
  std::vector<double> out(trace.times.size(), 0.0);
  for (std::size_t t = 0; t < trace.times.size(); ++t) {
    double acc = 0;
    for (std::size_t i = 0; i < trace.amp_modes.size(); ++i) {
      double d = trace.amplitudes[i][t] - trace.amplitudes[i][0];
      acc += std::pow(trace.amp_modes[i].jb(), 2 * s) * d * d;
    }
    out[t] = std::sqrt(acc);
  }
  return out;
}

std::pair<QuadraticDiagonal, PolyHamiltonian> kg_formal_hamiltonian(
    double m, const NonlinearityLadder& g, int radius, int p, int r) {
  if (!(m > -1.0)) throw InvalidInput("kg_formal_hamiltonian: m > -1");
  QuadraticDiagonal Z2{kg_frequencies(m, radius)};
  PolyHamiltonian P(positive_line(radius));
  const int max_deg = std::max(p, r - 1);

  for (int j_deg = p; j_deg <= max_deg; ++j_deg) {
    auto it = g.terms.find(j_deg - 1);  // P^(j) carries g_{j-1}
    if (it == g.terms.end()) continue;
    const Potential& gj = it->second;
    const int j = j_deg;

    // I(a) = int_0^pi g_{j-1}(x) e^{iax} dx, |a| <= j * radius, by exact
    // trapezoid (trig integrand)
    const int amax = j * radius;
    const int intervals = gj.max_wavenumber() + amax + 16;
    std::vector<Complex> I(2 * amax + 1);
    {
      std::vector<double> xs(intervals + 1), gv;
      for (int i = 0; i <= intervals; ++i) xs[i] = kPi * i / intervals;
      gv = gj.sample(xs);
      for (int a = -amax; a <= amax; ++a) {
        Complex acc = 0;
        for (int i = 0; i <= intervals; ++i) {
          double w = (i == 0 || i == intervals) ? 0.5 : 1.0;
          acc += w * gv[i] * std::polar(1.0, a * xs[i]);
        }
        I[a + amax] = acc * (kPi / intervals);
      }
    }

    double jfact = 1;
    for (int t = 2; t <= j; ++t) jfact *= t;
    const Complex pref = -std::pow(Complex(0, -1), j) /
                         (jfact * std::pow(8.0 * kPi, j / 2.0));

    // iterate multisets k_1 <= ... <= k_j of [1, radius]
    std::vector<int> k(j, 1);
    std::vector<int> mu(j);
    for (;;) {
      // coefficient, independent of sigma
      Complex acc = 0;
      for (int mask = 0; mask < (1 << j); ++mask) {
        int dot = 0;
        double sgn = 1;
        for (int l = 0; l < j; ++l) {
          if (mask & (1 << l)) {
            dot -= k[l];
            sgn = -sgn;
          } else {
            dot += k[l];
          }
        }
        acc += sgn * I[dot + amax];
      }
      Complex coef = pref * acc;
      for (int l = 0; l < j; ++l)
        coef /= std::pow(double(k[l]) * k[l] + m, 0.25);
      // the mu <-> -mu symmetry makes the coefficient real; drop the
      // rounding residue so reality holds exactly
      coef = Complex(coef.real(), 0.0);

      if (std::abs(coef) > 0) {
        // same tensor coefficient for every sigma pattern
        for (int smask = 0; smask < (1 << j); ++smask) {
          MonoKey key(j);
          for (int l = 0; l < j; ++l)
            key[l] = KeyPair{mode(k[l]),
                             std::int8_t((smask & (1 << l)) ? -1 : 1)};
          std::sort(key.begin(), key.end());
          P.terms[j][key] = coef;  // idempotent across sigma permutations
        }
      }

      // next multiset
      int pos = j - 1;
      while (pos >= 0 && k[pos] == radius) --pos;
      if (pos < 0) break;
      ++k[pos];
      for (int l = pos + 1; l < j; ++l) k[l] = k[pos];
    }
    (void)mu;
  }
  return {Z2, P};
}

State random_state_hs(const Lattice& lat, double s, double target_norm,
                      std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  State u(lat);
  for (const auto& n : lat.modes())
    u.amp[n] = Complex{g(rng), g(rng)} * std::pow(n.jb(), -s - 1.0);
  double nn = u.hs_norm(s);
  if (nn > 0)
    for (auto& [n, a] : u.amp) a *= target_norm / nn;
  return u;
}

}  // namespace birkhoff
