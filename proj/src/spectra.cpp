#include "birkhoff/spectra.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <numbers>
#include <sstream>

namespace birkhoff {

namespace {

constexpr double kPi = std::numbers::pi;

std::vector<double> uniform_grid(int intervals) {
  std::vector<double> xs(intervals + 1);
  for (int i = 0; i <= intervals; ++i) xs[i] = kPi * double(i) / intervals;
  return xs;
}

double trapezoid(const std::vector<double>& f, double h) {
  double acc = 0.5 * (f.front() + f.back());
  for (std::size_t i = 1; i + 1 < f.size(); ++i) acc += f[i];
  return acc * h;
}

/// int_0^pi V(x) cos(j x) dx for j = 0..j_max, by trapezoid on the grid.
std::vector<double> cosine_moments(const Potential& V,
                                   const std::vector<double>& xs, int j_max) {
  const double h = xs[1] - xs[0];
  std::vector<double> vs = V.sample(xs);
  std::vector<double> out(j_max + 1);
  std::vector<double> f(xs.size());
  for (int j = 0; j <= j_max; ++j) {
    for (std::size_t i = 0; i < xs.size(); ++i)
      f[i] = vs[i] * std::cos(j * xs[i]);
    out[j] = trapezoid(f, h);
  }
  return out;
}

void fix_sign(Eigen::MatrixXd& vecs, bool neumann) {
  for (int j = 0; j < vecs.cols(); ++j) {
    // positive leading sine/cosine overlap: component of the matching
    // basis index (j-th eigenpair pairs with wavenumber j+1 for Dirichlet,
    // j for Neumann)
    int lead = neumann ? j : j;
    double v = vecs(lead, j);
    if (v == 0.0) {
      int best = 0;
      vecs.col(j).cwiseAbs().maxCoeff(&best);
      v = vecs(best, j);
    }
    if (v < 0) vecs.col(j) = -vecs.col(j);
  }
}

struct GalerkinOut {
  Eigen::MatrixXd vecs;
  Eigen::VectorXd vals;
};

GalerkinOut solve_dirichlet(const Potential& V, int D,
                            const std::vector<double>& xs) {
  auto vc = cosine_moments(V, xs, 2 * D);
  Eigen::MatrixXd A(D, D);
  for (int m = 1; m <= D; ++m)
    for (int n = m; n <= D; ++n) {
      double a = (vc[n - m] - vc[n + m]) / kPi;
      if (m == n) a += double(m) * m;
      A(m - 1, n - 1) = a;
      A(n - 1, m - 1) = a;
    }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A);
  if (es.info() != Eigen::Success)
    throw InternalError("dirichlet_spectrum: eigensolver failed");
  GalerkinOut out{es.eigenvectors(), es.eigenvalues()};
  fix_sign(out.vecs, false);
  return out;
}

GalerkinOut solve_neumann(const Potential& V, int D,
                          const std::vector<double>& xs) {
  auto vc = cosine_moments(V, xs, 2 * D);
  Eigen::MatrixXd A(D + 1, D + 1);
  A(0, 0) = vc[0] / kPi;
  for (int k = 1; k <= D; ++k) {
    double a = std::sqrt(2.0) * vc[k] / kPi;
    A(0, k) = a;
    A(k, 0) = a;
  }
  for (int m = 1; m <= D; ++m)
    for (int n = m; n <= D; ++n) {
      double a = (vc[n - m] + vc[n + m]) / kPi;
      if (m == n) a += double(m) * m;
      A(m, n) = a;
      A(n, m) = a;
    }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A);
  if (es.info() != Eigen::Success)
    throw InternalError("neumann_spectrum: eigensolver failed");
  GalerkinOut out{es.eigenvectors(), es.eigenvalues()};
  fix_sign(out.vecs, true);
  return out;
}

/// Samples the basis expansion on the grid. Dirichlet: coefficients against
/// sqrt(2/pi) sin(kx), k = 1..D. Neumann: constant + cosines.
std::vector<double> synthesize(const Eigen::VectorXd& coef, bool neumann,
                               const std::vector<double>& xs) {
  std::vector<double> f(xs.size(), 0.0);
  const double s2 = std::sqrt(2.0 / kPi);
  if (neumann) {
    const double c0 = 1.0 / std::sqrt(kPi);
    for (std::size_t i = 0; i < xs.size(); ++i) {
      double acc = coef[0] * c0;
      for (int k = 1; k < coef.size(); ++k)
        acc += coef[k] * s2 * std::cos(k * xs[i]);
      f[i] = acc;
    }
  } else {
    for (std::size_t i = 0; i < xs.size(); ++i) {
      double acc = 0;
      for (int k = 0; k < coef.size(); ++k)
        acc += coef[k] * s2 * std::sin((k + 1) * xs[i]);
      f[i] = acc;
    }
  }
  return f;
}

/// || (-d^2 + V - lambda) f ||_{L^2(0,pi)} on the grid; the second
/// derivative is spectral (exact for the basis expansion), so the residual
/// measures the Galerkin truncation of V f.
double equation_residual(const Potential& V, const Eigen::VectorXd& coef,
                         double lambda, bool neumann,
                         const std::vector<double>& xs) {
  const double s2 = std::sqrt(2.0 / kPi);
  std::vector<double> vf = V.sample(xs);
  std::vector<double> f = synthesize(coef, neumann, xs);
  std::vector<double> r(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    double d2 = 0;  // -f'' on the grid
    if (neumann) {
      for (int k = 1; k < coef.size(); ++k)
        d2 += double(k) * k * coef[k] * s2 * std::cos(k * xs[i]);
    } else {
      for (int k = 0; k < coef.size(); ++k)
        d2 += double(k + 1) * (k + 1) * coef[k] * s2 * std::sin((k + 1) * xs[i]);
    }
    double ri = d2 + (vf[i] - lambda) * f[i];
    r[i] = ri * ri;
  }
  return std::sqrt(trapezoid(r, xs[1] - xs[0]));
}

void check_preconditions(int n_max, int galerkin_dim) {
  if (n_max < 1) throw InvalidInput("spectrum: n_max >= 1 required");
  if (galerkin_dim < 4 * n_max) {
    std::ostringstream os;
    os << "spectrum: galerkin_dim " << galerkin_dim << " < 4*n_max = "
       << 4 * n_max << "; refusing (eigenvalues near the cutoff are junk)";
    throw InvalidInput(os.str());
  }
}

}  // namespace

double EigenSystem::lambda_at(int n) const {
  if (n >= 1) {
    if (!has_dirichlet() || n > dir_vals.size())
      throw InvalidInput("EigenSystem: no Dirichlet eigenvalue at n=" +
                         std::to_string(n));
    return dir_vals[n - 1];
  }
  if (!has_neumann() || -n >= neu_vals.size())
    throw InvalidInput("EigenSystem: no Neumann eigenvalue at n=" +
                       std::to_string(n));
  return neu_vals[-n];
}

Eigen::VectorXd EigenSystem::coefficients(int n) const {
  if (n >= 1) {
    if (!has_dirichlet() || n > dir_vecs.cols())
      throw InvalidInput("EigenSystem: no Dirichlet eigenvector at n=" +
                         std::to_string(n));
    return dir_vecs.col(n - 1);
  }
  if (!has_neumann() || -n >= neu_vecs.cols())
    throw InvalidInput("EigenSystem: no Neumann eigenvector at n=" +
                       std::to_string(n));
  return neu_vecs.col(-n);
}

std::vector<double> EigenSystem::eigenfunction(int n) const {
  return synthesize(coefficients(n), n <= 0, grid);
}

double EigenSystem::sine_overlap(int n, int k) const {
  if (kind == SpectrumKind::Neumann)
    throw InvalidInput("sine_overlap: Dirichlet-side eigenfunctions only");
  if (n < 1) throw InvalidInput("sine_overlap: n >= 1 required");
  if (k < 1) return 0.0;
  auto c = coefficients(n);
  return k <= c.size() ? c[k - 1] : 0.0;
}

FrequencyFamily EigenSystem::frequencies(double group_tol) const {
  Lattice lat;
  switch (kind) {
    case SpectrumKind::Dirichlet:
      lat = positive_line(n_max);
      break;
    case SpectrumKind::Neumann:
      lat = nonpositive_line(n_max);
      break;
    case SpectrumKind::PeriodicEven:
      lat = full_line(n_max);
      break;
  }
  std::map<ModeIndex, double> om;
  for (const auto& n : lat.modes()) om[n] = lambda_at(n.c[0]);
  return frequencies_from_map(lat, std::move(om), group_tol);
}

EigenSystem dirichlet_spectrum(const Potential& V, int n_max,
                               int galerkin_dim) {
  check_preconditions(n_max, galerkin_dim);
  EigenSystem E;
  E.kind = SpectrumKind::Dirichlet;
  E.V = V;
  E.n_max = n_max;
  E.galerkin_dim = galerkin_dim;
  E.mean_V = V.mean_0pi();
  E.grid = uniform_grid(16 * galerkin_dim);
  auto out = solve_dirichlet(V, galerkin_dim, E.grid);
  E.dir_vecs = std::move(out.vecs);
  E.dir_vals = std::move(out.vals);
  for (int n = 1; n <= n_max; ++n) {
    E.lambda[n] = E.dir_vals[n - 1];
    E.residual[n] = equation_residual(V, E.dir_vecs.col(n - 1), E.dir_vals[n - 1],
                                      false, E.grid);
  }
  return E;
}

EigenSystem neumann_spectrum(const Potential& V, int n_max, int galerkin_dim) {
  check_preconditions(n_max, galerkin_dim);
  EigenSystem E;
  E.kind = SpectrumKind::Neumann;
  E.V = V;
  E.n_max = n_max;
  E.galerkin_dim = galerkin_dim;
  E.mean_V = V.mean_0pi();
  E.grid = uniform_grid(16 * galerkin_dim);
  auto out = solve_neumann(V, galerkin_dim, E.grid);
  E.neu_vecs = std::move(out.vecs);
  E.neu_vals = std::move(out.vals);
  for (int n = 0; n <= n_max; ++n) {
    E.lambda[-n] = E.neu_vals[n];
    E.residual[-n] =
        equation_residual(V, E.neu_vecs.col(n), E.neu_vals[n], true, E.grid);
  }
  return E;
}

EigenSystem periodic_spectrum_even(const Potential& V, int n_max,
                                   int galerkin_dim) {
  if (!V.is_even(1e-10))
    throw InvalidInput("periodic_spectrum_even: potential is not even");
  check_preconditions(n_max, galerkin_dim);
  EigenSystem E;
  E.kind = SpectrumKind::PeriodicEven;
  E.V = V;
  E.n_max = n_max;
  E.galerkin_dim = galerkin_dim;
  E.mean_V = V.mean_0pi();
  E.grid = uniform_grid(16 * galerkin_dim);
  auto dir = solve_dirichlet(V, galerkin_dim, E.grid);
  auto neu = solve_neumann(V, galerkin_dim, E.grid);
  E.dir_vecs = std::move(dir.vecs);
  E.dir_vals = std::move(dir.vals);
  E.neu_vecs = std::move(neu.vecs);
  E.neu_vals = std::move(neu.vals);
  for (int n = 1; n <= n_max; ++n) {
    E.lambda[n] = E.dir_vals[n - 1];
    // the (0,pi) residual equals the T residual of the odd/even extension
    // up to the 1/sqrt(2) renormalization (V even keeps V f of matching
    // parity)
    E.residual[n] = equation_residual(V, E.dir_vecs.col(n - 1),
                                      E.dir_vals[n - 1], false, E.grid);
  }
  for (int n = 0; n <= n_max; ++n) {
    E.lambda[-n] = E.neu_vals[n];
    E.residual[-n] =
        equation_residual(V, E.neu_vecs.col(n), E.neu_vals[n], true, E.grid);
  }
  return E;
}

double eigenvalue_derivative(const EigenSystem& E, int n, const Potential& W) {
  auto f = E.eigenfunction(n);
  auto w = W.sample(E.grid);
  std::vector<double> g(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) g[i] = w[i] * f[i] * f[i];
  return trapezoid(g, E.grid[1] - E.grid[0]);
}

SecondDerivative eigenvalue_second_derivative(const EigenSystem& E, int n,
                                              const Potential& W,
                                              int k_trunc) {
  const bool neumann = n <= 0;
  const Eigen::MatrixXd& vecs = neumann ? E.neu_vecs : E.dir_vecs;
  const Eigen::VectorXd& vals = neumann ? E.neu_vals : E.dir_vals;
  if (vals.size() == 0)
    throw InvalidInput("eigenvalue_second_derivative: spectrum side missing");
  const int D = int(vals.size());
  const int col_n = neumann ? -n : n - 1;
  if (col_n < 0 || col_n >= D)
    throw InvalidInput("eigenvalue_second_derivative: n out of range");
  int kmax = (k_trunc <= 0) ? D : std::min(k_trunc + (neumann ? 1 : 0), D);

  // g = B f_n in coefficient space, with B the Galerkin matrix of
  // multiplication by W.
  auto wc = cosine_moments(W, E.grid, 2 * int(vecs.rows()));
  Eigen::MatrixXd B(vecs.rows(), vecs.rows());
  if (neumann) {
    B(0, 0) = wc[0] / kPi;
    for (int k = 1; k < vecs.rows(); ++k) {
      double a = std::sqrt(2.0) * wc[k] / kPi;
      B(0, k) = a;
      B(k, 0) = a;
    }
    for (int m = 1; m < vecs.rows(); ++m)
      for (int l = m; l < vecs.rows(); ++l) {
        double a = (wc[l - m] + wc[l + m]) / kPi;
        B(m, l) = a;
        B(l, m) = a;
      }
  } else {
    for (int m = 1; m <= vecs.rows(); ++m)
      for (int l = m; l <= vecs.rows(); ++l) {
        double a = (wc[l - m] - wc[l + m]) / kPi;
        B(m - 1, l - 1) = a;
        B(l - 1, m - 1) = a;
      }
  }
  Eigen::VectorXd g = B * vecs.col(col_n);

  SecondDerivative out;
  out.k_trunc = kmax;
  const double lam_n = vals[col_n];
  double captured_sq = 0;
  double min_gap_tail = std::numeric_limits<double>::infinity();
  for (int j = 0; j < D; ++j) {
    if (j == col_n) continue;
    double cross = vecs.col(j).dot(g);
    double gap = lam_n - vals[j];
    if (std::abs(gap) < 1e-9 * std::max(1.0, std::abs(lam_n)))
      throw ResonanceViolation(
          "eigenvalue_second_derivative: degenerate spectrum near n");
    if (j < kmax) {
      out.value += 2.0 * cross * cross / gap;
      captured_sq += cross * cross;
    } else {
      min_gap_tail = std::min(min_gap_tail, std::abs(gap));
    }
  }
  // ||W f_n||^2 bounds the full overlap series (Bessel)
  auto f = E.eigenfunction(n);
  auto w = W.sample(E.grid);
  std::vector<double> wf2(f.size());
  for (std::size_t i = 0; i < f.size(); ++i)
    wf2[i] = w[i] * w[i] * f[i] * f[i];
  double total_sq = trapezoid(wf2, E.grid[1] - E.grid[0]);
  double own = vecs.col(col_n).dot(g);
  double tail_sq = std::max(0.0, total_sq - captured_sq - own * own);
  if (kmax < D && std::isfinite(min_gap_tail))
    out.tail_bound = 2.0 * tail_sq / min_gap_tail;
  else if (kmax >= D) {
    // beyond the computed spectrum: gap at least lambda_{D} - lambda_n
    double gap = std::abs(vals[D - 1] - lam_n);
    out.tail_bound = gap > 0 ? 2.0 * tail_sq / gap : 0.0;
  }
  return out;
}

AsymptoticsReport eigenfunction_asymptotics_check(const EigenSystem& E,
                                                  int n) {
  if (n == 0)
    throw InvalidInput("eigenfunction_asymptotics_check: n != 0 required");
  const bool neumann = n < 0;
  const int nn = std::abs(n);
  auto f = E.eigenfunction(n);
  const double s2 = std::sqrt(2.0 / kPi);
  double sup = 0;
  for (std::size_t i = 0; i < E.grid.size(); ++i) {
    double x = E.grid[i];
    double cv = E.V.antiderivative_centered(x);
    double model =
        neumann ? s2 * (std::cos(nn * x) + cv / (2.0 * nn) * std::sin(nn * x))
                : s2 * (std::sin(nn * x) - cv / (2.0 * nn) * std::cos(nn * x));
    sup = std::max(sup, std::abs(f[i] - model));
  }
  return {sup, sup * double(nn) * nn};
}

State basis_transform_dirichlet(const EigenSystem& E,
                                const std::vector<Complex>& sine_coef) {
  if (!E.has_dirichlet())
    throw InvalidInput("basis_transform_dirichlet: Dirichlet data required");
  const int D = int(E.dir_vecs.cols());
  if (int(sine_coef.size()) > D)
    throw InvalidInput(
        "basis_transform_dirichlet: more sine coefficients than galerkin_dim");
  Eigen::VectorXd vr = Eigen::VectorXd::Zero(D), vi = Eigen::VectorXd::Zero(D);
  for (std::size_t k = 0; k < sine_coef.size(); ++k) {
    vr[int(k)] = sine_coef[k].real();
    vi[int(k)] = sine_coef[k].imag();
  }
  Eigen::VectorXd wr = E.dir_vecs.transpose() * vr;
  Eigen::VectorXd wi = E.dir_vecs.transpose() * vi;
  State w(positive_line(D));
  for (int nidx = 1; nidx <= D; ++nidx) {
    Complex a{wr[nidx - 1], wi[nidx - 1]};
    if (a != Complex{}) w.amp[mode(nidx)] = a;
  }
  return w;
}

std::vector<Complex> basis_transform_dirichlet_inverse(const EigenSystem& E,
                                                       const State& w) {
  const int D = int(E.dir_vecs.cols());
  Eigen::VectorXd wr = Eigen::VectorXd::Zero(D), wi = Eigen::VectorXd::Zero(D);
  for (const auto& [n, a] : w.amp) {
    if (n.c[0] < 1 || n.c[0] > D)
      throw InvalidInput("basis_transform_dirichlet_inverse: index range");
    wr[n.c[0] - 1] = a.real();
    wi[n.c[0] - 1] = a.imag();
  }
  Eigen::VectorXd vr = E.dir_vecs * wr;
  Eigen::VectorXd vi = E.dir_vecs * wi;
  std::vector<Complex> out(D);
  for (int k = 0; k < D; ++k) out[k] = Complex{vr[k], vi[k]};
  return out;
}

std::vector<Complex> sine_coefficients_from_grid(
    const EigenSystem& E, const std::vector<Complex>& samples) {
  if (samples.size() != E.grid.size())
    throw InvalidInput("sine_coefficients_from_grid: wrong sample count");
  const int D = E.galerkin_dim;
  const double h = E.grid[1] - E.grid[0];
  const double s2 = std::sqrt(2.0 / kPi);
  std::vector<Complex> out(D);
  for (int k = 1; k <= D; ++k) {
    Complex acc = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
      double wq = (i == 0 || i + 1 == samples.size()) ? 0.5 : 1.0;
      acc += wq * samples[i] * (s2 * std::sin(k * E.grid[i]));
    }
    out[k - 1] = acc * h;
  }
  return out;
}

}  // namespace birkhoff
