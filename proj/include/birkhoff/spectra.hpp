#pragma once

#include <Eigen/Dense>
#include <map>

#include "birkhoff/frequency.hpp"
#include "birkhoff/potential.hpp"

namespace birkhoff {

enum class SpectrumKind : std::uint8_t { Dirichlet, Neumann, PeriodicEven };

/// Sturm-Liouville spectrum of -d^2/dx^2 + V on (0,pi), computed by a
/// symmetric spectral Galerkin method in the orthonormal sine (Dirichlet)
/// or cosine (Neumann) basis; V multiplication assembled by trapezoid
/// quadrature on a uniform grid at >= 8x oversampling.
///
/// Index conventions follow the periodic-merge convention: Dirichlet
/// eigenpairs carry n >= 1, Neumann ones n <= 0 (lambda_{-n} ~ n^2).
/// PeriodicEven holds both; the odd (n > 0) / even (n <= 0) extensions of
/// f_n, rescaled by 1/sqrt(2), form the Hilbertian basis of L^2(T).
struct EigenSystem {
  SpectrumKind kind = SpectrumKind::Dirichlet;
  Potential V;
  int n_max = 0;
  int galerkin_dim = 0;
  double mean_V = 0.0;

  /// Uniform grid on [0,pi] shared by sampled eigenfunctions.
  std::vector<double> grid;

  /// Full Galerkin output. Dirichlet: basis sqrt(2/pi) sin(kx), k=1..D,
  /// column j-1 is the j-th eigenpair. Neumann: basis {1/sqrt(pi),
  /// sqrt(2/pi) cos(kx)}, column j is the eigenpair of index -j.
  Eigen::MatrixXd dir_vecs;
  Eigen::VectorXd dir_vals;
  Eigen::MatrixXd neu_vecs;
  Eigen::VectorXd neu_vals;

  /// Exposed eigenvalues / residuals for |n| <= n_max (by kind).
  std::map<int, double> lambda;
  std::map<int, double> residual;

  bool has_dirichlet() const { return dir_vals.size() > 0; }
  bool has_neumann() const { return neu_vals.size() > 0; }
  double lambda_at(int n) const;
  /// Basis coefficients of f_n in its sine/cosine basis.
  Eigen::VectorXd coefficients(int n) const;
  /// f_n sampled on grid (L^2(0,pi)-normalized).
  std::vector<double> eigenfunction(int n) const;
  /// c_{n,k} = sqrt(2/pi) int f_n sin(kx) (Dirichlet; 0 for k > D).
  double sine_overlap(int n, int k) const;

  /// Frequencies omega_n = lambda_n on the lattice matching the kind.
  FrequencyFamily frequencies(double group_tol = 1e-9) const;
};

/// First n_max Dirichlet eigenpairs. Requires galerkin_dim >= 4 n_max.
EigenSystem dirichlet_spectrum(const Potential& V, int n_max,
                               int galerkin_dim);
/// Neumann eigenpairs of index 0, -1, ..., -n_max.
EigenSystem neumann_spectrum(const Potential& V, int n_max, int galerkin_dim);
/// Merged periodic family of an even V: Dirichlet (n > 0) and Neumann
/// (n <= 0) solves of V restricted to (0,pi); residuals re-checked on T.
EigenSystem periodic_spectrum_even(const Potential& V, int n_max,
                                   int galerkin_dim);

/// d lambda_n (V)(W) = int_0^pi W f_n^2 dx.
double eigenvalue_derivative(const EigenSystem& E, int n, const Potential& W);

struct SecondDerivative {
  double value = 0.0;
  /// |2 Sigma_{k > k_trunc}| <= 2 (Sigma tail overlaps^2) / gap.
  double tail_bound = 0.0;
  int k_trunc = 0;
};

/// d^2 lambda_n (V)(W,W) = 2 Sigma_{k != n, same kind} (lambda_n -
/// lambda_k)^{-1} (int W f_n f_k)^2, truncated at |k| <= k_trunc
/// (k_trunc = 0 means the full computed spectrum).
SecondDerivative eigenvalue_second_derivative(const EigenSystem& E, int n,
                                              const Potential& W,
                                              int k_trunc = 0);

struct AsymptoticsReport {
  double sup_residual = 0.0;
  double scaled = 0.0;  // sup_residual * n^2, for decay-rate fits
};

/// Sup-norm distance of f_n from sqrt(2/pi)(sin nx - curlyV(x) cos(nx)/2n)
/// (cosine variant for n <= 0).
AsymptoticsReport eigenfunction_asymptotics_check(const EigenSystem& E, int n);

/// Sturm coefficients w_n = int u f_n from sine-basis coefficients
/// (u = Sigma v_k sqrt(2/pi) sin(kx)); exact orthogonal transform.
State basis_transform_dirichlet(const EigenSystem& E,
                                const std::vector<Complex>& sine_coef);
std::vector<Complex> basis_transform_dirichlet_inverse(const EigenSystem& E,
                                                       const State& w);

/// Orthonormal sine coefficients of grid samples on E's grid (trapezoid).
std::vector<Complex> sine_coefficients_from_grid(
    const EigenSystem& E, const std::vector<Complex>& samples);

}  // namespace birkhoff
