#pragma once

#include <random>
#include <vector>

#include "birkhoff/lattice.hpp"

namespace birkhoff {

/// Real potential as a trigonometric polynomial on T = R/2piZ:
///   V(x) = a_0 + Sigma_{k>=1} a_k cos(kx) + b_k sin(kx).
/// Used on (0,pi) by restriction. For even-periodic spectra the sine
/// coefficients must vanish.
struct Potential {
  std::vector<double> cos_coef{0.0};  // a_k at index k
  std::vector<double> sin_coef{0.0};  // b_k at index k (b_0 unused)

  static Potential zero() { return {}; }
  static Potential constant(double c) { return {{c}, {0.0}}; }
  static Potential cosine(std::vector<double> a) {
    return {std::move(a), {0.0}};
  }
  /// Projects uniform grid samples on [0,pi] (endpoints included) onto the
  /// cosine basis, k = 0..k_max, by trapezoid quadrature of the even
  /// extension.
  static Potential from_grid_0pi(const std::vector<double>& samples,
                                 int k_max);

  double value(double x) const;
  std::vector<double> sample(const std::vector<double>& xs) const;

  /// pi^{-1} int_0^pi V
  double mean_0pi() const;
  /// curly-V(x) = int_0^x (V(y) - mean) dy, closed form.
  double antiderivative_centered(double x) const;

  double h1_norm_T() const;
  double h1_norm_0pi() const;
  double l2_norm_0pi() const;
  bool is_even(double tol = 1e-12) const;
  int max_wavenumber() const;

  Potential& operator+=(const Potential& o);
  Potential& operator*=(double a);
};

/// V(x) = Sigma_{n<=-1} V_n <n>^{-s} sin(nx) + Sigma_{n>=0} V_n <n>^{-s}
/// cos(nx), V_n iid standard gaussians, truncated at |n| <= k_max.
Potential random_gaussian_fourier(double s, int k_max, std::mt19937_64& rng);

/// Even variant: V(x) = Sigma_{n>=0} V_n <n>^{-s} cos(nx).
Potential random_gaussian_cosine(double s, int k_max, std::mt19937_64& rng);

/// Convolution-potential coefficients on Z^2: Vhat_n iid uniform in
/// (-<n>^{-s}, <n>^{-s}), |n|_inf <= n_max.
std::map<ModeIndex, double> random_uniform_convolution(double s, int n_max,
                                                       std::mt19937_64& rng);

}  // namespace birkhoff
