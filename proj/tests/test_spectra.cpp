#include <cmath>
#include <numbers>
#include <random>

#include "birkhoff/spectra.hpp"
#include "doctest.h"

using namespace birkhoff;

namespace {
constexpr double kPi = std::numbers::pi;

Potential smooth_random(std::mt19937_64& rng, double scale = 0.5,
                        int k_max = 6) {
  std::normal_distribution<double> g;
  Potential V;
  V.cos_coef.assign(k_max + 1, 0.0);
  V.sin_coef.assign(k_max + 1, 0.0);
  for (int k = 0; k <= k_max; ++k) {
    V.cos_coef[k] = scale * g(rng) / (1.0 + k * k);
    if (k >= 1) V.sin_coef[k] = scale * g(rng) / (1.0 + k * k);
  }
  return V;
}
}  // namespace

TEST_CASE("flat potential spectra are exact") {
  auto E = dirichlet_spectrum(Potential::zero(), 8, 32);
  for (int n = 1; n <= 8; ++n) {
    CHECK(E.lambda.at(n) == doctest::Approx(double(n) * n).epsilon(1e-12));
    CHECK(E.residual.at(n) < 1e-10);
  }
  auto En = neumann_spectrum(Potential::zero(), 8, 32);
  CHECK(std::abs(En.lambda.at(0)) < 1e-12);
  for (int n = 1; n <= 8; ++n)
    CHECK(En.lambda.at(-n) == doctest::Approx(double(n) * n).epsilon(1e-12));

  // constant shift
  auto Ec = dirichlet_spectrum(Potential::constant(2.5), 6, 24);
  for (int n = 1; n <= 6; ++n)
    CHECK(Ec.lambda.at(n) == doctest::Approx(double(n) * n + 2.5));
  auto Enc = neumann_spectrum(Potential::constant(2.5), 6, 24);
  for (int n = 0; n <= 6; ++n)
    CHECK(Enc.lambda.at(-n) == doctest::Approx(double(n) * n + 2.5));

  // V=0 eigenfunctions: f_n = sqrt(2/pi) sin(nx)
  auto f3 = E.eigenfunction(3);
  for (std::size_t i = 0; i < E.grid.size(); i += 50)
    CHECK(f3[i] ==
          doctest::Approx(std::sqrt(2.0 / kPi) * std::sin(3 * E.grid[i]))
              .epsilon(1e-9));
}

TEST_CASE("galerkin eigenvalues decrease with dimension (min-max)") {
  std::mt19937_64 rng(2);
  auto V = smooth_random(rng, 1.0);
  auto E1 = dirichlet_spectrum(V, 6, 24);
  auto E2 = dirichlet_spectrum(V, 6, 48);
  auto E3 = dirichlet_spectrum(V, 6, 96);
  for (int n = 1; n <= 6; ++n) {
    // monotone up to quadrature noise (the assembly grids differ)
    double noise = 1e-9 * std::max(1.0, std::abs(E1.lambda.at(n)));
    CHECK(E2.lambda.at(n) <= E1.lambda.at(n) + noise);
    CHECK(E3.lambda.at(n) <= E2.lambda.at(n) + noise);
    // doubling changes lambda by less than the reported residual
    CHECK(std::abs(E3.lambda.at(n) - E2.lambda.at(n)) <=
          E2.residual.at(n) + 1e-12);
  }
  CHECK_THROWS_AS(dirichlet_spectrum(V, 8, 16), InvalidInput);
}

TEST_CASE("asymptotics of lambda_n (O(1/n) decay)") {
  std::mt19937_64 rng(5);
  auto V = smooth_random(rng, 0.8);
  double mean = V.mean_0pi();
  int n_max = 24;
  auto E = dirichlet_spectrum(V, n_max, 4 * n_max);
  // reference solve at 4x dimension
  auto R = dirichlet_spectrum(V, n_max, 16 * n_max);
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int c = 0;
  for (int n = 8; n <= n_max; ++n) {
    CHECK(std::abs(E.lambda.at(n) - R.lambda.at(n)) < 1e-6);
    double err = std::abs(R.lambda.at(n) - double(n) * n - mean);
    if (err <= 0) continue;
    double x = std::log(double(n)), y = std::log(err);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++c;
  }
  double slope = (c * sxy - sx * sy) / (c * sxx - sx * sx);
  CHECK(slope < -0.5);  // O(1/n)
  CHECK(slope > -2.5);
}

TEST_CASE("neumann boundary derivative vanishes") {
  std::mt19937_64 rng(7);
  auto V = smooth_random(rng, 0.6);
  auto E = neumann_spectrum(V, 6, 48);
  double h = E.grid[1] - E.grid[0];
  for (int n = 0; n <= 4; ++n) {
    auto f = E.eigenfunction(-n);
    // one-sided second-order difference at both ends
    double d0 = (-3 * f[0] + 4 * f[1] - f[2]) / (2 * h);
    double d1 =
        (3 * f.back() - 4 * f[f.size() - 2] + f[f.size() - 3]) / (2 * h);
    CHECK(std::abs(d0) < 1e-4);
    CHECK(std::abs(d1) < 1e-4);
  }
  // Dirichlet values vanish at the ends by construction of the basis
  auto Ed = dirichlet_spectrum(V, 4, 16);
  auto f = Ed.eigenfunction(2);
  CHECK(std::abs(f.front()) < 1e-12);
  CHECK(std::abs(f.back()) < 1e-12);
}

TEST_CASE("periodic even spectrum") {
  // V = 0: doubly listed n^2
  auto E0 = periodic_spectrum_even(Potential::zero(), 5, 20);
  for (int n = 1; n <= 5; ++n) {
    CHECK(E0.lambda.at(n) == doctest::Approx(double(n) * n).epsilon(1e-12));
    CHECK(E0.lambda.at(-n) == doctest::Approx(double(n) * n).epsilon(1e-12));
  }
  CHECK(std::abs(E0.lambda.at(0)) < 1e-12);

  // generic even V: splitting lambda_n != lambda_{-n}
  std::mt19937_64 rng(11);
  auto Veven = random_gaussian_cosine(2.0, 8, rng);
  auto E = periodic_spectrum_even(Veven, 5, 40);
  bool split = false;
  for (int n = 1; n <= 5; ++n)
    if (std::abs(E.lambda.at(n) - E.lambda.at(-n)) > 1e-8) split = true;
  CHECK(split);

  // equation residual on T comparable to the Dirichlet one
  auto Ed = dirichlet_spectrum(Veven, 5, 40);
  for (int n = 1; n <= 5; ++n)
    CHECK(E.residual.at(n) <= 10 * Ed.residual.at(n) + 1e-12);

  // non-even potential rejected
  Potential odd;
  odd.cos_coef = {0.0};
  odd.sin_coef = {0.0, 0.3};
  CHECK_THROWS_AS(periodic_spectrum_even(odd, 4, 16), InvalidInput);

  // frequencies on the full line
  auto om = E.frequencies();
  CHECK(om.lattice.kind == LatticeKind::FullLine);
  CHECK(om.omega.size() == 11);
}

TEST_CASE("eigenvalue derivative") {
  // V=0, W=cos(2n.): -1/2 Dirichlet, +1/2 Neumann
  auto Ed = dirichlet_spectrum(Potential::zero(), 6, 24);
  auto En = neumann_spectrum(Potential::zero(), 6, 24);
  for (int n = 1; n <= 4; ++n) {
    Potential W;
    W.cos_coef.assign(2 * n + 1, 0.0);
    W.cos_coef[2 * n] = 1.0;
    CHECK(eigenvalue_derivative(Ed, n, W) ==
          doctest::Approx(-0.5).epsilon(1e-8));
    CHECK(eigenvalue_derivative(En, -n, W) ==
          doctest::Approx(0.5).epsilon(1e-8));
  }
  // W = 1 -> 1 (normalization)
  CHECK(eigenvalue_derivative(Ed, 3, Potential::constant(1.0)) ==
        doctest::Approx(1.0).epsilon(1e-10));

  // central finite differences of the eigensolve
  std::mt19937_64 rng(13);
  auto V = smooth_random(rng, 0.7);
  auto W = smooth_random(rng, 1.0);
  auto E = dirichlet_spectrum(V, 6, 48);
  double eps = 1e-4;
  Potential Vp = V, Vm = V;
  Potential Weps = W;
  Weps *= eps;
  Vp += Weps;
  Weps *= -1.0;
  Vm += Weps;
  auto Ep = dirichlet_spectrum(Vp, 6, 48);
  auto Em = dirichlet_spectrum(Vm, 6, 48);
  for (int n = 1; n <= 6; ++n) {
    double fd = (Ep.lambda.at(n) - Em.lambda.at(n)) / (2 * eps);
    double an = eigenvalue_derivative(E, n, W);
    CHECK(an == doctest::Approx(fd).epsilon(1e-5));
  }
}

TEST_CASE("eigenvalue second derivative") {
  // V=0: d^2_{cos(j.)} lambda_n = 1/(4n^2-j^2), j not in {n, 2n};
  // Dirichlet n=1, j=3 -> -0.2
  auto E = dirichlet_spectrum(Potential::zero(), 8, 64);
  Potential W3;
  W3.cos_coef.assign(4, 0.0);
  W3.cos_coef[3] = 1.0;
  auto d2 = eigenvalue_second_derivative(E, 1, W3);
  CHECK(d2.value == doctest::Approx(-0.2).epsilon(1e-8));

  // W = 1: all cross overlaps vanish
  auto d2c = eigenvalue_second_derivative(E, 2, Potential::constant(1.0));
  CHECK(std::abs(d2c.value) < 1e-12);

  // second central difference oracle
  std::mt19937_64 rng(17);
  auto V = smooth_random(rng, 0.5);
  auto W = smooth_random(rng, 1.0);
  auto Ev = dirichlet_spectrum(V, 6, 48);
  double eps = 1e-3;
  Potential Vp = V, Vm = V, We = W;
  We *= eps;
  Vp += We;
  We *= -1.0;
  We *= -1.0;
  We *= -1.0;  // back to -eps W
  Vm += We;
  auto Ep = dirichlet_spectrum(Vp, 6, 48);
  auto Em = dirichlet_spectrum(Vm, 6, 48);
  for (int n = 1; n <= 4; ++n) {
    double fd = (Ep.lambda.at(n) - 2 * Ev.lambda.at(n) + Em.lambda.at(n)) /
                (eps * eps);
    auto an = eigenvalue_second_derivative(Ev, n, W);
    CHECK(an.value == doctest::Approx(fd).epsilon(1e-3));
  }

  // truncation tail bound reported and decreasing in k_trunc
  auto t1 = eigenvalue_second_derivative(E, 1, W3, 8);
  auto t2 = eigenvalue_second_derivative(E, 1, W3, 32);
  CHECK(t1.tail_bound >= 0);
  CHECK(t2.tail_bound <= t1.tail_bound + 1e-12);
}

TEST_CASE("eigenfunction asymptotics") {
  // V=0: residual ~ solver tolerance
  auto E0 = dirichlet_spectrum(Potential::zero(), 8, 32);
  CHECK(eigenfunction_asymptotics_check(E0, 3).sup_residual < 1e-9);

  // fixed smooth V: residual * n^2 bounded along n
  std::mt19937_64 rng(19);
  auto V = smooth_random(rng, 0.5);
  int n_max = 24;
  auto E = dirichlet_spectrum(V, n_max, 4 * n_max);
  auto En = neumann_spectrum(V, n_max, 4 * n_max);
  double h1 = V.h1_norm_0pi();
  double worst = 0;
  for (int n = 8; n <= n_max; n += 4) {
    worst = std::max(worst, eigenfunction_asymptotics_check(E, n).scaled);
    worst = std::max(worst, eigenfunction_asymptotics_check(En, -n).scaled);
  }
  CHECK(worst < 20.0 * std::max(h1, 1.0));
}

TEST_CASE("sine overlaps") {
  auto E0 = dirichlet_spectrum(Potential::zero(), 6, 24);
  for (int n = 1; n <= 6; ++n)
    for (int k = 1; k <= 12; ++k)
      CHECK(E0.sine_overlap(n, k) ==
            doctest::Approx(n == k ? 1.0 : 0.0).epsilon(1e-10));

  std::mt19937_64 rng(23);
  auto V = smooth_random(rng, 0.4);
  int D = 64;
  auto E = dirichlet_spectrum(V, 16, D);
  // rows are unit vectors (Parseval)
  for (int n = 1; n <= 16; n += 3) {
    double s = 0;
    for (int k = 1; k <= D; ++k) {
      double c = E.sine_overlap(n, k);
      s += c * c;
    }
    CHECK(s == doctest::Approx(1.0).epsilon(1e-10));
  }
  // decay envelope |c_{n,k}| <= C / (<n-k><n+k>)
  double fitted = 0;
  for (int n = 1; n <= 16; ++n)
    for (int k = 1; k <= D; ++k) {
      if (n == k) continue;
      double env = 1.0 / (japanese_bracket(double(n - k)) *
                          japanese_bracket(double(n + k)));
      fitted = std::max(fitted, std::abs(E.sine_overlap(n, k)) / env);
    }
  CHECK(fitted < 10.0 * std::max(1.0, V.l2_norm_0pi()));
}

TEST_CASE("basis transforms") {
  std::mt19937_64 rng(29);
  auto V = smooth_random(rng, 0.6);
  int D = 48;
  auto E = dirichlet_spectrum(V, 12, D);

  // u = f_3 -> unit coefficient at n=3
  std::vector<Complex> f3(E.coefficients(3).size());
  for (std::size_t k = 0; k < f3.size(); ++k) f3[k] = E.coefficients(3)[k];
  auto w = basis_transform_dirichlet(E, f3);
  CHECK(std::abs(w.at(mode(3)) - 1.0) < 1e-10);
  for (int n = 1; n <= D; ++n)
    if (n != 3) CHECK(std::abs(w.at(mode(n))) < 1e-10);

  // round trip on random low-frequency data
  std::normal_distribution<double> g;
  std::vector<Complex> v(D, Complex{});
  for (int k = 0; k < D / 2; ++k) v[k] = Complex{g(rng), g(rng)};
  auto ww = basis_transform_dirichlet(E, v);
  auto back = basis_transform_dirichlet_inverse(E, ww);
  double err = 0;
  for (int k = 0; k < D; ++k) err = std::max(err, std::abs(back[k] - v[k]));
  CHECK(err < 1e-10);

  // h^s bound: ||w||_{h^s} <= C ||u||_{H^s}, s = 1.25, with the spectral
  // sine-basis norm as the oracle
  double s = 1.25;
  double fitted = 0;
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<Complex> u(D, Complex{});
    for (int k = 0; k < D; ++k)
      u[k] =
          Complex{g(rng), g(rng)} * std::pow(japanese_bracket(k + 1.0), -2.0);
    double hs_u = 0;
    for (int k = 0; k < D; ++k)
      hs_u += std::pow(japanese_bracket(k + 1.0), 2 * s) * std::norm(u[k]);
    hs_u = std::sqrt(hs_u);
    auto wt = basis_transform_dirichlet(E, u);
    fitted = std::max(fitted, wt.hs_norm(s) / hs_u);
  }
  CHECK(fitted > 0.1);
  CHECK(fitted < 10.0);
}

TEST_CASE("kg and nls2 frequencies") {
  CHECK_THROWS_AS(kg_frequencies(-1.0, 4), InvalidInput);
  auto om0 = kg_frequencies(0.0, 6);
  CHECK(om0.integer_valued);
  CHECK(om0.all_groups_singleton());

  auto om1 = kg_frequencies(1.0, 16);
  CHECK(om1.at(mode(1)) == doctest::Approx(std::sqrt(2.0)));
  CHECK(om1.at(mode(2)) == doctest::Approx(std::sqrt(5.0)));
  // accumulation: |w_n - n| <= m/(2n)
  for (int n = 1; n <= 16; ++n)
    CHECK(std::abs(om1.at(mode(n)) - n) <= 1.0 / (2.0 * n) + 1e-15);

  auto omc = nls2_frequencies({}, 3);
  CHECK(omc.groups[omc.group_of(mode(0, 1))].size() == 4);

  // a radial perturbation Vhat_n = <n>^{-2} cannot split the |n|^2
  // shells: (1,0) and (0,1) keep equal frequencies
  std::map<ModeIndex, double> vhat;
  for (const auto& n : square(3).modes()) vhat[n] = std::pow(n.jb(), -2.0);
  auto oms = nls2_frequencies(vhat, 3);
  CHECK(!oms.all_groups_singleton());
  CHECK(oms.group_of(mode(1, 0)) == oms.group_of(mode(0, 1)));

  // an injective perturbation does make every group a singleton
  std::map<ModeIndex, double> vinj;
  int rank = 0;
  for (const auto& n : square(3).modes())
    vinj[n] = 1e-3 / double(1 + rank++);
  CHECK(nls2_frequencies(vinj, 3).all_groups_singleton());

  // sampled law: |w_n - |n|^2| <= <n>^{-3/2}
  std::mt19937_64 rng(31);
  auto vr = random_uniform_convolution(1.5, 4, rng);
  auto omr = nls2_frequencies(vr, 4);
  for (const auto& n : square(4).modes())
    CHECK(std::abs(omr.at(n) - n.abs2()) <= std::pow(n.jb(), -1.5) + 1e-15);
}
