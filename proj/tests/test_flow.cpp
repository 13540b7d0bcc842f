#include <random>

#include "birkhoff/hamilton.hpp"
#include "doctest.h"

using namespace birkhoff;

namespace {
State random_state(const Lattice& lat, std::mt19937_64& rng, double scale) {
  std::normal_distribution<double> g;
  State u(lat);
  for (const auto& n : lat.modes()) u.set(n, scale * Complex{g(rng), g(rng)});
  return u;
}
}  // namespace

TEST_CASE("flow of zero generator is the identity") {
  Lattice lat = positive_line(4);
  PolyHamiltonian chi(lat);
  std::mt19937_64 rng(1);
  auto u = random_state(lat, rng, 0.3);
  FlowOptions opts;
  opts.want_differential = true;
  auto res = flow(chi, u, 1.0, 1e-10, opts);
  for (const auto& n : lat.modes())
    CHECK(std::abs(res.u.at(n) - u.at(n)) < 1e-14);
  CHECK((res.dphi->array() -
         Eigen::MatrixXd::Identity(2 * 4, 2 * 4).array())
            .abs()
            .maxCoeff() < 1e-14);
}

TEST_CASE("flow roundtrip, conservation, symplecticity, dphi bounds") {
  Lattice lat = positive_line(5);
  std::mt19937_64 rng(2);
  std::normal_distribution<double> g;
  PolyHamiltonian chi(lat);
  auto ms = lat.modes();
  std::uniform_int_distribution<std::size_t> pick(0, ms.size() - 1);
  std::uniform_int_distribution<int> sg(0, 1);
  for (int t = 0; t < 6; ++t) {
    MonoKey key(3);
    for (int j = 0; j < 3; ++j)
      key[j] = KeyPair{ms[pick(rng)], std::int8_t(sg(rng) ? 1 : -1)};
    add_monomial(chi, key, Complex{g(rng), g(rng)});
  }

  double tol = 1e-11;
  // stay inside the admissible radius eps_1 ~ (K ||chi||)^{-1/(r-2)} where
  // the dPhi <= 2 bound applies
  double eps1 = 1.0 / (9.0 * norm_q_alpha(chi, 0.0, 0.0) *
                       double(chi.key_count()));
  auto u0 = random_state(lat, rng, 0.3 * eps1);
  FlowOptions opts;
  opts.want_differential = true;
  auto res = flow(chi, u0, 1.0, tol, opts);

  // invertibility: Phi^{-t} o Phi^t = id within 10 tol
  CHECK(res.roundtrip_error <= 10 * tol * std::max(1.0, u0.l2_norm()));

  // the flow conserves its own generator
  CHECK(std::abs(evaluate(chi, res.u) - evaluate(chi, u0)) <=
        10 * tol * std::max(std::abs(evaluate(chi, u0)), 1.0));

  // symplecticity of the differential
  CHECK(res.symplecticity_residual <= 10 * tol);

  // dPhi operator norm <= 2 at small radius, in h^s and h^{-s}
  CHECK(res.dphi_operator_norm(0.5) <= 2.0);
  CHECK(res.dphi_operator_norm(-0.5) <= 2.0);
}

TEST_CASE("flow closeness scales like ||chi|| ||u||^{r-1}") {
  Lattice lat = positive_line(4);
  PolyHamiltonian chi(lat);
  std::vector<std::int8_t> s{+1, +1, -1};
  std::vector<ModeIndex> n{mode(1), mode(2), mode(3)};
  add_monomial(chi, s, n, Complex{0.4, 0.1});

  std::mt19937_64 rng(5);
  auto dir = random_state(lat, rng, 1.0);
  double nd = dir.l2_norm();
  for (auto& [k, a] : dir.amp) a /= nd;

  double prev_ratio = 0;
  for (double radius : {0.2, 0.1, 0.05, 0.025}) {
    State u = dir;
    for (auto& [k, a] : u.amp) a *= radius;
    auto res = flow(chi, u, 1.0, 1e-12);
    State diff = res.u;
    for (auto& [k, a] : u.amp) diff.amp[k] -= a;
    double ratio = diff.hs_norm(0) / std::pow(radius, 2.0);  // r-1 = 2
    if (prev_ratio > 0)
      CHECK(ratio == doctest::Approx(prev_ratio).epsilon(0.25));
    prev_ratio = ratio;
  }
}

TEST_CASE("flow failure on blowup guard") {
  Lattice lat = positive_line(2);
  PolyHamiltonian chi(lat);
  // steep cubic to force quick growth at large amplitude
  std::vector<std::int8_t> s{+1, +1, +1};
  std::vector<ModeIndex> n{mode(1), mode(1), mode(1)};
  add_monomial(chi, s, n, Complex{40.0, 0.0});
  State u(lat);
  u.set(mode(1), Complex{3.0, 0.0});
  FlowOptions opts;
  opts.divergence_guard = 2.0;
  opts.want_roundtrip = false;
  CHECK_THROWS_AS(flow(chi, u, 1.0, 1e-8, opts), FlowFailure);
}
