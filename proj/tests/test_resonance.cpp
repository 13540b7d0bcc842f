#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "birkhoff/resonance.hpp"
#include "doctest.h"

using namespace birkhoff;

namespace {

// Independent naive enumerator: raw nondecreasing (sigma, n) tuples,
// straight recomputation of kappa / divisor / pairing per query. Kept
// deliberately dumb; verify_strong_nonresonance must reproduce its
// violation set and min divisor exactly.
struct NaiveResult {
  double min_divisor = std::numeric_limits<double>::infinity();
  std::set<std::string> violations;
  std::uint64_t scanned = 0, paired = 0;
};

NaiveResult naive_enumerate(const FrequencyFamily& om, int r, double n_max,
                            const Lattice& range) {
  NaiveResult out;
  struct P {
    ModeIndex n;
    std::int8_t s;
  };
  std::vector<P> pairs;
  for (auto& n : range.modes())
    for (int s : {-1, +1}) pairs.push_back({n, std::int8_t(s)});

  std::vector<int> idx;
  auto handle = [&]() {
    std::vector<std::int8_t> sig;
    std::vector<ModeIndex> nn;
    for (int i : idx) {
      sig.push_back(pairs[i].s);
      nn.push_back(pairs[i].n);
    }
    if (is_paired(om, sig, nn)) {
      ++out.paired;
      return;
    }
    double kap = kappa(om, sig, nn);
    if (kap > n_max) return;
    ++out.scanned;
    DivisorQuery q{sig, nn};
    double d = small_divisor(om, q);
    bool exact_zero = false;
    if (om.integer_valued) {
      long di = 0;
      for (std::size_t i = 0; i < sig.size(); ++i)
        di += sig[i] * std::lround(om.at(nn[i]));
      exact_zero = (di == 0);
    }
    if (exact_zero)
      out.violations.insert(q.str());
    else
      out.min_divisor = std::min(out.min_divisor, std::abs(d));
  };
  auto rec = [&](auto&& self, int first, int depth) -> void {
    if (!idx.empty()) handle();
    if (depth == 0) return;
    for (int p = first; p < int(pairs.size()); ++p) {
      idx.push_back(p);
      self(self, p, depth - 1);
      idx.pop_back();
    }
  };
  rec(rec, 0, r);
  return out;
}

}  // namespace

TEST_CASE("kappa") {
  auto om = kg_frequencies(1.0, 10);  // injective
  std::vector<std::int8_t> s1{+1, -1};
  std::vector<ModeIndex> n1{mode(4), mode(4)};
  CHECK(std::isinf(kappa(om, s1, n1)));

  std::vector<std::int8_t> s2{+1, +1, -1};
  std::vector<ModeIndex> n2{mode(1), mode(2), mode(3)};
  CHECK(kappa(om, s2, n2) == doctest::Approx(std::sqrt(2.0)));

  // omega with a group {1,2}: sigma (+,-,+) on (1,2,3) cancels the group
  std::map<ModeIndex, double> table{{mode(1), 2.0},
                                    {mode(2), 2.0},
                                    {mode(3), 5.0}};
  auto om2 = frequencies_from_map(full_line(3), std::move(table));
  std::vector<std::int8_t> s3{+1, -1, +1};
  std::vector<ModeIndex> n3{mode(1), mode(2), mode(3)};
  CHECK(kappa(om2, s3, n3) == doctest::Approx(mode(3).jb()));

  std::vector<std::int8_t> bad{+1};
  CHECK_THROWS_AS(kappa(om, bad, n3), InvalidInput);

  // invariances: permutation and global sign flip
  std::vector<std::int8_t> sp{-1, +1, +1};
  std::vector<ModeIndex> np{mode(3), mode(1), mode(2)};
  CHECK(kappa(om, sp, np) == kappa(om, s2, n2));
  std::vector<std::int8_t> sf{-1, -1, +1};
  CHECK(kappa(om, sf, n2) == kappa(om, s2, n2));
}

TEST_CASE("small divisor") {
  auto om = kg_frequencies(1.0, 10);
  DivisorQuery q0{{+1, -1}, {mode(4), mode(4)}};
  CHECK(small_divisor(om, q0) == 0.0);

  DivisorQuery q1{{+1, -1}, {mode(1), mode(2)}};
  CHECK(small_divisor(om, q1) == doctest::Approx(-0.8218544151266947));

  DivisorQuery q2{{+1, +1, -1}, {mode(1), mode(1), mode(2)}};
  CHECK(small_divisor(om, q2) == doctest::Approx(0.5923591472464004));

  // sign flip
  DivisorQuery q2f{{-1, -1, +1}, {mode(1), mode(1), mode(2)}};
  CHECK(small_divisor(om, q2f) == doctest::Approx(-small_divisor(om, q2)));

  DivisorQuery bad{{+1}, {mode(11)}};
  CHECK_THROWS_AS(small_divisor(om, bad), InvalidInput);
}

TEST_CASE("is_paired") {
  auto om = kg_frequencies(1.0, 10);
  std::vector<std::int8_t> s1{+1, -1};
  std::vector<ModeIndex> n1{mode(4), mode(4)};
  CHECK(is_paired(om, s1, n1));

  std::vector<std::int8_t> s2{+1, +1, -1};
  std::vector<ModeIndex> n2{mode(1), mode(2), mode(3)};
  CHECK(!is_paired(om, s2, n2));  // odd arity

  std::vector<std::int8_t> s3{+1, +1, -1, -1};
  std::vector<ModeIndex> n3{mode(2), mode(5), mode(5), mode(2)};
  CHECK(is_paired(om, s3, n3));

  // paired implies zero divisor
  DivisorQuery q{{+1, +1, -1, -1}, n3};
  CHECK(small_divisor(om, q) == doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("to_lform rearrangement") {
  std::map<ModeIndex, double> table{{mode(1), 2.0},
                                    {mode(2), 2.0},
                                    {mode(3), 5.0}};
  auto om = frequencies_from_map(full_line(3), std::move(table));
  DivisorQuery q{{+1, +1, -1}, {mode(1), mode(2), mode(3)}};
  auto lf = to_lform(om, q);
  REQUIRE(lf.ell.size() == 2);
  CHECK(lf.m[0] == mode(1));  // group leader of {1,2}
  CHECK(lf.ell[0] == 2);
  CHECK(lf.m[1] == mode(3));
  CHECK(lf.ell[1] == -1);
  CHECK(small_divisor(om, lf) == doctest::Approx(small_divisor(om, q)));
}

TEST_CASE("verify_strong_nonresonance on KG") {
  // m = 0: integer frequencies, resonant (e.g. w1 + w2 - w3 = 0)
  auto om0 = kg_frequencies(0.0, 6);
  CHECK(om0.integer_valued);
  auto cert0 = verify_strong_nonresonance(om0, 3, 1e18, positive_line(6));
  CHECK(!cert0.valid());
  CHECK(cert0.violations.size() > 0);

  // m = 1: no violations, positive gamma_3
  auto om1 = kg_frequencies(1.0, 20);
  auto cert1 = verify_strong_nonresonance(om1, 3, 1e18, positive_line(20));
  CHECK(cert1.valid());
  CHECK(cert1.gamma > 0);
  CHECK(cert1.min_divisor > 0);
  // every scanned bucket obeys the fitted law
  for (auto& [kap, m] : cert1.bucket_minima)
    CHECK(m >= cert1.gamma * std::pow(kap, -cert1.beta) - 1e-15);
}

TEST_CASE("strong verifier matches the naive enumerator") {
  struct Case {
    FrequencyFamily om;
    int r;
    Lattice range;
  };
  std::vector<Case> cases;
  cases.push_back({kg_frequencies(1.0, 12), 3, positive_line(12)});
  cases.push_back({kg_frequencies(1.0, 8), 4, positive_line(8)});
  cases.push_back({kg_frequencies(0.0, 9), 3, positive_line(9)});
  cases.push_back({kg_frequencies(0.25, 7), 4, positive_line(7)});
  std::map<ModeIndex, double> vhat;  // resonant 2d family
  cases.push_back({nls2_frequencies(vhat, 2), 3, square(2)});

  for (auto& c : cases) {
    auto cert = verify_strong_nonresonance(c.om, c.r, 1e18, c.range);
    auto naive = naive_enumerate(c.om, c.r, 1e18, c.range);
    std::set<std::string> got;
    for (auto& v : cert.violations) got.insert(v.str());
    CHECK(got == naive.violations);
    if (std::isfinite(naive.min_divisor))
      CHECK(cert.min_divisor == naive.min_divisor);
    CHECK(cert.scanned == naive.scanned);
    CHECK(cert.paired_count == naive.paired);
  }
}

TEST_CASE("verify_limited_nonresonance") {
  auto om = kg_frequencies(1.0, 12);
  // r = 2: reduces to spectral gaps with the small side <= N
  auto cert = verify_limited_nonresonance(om, 2, 3.0, positive_line(12));
  CHECK(cert.limited);
  CHECK(cert.beta == 0.0);
  CHECK(cert.gamma == doctest::Approx(cert.min_divisor));
  CHECK(cert.gamma > 0);

  // increasing range never increases gamma
  auto cert2 = verify_limited_nonresonance(om, 4, 3.0, positive_line(6));
  auto cert3 = verify_limited_nonresonance(om, 4, 3.0, positive_line(12));
  CHECK(cert3.gamma <= cert2.gamma + 1e-15);
}

TEST_CASE("bootstrap weak to strong") {
  auto om = kg_frequencies(1.0, 24);
  Lattice range = positive_line(24);
  auto [alpha, gamma] = fit_weak_params(om, 3, 0.0, range);
  CHECK(alpha >= 0);
  CHECK(gamma > 0);
  auto [C, nu] = fit_accumulation(om, 0.0);
  CHECK(C > 0);
  CHECK(nu > 0.5);  // |w_n - n| <= m/(2n) decays like 1/n

  BootstrapParams p{alpha, gamma, 0.0, C, nu, 3};
  auto res = bootstrap_weak_to_strong(p, om, range);
  REQUIRE(res.steps.size() == 3);
  // initialization (beta_1, eta_1) = (alpha, gamma)
  CHECK(res.steps[0].beta == alpha);
  CHECK(res.steps[0].eta == gamma);
  // case-1 branch: eta halves, beta unchanged; case-2: beta -> alpha beta/nu
  for (std::size_t i = 1; i < res.steps.size(); ++i) {
    CHECK(res.steps[i].eta_case1 ==
          doctest::Approx(res.steps[i - 1].eta / 2.0));
    CHECK(res.steps[i].beta_case2 ==
          doctest::Approx(alpha * res.steps[i - 1].beta / nu));
    CHECK(res.steps[i].eta == doctest::Approx(std::min(
                                  res.steps[i].eta_case1,
                                  res.steps[i].eta_case2)));
  }
  CHECK(res.verified);
  CHECK(res.worst_margin >= 1.0);

  // hypothesis failure points at the offender
  BootstrapParams tight = p;
  tight.gamma = 1e6;  // absurd weak constant
  CHECK_THROWS_AS(bootstrap_weak_to_strong(tight, om, range),
                  HypothesisFailure);
}

TEST_CASE("partial fraction divisor") {
  std::vector<long> l1{1}, n1{0};
  auto r1 = partial_fraction_divisor(l1, n1);
  CHECK(r1.j == 1);
  CHECK(r1.value == doctest::Approx(1.0));

  std::vector<long> l2{1, -1}, n2{1, 2};
  auto r2 = partial_fraction_divisor(l2, n2);
  CHECK(r2.j == 3);
  CHECK(r2.value == doctest::Approx(12.0 / 35.0));
  CHECK(r2.exact == "-12/35");

  // never returns j colliding with n_k or 2 n_k; value nonzero
  std::mt19937_64 rng(77);
  std::uniform_int_distribution<long> li(-3, 3);
  for (int t = 0; t < 200; ++t) {
    std::set<long> ns;
    std::uniform_int_distribution<long> ni(0, 12);
    int size = 1 + t % 4;
    while (int(ns.size()) < size) ns.insert(ni(rng));
    std::vector<long> n(ns.begin(), ns.end());
    std::vector<long> l(n.size());
    for (auto& x : l) {
      do {
        x = li(rng);
      } while (x == 0);
    }
    auto r = partial_fraction_divisor(l, n);
    CHECK(r.value > 0);
    for (long nk : n) {
      CHECK(r.j != nk);
      CHECK(r.j != 2 * nk);
    }
    CHECK(r.j >= 1);
    CHECK(r.j <= 5 * int(n.size()));
  }

  CHECK_THROWS_AS(partial_fraction_divisor(std::vector<long>{1, 1},
                                           std::vector<long>{2, 1}),
                  InvalidInput);
  CHECK_THROWS_AS(partial_fraction_divisor(std::vector<long>{0},
                                           std::vector<long>{1}),
                  InvalidInput);
}

TEST_CASE("genericity monte carlo: empty and deterministic") {
  GenericityConfig cfg;
  cfg.law = PotentialLaw::UniformConvolution;
  cfg.trials = 0;
  cfg.index_range = square(3);
  auto rep = genericity_montecarlo(cfg);
  CHECK(rep.per_trial.empty());

  cfg.trials = 3;
  cfg.r = 3;
  cfg.seed = 42;
  auto r1 = genericity_montecarlo(cfg);
  auto r2 = genericity_montecarlo(cfg);
  REQUIRE(r1.per_trial.size() == 3);
  CHECK(r1.total_violations == 0);
  for (int i = 0; i < 3; ++i) {
    CHECK(r1.per_trial[i].min_divisor == r2.per_trial[i].min_divisor);
    CHECK(r1.per_trial[i].potential_norm == r2.per_trial[i].potential_norm);
  }
}
