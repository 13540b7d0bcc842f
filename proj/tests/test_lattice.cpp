#include <algorithm>
#include <random>

#include "birkhoff/lattice.hpp"
#include "doctest.h"

using namespace birkhoff;

TEST_CASE("japanese bracket") {
  CHECK(japanese_bracket(0.0) == 1.0);
  CHECK(japanese_bracket(1.0) == doctest::Approx(1.4142135623730951));
  // <(3,4)> = sqrt(1+9+16)
  CHECK(japanese_bracket(3.0, 4.0) == doctest::Approx(5.0990195135927845));
  // >= max(1,|x|)
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-50, 50);
  for (int i = 0; i < 200; ++i) {
    double x = u(rng);
    CHECK(japanese_bracket(x) >= std::max(1.0, std::abs(x)));
  }
}

TEST_CASE("hmean") {
  std::vector<double> a{1, 1, 1};
  CHECK(hmean(a) == doctest::Approx(1.0));
  std::vector<double> b{1, 3};
  CHECK(hmean(b) == doctest::Approx(1.5));
  std::vector<double> c{4.25};
  CHECK(hmean(c) == doctest::Approx(4.25));
  CHECK_THROWS_AS(hmean(std::vector<double>{}), InvalidInput);
  CHECK_THROWS_AS(hmean(std::vector<double>{1.0, -2.0}), InvalidInput);
  // min <= hmean <= max
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.01, 10.0);
  for (int i = 0; i < 100; ++i) {
    std::vector<double> xs(1 + i % 7);
    for (auto& x : xs) x = u(rng);
    double h = hmean(xs);
    CHECK(h >= *std::min_element(xs.begin(), xs.end()) - 1e-12);
    CHECK(h <= *std::max_element(xs.begin(), xs.end()) + 1e-12);
  }
}

TEST_CASE("hs norm") {
  State u(positive_line(8));
  u.set(mode(3), Complex{1, 0});
  // single unit amplitude at k: <k>^s
  CHECK(u.hs_norm(2.0) == doctest::Approx(std::pow(std::sqrt(10.0), 2.0)));
  State v(positive_line(8));
  v.set(mode(1), 1.0).set(mode(2), 1.0);
  CHECK(v.hs_norm(0.0) == doctest::Approx(std::sqrt(2.0)));
  // {1@1, 1@2}, s=1 -> sqrt(2+5)
  CHECK(v.hs_norm(1.0) == doctest::Approx(std::sqrt(7.0)));

  // monotone in s for 0 <= s <= t
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  std::uniform_real_distribution<double> su(0.0, 3.0);
  for (int trial = 0; trial < 50; ++trial) {
    State w(full_line(6));
    for (int n = -6; n <= 6; ++n) w.set(mode(n), Complex{g(rng), g(rng)});
    double s = su(rng), t = s + su(rng);
    CHECK(w.hs_norm(s) <= w.hs_norm(t) + 1e-12);
  }
}

TEST_CASE("lattice membership and order") {
  CHECK(positive_line(5).modes().size() == 5);
  CHECK(nonpositive_line(5).modes().size() == 6);
  CHECK(full_line(5).modes().size() == 11);
  CHECK(square(2).modes().size() == 25);
  CHECK(positive_line(5).contains(mode(5)));
  CHECK(!positive_line(5).contains(mode(6)));
  CHECK(!positive_line(5).contains(mode(0)));
  CHECK(square(2).contains(mode(-2, 2)));
  CHECK(!square(2).contains(mode(3, 0)));
  CHECK(mode(1, 2) < mode(2, -5));
  CHECK(mode(-3) < mode(2));

  State s(positive_line(4));
  CHECK_THROWS_AS(s.set(mode(9), 1.0), InvalidInput);
}

TEST_CASE("state prune is explicit") {
  State u(positive_line(4));
  u.set(mode(1), 1e-18).set(mode(2), 1.0);
  CHECK(u.amp.size() == 2);  // nothing dropped implicitly
  u.prune(1e-12);
  CHECK(u.amp.size() == 1);
}
