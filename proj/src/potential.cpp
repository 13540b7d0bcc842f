#include "birkhoff/potential.hpp"

#include <cmath>
#include <numbers>

namespace birkhoff {

namespace {
constexpr double kPi = std::numbers::pi;
}

Potential Potential::from_grid_0pi(const std::vector<double>& samples,
                                   int k_max) {
  if (samples.size() < 2)
    throw InvalidInput("Potential::from_grid_0pi: need at least two samples");
  const std::size_t m = samples.size() - 1;
  const double h = kPi / double(m);
  Potential V;
  V.cos_coef.assign(k_max + 1, 0.0);
  V.sin_coef.assign(k_max + 1, 0.0);
  for (int k = 0; k <= k_max; ++k) {
    double acc = 0;
    for (std::size_t i = 0; i <= m; ++i) {
      double w = (i == 0 || i == m) ? 0.5 : 1.0;
      acc += w * samples[i] * std::cos(k * double(i) * h);
    }
    acc *= h;
    V.cos_coef[k] = (k == 0 ? acc / kPi : 2.0 * acc / kPi);
  }
  return V;
}

double Potential::value(double x) const {
  double v = 0;
  for (std::size_t k = 0; k < cos_coef.size(); ++k)
    v += cos_coef[k] * std::cos(double(k) * x);
  for (std::size_t k = 1; k < sin_coef.size(); ++k)
    v += sin_coef[k] * std::sin(double(k) * x);
  return v;
}

std::vector<double> Potential::sample(const std::vector<double>& xs) const {
  std::vector<double> out(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) out[i] = value(xs[i]);
  return out;
}

double Potential::mean_0pi() const {
  // pi^{-1} [a0 pi + Sigma_k a_k sin(k pi)/k + b_k (1-cos(k pi))/k]
  double m = cos_coef.empty() ? 0.0 : cos_coef[0];
  for (std::size_t k = 1; k < sin_coef.size(); ++k)
    if (k % 2 == 1) m += 2.0 * sin_coef[k] / (double(k) * kPi);
  return m;
}

double Potential::antiderivative_centered(double x) const {
  double acc = ((cos_coef.empty() ? 0.0 : cos_coef[0]) - mean_0pi()) * x;
  for (std::size_t k = 1; k < cos_coef.size(); ++k)
    acc += cos_coef[k] * std::sin(double(k) * x) / double(k);
  for (std::size_t k = 1; k < sin_coef.size(); ++k)
    acc += sin_coef[k] * (1.0 - std::cos(double(k) * x)) / double(k);
  return acc;
}

double Potential::h1_norm_T() const {
  double a0 = cos_coef.empty() ? 0.0 : cos_coef[0];
  double s = 2.0 * kPi * a0 * a0;
  for (std::size_t k = 1; k < cos_coef.size(); ++k)
    s += kPi * (1.0 + double(k) * k) * cos_coef[k] * cos_coef[k];
  for (std::size_t k = 1; k < sin_coef.size(); ++k)
    s += kPi * (1.0 + double(k) * k) * sin_coef[k] * sin_coef[k];
  return std::sqrt(s);
}

namespace {
double quad_norm_0pi(const Potential& V, bool with_derivative) {
  const int m = 16 * std::max(1, V.max_wavenumber()) + 64;
  const double h = kPi / m;
  double acc = 0;
  for (int i = 0; i <= m; ++i) {
    double w = (i == 0 || i == m) ? 0.5 : 1.0;
    double x = i * h;
    double v = V.value(x);
    double term = v * v;
    if (with_derivative) {
      double d = 0;
      for (std::size_t k = 1; k < V.cos_coef.size(); ++k)
        d -= double(k) * V.cos_coef[k] * std::sin(double(k) * x);
      for (std::size_t k = 1; k < V.sin_coef.size(); ++k)
        d += double(k) * V.sin_coef[k] * std::cos(double(k) * x);
      term += d * d;
    }
    acc += w * term;
  }
  return std::sqrt(acc * h);
}
}  // namespace

double Potential::h1_norm_0pi() const { return quad_norm_0pi(*this, true); }
double Potential::l2_norm_0pi() const { return quad_norm_0pi(*this, false); }

bool Potential::is_even(double tol) const {
  for (std::size_t k = 1; k < sin_coef.size(); ++k)
    if (std::abs(sin_coef[k]) > tol) return false;
  return true;
}

int Potential::max_wavenumber() const {
  int k_max = 0;
  for (std::size_t k = 1; k < cos_coef.size(); ++k)
    if (cos_coef[k] != 0.0) k_max = int(k);
  for (std::size_t k = 1; k < sin_coef.size(); ++k)
    if (sin_coef[k] != 0.0) k_max = std::max(k_max, int(k));
  return k_max;
}

Potential& Potential::operator+=(const Potential& o) {
  cos_coef.resize(std::max(cos_coef.size(), o.cos_coef.size()), 0.0);
  sin_coef.resize(std::max(sin_coef.size(), o.sin_coef.size()), 0.0);
  for (std::size_t k = 0; k < o.cos_coef.size(); ++k)
    cos_coef[k] += o.cos_coef[k];
  for (std::size_t k = 0; k < o.sin_coef.size(); ++k)
    sin_coef[k] += o.sin_coef[k];
  return *this;
}

Potential& Potential::operator*=(double a) {
  for (auto& c : cos_coef) c *= a;
  for (auto& c : sin_coef) c *= a;
  return *this;
}

Potential random_gaussian_fourier(double s, int k_max, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Potential V;
  V.cos_coef.assign(k_max + 1, 0.0);
  V.sin_coef.assign(k_max + 1, 0.0);
  for (int n = 0; n <= k_max; ++n)
    V.cos_coef[n] = g(rng) * std::pow(japanese_bracket(double(n)), -s);
  for (int n = 1; n <= k_max; ++n)
    V.sin_coef[n] = g(rng) * std::pow(japanese_bracket(double(n)), -s);
  return V;
}

Potential random_gaussian_cosine(double s, int k_max, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Potential V;
  V.cos_coef.assign(k_max + 1, 0.0);
  V.sin_coef.assign(1, 0.0);
  for (int n = 0; n <= k_max; ++n)
    V.cos_coef[n] = g(rng) * std::pow(japanese_bracket(double(n)), -s);
  return V;
}

std::map<ModeIndex, double> random_uniform_convolution(double s, int n_max,
                                                       std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::map<ModeIndex, double> vhat;
  for (const auto& n : square(n_max).modes())
    vhat[n] = u(rng) * std::pow(n.jb(), -s);
  return vhat;
}

}  // namespace birkhoff
