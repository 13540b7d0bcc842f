#pragma once

#include <array>
#include <cmath>
#include <compare>
#include <complex>
#include <cstdint>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace birkhoff {

using Complex = std::complex<double>;

/// Domain error carrying a machine-readable detail payload (serialized to
/// JSON at the CLI boundary). Subclasses distinguish exit-code classes.
class Error : public std::runtime_error {
 public:
  Error(std::string what, std::string detail_json = "{}")
      : std::runtime_error(std::move(what)), detail(std::move(detail_json)) {}
  std::string detail;
};

struct InvalidInput : Error {
  using Error::Error;
};
struct ResonanceViolation : Error {
  using Error::Error;
};
struct FlowFailure : Error {
  using Error::Error;
};
struct IntegrationAbort : Error {
  using Error::Error;
};
struct HypothesisFailure : Error {
  using Error::Error;
};
struct InternalError : Error {
  using Error::Error;
};

/// Japanese bracket <x> = sqrt(1+|x|^2).
inline double japanese_bracket(double x) { return std::sqrt(1.0 + x * x); }
inline double japanese_bracket(double x, double y) {
  return std::sqrt(1.0 + x * x + y * y);
}
double japanese_bracket(std::span<const double> x);

/// Harmonic mean of a nonempty list of positive reals.
double hmean(std::span<const double> xs);

/// A point of the index lattice Z_d, d in {1,2}. Total order is
/// lexicographic on (dim, coords); it breaks the ties <n> leaves in Z^d.
struct ModeIndex {
  std::int8_t dim = 1;
  std::array<std::int32_t, 2> c{0, 0};

  ModeIndex() = default;
  explicit ModeIndex(int n) : dim(1), c{n, 0} {}
  ModeIndex(int nx, int ny) : dim(2), c{nx, ny} {}

  double abs2() const {
    double s = 0;
    for (int i = 0; i < dim; ++i) s += double(c[i]) * c[i];
    return s;
  }
  long iabs2() const {
    long s = 0;
    for (int i = 0; i < dim; ++i) s += long(c[i]) * c[i];
    return s;
  }
  int linf() const {
    int m = 0;
    for (int i = 0; i < dim; ++i) m = std::max(m, std::abs(c[i]));
    return m;
  }
  /// <n>
  double jb() const { return std::sqrt(1.0 + abs2()); }

  auto operator<=>(const ModeIndex&) const = default;
  std::string str() const;
};

inline ModeIndex mode(int n) { return ModeIndex(n); }
inline ModeIndex mode(int nx, int ny) { return ModeIndex(nx, ny); }

enum class LatticeKind : std::uint8_t {
  PositiveLine,     // {1,...,R} in Z       (KG, Dirichlet NLS)
  NonpositiveLine,  // {-R,...,0} in Z      (Neumann families)
  FullLine,         // {-R,...,R} in Z      (periodic NLS)
  Square,           // {|n|_inf <= R} in Z^2 (2d convolution NLS)
};

/// Truncated index lattice Z_d: the ambient index set of states and
/// Hamiltonians, |n|_inf <= radius.
struct Lattice {
  LatticeKind kind = LatticeKind::PositiveLine;
  int radius = 0;

  int dim() const { return kind == LatticeKind::Square ? 2 : 1; }
  bool contains(const ModeIndex& n) const;
  /// Sorted (lexicographic) enumeration of the lattice.
  std::vector<ModeIndex> modes() const;
  std::size_t size() const;

  bool operator==(const Lattice&) const = default;
  std::string str() const;
};

inline Lattice positive_line(int radius) {
  return {LatticeKind::PositiveLine, radius};
}
inline Lattice nonpositive_line(int radius) {
  return {LatticeKind::NonpositiveLine, radius};
}
inline Lattice full_line(int radius) { return {LatticeKind::FullLine, radius}; }
inline Lattice square(int radius) { return {LatticeKind::Square, radius}; }

/// Truncated sequence state: sparse map ModeIndex -> amplitude with all
/// stored indices inside the lattice. Amplitudes are dropped only by
/// explicit prune() calls.
struct State {
  Lattice lattice;
  std::map<ModeIndex, Complex> amp;

  State() = default;
  explicit State(Lattice lat) : lattice(lat) {}

  State& set(const ModeIndex& n, Complex a);
  Complex at(const ModeIndex& n) const {
    auto it = amp.find(n);
    return it == amp.end() ? Complex{0.0, 0.0} : it->second;
  }

  /// h^s norm (Sigma <k>^{2s} |u_k|^2)^{1/2}.
  double hs_norm(double s) const;
  double l2_norm() const { return hs_norm(0.0); }

  /// Drops entries with |amp| <= threshold. Never called implicitly.
  State& prune(double threshold);

  State& operator+=(const State& o);
  State& operator*=(double a);
  friend State operator+(State a, const State& b) { return a += b; }
  friend State operator*(double a, State u) { return u *= a; }
};

/// Real scalar product (u,v) = Sigma Re(conj(u_k) v_k).
double dot_real(const State& a, const State& b);

}  // namespace birkhoff
