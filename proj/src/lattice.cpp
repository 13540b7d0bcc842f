#include "birkhoff/lattice.hpp"

#include <algorithm>
#include <sstream>

namespace birkhoff {

double japanese_bracket(std::span<const double> x) {
  double s = 0;
  for (double v : x) s += v * v;
  return std::sqrt(1.0 + s);
}

double hmean(std::span<const double> xs) {
  if (xs.empty()) throw InvalidInput("hmean: empty list");
  double s = 0;
  for (double x : xs) {
    if (!(x > 0)) throw InvalidInput("hmean: nonpositive entry");
    s += 1.0 / x;
  }
  return double(xs.size()) / s;
}

std::string ModeIndex::str() const {
  std::ostringstream os;
  if (dim == 1) {
    os << c[0];
  } else {
    os << "(" << c[0] << "," << c[1] << ")";
  }
  return os.str();
}

bool Lattice::contains(const ModeIndex& n) const {
  if (n.dim != dim()) return false;
  switch (kind) {
    case LatticeKind::PositiveLine:
      return n.c[0] >= 1 && n.c[0] <= radius;
    case LatticeKind::NonpositiveLine:
      return n.c[0] >= -radius && n.c[0] <= 0;
    case LatticeKind::FullLine:
      return n.c[0] >= -radius && n.c[0] <= radius;
    case LatticeKind::Square:
      return n.linf() <= radius;
  }
  return false;
}

std::vector<ModeIndex> Lattice::modes() const {
  std::vector<ModeIndex> out;
  switch (kind) {
    case LatticeKind::PositiveLine:
      for (int n = 1; n <= radius; ++n) out.push_back(mode(n));
      break;
    case LatticeKind::NonpositiveLine:
      for (int n = -radius; n <= 0; ++n) out.push_back(mode(n));
      break;
    case LatticeKind::FullLine:
      for (int n = -radius; n <= radius; ++n) out.push_back(mode(n));
      break;
    case LatticeKind::Square:
      for (int nx = -radius; nx <= radius; ++nx)
        for (int ny = -radius; ny <= radius; ++ny) out.push_back(mode(nx, ny));
      break;
  }
  return out;
}

std::size_t Lattice::size() const {
  switch (kind) {
    case LatticeKind::PositiveLine:
      return radius;
    case LatticeKind::NonpositiveLine:
      return radius + 1;
    case LatticeKind::FullLine:
      return 2 * std::size_t(radius) + 1;
    case LatticeKind::Square: {
      std::size_t side = 2 * std::size_t(radius) + 1;
      return side * side;
    }
  }
  return 0;
}

std::string Lattice::str() const {
  std::ostringstream os;
  switch (kind) {
    case LatticeKind::PositiveLine:
      os << "N*[1," << radius << "]";
      break;
    case LatticeKind::NonpositiveLine:
      os << "Z[-" << radius << ",0]";
      break;
    case LatticeKind::FullLine:
      os << "Z[-" << radius << "," << radius << "]";
      break;
    case LatticeKind::Square:
      os << "Z^2[|n|<=" << radius << "]";
      break;
  }
  return os.str();
}

State& State::set(const ModeIndex& n, Complex a) {
  if (!lattice.contains(n))
    throw InvalidInput("State::set: index " + n.str() + " outside lattice " +
                       lattice.str());
  amp[n] = a;
  return *this;
}

double State::hs_norm(double s) const {
  double acc = 0;
  for (const auto& [n, a] : amp) acc += std::pow(n.jb(), 2 * s) * std::norm(a);
  return std::sqrt(acc);
}

State& State::prune(double threshold) {
  for (auto it = amp.begin(); it != amp.end();) {
    if (std::abs(it->second) <= threshold)
      it = amp.erase(it);
    else
      ++it;
  }
  return *this;
}

State& State::operator+=(const State& o) {
  if (!(lattice == o.lattice))
    throw InvalidInput("State::operator+=: lattice mismatch");
  for (const auto& [n, a] : o.amp) amp[n] += a;
  return *this;
}

State& State::operator*=(double a) {
  for (auto& [n, v] : amp) v *= a;
  return *this;
}

double dot_real(const State& a, const State& b) {
  double s = 0;
  const auto& small = a.amp.size() <= b.amp.size() ? a : b;
  const auto& big = a.amp.size() <= b.amp.size() ? b : a;
  for (const auto& [n, v] : small.amp) {
    auto it = big.amp.find(n);
    if (it != big.amp.end()) s += std::real(std::conj(v) * it->second);
  }
  return s;
}

}  // namespace birkhoff
