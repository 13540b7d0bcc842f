#include "birkhoff/hamilton.hpp"

#include <algorithm>
#include <sstream>

namespace birkhoff {

MonoKey flip_signs(const MonoKey& k) {
  MonoKey out = k;
  for (auto& p : out) p.sigma = -p.sigma;
  std::sort(out.begin(), out.end());
  return out;
}

std::string key_str(const MonoKey& k) {
  std::ostringstream os;
  os << "[";
  for (std::size_t i = 0; i < k.size(); ++i) {
    if (i) os << ",";
    os << "(" << k[i].n.str() << (k[i].sigma > 0 ? ",+" : ",-") << ")";
  }
  os << "]";
  return os.str();
}

double key_multiplicity(const MonoKey& key) {
  double mult = 1.0;
  // r!/prod(rep!) accumulated as a running product of binomials.
  std::size_t i = 0, placed = 0;
  while (i < key.size()) {
    std::size_t j = i;
    while (j < key.size() && key[j] == key[i]) ++j;
    std::size_t rep = j - i;
    for (std::size_t t = 1; t <= rep; ++t) {
      ++placed;
      mult *= double(placed) / double(t);
    }
    i = j;
  }
  return mult;
}

std::pair<MonoKey, double> canonicalize(MonoKey pairs) {
  std::sort(pairs.begin(), pairs.end());
  double mult = key_multiplicity(pairs);
  return {std::move(pairs), mult};
}

std::pair<MonoKey, double> canonicalize(std::span<const std::int8_t> sigma,
                                        std::span<const ModeIndex> n) {
  if (sigma.size() != n.size())
    throw InvalidInput("canonicalize: arity mismatch");
  MonoKey key(sigma.size());
  for (std::size_t i = 0; i < sigma.size(); ++i)
    key[i] = KeyPair{n[i], sigma[i]};
  return canonicalize(std::move(key));
}

bool PolyHamiltonian::empty() const {
  for (const auto& [d, m] : terms)
    if (!m.empty()) return false;
  return true;
}

std::size_t PolyHamiltonian::key_count() const {
  std::size_t c = 0;
  for (const auto& [d, m] : terms) c += m.size();
  return c;
}

int PolyHamiltonian::min_degree() const {
  for (const auto& [d, m] : terms)
    if (!m.empty()) return d;
  return 0;
}

int PolyHamiltonian::max_degree() const {
  int deg = 0;
  for (const auto& [d, m] : terms)
    if (!m.empty()) deg = d;
  return deg;
}

PolyHamiltonian PolyHamiltonian::homogeneous_part(int degree) const {
  PolyHamiltonian out(lattice);
  if (auto it = terms.find(degree); it != terms.end())
    out.terms[degree] = it->second;
  return out;
}

double PolyHamiltonian::coefficient_mass() const {
  double m = 0;
  for (const auto& [d, keys] : terms)
    for (const auto& [k, c] : keys) m += std::abs(c);
  return m;
}

Complex PolyHamiltonian::coefficient(const MonoKey& key) const {
  auto it = terms.find(int(key.size()));
  if (it == terms.end()) return {};
  auto jt = it->second.find(key);
  return jt == it->second.end() ? Complex{} : jt->second;
}

PolyHamiltonian& PolyHamiltonian::operator+=(const PolyHamiltonian& o) {
  if (!(lattice == o.lattice))
    throw InvalidInput("PolyHamiltonian::operator+=: lattice mismatch");
  for (const auto& [d, keys] : o.terms)
    for (const auto& [k, c] : keys) terms[d][k] += c;
  return *this;
}

PolyHamiltonian& PolyHamiltonian::operator*=(double a) {
  for (auto& [d, keys] : terms)
    for (auto& [k, c] : keys) c *= a;
  return *this;
}

PolyHamiltonian& PolyHamiltonian::prune(double threshold) {
  for (auto& [d, keys] : terms) {
    for (auto it = keys.begin(); it != keys.end();) {
      if (std::abs(it->second) <= threshold)
        it = keys.erase(it);
      else
        ++it;
    }
  }
  return *this;
}

void add_monomial(PolyHamiltonian& h, const MonoKey& pairs, Complex c) {
  if (pairs.size() < 3)
    throw InvalidInput(
        "add_monomial: degree < 3 (quadratic terms belong to "
        "QuadraticDiagonal)");
  for (const auto& p : pairs)
    if (!h.lattice.contains(p.n))
      throw InvalidInput("add_monomial: index " + p.n.str() +
                         " outside lattice");
  auto [key, mult] = canonicalize(pairs);
  (void)mult;
  MonoKey conj_key = flip_signs(key);
  int d = int(key.size());
  h.terms[d][key] += c;
  h.terms[d][conj_key] += std::conj(c);
}

void add_monomial(PolyHamiltonian& h, std::span<const std::int8_t> sigma,
                  std::span<const ModeIndex> n, Complex c) {
  if (sigma.size() != n.size())
    throw InvalidInput("add_monomial: arity mismatch");
  MonoKey pairs(sigma.size());
  for (std::size_t i = 0; i < sigma.size(); ++i)
    pairs[i] = KeyPair{n[i], sigma[i]};
  add_monomial(h, pairs, c);
}

bool satisfies_reality(const PolyHamiltonian& h, double tol) {
  for (const auto& [d, keys] : h.terms)
    for (const auto& [k, c] : keys) {
      Complex cc = h.coefficient(flip_signs(k));
      if (std::abs(cc - std::conj(c)) > tol * std::max(1.0, std::abs(c)))
        return false;
    }
  return true;
}

double norm_q_alpha(const PolyHamiltonian& h, double q, double alpha) {
  if (q < 0 || alpha < 0) throw InvalidInput("norm_q_alpha: q, alpha >= 0");
  const int d = h.lattice.dim();
  double best = 0.0;
  std::vector<double> hvals;
  for (const auto& [deg, keys] : h.terms) {
    const int r = deg;
    const int bits = d * r;
    hvals.resize(std::size_t(1) << bits);
    for (const auto& [key, c] : keys) {
      if (c == Complex{}) continue;
      // hmean over nu in ({-1,1}^d)^r of <Sigma nu_l diamond n_l>^alpha
      for (std::size_t mask = 0; mask < hvals.size(); ++mask) {
        double sx = 0, sy = 0;
        for (int l = 0; l < r; ++l) {
          double fx = (mask >> (d * l)) & 1 ? -1.0 : 1.0;
          sx += fx * key[l].n.c[0];
          if (d == 2) {
            double fy = (mask >> (d * l + 1)) & 1 ? -1.0 : 1.0;
            sy += fy * key[l].n.c[1];
          }
        }
        double jb = std::sqrt(1.0 + sx * sx + sy * sy);
        hvals[mask] = std::pow(jb, alpha);
      }
      double w = hmean(hvals);
      for (const auto& p : key) w *= std::pow(p.n.jb(), q);
      best = std::max(best, w * std::abs(c));
    }
  }
  return best;
}

Complex evaluate_complex(const PolyHamiltonian& h, const State& u) {
  Complex total{};
  for (const auto& [deg, keys] : h.terms) {
    for (const auto& [key, c] : keys) {
      Complex prod = c * key_multiplicity(key);
      for (const auto& p : key) {
        Complex a = u.at(p.n);
        prod *= (p.sigma > 0) ? a : std::conj(a);
        if (prod == Complex{}) break;
      }
      total += prod;
    }
  }
  return total;
}

double evaluate(const PolyHamiltonian& h, const State& u) {
  return evaluate_complex(h, u).real();
}

State gradient(const PolyHamiltonian& h, const State& u) {
  State g(h.lattice);
  for (const auto& [deg, keys] : h.terms) {
    const int r = deg;
    std::vector<Complex> fac(r), pre(r + 1), suf(r + 1);
    for (const auto& [key, c] : keys) {
      double mult = key_multiplicity(key);
      for (int j = 0; j < r; ++j) {
        Complex a = u.at(key[j].n);
        fac[j] = key[j].sigma > 0 ? a : std::conj(a);
      }
      pre[0] = 1.0;
      for (int j = 0; j < r; ++j) pre[j + 1] = pre[j] * fac[j];
      suf[r] = 1.0;
      for (int j = r - 1; j >= 0; --j) suf[j] = suf[j + 1] * fac[j];
      for (int j = 0; j < r; ++j) {
        if (key[j].sigma > 0) continue;  // d/d conj(u_k) picks sigma = -1
        Complex contrib = 2.0 * mult * c * pre[j] * suf[j + 1];
        if (contrib != Complex{}) g.amp[key[j].n] += contrib;
      }
    }
  }
  return g;
}

namespace {

// Inverted index: (k, sigma) -> occurrences in keys of one Hamiltonian.
struct PairOcc {
  const MonoKey* key;
  Complex coef;
  double mult;
  int count;  // multiplicity of (k,sigma) inside *key
};

}  // namespace

PolyHamiltonian poisson_bracket(const PolyHamiltonian& h,
                                const PolyHamiltonian& k,
                                BracketStats* stats) {
  if (!(h.lattice == k.lattice))
    throw InvalidInput("poisson_bracket: lattice mismatch");
  PolyHamiltonian out(h.lattice);

  // Index K's keys by the shared contraction index.
  std::map<std::pair<ModeIndex, int>, std::vector<PairOcc>> index;
  for (const auto& [deg, keys] : k.terms) {
    for (const auto& [key, c] : keys) {
      double mult = key_multiplicity(key);
      std::size_t i = 0;
      while (i < key.size()) {
        std::size_t j = i;
        while (j < key.size() && key[j] == key[i]) ++j;
        index[{key[i].n, key[i].sigma}].push_back(
            PairOcc{&key, c, mult, int(j - i)});
        i = j;
      }
    }
  }

  MonoKey merged;
  for (const auto& [deg_h, keys_h] : h.terms) {
    for (const auto& [key_h, c_h] : keys_h) {
      double mult_h = key_multiplicity(key_h);
      std::size_t i = 0;
      while (i < key_h.size()) {
        std::size_t j = i;
        while (j < key_h.size() && key_h[j] == key_h[i]) ++j;
        const ModeIndex& kk = key_h[i].n;
        int s = key_h[i].sigma;
        int rho_h = int(j - i);
        auto it = index.find({kk, -s});
        if (it != index.end()) {
          // s = -1: H supplies (k,-), K supplies (k,+)  -> sign +1
          // s = +1: the mirrored term                    -> sign -1
          double sign = (s < 0) ? 1.0 : -1.0;
          for (const PairOcc& occ : it->second) {
            merged.clear();
            merged.reserve(key_h.size() + occ.key->size() - 2);
            bool removed = false;
            for (const auto& p : key_h) {
              if (!removed && p.n == kk && p.sigma == s) {
                removed = true;
                continue;
              }
              merged.push_back(p);
            }
            removed = false;
            for (const auto& p : *occ.key) {
              if (!removed && p.n == kk && p.sigma == -s) {
                removed = true;
                continue;
              }
              merged.push_back(p);
            }
            std::sort(merged.begin(), merged.end());
            double mult_c = key_multiplicity(merged);
            Complex coef = Complex(0.0, 2.0) * sign *
                           (mult_h * occ.mult * rho_h * occ.count / mult_c) *
                           c_h * occ.coef;
            out.terms[int(merged.size())][merged] += coef;
          }
        }
        i = j;
      }
    }
  }
  if (stats) {
    stats->dropped_mass = 0.0;  // contraction removes the shared index
    stats->output_keys = out.key_count();
  }
  return out;
}

namespace {
PolyHamiltonian diagonal_bracket(const PolyHamiltonian& h,
                                 const std::function<double(const ModeIndex&)>&
                                     weight,
                                 double scale) {
  // coefficient -> -i * scale * (sigma . w) * coefficient
  PolyHamiltonian out(h.lattice);
  for (const auto& [deg, keys] : h.terms) {
    for (const auto& [key, c] : keys) {
      double sw = 0;
      for (const auto& p : key) sw += double(p.sigma) * weight(p.n);
      Complex factor = Complex(0.0, -scale * sw);
      if (factor != Complex{}) out.terms[deg][key] = factor * c;
    }
  }
  return out;
}
}  // namespace

PolyHamiltonian poisson_with_z2(const PolyHamiltonian& h,
                                const std::map<ModeIndex, double>& weights) {
  return diagonal_bracket(
      h,
      [&](const ModeIndex& n) {
        auto it = weights.find(n);
        return it == weights.end() ? 0.0 : it->second;
      },
      2.0);
}

PolyHamiltonian poisson_with_z2(const PolyHamiltonian& h,
                                const FrequencyFamily& omega) {
  return diagonal_bracket(
      h, [&](const ModeIndex& n) { return omega.at(n); }, 2.0);
}

double QuadraticDiagonal::value(const State& u) const {
  double s = 0;
  for (const auto& [n, a] : u.amp) s += 0.5 * omega.at(n) * std::norm(a);
  return s;
}

State QuadraticDiagonal::gradient(const State& u) const {
  State g(u.lattice);
  for (const auto& [n, a] : u.amp) g.amp[n] = omega.at(n) * a;
  return g;
}

PolyHamiltonian QuadraticDiagonal::poisson_with(
    const PolyHamiltonian& h) const {
  return diagonal_bracket(
      h, [&](const ModeIndex& n) { return omega.at(n); }, 1.0);
}

double super_action(const FrequencyFamily& omega, const ModeIndex& n,
                    const State& u) {
  double s = 0;
  for (const auto& k : omega.groups[omega.group_of(n)]) s += std::norm(u.at(k));
  return s;
}

State super_action_gradient(const FrequencyFamily& omega, const ModeIndex& n,
                            const State& u) {
  State g(u.lattice);
  for (const auto& k : omega.groups[omega.group_of(n)]) {
    Complex a = u.at(k);
    if (a != Complex{}) g.amp[k] = 2.0 * a;
  }
  return g;
}

DenseMap::DenseMap(Lattice lat) : lattice(lat), modes(lat.modes()) {
  for (std::size_t i = 0; i < modes.size(); ++i) pos[modes[i]] = int(i);
}

Eigen::VectorXcd DenseMap::to_dense(const State& u) const {
  Eigen::VectorXcd v = Eigen::VectorXcd::Zero(Eigen::Index(modes.size()));
  for (const auto& [n, a] : u.amp) v[pos.at(n)] = a;
  return v;
}

State DenseMap::to_state(const Eigen::VectorXcd& v, double prune_tol) const {
  State u(lattice);
  for (std::size_t i = 0; i < modes.size(); ++i)
    if (std::abs(v[Eigen::Index(i)]) > prune_tol)
      u.amp[modes[i]] = v[Eigen::Index(i)];
  return u;
}

Eigen::VectorXd DenseMap::jb_weights(double s) const {
  Eigen::VectorXd w(Eigen::Index(modes.size()));
  for (std::size_t i = 0; i < modes.size(); ++i)
    w[Eigen::Index(i)] = std::pow(modes[i].jb(), s);
  return w;
}

}  // namespace birkhoff
