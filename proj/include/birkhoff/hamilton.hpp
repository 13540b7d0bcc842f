#pragma once

#include <Eigen/Dense>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "birkhoff/frequency.hpp"
#include "birkhoff/lattice.hpp"

namespace birkhoff {

/// One factor u_n^{sigma} of a monomial; sigma = +1 for u_n, -1 for its
/// conjugate.
struct KeyPair {
  ModeIndex n;
  std::int8_t sigma = +1;
  auto operator<=>(const KeyPair&) const = default;
};

/// Canonical key: the multiset {(sigma_j, n_j)} stored as a tuple sorted by
/// (n lexicographic, sigma). One key represents its whole orbit under
/// permutations.
using MonoKey = std::vector<KeyPair>;

MonoKey flip_signs(const MonoKey& k);
std::string key_str(const MonoKey& k);

/// Sorts the pairs and returns the orbit multiplicity r!/prod(rep!), the
/// number of distinct orderings of the multiset.
std::pair<MonoKey, double> canonicalize(std::span<const std::int8_t> sigma,
                                        std::span<const ModeIndex> n);
std::pair<MonoKey, double> canonicalize(MonoKey pairs);
double key_multiplicity(const MonoKey& sorted_key);

/// Sparse symmetrized polynomial Hamiltonian, graded by degree >= 3
/// (quadratic parts live in QuadraticDiagonal). The stored value at a
/// canonical key is the fully symmetrized tensor coefficient H^sigma_n, so
/// the norm and bracket formulas apply verbatim; evaluation multiplies by
/// the orbit multiplicity.
struct PolyHamiltonian {
  Lattice lattice;
  std::map<int, std::map<MonoKey, Complex>> terms;

  PolyHamiltonian() = default;
  explicit PolyHamiltonian(Lattice lat) : lattice(lat) {}

  bool empty() const;
  std::size_t key_count() const;
  int min_degree() const;
  int max_degree() const;
  /// Extracts the homogeneous part of one degree.
  PolyHamiltonian homogeneous_part(int degree) const;
  /// Sum of |coefficient| over keys (a crude mass, used by ledgers).
  double coefficient_mass() const;

  Complex coefficient(const MonoKey& key) const;
  PolyHamiltonian& operator+=(const PolyHamiltonian& o);
  PolyHamiltonian& operator*=(double a);
  friend PolyHamiltonian operator+(PolyHamiltonian a,
                                   const PolyHamiltonian& b) {
    return a += b;
  }
  friend PolyHamiltonian operator*(double a, PolyHamiltonian h) {
    return h *= a;
  }
  /// Drops keys with |coefficient| <= threshold. Explicit calls only.
  PolyHamiltonian& prune(double threshold);
};

/// Stores c at the canonical key of (sigma,n) and conj(c) at the
/// sign-flipped key, accumulating with existing values; the reality
/// condition holds by construction. Degree < 3 is refused. If the flipped
/// key coincides with the key itself the two writes merge into 2*Re(c).
void add_monomial(PolyHamiltonian& h, std::span<const std::int8_t> sigma,
                  std::span<const ModeIndex> n, Complex c);
void add_monomial(PolyHamiltonian& h, const MonoKey& pairs, Complex c);

/// Checks the reality condition coefficientwise.
bool satisfies_reality(const PolyHamiltonian& h, double tol = 1e-12);

/// ||H||_{q,alpha}: sup over stored keys of
///   hmean_{nu} <Sigma nu_l * n_l>^alpha * prod <n_j>^q * |coefficient|
/// with nu running over ({-1,1}^d)^r acting componentwise on indices.
double norm_q_alpha(const PolyHamiltonian& h, double q, double alpha);

/// Value of H at u; real by the reality condition (the real part is
/// returned, the imaginary part is rounding noise).
double evaluate(const PolyHamiltonian& h, const State& u);
Complex evaluate_complex(const PolyHamiltonian& h, const State& u);

/// (grad H(u))_k = 2 d/d(conj u_k) H(u).
State gradient(const PolyHamiltonian& h, const State& u);

struct BracketStats {
  /// |coefficient| mass of outputs whose merged key left the lattice.
  /// Contraction removes the shared index, so for same-lattice inputs this
  /// stays 0; it is recorded per the certificate contract.
  double dropped_mass = 0.0;
  std::size_t output_keys = 0;
};

/// Poisson bracket {H,K} of degree r+r'-2, via the coefficient contraction
/// M = 2i r r' Sigma_k (H^{sigma,-1}_{n,k} K^{sigma',1}_{n',k} -
/// H^{sigma,1}_{n,k} K^{sigma',-1}_{n',k}) followed by symmetrization.
PolyHamiltonian poisson_bracket(const PolyHamiltonian& h,
                                const PolyHamiltonian& k,
                                BracketStats* stats = nullptr);

/// {H, Z2} for the diagonal quadratic Z2(u) = Sigma w_n |u_n|^2 (no 1/2
/// factor): each coefficient is multiplied by -2i(sigma_1 w_{n_1} + ... +
/// sigma_r w_{n_r}). Weights default to 0 outside the table, which makes
/// the overload usable with group indicators.
PolyHamiltonian poisson_with_z2(const PolyHamiltonian& h,
                                const std::map<ModeIndex, double>& weights);
PolyHamiltonian poisson_with_z2(const PolyHamiltonian& h,
                                const FrequencyFamily& omega);

/// Z2(u) = 1/2 Sigma omega_n |u_n|^2, the diagonal quadratic of the normal
/// form. Its bracket against H carries the 1/2: {H, Z2} multiplies each
/// coefficient by -i(sigma . omega).
struct QuadraticDiagonal {
  FrequencyFamily omega;

  double value(const State& u) const;
  State gradient(const State& u) const;  // (omega_n u_n)_n
  PolyHamiltonian poisson_with(const PolyHamiltonian& h) const;
};

/// Super-action J_n(u) = Sigma_{omega_k = omega_n} |u_k|^2 and its gradient
/// 2 u restricted to the group.
double super_action(const FrequencyFamily& omega, const ModeIndex& n,
                    const State& u);
State super_action_gradient(const FrequencyFamily& omega, const ModeIndex& n,
                            const State& u);

/// Maps between sparse states and dense complex vectors over lat.modes().
struct DenseMap {
  Lattice lattice;
  std::vector<ModeIndex> modes;
  std::map<ModeIndex, int> pos;

  explicit DenseMap(Lattice lat);
  Eigen::VectorXcd to_dense(const State& u) const;
  State to_state(const Eigen::VectorXcd& v, double prune_tol = 0.0) const;
  int size() const { return int(modes.size()); }
  /// Diagonal of <k>^s over the enumeration.
  Eigen::VectorXd jb_weights(double s) const;
};

struct FlowOptions {
  bool want_differential = false;
  bool want_roundtrip = true;
  int symplectic_samples = 4;
  double divergence_guard = 1e3;  // abort when ||u|| grows past this factor
  std::uint64_t seed = 12345;    // for the symplecticity probe tangents
};

/// Result of integrating du/dt = i grad chi(u) to time t.
struct FlowResult {
  State u;
  /// Real 2N x 2N differential in the (Re,Im) basis of DenseMap order;
  /// present when requested.
  std::optional<Eigen::MatrixXd> dphi;
  DenseMap map;
  int steps_accepted = 0;
  int steps_rejected = 0;
  double symplecticity_residual = 0.0;
  double roundtrip_error = 0.0;

  explicit FlowResult(DenseMap m) : map(std::move(m)) {}
  /// Applies the differential to a tangent state.
  State apply_differential(const State& v) const;
  /// Operator norm of dphi on h^s (s may be negative).
  double dphi_operator_norm(double s) const;
};

/// Hamiltonian flow Phi_chi^t with adaptive Dormand-Prince 5(4) stepping at
/// local tolerance tol; the differential is propagated through the
/// variational equation. Flows here run for |t| <= O(1) (Lie transforms);
/// long-time integration lives in dynamics.
FlowResult flow(const PolyHamiltonian& chi, const State& u0, double t,
                double tol, const FlowOptions& opts = {});

/// Real 2N x 2N Jacobian of the vector field X(u) = i grad chi(u), in the
/// interleaved (Re u_0, Im u_0, Re u_1, ...) coordinates.
Eigen::MatrixXd vector_field_jacobian(const PolyHamiltonian& chi,
                                      const DenseMap& map,
                                      const Eigen::VectorXcd& u);

}  // namespace birkhoff
