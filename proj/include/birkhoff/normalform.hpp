#pragma once

#include <map>
#include <span>

#include "birkhoff/hamilton.hpp"

namespace birkhoff {

struct NormalFormConfig {
  int p = 3;  // order of the nonlinearity
  int r = 5;  // elimination order
  double N = 1;                // super-action cutoff: kappa <= N eliminated
  double N_max = std::numeric_limits<double>::infinity();
  double eta = 1.0;            // ||P^(j)|| <= c_j eta^{-(j-2)} scaling
  double q = 0.0, alpha = 2.0, s = 1.0;
  double flow_tol = 1e-10;
  double gamma_floor = 0.0;    // hard floor on admissible divisors
  /// (gamma_r, beta_r) per order from the admitting resonance certificate;
  /// the per-step floor becomes max(gamma_floor, gamma_r N^{-beta_r}).
  std::map<int, std::pair<double, double>> resonance_constants;
  int ledger_max_degree = 0;   // 0 means r+1
};

/// L carries the keys with kappa <= N, U the rest (including the fully
/// paired kappa = +inf ones); L + U = Q exactly.
struct SplitResult {
  PolyHamiltonian low;        // L
  PolyHamiltonian resonant;   // U
};
SplitResult split_resonant(const PolyHamiltonian& Q,
                           const FrequencyFamily& omega, double N);

struct HomologicalResult {
  PolyHamiltonian chi;
  double min_divisor = std::numeric_limits<double>::infinity();
};

/// chi^sigma_n = L^sigma_n / (i sigma.omega); throws ResonanceViolation
/// naming the key when a divisor falls below the floor. Solves
/// {chi, Z2} + L = 0 coefficientwise (Z2 in the 1/2 convention).
HomologicalResult solve_homological(const PolyHamiltonian& L,
                                    const FrequencyFamily& omega,
                                    double divisor_floor);

struct LieExpandResult {
  std::map<int, PolyHamiltonian> q_new;  // degrees p..r-1 after the step
  PolyHamiltonian tail;                  // degrees in [r, ledger cutoff]
};

/// One conjugation step of the iteration: with chi homogeneous of degree
/// r_star,
///   Q#^(j) = Q^(j)                                   for j <  r_star
///   Q#^(r_star) = Q^(r_star) - L = U
///   Q#^(j) = Sigma_{j*+k(r_star-2)=j} ad_chi^k Q^(j*) / k!
///          - Sigma_{r_star+k(r_star-2)=j} ad_chi^k L / (k+1)!   otherwise,
/// with every term of degree >= r routed to the tail ledger (truncated at
/// ledger_max_degree). L is recovered as -{chi, Z2}.
LieExpandResult lie_expand(const QuadraticDiagonal& Z2,
                           const std::map<int, PolyHamiltonian>& Qs,
                           const PolyHamiltonian& chi, int r, int r_star,
                           int ledger_max_degree);

/// tau^(0) / tau^(1) stored as ordered (chi, t = +-1) flow segments.
struct ComposedFlow {
  std::vector<const PolyHamiltonian*> gens;  // applied left to right
  double time = 1.0;                         // +-1
  double tol = 1e-10;
  Lattice lattice;

  State apply(const State& u) const;
  std::pair<State, Eigen::MatrixXd> apply_with_differential(
      const State& u) const;
};

struct StepCertificate {
  int r_star = 0;
  double min_divisor = std::numeric_limits<double>::infinity();
  double divisor_floor = 0.0;
  double chi_norm = 0.0;  // ||chi||_{q,alpha}
  std::map<int, double> q_norms;
  double ledger_mass_added = 0.0;
  double dropped_mass = 0.0;  // structurally zero, recorded per contract
  double eps1 = 0.0;          // admissible flow radius of this step
};

struct NormalFormOutput {
  NormalFormConfig config;
  QuadraticDiagonal z2;
  PolyHamiltonian p_input;
  std::vector<PolyHamiltonian> generators;  // chi per step
  PolyHamiltonian q_res;
  PolyHamiltonian tail_ledger;
  double epsilon0 = 0.0;        // min over steps eps1/3 (measured norms)
  double proof_C = 0.0;         // eta / (C N^b) form of epsilon0
  double proof_b = 0.0;
  double min_divisor = std::numeric_limits<double>::infinity();
  std::vector<StepCertificate> steps;

  ComposedFlow tau1() const;  // u -> Phi^1_{chi_1}(...Phi^1_{chi_K}(u))
  ComposedFlow tau0() const;  // inverse order, t = -1
  double evaluate_h(const State& u) const;  // (Z2 + P)(u)
  /// R(u) = (Z2+P)(tau1(u)) - Z2(u) - Q_res(u); exact by construction.
  double remainder(const State& u) const;
  double ledger_value(const State& u) const;
};

/// Theorem-4.1-style iteration r_star = p..r-1 (a single elimination pass
/// when r == p): split, solve, Lie-expand, compose flows.
NormalFormOutput birkhoff_normal_form(const QuadraticDiagonal& Z2,
                                      const PolyHamiltonian& P,
                                      const NormalFormConfig& config);

struct ConjugacyReport {
  int samples = 0;
  double radius = 0;
  double max_roundtrip = 0;        // ||tau1(tau0(u)) - u||_{h^s}
  double max_closeness_ratio = 0;  // vs (||u||/eps0)^{p-2} ||u||
  double max_defect = 0;           // identity residual of the R evaluator
  double max_ledger_mismatch = 0;  // |R - ledger| / max(|R|, eps)
  double max_dtau_hs = 0;          // operator norms over samples and sigma
  double max_dtau_hneg = 0;
  double dtau_bound = 0;           // 2^{r-p}
  bool roundtrip_ok = false;
  bool closeness_ok = false;
  bool dtau_ok = false;
};

ConjugacyReport verify_conjugacy(const NormalFormOutput& out, int samples,
                                 double radius, std::uint64_t seed = 2027);

struct RemainderScaling {
  bool exact_zero = true;
  double slope = 0.0;
  std::vector<std::pair<double, double>> points;  // (radius, est ||grad R||)
};

/// ||grad R||_{h^s} estimated by central differences of the R evaluator
/// along seeded random directions at each radius; log-log slope fitted
/// (expected about r-1).
RemainderScaling remainder_scaling(const NormalFormOutput& out,
                                   std::span<const double> radii,
                                   int directions = 8,
                                   std::uint64_t seed = 515);

}  // namespace birkhoff
