#pragma once

#include <Eigen/Dense>
#include <map>
#include <optional>
#include <span>

#include "birkhoff/hamilton.hpp"
#include "birkhoff/potential.hpp"
#include "birkhoff/spectra.hpp"

namespace birkhoff {

/// Truncated Taylor ladder of the nonlinearity: g(x,y) = Sigma_j g_j(x)
/// y^j / j!. The simulated system uses exactly this polynomial (the Taylor
/// remainder is part of the discarded forcing).
struct NonlinearityLadder {
  std::map<int, Potential> terms;  // j -> g_j

  bool empty() const { return terms.empty(); }
  int min_order() const;  // smallest j with g_j nonzero
  double value(double x, double y) const;
  /// G(x,y) = int_0^y g(x,t) dt
  double antiderivative(double x, double y) const;
};

enum class ModelKind : std::uint8_t { KG1D, NLS1D_Dir, NLS1D_Per, NLS2D_Conv };

struct ModelSpec {
  ModelKind kind = ModelKind::KG1D;
  double mass = 1.0;                  // KG: m > -1
  Potential V;                        // NLS 1d multiplicative potential
  std::map<ModeIndex, double> vhat;   // NLS 2d convolution coefficients
  NonlinearityLadder g;               // y = Phi for KG, y = |u|^2 for NLS
  int truncation_radius = 12;
  int galerkin_dim = 0;               // Sturm solver dimension (0: derived)

  /// Energy-space exponent: 1/2 for KG, 1 for NLS.
  double s_default() const;
  /// Order p of the nonlinearity at the origin.
  int p_order() const;
};

struct Trace {
  ModelKind kind{};
  double s = 0;  // norm exponent used in the hs column
  double dt = 0;
  bool aborted = false;   // blowup guard tripped; rows up to the abort kept
  std::vector<double> times;
  std::vector<double> hs_norm;
  std::vector<double> energy;
  std::vector<double> mass;  // NLS kinds only (0 for KG)
  std::vector<ModeIndex> tracked;            // group representatives
  std::vector<std::vector<double>> J;        // [group][sample]
  std::vector<std::vector<double>> En;       // KG harmonic energies
  std::vector<ModeIndex> amp_modes;          // optional |u_n| storage
  std::vector<std::vector<double>> amplitudes;  // [mode][sample]
};

struct IntegrateOptions {
  int stride = 1;             // record every stride-th step
  double track_cut = 1e18;    // record groups with <rep> <= track_cut
  bool store_amplitudes = true;
  double blowup_factor = 10.0;
};

/// Strang-splitting simulator with the exact diagonal linear phase in the
/// model's eigenbasis and the pointwise nonlinear substep evaluated
/// pseudo-spectrally; all NLS transform chains are unitary, so the mass is
/// conserved to rounding.
class Simulator {
 public:
  explicit Simulator(ModelSpec spec);

  const ModelSpec& spec() const { return spec_; }
  /// Lattice of the evolved state (the Sturm kinds evolve the full
  /// computed spectrum; tracking windows are separate).
  Lattice state_lattice() const;
  const FrequencyFamily& frequencies() const { return omega_; }

  double energy(const State& u) const;
  double mass(const State& u) const;

  Trace run(const State& u0, double T, double dt,
            IntegrateOptions opts = {}) const;

 private:
  ModelSpec spec_;
  FrequencyFamily omega_;
  // collocation machinery (per kind; unused members stay empty)
  std::vector<double> grid_;          // quadrature grid (KG)
  std::vector<double> quad_w_;        // weights
  Eigen::MatrixXd to_grid_;           // unitary-scaled synthesis
  Eigen::MatrixXd from_grid_;
  std::vector<double> colloc_x_;      // collocation abscissae
  std::optional<EigenSystem> sturm_;
  // 2d separable transform
  Eigen::MatrixXcd dft_;

  friend Trace integrate(const ModelSpec&, const State&, double, double,
                         IntegrateOptions);
  void step(Eigen::VectorXcd& w, double dt) const;
  Eigen::VectorXcd half_linear_phase(double dt) const;
};

/// Strang integration entry point (builds a Simulator).
Trace integrate(const ModelSpec& model, const State& u0, double T, double dt,
                IntegrateOptions opts = {});

/// u_n = (n^2+m)^{1/4} Phi_n + i (n^2+m)^{-1/4} Psi_n on the orthonormal
/// sine basis; exact inverse.
State kg_complexify(std::span<const double> phi, std::span<const double> psi,
                    double m);
std::pair<std::vector<double>, std::vector<double>> kg_decomplexify(
    const State& u, double m);

/// E_n = sqrt(n^2+m) (int sin(nx) Phi)^2 + (n^2+m)^{-1/2} (int sin(nx) Psi)^2
/// for orthonormal-basis coefficient inputs (the integrals carry pi/2).
double harmonic_energy(std::span<const double> phi,
                       std::span<const double> psi, double m, int n);

struct CoercivityReport {
  double lambda = 0;  // fitted two-sided constant
  std::vector<std::array<double, 3>> sweep;  // (scale, ||u||^2, H(+rho M))
  bool within_validated = true;
};
/// Evaluates Lambda^{-1}||u||^2 <= H (+ (rho+1)M for NLS) <= Lambda||u||^2
/// over a dyadic amplitude sweep of u.
CoercivityReport coercivity_check(const ModelSpec& model, const State& u);

struct DriftRow {
  ModeIndex rep;
  double sup_drift = 0;
  double t_at = 0;
  double normalized = 0;  // sup drift / (<n>^b eps^p)
};
std::vector<DriftRow> track_superactions(const Trace& trace, double b_exp,
                                         double p_exp, double eps);

struct ScalingCell {
  double eps = 0;
  std::uint64_t seed = 0;
  double T = 0;
  double max_low_drift = 0;
  bool aborted = false;
};
struct ScalingReport {
  double slope = 0;      // fitted log(drift) vs log(eps)
  bool exact_zero = true;
  std::vector<ScalingCell> cells;
  std::vector<DriftRow> per_mode;  // from the last (smallest-eps) run
};

struct ScalingConfig {
  std::vector<double> eps_list;
  int r = 5, p = 3;
  std::vector<std::uint64_t> seeds{1};
  double T_cap = 1e5;
  double dt = 0.05;
  double track_cut = 4.5;  // low modes <n> <= cut enter the fit
};
ScalingReport scaling_experiment(const ModelSpec& model,
                                 const ScalingConfig& cfg);

/// NLS in the Sturm-Liouville eigenbasis of -d^2+V (Dirichlet).
Trace nls_sturm_simulate(const Potential& V, const NonlinearityLadder& g,
                         const State& u0, double T, double dt,
                         int radius, int galerkin_dim = 0,
                         IntegrateOptions opts = {});

/// 2d Fourier pseudo-spectral cubic NLS with convolution potential.
Trace nls2d_simulate(const std::map<ModeIndex, double>& vhat, const State& u0,
                     double T, double dt, int radius,
                     IntegrateOptions opts = {});

/// min over per-mode phases of ||u(t) - Sigma e^{i theta_n} u_n(0) f_n||
/// = (Sigma <n>^{2s} (|u_n(t)|-|u_n(0)|)^2)^{1/2}, per sample time.
/// Requires stored amplitudes.
std::vector<double> orbital_alignment_error(const Trace& trace, double s);

/// Formal KG Hamiltonian on the truncated lattice: Z2 with omega_n =
/// sqrt(n^2+m) and P = Sigma_{j=p}^{r-1} P^(j), where P^(j)(v) =
/// -(1/j!) int_0^pi g_{j-1}(x) (Omega^{-1} Re v)^j dx expanded in the
/// complexified sine modes.
std::pair<QuadraticDiagonal, PolyHamiltonian> kg_formal_hamiltonian(
    double m, const NonlinearityLadder& g, int radius, int p, int r);

/// Random state with exact h^s norm (complex gaussian profile with
/// <n>^{-s-1} decay, rescaled). Deterministic under seed.
State random_state_hs(const Lattice& lat, double s, double target_norm,
                      std::uint64_t seed);

}  // namespace birkhoff
