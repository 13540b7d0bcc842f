#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "birkhoff/frequency.hpp"
#include "birkhoff/spectra.hpp"

namespace birkhoff {

/// A small-divisor query in (sigma, n) form. The injective (ell, m) form is
/// obtained by tallying signs per frequency group (the rearrangement that
/// links the two definitions of non-resonance).
struct DivisorQuery {
  std::vector<std::int8_t> sigma;
  std::vector<ModeIndex> n;

  int arity() const { return int(sigma.size()); }
  std::string str() const;
};

struct LFormQuery {
  std::vector<long> ell;        // nonzero, |ell|_1 = sum |ell_j|
  std::vector<ModeIndex> m;     // injective, sorted by (<m>, lex)
  long l1() const;
  std::string str() const;
};

/// Rearranges (sigma, n) into the injective ell-form; groups with zero
/// signed sum drop out.
LFormQuery to_lform(const FrequencyFamily& omega, const DivisorQuery& q);

/// Effective lower index kappa_omega(sigma, n): min <n_j> over positions
/// whose frequency group has nonzero signed sum; +infinity for fully
/// paired monomials.
double kappa(const FrequencyFamily& omega, std::span<const std::int8_t> sigma,
             std::span<const ModeIndex> n);

/// Sigma sigma_j omega_{n_j} (or Sigma ell_j omega_{m_j}).
double small_divisor(const FrequencyFamily& omega, const DivisorQuery& q);
double small_divisor(const FrequencyFamily& omega, const LFormQuery& q);

/// True iff the arity is even and the indices match into opposite-sign,
/// equal-frequency pairs (per-group sign tallies all cancel).
bool is_paired(const FrequencyFamily& omega,
               std::span<const std::int8_t> sigma,
               std::span<const ModeIndex> n);

struct NonResonanceCertificate {
  int order = 0;           // r
  double n_max = 0;        // kappa cutoff (may be +inf)
  Lattice index_range;     // scanned range
  bool limited = false;    // limited variant: beta forced to 0
  double gamma = 0;        // fitted gamma_r
  double beta = 0;         // fitted beta_r (0 when limited)
  double min_divisor = std::numeric_limits<double>::infinity();
  DivisorQuery worst;      // query attaining min |divisor|
  std::uint64_t scanned = 0;
  std::uint64_t paired_count = 0;  // escape-clause hits
  std::vector<DivisorQuery> violations;       // certified exact zeros
  std::vector<DivisorQuery> near_resonances;  // |div| below float floor
  /// per-kappa bucket minima used by the power-law fit
  std::vector<std::pair<double, double>> bucket_minima;

  bool valid() const { return violations.empty(); }
};

/// Scans all canonical (sigma, n) monomials with arity <= r, indices in
/// range, kappa <= n_max, skipping paired ones; records the minimum
/// divisor, fits (gamma_r, beta_r) as the tightest power law
/// min|div| * kappa^beta >= gamma, and flags certified zeros.
NonResonanceCertificate verify_strong_nonresonance(
    const FrequencyFamily& omega, int r, double n_max, Lattice index_range);

/// Limited variant (uniform bound, kappa <= N): gamma = min |divisor|,
/// beta = 0. The scan is finite even though the paper's condition ranges
/// over unbounded largest index; the certificate records the range.
NonResonanceCertificate verify_limited_nonresonance(
    const FrequencyFamily& omega, int r, double N, Lattice index_range);

struct BootstrapParams {
  double alpha = 0;  // weak non-resonance exponent
  double gamma = 0;  // weak non-resonance constant
  double mu = 0;     // accumulation offset (frequencies near Z + mu)
  double C = 0;      // accumulation constant
  double nu = 0;     // accumulation rate
  int r = 0;
};

struct BootstrapStep {
  int r_flat = 0;
  double beta = 0, eta = 0;
  double eta_case1 = 0, eta_case2 = 0, beta_case2 = 0;
};

struct BootstrapResult {
  double beta = 0, eta = 0;
  std::vector<BootstrapStep> steps;
  bool verified = false;       // strong bound checked on the scanned range
  double worst_margin = 0;     // min over queries of |div| / (eta <n1>^-beta)
  LFormQuery worst;
};

/// Prop-2.2-style weak-to-strong upgrade. First checks the weak hypothesis
/// |k + h mu + Sigma ell omega| >= gamma <n_last>^{-alpha} (all k in Z,
/// |h| <= r) and the accumulation |omega_n - Z - mu| <= C <n>^{-nu} on the
/// scanned range (failure throws HypothesisFailure naming the query), then
/// runs the induction
///   (beta_1, eta_1) = (alpha, gamma)
///   eta_{j+1} = min(eta_j / 2, gamma (eta_j / 2Cr)^{alpha/nu})
///   beta_{j+1} = max(beta_j, alpha beta_j / nu)
/// (the two branches of the proof's dichotomy combined over all queries)
/// and finally verifies |Sigma ell omega| >= eta <n_1>^{-beta} on the range.
BootstrapResult bootstrap_weak_to_strong(const BootstrapParams& params,
                                         const FrequencyFamily& omega,
                                         Lattice index_range);

/// Tightest (alpha, gamma) making the weak hypothesis hold on the range
/// (log-log fit over <n_last> buckets, intercept lowered to cover).
std::pair<double, double> fit_weak_params(const FrequencyFamily& omega, int r,
                                          double mu, Lattice index_range);
/// Tightest (C, nu) for the accumulation hypothesis.
std::pair<double, double> fit_accumulation(const FrequencyFamily& omega,
                                           double mu);

struct PartialFractionResult {
  int j = 0;
  double value = 0;            // |Sigma ell_k / (4 n_k^2 - j^2)|
  std::string exact;          // the exact rational, as "num/den"
};

/// Searches j in [1, 5 r_star] excluding every n_k and 2 n_k for the
/// largest |Sigma ell_k / (4 n_k^2 - j^2)|, in exact rational arithmetic.
PartialFractionResult partial_fraction_divisor(std::span<const long> ell,
                                               std::span<const long> n);

struct SeparationResult {
  int j = 0;
  double second_derivative = 0;  // d^2_{cos(j .)} Sigma ell_k (l_{n_k}+l_{-n_k})
  double reference = 0;          // 2 Sigma ell_k / (4 n_k^2 - j^2)
};

/// Evaluates the separating second derivative of Cor-2.15 type against a
/// periodic-even eigen system (Dirichlet + Neumann data of the same V).
SeparationResult second_derivative_separation(const EigenSystem& E,
                                              std::span<const long> ell,
                                              std::span<const long> n);

enum class PotentialLaw : std::uint8_t {
  GaussianFourier,     // random multiplicative V on T, Dirichlet spectrum
  GaussianCosine,      // random even V, periodic spectrum, limited check
  UniformConvolution,  // random Vhat on Z^2, strong check
};

struct GenericityTrial {
  std::uint64_t trial = 0;
  double min_divisor = 0;
  double potential_norm = 0;  // H1 norm (T or (0,pi)) or sup|Vhat <n>^s|
  std::uint64_t violations = 0;
  int rejections = 0;  // conditioning rejections before acceptance
};

struct GenericityReport {
  PotentialLaw law{};
  double s = 0;
  int trials = 0;
  int r = 0;
  double N = 0;
  Lattice index_range;
  std::uint64_t seed = 0;
  std::optional<double> condition_norm_below;
  int total_violations = 0;
  double violation_free_fraction = 1.0;
  std::vector<GenericityTrial> per_trial;  // sorted by trial id
  std::vector<std::uint64_t> worst_trials;  // smallest min divisors first
};

struct GenericityConfig {
  PotentialLaw law{};
  double s = 2.0;
  int trials = 0;
  int r = 3;
  double N = std::numeric_limits<double>::infinity();
  Lattice index_range;
  std::uint64_t seed = 0;
  std::optional<double> condition_norm_below;  // rejection sampling cap 1000
  int potential_modes = 32;  // series truncation of the random laws
  int galerkin_dim = 0;      // 0: derived from the range
};

/// Samples potentials from the law, builds spectra / frequencies, runs the
/// matching verifier and aggregates. Deterministic under seed.
GenericityReport genericity_montecarlo(const GenericityConfig& cfg);

}  // namespace birkhoff
