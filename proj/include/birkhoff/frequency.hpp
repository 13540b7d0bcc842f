#pragma once

#include <map>
#include <optional>
#include <vector>

#include "birkhoff/lattice.hpp"

namespace birkhoff {

/// Real frequencies omega_n on a truncated lattice, partitioned into
/// equal-frequency groups. Groups hold members whose pairwise frequency
/// difference stays below group_tol * max(1,|omega|); the paper groups by
/// exact equality and floating point needs the band.
struct FrequencyFamily {
  Lattice lattice;
  std::map<ModeIndex, double> omega;
  double group_tol = 1e-9;

  /// Filled by finalize(): groups sorted by (group frequency, lex leader).
  std::vector<std::vector<ModeIndex>> groups;
  std::map<ModeIndex, int> group_id;

  /// True when every omega_n sits within 1e-12 of an integer; small
  /// divisors are then evaluated in integer arithmetic so exact zeros are
  /// certified rather than guessed from float noise.
  bool integer_valued = false;
  double max_abs_omega = 0.0;

  double at(const ModeIndex& n) const {
    auto it = omega.find(n);
    if (it == omega.end())
      throw InvalidInput("FrequencyFamily: unknown index " + n.str());
    return it->second;
  }
  int group_of(const ModeIndex& n) const {
    auto it = group_id.find(n);
    if (it == group_id.end())
      throw InvalidInput("FrequencyFamily: unknown index " + n.str());
    return it->second;
  }
  bool all_groups_singleton() const;

  /// Computes groups, the integrality flag and max |omega|. Must be called
  /// after omega is populated; every constructor below does.
  void finalize();
};

/// Klein-Gordon frequencies omega_n = sqrt(n^2+m), n = 1..n_max. Requires
/// m > -1. m = 0 gives integer (fully resonant) frequencies: accepted, and
/// flagged through integer_valued.
FrequencyFamily kg_frequencies(double m, int n_max);

/// 2d convolution NLS frequencies omega_n = |n|^2 + Vhat_n on the square
/// lattice |n|_inf <= n_max. Missing Vhat entries are taken as 0.
FrequencyFamily nls2_frequencies(const std::map<ModeIndex, double>& vhat,
                                 int n_max);

/// Frequencies from an explicit table.
FrequencyFamily frequencies_from_map(Lattice lat,
                                     std::map<ModeIndex, double> omega,
                                     double group_tol = 1e-9);

}  // namespace birkhoff
