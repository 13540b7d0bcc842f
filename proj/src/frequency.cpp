#include "birkhoff/frequency.hpp"

#include <algorithm>
#include <cmath>

namespace birkhoff {

bool FrequencyFamily::all_groups_singleton() const {
  return std::all_of(groups.begin(), groups.end(),
                     [](const auto& g) { return g.size() == 1; });
}

void FrequencyFamily::finalize() {
  groups.clear();
  group_id.clear();
  max_abs_omega = 0.0;
  integer_valued = !omega.empty();
  for (const auto& [n, w] : omega) {
    max_abs_omega = std::max(max_abs_omega, std::abs(w));
    if (std::abs(w - std::round(w)) > 1e-12) integer_valued = false;
  }

  std::vector<std::pair<double, ModeIndex>> order;
  order.reserve(omega.size());
  for (const auto& [n, w] : omega) order.emplace_back(w, n);
  std::sort(order.begin(), order.end());

  for (const auto& [w, n] : order) {
    bool attach = false;
    if (!groups.empty()) {
      double w0 = omega.at(groups.back().back());
      attach = std::abs(w - w0) <= group_tol * std::max(1.0, std::abs(w0));
    }
    if (attach)
      groups.back().push_back(n);
    else
      groups.push_back({n});
  }
  for (std::size_t g = 0; g < groups.size(); ++g) {
    std::sort(groups[g].begin(), groups[g].end());
    for (const auto& n : groups[g]) group_id[n] = int(g);
  }
}

FrequencyFamily kg_frequencies(double m, int n_max) {
  if (!(m > -1.0)) throw InvalidInput("kg_frequencies: requires m > -1");
  FrequencyFamily F;
  F.lattice = positive_line(n_max);
  for (int n = 1; n <= n_max; ++n)
    F.omega[mode(n)] = std::sqrt(double(n) * n + m);
  F.finalize();
  return F;
}

FrequencyFamily nls2_frequencies(const std::map<ModeIndex, double>& vhat,
                                 int n_max) {
  FrequencyFamily F;
  F.lattice = square(n_max);
  for (const auto& n : F.lattice.modes()) {
    double v = 0.0;
    if (auto it = vhat.find(n); it != vhat.end()) v = it->second;
    F.omega[n] = n.abs2() + v;
  }
  F.finalize();
  return F;
}

FrequencyFamily frequencies_from_map(Lattice lat,
                                     std::map<ModeIndex, double> omega,
                                     double group_tol) {
  FrequencyFamily F;
  F.lattice = lat;
  F.omega = std::move(omega);
  F.group_tol = group_tol;
  for (const auto& [n, w] : F.omega)
    if (!lat.contains(n))
      throw InvalidInput("frequencies_from_map: index outside lattice");
  F.finalize();
  return F;
}

}  // namespace birkhoff
