#pragma once

#include <utility>

#include "mecsol/types.hpp"

namespace mecsol {

/// Local execution time and energy for computing l_local units of data at
/// speed f_l. Conventions: l_local = 0 costs nothing regardless of f_l;
/// f_l = 0 with l_local > 0 yields infinite time (latency check fails).
struct LocalCost {
  double t_local;
  double e_local;
};
LocalCost local_cost(const TaskSpec& task, double l_local, double f_l);

/// Transmission energy and per-channel powers for user k offloading
/// l_row over bandwidths tau_row during t_tr. Channels with zero load
/// contribute zero energy (limit convention); a positive load on a zero
/// bandwidth (or zero time) is rejected since it needs infinite power.
struct OffloadCost {
  double e_offload;
  std::vector<double> power;
};
OffloadCost offload_cost(const Scenario& sc, std::size_t k,
                         const std::vector<double>& tau_row,
                         const std::vector<double>& l_row, double t_tr);

/// Full per-user energy/latency report plus the weighted objective.
EnergyReport evaluate(const Scenario& sc, const Allocation& alloc);

/// Normalized signed residuals for all constraint families; see
/// ConstraintResiduals for the layout.
ConstraintResiduals check_constraints(const Scenario& sc,
                                      const Allocation& alloc);

/// Per-user offloading bounds and deadline thresholds at a given shared
/// transmission time. Instance feasible iff T_k >= t_feas for every k.
FeasibilityReport feasibility_bounds(const Scenario& sc, double t_tr);

}  // namespace mecsol
