#include "mecsol/single_channel.hpp"

namespace mecsol {

SolveResult solve_single_channel(const Scenario& sc,
                                 const SolveOptions& options) {
  if (sc.n_channels != 1)
    throw ValidationError("edge.N", "solve_single_channel requires N = 1");
  SolveOptions tuned = options;
  tuned.lean_probes = true;
  tuned.probe_bisect_rel_tol = std::max(options.probe_bisect_rel_tol, 1e-6);
  tuned.time_grid_points = std::max(16, options.time_grid_points * 2 / 3);
  return solve(sc, tuned);
}

}  // namespace mecsol
