#pragma once

#include "mecsol/bcd_solver.hpp"

namespace mecsol {

/// N = 1 entry point: the same alternating machinery with scalar
/// bandwidth variables, tuned for fewer bisection evaluations (warm
/// multiplier brackets, lower probe precision). Contract identical to
/// solve(); requires sc.n_channels == 1.
SolveResult solve_single_channel(const Scenario& sc,
                                 const SolveOptions& options = {});

}  // namespace mecsol
