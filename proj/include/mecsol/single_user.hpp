#pragma once

#include <vector>

#include "mecsol/bcd_solver.hpp"
#include "mecsol/types.hpp"

namespace mecsol {

/// Largest transmission time once l_total is fixed: the server-side
/// latency constraint made active, t = T - C l_total / F_c.
/// Requires l_total <= T F_c / C.
double optimal_time_given_offload(const TaskSpec& task, double f_edge,
                                  double l_total);

/// Total data a lone user should offload: as much as the edge can absorb
/// within the deadline, capped by the task size.
double optimal_total_offload(const TaskSpec& task, double f_edge);

/// Water-filling split of l_total over the channels of a single-user
/// scenario. l_n = s ln(lambda h_n) on channels with lambda h_n >= 1 and
/// zero elsewhere, with lambda found by bisection on the total and the
/// active set settled by iterative removal.
struct SplitResult {
  std::vector<double> l_n;
  double lambda = 0.0;
  std::vector<std::size_t> active;
};
SplitResult split_across_channels(const Scenario& sc, double l_total,
                                  double t_tr);

/// K = 1 direct solver: maximal total offload, deadline-active
/// transmission time, water-filling channel split, deadline-active local
/// speed. No iteration, so the returned trace is empty.
SolveResult solve_single_user(const Scenario& sc);

}  // namespace mecsol
