#pragma once

#include <cstdint>
#include <vector>

#include "mecsol/numerics.hpp"
#include "mecsol/types.hpp"

namespace mecsol {

/// Per-(k,n) coefficients produced by the bandwidth step. x_val is the
/// spectral load W+1 implied by the channel multiplier (actual load for
/// occupied pairs, the entry load a user would run at for empty pairs);
/// delta is the energy cost per unit data at that load,
/// (e^x - 1) / (h x), which tends to 1/h as x -> 0.
struct ChannelCoeffs {
  Mat x_val;
  Mat delta;
  std::vector<double> mu;  // per-channel bandwidth multipliers (lambda_n / t_tr)
};

struct BandwidthResult {
  Mat tau;  // K x N bandwidth shares, columns of used channels sum to tau_bw
  ChannelCoeffs coeffs;
};

/// Optimal bandwidth split for fixed loads and transmission time. Each
/// channel with any load has its multiplier found by bisection so the
/// bandwidth constraint is active; channels without load get zero rows.
BandwidthResult bandwidth_subproblem(const Scenario& sc, const Mat& load,
                                     double t_tr);

struct LocalSpeed {
  double f_l;
  bool clamped;  // true only when l_total < the forced-offload minimum
};

/// Deadline-active local CPU speed C(R - l_total)/T, clamped to [0, F_k].
LocalSpeed optimal_local_speed(const TaskSpec& task, double l_total);

struct OffloadResult {
  Mat load;                    // per user, all mass on that user's best channel
  std::vector<double> f_edge;  // latency-active edge speeds C l/(T - t)
  double gamma;                // edge-capacity multiplier
};

/// Offloading sizes and edge speeds for fixed time and channel costs.
/// Each user's candidate is the stationary size on its cheapest channel,
/// clamped into the feasible box; the capacity multiplier is zero when
/// unconstrained, otherwise found by bisection so the edge is exactly full.
OffloadResult offload_subproblem(const Scenario& sc, double t_tr,
                                 const ChannelCoeffs& coeffs);

struct TimeBounds {
  double lo;
  double hi;
};

/// Grid-plus-golden search for the transmission time minimizing the
/// weighted objective at fixed loads and edge speeds, re-solving the
/// bandwidth split at every probe. Probes violating the latency bound
/// implied by f_edge score +inf.
double transmission_time_search(const Scenario& sc,
                                const std::vector<double>& f_edge,
                                const Mat& load, TimeBounds bounds,
                                const numerics::Search1DConfig& cfg = {});

struct DualState {
  std::vector<double> mu;     // per-channel bandwidth multipliers
  double gamma = 0.0;         // edge-capacity multiplier
  std::vector<double> delta;  // per-user total-data multipliers (all zero)
  Mat zeta_active;            // 1 where l_{k,n} = 0 (nonnegativity active)
};

struct SolveDiagnostics {
  std::int64_t bisect_evals = 0;  // function evaluations inside bisections
  std::int64_t probes = 0;
  int damped_steps = 0;
  bool gamma_refreshed = true;  // final gamma consistent with final loads
};

struct SolveOptions {
  double tol = 1e-8;  // relative objective change for convergence
  int max_iters = 200;
  int time_grid_points = 48;

  // Engine tuning. The single-channel entry point trades probe precision
  // for fewer bisection evaluations; final iterates always use full
  // precision.
  double probe_bisect_rel_tol = 1e-13;
  bool lean_probes = false;
};

struct SolveResult {
  Allocation allocation;
  double objective = 0.0;
  std::vector<double> trace;  // objective after init and each iteration
  DualState duals;
  int iterations = 0;
  bool converged = false;
  std::vector<std::vector<std::size_t>> active_channels;
  std::vector<double> phi;  // per-user stationarity constant
  SolveDiagnostics diagnostics;
};

/// Full alternating solver: bandwidth/time step and offload/capacity step
/// from a deterministic interior start, iterated to the given tolerance.
/// Throws InfeasibleError when no deadline can be met.
SolveResult solve(const Scenario& sc, const SolveOptions& options = {});

}  // namespace mecsol
