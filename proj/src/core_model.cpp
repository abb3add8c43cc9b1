#include "mecsol/core_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace mecsol {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

// Residuals out of check_constraints must stay JSON-serializable.
double cap_residual(double r) {
  if (std::isnan(r)) return 1e18;
  return std::clamp(r, -1e18, 1e18);
}
}  // namespace

void Scenario::validate() const {
  if (tasks.empty()) throw ValidationError("users", "at least one user required");
  if (n_channels < 1)
    throw ValidationError("edge.N", "at least one subchannel required");
  if (!(f_edge > 0.0))
    throw ValidationError("edge.F_c", "edge capacity must be positive");
  if (!(tau_bw > 0.0))
    throw ValidationError("edge.tau_bw", "subchannel bandwidth must be positive");
  for (std::size_t k = 0; k < tasks.size(); ++k) {
    const auto& t = tasks[k];
    const std::string p = "users[" + std::to_string(k) + "].";
    if (!(t.data_size > 0.0))
      throw ValidationError(p + "R_bits", "data size must be positive");
    if (!(t.cycles_per_bit > 0.0))
      throw ValidationError(p + "C_cycles_per_bit", "cycles/bit must be positive");
    if (!(t.deadline_s > 0.0))
      throw ValidationError(p + "T_s", "deadline must be positive");
    if (!(t.chip_eps > 0.0))
      throw ValidationError(p + "eps", "chip coefficient must be positive");
    if (!(t.weight > 0.0))
      throw ValidationError(p + "omega", "weight must be positive");
    if (!(t.f_local_max > 0.0))
      throw ValidationError(p + "F_local", "local CPU cap must be positive");
  }
  if (gains.rows() != tasks.size() || gains.cols() != n_channels)
    throw ValidationError("gains", "gains matrix must be K x N");
  for (std::size_t k = 0; k < gains.rows(); ++k)
    for (std::size_t n = 0; n < gains.cols(); ++n)
      if (!(gains(k, n) > 0.0))
        throw ValidationError("gains", "gain (" + std::to_string(k) + "," +
                                           std::to_string(n) +
                                           ") must be positive");
}

LocalCost local_cost(const TaskSpec& task, double l_local, double f_l) {
  if (l_local < 0.0 || l_local > task.data_size)
    throw std::invalid_argument("local_cost: l_local outside [0, R]");
  if (f_l < 0.0) throw std::invalid_argument("local_cost: negative speed");
  if (l_local == 0.0) return {0.0, 0.0};
  const double t = f_l > 0.0 ? task.cycles_per_bit * l_local / f_l : kInf;
  const double e = task.chip_eps * task.cycles_per_bit * l_local * f_l * f_l;
  return {t, e};
}

OffloadCost offload_cost(const Scenario& sc, std::size_t k,
                         const std::vector<double>& tau_row,
                         const std::vector<double>& l_row, double t_tr) {
  const std::size_t n_ch = sc.n_channels;
  if (tau_row.size() != n_ch || l_row.size() != n_ch)
    throw std::invalid_argument("offload_cost: row size mismatch");
  OffloadCost out{0.0, std::vector<double>(n_ch, 0.0)};
  for (std::size_t n = 0; n < n_ch; ++n) {
    const double l = l_row[n];
    const double tau = tau_row[n];
    if (l < 0.0 || tau < 0.0)
      throw std::invalid_argument("offload_cost: negative entry");
    if (l == 0.0) continue;  // zero load contributes nothing
    if (tau == 0.0 || t_tr <= 0.0)
      throw std::invalid_argument(
          "offload_cost: positive load needs positive bandwidth and time");
    const double x = l / (tau * t_tr);
    const double p = std::expm1(x) * tau / sc.gains(k, n);
    out.power[n] = p;
    out.e_offload += p * t_tr;
  }
  return out;
}

EnergyReport evaluate(const Scenario& sc, const Allocation& alloc) {
  const std::size_t K = sc.num_users();
  const std::size_t N = sc.n_channels;
  EnergyReport rep;
  rep.users.resize(K);
  rep.power = Mat(K, N);
  rep.rate = Mat(K, N);

  for (std::size_t k = 0; k < K; ++k) {
    const auto& task = sc.tasks[k];
    double l_off = alloc.load.row_sum(k);
    l_off = std::min(l_off, task.data_size);
    const auto loc = local_cost(task, task.data_size - l_off, alloc.f_local[k]);

    std::vector<double> tau_row(N), l_row(N);
    for (std::size_t n = 0; n < N; ++n) {
      tau_row[n] = alloc.bw(k, n);
      l_row[n] = alloc.load(k, n);
    }
    const auto off = offload_cost(sc, k, tau_row, l_row, alloc.t_tr);

    auto& u = rep.users[k];
    u.t_local = loc.t_local;
    u.e_local = loc.e_local;
    u.e_offload = off.e_offload;
    if (l_off > 0.0) {
      u.t_exec = alloc.f_edge[k] > 0.0
                     ? task.cycles_per_bit * l_off / alloc.f_edge[k]
                     : kInf;
      u.t_server = alloc.t_tr + u.t_exec;
    }
    u.latency = std::max(u.t_local, u.t_server);

    for (std::size_t n = 0; n < N; ++n) {
      rep.power(k, n) = off.power[n];
      rep.rate(k, n) = alloc.t_tr > 0.0 ? l_row[n] / alloc.t_tr : 0.0;
    }
    rep.weighted_objective += task.weight * (u.e_local + u.e_offload);
  }
  return rep;
}

ConstraintResiduals check_constraints(const Scenario& sc,
                                      const Allocation& alloc) {
  const std::size_t K = sc.num_users();
  const std::size_t N = sc.n_channels;
  ConstraintResiduals out;
  out.values.reserve(ConstraintResiduals::expected_count(K, N));

  // Latency, normalized by T_k and aggregated to a single worst-user
  // residual. Computed directly (not via evaluate) so that degenerate
  // allocations -- zero bandwidth under positive load, zero time -- are
  // still checkable instead of throwing.
  double worst_latency = -kInf;
  for (std::size_t k = 0; k < K; ++k) {
    const auto& task = sc.tasks[k];
    const double l_off = std::min(alloc.load.row_sum(k), task.data_size);
    const double l_loc = task.data_size - l_off;
    double t_loc = 0.0;
    if (l_loc > 0.0)
      t_loc = alloc.f_local[k] > 0.0
                  ? task.cycles_per_bit * l_loc / alloc.f_local[k]
                  : kInf;
    double t_srv = 0.0;
    if (l_off > 0.0)
      t_srv = alloc.t_tr + (alloc.f_edge[k] > 0.0
                                ? task.cycles_per_bit * l_off / alloc.f_edge[k]
                                : kInf);
    const double r =
        (std::max(t_loc, t_srv) - task.deadline_s) / task.deadline_s;
    worst_latency = std::max(worst_latency, r);
  }
  out.values.push_back(cap_residual(worst_latency));

  for (std::size_t k = 0; k < K; ++k)
    out.values.push_back(cap_residual(
        (alloc.f_local[k] - sc.tasks[k].f_local_max) / sc.tasks[k].f_local_max));

  double f_edge_sum = 0.0;
  for (std::size_t k = 0; k < K; ++k) f_edge_sum += alloc.f_edge[k];
  out.values.push_back(cap_residual((f_edge_sum - sc.f_edge) / sc.f_edge));

  for (std::size_t k = 0; k < K; ++k)
    out.values.push_back(cap_residual(-alloc.f_edge[k]));

  for (std::size_t n = 0; n < N; ++n)
    out.values.push_back(
        cap_residual((alloc.bw.col_sum(n) - sc.tau_bw) / sc.tau_bw));

  for (std::size_t k = 0; k < K; ++k)
    for (std::size_t n = 0; n < N; ++n)
      out.values.push_back(cap_residual(-alloc.bw(k, n)));

  for (std::size_t k = 0; k < K; ++k)
    out.values.push_back(cap_residual(
        (alloc.load.row_sum(k) - sc.tasks[k].data_size) / sc.tasks[k].data_size));

  for (std::size_t k = 0; k < K; ++k)
    for (std::size_t n = 0; n < N; ++n)
      out.values.push_back(cap_residual(-alloc.load(k, n)));

  out.max_violation = -kInf;
  for (double r : out.values) out.max_violation = std::max(out.max_violation, r);
  return out;
}

FeasibilityReport feasibility_bounds(const Scenario& sc, double t_tr) {
  if (t_tr < 0.0)
    throw std::invalid_argument("feasibility_bounds: negative t_tr");
  FeasibilityReport rep;
  rep.users.resize(sc.num_users());
  rep.feasible = true;
  for (std::size_t k = 0; k < sc.num_users(); ++k) {
    const auto& t = sc.tasks[k];
    auto& u = rep.users[k];
    u.l_lo = std::max(t.data_size - t.deadline_s * t.f_local_max / t.cycles_per_bit, 0.0);
    u.l_hi = std::min((t.deadline_s - t_tr) * sc.f_edge / t.cycles_per_bit,
                      t.data_size);
    u.t_feas = (t.data_size * t.cycles_per_bit + t_tr * sc.f_edge) /
               (t.f_local_max + sc.f_edge);
    u.t_off = t.data_size * t.cycles_per_bit / sc.f_edge + t_tr;
    if (t.deadline_s < u.t_feas) {
      u.regime = OffloadRegime::infeasible;
      rep.feasible = false;
    } else if (t.deadline_s < u.t_off) {
      u.regime = OffloadRegime::partial_only;
    } else {
      u.regime = OffloadRegime::full_offload_possible;
    }
  }
  return rep;
}

}  // namespace mecsol
