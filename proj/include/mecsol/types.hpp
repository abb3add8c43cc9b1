#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace mecsol {

/// Thrown when a scenario or allocation fails structural validation.
/// `field` names the offending entry (e.g. "gains", "users[2].T_s").
struct ValidationError : std::invalid_argument {
  std::string field;
  ValidationError(std::string f, const std::string& msg)
      : std::invalid_argument(msg), field(std::move(f)) {}
};

/// Thrown when a problem instance (or subproblem) has no feasible point.
struct InfeasibleError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Dense row-major K x N matrix of doubles. Small helper; the problem
/// sizes here are a handful of users and subchannels.
class Mat {
 public:
  Mat() = default;
  Mat(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), v_(rows * cols, fill) {}

  double& operator()(std::size_t r, std::size_t c) { return v_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const {
    return v_[r * cols_ + c];
  }
  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  double row_sum(std::size_t r) const {
    double s = 0.0;
    for (std::size_t c = 0; c < cols_; ++c) s += v_[r * cols_ + c];
    return s;
  }
  double col_sum(std::size_t c) const {
    double s = 0.0;
    for (std::size_t r = 0; r < rows_; ++r) s += v_[r * cols_ + c];
    return s;
  }
  const std::vector<double>& data() const { return v_; }
  std::vector<double>& data() { return v_; }
  bool operator==(const Mat&) const = default;

 private:
  std::size_t rows_ = 0, cols_ = 0;
  std::vector<double> v_;
};

/// One mobile user's task and hardware parameters.
///
/// data_size is the task input size. Rates use the natural logarithm, so
/// internally data is counted in nat-equivalents; the scenario file key
/// is still named R_bits (see README for the bits/nats note).
struct TaskSpec {
  double data_size = 0.0;       // R_k
  double cycles_per_bit = 0.0;  // C_k, CPU cycles per unit data
  double deadline_s = 0.0;      // T_k
  double chip_eps = 0.0;        // eps_k, J*s^2/cycle^3
  double weight = 1.0;          // omega_k > 0
  double f_local_max = 0.0;     // F_k, cycles/s
};

/// A full problem instance: K tasks, one edge server with capacity
/// F_edge, N subchannels of bandwidth tau_bw each, and a K x N matrix of
/// channel gain-to-noise ratios (noise PSD normalized to 1, so gains are
/// dimensionless per Hz).
struct Scenario {
  std::vector<TaskSpec> tasks;
  double f_edge = 0.0;     // F_c, cycles/s
  std::size_t n_channels = 0;
  double tau_bw = 0.0;     // per-subchannel bandwidth, Hz
  Mat gains;               // K x N

  std::size_t num_users() const { return tasks.size(); }

  /// Checks every structural invariant; throws ValidationError naming
  /// the first offending field.
  void validate() const;
};

/// A candidate decision point.
struct Allocation {
  double t_tr = 0.0;            // shared transmission time, s
  std::vector<double> f_local;  // K local CPU speeds
  std::vector<double> f_edge;   // K edge CPU speeds
  Mat bw;                       // K x N bandwidth shares tau_{k,n}
  Mat load;                     // K x N offloaded data l_{k,n}
};

struct UserEnergy {
  double e_local = 0.0;   // J
  double e_offload = 0.0; // J
  double t_local = 0.0;   // s
  double t_exec = 0.0;    // s, edge execution
  double t_server = 0.0;  // s, t_tr + t_exec (0 when nothing offloaded)
  double latency = 0.0;   // max(t_local, t_server)
};

struct EnergyReport {
  std::vector<UserEnergy> users;
  Mat power;  // K x N transmit powers, W
  Mat rate;   // K x N rates, nats/s
  double weighted_objective = 0.0;  // sum_k w_k (E_loc + E_off)
};

enum class OffloadRegime { infeasible, partial_only, full_offload_possible };

struct UserFeasibility {
  double l_lo = 0.0;    // minimum data that must be offloaded
  double l_hi = 0.0;    // maximum data the edge can absorb in time
  double t_feas = 0.0;  // smallest workable deadline at this t_tr
  double t_off = 0.0;   // deadline above which full offload fits
  OffloadRegime regime = OffloadRegime::infeasible;
};

struct FeasibilityReport {
  std::vector<UserFeasibility> users;
  bool feasible = false;
};

/// Signed, scale-normalized residuals for the eight constraint families
/// of the optimization problem; positive means violated. Layout:
///   [0]                 latency (max over users)
///   [1 .. K]            f_local <= F_k
///   [K+1]               sum f_edge <= F_edge
///   [K+2 .. 2K+1]       f_edge >= 0
///   [2K+2 .. 2K+N+1]    per-channel bandwidth sums
///   [.. + K*N]          bw >= 0
///   [.. + K]            per-user total load <= R_k
///   [.. + K*N]          load >= 0
struct ConstraintResiduals {
  std::vector<double> values;
  double max_violation = 0.0;

  static std::size_t expected_count(std::size_t k, std::size_t n) {
    return 1 + k + 1 + k + n + k * n + k + k * n;
  }
};

}  // namespace mecsol
