#include "mecsol/bcd_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>

#include "mecsol/core_model.hpp"

namespace mecsol {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kE = 2.71828182845904523536;

// Spectral load implied by a channel multiplier: inverts the bandwidth
// stationarity condition omega*(1 + (x-1)e^x)/h = mu.
double x_of_mu(double h, double omega, double mu) {
  if (mu <= 0.0) return 0.0;
  const double a = (h * mu / omega - 1.0) / kE;
  return std::max(1.0 + numerics::lambert_w0(a), 0.0);
}

// The same stationarity condition evaluated forward.
double mu_of_x(double h, double omega, double x) {
  const double xc = std::min(x, 700.0);  // overloads are hopeless anyway
  return omega * (1.0 + (xc - 1.0) * std::exp(xc)) / h;
}

double delta_of_x(double h, double x) {
  if (x < 1e-8) return (1.0 + 0.5 * x + x * x / 6.0) / h;
  return std::expm1(x) / (h * x);
}

double min_deadline(const Scenario& sc) {
  double m = kInf;
  for (const auto& t : sc.tasks) m = std::min(m, t.deadline_s);
  return m;
}

std::vector<double> forced_offload_minimums(const Scenario& sc) {
  std::vector<double> lo(sc.num_users());
  for (std::size_t k = 0; k < sc.num_users(); ++k) {
    const auto& t = sc.tasks[k];
    lo[k] = std::max(
        t.data_size - t.deadline_s * t.f_local_max / t.cycles_per_bit, 0.0);
  }
  return lo;
}

// Edge-capacity demand of given loads at transmission time t.
double capacity_demand(const Scenario& sc, const Mat& load, double t) {
  double d = 0.0;
  for (std::size_t k = 0; k < sc.num_users(); ++k) {
    const double l = load.row_sum(k);
    if (l <= 0.0) continue;
    const double slack = sc.tasks[k].deadline_s - t;
    if (slack <= 0.0) return kInf;
    d += sc.tasks[k].cycles_per_bit * l / slack;
  }
  return d;
}

Allocation make_allocation(const Scenario& sc, const Mat& load, double t,
                           const Mat& tau) {
  Allocation a;
  a.t_tr = t;
  a.bw = tau;
  a.load = load;
  a.f_local.resize(sc.num_users());
  a.f_edge.resize(sc.num_users());
  for (std::size_t k = 0; k < sc.num_users(); ++k) {
    const double l = load.row_sum(k);
    a.f_local[k] = optimal_local_speed(sc.tasks[k], l).f_l;
    a.f_edge[k] =
        l > 0.0 ? sc.tasks[k].cycles_per_bit * l / (sc.tasks[k].deadline_s - t)
                : 0.0;
  }
  return a;
}

struct EngineCounters {
  std::int64_t bisect_evals = 0;
  std::int64_t probes = 0;
};

BandwidthResult bandwidth_impl(const Scenario& sc, const Mat& load,
                               double t_tr, double bisect_rel_tol,
                               EngineCounters* counters,
                               std::vector<double>* warm_mu) {
  if (!(t_tr > 0.0))
    throw std::invalid_argument("bandwidth_subproblem: t_tr must be positive");
  const std::size_t K = sc.num_users();
  const std::size_t N = sc.n_channels;
  BandwidthResult out;
  out.tau = Mat(K, N);
  out.coeffs.mu.assign(N, 0.0);

  for (std::size_t n = 0; n < N; ++n) {
    std::vector<std::size_t> loaded;
    double total = 0.0;
    for (std::size_t k = 0; k < K; ++k) {
      if (load(k, n) > 0.0) {
        loaded.push_back(k);
        total += load(k, n);
      }
    }
    if (loaded.empty()) continue;

    if (loaded.size() == 1) {
      const std::size_t k = loaded[0];
      out.tau(k, n) = sc.tau_bw;
      const double x = load(k, n) / (sc.tau_bw * t_tr);
      out.coeffs.mu[n] = mu_of_x(sc.gains(k, n), sc.tasks[k].weight, x);
      continue;
    }

    const double x_mean = total / (sc.tau_bw * t_tr);
    if (x_mean > 100.0) {
      // Degenerate overload: split proportionally to loads (equal spectral
      // load); the energies here are astronomically large and only need to
      // rank as such.
      for (std::size_t k : loaded) out.tau(k, n) = sc.tau_bw * load(k, n) / total;
      out.coeffs.mu[n] =
          mu_of_x(sc.gains(loaded[0], n), sc.tasks[loaded[0]].weight, x_mean);
      continue;
    }

    const auto g = [&](double mu) {
      if (counters) ++counters->bisect_evals;
      double s = 0.0;
      for (std::size_t k : loaded) {
        const double x = x_of_mu(sc.gains(k, n), sc.tasks[k].weight, mu);
        if (x <= 0.0) return kInf;  // mu too small, demand unbounded
        s += load(k, n) / (t_tr * x);
      }
      return s / sc.tau_bw - 1.0;
    };

    double seed = mu_of_x(sc.gains(loaded[0], n), sc.tasks[loaded[0]].weight,
                          std::max(x_mean, 1e-9));
    if (warm_mu && (*warm_mu)[n] > 0.0) seed = (*warm_mu)[n];

    double lo = seed, hi = seed;
    int guard = 0;
    while (g(lo) < 0.0 && guard++ < 300) lo /= 4.0;
    guard = 0;
    while (g(hi) > 0.0 && guard++ < 300) hi *= 4.0;
    double glo = g(lo), ghi = g(hi);
    if (!(glo >= 0.0 && ghi <= 0.0))
      throw numerics::NoBracketError(
          glo, ghi,
          "bandwidth_subproblem: failed to bracket the multiplier on channel " +
              std::to_string(n));

    numerics::BisectConfig cfg;
    cfg.rel_tol = bisect_rel_tol;
    cfg.abs_tol = seed * 1e-15;
    const double mu = numerics::bisect(g, lo, hi, cfg);
    out.coeffs.mu[n] = mu;
    if (warm_mu) (*warm_mu)[n] = mu;

    double s = 0.0;
    for (std::size_t k : loaded) {
      const double x = x_of_mu(sc.gains(k, n), sc.tasks[k].weight, mu);
      out.tau(k, n) = load(k, n) / (t_tr * x);
      s += out.tau(k, n);
    }
    for (std::size_t k : loaded) out.tau(k, n) *= sc.tau_bw / s;
  }

  out.coeffs.x_val = Mat(K, N);
  out.coeffs.delta = Mat(K, N);
  for (std::size_t k = 0; k < K; ++k) {
    for (std::size_t n = 0; n < N; ++n) {
      const double x =
          x_of_mu(sc.gains(k, n), sc.tasks[k].weight, out.coeffs.mu[n]);
      out.coeffs.x_val(k, n) = x;
      out.coeffs.delta(k, n) = delta_of_x(sc.gains(k, n), x);
    }
  }
  return out;
}

OffloadResult offload_impl(const Scenario& sc, double t_tr,
                           const ChannelCoeffs& coeffs, double bisect_rel_tol,
                           EngineCounters* counters) {
  const std::size_t K = sc.num_users();
  const std::size_t N = sc.n_channels;
  for (std::size_t k = 0; k < K; ++k)
    if (t_tr >= sc.tasks[k].deadline_s)
      throw InfeasibleError(
          "offload_subproblem: transmission time reaches the deadline of user " +
          std::to_string(k));

  const auto l_lo = forced_offload_minimums(sc);

  // Cheapest channel per user, lowest index on ties.
  std::vector<std::size_t> best_ch(K, 0);
  for (std::size_t k = 0; k < K; ++k) {
    double best = coeffs.delta(k, 0);
    for (std::size_t n = 1; n < N; ++n) {
      if (coeffs.delta(k, n) < best) {
        best = coeffs.delta(k, n);
        best_ch[k] = n;
      }
    }
  }

  const auto candidate = [&](std::size_t k, double gamma) {
    const auto& t = sc.tasks[k];
    const double slack = t.deadline_s - t_tr;
    const double cost =
        coeffs.delta(k, best_ch[k]) + gamma * t.cycles_per_bit / (t.weight * slack);
    const double c3 = t.cycles_per_bit * t.cycles_per_bit * t.cycles_per_bit;
    const double root = t.deadline_s * std::sqrt(cost / (3.0 * t.chip_eps * c3));
    return std::clamp(t.data_size - root, l_lo[k], t.data_size);
  };

  const auto demand = [&](double gamma) {
    double d = 0.0;
    for (std::size_t k = 0; k < K; ++k)
      d += sc.tasks[k].cycles_per_bit * candidate(k, gamma) /
           (sc.tasks[k].deadline_s - t_tr);
    return d;
  };

  double gamma = 0.0;
  if (demand(0.0) > sc.f_edge * (1.0 + 1e-12)) {
    double floor_demand = 0.0;
    for (std::size_t k = 0; k < K; ++k)
      floor_demand +=
          sc.tasks[k].cycles_per_bit * l_lo[k] / (sc.tasks[k].deadline_s - t_tr);
    if (floor_demand > sc.f_edge)
      throw InfeasibleError(
          "offload_subproblem: forced offloading exceeds edge capacity");

    double hi = 1.0;
    int guard = 0;
    while (demand(hi) > sc.f_edge && guard++ < 300) hi *= 8.0;
    const auto f = [&](double gm) {
      if (counters) ++counters->bisect_evals;
      return demand(gm) / sc.f_edge - 1.0;
    };
    numerics::BisectConfig cfg;
    cfg.rel_tol = bisect_rel_tol;
    cfg.abs_tol = hi * 1e-16;
    gamma = numerics::bisect(f, 0.0, hi, cfg);
  }

  OffloadResult out;
  out.load = Mat(K, N);
  out.f_edge.assign(K, 0.0);
  out.gamma = gamma;
  for (std::size_t k = 0; k < K; ++k) {
    const double l = candidate(k, gamma);
    if (l > 0.0) {
      out.load(k, best_ch[k]) = l;
      out.f_edge[k] =
          sc.tasks[k].cycles_per_bit * l / (sc.tasks[k].deadline_s - t_tr);
    }
  }
  return out;
}

}  // namespace

BandwidthResult bandwidth_subproblem(const Scenario& sc, const Mat& load,
                                     double t_tr) {
  return bandwidth_impl(sc, load, t_tr, 1e-13, nullptr, nullptr);
}

LocalSpeed optimal_local_speed(const TaskSpec& task, double l_total) {
  if (l_total < 0.0 || l_total > task.data_size)
    throw std::invalid_argument("optimal_local_speed: l_total outside [0, R]");
  const double f =
      task.cycles_per_bit * (task.data_size - l_total) / task.deadline_s;
  if (f > task.f_local_max) return {task.f_local_max, true};
  return {f, false};
}

OffloadResult offload_subproblem(const Scenario& sc, double t_tr,
                                 const ChannelCoeffs& coeffs) {
  return offload_impl(sc, t_tr, coeffs, 1e-13, nullptr);
}

double transmission_time_search(const Scenario& sc,
                                const std::vector<double>& f_edge,
                                const Mat& load, TimeBounds bounds,
                                const numerics::Search1DConfig& cfg) {
  if (!(bounds.lo > 0.0) || !(bounds.hi > bounds.lo))
    throw InfeasibleError("transmission_time_search: empty feasible interval");

  const auto objective = [&](double t) {
    // Latency bound implied by the given edge speeds.
    for (std::size_t k = 0; k < sc.num_users(); ++k) {
      const double l = load.row_sum(k);
      if (l <= 0.0) continue;
      if (f_edge[k] <= 0.0) return kInf;
      const double bound =
          sc.tasks[k].deadline_s - sc.tasks[k].cycles_per_bit * l / f_edge[k];
      if (t > bound * (1.0 + 1e-12)) return kInf;
    }
    try {
      const auto bw = bandwidth_subproblem(sc, load, t);
      Allocation a = make_allocation(sc, load, t, bw.tau);
      a.f_edge = f_edge;
      return evaluate(sc, a).weighted_objective;
    } catch (const std::exception&) {
      return kInf;
    }
  };

  numerics::Search1DConfig scfg = cfg;
  scfg.lo = bounds.lo;
  scfg.hi = bounds.hi;
  if (scfg.refine_tol <= 0.0) scfg.refine_tol = (bounds.hi - bounds.lo) * 1e-10;
  return numerics::minimize_1d(objective, scfg).argmin;
}

SolveResult solve(const Scenario& sc, const SolveOptions& options) {
  sc.validate();
  const auto feas = feasibility_bounds(sc, 0.0);
  if (!feas.feasible)
    throw InfeasibleError("solve: some deadline is below its feasible minimum");

  const std::size_t K = sc.num_users();
  const std::size_t N = sc.n_channels;
  const double minT = min_deadline(sc);
  const double t_lo = 1e-6 * minT;
  const double t_hi = (1.0 - 1e-6) * minT;
  const auto l_lo = forced_offload_minimums(sc);

  EngineCounters counters;
  std::vector<double> warm_mu(N, 0.0);
  std::vector<double>* warm = options.lean_probes ? &warm_mu : nullptr;
  const double probe_tol = options.probe_bisect_rel_tol;

  // Interior start: half the data (or the forced minimum) spread evenly.
  Mat load(K, N);
  for (std::size_t k = 0; k < K; ++k) {
    const double tot = std::max(0.5 * sc.tasks[k].data_size, l_lo[k]);
    for (std::size_t n = 0; n < N; ++n) load(k, n) = tot / double(N);
  }
  double t = std::clamp(0.5 * minT, t_lo, t_hi);

  // Keep the start inside the edge-capacity region.
  for (int guard = 0; capacity_demand(sc, load, t) > sc.f_edge * (1.0 - 1e-9);
       ++guard) {
    if (guard >= 200)
      throw InfeasibleError("solve: no capacity-feasible start found");
    bool shrunk = false;
    for (std::size_t k = 0; k < K; ++k) {
      const double tot = load.row_sum(k);
      const double target = l_lo[k] + 0.5 * (tot - l_lo[k]);
      if (tot - target > 1e-300) shrunk = true;
      for (std::size_t n = 0; n < N; ++n)
        load(k, n) *= tot > 0.0 ? target / tot : 0.0;
    }
    if (!shrunk) t = std::max(t_lo, 0.5 * t);
  }

  auto bw = bandwidth_impl(sc, load, t, 1e-13, &counters, warm);
  double obj =
      evaluate(sc, make_allocation(sc, load, t, bw.tau)).weighted_objective;

  SolveResult res;
  res.trace.push_back(obj);
  double gamma = 0.0;
  bool gamma_fresh = false;

  for (int iter = 1; iter <= options.max_iters; ++iter) {
    // --- Time step: probe candidate times, folding in the offload
    // response so the capacity constraint cannot pin the time at its
    // previous value. The incumbent seeds the search, so this step never
    // increases the objective.
    struct Best {
      double t, obj, gamma;
      Mat load;
      bool from_offload;
    } best{t, obj, gamma, load, false};

    const auto probe = [&](double tc) {
      ++counters.probes;
      double score = kInf;
      std::optional<BandwidthResult> bwp;
      try {
        bwp = bandwidth_impl(sc, load, tc, probe_tol, &counters, warm);
      } catch (const std::exception&) {
        return score;
      }
      if (!options.lean_probes && tc < minT &&
          capacity_demand(sc, load, tc) <= sc.f_edge * (1.0 + 1e-12)) {
        const double o = evaluate(sc, make_allocation(sc, load, tc, bwp->tau))
                             .weighted_objective;
        score = o;
        if (o < best.obj) best = {tc, o, gamma, load, false};
      }
      try {
        const auto off = offload_impl(sc, tc, bwp->coeffs, probe_tol, &counters);
        const auto bw2 =
            bandwidth_impl(sc, off.load, tc, probe_tol, &counters, warm);
        const double o =
            evaluate(sc, make_allocation(sc, off.load, tc, bw2.tau))
                .weighted_objective;
        score = std::min(score, o);
        if (o < best.obj) best = {tc, o, off.gamma, off.load, true};
      } catch (const std::exception&) {
      }
      return score;
    };

    numerics::Search1DConfig scfg;
    scfg.grid_points = options.time_grid_points;
    scfg.lo = t_lo;
    scfg.hi = t_hi;
    scfg.refine_tol = minT * 1e-9;
    numerics::minimize_1d(probe, scfg);

    if (best.obj < obj) {
      // Confirm at full precision before committing; lean probes may
      // promise improvements their tolerance cannot back up.
      auto bw_try = bandwidth_impl(sc, best.load, best.t, 1e-13, &counters, warm);
      const double full =
          evaluate(sc, make_allocation(sc, best.load, best.t, bw_try.tau))
              .weighted_objective;
      if (full <= obj) {
        t = best.t;
        load = best.load;
        bw = std::move(bw_try);
        obj = full;
        if (best.from_offload) {
          gamma = best.gamma;
          gamma_fresh = true;
        }
      }
    }

    // --- Offload step with backtracking acceptance on the true
    // objective (the linearized step may overshoot).
    for (int inner = 0; inner < 8; ++inner) {
      OffloadResult cand;
      try {
        cand = offload_impl(sc, t, bw.coeffs, 1e-13, &counters);
      } catch (const InfeasibleError&) {
        break;
      }
      bool accepted = false;
      double improvement = 0.0;
      double theta = 1.0;
      for (int halve = 0; halve <= 40; ++halve, theta *= 0.5) {
        Mat blend(K, N);
        for (std::size_t k = 0; k < K; ++k)
          for (std::size_t n = 0; n < N; ++n)
            blend(k, n) =
                (1.0 - theta) * load(k, n) + theta * cand.load(k, n);
        try {
          const auto bwb = bandwidth_impl(sc, blend, t, 1e-13, &counters, warm);
          const double o = evaluate(sc, make_allocation(sc, blend, t, bwb.tau))
                               .weighted_objective;
          if (o <= obj * (1.0 + 1e-15) + 1e-300) {
            improvement = obj - o;
            load = blend;
            bw = bwb;
            obj = o;
            if (halve == 0) {
              gamma = cand.gamma;
              gamma_fresh = true;
            } else {
              gamma_fresh = false;
              ++res.diagnostics.damped_steps;
            }
            accepted = true;
            break;
          }
        } catch (const std::exception&) {
        }
      }
      if (!accepted) break;
      if (theta * 2.0 >= 1.0 &&
          improvement <= 0.1 * options.tol * std::max(std::abs(obj), 1e-300))
        break;
    }

    res.trace.push_back(obj);
    res.iterations = iter;
    const double prev = res.trace[res.trace.size() - 2];
    if (std::abs(prev - obj) <= options.tol * std::max(std::abs(obj), 1e-300)) {
      res.converged = true;
      break;
    }
  }

  // Remove blend dust: negligible loads left on abandoned channels.
  bool cleaned = false;
  for (std::size_t k = 0; k < K; ++k) {
    for (std::size_t n = 0; n < N; ++n) {
      const double l = load(k, n);
      if (l > 0.0 && l < 1e-12 * sc.tasks[k].data_size &&
          load.row_sum(k) - l >= l_lo[k]) {
        load(k, n) = 0.0;
        cleaned = true;
      }
    }
  }
  if (cleaned) bw = bandwidth_impl(sc, load, t, 1e-13, &counters, warm);

  // Make gamma consistent with the final loads when the fixed point was
  // reached (it normally is); otherwise report it as stale.
  if (!gamma_fresh) {
    try {
      const auto off = offload_impl(sc, t, bw.coeffs, 1e-13, &counters);
      bool same = true;
      for (std::size_t k = 0; k < K && same; ++k) {
        const double a = off.load.row_sum(k), b = load.row_sum(k);
        if (std::abs(a - b) > 1e-7 * std::max(sc.tasks[k].data_size, 1.0))
          same = false;
      }
      if (same) {
        gamma = off.gamma;
        gamma_fresh = true;
      }
    } catch (const InfeasibleError&) {
    }
  }
  res.diagnostics.gamma_refreshed = gamma_fresh;

  res.allocation = make_allocation(sc, load, t, bw.tau);
  res.objective = evaluate(sc, res.allocation).weighted_objective;
  res.duals.mu = bw.coeffs.mu;
  res.duals.gamma = gamma;
  res.duals.delta.assign(K, 0.0);
  res.duals.zeta_active = Mat(K, N);
  res.active_channels.assign(K, {});
  res.phi.assign(K, 0.0);
  for (std::size_t k = 0; k < K; ++k) {
    for (std::size_t n = 0; n < N; ++n) {
      if (load(k, n) > 0.0)
        res.active_channels[k].push_back(n);
      else
        res.duals.zeta_active(k, n) = 1.0;
    }
    const auto& task = sc.tasks[k];
    const double rem = task.data_size - load.row_sum(k);
    const double c3 =
        task.cycles_per_bit * task.cycles_per_bit * task.cycles_per_bit;
    res.phi[k] = 3.0 * task.chip_eps * c3 * rem * rem /
                     (task.deadline_s * task.deadline_s) -
                 gamma * task.cycles_per_bit /
                     (task.weight * (task.deadline_s - t));
  }
  res.diagnostics.bisect_evals = counters.bisect_evals;
  res.diagnostics.probes = counters.probes;
  return res;
}

}  // namespace mecsol
