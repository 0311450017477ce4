#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

#include "socnet/graph.hpp"
#include "socnet/rng.hpp"

namespace socnet {

// Degree law truncated at d_trunc; mass at higher degrees folds into the
// last bin.
struct DegreeDistribution {
  std::vector<double> probs;

  explicit DegreeDistribution(std::size_t d_trunc = 200)
      : probs(d_trunc + 1, 0.0) {}

  std::size_t d_trunc() const { return probs.size() - 1; }

  static DegreeDistribution from_histogram(const std::vector<std::size_t>& h,
                                           std::size_t d_trunc) {
    DegreeDistribution d(d_trunc);
    double total = 0.0;
    for (std::size_t k = 0; k < h.size(); ++k) {
      d.probs[std::min(k, d_trunc)] += double(h[k]);
      total += double(h[k]);
    }
    if (total <= 0.0) throw AllZeroError("degree distribution: empty");
    for (double& p : d.probs) p /= total;
    return d;
  }

  double l2_sq(const DegreeDistribution& other) const {
    if (probs.size() != other.probs.size())
      throw DimensionMismatchError("degree distribution: size mismatch");
    double s = 0.0;
    for (std::size_t k = 0; k < probs.size(); ++k) {
      double d = probs[k] - other.probs[k];
      s += d * d;
    }
    return s;
  }

  double overflow_mass() const { return probs.back(); }
};

struct TrackerState {
  DegreeDistribution estimate;
  double step_size = 0.01;
  long samples = 0;
};

// Constant-step stochastic approximation toward the indicator of the
// observed degree; a convex combination, so the simplex is preserved
// exactly.
inline TrackerState tracker_step(TrackerState s, std::size_t observed_degree) {
  std::size_t d = std::min(observed_degree, s.estimate.d_trunc());
  const double eps = s.step_size;
  for (double& p : s.estimate.probs) p *= 1.0 - eps;
  s.estimate.probs[d] += eps;
  s.samples += 1;
  return s;
}

struct TrackingOptions {
  std::size_t d_trunc = 200;
  long graph_burn_in = 2000;
  long epoch_len = 100;
};

// Long frozen-regime simulation averaged over periodic snapshots; the
// per-regime reference law the tracker is scored against.
inline std::vector<DegreeDistribution> precompute_regime_references(
    const DupDelParams& params, long presim_steps, long burn_in,
    long snap_every, std::size_t d_trunc, std::uint64_t seed) {
  validate(params);
  if (presim_steps <= burn_in || snap_every <= 0)
    throw Error("regime references: bad schedule");
  std::vector<DegreeDistribution> refs;
  for (std::size_t theta = 0; theta < params.num_regimes(); ++theta) {
    Rng rng = Rng::derive(seed, theta);
    Graph g(false, 2);
    g.add_edge(0, 1);
    DegreeDistribution acc(d_trunc);
    long snaps = 0;
    for (long step = 0; step < presim_steps; ++step) {
      dup_del_step(g, params, theta, rng);
      if (step >= burn_in && (step - burn_in) % snap_every == 0) {
        DegreeDistribution snap =
            DegreeDistribution::from_histogram(g.degree_histogram(), d_trunc);
        for (std::size_t k = 0; k < acc.probs.size(); ++k)
          acc.probs[k] += snap.probs[k];
        snaps += 1;
      }
    }
    for (double& p : acc.probs) p /= double(snaps);
    refs.push_back(std::move(acc));
  }
  return refs;
}

struct TrackingRun {
  std::vector<double> error_trace;       // squared l2 per epoch
  std::vector<std::size_t> regime_trace;  // regime at each epoch end
  DegreeDistribution final_estimate;
  DegreeDistribution mean_estimate;  // averaged over the last half of epochs
};

// Co-simulates regime chain, graph process, uniform degree sampling, and the
// tracker; the error is measured against the supplied per-regime references.
inline TrackingRun run_tracking(const DupDelParams& params,
                                const std::vector<DegreeDistribution>& refs,
                                double epsilon, long horizon,
                                std::uint64_t seed,
                                const TrackingOptions& opts = {}) {
  validate(params);
  if (refs.size() != params.num_regimes())
    throw DimensionMismatchError("run_tracking: reference count");
  if (!(epsilon > 0.0) || epsilon > 1.0)
    throw Error("run_tracking: step size must lie in (0, 1]");
  Rng rng(seed);
  Graph g(false, 2);
  g.add_edge(0, 1);
  std::size_t theta = 0;
  const bool switching = params.num_regimes() > 1;
  auto advance_regime = [&] {
    if (switching)
      theta = rng.categorical(params.regime_transition.row(theta).probs());
  };
  for (long step = 0; step < opts.graph_burn_in; ++step) {
    advance_regime();
    dup_del_step(g, params, theta, rng);
  }

  TrackerState state{DegreeDistribution(opts.d_trunc), epsilon, 0};
  const double flat = 1.0 / double(opts.d_trunc + 1);
  for (double& p : state.estimate.probs) p = flat;

  TrackingRun run{{}, {}, state.estimate, state.estimate};
  const long epochs = horizon / opts.epoch_len;
  const long avg_from = horizon - (epochs / 2) * opts.epoch_len;
  std::vector<double> acc(opts.d_trunc + 1, 0.0);
  long acc_n = 0;
  for (long step = 0; step < horizon; ++step) {
    advance_regime();
    dup_del_step(g, params, theta, rng);
    std::size_t v = sample_uniform_node(g, rng);
    state = tracker_step(std::move(state), g.degree(v));
    if (step >= avg_from) {
      for (std::size_t d = 0; d <= opts.d_trunc; ++d)
        acc[d] += state.estimate.probs[d];
      ++acc_n;
    }
    if ((step + 1) % opts.epoch_len == 0) {
      run.error_trace.push_back(state.estimate.l2_sq(refs[theta]));
      run.regime_trace.push_back(theta);
    }
  }
  run.final_estimate = state.estimate;
  if (acc_n > 0) {
    for (std::size_t d = 0; d <= opts.d_trunc; ++d)
      run.mean_estimate.probs[d] = acc[d] / double(acc_n);
  }
  return run;
}

struct ScalingTable {
  std::vector<std::pair<double, double>> rows;  // (epsilon, mean mse)
  std::optional<double> slope;                  // log-log least squares
};

// Steady-state squared error as a function of the step size; horizons scale
// as 20 / epsilon so every run spends comparable time in steady state, and
// the error is averaged over the final quarter of each trace.
inline ScalingTable step_size_scaling(const DupDelParams& params,
                                      const std::vector<DegreeDistribution>& refs,
                                      const std::vector<double>& epsilons,
                                      long trials, std::uint64_t seed,
                                      const TrackingOptions& opts = {}) {
  if (epsilons.empty()) throw Error("step_size_scaling: no step sizes");
  ScalingTable table;
  for (double eps : epsilons) {
    if (!(eps > 0.0)) throw Error("step_size_scaling: step sizes must be > 0");
    long horizon = long(std::ceil(20.0 / eps));
    double total = 0.0;
    for (long t = 0; t < trials; ++t) {
      TrackingRun run = run_tracking(params, refs, eps, horizon,
                                     splitmix64(seed ^ (0x9e37 + t)), opts);
      std::size_t n = run.error_trace.size();
      std::size_t tail = std::max<std::size_t>(1, n / 4);
      double acc = 0.0;
      for (std::size_t k = n - tail; k < n; ++k) acc += run.error_trace[k];
      total += acc / double(tail);
    }
    table.rows.emplace_back(eps, total / double(trials));
  }
  if (table.rows.size() >= 2) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (auto& [e, m] : table.rows) {
      double x = std::log(e), y = std::log(m);
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
    }
    double n = double(table.rows.size());
    table.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  }
  return table;
}

}  // namespace socnet
