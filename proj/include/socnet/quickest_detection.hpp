#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

#include "socnet/rng.hpp"
#include "socnet/social_learning.hpp"

namespace socnet {

// Two-state change point model. State 0 is the post-change state and is
// absorbing; state 1 jumps to it with the hazard rate.
struct ChangeModel {
  StochasticMatrix transition;
  ObservationKernel observation;
  double delay_cost;        // per step spent in state 0 before stopping
  double false_alarm_cost;  // charged on stopping in state 1
  double discount = 1.0;

  double hazard() const { return transition(1, 0); }
};

inline ChangeModel make_change_model(double hazard,
                                     ObservationKernel observation,
                                     double delay_cost,
                                     double false_alarm_cost,
                                     double discount = 1.0) {
  if (hazard < 0.0 || hazard > 1.0) throw Error("change model: hazard range");
  if (observation.rows() != 2)
    throw UnsupportedDimensionError("change model: two states only");
  if (delay_cost < 0.0 || false_alarm_cost < 0.0)
    throw Error("change model: negative cost");
  if (!(discount > 0.0) || discount > 1.0)
    throw Error("change model: discount must lie in (0, 1]");
  return ChangeModel{
      StochasticMatrix({{1.0, 0.0}, {hazard, 1.0 - hazard}}),
      std::move(observation), delay_cost, false_alarm_cost, discount};
}

// How the public belief evolves while the detector waits: either the raw
// observation is public, or only the action of a (possibly risk-averse)
// myopic agent is.
struct BeliefUpdateRule {
  enum class Kind { kClassical, kSocial, kCvarSocial };
  Kind kind = Kind::kClassical;
  std::optional<SocialLearningModel> model;  // social kinds only
  double alpha = 1.0;

  static BeliefUpdateRule classical() { return BeliefUpdateRule{}; }
  static BeliefUpdateRule social(SocialLearningModel m) {
    validate(m);
    return BeliefUpdateRule{Kind::kSocial, std::move(m), 1.0};
  }
  static BeliefUpdateRule cvar_social(SocialLearningModel m, double alpha) {
    validate(m);
    if (!(alpha > 0.0) || alpha > 1.0)
      throw BadAlphaError("cvar rule: alpha must lie in (0, 1]");
    return BeliefUpdateRule{Kind::kCvarSocial, std::move(m), alpha};
  }
};

// Observation filter bound to the change model dynamics; for social rules
// the agents' cost matrix comes from the wrapped model.
inline SocialLearningModel bind_rule_model(const ChangeModel& cm,
                                           const BeliefUpdateRule& rule) {
  if (rule.kind == BeliefUpdateRule::Kind::kClassical) {
    return SocialLearningModel{cm.transition, cm.observation,
                               std::vector<std::vector<double>>(
                                   2, std::vector<double>(cm.observation.cols(),
                                                          0.0))};
  }
  const SocialLearningModel& m = *rule.model;
  if (m.num_states() != 2 || m.num_obs() != cm.observation.cols())
    throw DimensionMismatchError("rule model: dimensions");
  return SocialLearningModel{cm.transition, cm.observation, m.cost,
                             m.tie_break};
}

struct BeliefBranch {
  double next;  // next public belief, first coordinate
  double prob;
};

// All possible one-step public belief moves from pi, with probabilities.
inline std::vector<BeliefBranch> belief_branches(const ChangeModel& cm,
                                                 const BeliefUpdateRule& rule,
                                                 const Belief& pi) {
  SocialLearningModel m = bind_rule_model(cm, rule);
  std::vector<BeliefBranch> out;
  if (rule.kind == BeliefUpdateRule::Kind::kClassical) {
    for (std::size_t y = 0; y < m.num_obs(); ++y) {
      double py = predictive_prob(m, pi, y);
      if (py <= 0.0) continue;
      out.push_back({hmm_filter_step(m, pi, y)[0], py});
    }
    return out;
  }
  for (std::size_t a = 0; a < m.num_actions(); ++a) {
    try {
      PublicUpdate up =
          rule.kind == BeliefUpdateRule::Kind::kSocial
              ? sl_public_update(m, pi, a)
              : sl_public_update_cvar(m, pi, a, rule.alpha);
      out.push_back({up.posterior[0], up.prob});
    } catch (const ImpossibleActionError&) {
      // action never taken from this belief
    }
  }
  return out;
}

struct GridSolution {
  std::vector<double> grid;   // belief first coordinate
  std::vector<double> value;
  std::vector<int> policy;    // 1 = stop, 0 = continue
  long iterations = 0;
  double residual = 0.0;
};

namespace detail {

struct InterpBranch {
  std::size_t lo;
  double w_hi;
  double prob;
};

inline std::vector<std::vector<InterpBranch>> branch_table(
    const ChangeModel& cm, const BeliefUpdateRule& rule,
    const std::vector<double>& grid) {
  std::vector<std::vector<InterpBranch>> table(grid.size());
  const double cells = double(grid.size() - 1);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    Belief pi{grid[i], 1.0 - grid[i]};
    for (const BeliefBranch& b : belief_branches(cm, rule, pi)) {
      double t = std::clamp(b.next, 0.0, 1.0) * cells;
      std::size_t lo = std::min<std::size_t>(std::size_t(t), grid.size() - 2);
      table[i].push_back({lo, t - double(lo), b.prob});
    }
  }
  return table;
}

inline double interp(const std::vector<double>& v, const InterpBranch& b) {
  return v[b.lo] * (1.0 - b.w_hi) + v[b.lo + 1] * b.w_hi;
}

}  // namespace detail

// Value iteration for the stop/continue tradeoff: stopping pays the false
// alarm cost weighted by the no-change probability, waiting pays the delay
// cost weighted by the change probability. Expected continuation values are
// linearly interpolated on the grid; ties prefer stopping.
inline GridSolution solve_stopping(const ChangeModel& cm,
                                   const BeliefUpdateRule& rule,
                                   std::size_t grid_size = 1001,
                                   double tol = 1e-8,
                                   long max_iterations = 100000) {
  if (grid_size < 2) throw DimensionMismatchError("solve_stopping: grid");
  GridSolution sol;
  sol.grid.resize(grid_size);
  for (std::size_t i = 0; i < grid_size; ++i)
    sol.grid[i] = double(i) / double(grid_size - 1);
  auto table = detail::branch_table(cm, rule, sol.grid);

  std::vector<double> stop_cost(grid_size), v(grid_size), nv(grid_size);
  for (std::size_t i = 0; i < grid_size; ++i)
    stop_cost[i] = cm.false_alarm_cost * (1.0 - sol.grid[i]);
  v = stop_cost;
  double res = 0.0;
  long it = 0;
  for (; it < max_iterations; ++it) {
    res = 0.0;
    for (std::size_t i = 0; i < grid_size; ++i) {
      double cont = 0.0;
      for (const auto& b : table[i]) cont += b.prob * detail::interp(v, b);
      cont = cm.delay_cost * sol.grid[i] + cm.discount * cont;
      nv[i] = std::min(stop_cost[i], cont);
      res = std::max(res, std::abs(nv[i] - v[i]));
    }
    v.swap(nv);
    if (res <= tol) break;
  }
  if (res > tol)
    throw NoConvergenceError("solve_stopping: no fixed point after cap");
  sol.value = v;
  sol.policy.resize(grid_size);
  for (std::size_t i = 0; i < grid_size; ++i) {
    double cont = 0.0;
    for (const auto& b : table[i]) cont += b.prob * detail::interp(v, b);
    cont = cm.delay_cost * sol.grid[i] + cm.discount * cont;
    sol.policy[i] = stop_cost[i] <= cont ? 1 : 0;
  }
  sol.iterations = it + 1;
  sol.residual = res;
  return sol;
}

// Maximal runs of stop cells, as inclusive grid index intervals.
inline std::vector<std::pair<std::size_t, std::size_t>> stopping_set(
    const GridSolution& sol) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  std::size_t i = 0;
  while (i < sol.policy.size()) {
    if (!sol.policy[i]) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j + 1 < sol.policy.size() && sol.policy[j + 1]) ++j;
    out.emplace_back(i, j);
    i = j + 1;
  }
  return out;
}

// Risk-sensitive variant: the continuation value is charged through the
// tail risk of the next-step value instead of its mean. One multiplier z is
// shared across branches and searched over the branch values themselves.
inline GridSolution solve_cvar_stopping(const ChangeModel& cm,
                                        const BeliefUpdateRule& rule,
                                        double alpha,
                                        std::size_t grid_size = 1001,
                                        double tol = 1e-8,
                                        long max_iterations = 100000) {
  if (!(alpha > 0.0) || alpha > 1.0)
    throw BadAlphaError("solve_cvar_stopping: alpha must lie in (0, 1]");
  if (grid_size < 2) throw DimensionMismatchError("solve_cvar_stopping: grid");
  GridSolution sol;
  sol.grid.resize(grid_size);
  for (std::size_t i = 0; i < grid_size; ++i)
    sol.grid[i] = double(i) / double(grid_size - 1);
  auto table = detail::branch_table(cm, rule, sol.grid);

  std::vector<double> stop_cost(grid_size), v(grid_size), nv(grid_size);
  for (std::size_t i = 0; i < grid_size; ++i)
    stop_cost[i] = cm.false_alarm_cost * (1.0 - sol.grid[i]);
  v = stop_cost;
  auto risk = [&](const std::vector<detail::InterpBranch>& branches) {
    double best = 0.0;
    bool first = true;
    for (const auto& zb : branches) {
      double z = detail::interp(v, zb);
      double tail = 0.0;
      for (const auto& b : branches)
        tail += b.prob * std::max(detail::interp(v, b) - z, 0.0);
      double val = z + tail / alpha;
      if (first || val < best) {
        best = val;
        first = false;
      }
    }
    return best;
  };
  double res = 0.0;
  long it = 0;
  for (; it < max_iterations; ++it) {
    res = 0.0;
    for (std::size_t i = 0; i < grid_size; ++i) {
      double cont =
          cm.delay_cost * sol.grid[i] + cm.discount * risk(table[i]);
      nv[i] = std::min(stop_cost[i], cont);
      res = std::max(res, std::abs(nv[i] - v[i]));
    }
    v.swap(nv);
    if (res <= tol) break;
  }
  if (res > tol)
    throw NoConvergenceError("solve_cvar_stopping: no fixed point after cap");
  sol.value = v;
  sol.policy.resize(grid_size);
  for (std::size_t i = 0; i < grid_size; ++i) {
    double cont = cm.delay_cost * sol.grid[i] + cm.discount * risk(table[i]);
    sol.policy[i] = stop_cost[i] <= cont ? 1 : 0;
  }
  sol.iterations = it + 1;
  sol.residual = res;
  return sol;
}

struct SweepResult {
  double delay_cost = 0.0;
  double false_alarm_cost = 0.0;
  double hazard = 0.0;
  std::size_t cost_index = 0;
  GridSolution solution;
  std::vector<std::pair<std::size_t, std::size_t>> intervals;
};

struct RegimeSweep {
  std::vector<double> delay_costs;
  std::vector<double> false_alarm_costs;
  std::vector<double> hazards;
  std::vector<std::vector<std::vector<double>>> agent_costs;
  std::size_t grid_size = 501;
  double tol = 1e-7;
};

// Deterministic sweep over detector and agent costs; returns the first
// parameter tuple whose stopping set splits into two or more intervals
// under the action-only update.
inline std::optional<SweepResult> find_disconnected_regime(
    const SocialLearningModel& base, const RegimeSweep& sweep) {
  for (double d : sweep.delay_costs) {
    for (double f : sweep.false_alarm_costs) {
      for (double eps : sweep.hazards) {
        for (std::size_t ci = 0; ci < sweep.agent_costs.size(); ++ci) {
          ChangeModel cm = make_change_model(eps, base.observation, d, f);
          SocialLearningModel agents{cm.transition, cm.observation,
                                     sweep.agent_costs[ci], base.tie_break};
          GridSolution sol =
              solve_stopping(cm, BeliefUpdateRule::social(agents),
                             sweep.grid_size, sweep.tol);
          auto intervals = stopping_set(sol);
          if (intervals.size() >= 2)
            return SweepResult{d, f, eps, ci, std::move(sol),
                               std::move(intervals)};
        }
      }
    }
  }
  return std::nullopt;
}

// Stop = go dark and herd on the current myopic action forever; continue =
// reveal the raw observation to the public one more step.
inline GridSolution solve_quickest_herding(const SocialLearningModel& m,
                                           double discount,
                                           std::size_t grid_size = 1001,
                                           double tol = 1e-8,
                                           long max_iterations = 100000) {
  validate(m);
  if (m.num_states() != 2)
    throw UnsupportedDimensionError("quickest herding: two states only");
  if (!(discount > 0.0) || discount >= 1.0)
    throw Error("quickest herding: discount must lie in (0, 1)");
  GridSolution sol;
  sol.grid.resize(grid_size);
  for (std::size_t i = 0; i < grid_size; ++i)
    sol.grid[i] = double(i) / double(grid_size - 1);

  std::vector<double> stop_cost(grid_size), inst(grid_size);
  std::vector<std::vector<detail::InterpBranch>> table(grid_size);
  const double cells = double(grid_size - 1);
  for (std::size_t i = 0; i < grid_size; ++i) {
    Belief pi{sol.grid[i], 1.0 - sol.grid[i]};
    double herd = 0.0;
    for (std::size_t a = 0; a < m.num_actions(); ++a) {
      double c = 0.0;
      for (std::size_t x = 0; x < 2; ++x) c += m.cost[x][a] * pi[x];
      if (a == 0 || c < herd) herd = c;
    }
    stop_cost[i] = herd / (1.0 - discount);
    std::vector<double> pred = m.transition.left_apply(pi.probs());
    double e = 0.0;
    for (std::size_t y = 0; y < m.num_obs(); ++y) {
      double py = 0.0;
      std::vector<double> post(2);
      for (std::size_t x = 0; x < 2; ++x) {
        post[x] = pred[x] * m.observation(x, y);
        py += post[x];
      }
      if (py <= 0.0) continue;
      Belief eta{post[0] / py, 1.0 - post[0] / py};
      std::size_t act = sl_action(m, eta);
      for (std::size_t x = 0; x < 2; ++x) e += post[x] * m.cost[x][act];
      double t = std::clamp(post[0] / py, 0.0, 1.0) * cells;
      std::size_t lo = std::min<std::size_t>(std::size_t(t), grid_size - 2);
      table[i].push_back({lo, t - double(lo), py});
    }
    inst[i] = e;
  }

  std::vector<double> v = stop_cost, nv(grid_size);
  double res = 0.0;
  long it = 0;
  for (; it < max_iterations; ++it) {
    res = 0.0;
    for (std::size_t i = 0; i < grid_size; ++i) {
      double cont = 0.0;
      for (const auto& b : table[i]) cont += b.prob * detail::interp(v, b);
      cont = inst[i] + discount * cont;
      nv[i] = std::min(stop_cost[i], cont);
      res = std::max(res, std::abs(nv[i] - v[i]));
    }
    v.swap(nv);
    if (res <= tol) break;
  }
  if (res > tol)
    throw NoConvergenceError("quickest herding: no fixed point after cap");
  sol.value = v;
  sol.policy.resize(grid_size);
  for (std::size_t i = 0; i < grid_size; ++i) {
    double cont = 0.0;
    for (const auto& b : table[i]) cont += b.prob * detail::interp(v, b);
    cont = inst[i] + discount * cont;
    sol.policy[i] = stop_cost[i] <= cont ? 1 : 0;
  }
  sol.iterations = it + 1;
  sol.residual = res;
  return sol;
}

// Information market: each step the platform posts a price, the agent
// reveals its observation with the price-dependent probability, and the
// platform pays the price on reveal plus a penalty for residual uncertainty.
struct PricingModel {
  std::vector<double> prices;       // ascending
  std::vector<double> reveal_prob;  // q(price), nondecreasing, in [0, 1]
  double accuracy_weight = 0.0;     // per-step penalty on 1 - max belief
  double discount = 0.95;
};

inline void validate(const PricingModel& pm) {
  if (pm.prices.empty() || pm.prices.size() != pm.reveal_prob.size())
    throw DimensionMismatchError("pricing model: prices/reveal sizes");
  for (std::size_t i = 0; i < pm.prices.size(); ++i) {
    if (pm.prices[i] < 0.0) throw Error("pricing model: negative price");
    if (pm.reveal_prob[i] < 0.0 || pm.reveal_prob[i] > 1.0)
      throw Error("pricing model: reveal probability range");
    if (i > 0 && pm.prices[i] <= pm.prices[i - 1])
      throw Error("pricing model: prices must ascend");
    if (i > 0 && pm.reveal_prob[i] < pm.reveal_prob[i - 1])
      throw Error("pricing model: reveal probability must not decrease");
  }
  if (!(pm.discount > 0.0) || pm.discount >= 1.0)
    throw Error("pricing model: discount must lie in (0, 1)");
  if (pm.accuracy_weight < 0.0) throw Error("pricing model: penalty sign");
}

struct PricingSolution {
  std::vector<double> grid;
  std::vector<double> value;
  std::vector<std::size_t> price_index;
  long iterations = 0;
  double residual = 0.0;

  double price_at(std::size_t i, const PricingModel& pm) const {
    return pm.prices[price_index[i]];
  }
};

inline PricingSolution solve_pricing(const PricingModel& pm,
                                     const SocialLearningModel& m,
                                     std::size_t grid_size = 1001,
                                     double tol = 1e-9,
                                     long max_iterations = 100000) {
  validate(pm);
  validate(m);
  if (m.num_states() != 2)
    throw UnsupportedDimensionError("solve_pricing: two states only");
  PricingSolution sol;
  sol.grid.resize(grid_size);
  for (std::size_t i = 0; i < grid_size; ++i)
    sol.grid[i] = double(i) / double(grid_size - 1);

  std::vector<std::vector<detail::InterpBranch>> table(grid_size);
  std::vector<double> penalty(grid_size);
  const double cells = double(grid_size - 1);
  for (std::size_t i = 0; i < grid_size; ++i) {
    Belief pi{sol.grid[i], 1.0 - sol.grid[i]};
    penalty[i] =
        pm.accuracy_weight * (1.0 - std::max(sol.grid[i], 1.0 - sol.grid[i]));
    std::vector<double> pred = m.transition.left_apply(pi.probs());
    for (std::size_t y = 0; y < m.num_obs(); ++y) {
      double py = 0.0;
      std::vector<double> post(2);
      for (std::size_t x = 0; x < 2; ++x) {
        post[x] = pred[x] * m.observation(x, y);
        py += post[x];
      }
      if (py <= 0.0) continue;
      double t = std::clamp(post[0] / py, 0.0, 1.0) * cells;
      std::size_t lo = std::min<std::size_t>(std::size_t(t), grid_size - 2);
      table[i].push_back({lo, t - double(lo), py});
    }
  }

  std::vector<double> v(grid_size, 0.0), nv(grid_size);
  double res = 0.0;
  long it = 0;
  for (; it < max_iterations; ++it) {
    res = 0.0;
    for (std::size_t i = 0; i < grid_size; ++i) {
      double reveal_cont = 0.0;
      for (const auto& b : table[i])
        reveal_cont += b.prob * detail::interp(v, b);
      double best = 0.0;
      for (std::size_t p = 0; p < pm.prices.size(); ++p) {
        double q = pm.reveal_prob[p];
        double val = pm.prices[p] * q + penalty[i] +
                     pm.discount * (q * reveal_cont + (1.0 - q) * v[i]);
        if (p == 0 || val < best) best = val;
      }
      nv[i] = best;
      res = std::max(res, std::abs(nv[i] - v[i]));
    }
    v.swap(nv);
    if (res <= tol) break;
  }
  if (res > tol)
    throw NoConvergenceError("solve_pricing: no fixed point after cap");
  sol.value = v;
  sol.price_index.resize(grid_size);
  for (std::size_t i = 0; i < grid_size; ++i) {
    double reveal_cont = 0.0;
    for (const auto& b : table[i])
      reveal_cont += b.prob * detail::interp(v, b);
    std::size_t best_p = 0;
    double best = 0.0;
    for (std::size_t p = 0; p < pm.prices.size(); ++p) {
      double q = pm.reveal_prob[p];
      double val = pm.prices[p] * q + penalty[i] +
                   pm.discount * (q * reveal_cont + (1.0 - q) * v[i]);
      if (p == 0 || val < best) {
        best = val;
        best_p = p;
      }
    }
    sol.price_index[i] = best_p;
  }
  sol.iterations = it + 1;
  sol.residual = res;
  return sol;
}

struct SupermartingaleReport {
  double violation_fraction = 0.0;
  long cells_checked = 0;
  std::vector<double> mean_price_path;
};

// Simulate the posted-price process and test that the price sequence drifts
// down: within every (step, belief cell) bucket the average next price must
// not exceed the current one by more than two standard errors.
inline SupermartingaleReport verify_supermartingale(
    const PricingModel& pm, const SocialLearningModel& m,
    const PricingSolution& sol, const Belief& prior, long trials,
    long horizon, std::uint64_t seed, long min_cell_count = 5) {
  const std::size_t g = sol.grid.size();
  auto cell_of = [&](double p0) {
    double t = std::clamp(p0, 0.0, 1.0) * double(g - 1);
    return std::size_t(std::lround(t));
  };
  struct Bucket {
    long n = 0;
    double sum = 0.0, sum2 = 0.0;
  };
  std::vector<std::vector<Bucket>> buckets(horizon);
  for (auto& row : buckets) row.resize(g);
  std::vector<double> price_sum(horizon + 1, 0.0);

  for (long trial = 0; trial < trials; ++trial) {
    Rng rng = Rng::derive(seed, std::uint64_t(trial));
    std::size_t x = rng.categorical(prior.probs());
    Belief pi = prior;
    std::vector<std::size_t> cells(horizon + 1);
    std::vector<double> prices(horizon + 1);
    for (long k = 0; k <= horizon; ++k) {
      std::size_t c = cell_of(pi[0]);
      cells[k] = c;
      prices[k] = pm.prices[sol.price_index[c]];
      price_sum[k] += prices[k];
      if (k == horizon) break;
      x = rng.categorical(m.transition.row(x).probs());
      if (rng.bernoulli(pm.reveal_prob[sol.price_index[c]])) {
        std::size_t y = rng.categorical(m.observation.row(x).probs());
        pi = hmm_filter_step(m, pi, y);
      }
    }
    for (long k = 0; k < horizon; ++k) {
      Bucket& b = buckets[k][cells[k]];
      b.n += 1;
      b.sum += prices[k + 1];
      b.sum2 += prices[k + 1] * prices[k + 1];
    }
  }

  SupermartingaleReport rep;
  long violations = 0;
  for (long k = 0; k < horizon; ++k) {
    for (std::size_t c = 0; c < g; ++c) {
      const Bucket& b = buckets[k][c];
      if (b.n < min_cell_count) continue;
      double mean = b.sum / double(b.n);
      double var = std::max(0.0, b.sum2 / double(b.n) - mean * mean);
      double se = std::sqrt(var / double(b.n));
      double now = pm.prices[sol.price_index[c]];
      rep.cells_checked += 1;
      if (mean > now + 2.0 * se + 1e-12) violations += 1;
    }
  }
  rep.violation_fraction =
      rep.cells_checked ? double(violations) / double(rep.cells_checked) : 0.0;
  rep.mean_price_path.resize(horizon + 1);
  for (long k = 0; k <= horizon; ++k)
    rep.mean_price_path[k] = price_sum[k] / double(trials);
  return rep;
}

}  // namespace socnet
