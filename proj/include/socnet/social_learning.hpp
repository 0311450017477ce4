#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "socnet/prob.hpp"
#include "socnet/rng.hpp"

namespace socnet {

// Ties between equally good actions, kernels, and policies are always broken
// toward the lowest index.
enum class TieBreak { kLowestIndex };

// Hidden Markov model of a state observed by a sequence of agents, plus the
// action costs those agents minimize.
struct SocialLearningModel {
  StochasticMatrix transition;    // X x X
  ObservationKernel observation;  // X x Y
  std::vector<std::vector<double>> cost;  // cost[x][a], X x A
  TieBreak tie_break = TieBreak::kLowestIndex;

  std::size_t num_states() const { return transition.rows(); }
  std::size_t num_obs() const { return observation.cols(); }
  std::size_t num_actions() const { return cost.empty() ? 0 : cost[0].size(); }
};

inline void validate(const SocialLearningModel& m) {
  if (m.transition.rows() != m.transition.cols())
    throw DimensionMismatchError("model: transition must be square");
  if (m.observation.rows() != m.transition.rows())
    throw DimensionMismatchError("model: observation rows != state count");
  if (m.cost.size() != m.transition.rows())
    throw DimensionMismatchError("model: cost rows != state count");
  std::size_t a = m.cost[0].size();
  if (a == 0) throw DimensionMismatchError("model: no actions");
  for (const auto& row : m.cost)
    if (row.size() != a)
      throw DimensionMismatchError("model: ragged cost matrix");
}

// Two symmetric states, identity dynamics, 80/20 observations, and
// misclassification costs. Used as the default fixture everywhere.
inline SocialLearningModel canonical_model() {
  return SocialLearningModel{
      StochasticMatrix::identity(2),
      ObservationKernel({{0.8, 0.2}, {0.2, 0.8}}),
      {{0.0, 1.0}, {1.0, 0.0}}};
}

inline Belief canonical_prior() { return Belief{0.5, 0.5}; }

// One Bayesian filter update: predict through the transition kernel, then
// condition on observation y.
inline Belief hmm_filter_step(const SocialLearningModel& m,
                              const Belief& prior, std::size_t y) {
  if (y >= m.num_obs()) throw DimensionMismatchError("filter: bad symbol");
  std::vector<double> pred = m.transition.left_apply(prior.probs());
  for (std::size_t j = 0; j < pred.size(); ++j)
    pred[j] *= m.observation(j, y);
  return normalize(pred);
}

// Probability of observing y after one prediction step from prior.
inline double predictive_prob(const SocialLearningModel& m,
                              const Belief& prior, std::size_t y) {
  std::vector<double> pred = m.transition.left_apply(prior.probs());
  double s = 0.0;
  for (std::size_t j = 0; j < pred.size(); ++j)
    s += pred[j] * m.observation(j, y);
  return s;
}

// Myopic action: minimize expected cost under the private belief.
inline std::size_t sl_action(const SocialLearningModel& m, const Belief& eta) {
  if (eta.size() != m.num_states())
    throw DimensionMismatchError("sl_action: belief dimension");
  std::size_t best = 0;
  double best_cost = 0.0;
  for (std::size_t a = 0; a < m.num_actions(); ++a) {
    double c = 0.0;
    for (std::size_t x = 0; x < m.num_states(); ++x)
      c += m.cost[x][a] * eta[x];
    if (a == 0 || c < best_cost) {
      best = a;
      best_cost = c;
    }
  }
  return best;
}

// Risk-averse action: minimize the tail risk of the cost at level alpha.
inline std::size_t cvar_action(const SocialLearningModel& m, const Belief& eta,
                               double alpha) {
  if (eta.size() != m.num_states())
    throw DimensionMismatchError("cvar_action: belief dimension");
  std::size_t best = 0;
  double best_risk = 0.0;
  for (std::size_t a = 0; a < m.num_actions(); ++a) {
    std::vector<double> vals(m.num_states());
    for (std::size_t x = 0; x < m.num_states(); ++x) vals[x] = m.cost[x][a];
    double r = cvar(DiscreteRV(vals, eta), alpha);
    if (a == 0 || r < best_risk) {
      best = a;
      best_risk = r;
    }
  }
  return best;
}

struct PublicUpdate {
  Belief posterior;
  double prob;  // chance of seeing action a from public belief pi
};

namespace detail {

// Actions are a deterministic function of the observation once the public
// belief is fixed; group symbols by the action they induce.
template <typename ActionFn>
PublicUpdate public_update_impl(const SocialLearningModel& m, const Belief& pi,
                                std::size_t a, ActionFn&& act) {
  if (a >= m.num_actions())
    throw DimensionMismatchError("public update: bad action");
  std::vector<double> pred = m.transition.left_apply(pi.probs());
  std::vector<double> raw(m.num_states(), 0.0);
  for (std::size_t y = 0; y < m.num_obs(); ++y) {
    double py = 0.0;
    std::vector<double> post(m.num_states());
    for (std::size_t j = 0; j < m.num_states(); ++j) {
      post[j] = pred[j] * m.observation(j, y);
      py += post[j];
    }
    if (py <= 0.0) continue;  // symbol cannot occur from this belief
    for (double& v : post) v /= py;
    if (act(Belief(std::move(post))) != a) continue;
    for (std::size_t j = 0; j < m.num_states(); ++j)
      raw[j] += pred[j] * m.observation(j, y);
  }
  double sigma = 0.0;
  for (double v : raw) sigma += v;
  if (sigma <= 0.0)
    throw ImpossibleActionError("public update: action has zero probability");
  return PublicUpdate{normalize(raw), sigma};
}

}  // namespace detail

// Public belief update after watching an agent choose action a. The returned
// prob values sum to one across actions.
inline PublicUpdate sl_public_update(const SocialLearningModel& m,
                                     const Belief& pi, std::size_t a) {
  return detail::public_update_impl(
      m, pi, a, [&](const Belief& eta) { return sl_action(m, eta); });
}

// Same protocol with risk-averse agents.
inline PublicUpdate sl_public_update_cvar(const SocialLearningModel& m,
                                          const Belief& pi, std::size_t a,
                                          double alpha) {
  return detail::public_update_impl(
      m, pi, a, [&](const Belief& eta) { return cvar_action(m, eta, alpha); });
}

// Grid of beliefs at which every observation maps to the same action, so
// watching the agent reveals nothing. Two-state models only; the grid is
// uniform in the first coordinate.
struct HerdingRegion {
  std::vector<double> grid;  // pi(0) coordinates
  std::vector<bool> herds;

  std::size_t count() const {
    std::size_t c = 0;
    for (bool h : herds) c += h;
    return c;
  }
  bool full() const { return count() == herds.size(); }
  // Every herding point of this region also herds in other.
  bool subset_of(const HerdingRegion& other) const {
    if (herds.size() != other.herds.size())
      throw DimensionMismatchError("herding region: grid mismatch");
    for (std::size_t i = 0; i < herds.size(); ++i)
      if (herds[i] && !other.herds[i]) return false;
    return true;
  }
};

inline HerdingRegion herding_region(const SocialLearningModel& m, double alpha,
                                    std::size_t grid_size = 1001) {
  if (m.num_states() != 2)
    throw UnsupportedDimensionError("herding_region: two states only");
  if (!(alpha > 0.0) || alpha > 1.0)
    throw BadAlphaError("herding_region: alpha must lie in (0, 1]");
  if (grid_size < 2) throw DimensionMismatchError("herding_region: grid");
  HerdingRegion out;
  out.grid.resize(grid_size);
  out.herds.resize(grid_size);
  for (std::size_t i = 0; i < grid_size; ++i) {
    double p = double(i) / double(grid_size - 1);
    out.grid[i] = p;
    Belief pi{p, 1.0 - p};
    bool herd = true;
    std::optional<std::size_t> first;
    for (std::size_t y = 0; y < m.num_obs(); ++y) {
      if (predictive_prob(m, pi, y) <= 0.0) continue;
      std::size_t a = cvar_action(m, hmm_filter_step(m, pi, y), alpha);
      if (!first)
        first = a;
      else if (*first != a)
        herd = false;
    }
    out.herds[i] = herd;
  }
  return out;
}

// Simulate the observe-act-update protocol from a fixed true state drawn
// from prior. Returns the first step index from which the public belief
// never moves again (sup norm below kBeliefTol) within the horizon, or
// nothing if the belief is still moving at the end.
inline std::optional<long> detect_cascade(const SocialLearningModel& m,
                                          const Belief& prior, long horizon,
                                          std::uint64_t seed) {
  validate(m);
  for (std::size_t i = 0; i < m.num_states(); ++i)
    for (std::size_t j = 0; j < m.num_states(); ++j)
      if (std::abs(m.transition(i, j) - (i == j ? 1.0 : 0.0)) > kBeliefTol)
        throw Error("detect_cascade: state must be static");
  Rng rng(seed);
  std::size_t x = rng.categorical(prior.probs());
  std::vector<Belief> path;
  path.push_back(prior);
  Belief pi = prior;
  for (long k = 0; k < horizon; ++k) {
    std::size_t y = rng.categorical(m.observation.row(x).probs());
    std::size_t a = sl_action(m, hmm_filter_step(m, pi, y));
    pi = sl_public_update(m, pi, a).posterior;
    path.push_back(pi);
  }
  auto moved = [&](std::size_t k) {
    for (std::size_t j = 0; j < pi.size(); ++j)
      if (std::abs(path[k + 1][j] - path[k][j]) >= kBeliefTol) return true;
    return false;
  };
  long frozen_from = horizon;
  for (long k = horizon - 1; k >= 0; --k) {
    if (moved(k)) break;
    frozen_from = k;
  }
  if (frozen_from >= horizon) return std::nullopt;
  return frozen_from;
}

// A menu of observation kernels with a price per bit of information.
struct AttentionModel {
  std::vector<ObservationKernel> kernels;
  double lambda = 0.0;
};

struct AttentionChoice {
  std::size_t kernel;
  double objective;
  double myopic_cost;
  double information;  // bits gained about the predicted state, >= 0
};

// Pick the kernel minimizing expected myopic cost plus lambda times the
// information the observation carries about the predicted state.
inline AttentionChoice ri_choose(const AttentionModel& am,
                                 const SocialLearningModel& m,
                                 const Belief& pi) {
  if (am.kernels.empty()) throw DimensionMismatchError("ri_choose: no kernels");
  std::vector<double> pred = m.transition.left_apply(pi.probs());
  double h_pred = shannon_entropy(Belief(pred));
  AttentionChoice best{};
  for (std::size_t u = 0; u < am.kernels.size(); ++u) {
    const ObservationKernel& bu = am.kernels[u];
    if (bu.rows() != m.num_states())
      throw DimensionMismatchError("ri_choose: kernel state count");
    double myopic = 0.0, post_entropy = 0.0;
    for (std::size_t y = 0; y < bu.cols(); ++y) {
      double py = 0.0;
      std::vector<double> post(m.num_states());
      for (std::size_t j = 0; j < m.num_states(); ++j) {
        post[j] = pred[j] * bu(j, y);
        py += post[j];
      }
      if (py <= 0.0) continue;
      for (double& v : post) v /= py;
      Belief eta(std::move(post));
      double c = 0.0;
      for (std::size_t x = 0; x < m.num_states(); ++x)
        c += m.cost[x][sl_action(m, eta)] * eta[x];
      myopic += py * c;
      post_entropy += py * shannon_entropy(eta);
    }
    double info = h_pred - post_entropy;
    double obj = myopic + am.lambda * info;
    if (u == 0 || obj < best.objective)
      best = AttentionChoice{u, obj, myopic, info};
  }
  return best;
}

// Two stage game: the first mover values both its own stage reward, which
// may depend on the distribution of the second mover's reply, and the
// reward the second mover collects.
struct AnticipatoryModel {
  // transition[a1] is the state kernel applied after stage-1 action a1.
  std::vector<StochasticMatrix> transition;
  // r1(s1, a1, q) where q is the predicted distribution of stage-2 actions.
  std::function<double(std::size_t, std::size_t, const std::vector<double>&)>
      r1;
  std::vector<std::vector<double>> r2;  // r2[s2][a2]

  std::size_t num_states() const {
    return transition.empty() ? 0 : transition[0].rows();
  }
  std::size_t num_stage1_actions() const { return transition.size(); }
  std::size_t num_stage2_actions() const {
    return r2.empty() ? 0 : r2[0].size();
  }
};

// Stage-1 reward of the form base(s1, a1) - kappa * H(q), penalizing
// uncertainty about the reply.
inline std::function<double(std::size_t, std::size_t,
                            const std::vector<double>&)>
anticipatory_reward(std::vector<std::vector<double>> base, double kappa) {
  return [base = std::move(base), kappa](std::size_t s1, std::size_t a1,
                                         const std::vector<double>& q) {
    double h = 0.0;
    for (double p : q)
      if (p > 0.0) h -= p * std::log2(p);
    return base[s1][a1] - kappa * h;
  };
}

struct Equilibrium {
  std::vector<std::size_t> stage1;  // per state
  std::vector<std::size_t> stage2;  // per state
  std::vector<double> value;        // stage-1 value per state
};

// Backward induction: the second mover best-responds per state, the first
// mover best-responds to the induced reply distribution.
inline Equilibrium anticipatory_equilibrium(const AnticipatoryModel& am) {
  const std::size_t s = am.num_states();
  const std::size_t a1n = am.num_stage1_actions();
  const std::size_t a2n = am.num_stage2_actions();
  if (s == 0 || a1n == 0 || a2n == 0)
    throw DimensionMismatchError("anticipatory model: empty");
  for (const auto& t : am.transition)
    if (t.rows() != s || t.cols() != s)
      throw DimensionMismatchError("anticipatory model: transition shape");
  if (am.r2.size() != s)
    throw DimensionMismatchError("anticipatory model: r2 rows");

  Equilibrium eq;
  eq.stage2.resize(s);
  for (std::size_t s2 = 0; s2 < s; ++s2) {
    std::size_t best = 0;
    for (std::size_t a = 1; a < a2n; ++a)
      if (am.r2[s2][a] > am.r2[s2][best]) best = a;
    eq.stage2[s2] = best;
  }
  eq.stage1.resize(s);
  eq.value.resize(s);
  for (std::size_t s1 = 0; s1 < s; ++s1) {
    std::size_t best = 0;
    double best_val = 0.0;
    for (std::size_t a1 = 0; a1 < a1n; ++a1) {
      std::vector<double> q(a2n, 0.0);
      double expected_r2 = 0.0;
      for (std::size_t s2 = 0; s2 < s; ++s2) {
        double p = am.transition[a1](s1, s2);
        q[eq.stage2[s2]] += p;
        expected_r2 += p * am.r2[s2][eq.stage2[s2]];
      }
      double val = am.r1(s1, a1, q) + expected_r2;
      if (a1 == 0 || val > best_val) {
        best = a1;
        best_val = val;
      }
    }
    eq.stage1[s1] = best;
    eq.value[s1] = best_val;
  }
  return eq;
}

}  // namespace socnet
