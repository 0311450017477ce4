#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "socnet/errors.hpp"
#include "socnet/graph.hpp"
#include "socnet/rng.hpp"

namespace socnet {

// Growth model for a directed follow network. Each step a node is born, red
// with probability red_birth, and follows edges_per_node distinct existing
// nodes. A target is chosen with probability proportional to
// (followers(target) + offset) * affinity(new color, target color), and each
// followed node follows back with probability reciprocal.
struct GceParams {
  double red_birth = 0.2;
  long edges_per_node = 1;
  double affinity_rr = 1.0;
  double affinity_rb = 1.0;
  double affinity_br = 1.0;
  double affinity_bb = 1.0;
  double offset = 1.0;
  double reciprocal = 0.2;

  double affinity(Color newcomer, Color target) const {
    if (newcomer == Color::kRed)
      return target == Color::kRed ? affinity_rr : affinity_rb;
    return target == Color::kRed ? affinity_br : affinity_bb;
  }
};

inline void validate(const GceParams& p) {
  if (!(p.red_birth > 0.0) || !(p.red_birth < 1.0))
    throw Error("gce: red_birth must lie in (0, 1)");
  if (p.edges_per_node < 1) throw Error("gce: edges_per_node");
  for (double a : {p.affinity_rr, p.affinity_rb, p.affinity_br, p.affinity_bb})
    if (!(a > 0.0) || a > 1.0) throw Error("gce: affinity must lie in (0, 1]");
  if (!(p.offset > 0.0)) throw Error("gce: offset");
  if (p.reciprocal < 0.0 || p.reciprocal > 1.0) throw Error("gce: reciprocal");
}

namespace detail {

// Attachment sampler. Holds per color the member list and an urn with one
// entry per follower a node of that color has gained, so a class is weighed
// by followers + offset * size and a draw inside it is O(1).
struct AttachState {
  std::vector<std::size_t> members[2];
  std::vector<std::size_t> urn[2];

  static int slot(Color c) { return c == Color::kRed ? 0 : 1; }

  void rebuild(const Graph& g) {
    for (int c : {0, 1}) {
      members[c].clear();
      urn[c].clear();
    }
    for (std::size_t v = 0; v < g.num_nodes(); ++v) {
      if (g.color(v) == Color::kNone)
        throw Error("gce: every node needs a color");
      int c = slot(g.color(v));
      members[c].push_back(v);
      urn[c].insert(urn[c].end(), g.in_degree(v), v);
    }
  }

  std::size_t pick(const GceParams& p, Color newcomer, Rng& rng) const {
    double wr = p.affinity(newcomer, Color::kRed) *
                (double(urn[0].size()) + p.offset * double(members[0].size()));
    double wb = p.affinity(newcomer, Color::kBlue) *
                (double(urn[1].size()) + p.offset * double(members[1].size()));
    int c = rng.uniform() * (wr + wb) < wr ? 0 : 1;
    double f = double(urn[c].size());
    double base = p.offset * double(members[c].size());
    if (rng.uniform() * (f + base) < f)
      return urn[c][rng.uniform_int(urn[c].size())];
    return members[c][rng.uniform_int(members[c].size())];
  }
};

}  // namespace detail

// Continues growth of an existing colored follow graph for `steps` births,
// drawing from the caller's stream.
inline Graph grow_network(Graph g, const GceParams& p, long steps, Rng& rng) {
  validate(p);
  if (!g.directed()) throw Error("grow_network: directed graph required");
  if (g.num_nodes() < 2) throw Error("grow_network: need at least two nodes");
  if (steps < 0) throw Error("grow_network: steps");

  detail::AttachState state;
  state.rebuild(g);
  if (state.members[0].empty() || state.members[1].empty())
    throw Error("grow_network: need both colors in the seed");

  std::vector<std::size_t> targets;
  for (long k = 0; k < steps; ++k) {
    Color c = rng.bernoulli(p.red_birth) ? Color::kRed : Color::kBlue;
    std::size_t existing = g.num_nodes();
    std::size_t want =
        std::min<std::size_t>(std::size_t(p.edges_per_node), existing);
    targets.clear();
    while (targets.size() < want) {
      std::size_t t = 0;
      bool fresh = false;
      for (int tries = 0; tries < 200 && !fresh; ++tries) {
        t = state.pick(p, c, rng);
        fresh = std::find(targets.begin(), targets.end(), t) == targets.end();
      }
      if (!fresh) {
        std::vector<double> w(existing);
        for (std::size_t u = 0; u < existing; ++u) {
          bool taken =
              std::find(targets.begin(), targets.end(), u) != targets.end();
          w[u] = taken ? 0.0
                       : (double(g.in_degree(u)) + p.offset) *
                             p.affinity(c, g.color(u));
        }
        t = rng.categorical(w);
      }
      targets.push_back(t);
    }

    std::size_t v = g.add_node();
    g.set_color(v, c);
    state.members[detail::AttachState::slot(c)].push_back(v);
    for (std::size_t t : targets) {
      g.add_edge(v, t);
      state.urn[detail::AttachState::slot(g.color(t))].push_back(t);
      if (rng.bernoulli(p.reciprocal)) {
        g.add_edge(t, v);
        state.urn[detail::AttachState::slot(c)].push_back(v);
      }
    }
  }
  return g;
}

// Grows from the canonical two-node seed, a mutual follow between one red
// and one blue node.
inline Graph grow_network(const GceParams& p, long steps, std::uint64_t seed) {
  Graph g(true, 2);
  g.set_color(0, Color::kRed);
  g.set_color(1, Color::kBlue);
  g.add_edge(0, 1);
  g.add_edge(1, 0);
  Rng rng(seed);
  return grow_network(std::move(g), p, steps, rng);
}

// followers / followees per node. 0/0 is marked with a quiet NaN and x/0
// with +infinity for x > 0.
inline std::vector<double> node_influences(const Graph& g) {
  if (!g.directed()) throw Error("node_influences: directed graph required");
  std::vector<double> out(g.num_nodes());
  for (std::size_t v = 0; v < g.num_nodes(); ++v) {
    double followers = double(g.in_degree(v));
    double followees = double(g.out_degree(v));
    if (followees == 0.0)
      out[v] = followers == 0.0 ? std::numeric_limits<double>::quiet_NaN()
                                : std::numeric_limits<double>::infinity();
    else
      out[v] = followers / followees;
  }
  return out;
}

// Tail influence disparity at threshold gamma_t:
//   Prob(influence of a uniform blue node > gamma_t) over the same for red.
// Nodes with undefined influence never exceed the threshold. Returns none
// when neither group has a node above the threshold, +infinity when only
// the red tail is empty.
inline std::optional<double> tail_gce(const Graph& g, double gamma_t) {
  if (!g.directed()) throw Error("tail_gce: directed graph required");
  std::vector<double> inf = node_influences(g);
  double size[2] = {0.0, 0.0};
  double exceed[2] = {0.0, 0.0};
  for (std::size_t v = 0; v < g.num_nodes(); ++v) {
    Color c = g.color(v);
    if (c == Color::kNone) throw Error("tail_gce: every node needs a color");
    int s = c == Color::kRed ? 0 : 1;
    size[s] += 1.0;
    if (!std::isnan(inf[v]) && inf[v] > gamma_t) exceed[s] += 1.0;
  }
  if (size[0] == 0.0 || size[1] == 0.0)
    throw Error("tail_gce: need both colors");
  double p_red = exceed[0] / size[0];
  double p_blue = exceed[1] / size[1];
  if (p_red == 0.0 && p_blue == 0.0) return std::nullopt;
  if (p_red == 0.0) return std::numeric_limits<double>::infinity();
  return p_blue / p_red;
}

// Group influence is total followers over total followees within the group;
// ratio is blue over red.
struct InfluenceReport {
  double blue_influence = 0.0;
  double red_influence = 0.0;
  double ratio = 0.0;
  double gamma_t = 0.0;
  std::optional<double> tail_ratio;
  std::vector<double> node_influence;
};

inline InfluenceReport average_gce(const Graph& g, double gamma_t = 1.0) {
  if (!g.directed()) throw Error("average_gce: directed graph required");
  double followers[2] = {0.0, 0.0};
  double followees[2] = {0.0, 0.0};
  double size[2] = {0.0, 0.0};
  for (std::size_t v = 0; v < g.num_nodes(); ++v) {
    Color c = g.color(v);
    if (c == Color::kNone)
      throw Error("average_gce: every node needs a color");
    int s = c == Color::kRed ? 0 : 1;
    size[s] += 1.0;
    followers[s] += double(g.in_degree(v));
    followees[s] += double(g.out_degree(v));
  }
  if (size[0] == 0.0 || size[1] == 0.0)
    throw Error("average_gce: need both colors");
  if (followees[0] == 0.0)
    throw ZeroDenominatorError("average_gce: red group has no followees");
  if (followees[1] == 0.0)
    throw ZeroDenominatorError("average_gce: blue group has no followees");

  InfluenceReport r;
  r.red_influence = followers[0] / followees[0];
  r.blue_influence = followers[1] / followees[1];
  r.ratio = r.blue_influence / r.red_influence;
  r.gamma_t = gamma_t;
  r.tail_ratio = tail_gce(g, gamma_t);
  r.node_influence = node_influences(g);
  return r;
}

// Power iteration with dangling mass spread uniformly; stops when the
// sup-norm change drops below tol.
inline std::vector<double> pagerank(const Graph& g, double damping = 0.85,
                                    double tol = 1e-12) {
  if (!(damping > 0.0) || !(damping < 1.0))
    throw Error("pagerank: damping must lie in (0, 1)");
  if (!(tol > 0.0)) throw Error("pagerank: tol");
  const std::size_t n = g.num_nodes();
  if (n == 0) throw DimensionMismatchError("pagerank: empty graph");

  std::vector<double> pr(n, 1.0 / double(n));
  std::vector<double> nxt(n);
  for (int iter = 0; iter < 10000; ++iter) {
    double dangling = 0.0;
    for (std::size_t v = 0; v < n; ++v)
      if (g.out_degree(v) == 0) dangling += pr[v];
    double base = (1.0 - damping) / double(n) +
                  damping * dangling / double(n);
    std::fill(nxt.begin(), nxt.end(), base);
    for (std::size_t u = 0; u < n; ++u) {
      if (g.out_degree(u) == 0) continue;
      double share = damping * pr[u] / double(g.out_degree(u));
      for (std::size_t v : g.out_neighbors(u)) nxt[v] += share;
    }
    double moved = 0.0;
    for (std::size_t v = 0; v < n; ++v)
      moved = std::max(moved, std::fabs(nxt[v] - pr[v]));
    pr.swap(nxt);
    if (moved < tol) return pr;
  }
  throw NoConvergenceError("pagerank: no fixed point after 10000 iterations");
}

}  // namespace socnet
