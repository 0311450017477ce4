#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <deque>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "socnet/prob.hpp"
#include "socnet/rng.hpp"

namespace socnet {

enum class Color { kNone, kRed, kBlue };

// Adjacency-list graph. For directed graphs an edge u->v means "u follows v",
// so in-degree counts followers and out-degree counts followees. Node removal
// swaps the last node into the vacated id.
class Graph {
 public:
  explicit Graph(bool directed = false, std::size_t n = 0)
      : directed_(directed),
        out_(n),
        in_(directed ? n : 0),
        color_(n, Color::kNone),
        label_(n, -1) {}

  bool directed() const { return directed_; }
  std::size_t num_nodes() const { return out_.size(); }
  std::size_t num_edges() const { return edges_; }

  std::size_t add_node() {
    out_.emplace_back();
    if (directed_) in_.emplace_back();
    color_.push_back(Color::kNone);
    label_.push_back(-1);
    return out_.size() - 1;
  }

  bool has_edge(std::size_t u, std::size_t v) const {
    check_node(u);
    check_node(v);
    const auto& a = out_[u];
    const auto& b = directed_ ? in_[v] : out_[v];
    const auto& shorter = a.size() <= b.size() ? a : b;
    std::size_t needle = a.size() <= b.size() ? v : u;
    return std::find(shorter.begin(), shorter.end(), needle) != shorter.end();
  }

  // Returns false when the edge already exists.
  bool add_edge(std::size_t u, std::size_t v) {
    check_node(u);
    check_node(v);
    if (u == v) throw Error("graph: self-loop");
    if (has_edge(u, v)) return false;
    out_[u].push_back(v);
    if (directed_)
      in_[v].push_back(u);
    else
      out_[v].push_back(u);
    edges_ += 1;
    return true;
  }

  void remove_node(std::size_t v) {
    check_node(v);
    detach(v);
    std::size_t last = out_.size() - 1;
    if (v != last) {
      // relabel `last` as `v` in every neighbor list
      for (std::size_t w : out_[last]) rename(directed_ ? in_[w] : out_[w], last, v);
      if (directed_)
        for (std::size_t w : in_[last]) rename(out_[w], last, v);
      out_[v] = std::move(out_[last]);
      if (directed_) in_[v] = std::move(in_[last]);
      color_[v] = color_[last];
      label_[v] = label_[last];
    }
    out_.pop_back();
    if (directed_) in_.pop_back();
    color_.pop_back();
    label_.pop_back();
  }

  const std::vector<std::size_t>& neighbors(std::size_t v) const {
    check_node(v);
    return out_[v];
  }
  const std::vector<std::size_t>& out_neighbors(std::size_t v) const {
    return neighbors(v);
  }
  const std::vector<std::size_t>& in_neighbors(std::size_t v) const {
    check_node(v);
    if (!directed_) return out_[v];
    return in_[v];
  }

  std::size_t degree(std::size_t v) const {
    check_node(v);
    return directed_ ? out_[v].size() + in_[v].size() : out_[v].size();
  }
  std::size_t out_degree(std::size_t v) const { return neighbors(v).size(); }
  std::size_t in_degree(std::size_t v) const { return in_neighbors(v).size(); }

  Color color(std::size_t v) const {
    check_node(v);
    return color_[v];
  }
  void set_color(std::size_t v, Color c) {
    check_node(v);
    color_[v] = c;
  }
  // -1 means unlabeled
  int label(std::size_t v) const {
    check_node(v);
    return label_[v];
  }
  void set_label(std::size_t v, int l) {
    check_node(v);
    if (l < -1 || l > 1) throw Error("graph: label must be 0, 1, or unset");
    label_[v] = l;
  }

  std::vector<std::size_t> degree_histogram() const {
    std::size_t dmax = 0;
    for (std::size_t v = 0; v < num_nodes(); ++v)
      dmax = std::max(dmax, degree(v));
    std::vector<std::size_t> h(dmax + 1, 0);
    for (std::size_t v = 0; v < num_nodes(); ++v) h[degree(v)] += 1;
    return h;
  }

  bool connected() const {
    if (num_nodes() == 0) return true;
    std::vector<char> seen(num_nodes(), 0);
    std::deque<std::size_t> queue{0};
    seen[0] = 1;
    std::size_t reached = 1;
    while (!queue.empty()) {
      std::size_t v = queue.front();
      queue.pop_front();
      for (std::size_t w : out_[v])
        if (!seen[w]) {
          seen[w] = 1;
          reached += 1;
          queue.push_back(w);
        }
      if (directed_)
        for (std::size_t w : in_[v])
          if (!seen[w]) {
            seen[w] = 1;
            reached += 1;
            queue.push_back(w);
          }
    }
    return reached == num_nodes();
  }

 private:
  void check_node(std::size_t v) const {
    if (v >= out_.size()) throw DimensionMismatchError("graph: bad node id");
  }
  static void rename(std::vector<std::size_t>& list, std::size_t from,
                     std::size_t to) {
    for (auto& x : list)
      if (x == from) x = to;
  }
  static void erase_one(std::vector<std::size_t>& list, std::size_t x) {
    auto it = std::find(list.begin(), list.end(), x);
    if (it != list.end()) {
      *it = list.back();
      list.pop_back();
    }
  }
  void detach(std::size_t v) {
    edges_ -= directed_ ? out_[v].size() + in_[v].size() : out_[v].size();
    for (std::size_t w : out_[v]) erase_one(directed_ ? in_[w] : out_[w], v);
    if (directed_)
      for (std::size_t w : in_[v]) erase_one(out_[w], v);
    out_[v].clear();
    if (directed_) in_[v].clear();
  }

  bool directed_;
  std::size_t edges_ = 0;
  std::vector<std::vector<std::size_t>> out_;
  std::vector<std::vector<std::size_t>> in_;
  std::vector<Color> color_;
  std::vector<int> label_;
};

// G(n, p) by geometric skipping over the ordered pair list.
inline Graph generate_er(std::size_t n, double p, std::uint64_t seed) {
  if (n < 1) throw DimensionMismatchError("generate_er: need a node");
  if (p < 0.0 || p > 1.0) throw Error("generate_er: p range");
  Graph g(false, n);
  if (p == 0.0) return g;
  if (p == 1.0) {
    for (std::size_t v = 1; v < n; ++v)
      for (std::size_t w = 0; w < v; ++w) g.add_edge(v, w);
    return g;
  }
  Rng rng(seed);
  const double denom = std::log1p(-p);
  std::size_t v = 1;
  double w = -1.0;
  while (v < n) {
    w += 1.0 + std::floor(std::log1p(-rng.uniform()) / denom);
    while (v < n && w >= double(v)) {
      w -= double(v);
      v += 1;
    }
    if (v < n) g.add_edge(v, std::size_t(w));
  }
  return g;
}

// Configuration model on an i.i.d. degree sequence with P(degree = d)
// proportional to weights[d - 1]. The last degree is redrawn until the stub
// count is even, then stubs are paired uniformly and self-loops or repeated
// pairs are dropped.
inline Graph generate_degree_law(std::size_t n,
                                 const std::vector<double>& weights,
                                 std::uint64_t seed) {
  if (n < 2) throw DimensionMismatchError("generate_degree_law: n too small");
  if (weights.empty()) throw DimensionMismatchError("generate_degree_law: no weights");

  Rng rng(seed);
  std::vector<std::size_t> deg(n);
  std::size_t total = 0;
  for (std::size_t i = 0; i < n; ++i) {
    deg[i] = rng.categorical(weights) + 1;
    total += deg[i];
  }
  for (int tries = 0; total % 2 != 0; ++tries) {
    if (tries >= 10000)
      throw Error("generate_degree_law: cannot reach an even stub count");
    total -= deg[n - 1];
    deg[n - 1] = rng.categorical(weights) + 1;
    total += deg[n - 1];
  }

  std::vector<std::size_t> stubs;
  stubs.reserve(total);
  for (std::size_t i = 0; i < n; ++i)
    stubs.insert(stubs.end(), deg[i], i);
  for (std::size_t i = stubs.size() - 1; i > 0; --i)
    std::swap(stubs[i], stubs[rng.uniform_int(i + 1)]);

  Graph g(false, n);
  for (std::size_t k = 0; k + 1 < stubs.size(); k += 2) {
    if (stubs[k] == stubs[k + 1]) continue;
    g.add_edge(stubs[k], stubs[k + 1]);
  }
  return g;
}

// Power-law special case, truncated at d_max (default ceil(sqrt(n))).
inline Graph generate_powerlaw(std::size_t n, double gamma, std::uint64_t seed,
                               std::size_t d_max = 0) {
  if (n < 10) throw DimensionMismatchError("generate_powerlaw: n too small");
  if (gamma <= 2.0) throw Error("generate_powerlaw: need gamma > 2");
  if (d_max == 0) d_max = std::size_t(std::ceil(std::sqrt(double(n))));
  std::vector<double> weights(d_max);
  for (std::size_t d = 1; d <= d_max; ++d)
    weights[d - 1] = std::pow(double(d), -gamma);
  return generate_degree_law(n, weights, seed);
}

// Regime-indexed grow/shrink parameters; the regime chain itself is
// A = I + rho * Q, supplied row-stochastic. With a single regime the chain
// is never consulted.
struct DupDelParams {
  std::vector<double> p_dup;
  std::vector<double> q_copy;
  StochasticMatrix regime_transition = StochasticMatrix::identity(2);

  std::size_t num_regimes() const { return p_dup.size(); }
};

inline void validate(const DupDelParams& params) {
  if (params.p_dup.empty() || params.p_dup.size() != params.q_copy.size())
    throw DimensionMismatchError("dup-del params: regime counts");
  for (std::size_t t = 0; t < params.p_dup.size(); ++t)
    if (params.p_dup[t] < 0.0 || params.p_dup[t] > 1.0 ||
        params.q_copy[t] < 0.0 || params.q_copy[t] > 1.0)
      throw Error("dup-del params: probability range");
  if (params.num_regimes() > 1 &&
      params.regime_transition.rows() != params.p_dup.size())
    throw DimensionMismatchError("dup-del params: chain size");
}

// Symmetric two-regime switching chain with hazard rho.
inline StochasticMatrix two_regime_chain(double rho) {
  if (rho < 0.0 || rho > 1.0) throw Error("two_regime_chain: rho range");
  return StochasticMatrix({{1.0 - rho, rho}, {rho, 1.0 - rho}});
}

// One growth/shrink event: duplicate a uniform node's neighborhood (link to
// the original always, to each of its neighbors independently), or delete a
// uniform node. The last node is never deleted.
inline void dup_del_step(Graph& g, const DupDelParams& params,
                         std::size_t theta, Rng& rng) {
  if (g.num_nodes() == 0)
    throw DimensionMismatchError("dup_del_step: empty graph");
  if (theta >= params.num_regimes())
    throw DimensionMismatchError("dup_del_step: bad regime");
  if (rng.bernoulli(params.p_dup[theta])) {
    std::size_t u = rng.uniform_int(g.num_nodes());
    std::vector<std::size_t> friends = g.neighbors(u);
    std::size_t v = g.add_node();
    g.add_edge(v, u);
    for (std::size_t w : friends)
      if (rng.bernoulli(params.q_copy[theta])) g.add_edge(v, w);
  } else if (g.num_nodes() > 1) {
    g.remove_node(rng.uniform_int(g.num_nodes()));
  }
}

// Uniform node (the X sampler).
inline std::size_t sample_uniform_node(const Graph& g, Rng& rng) {
  if (g.num_nodes() == 0)
    throw DimensionMismatchError("sample_uniform_node: empty graph");
  return rng.uniform_int(g.num_nodes());
}

// Uniform endpoint of a uniform edge, i.e. degree-weighted node (the Y
// sampler).
inline std::size_t sample_edge_endpoint(const Graph& g, Rng& rng) {
  if (g.num_edges() == 0)
    throw NoEdgesError("sample_edge_endpoint: no edges");
  std::uint64_t slots = 0;
  for (std::size_t v = 0; v < g.num_nodes(); ++v) slots += g.degree(v);
  std::uint64_t r = rng.uniform_int(slots);
  for (std::size_t v = 0; v < g.num_nodes(); ++v) {
    std::uint64_t d = g.degree(v);
    if (r < d) return v;
    r -= d;
  }
  return g.num_nodes() - 1;  // unreachable
}

// Uniform neighbor of a uniform node with at least one neighbor (the Z
// sampler); isolated draws are rejected and redrawn.
inline std::size_t sample_random_friend(const Graph& g, Rng& rng,
                                        long max_redraws = 100000) {
  if (g.num_edges() == 0)
    throw NoEdgesError("sample_random_friend: no edges");
  for (long i = 0; i < max_redraws; ++i) {
    std::size_t v = rng.uniform_int(g.num_nodes());
    if (g.degree(v) == 0) continue;
    return g.neighbors(v)[rng.uniform_int(g.degree(v))];
  }
  throw NoEdgesError("sample_random_friend: redraw cap hit");
}

// Degree-proportional sampling by simple random walk: burn in, then emit
// every stride-th visited node.
inline std::vector<std::size_t> random_walk_sample(const Graph& g,
                                                   long burn_in, long stride,
                                                   long count,
                                                   std::uint64_t seed) {
  if (g.directed()) throw Error("random_walk_sample: undirected only");
  if (g.num_edges() == 0) throw NoEdgesError("random_walk_sample: no edges");
  if (!g.connected())
    throw DisconnectedError("random_walk_sample: graph not connected");
  if (stride < 1 || count < 0 || burn_in < 0)
    throw Error("random_walk_sample: bad schedule");
  Rng rng(seed);
  std::size_t v = rng.uniform_int(g.num_nodes());
  std::vector<std::size_t> out;
  out.reserve(std::size_t(count));
  long step = 0;
  long next_emit = burn_in;
  while (long(out.size()) < count) {
    if (step == next_emit) {
      out.push_back(v);
      next_emit += stride;
    }
    v = g.neighbors(v)[rng.uniform_int(g.degree(v))];
    step += 1;
  }
  return out;
}

// Plain text edge list. Header lines: `# nodes N`, `# directed`,
// `# color u red|blue`, `# label u 0|1`; everything else is one `u v` pair
// per line.
inline void write_edge_list(const Graph& g, std::ostream& os) {
  os << "# nodes " << g.num_nodes() << "\n";
  if (g.directed()) os << "# directed\n";
  for (std::size_t v = 0; v < g.num_nodes(); ++v) {
    if (g.color(v) == Color::kRed) os << "# color " << v << " red\n";
    if (g.color(v) == Color::kBlue) os << "# color " << v << " blue\n";
    if (g.label(v) >= 0) os << "# label " << v << " " << g.label(v) << "\n";
  }
  for (std::size_t u = 0; u < g.num_nodes(); ++u)
    for (std::size_t v : g.out_neighbors(u))
      if (g.directed() || u < v) os << u << " " << v << "\n";
}

inline Graph read_edge_list(std::istream& is) {
  bool directed = false;
  std::size_t n = 0;
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  std::vector<std::pair<std::size_t, Color>> colors;
  std::vector<std::pair<std::size_t, int>> labels;
  std::string line;
  auto bump = [&](std::size_t v) { n = std::max(n, v + 1); };
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    if (line[0] == '#') {
      std::string hash, key;
      ls >> hash >> key;
      if (key == "directed") {
        directed = true;
      } else if (key == "nodes") {
        std::size_t k;
        if (!(ls >> k)) throw Error("edge list: bad nodes line");
        n = std::max(n, k);
      } else if (key == "color") {
        std::size_t v;
        std::string c;
        if (!(ls >> v >> c) || (c != "red" && c != "blue"))
          throw Error("edge list: bad color line");
        bump(v);
        colors.emplace_back(v, c == "red" ? Color::kRed : Color::kBlue);
      } else if (key == "label") {
        std::size_t v;
        int l;
        if (!(ls >> v >> l) || (l != 0 && l != 1))
          throw Error("edge list: bad label line");
        bump(v);
        labels.emplace_back(v, l);
      } else {
        throw Error("edge list: unknown header '" + key + "'");
      }
      continue;
    }
    std::size_t u, v;
    if (!(ls >> u >> v)) throw Error("edge list: bad edge line");
    bump(u);
    bump(v);
    edges.emplace_back(u, v);
  }
  Graph g(directed, n);
  for (auto& [v, c] : colors) g.set_color(v, c);
  for (auto& [v, l] : labels) g.set_label(v, l);
  for (auto& [u, v] : edges) g.add_edge(u, v);
  return g;
}

}  // namespace socnet
