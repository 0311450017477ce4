#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "socnet/gce.hpp"
#include "socnet/prob.hpp"

using namespace socnet;
using Catch::Matchers::WithinAbs;

namespace {

GceParams fig6_params() {
  GceParams p;
  p.red_birth = 0.2;
  p.edges_per_node = 2;
  p.affinity_br = 1.0;
  p.affinity_bb = 0.1;
  return p;
}

GceParams symmetric_params() {
  GceParams p;
  p.red_birth = 0.5;
  p.edges_per_node = 2;
  return p;
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

// Disjoint union of a colored digraph with its color-swapped mirror; the
// result is exactly swap-invariant.
Graph mirrored(const Graph& g) {
  std::size_t n = g.num_nodes();
  Graph m(true, 2 * n);
  for (std::size_t v = 0; v < n; ++v) {
    m.set_color(v, g.color(v));
    m.set_color(n + v,
                g.color(v) == Color::kRed ? Color::kBlue : Color::kRed);
  }
  for (std::size_t u = 0; u < n; ++u)
    for (std::size_t v : g.out_neighbors(u)) {
      m.add_edge(u, v);
      m.add_edge(n + u, n + v);
    }
  return m;
}

}  // namespace

TEST_CASE("growth parameter validation") {
  GceParams p;
  REQUIRE_NOTHROW(validate(p));
  p.red_birth = 0.0;
  REQUIRE_THROWS_AS(validate(p), Error);
  p.red_birth = 1.0;
  REQUIRE_THROWS_AS(validate(p), Error);
  p.red_birth = 0.2;
  p.edges_per_node = 0;
  REQUIRE_THROWS_AS(validate(p), Error);
  p.edges_per_node = 1;
  p.affinity_bb = 0.0;
  REQUIRE_THROWS_AS(validate(p), Error);
  p.affinity_bb = 1.5;
  REQUIRE_THROWS_AS(validate(p), Error);
  p.affinity_bb = 1.0;
  p.offset = 0.0;
  REQUIRE_THROWS_AS(validate(p), Error);
  p.offset = 1.0;
  p.reciprocal = 1.2;
  REQUIRE_THROWS_AS(validate(p), Error);
}

TEST_CASE("network growth") {
  SECTION("adds one colored node per step") {
    Graph g = grow_network(symmetric_params(), 50, 7);
    REQUIRE(g.num_nodes() == 52);
    REQUIRE(g.directed());
    for (std::size_t v = 0; v < g.num_nodes(); ++v)
      REQUIRE(g.color(v) != Color::kNone);
  }

  SECTION("zero steps returns the seed") {
    Graph g = grow_network(symmetric_params(), 0, 7);
    REQUIRE(g.num_nodes() == 2);
    REQUIRE(g.num_edges() == 2);
  }

  SECTION("follower and followee totals both count every edge") {
    Graph g = grow_network(fig6_params(), 400, 3);
    std::size_t in_total = 0, out_total = 0;
    for (std::size_t v = 0; v < g.num_nodes(); ++v) {
      in_total += g.in_degree(v);
      out_total += g.out_degree(v);
    }
    REQUIRE(in_total == g.num_edges());
    REQUIRE(out_total == g.num_edges());
  }

  SECTION("newborns follow distinct targets") {
    GceParams p = symmetric_params();
    p.edges_per_node = 5;
    Graph g = grow_network(p, 60, 11);
    for (std::size_t v = 2; v < g.num_nodes(); ++v) {
      auto outs = g.out_neighbors(v);
      std::vector<std::size_t> birth_follows;
      for (std::size_t t : outs)
        if (t < v) birth_follows.push_back(t);
      std::sort(birth_follows.begin(), birth_follows.end());
      REQUIRE(std::adjacent_find(birth_follows.begin(), birth_follows.end()) ==
              birth_follows.end());
      REQUIRE(birth_follows.size() >= std::min<std::size_t>(5, v));
    }
  }

  SECTION("full reciprocation makes every influence exactly one") {
    GceParams p = symmetric_params();
    p.reciprocal = 1.0;
    Graph g = grow_network(p, 500, 23);
    for (double v : node_influences(g)) REQUIRE(v == 1.0);
    REQUIRE(average_gce(g).ratio == 1.0);
  }

  SECTION("rejects unusable seeds") {
    GceParams p = symmetric_params();
    Rng rng(1);
    Graph undirected(false, 2);
    REQUIRE_THROWS_AS(grow_network(undirected, p, 5, rng), Error);
    Graph tiny(true, 1);
    tiny.set_color(0, Color::kRed);
    REQUIRE_THROWS_AS(grow_network(tiny, p, 5, rng), Error);
    Graph uncolored(true, 2);
    uncolored.set_color(0, Color::kRed);
    REQUIRE_THROWS_AS(grow_network(uncolored, p, 5, rng), Error);
    Graph onecolor(true, 2);
    onecolor.set_color(0, Color::kRed);
    onecolor.set_color(1, Color::kRed);
    REQUIRE_THROWS_AS(grow_network(onecolor, p, 5, rng), Error);
    REQUIRE_THROWS_AS(grow_network(p, -1, 1), Error);
  }
}

TEST_CASE("huge offset approximates uniform attachment") {
  GceParams p;
  p.red_birth = 0.5;
  p.edges_per_node = 1;
  p.offset = 1e9;
  p.reciprocal = 0.0;
  const long steps = 5000;
  std::vector<long> hist(12, 0), oracle(12, 0);
  long tot = 0, otot = 0;
  for (int s = 1; s <= 50; ++s) {
    Graph g = grow_network(p, steps, std::uint64_t(s));
    for (std::size_t v = 0; v < g.num_nodes(); ++v) {
      hist[std::min<std::size_t>(g.in_degree(v), 11)] += 1;
      tot += 1;
    }
    Rng rng(std::uint64_t(1000 + s));
    std::vector<long> followers(2, 1);
    for (long k = 0; k < steps; ++k) {
      followers[rng.uniform_int(followers.size())] += 1;
      followers.push_back(0);
    }
    for (long f : followers) {
      oracle[std::min<long>(f, 11)] += 1;
      otot += 1;
    }
  }
  double tv = 0.0;
  for (int b = 0; b < 12; ++b)
    tv += std::fabs(double(hist[b]) / double(tot) -
                    double(oracle[b]) / double(otot));
  REQUIRE(tv / 2.0 < 0.02);
}

TEST_CASE("group influence report") {
  SECTION("hand graph") {
    // r1 -> r0 -> b0, b1 -> b0, b0 -> r1
    Graph g(true, 4);
    g.set_color(0, Color::kRed);
    g.set_color(1, Color::kRed);
    g.set_color(2, Color::kBlue);
    g.set_color(3, Color::kBlue);
    g.add_edge(1, 0);
    g.add_edge(0, 2);
    g.add_edge(3, 2);
    g.add_edge(2, 1);
    auto rep = average_gce(g);
    REQUIRE_THAT(rep.red_influence, WithinAbs(1.0, 1e-15));
    REQUIRE_THAT(rep.blue_influence, WithinAbs(1.0, 1e-15));
    REQUIRE_THAT(rep.ratio, WithinAbs(1.0, 1e-15));
    REQUIRE(rep.node_influence.size() == 4);
    REQUIRE(rep.node_influence[0] == 1.0);
    REQUIRE(rep.node_influence[2] == 2.0);
    REQUIRE(rep.node_influence[3] == 0.0);
  }

  SECTION("swap invariant graph scores one") {
    Graph g = grow_network(fig6_params(), 200, 5);
    Graph m = mirrored(g);
    auto rep = average_gce(m, 1.0);
    REQUIRE_THAT(rep.ratio, WithinAbs(1.0, 1e-12));
    REQUIRE(rep.tail_ratio.has_value());
    REQUIRE_THAT(*rep.tail_ratio, WithinAbs(1.0, 1e-12));
  }

  SECTION("group with no followees is an error") {
    Graph g(true, 2);
    g.set_color(0, Color::kBlue);
    g.set_color(1, Color::kRed);
    g.add_edge(0, 1);
    REQUIRE_THROWS_AS(average_gce(g), ZeroDenominatorError);
  }

  SECTION("missing group or color is an error") {
    Graph g(true, 2);
    g.set_color(0, Color::kRed);
    g.set_color(1, Color::kRed);
    g.add_edge(0, 1);
    g.add_edge(1, 0);
    REQUIRE_THROWS_AS(average_gce(g), Error);
    Graph u(false, 2);
    REQUIRE_THROWS_AS(average_gce(u), Error);
    Graph h(true, 2);
    h.set_color(0, Color::kRed);
    h.add_edge(0, 1);
    h.add_edge(1, 0);
    REQUIRE_THROWS_AS(average_gce(h), Error);
  }
}

TEST_CASE("node influence conventions") {
  Graph g(true, 4);
  g.set_color(0, Color::kRed);
  g.set_color(1, Color::kBlue);
  g.set_color(2, Color::kRed);
  g.set_color(3, Color::kBlue);
  g.add_edge(0, 1);
  g.add_edge(2, 1);
  auto inf = node_influences(g);
  REQUIRE(inf[0] == 0.0);
  REQUIRE(std::isinf(inf[1]));
  REQUIRE(inf[1] > 0.0);
  REQUIRE(std::isnan(inf[3]));
}

TEST_CASE("tail influence ratio") {
  SECTION("threshold zero with positive influences everywhere") {
    Graph g(true, 4);
    for (std::size_t v = 0; v < 4; ++v)
      g.set_color(v, v % 2 == 0 ? Color::kRed : Color::kBlue);
    for (std::size_t v = 0; v < 4; ++v) g.add_edge(v, (v + 1) % 4);
    auto r = tail_gce(g, 0.0);
    REQUIRE(r.has_value());
    REQUIRE(*r == 1.0);
  }

  SECTION("empty tails on both sides reports none") {
    Graph g(true, 4);
    for (std::size_t v = 0; v < 4; ++v)
      g.set_color(v, v % 2 == 0 ? Color::kRed : Color::kBlue);
    for (std::size_t v = 0; v < 4; ++v) g.add_edge(v, (v + 1) % 4);
    REQUIRE_FALSE(tail_gce(g, 5.0).has_value());
  }

  SECTION("one sided tails") {
    // red hub followed by two blues, blues follow each other back
    Graph g(true, 3);
    g.set_color(0, Color::kRed);
    g.set_color(1, Color::kBlue);
    g.set_color(2, Color::kBlue);
    g.add_edge(1, 0);
    g.add_edge(2, 0);
    g.add_edge(0, 1);
    g.add_edge(1, 2);
    g.add_edge(2, 1);
    auto inf = node_influences(g);
    REQUIRE(inf[0] == 2.0);
    auto low = tail_gce(g, 1.5);
    REQUIRE(low.has_value());
    REQUIRE(*low == 0.0);
    // blue-only tail gives an infinite ratio
    Graph h(true, 3);
    h.set_color(0, Color::kBlue);
    h.set_color(1, Color::kRed);
    h.set_color(2, Color::kRed);
    h.add_edge(1, 0);
    h.add_edge(2, 0);
    h.add_edge(0, 1);
    h.add_edge(1, 2);
    h.add_edge(2, 1);
    auto hi = tail_gce(h, 1.5);
    REQUIRE(hi.has_value());
    REQUIRE(std::isinf(*hi));
  }
}

TEST_CASE("minority dominance regime") {
  SECTION("pinned short run") {
    Graph g = grow_network(fig6_params(), 300, 1);
    REQUIRE(g.num_nodes() == 302);
    REQUIRE(g.num_edges() == 726);
    auto rep = average_gce(g, 2.0);
    REQUIRE_THAT(rep.ratio, WithinAbs(0.206939759036, 1e-9));
    REQUIRE_THAT(rep.red_influence, WithinAbs(2.203539823009, 1e-9));
    REQUIRE_THAT(rep.blue_influence, WithinAbs(0.456, 1e-9));
    std::ostringstream os;
    write_edge_list(g, os);
    REQUIRE(fnv1a(os.str()) == 10195487048279635100ULL);
  }

  SECTION("long runs cap blue influence") {
    for (int s = 1; s <= 10; ++s) {
      Graph g = grow_network(fig6_params(), 20000, std::uint64_t(s));
      auto rep = average_gce(g, 2.0);
      REQUIRE(rep.ratio <= 0.5);
      REQUIRE(rep.tail_ratio.has_value());
      REQUIRE(*rep.tail_ratio <= 0.3);
    }
  }

  SECTION("symmetric parameters keep the ratio near one") {
    for (int s = 1; s <= 10; ++s) {
      Graph g = grow_network(symmetric_params(), 20000, std::uint64_t(s));
      double ratio = average_gce(g).ratio;
      REQUIRE(ratio >= 0.8);
      REQUIRE(ratio <= 1.25);
    }
  }

  SECTION("heterophily with strong reciprocation shows no ceiling") {
    GceParams p = fig6_params();
    p.reciprocal = 0.9;
    for (int s = 1; s <= 10; ++s) {
      Graph g = grow_network(p, 20000, std::uint64_t(s));
      double ratio = average_gce(g).ratio;
      REQUIRE(ratio >= 0.8);
      REQUIRE(ratio <= 1.25);
    }
  }
}

TEST_CASE("color exchangeability") {
  GceParams p;
  p.red_birth = 0.3;
  p.edges_per_node = 2;
  p.affinity_rr = 0.5;
  p.affinity_rb = 1.0;
  p.affinity_br = 0.9;
  p.affinity_bb = 0.3;
  GceParams q;
  q.red_birth = 1.0 - p.red_birth;
  q.edges_per_node = p.edges_per_node;
  q.affinity_rr = p.affinity_bb;
  q.affinity_rb = p.affinity_br;
  q.affinity_br = p.affinity_rb;
  q.affinity_bb = p.affinity_rr;
  std::vector<double> xs, ys;
  for (int s = 1; s <= 80; ++s) {
    xs.push_back(average_gce(grow_network(p, 3000, std::uint64_t(s))).ratio);
    ys.push_back(
        1.0 / average_gce(grow_network(q, 3000, std::uint64_t(200 + s))).ratio);
  }
  REQUIRE(ks_two_sample_pvalue(xs, ys) > 0.01);
}

TEST_CASE("pagerank") {
  SECTION("two node chain closed form") {
    Graph g(true, 2);
    g.add_edge(0, 1);
    auto pr = pagerank(g, 0.85, 1e-14);
    REQUIRE_THAT(pr[0], WithinAbs(20.0 / 57.0, 1e-10));
    REQUIRE_THAT(pr[1], WithinAbs(37.0 / 57.0, 1e-10));
  }

  SECTION("complete digraph is uniform") {
    Graph g(true, 5);
    for (std::size_t u = 0; u < 5; ++u)
      for (std::size_t v = 0; v < 5; ++v)
        if (u != v) g.add_edge(u, v);
    auto pr = pagerank(g);
    for (double v : pr) REQUIRE_THAT(v, WithinAbs(0.2, 1e-12));
  }

  SECTION("scores always sum to one") {
    Graph g = grow_network(fig6_params(), 500, 9);
    auto pr = pagerank(g);
    double total = 0.0;
    for (double v : pr) total += v;
    REQUIRE_THAT(total, WithinAbs(1.0, 1e-12));
    for (double v : pr) REQUIRE(v > 0.0);
  }

  SECTION("rejects bad arguments and refuses to spin forever") {
    Graph g(true, 2);
    g.add_edge(0, 1);
    REQUIRE_THROWS_AS(pagerank(g, 0.0, 1e-10), Error);
    REQUIRE_THROWS_AS(pagerank(g, 1.0, 1e-10), Error);
    REQUIRE_THROWS_AS(pagerank(g, 0.85, 0.0), Error);
    REQUIRE_THROWS_AS(pagerank(Graph(true, 0), 0.85, 1e-10),
                      DimensionMismatchError);
    // a long cycle with one chord mixes too slowly to meet this tolerance
    Graph slow(true, 200);
    for (std::size_t v = 0; v < 200; ++v) slow.add_edge(v, (v + 1) % 200);
    slow.add_edge(0, 100);
    REQUIRE_THROWS_AS(pagerank(slow, 0.99999, 1e-30), NoConvergenceError);
  }
}

TEST_CASE("grown networks survive the edge list format") {
  Graph g = grow_network(fig6_params(), 150, 13);
  std::ostringstream os;
  write_edge_list(g, os);
  std::istringstream is(os.str());
  Graph back = read_edge_list(is);
  REQUIRE(back.directed());
  REQUIRE(back.num_nodes() == g.num_nodes());
  REQUIRE(back.num_edges() == g.num_edges());
  auto a = average_gce(g, 2.0);
  auto b = average_gce(back, 2.0);
  REQUIRE(a.ratio == b.ratio);
  REQUIRE(a.red_influence == b.red_influence);
}
