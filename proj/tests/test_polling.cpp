#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstddef>
#include <vector>

#include "socnet/errors.hpp"
#include "socnet/graph.hpp"
#include "socnet/polling.hpp"
#include "socnet/rng.hpp"

using namespace socnet;

namespace {

// Sparse graph with an even label split and near-zero degree-label
// correlation; the workhorse fixture for the estimator comparisons.
Graph flat_fixture() {
  Graph g = generate_er(2000, 8.0 / 1999.0, 42);
  assign_labels_shuffled(g, 1000, 43);
  return g;
}

Graph star6(int hub_label, int leaf_label) {
  Graph g(false, 6);
  for (std::size_t v = 1; v < 6; ++v) g.add_edge(0, v);
  g.set_label(0, hub_label);
  for (std::size_t v = 1; v < 6; ++v) g.set_label(v, leaf_label);
  return g;
}

Graph cycle(std::size_t n, int label) {
  Graph g(false, n);
  for (std::size_t v = 0; v < n; ++v) {
    g.add_edge(v, (v + 1) % n);
    g.set_label(v, label);
  }
  return g;
}

}  // namespace

TEST_CASE("label assignment is exact and validated") {
  Graph g(false, 10);
  assign_labels_shuffled(g, 4, 1);
  long ones = 0;
  for (std::size_t v = 0; v < 10; ++v) {
    REQUIRE((g.label(v) == 0 || g.label(v) == 1));
    ones += g.label(v);
  }
  REQUIRE(ones == 4);
  REQUIRE(true_fraction(g) == 0.4);

  Graph h(false, 3);
  h.add_edge(0, 1);
  h.add_edge(1, 2);
  assign_labels_by_degree(h, 1);
  REQUIRE(h.label(1) == 1);
  REQUIRE(h.label(0) == 0);
  REQUIRE(h.label(2) == 0);
  REQUIRE(degree_label_correlation(h) == Catch::Approx(1.0).margin(1e-12));

  REQUIRE_THROWS_AS(assign_labels_shuffled(g, 11, 1), DimensionMismatchError);
  REQUIRE_THROWS_AS(assign_labels_by_degree(g, -1), DimensionMismatchError);
  Graph unlabeled(false, 2);
  REQUIRE_THROWS_AS(true_fraction(unlabeled), Error);
  Graph empty;
  REQUIRE_THROWS_AS(true_fraction(empty), DimensionMismatchError);
}

TEST_CASE("intent polls are unbiased with binomial spread") {
  Graph g = flat_fixture();
  REQUIRE(g.num_edges() == 8057);
  REQUIRE(true_fraction(g) == 0.5);

  REQUIRE(intent_poll(g, 50, 9).estimate == 0.46);

  PollEstimate big = intent_poll(g, 100000, 17);
  REQUIRE(std::abs(big.estimate - 0.5) < 0.01);
  REQUIRE(big.sample_size == 100000);
  REQUIRE(big.method == PollMethod::kIntent);

  // an all-ones electorate polls at exactly one whatever the draw
  Graph ones = cycle(20, 1);
  REQUIRE(intent_poll(ones, 7, 123).estimate == 1.0);

  REQUIRE_THROWS_AS(intent_poll(g, 0, 1), Error);
}

TEST_CASE("expectation polls report the closed neighborhood majority") {
  // hub outvoted by its leaves, leaves tied and so answering for themselves
  Graph up = star6(0, 1);
  REQUIRE(expectation_poll(up, 40, 2).estimate == 1.0);
  Graph down = star6(1, 0);
  REQUIRE(expectation_poll(down, 40, 2).estimate == 0.0);

  // every node of a two-clique ties, so the poll degenerates to intent
  Graph k2(false, 2);
  k2.add_edge(0, 1);
  k2.set_label(0, 1);
  k2.set_label(1, 0);
  REQUIRE(expectation_poll(k2, 101, 5).estimate ==
          intent_poll(k2, 101, 5).estimate);

  // isolated voters answer for themselves too
  Graph lone(false, 5);
  assign_labels_shuffled(lone, 2, 6);
  REQUIRE(expectation_poll(lone, 33, 8).estimate ==
          intent_poll(lone, 33, 8).estimate);

  Graph dir(true, 2);
  dir.add_edge(0, 1);
  dir.set_label(0, 1);
  dir.set_label(1, 0);
  REQUIRE_THROWS_AS(expectation_poll(dir, 5, 1), Error);
}

TEST_CASE("neighborhood polls hit exact targets on regular graphs") {
  Graph g = flat_fixture();
  REQUIRE(nep_poll(g, 50, 9).estimate ==
          Catch::Approx(0.4926660431072194).margin(1e-12));
  REQUIRE(nep_poll(g, 200, NepSampler::kRandomWalk, 9).estimate ==
          Catch::Approx(0.49648758880008903).margin(1e-12));

  // all-ones labels make every response exactly one for every sampler
  Graph ones = cycle(30, 1);
  for (auto s : {NepSampler::kEdgeEndpoint, NepSampler::kRandomFriend,
                 NepSampler::kRandomWalk})
    REQUIRE(nep_poll(ones, 25, s, 4).estimate == 1.0);

  // complete graph: every response is 9/29 or 10/29, pinning the estimate
  // inside a band of width 2/87 around the true third
  Graph k30(false, 30);
  for (std::size_t u = 0; u < 30; ++u)
    for (std::size_t v = u + 1; v < 30; ++v) k30.add_edge(u, v);
  assign_labels_shuffled(k30, 10, 11);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    double est = nep_poll(k30, 40, NepSampler::kRandomFriend, seed).estimate;
    REQUIRE(std::abs(est - 1.0 / 3.0) <= 2.0 / 87.0 + 1e-12);
  }

  // edge-endpoint responses average to the degree-weighted label mean
  double weighted = 0.0, stubs = 0.0;
  for (std::size_t v = 0; v < g.num_nodes(); ++v) {
    weighted += double(g.degree(v)) * double(g.label(v));
    stubs += double(g.degree(v));
  }
  double closed_form = weighted / stubs;
  PollEstimate mc = nep_poll(g, 100000, 21);
  REQUIRE(std::abs(mc.estimate - closed_form) < 0.01);
  REQUIRE(mc.estimate >= 0.0);
  REQUIRE(mc.estimate <= 1.0);

  Graph edgeless(false, 4);
  assign_labels_shuffled(edgeless, 2, 1);
  REQUIRE_THROWS_AS(nep_poll(edgeless, 5, 1), NoEdgesError);
  Graph dir(true, 2);
  dir.add_edge(0, 1);
  dir.set_label(0, 1);
  dir.set_label(1, 0);
  REQUIRE_THROWS_AS(nep_poll(dir, 5, 1), Error);
  REQUIRE_THROWS_AS(nep_poll(g, 0, 1), Error);
}

TEST_CASE("sampled friends have stochastically larger degrees") {
  // star: X puts 5/6 on degree one, Y splits evenly, Z puts 5/6 on the hub
  Graph star = star6(0, 1);
  ParadoxReport r = friendship_paradox_check(star);
  REQUIRE(r.x_law.probs[1] == Catch::Approx(5.0 / 6.0).margin(1e-12));
  REQUIRE(r.x_law.probs[5] == Catch::Approx(1.0 / 6.0).margin(1e-12));
  REQUIRE(r.y_law.probs[1] == Catch::Approx(0.5).margin(1e-12));
  REQUIRE(r.y_law.probs[5] == Catch::Approx(0.5).margin(1e-12));
  REQUIRE(r.z_law.probs[1] == Catch::Approx(1.0 / 6.0).margin(1e-12));
  REQUIRE(r.z_law.probs[5] == Catch::Approx(5.0 / 6.0).margin(1e-12));
  REQUIRE(r.mean_x == Catch::Approx(10.0 / 6.0).margin(1e-12));
  REQUIRE(r.mean_y == Catch::Approx(3.0).margin(1e-12));
  REQUIRE(r.mean_z == Catch::Approx(26.0 / 6.0).margin(1e-12));
  REQUIRE(r.y_dominates_x);
  REQUIRE(r.z_dominates_x);

  // regular graphs collapse all three laws onto one atom
  Graph ring = cycle(12, 0);
  ParadoxReport flat = friendship_paradox_check(ring);
  REQUIRE(flat.mean_x == 2.0);
  REQUIRE(flat.mean_y == 2.0);
  REQUIRE(flat.mean_z == 2.0);
  REQUIRE(flat.y_dominates_x);
  REQUIRE(flat.z_dominates_x);

  Graph edgeless(false, 3);
  REQUIRE_THROWS_AS(friendship_paradox_check(edgeless), NoEdgesError);
  Graph dir(true, 2);
  dir.add_edge(0, 1);
  REQUIRE_THROWS_AS(friendship_paradox_check(dir), Error);
}

TEST_CASE("the paradox holds across a large random graph sweep") {
  Rng rng(2026);
  long tested = 0;
  for (int i = 0; i < 1000; ++i) {
    std::size_t n = 10 + rng.uniform_int(191);
    Graph g;
    switch (i % 3) {
      case 0:
        g = generate_er(n, (1.0 + 4.0 * rng.uniform()) / double(n),
                        rng.next());
        break;
      case 1: {
        std::vector<double> w(2 + rng.uniform_int(7));
        for (auto& x : w) x = 0.05 + rng.uniform();
        g = generate_degree_law(n, w, rng.next());
        break;
      }
      default:
        g = generate_powerlaw(n, 2.2 + rng.uniform(), rng.next(), 10);
        break;
    }
    if (g.num_edges() == 0) continue;
    ParadoxReport r = friendship_paradox_check(g);
    REQUIRE(r.y_dominates_x);
    REQUIRE(r.z_dominates_x);
    REQUIRE(r.mean_y >= r.mean_x - 1e-9);
    REQUIRE(r.mean_z >= r.mean_x - 1e-9);
    tested += 1;
  }
  REQUIRE(tested >= 900);
}

TEST_CASE("degree statistics have the textbook fixed points") {
  Graph star = star6(0, 1);
  REQUIRE(assortativity(star) == Catch::Approx(-1.0).margin(1e-12));
  Graph ring = cycle(8, 1);
  REQUIRE(assortativity(ring) == 0.0);
  REQUIRE(degree_label_correlation(ring) == 0.0);
  Graph edgeless(false, 3);
  REQUIRE_THROWS_AS(assortativity(edgeless), NoEdgesError);
}

TEST_CASE("neighborhood polling cuts the error of intent polling") {
  Graph g = flat_fixture();
  MseTable t = mse_compare(g, 50, 2000, 7);
  REQUIRE(t.rows.size() == 4);
  REQUIRE(t.truth == 0.5);
  REQUIRE(t.assortativity == Catch::Approx(assortativity(g)).margin(0.0));
  REQUIRE(std::abs(t.degree_label_corr) < 0.05);

  REQUIRE(t.rows[0].method == PollMethod::kIntent);
  REQUIRE(t.rows[1].method == PollMethod::kExpectation);
  REQUIRE(t.rows[2].method == PollMethod::kNepEdgeEndpoint);
  REQUIRE(t.rows[3].method == PollMethod::kNepRandomFriend);
  for (const auto& row : t.rows) {
    REQUIRE(row.sample_size == 50);
    REQUIRE(row.mse == row.variance + row.bias * row.bias);
  }

  REQUIRE(t.rows[0].bias == Catch::Approx(0.00126).margin(1e-9));
  REQUIRE(t.rows[0].variance == Catch::Approx(0.0048700124).margin(1e-9));
  REQUIRE(t.rows[2].mse == Catch::Approx(0.000670936885247).margin(1e-9));
  REQUIRE(t.rows[3].mse == Catch::Approx(0.000669434270764).margin(1e-9));

  // binomial oracle for the intent row
  double oracle = t.truth * (1.0 - t.truth) / 50.0;
  REQUIRE(t.rows[0].variance == Catch::Approx(oracle).epsilon(0.10));
  double se = std::sqrt(oracle / 2000.0);
  REQUIRE(std::abs(t.rows[0].bias) < 3.0 * se);

  REQUIRE(t.rows[2].mse < 0.5 * t.rows[0].mse);
  REQUIRE(t.rows[3].mse < 0.5 * t.rows[0].mse);

  // unanimity collapses every method to zero error
  Graph ones = cycle(20, 1);
  MseTable flat = mse_compare(ones, 10, 50, 3);
  for (const auto& row : flat.rows) {
    REQUIRE(row.bias == 0.0);
    REQUIRE(row.mse == 0.0);
  }

  REQUIRE_THROWS_AS(mse_compare(g, 50, 0, 1), Error);
  Graph edgeless(false, 4);
  assign_labels_shuffled(edgeless, 2, 1);
  REQUIRE_THROWS_AS(mse_compare(edgeless, 5, 5, 1), NoEdgesError);
}

TEST_CASE("degree-correlated labels bias neighborhood polls") {
  Graph g = generate_er(2000, 8.0 / 1999.0, 42);
  assign_labels_by_degree(g, 1000);
  MseTable t = mse_compare(g, 50, 2000, 7);
  REQUIRE(t.degree_label_corr > 0.7);
  REQUIRE(std::abs(t.rows[0].bias) < 0.02);
  REQUIRE(t.rows[2].bias > 0.05);
  REQUIRE(t.rows[3].bias > 0.05);
}
