#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "socnet/errors.hpp"
#include "socnet/graph.hpp"
#include "socnet/prob.hpp"
#include "socnet/rng.hpp"

namespace socnet {

enum class PollMethod {
  kIntent,
  kExpectation,
  kNepEdgeEndpoint,
  kNepRandomFriend,
  kNepRandomWalk,
};

inline const char* poll_method_name(PollMethod m) {
  switch (m) {
    case PollMethod::kIntent:
      return "intent";
    case PollMethod::kExpectation:
      return "expectation";
    case PollMethod::kNepEdgeEndpoint:
      return "nep_y";
    case PollMethod::kNepRandomFriend:
      return "nep_z";
    case PollMethod::kNepRandomWalk:
      return "nep_walk";
  }
  return "unknown";
}

struct PollEstimate {
  double estimate = 0.0;
  long sample_size = 0;
  PollMethod method = PollMethod::kIntent;
};

namespace detail {

inline void require_labels(const Graph& g, const char* who) {
  if (g.num_nodes() == 0)
    throw DimensionMismatchError(std::string(who) + ": empty graph");
  for (std::size_t v = 0; v < g.num_nodes(); ++v)
    if (g.label(v) < 0)
      throw Error(std::string(who) + ": node " + std::to_string(v) +
                  " has no label");
}

inline void require_poll_args(const Graph& g, long k, const char* who) {
  require_labels(g, who);
  if (k < 1) throw Error(std::string(who) + ": sample size");
}

}  // namespace detail

// Labels exactly `ones` uniformly chosen nodes with 1 and the rest with 0.
inline void assign_labels_shuffled(Graph& g, long ones, std::uint64_t seed) {
  if (ones < 0 || std::size_t(ones) > g.num_nodes())
    throw DimensionMismatchError("assign_labels_shuffled: ones out of range");
  std::vector<std::size_t> ids(g.num_nodes());
  for (std::size_t v = 0; v < ids.size(); ++v) ids[v] = v;
  Rng rng(seed);
  for (std::size_t i = ids.size(); i > 1; --i)
    std::swap(ids[i - 1], ids[rng.uniform_int(i)]);
  for (std::size_t i = 0; i < ids.size(); ++i)
    g.set_label(ids[i], i < std::size_t(ones) ? 1 : 0);
}

// Labels the `ones` highest-degree nodes with 1 (ties by node id) and the
// rest with 0.
inline void assign_labels_by_degree(Graph& g, long ones) {
  if (ones < 0 || std::size_t(ones) > g.num_nodes())
    throw DimensionMismatchError("assign_labels_by_degree: ones out of range");
  std::vector<std::size_t> ids(g.num_nodes());
  for (std::size_t v = 0; v < ids.size(); ++v) ids[v] = v;
  std::sort(ids.begin(), ids.end(), [&g](std::size_t a, std::size_t b) {
    if (g.degree(a) != g.degree(b)) return g.degree(a) > g.degree(b);
    return a < b;
  });
  for (std::size_t i = 0; i < ids.size(); ++i)
    g.set_label(ids[i], i < std::size_t(ones) ? 1 : 0);
}

// Fraction of nodes labeled 1.
inline double true_fraction(const Graph& g) {
  detail::require_labels(g, "true_fraction");
  double ones = 0.0;
  for (std::size_t v = 0; v < g.num_nodes(); ++v) ones += double(g.label(v));
  return ones / double(g.num_nodes());
}

// Mean label over k uniform draws with replacement.
inline PollEstimate intent_poll(const Graph& g, long k, std::uint64_t seed) {
  detail::require_poll_args(g, k, "intent_poll");
  Rng rng(seed);
  double total = 0.0;
  for (long i = 0; i < k; ++i)
    total += double(g.label(rng.uniform_int(g.num_nodes())));
  return {total / double(k), k, PollMethod::kIntent};
}

// Each uniform draw answers with the majority label of its closed
// neighborhood, falling back to its own label on an exact tie. The tie test
// is integer arithmetic, so it is exact.
inline PollEstimate expectation_poll(const Graph& g, long k,
                                     std::uint64_t seed) {
  detail::require_poll_args(g, k, "expectation_poll");
  if (g.directed()) throw Error("expectation_poll: undirected only");
  Rng rng(seed);
  double total = 0.0;
  for (long i = 0; i < k; ++i) {
    std::size_t v = rng.uniform_int(g.num_nodes());
    long ones = g.label(v);
    for (std::size_t u : g.neighbors(v)) ones += g.label(u);
    long size = 1 + long(g.degree(v));
    int resp;
    if (2 * ones > size)
      resp = 1;
    else if (2 * ones < size)
      resp = 0;
    else
      resp = g.label(v);
    total += double(resp);
  }
  return {total / double(k), k, PollMethod::kExpectation};
}

enum class NepSampler { kEdgeEndpoint, kRandomFriend, kRandomWalk };

// Each sampled node reports the mean label of its neighbors. Samplers:
// uniform endpoint of a uniform edge, uniform neighbor of a uniform node, or
// plain random-walk visits (burn-in of one node-count worth of steps).
inline PollEstimate nep_poll(const Graph& g, long k, NepSampler sampler,
                             std::uint64_t seed) {
  detail::require_poll_args(g, k, "nep_poll");
  if (g.directed()) throw Error("nep_poll: undirected only");
  if (g.num_edges() == 0) throw NoEdgesError("nep_poll: no edges");

  auto respond = [&g](std::size_t v) {
    const auto& nb = g.neighbors(v);
    double ones = 0.0;
    for (std::size_t u : nb) ones += double(g.label(u));
    return ones / double(nb.size());
  };

  double total = 0.0;
  PollMethod tag;
  if (sampler == NepSampler::kRandomWalk) {
    auto visits = random_walk_sample(g, long(g.num_nodes()), 1, k, seed);
    for (std::size_t v : visits) total += respond(v);
    tag = PollMethod::kNepRandomWalk;
  } else {
    Rng rng(seed);
    for (long i = 0; i < k; ++i) {
      std::size_t v = sampler == NepSampler::kEdgeEndpoint
                          ? sample_edge_endpoint(g, rng)
                          : sample_random_friend(g, rng);
      total += respond(v);
    }
    tag = sampler == NepSampler::kEdgeEndpoint ? PollMethod::kNepEdgeEndpoint
                                               : PollMethod::kNepRandomFriend;
  }
  return {total / double(k), k, tag};
}

inline PollEstimate nep_poll(const Graph& g, long k, std::uint64_t seed) {
  return nep_poll(g, k, NepSampler::kEdgeEndpoint, seed);
}

// Exact degree laws of a uniform node X, a uniform endpoint of a uniform
// edge Y, and a uniform neighbor of a uniform non-isolated node Z, plus the
// dominance verdicts between them.
struct ParadoxReport {
  DiscreteRV x_law;
  DiscreteRV y_law;
  DiscreteRV z_law;
  bool y_dominates_x = false;
  bool z_dominates_x = false;
  double mean_x = 0.0;
  double mean_y = 0.0;
  double mean_z = 0.0;
};

inline ParadoxReport friendship_paradox_check(const Graph& g) {
  if (g.directed())
    throw Error("friendship_paradox_check: undirected only");
  if (g.num_edges() == 0)
    throw NoEdgesError("friendship_paradox_check: no edges");

  const std::size_t n = g.num_nodes();
  std::size_t dmax = 0;
  std::size_t non_isolated = 0;
  for (std::size_t v = 0; v < n; ++v) {
    dmax = std::max(dmax, g.degree(v));
    if (g.degree(v) > 0) non_isolated += 1;
  }

  std::vector<double> px(dmax + 1, 0.0), py(dmax + 1, 0.0),
      pz(dmax + 1, 0.0);
  const double stubs = 2.0 * double(g.num_edges());
  for (std::size_t v = 0; v < n; ++v) {
    std::size_t d = g.degree(v);
    px[d] += 1.0 / double(n);
    py[d] += double(d) / stubs;
    if (d > 0) {
      double w = 1.0 / (double(non_isolated) * double(d));
      for (std::size_t u : g.neighbors(v)) pz[g.degree(u)] += w;
    }
  }

  std::vector<double> values(dmax + 1);
  for (std::size_t d = 0; d <= dmax; ++d) values[d] = double(d);
  ParadoxReport r{DiscreteRV(values, Belief(px)),
                  DiscreteRV(values, Belief(py)),
                  DiscreteRV(std::move(values), Belief(pz))};
  r.y_dominates_x = fosd_dominates(r.y_law, r.x_law, 1e-9);
  r.z_dominates_x = fosd_dominates(r.z_law, r.x_law, 1e-9);
  r.mean_x = r.x_law.mean();
  r.mean_y = r.y_law.mean();
  r.mean_z = r.z_law.mean();
  return r;
}

struct MseRow {
  PollMethod method = PollMethod::kIntent;
  long sample_size = 0;
  double bias = 0.0;
  double variance = 0.0;
  double mse = 0.0;
};

// Degree correlation across edge endpoints; zero on degree-regular graphs.
inline double assortativity(const Graph& g) {
  if (g.num_edges() == 0) throw NoEdgesError("assortativity: no edges");
  double sjk = 0.0, s1 = 0.0, s2 = 0.0;
  for (std::size_t u = 0; u < g.num_nodes(); ++u)
    for (std::size_t v : g.neighbors(u)) {
      double ju = double(g.degree(u)), jv = double(g.degree(v));
      sjk += ju * jv;
      s1 += ju;
      s2 += ju * ju;
    }
  const double m2 = 2.0 * double(g.num_edges());
  double mean = s1 / m2;
  double var = s2 / m2 - mean * mean;
  if (var <= 0.0) return 0.0;
  return (sjk / m2 - mean * mean) / var;
}

// Pearson correlation between degree and label over nodes; zero when either
// is constant.
inline double degree_label_correlation(const Graph& g) {
  detail::require_labels(g, "degree_label_correlation");
  const double n = double(g.num_nodes());
  double sd = 0.0, sf = 0.0, sdd = 0.0, sff = 0.0, sdf = 0.0;
  for (std::size_t v = 0; v < g.num_nodes(); ++v) {
    double d = double(g.degree(v)), f = double(g.label(v));
    sd += d;
    sf += f;
    sdd += d * d;
    sff += f * f;
    sdf += d * f;
  }
  double vd = sdd / n - (sd / n) * (sd / n);
  double vf = sff / n - (sf / n) * (sf / n);
  if (vd <= 0.0 || vf <= 0.0) return 0.0;
  return (sdf / n - (sd / n) * (sf / n)) / std::sqrt(vd * vf);
}

struct MseTable {
  std::vector<MseRow> rows;
  double truth = 0.0;
  double assortativity = 0.0;
  double degree_label_corr = 0.0;
};

// Monte Carlo error decomposition per method against the exact fraction.
// Uses the intent, expectation, edge-endpoint, and random-friend polls; each
// trial runs on its own derived stream.
inline MseTable mse_compare(const Graph& g, long k, long trials,
                            std::uint64_t seed) {
  detail::require_poll_args(g, k, "mse_compare");
  if (g.directed()) throw Error("mse_compare: undirected only");
  if (trials < 1) throw Error("mse_compare: trials");
  if (g.num_edges() == 0) throw NoEdgesError("mse_compare: no edges");

  MseTable table;
  table.truth = true_fraction(g);
  table.assortativity = assortativity(g);
  table.degree_label_corr = degree_label_correlation(g);

  const PollMethod methods[] = {
      PollMethod::kIntent, PollMethod::kExpectation,
      PollMethod::kNepEdgeEndpoint, PollMethod::kNepRandomFriend};
  for (std::size_t mi = 0; mi < 4; ++mi) {
    double sum = 0.0, sumsq = 0.0;
    for (long t = 0; t < trials; ++t) {
      std::uint64_t s =
          Rng::derive(seed, std::uint64_t(mi) * std::uint64_t(trials) +
                                std::uint64_t(t))
              .next();
      PollEstimate e;
      switch (methods[mi]) {
        case PollMethod::kIntent:
          e = intent_poll(g, k, s);
          break;
        case PollMethod::kExpectation:
          e = expectation_poll(g, k, s);
          break;
        case PollMethod::kNepEdgeEndpoint:
          e = nep_poll(g, k, NepSampler::kEdgeEndpoint, s);
          break;
        default:
          e = nep_poll(g, k, NepSampler::kRandomFriend, s);
          break;
      }
      sum += e.estimate;
      sumsq += e.estimate * e.estimate;
    }
    double mean = sum / double(trials);
    MseRow row;
    row.method = methods[mi];
    row.sample_size = k;
    row.bias = mean - table.truth;
    row.variance = std::max(0.0, sumsq / double(trials) - mean * mean);
    row.mse = row.variance + row.bias * row.bias;
    table.rows.push_back(row);
  }
  return table;
}

}  // namespace socnet
