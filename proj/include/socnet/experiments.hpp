#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "socnet/config.hpp"
#include "socnet/csv.hpp"
#include "socnet/degree_tracker.hpp"
#include "socnet/errors.hpp"
#include "socnet/gce.hpp"
#include "socnet/graph.hpp"
#include "socnet/parallel.hpp"
#include "socnet/polling.hpp"
#include "socnet/prob.hpp"
#include "socnet/quickest_detection.hpp"
#include "socnet/rng.hpp"
#include "socnet/sis.hpp"
#include "socnet/social_learning.hpp"

namespace socnet {

struct RunContext {
  const Config& cfg;
  std::uint64_t seed = 0;
  long jobs = 1;
  std::string out_dir = ".";
};

namespace detail {

inline std::string out_path(const RunContext& ctx, const std::string& name) {
  return (std::filesystem::path(ctx.out_dir) / name).string();
}

inline void save(const RunContext& ctx, const CsvWriter& w,
                 const std::string& name, std::vector<std::string>& files) {
  std::string path = out_path(ctx, name);
  w.save(path, ctx.seed, ctx.cfg.hash());
  files.push_back(path);
}

inline ObservationKernel obs_kernel_from(const Config& cfg,
                                         const std::string& section) {
  std::vector<double> r0 =
      cfg.get_double_list(section + ".obs_row0", "0.8,0.2");
  std::vector<double> r1 =
      cfg.get_double_list(section + ".obs_row1", "0.2,0.8");
  if (r0.size() != r1.size())
    throw ConfigError(section + ": observation rows differ in length");
  return ObservationKernel({r0, r1});
}

inline SocialLearningModel sl_model_from(const Config& cfg,
                                         const std::string& section) {
  std::vector<double> c0 =
      cfg.get_double_list(section + ".cost_row0", "0,1");
  std::vector<double> c1 =
      cfg.get_double_list(section + ".cost_row1", "1,0");
  if (c0.size() != c1.size())
    throw ConfigError(section + ": cost rows differ in length");
  return SocialLearningModel{StochasticMatrix::identity(2),
                             obs_kernel_from(cfg, section),
                             {c0, c1}};
}

inline std::vector<double> degree_law_from(const Config& cfg,
                                           const std::string& section) {
  std::string kind = cfg.get_string(section + ".degree", "poisson");
  std::size_t d_max = std::size_t(cfg.get_long(section + ".d_max", 9));
  double param = cfg.get_double(section + ".degree_param", 4.0);
  if (kind == "poisson") return poisson_degree_probs(d_max, param);
  if (kind == "powerlaw") return powerlaw_degree_probs(d_max, param);
  if (kind == "exponential") return exponential_degree_probs(d_max, param);
  throw ConfigError(section + ".degree: unknown law " + kind);
}

}  // namespace detail

// Threshold structure of the change detector: value and stop/continue
// policy over the belief grid, under the classical, action-only, or
// risk-averse public update.
inline std::vector<std::string> run_qd(const RunContext& ctx) {
  const Config& cfg = ctx.cfg;
  double hazard = cfg.get_double("qd.hazard", 0.05);
  double delay = cfg.get_double("qd.delay_cost", 1.0);
  double false_alarm = cfg.get_double("qd.false_alarm_cost", 10.0);
  double discount = cfg.get_double("qd.discount", 1.0);
  std::size_t grid = std::size_t(cfg.get_long("qd.grid_size", 501));
  double tol = cfg.get_double("qd.tol", 1e-8);
  std::string rule_name = cfg.get_string("qd.rule", "classical");

  ObservationKernel kernel = detail::obs_kernel_from(cfg, "qd");
  ChangeModel cm =
      make_change_model(hazard, kernel, delay, false_alarm, discount);

  BeliefUpdateRule rule = BeliefUpdateRule::classical();
  if (rule_name == "social" || rule_name == "cvar") {
    SocialLearningModel agents = detail::sl_model_from(cfg, "qd");
    agents.transition = cm.transition;
    rule = rule_name == "social"
               ? BeliefUpdateRule::social(agents)
               : BeliefUpdateRule::cvar_social(
                     agents, cfg.get_double("qd.alpha", 0.5));
  } else if (rule_name != "classical") {
    throw ConfigError("qd.rule: unknown rule " + rule_name);
  } else {
    cfg.get_double("qd.alpha", 0.5);
    cfg.get_double_list("qd.cost_row0", "0,1");
    cfg.get_double_list("qd.cost_row1", "1,0");
  }
  cfg.finish();

  GridSolution sol = solve_stopping(cm, rule, grid, tol);

  std::vector<std::string> files;
  CsvWriter w({"pi1", "value", "policy"});
  for (std::size_t i = 0; i < sol.grid.size(); ++i)
    w.add_row({csv::fmt(sol.grid[i]), csv::fmt(sol.value[i]),
               sol.policy[i] ? "stop" : "continue"});
  detail::save(ctx, w, "qd_policy.csv", files);
  return files;
}

// Herding region per risk level over a shared belief grid.
inline std::vector<std::string> run_herding(const RunContext& ctx) {
  const Config& cfg = ctx.cfg;
  std::vector<double> alphas = cfg.get_double_list(
      "herding.alphas", "0.000001,0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.85,1");
  std::size_t grid = std::size_t(cfg.get_long("herding.grid_size", 201));
  SocialLearningModel m = detail::sl_model_from(cfg, "herding");
  cfg.finish();
  validate(m);

  auto regions = parallel_map(alphas.size(), ctx.jobs, [&](std::size_t i) {
    return herding_region(m, alphas[i], grid);
  });

  std::vector<std::string> files;
  CsvWriter w({"alpha", "pi1", "herds"});
  for (std::size_t i = 0; i < alphas.size(); ++i)
    for (std::size_t j = 0; j < regions[i].grid.size(); ++j)
      w.add_row({csv::fmt(alphas[i]), csv::fmt(regions[i].grid[j]),
                 regions[i].herds[j] ? "1" : "0"});
  detail::save(ctx, w, "herding.csv", files);
  return files;
}

// Per-trial cascade onset epochs on the static-state model.
inline std::vector<std::string> run_cascade(const RunContext& ctx) {
  const Config& cfg = ctx.cfg;
  long trials = cfg.get_long("cascade.trials", 1000);
  long horizon = cfg.get_long("cascade.horizon", 500);
  if (trials < 1) throw ConfigError("cascade.trials: need at least one");
  SocialLearningModel m = detail::sl_model_from(cfg, "cascade");
  cfg.finish();
  validate(m);
  Belief prior = canonical_prior();

  auto onsets =
      parallel_map(std::size_t(trials), ctx.jobs, [&](std::size_t t) {
        return detect_cascade(m, prior, horizon,
                              Rng::derive(ctx.seed, t).next());
      });

  std::vector<std::string> files;
  CsvWriter w({"trial", "cascaded", "cascade_epoch"});
  for (std::size_t t = 0; t < onsets.size(); ++t)
    w.add_row({csv::fmt(long(t)), onsets[t] ? "1" : "0",
               csv::fmt(onsets[t] ? *onsets[t] : -1L)});
  detail::save(ctx, w, "cascade.csv", files);
  return files;
}

// Optimal posted-price policy plus the simulated drift check on the price
// sequence it induces.
inline std::vector<std::string> run_pricing(const RunContext& ctx) {
  const Config& cfg = ctx.cfg;
  PricingModel pm;
  pm.prices = cfg.get_double_list("pricing.prices", "0.3,1.0");
  pm.reveal_prob = cfg.get_double_list("pricing.reveal", "0.0,0.5");
  pm.accuracy_weight = cfg.get_double("pricing.accuracy_weight", 2.0);
  pm.discount = cfg.get_double("pricing.discount", 0.9);
  std::size_t grid = std::size_t(cfg.get_long("pricing.grid_size", 1001));
  long trials = cfg.get_long("pricing.trials", 10000);
  long horizon = cfg.get_long("pricing.horizon", 30);
  long min_cell = cfg.get_long("pricing.min_cell_count", 5);
  double prior1 = cfg.get_double("pricing.prior", 0.5);
  SocialLearningModel m = detail::sl_model_from(cfg, "pricing");
  cfg.finish();
  validate(pm);
  validate(m);
  if (prior1 < 0.0 || prior1 > 1.0)
    throw ConfigError("pricing.prior: range");
  Belief prior{prior1, 1.0 - prior1};

  PricingSolution sol = solve_pricing(pm, m, grid);
  SupermartingaleReport rep = verify_supermartingale(
      pm, m, sol, prior, trials, horizon, ctx.seed, min_cell);

  std::vector<std::string> files;
  CsvWriter policy({"pi1", "value", "price"});
  for (std::size_t i = 0; i < sol.grid.size(); ++i)
    policy.add_row({csv::fmt(sol.grid[i]), csv::fmt(sol.value[i]),
                    csv::fmt(sol.price_at(i, pm))});
  detail::save(ctx, policy, "pricing_policy.csv", files);

  CsvWriter path({"epoch", "mean_price"});
  for (std::size_t k = 0; k < rep.mean_price_path.size(); ++k)
    path.add_row({csv::fmt(long(k)), csv::fmt(rep.mean_price_path[k])});
  detail::save(ctx, path, "pricing_path.csv", files);

  CsvWriter summary(
      {"violation_fraction", "cells_checked", "trials", "horizon"});
  summary.add_row({csv::fmt(rep.violation_fraction),
                   csv::fmt(rep.cells_checked), csv::fmt(trials),
                   csv::fmt(horizon)});
  detail::save(ctx, summary, "pricing_summary.csv", files);
  return files;
}

// Mean-field epidemic tracking: truth trajectory, filtered estimate, and the
// per-degree posterior bound, plus the finite-network deviation table.
inline std::vector<std::string> run_sis(const RunContext& ctx) {
  const Config& cfg = ctx.cfg;
  SisParams p;
  p.beta = cfg.get_double("sis.beta", 0.3);
  p.delta = cfg.get_double("sis.delta", 0.2);
  p.degree_probs = detail::degree_law_from(cfg, "sis");
  long n_nodes = cfg.get_long("sis.n_nodes", 500);
  long epochs = cfg.get_long("sis.epochs", 40);
  long spe = cfg.get_long("sis.steps_per_epoch", 50);
  double init = cfg.get_double("sis.init", 0.3);
  ObsModel obs;
  obs.m = cfg.get_long("sis.obs_m", 400);
  obs.floor_var = cfg.get_double("sis.floor_var", 1e-6);
  FilterOptions opt;
  std::string filter = cfg.get_string("sis.filter", "ekf");
  if (filter == "ekf")
    opt.kind = FilterKind::kEkf;
  else if (filter == "pf")
    opt.kind = FilterKind::kParticle;
  else
    throw ConfigError("sis.filter: unknown filter " + filter);
  opt.particles = cfg.get_long("sis.particles", 2000);
  opt.steps_per_epoch = spe;
  opt.process_noise_scale = cfg.get_double("sis.process_noise_scale", 1.0);
  opt.prior_sigma = cfg.get_double("sis.prior_sigma", 0.2);
  opt.seed = Rng::derive(ctx.seed, 2).next();
  long draws = cfg.get_long("sis.pcrlb_draws", 200);
  std::vector<long> azuma_n = cfg.get_long_list("sis.azuma_n", "100,320,1000");
  long azuma_trials = cfg.get_long("sis.azuma_trials", 40);
  long azuma_sweeps = cfg.get_long("sis.azuma_sweeps", 20);
  double azuma_init = cfg.get_double("sis.azuma_init", 0.4);
  cfg.finish();
  validate(p);
  if (epochs < 1) throw ConfigError("sis.epochs: need at least one");
  if (init < 0.0 || init > 1.0) throw ConfigError("sis.init: range");

  const std::size_t dim = p.max_degree();
  std::vector<InfectedProfile> truth;
  truth.push_back(InfectedProfile(dim, init));
  for (long k = 0; k < epochs; ++k) {
    InfectedProfile rho = truth.back();
    for (long s = 0; s < spe; ++s) rho = mean_field_step(rho, p, n_nodes);
    truth.push_back(rho);
  }

  auto observations =
      synth_observations(truth, p, obs, Rng::derive(ctx.seed, 1).next());
  auto estimate = track_profile(p, n_nodes, truth[0], observations, obs, opt);
  PcrlbResult bound =
      pcrlb_recursion(p, n_nodes, truth[0], opt.prior_sigma, obs, epochs,
                      draws, Rng::derive(ctx.seed, 3).next(),
                      opt.process_noise_scale, spe);

  std::vector<std::string> files;
  CsvWriter trace({"epoch", "degree", "rho_true", "rho_est", "pcrlb"});
  for (long k = 1; k <= epochs; ++k)
    for (std::size_t d = 0; d < dim; ++d) {
      double mass = p.degree_probs[d];
      trace.add_row({csv::fmt(k), csv::fmt(long(d + 1)),
                     csv::fmt(truth[std::size_t(k)][d]),
                     csv::fmt(estimate[std::size_t(k - 1)][d]),
                     csv::fmt(bound.bound_diag[std::size_t(k)][d] /
                              (mass * mass))});
    }
  detail::save(ctx, trace, "sis_trace.csv", files);

  if (azuma_trials > 0) {
    DeviationTable table =
        azuma_check(p, azuma_n, azuma_trials, azuma_sweeps, azuma_init,
                    Rng::derive(ctx.seed, 4).next());
    CsvWriter w({"n_nodes", "q90", "slope"});
    double slope =
        table.slope.value_or(std::numeric_limits<double>::quiet_NaN());
    for (const auto& row : table.rows)
      w.add_row(
          {csv::fmt(row.n_nodes), csv::fmt(row.q90), csv::fmt(slope)});
    detail::save(ctx, w, "sis_azuma.csv", files);
  }
  return files;
}

// Tracker error trace at one step size and the steady-state error scaling
// across step sizes. Trials are fanned over the pool but seeded by index,
// so the tables are identical at any pool size.
inline std::vector<std::string> run_degdist(const RunContext& ctx) {
  const Config& cfg = ctx.cfg;
  DupDelParams params;
  params.p_dup = cfg.get_double_list("degdist.p_dup", "0.55");
  params.q_copy = cfg.get_double_list("degdist.q_copy", "0.35");
  if (params.num_regimes() == 2)
    params.regime_transition =
        two_regime_chain(cfg.get_double("degdist.regime_rho", 0.001));
  else
    cfg.get_double("degdist.regime_rho", 0.001);
  std::vector<double> epsilons =
      cfg.get_double_list("degdist.epsilons", "0.002,0.005,0.01,0.02,0.05");
  long trials = cfg.get_long("degdist.trials", 8);
  TrackingOptions opts;
  opts.d_trunc = std::size_t(cfg.get_long("degdist.d_trunc", 120));
  opts.graph_burn_in = cfg.get_long("degdist.graph_burn_in", 2000);
  opts.epoch_len = cfg.get_long("degdist.epoch_len", 100);
  long presim = cfg.get_long("degdist.presim_steps", 30000);
  long presim_burn = cfg.get_long("degdist.presim_burn_in", 10000);
  long snap = cfg.get_long("degdist.snap_every", 50);
  double trace_eps = cfg.get_double("degdist.trace_epsilon", 0.01);
  cfg.finish();
  validate(params);
  if (trials < 1) throw ConfigError("degdist.trials: need at least one");

  auto refs = precompute_regime_references(params, presim, presim_burn, snap,
                                           opts.d_trunc,
                                           Rng::derive(ctx.seed, 1).next());

  const std::size_t ne = epsilons.size();
  auto cell = parallel_map(
      ne * std::size_t(trials), ctx.jobs, [&](std::size_t idx) {
        double eps = epsilons[idx / std::size_t(trials)];
        long t = long(idx % std::size_t(trials));
        if (!(eps > 0.0) || eps > 1.0)
          throw ConfigError("degdist.epsilons: range");
        long horizon = long(std::ceil(20.0 / eps));
        TrackingRun run =
            run_tracking(params, refs, eps, horizon,
                         splitmix64(ctx.seed ^ (0x9e37 + std::uint64_t(t))),
                         opts);
        std::size_t n = run.error_trace.size();
        std::size_t tail = std::max<std::size_t>(1, n / 4);
        double acc = 0.0;
        for (std::size_t k = n - tail; k < n; ++k) acc += run.error_trace[k];
        return acc / double(tail);
      });

  std::vector<std::pair<double, double>> rows;
  for (std::size_t e = 0; e < ne; ++e) {
    double total = 0.0;
    for (long t = 0; t < trials; ++t)
      total += cell[e * std::size_t(trials) + std::size_t(t)];
    rows.emplace_back(epsilons[e], total / double(trials));
  }
  double slope = std::numeric_limits<double>::quiet_NaN();
  if (rows.size() >= 2) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (auto& [e, m] : rows) {
      double x = std::log(e), y = std::log(m);
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
    }
    double n = double(rows.size());
    slope = (sxy - sx * sy / n) / (sxx - sx * sx / n);
  }

  std::vector<std::string> files;
  CsvWriter scaling({"epsilon", "mse", "slope"});
  for (auto& [e, m] : rows)
    scaling.add_row({csv::fmt(e), csv::fmt(m), csv::fmt(slope)});
  detail::save(ctx, scaling, "degdist_scaling.csv", files);

  TrackingRun run = run_tracking(params, refs, trace_eps,
                                 long(std::ceil(20.0 / trace_eps)),
                                 Rng::derive(ctx.seed, 99).next(), opts);
  CsvWriter trace({"epoch", "error"});
  for (std::size_t k = 0; k < run.error_trace.size(); ++k)
    trace.add_row({csv::fmt(long(k)), csv::fmt(run.error_trace[k])});
  detail::save(ctx, trace, "degdist_trace.csv", files);
  return files;
}

// Two-color preferential growth: influence-ratio trace along the growth,
// the final per-node influence table, and the grown edge list.
inline std::vector<std::string> run_gce(const RunContext& ctx) {
  const Config& cfg = ctx.cfg;
  GceParams p;
  p.red_birth = cfg.get_double("gce.red_birth", 0.2);
  p.edges_per_node = cfg.get_long("gce.edges_per_node", 2);
  p.affinity_rr = cfg.get_double("gce.affinity_rr", 1.0);
  p.affinity_rb = cfg.get_double("gce.affinity_rb", 1.0);
  p.affinity_br = cfg.get_double("gce.affinity_br", 1.0);
  p.affinity_bb = cfg.get_double("gce.affinity_bb", 0.1);
  p.offset = cfg.get_double("gce.offset", 1.0);
  p.reciprocal = cfg.get_double("gce.reciprocal", 0.2);
  long steps = cfg.get_long("gce.steps", 20000);
  long every = cfg.get_long("gce.trace_every", 500);
  double gamma_t = cfg.get_double("gce.gamma_t", 1.0);
  cfg.finish();
  validate(p);
  if (steps < 1) throw ConfigError("gce.steps: need at least one");
  if (every < 1) throw ConfigError("gce.trace_every: need at least one");

  Graph g(true, 2);
  g.set_color(0, Color::kRed);
  g.set_color(1, Color::kBlue);
  g.add_edge(0, 1);
  g.add_edge(1, 0);
  Rng rng(ctx.seed);

  std::vector<std::string> files;
  CsvWriter trace({"step", "nodes", "edges", "influence_ratio"});
  for (long done = 0; done < steps;) {
    long chunk = std::min(every, steps - done);
    g = grow_network(std::move(g), p, chunk, rng);
    done += chunk;
    trace.add_row({csv::fmt(done), csv::fmt(long(g.num_nodes())),
                   csv::fmt(long(g.num_edges())),
                   csv::fmt(average_gce(g, gamma_t).ratio)});
  }
  detail::save(ctx, trace, "gce_trace.csv", files);

  InfluenceReport report = average_gce(g, gamma_t);
  CsvWriter table({"node", "color", "in_degree", "out_degree", "influence"});
  for (std::size_t v = 0; v < g.num_nodes(); ++v)
    table.add_row({csv::fmt(long(v)),
                   g.color(v) == Color::kRed ? "red" : "blue",
                   csv::fmt(long(g.in_degree(v))),
                   csv::fmt(long(g.out_degree(v))),
                   csv::fmt(report.node_influence[v])});
  detail::save(ctx, table, "gce_influence.csv", files);

  std::string net_path = detail::out_path(ctx, "gce_network.txt");
  std::ofstream net(net_path, std::ios::binary);
  if (!net) throw Error("gce: cannot write " + net_path);
  write_edge_list(g, net);
  files.push_back(net_path);
  return files;
}

// Bias/variance/MSE of each polling method across questionnaire sizes on a
// labeled random graph.
inline std::vector<std::string> run_poll(const RunContext& ctx) {
  const Config& cfg = ctx.cfg;
  std::size_t n = std::size_t(cfg.get_long("poll.n", 2000));
  std::string kind = cfg.get_string("poll.graph", "er");
  double mean_degree = cfg.get_double("poll.mean_degree", 8.0);
  double gamma = cfg.get_double("poll.gamma", 2.7);
  long ones = cfg.get_long("poll.ones", -1);
  std::string labels = cfg.get_string("poll.labels", "shuffled");
  std::vector<long> k_list = cfg.get_long_list("poll.k_list",
                                               "10,20,50,100,200");
  long trials = cfg.get_long("poll.trials", 2000);
  cfg.finish();
  if (n < 2) throw ConfigError("poll.n: too small");
  if (ones < 0) ones = long(n) / 2;

  Graph g;
  if (kind == "er")
    g = generate_er(n, mean_degree / double(n - 1),
                    Rng::derive(ctx.seed, 1).next());
  else if (kind == "powerlaw")
    g = generate_powerlaw(n, gamma, Rng::derive(ctx.seed, 1).next());
  else
    throw ConfigError("poll.graph: unknown kind " + kind);

  if (labels == "shuffled")
    assign_labels_shuffled(g, ones, Rng::derive(ctx.seed, 2).next());
  else if (labels == "by_degree")
    assign_labels_by_degree(g, ones);
  else
    throw ConfigError("poll.labels: unknown scheme " + labels);

  auto tables =
      parallel_map(k_list.size(), ctx.jobs, [&](std::size_t ki) {
        return mse_compare(g, k_list[ki], trials,
                           Rng::derive(ctx.seed, 100 + ki).next());
      });

  std::vector<std::string> files;
  CsvWriter w({"method", "k", "bias", "variance", "mse", "r", "rho"});
  for (std::size_t ki = 0; ki < tables.size(); ++ki)
    for (const auto& row : tables[ki].rows)
      w.add_row({poll_method_name(row.method), csv::fmt(row.sample_size),
                 csv::fmt(row.bias), csv::fmt(row.variance),
                 csv::fmt(row.mse), csv::fmt(tables[ki].assortativity),
                 csv::fmt(tables[ki].degree_label_corr)});
  detail::save(ctx, w, "poll.csv", files);
  return files;
}

inline std::vector<std::string> run_experiment(const std::string& name,
                                               const RunContext& ctx) {
  if (name == "qd") return run_qd(ctx);
  if (name == "herding") return run_herding(ctx);
  if (name == "cascade") return run_cascade(ctx);
  if (name == "pricing") return run_pricing(ctx);
  if (name == "sis") return run_sis(ctx);
  if (name == "degdist") return run_degdist(ctx);
  if (name == "gce") return run_gce(ctx);
  if (name == "poll") return run_poll(ctx);
  throw ConfigError("unknown subcommand: " + name);
}

}  // namespace socnet
