// Self-contained acceptance harness: one pass/fail line per property the
// library promises, with wall-clock budgets enforced. Exits nonzero if any
// line fails.

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "socnet/degree_tracker.hpp"
#include "socnet/errors.hpp"
#include "socnet/gce.hpp"
#include "socnet/graph.hpp"
#include "socnet/polling.hpp"
#include "socnet/prob.hpp"
#include "socnet/quickest_detection.hpp"
#include "socnet/rng.hpp"
#include "socnet/sis.hpp"
#include "socnet/social_learning.hpp"

using namespace socnet;

namespace {

int g_failures = 0;

template <typename F>
void check(int idx, const char* name, double budget_s, F body) {
  auto t0 = std::chrono::steady_clock::now();
  bool ok = false;
  std::string note;
  try {
    ok = body();
  } catch (const std::exception& e) {
    note = std::string(" [threw: ") + e.what() + "]";
  }
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                              t0)
                    .count();
  bool in_budget = secs < budget_s;
  bool pass = ok && in_budget;
  if (!pass) g_failures += 1;
  std::printf("[%s] %2d %-52s %6.1fs / %.0fs%s%s\n", pass ? "PASS" : "FAIL",
              idx, name, secs, budget_s,
              ok && !in_budget ? " [over budget]" : "", note.c_str());
  std::fflush(stdout);
}

ChangeModel random_change_model(Rng& rng) {
  double b00 = 0.55 + 0.4 * rng.uniform();
  double b10 = 0.05 + 0.4 * rng.uniform();
  ObservationKernel obs({{b00, 1.0 - b00}, {b10, 1.0 - b10}});
  double discount = rng.uniform() < 0.3 ? 1.0 : 0.9 + 0.1 * rng.uniform();
  return make_change_model(0.01 + 0.29 * rng.uniform(), obs,
                           0.2 + 4.8 * rng.uniform(),
                           0.5 + 9.5 * rng.uniform(), discount);
}

InfectedProfile equilibrium_of(const SisParams& p, long n_nodes) {
  InfectedProfile x(p.max_degree(), 0.3);
  for (int k = 0; k < 400000; ++k) {
    InfectedProfile nxt = mean_field_step(x, p, n_nodes);
    double moved = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i)
      moved = std::max(moved, std::fabs(nxt[i] - x[i]));
    x = nxt;
    if (moved < 1e-14) break;
  }
  return x;
}

double loglog_slope(const std::vector<double>& ys, std::size_t lo,
                    std::size_t hi) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (std::size_t k = lo; k <= hi && k < ys.size(); ++k) {
    double lx = std::log(double(k));
    double ly = std::log(ys[k]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    n += 1;
  }
  return (double(n) * sxy - sx * sy) / (double(n) * sxx - sx * sx);
}

bool cascades_are_certain() {
  SocialLearningModel m = canonical_model();
  Belief prior = canonical_prior();
  long hits = 0;
  for (std::uint64_t t = 0; t < 1000; ++t)
    if (detect_cascade(m, prior, 500, Rng::derive(1, t).next())) hits += 1;
  std::printf("         cascaded %ld / 1000\n", hits);
  return hits >= 990;
}

bool classical_sets_are_single_upper_intervals() {
  Rng rng(2718);
  for (int rep = 0; rep < 50; ++rep) {
    ChangeModel cm = random_change_model(rng);
    GridSolution coarse =
        solve_stopping(cm, BeliefUpdateRule::classical(), 501);
    GridSolution fine =
        solve_stopping(cm, BeliefUpdateRule::classical(), 1001);
    auto ic = stopping_set(coarse);
    auto iff = stopping_set(fine);
    if (ic.size() != 1 || iff.size() != 1) return false;
    if (ic[0].second != 500 || iff[0].second != 1000) return false;
    double tc = double(ic[0].first) / 500.0;
    double tf = double(iff[0].first) / 1000.0;
    if (std::abs(tc - tf) > 1.0 / 500.0 + 1e-12) return false;
  }
  return true;
}

bool action_feedback_can_split_the_stopping_set() {
  SocialLearningModel base = canonical_model();
  RegimeSweep sweep;
  sweep.delay_costs = {0.5};
  sweep.false_alarm_costs = {3.0};
  sweep.hazards = {0.05};
  sweep.agent_costs = {{{0.0, 1.0}, {1.0, 0.0}}, {{0.0, 1.0}, {2.0, 0.0}}};
  auto hit = find_disconnected_regime(base, sweep);
  if (!hit || hit->intervals.size() < 2) return false;

  ChangeModel cm = make_change_model(hit->hazard, base.observation,
                                     hit->delay_cost, hit->false_alarm_cost);
  SocialLearningModel agents{cm.transition, cm.observation,
                             sweep.agent_costs[hit->cost_index],
                             base.tie_break};
  GridSolution fine =
      solve_stopping(cm, BeliefUpdateRule::social(agents), 1001, 1e-7);
  auto ivf = stopping_set(fine);
  if (ivf.size() != hit->intervals.size()) return false;
  for (std::size_t k = 0; k < ivf.size(); ++k) {
    if (std::abs(2.0 * double(hit->intervals[k].first) -
                 double(ivf[k].first)) > 2.0)
      return false;
    if (std::abs(2.0 * double(hit->intervals[k].second) -
                 double(ivf[k].second)) > 2.0)
      return false;
  }
  std::printf("         %zu stopping intervals, stable at double grid\n",
              ivf.size());
  return true;
}

bool risk_aversion_grows_the_herding_region() {
  SocialLearningModel m = canonical_model();
  std::vector<double> alphas = {1e-6, 0.112, 0.223, 0.334, 0.445,
                                0.556, 0.667, 0.778, 0.889, 1.0};
  std::vector<HerdingRegion> regions;
  for (double a : alphas) regions.push_back(herding_region(m, a, 1001));
  for (std::size_t i = 0; i < alphas.size(); ++i)
    for (std::size_t j = i + 1; j < alphas.size(); ++j)
      if (!regions[j].subset_of(regions[i])) return false;
  return regions[0].full();
}

bool full_tail_level_reduces_to_the_mean() {
  SocialLearningModel m = canonical_model();
  for (int i = 0; i <= 100; ++i) {
    Belief eta{double(i) / 100.0, 1.0 - double(i) / 100.0};
    if (cvar_action(m, eta, 1.0) != sl_action(m, eta)) return false;
  }
  Rng rng(99);
  for (int rep = 0; rep < 5; ++rep) {
    ChangeModel cm = random_change_model(rng);
    for (bool social : {false, true}) {
      BeliefUpdateRule rule =
          social ? BeliefUpdateRule::social(SocialLearningModel{
                       cm.transition, cm.observation, {{0.0, 1.0}, {1.0, 0.0}}})
                 : BeliefUpdateRule::classical();
      GridSolution a = solve_stopping(cm, rule, 301);
      GridSolution b = solve_cvar_stopping(cm, rule, 1.0, 301);
      for (std::size_t i = 0; i < a.value.size(); ++i) {
        if (std::abs(a.value[i] - b.value[i]) > 1e-8) return false;
        if (a.policy[i] != b.policy[i]) return false;
      }
    }
  }
  return true;
}

bool posted_prices_drift_down() {
  PricingModel pm{{0.3, 1.0}, {0.0, 0.5}, 2.0, 0.9};
  SocialLearningModel m = canonical_model();
  PricingSolution sol = solve_pricing(pm, m);
  SupermartingaleReport rep =
      verify_supermartingale(pm, m, sol, canonical_prior(), 10000, 30, 777);
  std::printf("         violation fraction %.4f over %ld cells\n",
              rep.violation_fraction, rep.cells_checked);
  return rep.violation_fraction <= 0.01 && rep.cells_checked > 50;
}

bool finite_network_deviations_shrink() {
  SisParams p;
  p.beta = 0.3;
  p.delta = 0.2;
  p.degree_probs = poisson_degree_probs(9, 4.0);
  DeviationTable t = azuma_check(p, {100, 1000, 10000}, 30, 30, 0.2, 99);
  if (t.rows.size() != 3 || !t.slope.has_value()) return false;
  std::printf("         q90 %.4f -> %.4f -> %.4f, slope %.3f\n",
              t.rows[0].q90, t.rows[1].q90, t.rows[2].q90, *t.slope);
  if (!(t.rows[1].q90 < t.rows[0].q90 && t.rows[2].q90 < t.rows[1].q90))
    return false;
  return *t.slope <= -0.3;
}

bool posterior_bound_is_shape_insensitive() {
  SisParams pl;
  pl.beta = 0.3;
  pl.delta = 0.2;
  pl.degree_probs = powerlaw_degree_probs(8, 2.7);
  SisParams ex = pl;
  ex.degree_probs = exponential_degree_probs(8, 2.7);
  ObsModel obs;
  obs.m = 400;
  auto a = pcrlb_recursion(pl, 500, equilibrium_of(pl, 500), 0.1, obs, 60,
                           200, 4242, 1.0, 50);
  auto b = pcrlb_recursion(ex, 500, equilibrium_of(ex, 500), 0.1, obs, 60,
                           200, 4242, 1.0, 50);
  double worst = 0.0;
  for (std::size_t k = 1; k < a.bound_trace.size(); ++k)
    worst = std::max(worst, std::fabs(a.bound_trace[k] - b.bound_trace[k]) /
                                std::max(a.bound_trace[k], b.bound_trace[k]));
  double sa = loglog_slope(a.bound_trace, 1, 10);
  double sb = loglog_slope(b.bound_trace, 1, 10);
  double slope_gap =
      std::fabs(sa - sb) / std::max(std::fabs(sa), std::fabs(sb));
  std::printf("         worst pointwise gap %.3f, slopes %.3f vs %.3f\n",
              worst, sa, sb);
  return worst <= 0.25 && slope_gap <= 0.25 && !a.regularized &&
         !b.regularized;
}

bool tracker_error_scales_linearly() {
  DupDelParams params;
  params.p_dup = {0.6};
  params.q_copy = {0.2};
  auto refs =
      precompute_regime_references(params, 1000000, 200000, 97, 200, 7);
  ScalingTable t = step_size_scaling(params, refs,
                                     {0.002, 0.005, 0.01, 0.02, 0.05}, 20, 99);
  if (!t.slope.has_value()) return false;
  std::printf("         mse slope %.4f\n", *t.slope);
  return *t.slope >= 0.7 && *t.slope <= 1.3;
}

bool homophily_caps_minority_influence() {
  GceParams skew;
  skew.red_birth = 0.2;
  skew.edges_per_node = 2;
  skew.affinity_bb = 0.1;
  long below = 0;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    Graph g = grow_network(skew, 20000, seed);
    if (average_gce(g).ratio <= 0.5) below += 1;
  }
  GceParams sym;
  sym.red_birth = 0.5;
  sym.edges_per_node = 2;
  double lo = 1e18, hi = -1e18;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    Graph g = grow_network(sym, 20000, seed);
    double r = average_gce(g).ratio;
    lo = std::min(lo, r);
    hi = std::max(hi, r);
  }
  std::printf("         skew ratio <= 0.5 in %ld / 100, control in "
              "[%.3f, %.3f]\n",
              below, lo, hi);
  return below >= 95 && lo >= 0.8 && hi <= 1.25;
}

bool sampled_friends_dominate_uniform_nodes() {
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
    if (!r.y_dominates_x || !r.z_dominates_x) return false;
    tested += 1;
  }
  std::printf("         %ld graphs, zero dominance failures\n", tested);
  return tested >= 900;
}

bool neighborhood_polls_beat_intent_polls() {
  Graph g = generate_er(2000, 8.0 / 1999.0, 42);
  assign_labels_shuffled(g, 1000, 43);
  MseTable t = mse_compare(g, 50, 10000, 7);
  double intent_mse = t.rows[0].mse;
  double nep_mse = t.rows[2].mse;
  std::printf("         mse %.2e (nep) vs %.2e (intent), |rho| = %.3f\n",
              nep_mse, intent_mse, std::fabs(t.degree_label_corr));
  return std::fabs(t.degree_label_corr) < 0.1 && nep_mse <= intent_mse;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

bool numerics_are_clean() {
  SisParams p;
  p.beta = 0.3;
  p.delta = 0.2;
  p.degree_probs = powerlaw_degree_probs(8, 2.7);
  std::mt19937_64 gen(314);
  std::uniform_real_distribution<double> u(0.05, 0.95);
  double worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    InfectedProfile rho(8);
    for (auto& v : rho) v = u(gen);
    Eigen::MatrixXd jac = mean_field_jacobian(rho, p, 500);
    double scale = jac.cwiseAbs().maxCoeff();
    const double h = 1e-6;
    double worst_abs = 0.0;
    for (int e = 0; e < 8; ++e) {
      InfectedProfile up = rho, dn = rho;
      up[e] += h;
      dn[e] -= h;
      InfectedProfile fu = mean_field_step(up, p, 500);
      InfectedProfile fd = mean_field_step(dn, p, 500);
      for (int d = 0; d < 8; ++d)
        worst_abs = std::max(
            worst_abs, std::fabs((fu[d] - fd[d]) / (2.0 * h) - jac(d, e)));
    }
    worst = std::max(worst, worst_abs / scale);
  }
  if (worst >= 1e-6) return false;

  SocialLearningModel m = canonical_model();
  Rng rng(55);
  Belief pi = canonical_prior();
  for (int step = 0; step < 200; ++step) {
    std::size_t y = rng.uniform_int(2);
    Belief post = hmm_filter_step(m, pi, y);
    double s = 0.0;
    for (std::size_t i = 0; i < post.size(); ++i) s += post[i];
    if (std::fabs(s - 1.0) > 1e-12) return false;
    pi = sl_public_update(m, pi, sl_action(m, post)).posterior;
    s = 0.0;
    for (std::size_t i = 0; i < pi.size(); ++i) s += pi[i];
    if (std::fabs(s - 1.0) > 1e-12) return false;
  }
  Graph g = generate_er(300, 0.03, 8);
  ParadoxReport rep = friendship_paradox_check(g);
  for (const Belief* law : {&rep.x_law.probs, &rep.y_law.probs,
                            &rep.z_law.probs}) {
    double s = 0.0;
    for (std::size_t i = 0; i < law->size(); ++i) s += (*law)[i];
    if (std::fabs(s - 1.0) > 1e-12) return false;
  }

  namespace fs = std::filesystem;
  fs::path base = fs::temp_directory_path() / "socnet_acceptance";
  fs::remove_all(base);
  fs::path d1 = base / "run1", d2 = base / "run2";
  fs::create_directories(d1);
  fs::create_directories(d2);
  std::string small_sis =
      " --seed 17 --set sis.epochs=5 --set sis.azuma_trials=5"
      " --set sis.azuma_n=100,200 --set sis.pcrlb_draws=20";
  std::string small_poll =
      " --seed 23 --set poll.trials=100 --set poll.k_list=10,30";
  for (const fs::path* dir : {&d1, &d2}) {
    std::string out = " --out " + dir->string() + " >/dev/null 2>&1";
    if (std::system((std::string(SOCNET_CLI_BIN) + " sis" + small_sis + out)
                        .c_str()) != 0)
      return false;
    if (std::system((std::string(SOCNET_CLI_BIN) + " poll" + small_poll + out)
                        .c_str()) != 0)
      return false;
    if (std::system((std::string(SOCNET_CLI_BIN) + " qd --seed 5" + out)
                        .c_str()) != 0)
      return false;
  }
  for (const char* f :
       {"sis_trace.csv", "sis_azuma.csv", "poll.csv", "qd_policy.csv"}) {
    std::string a = slurp((d1 / f).string()), b = slurp((d2 / f).string());
    if (a.empty() || a != b) return false;
  }
  std::printf("         jacobian gap %.2e, reruns byte identical\n", worst);
  return true;
}

}  // namespace

int main() {
  std::printf("acceptance checks\n");
  check(1, "cascades settle in finite time", 10, cascades_are_certain);
  check(2, "classical stopping sets are single upper intervals", 120,
        classical_sets_are_single_upper_intervals);
  check(3, "action feedback can split the stopping set", 300,
        action_feedback_can_split_the_stopping_set);
  check(4, "risk aversion grows the herding region", 30,
        risk_aversion_grows_the_herding_region);
  check(5, "full tail level reduces to the mean problem", 60,
        full_tail_level_reduces_to_the_mean);
  check(6, "posted prices drift down", 60, posted_prices_drift_down);
  check(7, "finite-network deviations shrink with size", 300,
        finite_network_deviations_shrink);
  check(8, "posterior bound is insensitive to degree-law shape", 300,
        posterior_bound_is_shape_insensitive);
  check(9, "tracker error scales linearly with step size", 300,
        tracker_error_scales_linearly);
  check(10, "homophily caps minority influence", 180,
        homophily_caps_minority_influence);
  check(11, "sampled friends dominate uniform nodes", 60,
        sampled_friends_dominate_uniform_nodes);
  check(12, "neighborhood polls beat intent polls", 60,
        neighborhood_polls_beat_intent_polls);
  check(13, "jacobians, normalization, and reruns are clean", 60,
        numerics_are_clean);
  if (g_failures == 0) {
    std::printf("all checks passed\n");
    return 0;
  }
  std::printf("%d check(s) failed\n", g_failures);
  return 1;
}
