#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "socnet/errors.hpp"
#include "socnet/graph.hpp"
#include "socnet/rng.hpp"

namespace socnet {

// Infected fraction per degree bin; index i holds degree i + 1.
using InfectedProfile = std::vector<double>;

// degree_probs[i] = P(degree = i + 1). The entries may sum to less than one
// when the remaining mass sits on isolated nodes, which never take part in
// the epidemic.
struct SisParams {
  double beta = 0.0;
  double delta = 0.0;
  std::vector<double> degree_probs;

  std::size_t max_degree() const { return degree_probs.size(); }
};

inline void validate(const SisParams& p) {
  if (p.beta < 0.0 || p.beta > 1.0) throw Error("sis: beta range");
  if (p.delta < 0.0 || p.delta > 1.0) throw Error("sis: delta range");
  if (p.degree_probs.empty())
    throw DimensionMismatchError("sis: empty degree distribution");
  double total = 0.0;
  for (double q : p.degree_probs) {
    if (q < 0.0) throw Error("sis: negative degree probability");
    total += q;
  }
  if (total <= 0.0 || total > 1.0 + 1e-9)
    throw Error("sis: degree probabilities must sum into (0, 1]");
}

inline std::vector<double> powerlaw_degree_probs(std::size_t d_max,
                                                 double gamma) {
  if (d_max < 1) throw DimensionMismatchError("powerlaw_degree_probs: d_max");
  std::vector<double> p(d_max);
  double total = 0.0;
  for (std::size_t d = 1; d <= d_max; ++d) {
    p[d - 1] = std::pow(double(d), -gamma);
    total += p[d - 1];
  }
  for (double& q : p) q /= total;
  return p;
}

inline std::vector<double> exponential_degree_probs(std::size_t d_max,
                                                    double lambda) {
  if (d_max < 1)
    throw DimensionMismatchError("exponential_degree_probs: d_max");
  std::vector<double> p(d_max);
  double total = 0.0;
  for (std::size_t d = 1; d <= d_max; ++d) {
    p[d - 1] = std::exp(-lambda * double(d));
    total += p[d - 1];
  }
  for (double& q : p) q /= total;
  return p;
}

// Poisson(lambda) restricted to d = 1..d_max.
inline std::vector<double> poisson_degree_probs(std::size_t d_max,
                                                double lambda) {
  if (d_max < 1) throw DimensionMismatchError("poisson_degree_probs: d_max");
  if (lambda <= 0.0) throw Error("poisson_degree_probs: lambda");
  std::vector<double> p(d_max);
  double w = lambda;
  double total = 0.0;
  for (std::size_t d = 1; d <= d_max; ++d) {
    p[d - 1] = w;
    total += w;
    w *= lambda / double(d + 1);
  }
  for (double& q : p) q /= total;
  return p;
}

// Probability that a uniformly chosen edge endpoint is infected.
inline double infected_link_prob(const InfectedProfile& rho,
                                 const std::vector<double>& degree_probs) {
  if (rho.size() != degree_probs.size())
    throw DimensionMismatchError("infected_link_prob: size mismatch");
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < rho.size(); ++i) {
    double d = double(i + 1);
    num += d * degree_probs[i] * rho[i];
    den += d * degree_probs[i];
  }
  if (den <= 0.0) throw AllZeroError("infected_link_prob: no edge mass");
  return num / den;
}

namespace detail {

inline double infect_prob(double beta, double theta, std::size_t d) {
  return 1.0 - std::pow(1.0 - beta * theta, double(d));
}

}  // namespace detail

// One deterministic update of the infected profile. The drift per step is
// 1/N times the net flow (1 - rho) * F_I - rho * delta where
// F_I(d, theta) = 1 - (1 - beta * theta)^d.
inline InfectedProfile mean_field_step(const InfectedProfile& rho,
                                       const SisParams& p, long n_nodes) {
  validate(p);
  if (rho.size() != p.max_degree())
    throw DimensionMismatchError("mean_field_step: profile size");
  if (n_nodes < 1) throw Error("mean_field_step: need n_nodes >= 1");
  double theta = infected_link_prob(rho, p.degree_probs);
  InfectedProfile next(rho.size());
  for (std::size_t i = 0; i < rho.size(); ++i) {
    double fi = detail::infect_prob(p.beta, theta, i + 1);
    double v = rho[i] + ((1.0 - rho[i]) * fi - rho[i] * p.delta) /
                            double(n_nodes);
    next[i] = std::clamp(v, 0.0, 1.0);
  }
  return next;
}

// Derivative of mean_field_step with respect to the profile, entry (d, e) in
// degree-bin coordinates.
inline Eigen::MatrixXd mean_field_jacobian(const InfectedProfile& rho,
                                           const SisParams& p, long n_nodes) {
  validate(p);
  if (rho.size() != p.max_degree())
    throw DimensionMismatchError("mean_field_jacobian: profile size");
  const std::size_t n = rho.size();
  const double invn = 1.0 / double(n_nodes);
  double theta = infected_link_prob(rho, p.degree_probs);
  double den = 0.0;
  for (std::size_t i = 0; i < n; ++i) den += double(i + 1) * p.degree_probs[i];
  Eigen::MatrixXd jac(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    double d = double(i + 1);
    double fi = detail::infect_prob(p.beta, theta, i + 1);
    double dfi_dtheta =
        d * std::pow(1.0 - p.beta * theta, d - 1.0) * p.beta;
    for (std::size_t j = 0; j < n; ++j) {
      double dtheta = double(j + 1) * p.degree_probs[j] / den;
      double v = invn * (1.0 - rho[i]) * dfi_dtheta * dtheta;
      if (i == j) v += 1.0 - invn * (fi + p.delta);
      jac(i, j) = v;
    }
  }
  return jac;
}

// Event-driven epidemic on a fixed graph: one uniformly chosen node updates
// per step. A susceptible node with i infected neighbors becomes infected
// with probability 1 - (1 - beta)^i; an infected node recovers with
// probability delta. Nodes with label 1 start infected; isolated nodes never
// change state. The per-degree profile is recorded at step 0 and after every
// sweep of num_nodes steps.
inline std::vector<InfectedProfile> sis_simulate(const Graph& g,
                                                 const SisParams& p,
                                                 long steps,
                                                 std::uint64_t seed) {
  validate(p);
  if (g.directed()) throw Error("sis_simulate: undirected only");
  if (g.num_nodes() == 0)
    throw DimensionMismatchError("sis_simulate: empty graph");
  if (steps < 0) throw Error("sis_simulate: negative steps");
  const std::size_t n = g.num_nodes();
  const std::size_t dbar = p.max_degree();
  std::vector<std::size_t> bin_count(dbar, 0);
  for (std::size_t v = 0; v < n; ++v) {
    std::size_t d = g.degree(v);
    if (d > dbar) throw DimensionMismatchError("sis_simulate: degree above cap");
    if (d >= 1) bin_count[d - 1] += 1;
  }

  std::vector<char> infected(n, 0);
  std::vector<long> bin_infected(dbar, 0);
  for (std::size_t v = 0; v < n; ++v) {
    if (g.label(v) == 1 && g.degree(v) >= 1) {
      infected[v] = 1;
      bin_infected[g.degree(v) - 1] += 1;
    }
  }

  auto snapshot = [&] {
    InfectedProfile rho(dbar, 0.0);
    for (std::size_t i = 0; i < dbar; ++i)
      if (bin_count[i] > 0) rho[i] = double(bin_infected[i]) / double(bin_count[i]);
    return rho;
  };

  Rng rng(seed);
  std::vector<InfectedProfile> trace;
  trace.push_back(snapshot());
  for (long k = 1; k <= steps; ++k) {
    std::size_t v = rng.uniform_int(n);
    std::size_t d = g.degree(v);
    if (d >= 1) {
      if (infected[v]) {
        if (rng.bernoulli(p.delta)) {
          infected[v] = 0;
          bin_infected[d - 1] -= 1;
        }
      } else {
        std::size_t hot = 0;
        for (std::size_t w : g.neighbors(v)) hot += infected[w] ? 1 : 0;
        // each infected neighbor transmits independently; averaging over
        // the neighbor mix reproduces 1 - (1 - beta * theta)^d exactly
        if (hot > 0 &&
            rng.bernoulli(1.0 - std::pow(1.0 - p.beta, double(hot)))) {
          infected[v] = 1;
          bin_infected[d - 1] += 1;
        }
      }
    }
    if (k % long(n) == 0) trace.push_back(snapshot());
  }
  return trace;
}

struct DeviationRow {
  long n_nodes = 0;
  double q90 = 0.0;
};

struct DeviationTable {
  std::vector<DeviationRow> rows;
  std::optional<double> slope;  // log q90 vs log n, least squares
};

// Sup deviation between the epidemic on a sampled graph and the mean-field
// recursion started from the same realized initial profile, with the
// mean-field degree law taken from the realized graph. Reports the
// 0.9-quantile over trials for each network size.
inline DeviationTable azuma_check(const SisParams& p,
                                  const std::vector<long>& n_list, long trials,
                                  long sweeps, double init_infect_prob,
                                  std::uint64_t seed) {
  validate(p);
  if (trials < 1) throw Error("azuma_check: need trials >= 1");
  if (sweeps < 1) throw Error("azuma_check: need sweeps >= 1");
  if (init_infect_prob < 0.0 || init_infect_prob > 1.0)
    throw Error("azuma_check: init_infect_prob range");
  DeviationTable table;
  for (std::size_t row = 0; row < n_list.size(); ++row) {
    long n = n_list[row];
    if (n < 2) throw Error("azuma_check: network too small");
    std::vector<double> sups(trials);
    for (long t = 0; t < trials; ++t) {
      Rng rng = Rng::derive(seed, std::uint64_t(row * 10007 + std::size_t(t)));
      Graph g = generate_degree_law(std::size_t(n), p.degree_probs, rng.next());
      for (std::size_t v = 0; v < g.num_nodes(); ++v)
        if (g.degree(v) >= 1 && rng.bernoulli(init_infect_prob))
          g.set_label(v, 1);

      SisParams realized = p;
      std::vector<std::size_t> bin_count(p.max_degree(), 0);
      for (std::size_t v = 0; v < g.num_nodes(); ++v)
        if (g.degree(v) >= 1) bin_count[g.degree(v) - 1] += 1;
      for (std::size_t i = 0; i < p.max_degree(); ++i)
        realized.degree_probs[i] = double(bin_count[i]) / double(n);

      auto trace = sis_simulate(g, realized, sweeps * n, rng.next());
      InfectedProfile bar = trace[0];
      double sup = 0.0;
      for (long k = 1; k < long(trace.size()); ++k) {
        for (long micro = 0; micro < n; ++micro)
          bar = mean_field_step(bar, realized, n);
        for (std::size_t i = 0; i < bar.size(); ++i)
          if (bin_count[i] > 0)
            sup = std::max(sup, std::abs(bar[i] - trace[std::size_t(k)][i]));
      }
      sups[std::size_t(t)] = sup;
    }
    std::sort(sups.begin(), sups.end());
    std::size_t idx = std::size_t(std::ceil(0.9 * double(trials))) - 1;
    table.rows.push_back({n, sups[idx]});
  }
  if (table.rows.size() >= 2) {
    bool positive = true;
    for (const auto& r : table.rows) positive = positive && r.q90 > 0.0;
    if (positive) {
      double mx = 0, my = 0;
      for (const auto& r : table.rows) {
        mx += std::log(double(r.n_nodes));
        my += std::log(r.q90);
      }
      mx /= double(table.rows.size());
      my /= double(table.rows.size());
      double num = 0, den = 0;
      for (const auto& r : table.rows) {
        double dx = std::log(double(r.n_nodes)) - mx;
        num += dx * (std::log(r.q90) - my);
        den += dx * dx;
      }
      table.slope = num / den;
    }
  }
  return table;
}

// Per-epoch noisy measurement of the profile from m uniformly sampled nodes;
// the per-bin variance is rho (1 - rho) / (m P(d)) plus a floor. m <= 0
// yields exact observations.
struct ObsModel {
  long m = 400;
  double floor_var = 1e-6;
};

namespace detail {

inline double obs_variance(double rho, double pd, const ObsModel& obs) {
  if (obs.m <= 0) return obs.floor_var;
  return rho * (1.0 - rho) / (double(obs.m) * pd) + obs.floor_var;
}

}  // namespace detail

// Observations for epochs 1..truth.size()-1 (none at the prior epoch).
inline std::vector<std::vector<double>> synth_observations(
    const std::vector<InfectedProfile>& truth, const SisParams& p,
    const ObsModel& obs, std::uint64_t seed) {
  validate(p);
  for (double q : p.degree_probs)
    if (q <= 0.0) throw ConfigError("synth_observations: zero-mass degree bin");
  Rng rng(seed);
  std::vector<std::vector<double>> out;
  for (std::size_t k = 1; k < truth.size(); ++k) {
    const auto& rho = truth[k];
    if (rho.size() != p.max_degree())
      throw DimensionMismatchError("synth_observations: profile size");
    std::vector<double> y(rho.size());
    for (std::size_t i = 0; i < rho.size(); ++i) {
      if (obs.m <= 0) {
        y[i] = rho[i];
      } else {
        double var = detail::obs_variance(rho[i], p.degree_probs[i], obs);
        y[i] = rho[i] + std::sqrt(var) * rng.normal();
      }
    }
    out.push_back(std::move(y));
  }
  return out;
}

enum class FilterKind { kEkf, kParticle };

struct FilterOptions {
  FilterKind kind = FilterKind::kEkf;
  long particles = 2000;
  long steps_per_epoch = 1;  // micro updates between observations
  double process_noise_scale = 1.0;
  double prior_sigma = 0.2;
  std::uint64_t seed = 1;
};

namespace detail {

// Variance of the one-step profile increment: a uniformly selected node
// lands in bin d with probability P(d) and flips with the appropriate rate,
// moving the bin value by 1 / (N P(d)).
inline double process_variance(double rho, double pd, double fi, double delta,
                               long n_nodes, double scale) {
  double flip = (1.0 - rho) * fi + rho * delta;
  double v = scale * flip / (double(n_nodes) * double(n_nodes) * pd);
  return v + 1e-12;
}

inline Eigen::VectorXd clamp01(Eigen::VectorXd v) {
  for (Eigen::Index i = 0; i < v.size(); ++i)
    v[i] = std::clamp(v[i], 0.0, 1.0);
  return v;
}

// Advance the profile by `steps` micro updates in place, optionally
// accumulating the per-bin process variance along the path and the product
// of the step Jacobians (the exact derivative of the composed map).
inline void mf_advance(InfectedProfile& x, const SisParams& p, long n_nodes,
                       long steps, double q_scale, std::vector<double>* q_acc,
                       Eigen::MatrixXd* jac_prod) {
  const std::size_t dim = x.size();
  const double invn = 1.0 / double(n_nodes);
  double den = 0.0;
  for (std::size_t i = 0; i < dim; ++i)
    den += double(i + 1) * p.degree_probs[i];
  Eigen::MatrixXd step_jac;
  if (jac_prod) step_jac.resize(Eigen::Index(dim), Eigen::Index(dim));
  for (long s = 0; s < steps; ++s) {
    double num = 0.0;
    for (std::size_t i = 0; i < dim; ++i)
      num += double(i + 1) * p.degree_probs[i] * x[i];
    double theta = num / den;
    double base = 1.0 - p.beta * theta;
    double pw = 1.0;
    for (std::size_t i = 0; i < dim; ++i) {
      double pw_prev = pw;  // base^i
      pw *= base;           // base^(i+1)
      double fi = 1.0 - pw;
      if (q_acc)
        (*q_acc)[i] += process_variance(x[i], p.degree_probs[i], fi, p.delta,
                                        n_nodes, q_scale);
      if (jac_prod) {
        double dfi = double(i + 1) * pw_prev * p.beta;
        for (std::size_t j = 0; j < dim; ++j) {
          double v = invn * (1.0 - x[i]) * dfi *
                     (double(j + 1) * p.degree_probs[j] / den);
          if (i == j) v += 1.0 - invn * (fi + p.delta);
          step_jac(Eigen::Index(i), Eigen::Index(j)) = v;
        }
      }
      x[i] = std::clamp(
          x[i] + invn * ((1.0 - x[i]) * fi - x[i] * p.delta), 0.0, 1.0);
    }
    if (jac_prod) *jac_prod = step_jac * (*jac_prod);
  }
}

}  // namespace detail

// Bayesian tracking of the profile from per-epoch noisy measurements. The
// EKF linearizes the mean-field map with the analytic Jacobian; the particle
// variant propagates the same model with systematic resampling and serves as
// the reference. Returns the per-epoch posterior mean, one entry per
// observation.
inline std::vector<InfectedProfile> track_profile(
    const SisParams& p, long n_nodes, const InfectedProfile& prior_mean,
    const std::vector<std::vector<double>>& observations, const ObsModel& obs,
    const FilterOptions& opt) {
  validate(p);
  for (double q : p.degree_probs)
    if (q <= 0.0) throw ConfigError("track_profile: zero-mass degree bin");
  if (prior_mean.size() != p.max_degree())
    throw DimensionMismatchError("track_profile: prior size");
  if (n_nodes < 1) throw Error("track_profile: need n_nodes >= 1");
  const std::size_t dim = p.max_degree();
  for (const auto& y : observations)
    if (y.size() != dim)
      throw DimensionMismatchError("track_profile: observation size");

  std::vector<InfectedProfile> estimates;
  estimates.reserve(observations.size());

  auto profile_of = [&](const Eigen::VectorXd& v) {
    InfectedProfile r(dim);
    for (std::size_t i = 0; i < dim; ++i) r[i] = v[Eigen::Index(i)];
    return r;
  };

  if (opt.steps_per_epoch < 1)
    throw Error("track_profile: need steps_per_epoch >= 1");

  if (opt.kind == FilterKind::kEkf) {
    Eigen::VectorXd x = Eigen::Map<const Eigen::VectorXd>(prior_mean.data(),
                                                          Eigen::Index(dim));
    Eigen::MatrixXd cov = opt.prior_sigma * opt.prior_sigma *
                          Eigen::MatrixXd::Identity(Eigen::Index(dim),
                                                    Eigen::Index(dim));
    for (const auto& yv : observations) {
      InfectedProfile pred = profile_of(x);
      Eigen::MatrixXd f = Eigen::MatrixXd::Identity(Eigen::Index(dim),
                                                    Eigen::Index(dim));
      std::vector<double> qacc(dim, 0.0);
      detail::mf_advance(pred, p, n_nodes, opt.steps_per_epoch,
                         opt.process_noise_scale, &qacc, &f);
      Eigen::VectorXd xbar = Eigen::VectorXd::Zero(Eigen::Index(dim));
      Eigen::VectorXd qdiag = Eigen::VectorXd::Zero(Eigen::Index(dim));
      Eigen::VectorXd rdiag = Eigen::VectorXd::Zero(Eigen::Index(dim));
      for (std::size_t i = 0; i < dim; ++i) {
        xbar[Eigen::Index(i)] = pred[i];
        qdiag[Eigen::Index(i)] = qacc[i];
        rdiag[Eigen::Index(i)] =
            detail::obs_variance(pred[i], p.degree_probs[i], obs);
      }
      cov = f * cov * f.transpose();
      cov.diagonal() += qdiag;
      Eigen::VectorXd y =
          Eigen::Map<const Eigen::VectorXd>(yv.data(), Eigen::Index(dim));
      Eigen::MatrixXd s = cov;
      s.diagonal() += rdiag;
      Eigen::MatrixXd gain = s.ldlt().solve(cov).transpose();
      x = detail::clamp01(xbar + gain * (y - xbar));
      cov = cov - gain * cov;
      estimates.push_back(profile_of(x));
    }
    return estimates;
  }

  if (opt.particles < 2) throw Error("track_profile: need particles >= 2");
  const std::size_t np = std::size_t(opt.particles);
  Rng rng(opt.seed);
  std::vector<Eigen::VectorXd> particles(np);
  Eigen::VectorXd x0 = Eigen::Map<const Eigen::VectorXd>(prior_mean.data(),
                                                         Eigen::Index(dim));
  for (auto& part : particles) {
    part = x0;
    if (opt.prior_sigma > 0.0) {
      for (std::size_t i = 0; i < dim; ++i)
        part[Eigen::Index(i)] += opt.prior_sigma * rng.normal();
      part = detail::clamp01(std::move(part));
    }
  }
  std::vector<double> logw(np), w(np);
  std::vector<double> qacc(dim);
  for (const auto& yv : observations) {
    for (auto& part : particles) {
      InfectedProfile pred = profile_of(part);
      std::fill(qacc.begin(), qacc.end(), 0.0);
      detail::mf_advance(pred, p, n_nodes, opt.steps_per_epoch,
                         opt.process_noise_scale, &qacc, nullptr);
      for (std::size_t i = 0; i < dim; ++i)
        part[Eigen::Index(i)] =
            pred[i] + (opt.process_noise_scale > 0.0
                           ? std::sqrt(qacc[i]) * rng.normal()
                           : 0.0);
      part = detail::clamp01(std::move(part));
    }
    double max_logw = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < np; ++j) {
      double lw = 0.0;
      for (std::size_t i = 0; i < dim; ++i) {
        double var = detail::obs_variance(particles[j][Eigen::Index(i)],
                                          p.degree_probs[i], obs);
        double diff = yv[i] - particles[j][Eigen::Index(i)];
        lw += -0.5 * (diff * diff / var + std::log(2.0 * M_PI * var));
      }
      logw[j] = lw;
      if (std::isfinite(lw)) max_logw = std::max(max_logw, lw);
    }
    if (!std::isfinite(max_logw) || max_logw < -700.0)
      throw DegenerateWeightsError("track_profile: particle weights collapsed");
    double total = 0.0;
    for (std::size_t j = 0; j < np; ++j) {
      w[j] = std::isfinite(logw[j]) ? std::exp(logw[j] - max_logw) : 0.0;
      total += w[j];
    }
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(Eigen::Index(dim));
    for (std::size_t j = 0; j < np; ++j) mean += (w[j] / total) * particles[j];
    estimates.push_back(profile_of(mean));

    // systematic resampling
    std::vector<Eigen::VectorXd> next(np);
    double u0 = rng.uniform() / double(np);
    double cum = w[0] / total;
    std::size_t j = 0;
    for (std::size_t i = 0; i < np; ++i) {
      double u = u0 + double(i) / double(np);
      while (cum < u && j + 1 < np) {
        j += 1;
        cum += w[j] / total;
      }
      next[i] = particles[j];
    }
    particles = std::move(next);
  }
  return estimates;
}

// One information-matrix update: J' = D22 - D21 (J + D11)^{-1} D12 with
// D21 = D12^T.
inline Eigen::MatrixXd pcrlb_step(const Eigen::MatrixXd& j,
                                  const Eigen::MatrixXd& d11,
                                  const Eigen::MatrixXd& d12,
                                  const Eigen::MatrixXd& d22) {
  Eigen::MatrixXd inner = j + d11;
  Eigen::MatrixXd solved = inner.ldlt().solve(d12);
  Eigen::MatrixXd out = d22 - d12.transpose() * solved;
  return 0.5 * (out + out.transpose());
}

struct PcrlbResult {
  std::vector<double> bound_trace;  // trace(J^{-1}) per epoch, epoch 0 = prior
  std::vector<std::vector<double>> bound_diag;  // per-degree diagonal
  bool regularized = false;
};

// Posterior information recursion with Monte Carlo averaged blocks: the
// expectation over the state is estimated from an ensemble of draws started
// at the prior and propagated through the noisy mean-field dynamics.
//
// The recursion runs in mass coordinates x(d) = P(d) rho(d), the share of
// the whole population that is degree d and infected, with the prior sigma^2
// per coordinate. The epoch-0 bound is therefore dim * sigma^2. Noise floors
// apply in the same units as x.
inline PcrlbResult pcrlb_recursion(const SisParams& p, long n_nodes,
                                   const InfectedProfile& prior_mean,
                                   double prior_sigma, const ObsModel& obs,
                                   long horizon, long mc_draws,
                                   std::uint64_t seed,
                                   double process_noise_scale = 1.0,
                                   long steps_per_epoch = 1) {
  validate(p);
  for (double q : p.degree_probs)
    if (q <= 0.0) throw ConfigError("pcrlb_recursion: zero-mass degree bin");
  if (prior_mean.size() != p.max_degree())
    throw DimensionMismatchError("pcrlb_recursion: prior size");
  if (prior_sigma <= 0.0) throw Error("pcrlb_recursion: prior sigma");
  if (horizon < 0 || mc_draws < 1) throw Error("pcrlb_recursion: schedule");
  if (steps_per_epoch < 1) throw Error("pcrlb_recursion: steps_per_epoch");

  const std::size_t dim = p.max_degree();
  const Eigen::Index edim = Eigen::Index(dim);
  Rng rng(seed);
  std::vector<InfectedProfile> draws;  // mass coordinates
  draws.resize(std::size_t(mc_draws));
  for (auto& x : draws) {
    x.resize(dim);
    for (std::size_t i = 0; i < dim; ++i) {
      double m0 = p.degree_probs[i] * prior_mean[i];
      x[i] = std::clamp(m0 + prior_sigma * rng.normal(), 0.0,
                        p.degree_probs[i]);
    }
  }

  PcrlbResult result;
  Eigen::MatrixXd j =
      Eigen::MatrixXd::Identity(edim, edim) / (prior_sigma * prior_sigma);

  auto record = [&] {
    Eigen::LDLT<Eigen::MatrixXd> ldlt(j);
    Eigen::MatrixXd inv =
        ldlt.solve(Eigen::MatrixXd::Identity(edim, edim));
    double tr = inv.trace();
    if (!std::isfinite(tr) || tr <= 0.0) {
      result.regularized = true;
      Eigen::MatrixXd jr = j + 1e-10 * Eigen::MatrixXd::Identity(edim, edim);
      inv = jr.ldlt().solve(Eigen::MatrixXd::Identity(edim, edim));
      tr = inv.trace();
    }
    result.bound_trace.push_back(tr);
    std::vector<double> diag(dim);
    for (std::size_t i = 0; i < dim; ++i) diag[i] = inv(Eigen::Index(i),
                                                        Eigen::Index(i));
    result.bound_diag.push_back(std::move(diag));
  };
  record();

  for (long k = 0; k < horizon; ++k) {
    Eigen::MatrixXd d11 = Eigen::MatrixXd::Zero(edim, edim);
    Eigen::MatrixXd d12 = Eigen::MatrixXd::Zero(edim, edim);
    Eigen::MatrixXd d22 = Eigen::MatrixXd::Zero(edim, edim);
    for (auto& x : draws) {
      InfectedProfile rho(dim);
      for (std::size_t i = 0; i < dim; ++i) rho[i] = x[i] / p.degree_probs[i];
      Eigen::MatrixXd f = Eigen::MatrixXd::Identity(edim, edim);
      std::vector<double> qacc(dim, 0.0);
      detail::mf_advance(rho, p, n_nodes, steps_per_epoch,
                         process_noise_scale, &qacc, &f);
      Eigen::VectorXd qinv = Eigen::VectorXd::Zero(edim);
      Eigen::VectorXd rinv = Eigen::VectorXd::Zero(edim);
      std::vector<double> qx(dim);
      for (std::size_t i = 0; i < dim; ++i) {
        double pd = p.degree_probs[i];
        qx[i] = pd * pd * qacc[i] + 1e-12;
        qinv[Eigen::Index(i)] = 1.0 / qx[i];
        double rx = obs.floor_var;
        if (obs.m > 0)
          rx += pd * rho[i] * (1.0 - rho[i]) / double(obs.m);
        rinv[Eigen::Index(i)] = 1.0 / rx;
        for (std::size_t jj = 0; jj < dim; ++jj)
          f(Eigen::Index(i), Eigen::Index(jj)) *=
              pd / p.degree_probs[jj];
      }
      d11 += f.transpose() * qinv.asDiagonal() * f;
      d12 += -(f.transpose() * qinv.asDiagonal()).eval();
      d22 += Eigen::MatrixXd(qinv.asDiagonal()) +
             Eigen::MatrixXd(rinv.asDiagonal());
      for (std::size_t i = 0; i < dim; ++i)
        x[i] = std::clamp(p.degree_probs[i] * rho[i] +
                              std::sqrt(qx[i]) * rng.normal(),
                          0.0, p.degree_probs[i]);
    }
    double inv_draws = 1.0 / double(mc_draws);
    j = pcrlb_step(j, d11 * inv_draws, d12 * inv_draws, d22 * inv_draws);
    Eigen::LDLT<Eigen::MatrixXd> check(j);
    if (check.info() != Eigen::Success ||
        (check.vectorD().array() < 1e-12).any()) {
      result.regularized = true;
      j += 1e-10 * Eigen::MatrixXd::Identity(edim, edim);
    }
    record();
  }
  return result;
}

}  // namespace socnet
