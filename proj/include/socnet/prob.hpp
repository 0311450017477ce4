#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "socnet/errors.hpp"

namespace socnet {

inline constexpr double kBeliefTol = 1e-12;

// Probability vector over a finite state set. Dimension is at least 2 and
// fixed for the life of the value; entries are nonnegative and sum to one
// within kBeliefTol after every constructor and normalize call.
class Belief {
 public:
  explicit Belief(std::vector<double> p) : p_(std::move(p)) {
    if (p_.size() < 2)
      throw DimensionMismatchError("Belief: dimension must be >= 2");
    double sum = 0.0;
    for (double x : p_) {
      if (x < 0.0) throw Error("Belief: negative entry");
      sum += x;
    }
    if (std::abs(sum - 1.0) > 1e-9)
      throw Error("Belief: entries sum to " + std::to_string(sum));
    for (double& x : p_) x /= sum;
  }

  Belief(std::initializer_list<double> p) : Belief(std::vector<double>(p)) {}

  std::size_t size() const { return p_.size(); }
  double operator[](std::size_t i) const { return p_[i]; }
  const std::vector<double>& probs() const { return p_; }

  bool operator==(const Belief& o) const { return p_ == o.p_; }

 private:
  std::vector<double> p_;
};

// Rescales a nonnegative vector to a Belief.
inline Belief normalize(const std::vector<double>& raw) {
  if (raw.size() < 2)
    throw DimensionMismatchError("normalize: dimension must be >= 2");
  double sum = 0.0;
  for (double x : raw) {
    if (x < 0.0) throw Error("normalize: negative entry");
    sum += x;
  }
  if (sum <= 0.0) throw AllZeroError("normalize: no positive mass");
  std::vector<double> p(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) p[i] = raw[i] / sum;
  return Belief(std::move(p));
}

// Row-stochastic matrix. Row i is a Belief over the column index set.
class RowStochastic {
 public:
  explicit RowStochastic(std::vector<std::vector<double>> rows) {
    if (rows.empty()) throw DimensionMismatchError("RowStochastic: no rows");
    cols_ = rows[0].size();
    for (auto& r : rows) {
      if (r.size() != cols_)
        throw DimensionMismatchError("RowStochastic: ragged rows");
      rows_.push_back(Belief(std::move(r)));
    }
  }

  static RowStochastic identity(std::size_t n) {
    std::vector<std::vector<double>> rows(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) rows[i][i] = 1.0;
    return RowStochastic(std::move(rows));
  }

  std::size_t rows() const { return rows_.size(); }
  std::size_t cols() const { return cols_; }
  const Belief& row(std::size_t i) const { return rows_[i]; }
  double operator()(std::size_t i, std::size_t j) const { return rows_[i][j]; }

  // x' P for a belief x over rows; the result is a belief over columns.
  std::vector<double> left_apply(const std::vector<double>& x) const {
    if (x.size() != rows_.size())
      throw DimensionMismatchError("left_apply: size mismatch");
    std::vector<double> out(cols_, 0.0);
    for (std::size_t i = 0; i < rows_.size(); ++i)
      for (std::size_t j = 0; j < cols_; ++j) out[j] += x[i] * rows_[i][j];
    return out;
  }

  bool operator==(const RowStochastic& o) const {
    return cols_ == o.cols_ && rows_ == o.rows_;
  }

 private:
  std::vector<Belief> rows_;
  std::size_t cols_ = 0;
};

// Transition kernel of a Markov chain (square).
using StochasticMatrix = RowStochastic;
// State-conditional observation likelihoods (rows: states, cols: symbols).
using ObservationKernel = RowStochastic;

// Finite-support random variable: values[i] occurs with probability probs[i].
struct DiscreteRV {
  std::vector<double> values;
  Belief probs;

  DiscreteRV(std::vector<double> v, Belief p)
      : values(std::move(v)), probs(std::move(p)) {
    if (values.size() != probs.size())
      throw DimensionMismatchError("DiscreteRV: values/probs size mismatch");
  }

  double mean() const {
    double m = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) m += values[i] * probs[i];
    return m;
  }
};

// First order stochastic dominance of p over q: samples of p are larger in
// distribution. For beliefs the shared support is the index order.
inline bool fosd_dominates(const Belief& p, const Belief& q,
                           double tol = kBeliefTol) {
  if (p.size() != q.size())
    throw DimensionMismatchError("fosd_dominates: dimension mismatch");
  double cp = 0.0, cq = 0.0;
  for (std::size_t i = 0; i + 1 < p.size(); ++i) {
    cp += p[i];
    cq += q[i];
    if (cp > cq + tol) return false;
  }
  return true;
}

inline bool fosd_dominates(const DiscreteRV& p, const DiscreteRV& q,
                           double tol = kBeliefTol) {
  // Merge the supports, then compare CDFs at every atom.
  std::vector<double> pts;
  pts.insert(pts.end(), p.values.begin(), p.values.end());
  pts.insert(pts.end(), q.values.begin(), q.values.end());
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  auto cdf = [](const DiscreteRV& rv, double t) {
    double c = 0.0;
    for (std::size_t i = 0; i < rv.values.size(); ++i)
      if (rv.values[i] <= t) c += rv.probs[i];
    return c;
  };
  for (double t : pts)
    if (cdf(p, t) > cdf(q, t) + tol) return false;
  return true;
}

// Monotone likelihood ratio dominance of p over q:
// p(i) q(j) >= p(j) q(i) for every i > j.
inline bool mlr_dominates(const Belief& p, const Belief& q,
                          double tol = kBeliefTol) {
  if (p.size() != q.size())
    throw DimensionMismatchError("mlr_dominates: dimension mismatch");
  for (std::size_t i = 1; i < p.size(); ++i)
    for (std::size_t j = 0; j < i; ++j)
      if (p[i] * q[j] < p[j] * q[i] - tol) return false;
  return true;
}

namespace detail {

// Phase-1 simplex feasibility for A x = b, x >= 0 (dense tableau, Bland's
// rule). Returns true when the artificial objective reaches ~0.
inline bool lp_feasible(std::vector<std::vector<double>> a,
                        std::vector<double> b) {
  const std::size_t m = a.size();
  const std::size_t n = m ? a[0].size() : 0;
  for (std::size_t r = 0; r < m; ++r) {
    if (b[r] < 0.0) {
      b[r] = -b[r];
      for (double& v : a[r]) v = -v;
    }
  }
  // Tableau columns: n structural + m artificial + rhs.
  std::vector<std::vector<double>> t(m + 1,
                                     std::vector<double>(n + m + 1, 0.0));
  for (std::size_t r = 0; r < m; ++r) {
    for (std::size_t c = 0; c < n; ++c) t[r][c] = a[r][c];
    t[r][n + r] = 1.0;
    t[r][n + m] = b[r];
  }
  // Objective row: minimize sum of artificials, reduced costs under the
  // all-artificial basis.
  for (std::size_t c = 0; c <= n + m; ++c) {
    double s = 0.0;
    for (std::size_t r = 0; r < m; ++r) s += t[r][c];
    t[m][c] = (c >= n && c < n + m) ? 0.0 : -s;
  }
  std::vector<std::size_t> basis(m);
  for (std::size_t r = 0; r < m; ++r) basis[r] = n + r;

  const double eps = 1e-11;
  for (long iter = 0; iter < 100000; ++iter) {
    std::size_t enter = n + m;
    for (std::size_t c = 0; c < n + m; ++c) {
      if (t[m][c] < -eps) {
        enter = c;
        break;
      }
    }
    if (enter == n + m) break;
    std::size_t leave = m;
    double best = 0.0;
    for (std::size_t r = 0; r < m; ++r) {
      if (t[r][enter] > eps) {
        double ratio = t[r][n + m] / t[r][enter];
        if (leave == m || ratio < best - eps ||
            (ratio < best + eps && basis[r] < basis[leave])) {
          leave = r;
          best = ratio;
        }
      }
    }
    if (leave == m) break;  // unbounded, cannot happen for phase 1
    double piv = t[leave][enter];
    for (double& v : t[leave]) v /= piv;
    for (std::size_t r = 0; r <= m; ++r) {
      if (r == leave) continue;
      double f = t[r][enter];
      if (f == 0.0) continue;
      for (std::size_t c = 0; c <= n + m; ++c) t[r][c] -= f * t[leave][c];
    }
    basis[leave] = enter;
  }
  return std::abs(t[m][n + m]) <= 1e-9;
}

}  // namespace detail

// Blackwell dominance of kernel b1 over b2: b2 is a garbling of b1, i.e.
// there is a row-stochastic Q with b1 Q = b2 up to tol in sup norm. Decided
// as a linear feasibility problem.
inline bool blackwell_dominates(const ObservationKernel& b1,
                                const ObservationKernel& b2,
                                double tol = 1e-8) {
  if (b1.rows() != b2.rows())
    throw DimensionMismatchError("blackwell_dominates: state count mismatch");
  const std::size_t x = b1.rows();
  const std::size_t y1 = b1.cols();
  const std::size_t y2 = b2.cols();
  // Variables: q[k][j] (y1*y2), then one slack per inequality.
  // Equalities: row sums of Q; product entries within +-tol of b2.
  const std::size_t nq = y1 * y2;
  const std::size_t nineq = 2 * x * y2;
  const std::size_t ncol = nq + nineq;
  std::vector<std::vector<double>> a;
  std::vector<double> rhs;
  for (std::size_t k = 0; k < y1; ++k) {
    std::vector<double> row(ncol, 0.0);
    for (std::size_t j = 0; j < y2; ++j) row[k * y2 + j] = 1.0;
    a.push_back(std::move(row));
    rhs.push_back(1.0);
  }
  std::size_t slack = nq;
  for (std::size_t i = 0; i < x; ++i) {
    for (std::size_t j = 0; j < y2; ++j) {
      std::vector<double> up(ncol, 0.0), dn(ncol, 0.0);
      for (std::size_t k = 0; k < y1; ++k) {
        up[k * y2 + j] = b1(i, k);
        dn[k * y2 + j] = b1(i, k);
      }
      up[slack++] = 1.0;   // sum + s = b2 + tol
      dn[slack++] = -1.0;  // sum - s = b2 - tol
      a.push_back(std::move(up));
      rhs.push_back(b2(i, j) + tol);
      a.push_back(std::move(dn));
      rhs.push_back(b2(i, j) - tol);
    }
  }
  return detail::lp_feasible(std::move(a), std::move(rhs));
}

// Conditional value at risk of a cost rv at level alpha in (0, 1]:
//   min_z z + E[max(rv - z, 0)] / alpha
// The minimizer can be taken at a support value, so the search is over the
// support only.
inline double cvar(const DiscreteRV& rv, double alpha) {
  if (!(alpha > 0.0) || alpha > 1.0)
    throw BadAlphaError("cvar: alpha must lie in (0, 1]");
  double best = 0.0;
  bool first = true;
  for (double z : rv.values) {
    double tail = 0.0;
    for (std::size_t i = 0; i < rv.values.size(); ++i)
      tail += rv.probs[i] * std::max(rv.values[i] - z, 0.0);
    double v = z + tail / alpha;
    if (first || v < best) {
      best = v;
      first = false;
    }
  }
  return best;
}

// Shannon entropy in bits.
inline double shannon_entropy(const Belief& p) {
  double h = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i)
    if (p[i] > 0.0) h -= p[i] * std::log2(p[i]);
  return h;
}

// Two-sample Kolmogorov-Smirnov p-value via the asymptotic Kolmogorov
// distribution with the usual small-sample correction.
inline double ks_two_sample_pvalue(std::vector<double> xs,
                                   std::vector<double> ys) {
  if (xs.empty() || ys.empty())
    throw DimensionMismatchError("ks_two_sample_pvalue: empty sample");
  std::sort(xs.begin(), xs.end());
  std::sort(ys.begin(), ys.end());
  const double nx = double(xs.size());
  const double ny = double(ys.size());
  double d = 0.0;
  std::size_t i = 0, j = 0;
  while (i < xs.size() && j < ys.size()) {
    double t = std::min(xs[i], ys[j]);
    while (i < xs.size() && xs[i] <= t) ++i;
    while (j < ys.size() && ys[j] <= t) ++j;
    d = std::max(d, std::fabs(double(i) / nx - double(j) / ny));
  }
  double ne = std::sqrt(nx * ny / (nx + ny));
  double lambda = (ne + 0.12 + 0.11 / ne) * d;
  double p = 0.0;
  double sign = 1.0;
  for (int k = 1; k <= 100; ++k) {
    double term = sign * std::exp(-2.0 * double(k) * double(k) * lambda * lambda);
    p += term;
    if (std::fabs(term) < 1e-12) break;
    sign = -sign;
  }
  return std::clamp(2.0 * p, 0.0, 1.0);
}

}  // namespace socnet
