#include "rcid/uniqueness.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>
#include <Eigen/SVD>

namespace rcid::uniqueness {

// --- SupportSet ------------------------------------------------------------

SupportSet::SupportSet(int p, std::vector<std::vector<double>> pts)
    : p_(p), points_(std::move(pts)) {
  if (points_.empty()) throw precondition_error("SupportSet: empty realization");
  for (const auto& x : points_) {
    if (static_cast<int>(x.size()) != p_)
      throw data_error("SupportSet: point dimension mismatch");
    for (double v : x)
      if (!std::isfinite(v)) throw data_error("SupportSet: non-finite point");
  }
}

SupportSet SupportSet::from_points(std::vector<std::vector<double>> pts) {
  if (pts.empty()) throw precondition_error("SupportSet: no points");
  const int dim = static_cast<int>(pts[0].size());
  return SupportSet(dim, std::move(pts));
}

SupportSet SupportSet::grid(const std::vector<std::vector<double>>& axes) {
  if (axes.empty()) throw precondition_error("SupportSet::grid: no axes");
  std::vector<std::vector<double>> pts{{}};
  for (const auto& axis : axes) {
    std::vector<std::vector<double>> next;
    for (const auto& partial : pts)
      for (double v : axis) {
        auto q = partial;
        q.push_back(v);
        next.push_back(std::move(q));
      }
    pts = std::move(next);
  }
  return SupportSet(static_cast<int>(axes.size()), std::move(pts));
}

SupportSet SupportSet::fan(const std::vector<double>& slopes, int budget) {
  if (slopes.empty() || budget < 1)
    throw precondition_error("SupportSet::fan: need slopes and budget");
  std::vector<std::vector<double>> pts;
  int i = 1;
  while (static_cast<int>(pts.size()) < budget) {
    for (double n : slopes) {
      if (static_cast<int>(pts.size()) >= budget) break;
      pts.push_back({static_cast<double>(i), n * i});
    }
    ++i;
  }
  return SupportSet(2, std::move(pts));
}

SupportSet SupportSet::staircase(double lo, double hi, int budget) {
  if (!(hi > lo) || budget < 1)
    throw precondition_error("SupportSet::staircase: bad range");
  std::vector<std::vector<double>> pts;
  for (int i = 0; i < budget; ++i) {
    double x1 = lo + (i + 0.5) * (hi - lo) / budget;
    pts.push_back({x1, std::ceil(x1)});
  }
  return SupportSet(2, std::move(pts));
}

SupportSet SupportSet::geometric(double ratio, int count) {
  if (!(ratio > 0) || count < 1)
    throw precondition_error("SupportSet::geometric: bad parameters");
  std::vector<std::vector<double>> pts;
  double v = 1.0;
  for (int i = 1; i <= count; ++i) {
    v *= ratio;
    pts.push_back({v});
  }
  return SupportSet(1, std::move(pts));
}

SupportSet SupportSet::custom(int p, int budget,
                              const std::function<std::vector<double>(int)>& gen) {
  std::vector<std::vector<double>> pts;
  pts.reserve(budget);
  for (int i = 0; i < budget; ++i) pts.push_back(gen(i));
  return SupportSet(p, std::move(pts));
}

// --- polynomial_uniqueness_rank ------------------------------------------------

RankResult polynomial_uniqueness_rank(const SupportSet& V, int degree,
                                      double rank_tol) {
  const auto& pts = V.points();
  const int p = V.dimension();
  auto monomials = num::multi_indices_up_to(p, degree);
  const int n = static_cast<int>(pts.size());
  const int c = static_cast<int>(monomials.size());

  Eigen::MatrixXd A(n, c);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < c; ++j) {
      double v = 1.0;
      for (int k = 0; k < p; ++k)
        for (int e = 0; e < monomials[j][k]; ++e) v *= pts[i][k];
      A(i, j) = v;
    }

  // unit-norm column scaling keeps the rank tolerance meaningful on
  // ill-conditioned monomial designs
  Eigen::VectorXd scale(c);
  for (int j = 0; j < c; ++j) {
    double nrm = A.col(j).norm();
    scale(j) = nrm > 0 ? nrm : 1.0;
    A.col(j) /= scale(j);
  }

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  double cutoff = rank_tol * sv(0);
  int rank = 0;
  for (int i = 0; i < sv.size(); ++i)
    if (sv(i) > cutoff) ++rank;

  RankResult res;
  res.rank = rank;
  res.n_columns = c;
  res.full_rank = rank == c;
  res.monomials = monomials;
  res.singular_values.assign(sv.data(), sv.data() + sv.size());
  if (!res.full_rank && n >= 1) {
    Eigen::VectorXd v = svd.matrixV().col(c - 1);
    // undo the column scaling to express the witness over raw monomials
    for (int j = 0; j < c; ++j) v(j) /= scale(j);
    v.normalize();
    // sign convention: largest-magnitude coefficient positive
    int imax = 0;
    for (int j = 1; j < c; ++j)
      if (std::abs(v(j)) > std::abs(v(imax))) imax = j;
    if (v(imax) < 0) v = -v;
    res.witness.assign(v.data(), v.data() + c);
  }
  return res;
}

// --- counting_function ------------------------------------------------------------

CountingProfile counting_function(const SupportSet& V,
                                  std::vector<double> radii, bool exclude_zero,
                                  int axis) {
  if (axis < 0 || axis >= V.dimension())
    throw precondition_error("counting_function: bad axis");
  std::vector<double> abs_vals;
  abs_vals.reserve(V.size());
  for (const auto& x : V.points()) {
    double v = std::abs(x[axis]);
    if (exclude_zero && v == 0.0) continue;
    abs_vals.push_back(v);
  }
  std::sort(abs_vals.begin(), abs_vals.end());
  std::sort(radii.begin(), radii.end());

  CountingProfile prof;
  prof.zero_excluded = exclude_zero;
  for (double r : radii) {
    if (!(r > 0)) throw precondition_error("counting_function: radii must be positive");
    auto it = std::lower_bound(abs_vals.begin(), abs_vals.end(), r);
    prof.radii.push_back(r);
    prof.counts.push_back(static_cast<long>(it - abs_vals.begin()));
  }
  return prof;
}

// --- growth condition checks ----------------------------------------------------------

double iterated_log(double t, int j) {
  double v = t;
  for (int i = 0; i < j; ++i) {
    if (!(v > 0)) return -kInf;
    v = std::log(v);
  }
  return v;
}

namespace {

void validate_profile(const CountingProfile& prof) {
  if (prof.radii.size() < 8)
    throw precondition_error("growth check: need at least 8 radii");
  if (prof.radii.back() / prof.radii.front() < 100.0)
    throw precondition_error("growth check: radii must span two decades");
  for (std::size_t i = 1; i < prof.counts.size(); ++i)
    if (prof.counts[i] < prof.counts[i - 1])
      throw data_error("counting profile not monotone");
}

GrowthCheck classify_statistic(const CountingProfile& prof,
                               std::vector<double> stat, double threshold) {
  GrowthCheck g;
  g.statistic = std::move(stat);
  // trend over the largest decade of radii
  double r_hi = prof.radii.back();
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < prof.radii.size(); ++i)
    if (prof.radii[i] >= r_hi / 10.0 && std::isfinite(g.statistic[i])) {
      xs.push_back(prof.radii[i]);
      ys.push_back(g.statistic[i]);
    }
  g.statistic_at_rmax = g.statistic.back();
  if (xs.size() >= 3) g.trend_slope = num::ls_slope(xs, ys);
  g.pass = xs.size() >= 3 && g.trend_slope > 0 &&
           g.statistic_at_rmax > threshold;
  return g;
}

}  // namespace

GrowthCheck growth_condition_e1(const CountingProfile& prof,
                                const std::function<double(double)>& m_env,
                                const std::vector<double>& t_grid,
                                double threshold) {
  validate_profile(prof);
  if (t_grid.empty()) throw precondition_error("E1: empty t grid");
  // envelope must be increasing
  {
    double prev = m_env(prof.radii.front());
    for (double r : {prof.radii.front() * 2, prof.radii.back()}) {
      double v = m_env(r);
      if (v < prev) throw precondition_error("E1: envelope m not increasing");
      prev = v;
    }
  }
  // alpha grid, log-spaced in (1, e^4]
  std::vector<double> alphas;
  for (int i = 1; i <= 24; ++i) alphas.push_back(std::exp(4.0 * i / 24.0));

  GrowthCheck worst;
  bool first = true;
  for (double t : t_grid) {
    std::vector<double> stat(prof.radii.size());
    for (std::size_t i = 0; i < prof.radii.size(); ++i) {
      double r = prof.radii[i];
      double best = -kInf;
      for (double a : alphas) {
        double denom = std::log(m_env(a * t * r));
        if (!(denom > 0)) continue;
        best = std::max(best, std::log(a) / denom * prof.counts[i]);
      }
      stat[i] = best;
    }
    GrowthCheck g = classify_statistic(prof, std::move(stat), threshold);
    bool replace = first;
    if (!first) {
      if (worst.pass && !g.pass)
        replace = true;
      else if (worst.pass == g.pass &&
               g.statistic_at_rmax < worst.statistic_at_rmax)
        replace = true;
    }
    if (replace) {
      worst = g;
      first = false;
    }
  }
  return worst;  // condition must hold for every t: report the weakest t
}

GrowthCheck growth_condition_e2(const CountingProfile& prof, double threshold) {
  validate_profile(prof);
  std::vector<double> stat(prof.radii.size());
  for (std::size_t i = 0; i < prof.radii.size(); ++i)
    stat[i] = prof.counts[i] > 0
                  ? std::log(static_cast<double>(prof.counts[i])) / prof.radii[i]
                  : -kInf;
  return classify_statistic(prof, std::move(stat), threshold);
}

GrowthCheck growth_condition_e4a(const CountingProfile& prof, int n,
                                 double threshold) {
  validate_profile(prof);
  if (n < 0) throw precondition_error("E4a: n must be nonnegative");
  std::vector<double> stat(prof.radii.size());
  for (std::size_t i = 0; i < prof.radii.size(); ++i) {
    double v = iterated_log(static_cast<double>(prof.counts[i]), n + 1);
    stat[i] = v / prof.radii[i];
  }
  return classify_statistic(prof, std::move(stat), threshold);
}

GrowthCheck growth_condition_check(const CountingProfile& prof,
                                   const GrowthConditionSpec& spec) {
  switch (spec.kind) {
    case GrowthConditionSpec::Kind::e1:
      return growth_condition_e1(prof, spec.m_envelope, spec.t_grid,
                                 spec.threshold);
    case GrowthConditionSpec::Kind::e2:
      return growth_condition_e2(prof, spec.threshold);
    default:
      return growth_condition_e4a(prof, spec.n, spec.threshold);
  }
}

// --- hirschman_condition -----------------------------------------------------------------

HirschmanResult hirschman_condition(const CountingProfile& prof,
                                    const momentseq::LogConvexSequence& M,
                                    double b) {
  if (!(b > 0)) throw precondition_error("hirschman: b must be positive");
  if (!M.normalized()) throw precondition_error("hirschman: M must be normalized");

  HirschmanResult res;
  res.threshold = 0.5 * M_PI * b;
  for (std::size_t i = 0; i < prof.radii.size(); ++i) {
    long N = prof.counts[i];
    double val = 0.0;
    if (N > 1) {
      double vmax = std::log(static_cast<double>(N));
      // substitute u = e^v: integral becomes int_0^{log N} M(v) e^{-v} dv
      bool hit_inf = false;
      auto integrand = [&](double v) {
        double t = momentseq::trace_function(M, v);
        if (t == kInf) {
          hit_inf = true;
          return 0.0;
        }
        return t * std::exp(-v);
      };
      int panels = std::max(16, static_cast<int>(vmax * 4));
      val = num::integrate_gl(integrand, 0.0, vmax, panels) / prof.radii[i];
      if (hit_inf) {
        res.trace_infinite = true;
        res.pass = true;
      }
    }
    res.per_radius.push_back(val);
    res.max_integral = std::max(res.max_integral, val);
  }
  if (res.max_integral > res.threshold) res.pass = true;
  return res;
}

// --- jensen_zero_bound ---------------------------------------------------------------------

long jensen_zero_bound(const std::function<double(double)>& m_envelope,
                       double alpha, double r, double C, int k,
                       double g0_abs) {
  if (!(alpha > 1)) throw precondition_error("jensen: alpha must exceed 1");
  if (!(r > 0) || !(C > 0) || !(g0_abs > 0))
    throw precondition_error("jensen: r, C, |g(0)| must be positive");
  double m = m_envelope(alpha * r);
  if (!(m > 0)) throw precondition_error("jensen: envelope not positive");
  double bound = (std::log(C) + std::log(m) - k * std::log(alpha * r) -
                  std::log(g0_abs)) /
                 std::log(alpha);
  if (bound <= 0) return 0;
  return static_cast<long>(std::ceil(bound - 1e-12));
}

}  // namespace rcid::uniqueness
