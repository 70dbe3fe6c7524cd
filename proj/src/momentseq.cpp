#include "rcid/momentseq.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

namespace rcid::momentseq {

using num::ls_slope;

// --- MomentSequence ---------------------------------------------------------

MomentSequence MomentSequence::from_values(
    const std::vector<double>& values, SupportClass support,
    std::optional<std::vector<double>> absolute_values,
    std::optional<double> compact_bound) {
  MomentSequence s;
  s.support_ = support;
  s.compact_bound_ = compact_bound;
  s.log_abs_.reserve(values.size());
  s.signs_.reserve(values.size());
  for (double v : values) {
    if (!std::isfinite(v)) throw data_error("moment entry is not finite");
    s.signs_.push_back(v > 0 ? 1 : (v < 0 ? -1 : 0));
    s.log_abs_.push_back(v == 0.0 ? -kInf : std::log(std::abs(v)));
  }
  if (absolute_values) {
    for (double v : *absolute_values) {
      if (!std::isfinite(v) || v < 0)
        throw data_error("absolute moment entry invalid");
      s.log_abs_moments_.push_back(v == 0.0 ? -kInf : std::log(v));
    }
  }
  s.validate();
  return s;
}

MomentSequence MomentSequence::from_log_values(std::vector<double> log_values,
                                               SupportClass support) {
  MomentSequence s;
  s.support_ = support;
  for (double lv : log_values) {
    if (std::isnan(lv) || lv == kInf)
      throw data_error("log moment entry invalid");
    s.signs_.push_back(lv == -kInf ? 0 : 1);
  }
  s.log_abs_ = std::move(log_values);
  s.validate();
  return s;
}

void MomentSequence::validate() const {
  if (log_abs_.empty()) throw data_error("empty moment table");
  if (signs_[0] <= 0) throw data_error("s(0) must be positive (total mass)");
  const int K = max_order();
  for (int m = 1; m <= K; ++m) {
    if (support_ == SupportClass::half_line && signs_[m] < 0)
      throw data_error("half-line moments must be nonnegative");
    if (support_ == SupportClass::real_line && m % 2 == 0 && signs_[m] < 0)
      throw data_error("even-order moments must be nonnegative");
  }
  if (support_ == SupportClass::half_line) {
    // Cauchy-Schwarz: s(m)^2 <= s(m-1) s(m+1) for a nonnegative measure
    bool all_pos = true;
    for (int m = 0; m <= K; ++m) all_pos = all_pos && signs_[m] > 0;
    if (all_pos) {
      for (int m = 1; m + 1 <= K; ++m) {
        double lhs = 2.0 * log_abs_[m];
        double rhs = log_abs_[m - 1] + log_abs_[m + 1];
        if (lhs > rhs + 1e-9)
          throw data_error("Cauchy-Schwarz violated at order " +
                           std::to_string(m));
      }
    }
  }
}

int MomentSequence::sign(int m) const { return signs_.at(m); }

double MomentSequence::log_moment(int m) const {
  if (signs_.at(m) < 0)
    throw data_error("log_moment: negative moment at order " +
                     std::to_string(m));
  return log_abs_[m];
}

double MomentSequence::moment(int m) const {
  return signs_.at(m) * std::exp(log_abs_[m]);
}

double MomentSequence::log_absolute_moment(int m) const {
  if (!has_absolute()) throw data_error("no absolute-moment table");
  return log_abs_moments_.at(m);
}

MomentSequence MomentSequence::normal(int K) {
  std::vector<double> lv(K + 1, -kInf);
  for (int m = 0; m <= K; m += 2)
    lv[m] = num::log_double_factorial_odd(m / 2);
  MomentSequence s;
  s.support_ = SupportClass::real_line;
  s.log_abs_ = lv;
  s.signs_.assign(K + 1, 0);
  for (int m = 0; m <= K; m += 2) s.signs_[m] = 1;
  // absolute moments E|N|^m = 2^{m/2} Gamma((m+1)/2)/sqrt(pi)
  for (int m = 0; m <= K; ++m)
    s.log_abs_moments_.push_back(0.5 * m * std::log(2.0) +
                                 std::lgamma(0.5 * (m + 1)) -
                                 0.5 * std::log(M_PI));
  s.validate();
  return s;
}

MomentSequence MomentSequence::lognormal(int K) {
  std::vector<double> lv(K + 1);
  for (int m = 0; m <= K; ++m) lv[m] = 0.5 * m * m;
  return from_log_values(std::move(lv), SupportClass::half_line);
}

MomentSequence MomentSequence::chi_squared(int K, double dof) {
  if (dof <= 0) throw precondition_error("chi_squared: dof must be positive");
  std::vector<double> lv(K + 1);
  for (int m = 0; m <= K; ++m)
    lv[m] = m * std::log(2.0) + std::lgamma(m + 0.5 * dof) -
            std::lgamma(0.5 * dof);
  return from_log_values(std::move(lv), SupportClass::half_line);
}

MomentSequence MomentSequence::gamma_dist(int K, double shape, double rate) {
  if (shape <= 0 || rate <= 0)
    throw precondition_error("gamma_dist: shape and rate must be positive");
  std::vector<double> lv(K + 1);
  for (int m = 0; m <= K; ++m)
    lv[m] = std::lgamma(shape + m) - std::lgamma(shape) - m * std::log(rate);
  return from_log_values(std::move(lv), SupportClass::half_line);
}

MomentSequence MomentSequence::factorial(int K) {
  std::vector<double> lv(K + 1);
  for (int m = 0; m <= K; ++m) lv[m] = num::log_factorial(m);
  return from_log_values(std::move(lv), SupportClass::half_line);
}

MomentSequence MomentSequence::exp_power_growth(int K, double alpha) {
  std::vector<double> lv(K + 1, 0.0);
  for (int m = 1; m <= K; ++m) lv[m] = std::pow(m, alpha);
  return from_log_values(std::move(lv), SupportClass::half_line);
}

MomentSequence MomentSequence::abs_normal_power(int K, double r) {
  if (r <= 0) throw precondition_error("abs_normal_power: r must be positive");
  std::vector<double> lv(K + 1);
  for (int m = 0; m <= K; ++m) {
    double q = r * m;
    lv[m] = 0.5 * q * std::log(2.0) + std::lgamma(0.5 * (q + 1)) -
            0.5 * std::log(M_PI);
  }
  return from_log_values(std::move(lv), SupportClass::half_line);
}

// --- LogConvexSequence --------------------------------------------------------

LogConvexSequence LogConvexSequence::from_values(const std::vector<double>& M) {
  std::vector<double> lm;
  lm.reserve(M.size());
  for (double v : M) {
    if (std::isnan(v) || v < 0) throw data_error("log-convex entries must be positive");
    if (v == 0.0) throw data_error("log-convex entries must be positive");
    lm.push_back(std::log(v));
  }
  return from_log_values(std::move(lm));
}

LogConvexSequence LogConvexSequence::from_log_values(std::vector<double> logM) {
  if (logM.empty()) throw data_error("empty sequence");
  LogConvexSequence s;
  for (std::size_t m = 1; m + 1 < logM.size(); ++m) {
    if (logM[m] == kInf) continue;  // +inf entries are allowed
    if (2.0 * logM[m] > logM[m - 1] + logM[m + 1] + 1e-9)
      throw data_error("sequence is not log-convex at m=" + std::to_string(m));
  }
  s.normalized_ = std::abs(logM[0]) < 1e-12;
  s.log_m_ = std::move(logM);
  return s;
}

LogConvexSequence LogConvexSequence::ones(int K) {
  return from_log_values(std::vector<double>(K + 1, 0.0));
}

LogConvexSequence LogConvexSequence::factorial(int K) {
  std::vector<double> lm(K + 1);
  for (int m = 0; m <= K; ++m) lm[m] = num::log_factorial(m);
  return from_log_values(std::move(lm));
}

// --- reports -------------------------------------------------------------------

std::string verdict_name(Verdict v) {
  switch (v) {
    case Verdict::determinate_evidence: return "determinate_evidence";
    case Verdict::indeterminate_evidence: return "indeterminate_evidence";
    default: return "inconclusive";
  }
}

std::string divergence_name(DivergenceClass c) {
  switch (c) {
    case DivergenceClass::divergent: return "divergent";
    case DivergenceClass::convergent: return "convergent";
    default: return "borderline";
  }
}

// --- carleman_sums ----------------------------------------------------------------

namespace {

// fit gamma of a_m ~ m^gamma over the last half of the available orders
double fit_growth_exponent(const std::vector<int>& ms,
                           const std::vector<double>& log_a, int* lo = nullptr,
                           int* hi = nullptr) {
  std::size_t n = ms.size();
  std::size_t start = n / 2;
  if (n - start < 3) start = n >= 3 ? n - 3 : 0;
  std::vector<double> x, y;
  for (std::size_t i = start; i < n; ++i) {
    x.push_back(std::log(static_cast<double>(ms[i])));
    y.push_back(log_a[i]);
  }
  if (lo) *lo = ms[start];
  if (hi) *hi = ms.back();
  return ls_slope(x, y);
}

DivergenceClass classify_gamma(double gamma) {
  if (gamma < 0.95) return DivergenceClass::divergent;
  if (gamma > 1.05) return DivergenceClass::convergent;
  return DivergenceClass::borderline;
}

}  // namespace

CarlemanResult carleman_sums(const MomentSequence& s) {
  const int K = s.max_order();
  if (K < 6) throw precondition_error("carleman_sums: need K >= 6");

  CarlemanResult r;
  // growth fits are done on the mass-normalized sequence s(m)/s(0), which
  // makes the divergence class invariant under positive scaling
  const double lm0 = s.log_moment(0);

  // Hamburger partial sum over even orders
  std::vector<int> h_ms;
  std::vector<double> h_log_root;  // log (s(2m)/s(0))^{1/(2m)}
  bool zero_seen = false;
  for (int m = 1; 2 * m <= K; ++m) {
    double lm = s.log_moment(2 * m);
    if (lm == -kInf) {
      zero_seen = true;
      r.hamburger_partial = kInf;
      continue;
    }
    if (std::isfinite(r.hamburger_partial))
      r.hamburger_partial += std::exp(-lm / (2.0 * m));
    h_ms.push_back(m);
    h_log_root.push_back((lm - lm0) / (2.0 * m));
  }

  // Stieltjes partial sum (half-line variant, all orders)
  std::vector<int> st_ms;
  std::vector<double> st_log_root;  // log (s(m)/s(0))^{1/(2m)}
  bool stieltjes_defined =
      s.support() == SupportClass::half_line || s.has_absolute();
  if (stieltjes_defined) {
    for (int m = 1; m <= K; ++m) {
      double lm = s.support() == SupportClass::half_line
                      ? s.log_moment(m)
                      : s.log_absolute_moment(m);
      if (lm == -kInf) {
        zero_seen = true;
        r.stieltjes_partial = kInf;
        continue;
      }
      if (std::isfinite(r.stieltjes_partial))
        r.stieltjes_partial += std::exp(-lm / m);
      st_ms.push_back(m);
      st_log_root.push_back((lm - lm0) / (2.0 * m));
    }
  } else {
    r.stieltjes_partial = std::nan("");
  }

  if (zero_seen) {
    // vanishing moments contribute +inf reciprocals: compact-support limit
    r.divergence_class = DivergenceClass::divergent;
    r.zero_moment_rule = true;
    return r;
  }

  if (h_ms.size() >= 3)
    r.gamma_hamburger =
        fit_growth_exponent(h_ms, h_log_root, &r.window_lo, &r.window_hi);
  if (st_ms.size() >= 3) r.gamma_stieltjes = fit_growth_exponent(st_ms, st_log_root);

  double gamma = (s.support() == SupportClass::half_line && st_ms.size() >= 3)
                     ? r.gamma_stieltjes
                     : r.gamma_hamburger;
  r.divergence_class = classify_gamma(gamma);
  if (s.support() == SupportClass::compact)
    r.divergence_class = DivergenceClass::divergent;
  return r;
}

// --- growth_ratio_tests --------------------------------------------------------------

std::vector<RatioCriterion> growth_ratio_tests(const MomentSequence& s,
                                               double slope_tol) {
  const int K = s.max_order();
  if (K < 6) throw precondition_error("growth_ratio_tests: need K >= 6");
  const bool half = s.support() == SupportClass::half_line;

  struct Series {
    std::string name;
    bool applicable;
    std::vector<int> ms;
    std::vector<double> log_stat;
  };
  std::vector<Series> series;

  // Hardy precondition: s(m+1)/(m^2 s(m)), half-line only
  {
    Series ser{"hardy_ratio", half, {}, {}};
    if (half)
      for (int m = 1; m + 1 <= K; ++m) {
        double l = s.log_moment(m + 1) - s.log_moment(m) - 2.0 * std::log(m);
        if (!std::isfinite(l)) continue;
        ser.ms.push_back(m);
        ser.log_stat.push_back(l);
      }
    series.push_back(std::move(ser));
  }
  // (P.A.2.b): s(m)^{1/(2m)} / m, half-line only
  {
    Series ser{"hardy_root", half, {}, {}};
    if (half)
      for (int m = 1; m <= K; ++m) {
        double l = s.log_moment(m) / (2.0 * m) - std::log(m);
        if (!std::isfinite(l)) continue;
        ser.ms.push_back(m);
        ser.log_stat.push_back(l);
      }
    series.push_back(std::move(ser));
  }
  // (C.A.1.c): s(2m)^{1/(2m)} / (2m)
  {
    Series ser{"cramer_root", true, {}, {}};
    for (int m = 1; 2 * m <= K; ++m) {
      double l = s.log_moment(2 * m) / (2.0 * m) - std::log(2.0 * m);
      if (!std::isfinite(l)) continue;
      ser.ms.push_back(m);
      ser.log_stat.push_back(l);
    }
    series.push_back(std::move(ser));
  }
  // (C.A.1.d): (s(2m)/(2m)!)^{1/m}
  {
    Series ser{"cramer_factorial", true, {}, {}};
    for (int m = 1; 2 * m <= K; ++m) {
      double l = (s.log_moment(2 * m) - num::log_factorial(2 * m)) / m;
      if (!std::isfinite(l)) continue;
      ser.ms.push_back(m);
      ser.log_stat.push_back(l);
    }
    series.push_back(std::move(ser));
  }

  std::vector<RatioCriterion> out;
  for (auto& ser : series) {
    RatioCriterion c;
    c.name = ser.name;
    c.applicable = ser.applicable && ser.ms.size() >= 4;
    if (c.applicable) {
      std::size_t start = ser.ms.size() / 2;
      std::vector<double> x, y;
      double mx = -kInf;
      for (std::size_t i = start; i < ser.ms.size(); ++i) {
        x.push_back(std::log(static_cast<double>(ser.ms[i])));
        y.push_back(ser.log_stat[i]);
        mx = std::max(mx, ser.log_stat[i]);
      }
      c.tail_max = std::exp(mx);
      c.trend_slope = ls_slope(x, y);
      c.pass = c.trend_slope <= slope_tol;
    }
    out.push_back(std::move(c));
  }
  return out;
}

// --- krein_lin_density_tests ------------------------------------------------------------

KreinLinResult krein_lin_density_tests(
    const std::function<double(double)>& f,
    const std::function<double(double)>& f_prime, SupportClass support,
    const IntegrationCutoffs& cut) {
  if (!(cut.x0 > 0) || !(cut.x_max > cut.x0))
    throw precondition_error("krein: cutoffs must satisfy 0 < x0 < x_max");
  const bool half = support == SupportClass::half_line;

  // integrand of the Krein integral in the integration variable x; density
  // values underflow on far tails, so the usable range is detected first
  auto neg_log_f = [&](double x) {
    double v = half ? f(x * x) : f(x);
    if (!(v > 0)) throw precondition_error("krein: density not positive on tail");
    return -std::log(v);
  };

  // largest x with a representable density value
  double x_hi = cut.x_max;
  {
    double probe = cut.x0;
    double last_good = -1.0;
    while (probe <= cut.x_max * (1 + 1e-12)) {
      double v = half ? f(probe * probe) : f(probe);
      if (v > 1e-290 && std::isfinite(v))
        last_good = probe;
      else if (last_good > 0)
        break;
      probe *= 1.18;
    }
    if (last_good < cut.x0 * 4)
      throw precondition_error("krein: density not positive on tail");
    x_hi = std::min(cut.x_max, last_good);
  }

  KreinLinResult r;

  // tail exponent of -log f: fit over the last usable decade
  {
    std::vector<double> lx, ly;
    double lo = x_hi / 10.0, hi = x_hi;
    for (int i = 0; i < cut.tail_samples; ++i) {
      double x = lo * std::pow(hi / lo, static_cast<double>(i) /
                                            (cut.tail_samples - 1));
      double g = neg_log_f(x);
      if (g <= 0) continue;  // density above 1 on the tail: skip sample
      lx.push_back(std::log(x));
      ly.push_back(std::log(g));
    }
    if (lx.size() < 4) {
      r.quadrature_converged = false;
      r.contribution = Verdict::inconclusive;
      return r;
    }
    r.tail_exponent = ls_slope(lx, ly);
  }

  // adaptive quadrature in the log variable keeps the huge range tractable
  bool converged = true;
  double body = num::integrate_adaptive(
      [&](double v) {
        double x = std::exp(v);
        return neg_log_f(x) / (1.0 + x * x) * x;
      },
      std::log(cut.x0), std::log(x_hi), 1e-8, &converged);
  if (!half) body *= 2.0;  // even density: both tails
  r.quadrature_converged = converged;

  const double a = r.tail_exponent;
  if (a >= 0.95) {
    r.krein_finite = false;
    r.krein_value = kInf;
  } else {
    r.krein_finite = true;
    // power-law tail extrapolation: integrand ~ c x^{a-2} with c X^a = gX,
    // so the tail beyond X integrates to gX / ((1-a) X)
    double gX = neg_log_f(x_hi);
    double tail = gX / ((1.0 - a) * x_hi);
    r.krein_value = body + (half ? tail : 2.0 * tail);
  }

  // Lin condition: -x f'(x)/f(x) nondecreasing to infinity on the tail
  {
    std::vector<double> L;
    double lo = std::max(cut.x0, 1.0),
           hi = half ? std::min(x_hi * x_hi, cut.x_max) : x_hi;
    for (int i = 0; i < cut.tail_samples; ++i) {
      double x = lo * std::pow(hi / lo, static_cast<double>(i) /
                                            (cut.tail_samples - 1));
      double fv = f(x);
      if (!(fv > 0)) throw precondition_error("krein: density not positive on tail");
      L.push_back(-x * f_prime(x) / fv);
    }
    bool monotone = true;
    for (std::size_t i = 1; i < L.size(); ++i)
      if (L[i] < L[i - 1] - 1e-9 * std::max(1.0, std::abs(L[i - 1])))
        monotone = false;
    r.lin_holds = monotone && L.back() > L.front();
  }

  if (!r.quadrature_converged)
    r.contribution = Verdict::inconclusive;
  else if (r.krein_finite)
    r.contribution = Verdict::indeterminate_evidence;
  else if (r.lin_holds)
    r.contribution = Verdict::determinate_evidence;  // Carleman-condition evidence
  else
    r.contribution = Verdict::inconclusive;
  return r;
}

// --- trace function and convex regularization ----------------------------------------------

double trace_function(const LogConvexSequence& M, double x) {
  if (!M.normalized()) throw precondition_error("trace_function: M must be normalized");
  const int K = M.max_order();
  double best = 0.0;  // m = 0 line: 0*x - log M_0 = 0
  int argmax = 0;
  for (int m = 1; m <= K; ++m) {
    double lm = M.log_value(m);
    if (lm == kInf) continue;
    double v = m * x - lm;
    if (v > best) {
      best = v;
      argmax = m;
    }
  }
  if (argmax == K && K >= 2) {
    double dK = x - (M.log_value(K) - M.log_value(K - 1));
    double dK1 = x - (M.log_value(K - 1) - M.log_value(K - 2));
    if (dK > 0 && dK >= dK1 - 1e-12) return kInf;
  }
  return best;
}

namespace {

// exact conjugation against the piecewise-linear trace: evaluate
// sup_{x>=0} (m x - M(x)) over the breakpoint candidates
std::vector<double> conjugate_log_sequence(const std::vector<double>& lm) {
  const int K = static_cast<int>(lm.size()) - 1;
  std::vector<double> xs{0.0};
  for (int i = 0; i <= K; ++i)
    for (int j = i + 1; j <= K; ++j) {
      if (!std::isfinite(lm[i]) || !std::isfinite(lm[j])) continue;
      double x = (lm[j] - lm[i]) / (j - i);
      if (x >= 0) xs.push_back(x);
    }
  std::sort(xs.begin(), xs.end());
  xs.push_back(xs.back() + 1.0);

  auto trace_at = [&](double x) {
    double best = -kInf;
    for (int m = 0; m <= K; ++m)
      if (std::isfinite(lm[m])) best = std::max(best, m * x - lm[m]);
    return best;
  };

  std::vector<double> out(K + 1, -kInf);
  for (int m = 0; m <= K; ++m) {
    double best = -kInf;
    for (double x : xs) best = std::max(best, m * x - trace_at(x));
    out[m] = best;
  }
  return out;
}

}  // namespace

LogConvexSequence convex_regularization(const LogConvexSequence& M) {
  std::vector<double> lm(M.max_order() + 1);
  for (int m = 0; m <= M.max_order(); ++m) lm[m] = M.log_value(m);
  auto reg = conjugate_log_sequence(lm);
  for (std::size_t m = 0; m < reg.size(); ++m) reg[m] = std::min(reg[m], lm[m]);
  return LogConvexSequence::from_log_values(std::move(reg));
}

LogConvexSequence convex_regularization(const std::vector<double>& raw) {
  std::vector<double> lm;
  lm.reserve(raw.size());
  for (double v : raw) {
    if (!(v > 0)) throw data_error("convex_regularization: entries must be positive");
    lm.push_back(std::log(v));
  }
  auto reg = conjugate_log_sequence(lm);
  for (std::size_t m = 0; m < reg.size(); ++m) reg[m] = std::min(reg[m], lm[m]);
  return LogConvexSequence::from_log_values(std::move(reg));
}

// --- qaw_check -------------------------------------------------------------------------

QawResult qaw_check(const std::function<double(double)>& W, bool half_line,
                    const std::vector<double>& grid) {
  QawResult r{QawResult::Outcome::inconclusive, false, 0.0, ""};
  if (grid.size() < 8 || grid.back() / grid.front() < 100.0) {
    r.witness = "grid too short for tail fit";
    return r;
  }
  auto V = [&](double s) { return half_line ? W(s * s) : W(s); };
  // weights like exp(s/log s) overflow on far tails: restrict to the
  // representable part of the grid
  std::vector<double> usable;
  for (double s : grid) {
    double v = V(s);
    if (!(v > 0)) throw precondition_error("qaw_check: W must be positive on grid");
    if (std::isfinite(v)) usable.push_back(s);
  }
  if (usable.size() < 8 || usable.back() / usable.front() < 100.0) {
    r.witness = "usable (finite-valued) grid too short for tail fit";
    return r;
  }

  // (QAW.2)-style convexity of x -> log W(e^x) on the sampled tail
  std::size_t tail_start = usable.size() * 2 / 5;
  std::vector<double> xs, hs;
  for (std::size_t i = tail_start; i < usable.size(); ++i) {
    xs.push_back(std::log(usable[i]));
    hs.push_back(std::log(V(usable[i])));
  }
  bool convex = true;
  for (std::size_t i = 1; i + 1 < xs.size(); ++i) {
    double d1 = (hs[i] - hs[i - 1]) / (xs[i] - xs[i - 1]);
    double d2 = (hs[i + 1] - hs[i]) / (xs[i + 1] - xs[i]);
    if (d2 < d1 - 1e-8 * std::max(1.0, std::abs(d1))) convex = false;
  }
  r.log_convex_tail = convex;

  // divergence of int log W(s)/(1+s^2) ds classified by the integrand decay
  // over the last usable decade
  std::vector<double> lx, ly;
  for (double s : usable) {
    if (s < usable.back() / 10.0) continue;
    double g = std::log(V(s)) / (1.0 + s * s);
    if (g <= 0) continue;
    lx.push_back(std::log(s));
    ly.push_back(std::log(g));
  }
  bool divergent;
  if (lx.size() < 4) {
    divergent = false;  // log W vanishes on the tail
    r.integrand_decay_exponent = kInf;
  } else {
    r.integrand_decay_exponent = -ls_slope(lx, ly);
    divergent = r.integrand_decay_exponent <= 1.2;
  }

  if (convex && divergent) {
    r.outcome = QawResult::Outcome::pass;
  } else {
    r.outcome = QawResult::Outcome::fail;
    r.witness = !convex ? "log W(e^x) not convex on tail"
                        : "integral of log W(s)/(1+s^2) converges (decay "
                          "exponent " +
                              std::to_string(r.integrand_decay_exponent) + ")";
  }
  return r;
}

// --- multivariate determinacy ------------------------------------------------------------

DeterminacyReport multivariate_determinacy(
    const std::vector<MomentSequence>& marginals,
    const std::vector<std::vector<double>>& affine_matrix,
    const std::vector<double>& shift, int q) {
  const int d = static_cast<int>(marginals.size());
  if (q < 0 || q > d)
    throw precondition_error("multivariate_determinacy: q out of range");
  if (static_cast<int>(affine_matrix.size()) != d ||
      static_cast<int>(shift.size()) != d)
    throw precondition_error("multivariate_determinacy: affine shape mismatch");
  Eigen::MatrixXd A(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) A(i, j) = affine_matrix[i][j];
  Eigen::FullPivLU<Eigen::MatrixXd> lu(A);
  if (!lu.isInvertible())
    throw precondition_error("multivariate_determinacy: affine map is singular");

  DeterminacyReport rep;
  bool all_divergent = true;
  double max_gamma = -kInf;
  for (int j = 0; j < d; ++j) {
    const bool hamburger = j < q;
    CarlemanResult c = carleman_sums(marginals[j]);
    DivergenceClass cls;
    double gamma;
    if (hamburger) {
      gamma = c.gamma_hamburger;
      cls = c.zero_moment_rule
                ? DivergenceClass::divergent
                : (gamma < 0.95 ? DivergenceClass::divergent
                                : (gamma > 1.05 ? DivergenceClass::convergent
                                                : DivergenceClass::borderline));
    } else {
      if (marginals[j].support() != SupportClass::half_line &&
          marginals[j].support() != SupportClass::compact)
        throw precondition_error(
            "multivariate_determinacy: axis " + std::to_string(j + 1) +
            " needs half-line support for the Stieltjes form");
      gamma = c.gamma_stieltjes;
      cls = c.divergence_class;
    }
    max_gamma = std::max(max_gamma, gamma);
    CriterionResult cr;
    cr.name = hamburger ? "carleman_hamburger" : "carleman_stieltjes";
    cr.statistic = gamma;
    cr.fired = cls == DivergenceClass::divergent;
    cr.note = "axis " + std::to_string(j + 1);
    all_divergent = all_divergent && cr.fired;
    rep.criteria.push_back(std::move(cr));
  }
  rep.growth_exponent = max_gamma;
  rep.verdict = all_divergent ? Verdict::determinate_evidence
                              : Verdict::inconclusive;
  return rep;
}

// --- aggregate assessment -------------------------------------------------------------------

DeterminacyReport assess(const MomentSequence& s,
                         const std::function<double(double)>* density,
                         const std::function<double(double)>* density_prime,
                         const IntegrationCutoffs& cutoffs) {
  DeterminacyReport rep;
  bool determinate_fired = false, krein_fired = false;

  CarlemanResult c = carleman_sums(s);
  rep.growth_exponent = s.support() == SupportClass::half_line
                            ? c.gamma_stieltjes
                            : c.gamma_hamburger;
  {
    CriterionResult cr;
    cr.name = s.support() == SupportClass::half_line ? "carleman_stieltjes"
                                                     : "carleman_hamburger";
    cr.statistic = rep.growth_exponent;
    cr.fired = c.divergence_class == DivergenceClass::divergent;
    determinate_fired = determinate_fired || cr.fired;
    rep.criteria.push_back(std::move(cr));
  }

  for (const auto& rc : growth_ratio_tests(s)) {
    CriterionResult cr;
    cr.name = rc.name;
    cr.statistic = rc.trend_slope;
    cr.applicable = rc.applicable;
    cr.fired = rc.applicable && rc.pass;
    determinate_fired = determinate_fired || cr.fired;
    rep.criteria.push_back(std::move(cr));
  }

  if (density && density_prime) {
    KreinLinResult kl =
        krein_lin_density_tests(*density, *density_prime, s.support(), cutoffs);
    CriterionResult krein;
    krein.name = "krein";
    krein.statistic = kl.tail_exponent;
    krein.fired = kl.krein_finite;
    krein_fired = kl.krein_finite;
    rep.criteria.push_back(std::move(krein));
    CriterionResult lin;
    lin.name = "lin";
    lin.statistic = kl.lin_holds ? 1.0 : 0.0;
    lin.fired = !kl.krein_finite && kl.lin_holds;
    determinate_fired = determinate_fired || lin.fired;
    rep.criteria.push_back(std::move(lin));
  }

  if (determinate_fired && !krein_fired)
    rep.verdict = Verdict::determinate_evidence;
  else if (krein_fired && !determinate_fired)
    rep.verdict = Verdict::indeterminate_evidence;
  else
    rep.verdict = Verdict::inconclusive;
  return rep;
}

}  // namespace rcid::momentseq
