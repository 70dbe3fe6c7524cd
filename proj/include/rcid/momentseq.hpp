#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "rcid/numerics.hpp"

namespace rcid::momentseq {

enum class SupportClass { real_line, half_line, compact };

// Finite table of moments s(0..K), kept in log scale so factorial-size
// families (lognormal, (3m)!) stay representable well past K = 40.
// Signed moments are stored as (sign, log|s|); the determinacy criteria
// only ever consume nonnegative entries.
class MomentSequence {
 public:
  static MomentSequence from_values(const std::vector<double>& values,
                                    SupportClass support,
                                    std::optional<std::vector<double>>
                                        absolute_values = std::nullopt,
                                    std::optional<double> compact_bound =
                                        std::nullopt);
  static MomentSequence from_log_values(std::vector<double> log_values,
                                        SupportClass support);

  // named closed-form families, orders 0..K
  static MomentSequence normal(int K);                       // s(2m) = (2m-1)!!
  static MomentSequence lognormal(int K);                    // s(m) = e^{m^2/2}
  static MomentSequence chi_squared(int K, double dof);
  static MomentSequence gamma_dist(int K, double shape, double rate);
  static MomentSequence factorial(int K);                    // s(m) = m!
  static MomentSequence exp_power_growth(int K, double alpha);  // e^{m^alpha}
  static MomentSequence abs_normal_power(int K, double r);   // |N|^r

  int max_order() const { return static_cast<int>(log_abs_.size()) - 1; }
  SupportClass support() const { return support_; }
  std::optional<double> compact_bound() const { return compact_bound_; }

  int sign(int m) const;
  // log s(m); requires s(m) >= 0 (throws data_error otherwise).
  // s(m) == 0 is returned as -inf.
  double log_moment(int m) const;
  double moment(int m) const;  // may overflow to +-inf

  bool has_absolute() const { return !log_abs_moments_.empty(); }
  double log_absolute_moment(int m) const;

 private:
  MomentSequence() = default;
  void validate() const;
  std::vector<double> log_abs_;
  std::vector<int> signs_;
  std::vector<double> log_abs_moments_;  // optional absolute-moment table
  SupportClass support_ = SupportClass::real_line;
  std::optional<double> compact_bound_;
};

// Log-convex sequence (M_m), M_0 = 1 when normalized; +inf entries allowed.
class LogConvexSequence {
 public:
  static LogConvexSequence from_values(const std::vector<double>& M);
  static LogConvexSequence from_log_values(std::vector<double> logM);
  static LogConvexSequence ones(int K);
  static LogConvexSequence factorial(int K);

  int max_order() const { return static_cast<int>(log_m_.size()) - 1; }
  bool normalized() const { return normalized_; }
  double log_value(int m) const { return log_m_.at(m); }
  double value(int m) const { return std::exp(log_m_.at(m)); }

 private:
  LogConvexSequence() = default;
  std::vector<double> log_m_;
  bool normalized_ = false;
};

enum class Verdict { determinate_evidence, indeterminate_evidence, inconclusive };
std::string verdict_name(Verdict v);

struct CriterionResult {
  std::string name;       // e.g. "carleman_hamburger", "krein", "hardy"
  double statistic = 0.0;
  bool applicable = true;
  bool fired = false;     // the criterion's conclusion holds
  std::string note;
};

struct DeterminacyReport {
  Verdict verdict = Verdict::inconclusive;
  std::vector<CriterionResult> criteria;
  double growth_exponent = 0.0;  // fitted gamma
};

enum class DivergenceClass { divergent, convergent, borderline };
std::string divergence_name(DivergenceClass c);

struct CarlemanResult {
  double hamburger_partial = 0.0;  // sum_{2m<=K} s(2m)^{-1/(2m)}
  double stieltjes_partial = 0.0;  // sum_{m<=K} s(m)^{-1/m} (half-line variant)
  double gamma_hamburger = 0.0;    // fit of s(2m)^{1/(2m)} ~ m^gamma
  double gamma_stieltjes = 0.0;    // fit of s(m)^{1/(2m)} ~ m^gamma
  DivergenceClass divergence_class = DivergenceClass::convergent;
  int window_lo = 0, window_hi = 0;
  bool zero_moment_rule = false;   // class forced by a vanishing moment
};

// Carleman partial sums and the finite-order divergence classification.
// The class is decided by the growth exponent of the support-appropriate
// root sequence, cutoff 1 +- 0.05.
CarlemanResult carleman_sums(const MomentSequence& s);

struct RatioCriterion {
  std::string name;
  double tail_max = 0.0;
  double trend_slope = 0.0;  // of log statistic against log m
  bool applicable = true;
  bool pass = false;         // bounded => sufficient condition holds
};

// Hardy/Cramer-type ratio tests, each classified by the tail trend of its
// statistic (bounded <=> slope below tolerance).
std::vector<RatioCriterion> growth_ratio_tests(const MomentSequence& s,
                                               double slope_tol = 0.05);

struct IntegrationCutoffs {
  double x0 = 1.0;       // start of the declared tail region
  double x_max = 1e6;    // quadrature cutoff
  int tail_samples = 48; // samples for the tail fit and the Lin check
};

struct KreinLinResult {
  bool krein_finite = false;
  double krein_value = 0.0;        // +inf when classified divergent
  double tail_exponent = 0.0;      // a in -log f(x) ~ c x^a
  bool lin_holds = false;
  bool quadrature_converged = true;
  Verdict contribution = Verdict::inconclusive;
};

KreinLinResult krein_lin_density_tests(
    const std::function<double(double)>& f,
    const std::function<double(double)>& f_prime, SupportClass support,
    const IntegrationCutoffs& cutoffs = {});

// trace function M(x) = sup_m (m x - log M_m); +inf is reported when the
// truncated sup is still increasing at m = K with non-decreasing increments
double trace_function(const LogConvexSequence& M, double x);

LogConvexSequence convex_regularization(const LogConvexSequence& M);
LogConvexSequence convex_regularization(const std::vector<double>& raw);

struct QawResult {
  enum class Outcome { pass, fail, inconclusive } outcome;
  bool log_convex_tail = false;
  double integrand_decay_exponent = 0.0;  // b in log W(s)/(1+s^2) ~ s^{-b}
  std::string witness;
};

QawResult qaw_check(const std::function<double(double)>& W, bool half_line,
                    const std::vector<double>& grid);

// Per-axis Carleman classification (Hamburger for axes < q, Stieltjes
// beyond), min-over-axes verdict. The affine map is validated and recorded;
// marginals are expected in the transformed coordinates.
DeterminacyReport multivariate_determinacy(
    const std::vector<MomentSequence>& marginals,
    const std::vector<std::vector<double>>& affine_matrix,
    const std::vector<double>& shift, int q);

// Aggregate single-measure report combining moment and (optional) density
// criteria; used by the determinacy pipeline.
DeterminacyReport assess(
    const MomentSequence& s,
    const std::function<double(double)>* density = nullptr,
    const std::function<double(double)>* density_prime = nullptr,
    const IntegrationCutoffs& cutoffs = {});

}  // namespace rcid::momentseq
