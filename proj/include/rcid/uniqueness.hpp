#pragma once

#include <functional>
#include <string>
#include <vector>

#include "rcid/momentseq.hpp"
#include "rcid/numerics.hpp"

namespace rcid::uniqueness {

// Finite point cloud in R^p, either given directly or realized
// deterministically from a named generator.
class SupportSet {
 public:
  static SupportSet from_points(std::vector<std::vector<double>> pts);
  // cartesian product of per-axis value lists
  static SupportSet grid(const std::vector<std::vector<double>>& axis_values);
  // p = 2 fan {x2 = n x1}: value-major enumeration, x1 = 1, 2, ... over all
  // slopes, truncated to the budget
  static SupportSet fan(const std::vector<double>& slopes, int budget);
  // p = 2 staircase {x2 = ceil(x1)}: x1 = lo + (i + 1/2) (hi - lo)/budget
  static SupportSet staircase(double lo, double hi, int budget);
  // p = 1 geometric {ratio^i : i = 1..count}
  static SupportSet geometric(double ratio, int count);
  static SupportSet custom(int p, int budget,
                           const std::function<std::vector<double>(int)>& gen);

  int dimension() const { return p_; }
  std::size_t size() const { return points_.size(); }
  const std::vector<std::vector<double>>& points() const { return points_; }

 private:
  SupportSet(int p, std::vector<std::vector<double>> pts);
  int p_;
  std::vector<std::vector<double>> points_;
};

struct CountingProfile {
  std::vector<double> radii;  // increasing, positive
  std::vector<long> counts;   // N(r) = |V intersect (-r, r)|
  bool zero_excluded = true;
};

struct RankResult {
  bool full_rank = false;
  int rank = 0;
  int n_columns = 0;
  // graded-lex monomial exponents for the columns
  std::vector<std::vector<int>> monomials;
  // unit-norm witness polynomial coefficients when rank deficient
  std::vector<double> witness;
  std::vector<double> singular_values;
};

// Numerical rank of the degree-<=d monomial design matrix on V; a nullspace
// witness is the polynomial vanishing on V when the rank is deficient.
RankResult polynomial_uniqueness_rank(const SupportSet& V, int degree,
                                      double rank_tol = 1e-10);

CountingProfile counting_function(const SupportSet& V,
                                  std::vector<double> radii,
                                  bool exclude_zero = true, int axis = 0);

struct GrowthCheck {
  bool pass = false;
  double statistic_at_rmax = 0.0;
  double trend_slope = 0.0;
  std::vector<double> statistic;  // per radius
};

// (E.1): sup over an alpha-grid of log(alpha)/log(m(alpha t r)) * N(r),
// required to trend upward and exceed 1 at the largest radius for every t.
GrowthCheck growth_condition_e1(const CountingProfile& profile,
                                const std::function<double(double)>& m_envelope,
                                const std::vector<double>& t_grid,
                                double threshold = 1.0);
// (E.2): log N(r) / r
GrowthCheck growth_condition_e2(const CountingProfile& profile,
                                double threshold = 1.0);
// (E.4a): log^{*(n+1)}(N(r)) / r
GrowthCheck growth_condition_e4a(const CountingProfile& profile, int n,
                                 double threshold = 1.0);

// dispatching wrapper for config-driven use
struct GrowthConditionSpec {
  enum class Kind { e1, e2, e4a } kind = Kind::e2;
  std::function<double(double)> m_envelope;  // for e1
  std::vector<double> t_grid;                // for e1
  int n = 1;                                 // for e4a
  double threshold = 1.0;
};
GrowthCheck growth_condition_check(const CountingProfile& profile,
                                   const GrowthConditionSpec& spec);

struct HirschmanResult {
  bool pass = false;
  double max_integral = 0.0;
  double threshold = 0.0;  // pi b / 2
  bool trace_infinite = false;
  std::vector<double> per_radius;
};

// (1/r) int_1^{N(r)} M(log u)/u^2 du against pi b / 2
HirschmanResult hirschman_condition(const CountingProfile& profile,
                                    const momentseq::LogConvexSequence& M,
                                    double b);

// ceil(log(C m(alpha r) (alpha r)^{-k} / g0_abs) / log(alpha)), clamped at 0
long jensen_zero_bound(const std::function<double(double)>& m_envelope,
                       double alpha, double r, double C, int k,
                       double g0_abs = 1.0);

// iterated logarithm log^{*j}
double iterated_log(double t, int j);

}  // namespace rcid::uniqueness
