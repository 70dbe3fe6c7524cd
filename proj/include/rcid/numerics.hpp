#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace rcid {

// Error taxonomy shared by all modules.
// data_error: the input violates a documented type invariant.
// precondition_error: an operation was called outside its contract.
// numerical_error: a computation could not reach its declared tolerance.
struct data_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct precondition_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct numerical_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline constexpr double kInf = std::numeric_limits<double>::infinity();

namespace num {

// --- deterministic counter-based RNG -----------------------------------
//
// All randomness flows from one seed. Streams are derived by hashing the
// seed with a tag; values within a stream are a pure function of the
// counter, so parallel evaluation order cannot change results.

std::uint64_t splitmix64(std::uint64_t x);

class RngStream {
 public:
  RngStream(std::uint64_t seed, const std::string& tag);
  // value for a given counter; identical for identical (seed, tag, counter)
  double uniform(std::uint64_t counter) const;       // U(0,1), never 0 or 1
  double normal(std::uint64_t counter) const;        // Box-Muller
  double cauchy(std::uint64_t counter) const;
  // stateful convenience draws (single-threaded use)
  double next_uniform() { return uniform(counter_++); }
  double next_normal() { return normal(counter_++); }
  std::size_t next_index(const std::vector<double>& cumulative_weights);

 private:
  std::uint64_t key_ = 0;
  std::uint64_t counter_ = 0;
};

// --- quadrature ---------------------------------------------------------

struct GaussLegendre {
  std::vector<double> nodes;    // on (-1, 1)
  std::vector<double> weights;  // sum to 2
};
const GaussLegendre& gauss_legendre(int n);

// composite Gauss-Legendre on [a, b]
double integrate_gl(const std::function<double(double)>& f, double a, double b,
                    int panels, int order = 16);

// adaptive Simpson with relative tolerance; converged=false when the
// recursion depth limit is hit before reaching tol
double integrate_adaptive(const std::function<double(double)>& f, double a,
                          double b, double rel_tol, bool* converged = nullptr);

// --- small fitting helpers ----------------------------------------------

// least-squares slope of y against x
double ls_slope(const std::vector<double>& x, const std::vector<double>& y);

// --- combinatorics ------------------------------------------------------

double log_factorial(int n);
double log_double_factorial_odd(int m);  // log((2m-1)!!)
double binomial(int n, int k);
// multinomial coefficient k! / prod(j_i!)
double multinomial(int k, const std::vector<int>& parts);

// Multi-indices of fixed dimension. Graded lexicographic order: total
// degree ascending, ties broken lexicographically descending on the
// exponents (so for p=2, degree 2: (2,0), (1,1), (0,2)).
std::vector<std::vector<int>> multi_indices_of_degree(int dim, int degree);
std::vector<std::vector<int>> multi_indices_up_to(int dim, int max_degree);

// number of monomials of degree <= d in p variables: C(p+d, d)
long n_monomials(int p, int d);

// --- dense univariate polynomials ---------------------------------------

class Poly1 {
 public:
  Poly1() = default;
  explicit Poly1(std::vector<double> coeffs) : c_(std::move(coeffs)) { trim(); }
  static Poly1 monomial(int degree, double coeff = 1.0);
  double operator()(double x) const;
  Poly1 derivative() const;
  Poly1 operator+(const Poly1& o) const;
  Poly1 operator-(const Poly1& o) const;
  Poly1 operator*(const Poly1& o) const;
  Poly1& operator*=(double s);
  int degree() const { return static_cast<int>(c_.size()) - 1; }
  const std::vector<double>& coeffs() const { return c_; }

 private:
  void trim();
  std::vector<double> c_;
};

// sparse multivariate polynomial keyed by exponent vectors; enough for the
// moment pull-backs and panel index expansions
class MultiPoly {
 public:
  explicit MultiPoly(int dim) : dim_(dim) {}
  static MultiPoly constant(int dim, double v);
  static MultiPoly variable(int dim, int which);
  void add_term(const std::vector<int>& expo, double coeff);
  MultiPoly operator+(const MultiPoly& o) const;
  MultiPoly operator*(const MultiPoly& o) const;
  MultiPoly pow(int k) const;
  int dim() const { return dim_; }
  const std::vector<std::pair<std::vector<int>, double>>& terms() const {
    return terms_;
  }

 private:
  void compact();
  int dim_;
  std::vector<std::pair<std::vector<int>, double>> terms_;
};

// --- nonnegative least squares (Lawson-Hanson) ---------------------------

struct NnlsResult {
  std::vector<double> x;
  double residual_norm = 0.0;
  int iterations = 0;
  bool converged = false;
};
NnlsResult nnls(const std::vector<std::vector<double>>& A,
                const std::vector<double>& b, int max_iter = 0,
                double tol = 1e-12);

// --- deterministic parallel map -----------------------------------------

// Runs fn(i) for i in [0, n). Chunking is fixed by n alone, results must be
// written to disjoint slots by the caller; thread count never affects values.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

// global parallelism degree honored by all modules (default: hardware)
void set_parallelism(int threads);
int parallelism();

}  // namespace num
}  // namespace rcid
