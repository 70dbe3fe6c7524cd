#pragma once

#include <complex>
#include <functional>
#include <optional>
#include <vector>

#include "rcid/numerics.hpp"

namespace rcid::riesz_basis {

using cpx = std::complex<double>;

// Exponent system f_j(z) = e^{i pi lambda_j z / T} with
// lambda_j = j + c r^{-|j|}, j in a symmetric finite set J subset Z\{0}.
// r is carried symbolically in the independence check (treated as
// transcendental) and numerically elsewhere. The perturbation coefficient c
// defaults to 1/5; other values serve as negative controls.
class ExponentSystem {
 public:
  ExponentSystem(double r, double T, int max_index,
                 std::pair<long, long> coeff = {1, 5});

  double r() const { return r_; }
  double T() const { return T_; }
  int max_index() const { return max_index_; }
  const std::vector<int>& indices() const { return J_; }
  long coeff_num() const { return coeff_num_; }
  long coeff_den() const { return coeff_den_; }

  double lambda(int j) const;  // numeric lambda_j
  cpx f(int j, double x) const;
  // largest perturbation |lambda_j - j| = c / r (attained at |j| = 1)
  double sup_deviation() const;

 private:
  double r_, T_;
  int max_index_;
  std::vector<int> J_;  // -max..-1, 1..max
  long coeff_num_, coeff_den_;
};

struct KadecResult {
  double sup_deviation = 0.0;
  bool pass = false;  // sup deviation < 1/4
};
KadecResult kadec_check(const ExponentSystem& sys);

struct IndependenceResult {
  bool independent = true;
  std::vector<int> violating_combination;  // b over indices(), when dependent
  long combinations_checked = 0;
  bool budget_exhausted = false;
};
// enumerate b in N_0^{|J|}, 1 <= |b|_1 <= bound; a combination annihilates
// only if the integer part and every exact rational Laurent coefficient in r
// vanish (transcendence of r)
IndependenceResult exponent_independence(const ExponentSystem& sys, int bound,
                                         long combination_budget = 50'000'000);

struct GramResult {
  std::vector<std::vector<double>> gram;  // 2T sinc(pi(lambda_j - lambda_k))
  double min_eigenvalue = 0.0;
  double max_eigenvalue = 0.0;
  double condition = 0.0;
};
GramResult gram_frame_bounds(const ExponentSystem& sys);

struct BiorthogonalResult {
  std::vector<cpx> coefficients;  // gamma_j, ordered like indices() with 0 first
  std::vector<int> ordering;      // 0, then indices()
  double reconstruction_residual = 0.0;  // L2 on [-T, T]
  double gram_condition = 0.0;
};
// expand g over {f_j : j in {0} union J}; Gram condition above 1e12 aborts
BiorthogonalResult biorthogonal_expand(const ExponentSystem& sys,
                                       const std::function<cpx(double)>& g);

// one theta atom of the approximate nonlinear model: weight and the
// coefficient values gamma_0, (gamma_j)_{j in J} attached to the atom
struct ThetaAtom {
  double weight = 0.0;
  double gamma0 = 0.0;
  std::vector<cpx> gamma;  // ordered like indices(); conjugate-paired for real Y
};

struct MixtureSummary {
  double x = 0.0;
  std::vector<double> atom_values;  // per atom, sorted ascending
  std::vector<double> atom_weights; // matching weights
  double mean = 0.0;
  double variance = 0.0;
  double quantile(double q) const;
  double max_imag_residual = 0.0;
};

// evaluate Y = gamma_0 + sum_j gamma_j f_j(x) per atom; f_j entire, so x
// outside [-T, T] extrapolates legally
std::vector<MixtureSummary> snl_forward_extrapolate(
    const ExponentSystem& sys, const std::vector<ThetaAtom>& atoms,
    const std::vector<double>& xs);

}  // namespace rcid::riesz_basis
