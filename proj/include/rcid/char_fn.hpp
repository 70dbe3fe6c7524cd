#pragma once

#include <complex>
#include <functional>
#include <string>
#include <vector>

#include "rcid/numerics.hpp"

namespace rcid {

using cpx = std::complex<double>;

enum class CfProvenance { population_closed_form, empirical };

// Complex-valued characteristic function sampled on a symmetric grid
// t = -N*step .. N*step. phi(0) = 1 and Hermitian symmetry are enforced at
// construction.
class CharFnGrid {
 public:
  CharFnGrid(double step, int half_n, std::vector<cpx> values,
             CfProvenance provenance);
  static CharFnGrid from_callable(const std::function<cpx(double)>& phi,
                                  double t_max, double step,
                                  CfProvenance prov =
                                      CfProvenance::population_closed_form);
  // empirical CF (1/n) sum e^{itY}; Hermitian by construction
  static CharFnGrid from_sample(const std::vector<double>& sample,
                                double t_max, double step);

  double step() const { return step_; }
  int half_n() const { return half_n_; }
  int size() const { return 2 * half_n_ + 1; }
  double t(int i) const { return (i - half_n_) * step_; }
  int index_of_zero() const { return half_n_; }
  double t_max() const { return half_n_ * step_; }
  CfProvenance provenance() const { return prov_; }

  const cpx& operator[](int i) const { return vals_[i]; }
  cpx& operator[](int i) { return vals_[i]; }
  const std::vector<cpx>& values() const { return vals_; }

  // linear interpolation in t; exact at grid nodes
  cpx interpolate(double t) const;

  // enforce phi(-t) = conj(phi(t)) and phi(0) = 1 by averaging
  void hermitize();

  // check invariants (phi(0) ~ 1, Hermitian within tol)
  void validate(double tol = 1e-8) const;

 private:
  double step_;
  int half_n_;
  std::vector<cpx> vals_;
  CfProvenance prov_;
};

// Moments from CF derivatives at 0: central differences on the grid step,
// Richardson-extrapolated over steps (h, 2h); orders capped at 8.
// phi^(m)(0) = i^m s_m. Returns s_0..s_max_order.
std::vector<double> cf_moments_at_zero(const CharFnGrid& phi, int max_order,
                                       double* imag_residual = nullptr);

// Generalized symmetric-stencil variant: least-squares even/odd polynomial
// fit on the window |t| <= window_radius, derivatives read off the fitted
// coefficients. Exact on polynomials through the fit degree, much lower
// roundoff amplification than raw high-order differences.
std::vector<double> cf_moments_local_fit(const CharFnGrid& phi, int max_order,
                                         double window_radius,
                                         double* imag_residual = nullptr);

// closed-form CFs used by tests and the harness
namespace cf {
cpx normal(double t, double mean = 0.0, double sd = 1.0);
cpx uniform(double t, double a = -1.0, double b = 1.0);  // sinc-type
cpx cauchy(double t, double loc = 0.0, double scale = 1.0);
cpx triangular(double t);  // (1 - |t|)_+, compactly supported CF
cpx point_mass(double t, double c);
}  // namespace cf

}  // namespace rcid
