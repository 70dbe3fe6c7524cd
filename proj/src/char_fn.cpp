#include "rcid/char_fn.hpp"

#include <cmath>

#include <Eigen/Dense>

namespace rcid {

CharFnGrid::CharFnGrid(double step, int half_n, std::vector<cpx> values,
                       CfProvenance provenance)
    : step_(step), half_n_(half_n), vals_(std::move(values)), prov_(provenance) {
  if (!(step > 0) || half_n < 1)
    throw precondition_error("CharFnGrid: need positive step and radius");
  if (static_cast<int>(vals_.size()) != 2 * half_n + 1)
    throw data_error("CharFnGrid: value count does not match grid");
}

CharFnGrid CharFnGrid::from_callable(const std::function<cpx(double)>& phi,
                                     double t_max, double step,
                                     CfProvenance prov) {
  int half_n = static_cast<int>(std::round(t_max / step));
  std::vector<cpx> vals(2 * half_n + 1);
  for (int i = 0; i <= 2 * half_n; ++i) vals[i] = phi((i - half_n) * step);
  CharFnGrid g(step, half_n, std::move(vals), prov);
  g.validate(1e-6);
  return g;
}

CharFnGrid CharFnGrid::from_sample(const std::vector<double>& sample,
                                   double t_max, double step) {
  if (sample.empty()) throw precondition_error("ecf: empty sample");
  int half_n = static_cast<int>(std::round(t_max / step));
  std::vector<cpx> vals(2 * half_n + 1, cpx(0, 0));
  // compute t >= 0 and mirror the conjugate
  for (int i = half_n; i <= 2 * half_n; ++i) {
    double t = (i - half_n) * step;
    cpx acc(0, 0);
    for (double y : sample) acc += cpx(std::cos(t * y), std::sin(t * y));
    acc /= static_cast<double>(sample.size());
    vals[i] = acc;
    vals[2 * half_n - i] = std::conj(acc);
  }
  return CharFnGrid(step, half_n, std::move(vals), CfProvenance::empirical);
}

cpx CharFnGrid::interpolate(double t) const {
  double pos = t / step_ + half_n_;
  if (pos <= 0) return vals_.front();
  if (pos >= 2 * half_n_) return vals_.back();
  int i = static_cast<int>(std::floor(pos));
  double frac = pos - i;
  if (frac < 1e-12) return vals_[i];
  if (frac > 1 - 1e-12) return vals_[i + 1];
  return vals_[i] * (1.0 - frac) + vals_[i + 1] * frac;
}

void CharFnGrid::hermitize() {
  vals_[half_n_] = cpx(1.0, 0.0);
  for (int k = 1; k <= half_n_; ++k) {
    cpx a = vals_[half_n_ + k];
    cpx b = std::conj(vals_[half_n_ - k]);
    cpx avg = 0.5 * (a + b);
    vals_[half_n_ + k] = avg;
    vals_[half_n_ - k] = std::conj(avg);
  }
}

void CharFnGrid::validate(double tol) const {
  if (std::abs(vals_[half_n_] - cpx(1.0, 0.0)) > 1e-12)
    throw data_error("CharFnGrid: phi(0) must equal 1");
  for (int k = 1; k <= half_n_; ++k)
    if (std::abs(vals_[half_n_ + k] - std::conj(vals_[half_n_ - k])) > tol)
      throw data_error("CharFnGrid: Hermitian symmetry violated");
}

std::vector<double> cf_moments_at_zero(const CharFnGrid& phi, int max_order,
                                       double* imag_residual) {
  max_order = std::min(max_order, 8);
  const int n0 = phi.index_of_zero();
  const double h = phi.step();
  if (phi.half_n() < 2 * max_order)
    throw precondition_error("cf_moments_at_zero: grid too small");

  // Finite-difference weights from a small Vandermonde solve: symmetric
  // stencil on offsets -L..L reproduces the m-th derivative exactly on
  // polynomials of degree < 2L+1.
  auto deriv_fd = [&](int m, int s) -> cpx {
    int L = m / 2 + 1 + (m % 2);
    int n = 2 * L + 1;
    // solve V w = e_m where V_{jk} = (k-L)^j, then scale by m!/H^m
    std::vector<std::vector<double>> V(n, std::vector<double>(n));
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        V[j][k] = std::pow(static_cast<double>(k - L), j);
    std::vector<double> rhs(n, 0.0);
    rhs[m] = 1.0;
    for (int col = 0; col < n; ++col) {
      int piv = col;
      for (int r2 = col; r2 < n; ++r2)
        if (std::abs(V[r2][col]) > std::abs(V[piv][col])) piv = r2;
      std::swap(V[col], V[piv]);
      std::swap(rhs[col], rhs[piv]);
      for (int r2 = 0; r2 < n; ++r2) {
        if (r2 == col) continue;
        double f = V[r2][col] / V[col][col];
        for (int c2 = col; c2 < n; ++c2) V[r2][c2] -= f * V[col][c2];
        rhs[r2] -= f * rhs[col];
      }
    }
    std::vector<double> w(n);
    for (int k = 0; k < n; ++k) w[k] = rhs[k] / V[k][k];
    double H = s * h;
    cpx acc(0, 0);
    for (int k = 0; k < n; ++k) acc += w[k] * phi[n0 + (k - L) * s];
    double mf = 1.0;
    for (int r = 2; r <= m; ++r) mf *= r;
    return acc * mf / std::pow(H, m);
  };

  std::vector<double> moments(max_order + 1);
  moments[0] = 1.0;
  double worst_imag = 0.0;
  for (int m = 1; m <= max_order; ++m) {
    // effective step balances roundoff (m!/H^m amplification) against
    // truncation; the grid spacing is refined locally via the multiplier s
    int L = m / 2 + 1 + (m % 2);
    double target_h = 0.02 + 0.02 * m;
    int s = std::max(1, static_cast<int>(std::round(target_h / h)));
    s = std::min(s, phi.half_n() / (2 * L));
    if (s < 1) throw precondition_error("cf_moments_at_zero: grid too small");
    cpx d1 = deriv_fd(m, s);
    cpx d2 = deriv_fd(m, 2 * s);
    // Richardson: cancels the O(H^2) component
    cpx d = (4.0 * d1 - d2) / 3.0;
    cpx im_m = d / std::pow(cpx(0, 1), m);  // s_m = phi^(m)(0)/i^m
    moments[m] = im_m.real();
    worst_imag = std::max(worst_imag, std::abs(im_m.imag()));
  }
  if (imag_residual) *imag_residual = worst_imag;
  return moments;
}

std::vector<double> cf_moments_local_fit(const CharFnGrid& phi, int max_order,
                                         double window_radius,
                                         double* imag_residual) {
  max_order = std::min(max_order, 8);
  const int n0 = phi.index_of_zero();
  int kw = static_cast<int>(std::floor(window_radius / phi.step()));
  kw = std::min(kw, phi.half_n());
  if (kw < 2 * max_order + 6)
    throw precondition_error("cf_moments_local_fit: window too small");
  const double w = kw * phi.step();

  // split into even and odd parts; fit each in powers of v = (t/w)^2,
  // the odd part with one extra factor of (t/w)
  const int even_deg = max_order / 2 + 2;  // powers of v
  const int odd_deg = (max_order + 1) / 2 + 2;

  // Chebyshev polynomials T_k(2v - 1) expressed in powers of v; the
  // well-conditioned fit basis converts exactly back to monomials
  auto cheb_in_v = [](int deg) {
    std::vector<num::Poly1> T;
    T.push_back(num::Poly1({1.0}));
    if (deg >= 1) T.push_back(num::Poly1({-1.0, 2.0}));  // 2v - 1
    for (int k = 2; k <= deg; ++k) {
      num::Poly1 two_x({-2.0, 4.0});  // 2 (2v - 1)
      T.push_back(two_x * T[k - 1] - T[k - 2]);
    }
    return T;
  };

  auto fit = [&](bool odd, int deg) {
    // rows: grid offsets 1..kw (t > 0 suffices after the parity split)
    const int rows = kw;
    const int nc = deg + 1;
    auto T = cheb_in_v(deg);
    Eigen::MatrixXd A(rows, nc);
    Eigen::MatrixXd B(rows, 2);
    for (int r = 1; r <= kw; ++r) {
      double u = static_cast<double>(r) * phi.step() / w;
      double v = u * u;
      double base = odd ? u : 1.0;
      for (int c = 0; c < nc; ++c) A(r - 1, c) = base * T[c](v);
      cpx fp = phi[n0 + r], fm = phi[n0 - r];
      cpx val = odd ? 0.5 * (fp - fm) : 0.5 * (fp + fm);
      B(r - 1, 0) = val.real();
      B(r - 1, 1) = val.imag();
    }
    Eigen::MatrixXd C = A.colPivHouseholderQr().solve(B);
    // combine the Chebyshev series into monomial coefficients of v
    std::vector<cpx> coef(nc, cpx(0, 0));
    for (int k = 0; k < nc; ++k) {
      const auto& pc = T[k].coeffs();
      for (std::size_t j = 0; j < pc.size(); ++j)
        coef[j] += cpx(C(k, 0), C(k, 1)) * pc[j];
    }
    return coef;
  };

  auto even_c = fit(false, even_deg);
  auto odd_c = fit(true, odd_deg);

  std::vector<double> moments(max_order + 1);
  moments[0] = 1.0;
  double worst = 0.0;
  double log_fact = 0.0;
  for (int m = 1; m <= max_order; ++m) {
    log_fact += std::log(static_cast<double>(m));
    // coefficient of u^m (u = t/w): from even_c for even m, odd_c otherwise
    cpx cm = (m % 2 == 0) ? even_c[m / 2] : odd_c[(m - 1) / 2];
    // phi^(m)(0) = m! * cm / w^m
    cpx d = cm * std::exp(log_fact - m * std::log(w));
    cpx s = d / std::pow(cpx(0, 1), m);
    moments[m] = s.real();
    worst = std::max(worst, std::abs(s.imag()));
  }
  if (imag_residual) *imag_residual = worst;
  return moments;
}

namespace cf {

cpx normal(double t, double mean, double sd) {
  return std::exp(cpx(-0.5 * sd * sd * t * t, mean * t));
}

cpx uniform(double t, double a, double b) {
  if (t == 0.0) return cpx(1, 0);
  // (e^{itb} - e^{ita}) / (it(b-a))
  cpx num = std::exp(cpx(0, t * b)) - std::exp(cpx(0, t * a));
  return num / cpx(0, t * (b - a));
}

cpx cauchy(double t, double loc, double scale) {
  return std::exp(cpx(-scale * std::abs(t), loc * t));
}

cpx triangular(double t) {
  double v = 1.0 - std::abs(t);
  return cpx(v > 0 ? v : 0.0, 0.0);
}

cpx point_mass(double t, double c) { return std::exp(cpx(0, t * c)); }

}  // namespace cf
}  // namespace rcid
