#include "rcid/sphere_bc.hpp"

#include <algorithm>
#include <cmath>

namespace rcid::sphere_bc {

// --- grids -----------------------------------------------------------------

SphereGrid SphereGrid::circle(int n) {
  if (n < 8 || n % 2 != 0)
    throw precondition_error("SphereGrid::circle: need even n >= 8");
  SphereGrid g;
  g.p = 1;
  g.nodes.resize(n);
  g.weights.assign(n, 2.0 * M_PI / n);
  g.antipode.resize(n);
  g.theta.resize(n);
  for (int i = 0; i < n; ++i) {
    double th = 2.0 * M_PI * i / n;
    g.theta[i] = th;
    g.nodes[i] = {std::cos(th), std::sin(th), 0.0};
    g.antipode[i] = (i + n / 2) % n;
  }
  g.validate();
  return g;
}

SphereGrid SphereGrid::sphere2(int n_colat, int n_az) {
  if (n_colat < 4 || n_az < 8 || n_az % 2 != 0)
    throw precondition_error("SphereGrid::sphere2: need n_colat >= 4, even n_az >= 8");
  SphereGrid g;
  g.p = 2;
  g.n_colat = n_colat;
  g.n_az = n_az;
  const auto& gl = num::gauss_legendre(n_colat);
  g.nodes.resize(n_colat * n_az);
  g.weights.resize(n_colat * n_az);
  g.antipode.resize(n_colat * n_az);
  g.theta.resize(n_colat * n_az);
  g.phi.resize(n_colat * n_az);
  for (int i = 0; i < n_colat; ++i) {
    double c = gl.nodes[i];
    double s = std::sqrt(std::max(0.0, 1.0 - c * c));
    for (int j = 0; j < n_az; ++j) {
      double ph = 2.0 * M_PI * j / n_az;
      int id = i * n_az + j;
      g.nodes[id] = {s * std::cos(ph), s * std::sin(ph), c};
      g.weights[id] = gl.weights[i] * (2.0 * M_PI / n_az);
      g.theta[id] = std::acos(std::clamp(c, -1.0, 1.0));
      g.phi[id] = ph;
      g.antipode[id] = (n_colat - 1 - i) * n_az + (j + n_az / 2) % n_az;
    }
  }
  g.validate();
  return g;
}

void SphereGrid::validate() const {
  double total = 0.0;
  for (double w : weights) total += w;
  if (std::abs(total - surface_measure()) > 1e-10)
    throw data_error("SphereGrid: weights do not sum to the surface measure");
  for (const auto& u : nodes) {
    double n2 = u[0] * u[0] + u[1] * u[1] + u[2] * u[2];
    if (std::abs(n2 - 1.0) > 1e-12)
      throw data_error("SphereGrid: node not on the unit sphere");
  }
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const auto& a = nodes[i];
    const auto& b = nodes[antipode[i]];
    double dot = a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
    if (dot > -1.0 + 1e-9)
      throw data_error("SphereGrid: antipode pairing broken");
  }
}

double SphericalDensity::mass() const {
  double m = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i)
    m += grid->weights[i] * values[i];
  return m;
}

bool SphericalDensity::antipodal_exclusion(double tol) const {
  for (std::size_t i = 0; i < values.size(); ++i)
    if (std::min(values[i], values[grid->antipode[i]]) > tol) return false;
  return true;
}

void SphericalDensity::validate(double mass_tol, double neg_tol) const {
  if (!grid || values.size() != grid->nodes.size())
    throw data_error("SphericalDensity: grid/value mismatch");
  for (double v : values)
    if (v < -neg_tol) throw data_error("SphericalDensity: negative value");
  if (std::abs(mass() - 1.0) > mass_tol)
    throw data_error("SphericalDensity: mass must be 1");
}

// --- lift and eigenvalues -----------------------------------------------------

std::vector<double> lift_regressors(const std::vector<double>& x) {
  double n2 = 1.0;
  for (double v : x) {
    if (!std::isfinite(v)) throw precondition_error("lift_regressors: non-finite");
    n2 += v * v;
  }
  double inv = 1.0 / std::sqrt(n2);
  std::vector<double> s;
  s.reserve(x.size() + 1);
  s.push_back(inv);
  for (double v : x) s.push_back(v * inv);
  return s;
}

double eigenvalue_lambda(int m, int p) {
  if (m < 0 || p < 1) throw precondition_error("eigenvalue_lambda: bad arguments");
  // lambda(2m+1, p) = (-1)^m 2 pi^{p/2} (2m-1)!! / (Gamma(p/2) p(p+2)...(p+2m))
  double log_mag = std::log(2.0) + 0.5 * p * std::log(M_PI) -
                   std::lgamma(0.5 * p);
  for (int j = 1; j <= m; ++j) log_mag += std::log(2.0 * j - 1.0);
  for (int j = 0; j <= m; ++j) log_mag -= std::log(static_cast<double>(p + 2 * j));
  double sign = (m % 2 == 0) ? 1.0 : -1.0;
  return sign * std::exp(log_mag);
}

// --- harmonic analysis -----------------------------------------------------------

HarmonicAnalyzer::HarmonicAnalyzer(const SphereGrid& grid, int max_degree)
    : grid_(&grid), M_(max_degree) {
  if (grid.p == 1) {
    int n = static_cast<int>(grid.nodes.size());
    if (n < 4 * max_degree)
      throw precondition_error("HarmonicAnalyzer: circle grid under-resolves degree");
    return;
  }
  // p = 2: normalized associated Legendre tables on the colatitude nodes
  if (grid.n_colat < max_degree + 1 || grid.n_az < 2 * max_degree + 2)
    throw precondition_error("HarmonicAnalyzer: sphere grid under-resolves degree");
  const auto& gl = num::gauss_legendre(grid.n_colat);
  legendre_.assign(M_ + 1, {});
  for (int m = 0; m <= M_; ++m)
    legendre_[m].assign(M_ - m + 1, std::vector<double>(grid.n_colat, 0.0));
  for (int i = 0; i < grid.n_colat; ++i) {
    double c = gl.nodes[i];
    double s = std::sqrt(std::max(0.0, 1.0 - c * c));
    // P~_m^m upward in m, then l-recurrence
    double pmm = std::sqrt(1.0 / (4.0 * M_PI));
    for (int m = 0; m <= M_; ++m) {
      if (m > 0) pmm *= -std::sqrt((2.0 * m + 1.0) / (2.0 * m)) * s;
      legendre_[m][0][i] = pmm;
      if (m + 1 <= M_) {
        double pm1 = std::sqrt(2.0 * m + 3.0) * c * pmm;
        legendre_[m][1][i] = pm1;
        double prev2 = pmm, prev1 = pm1;
        for (int l = m + 2; l <= M_; ++l) {
          double a = std::sqrt((4.0 * l * l - 1.0) / (static_cast<double>(l) * l - m * m));
          double b = std::sqrt(((static_cast<double>(l - 1) * (l - 1)) - m * m) /
                               (4.0 * static_cast<double>(l - 1) * (l - 1) - 1.0));
          double pl = a * (c * prev1 - b * prev2);
          legendre_[m][l - m][i] = pl;
          prev2 = prev1;
          prev1 = pl;
        }
      }
    }
  }
  cos_table_.assign(M_ + 1, std::vector<double>(grid.n_az));
  sin_table_.assign(M_ + 1, std::vector<double>(grid.n_az));
  for (int m = 0; m <= M_; ++m)
    for (int j = 0; j < grid.n_az; ++j) {
      cos_table_[m][j] = std::cos(m * 2.0 * M_PI * j / grid.n_az);
      sin_table_[m][j] = std::sin(m * 2.0 * M_PI * j / grid.n_az);
    }
}

std::vector<double> HarmonicAnalyzer::project(const std::vector<double>& f,
                                              int deg) const {
  const SphereGrid& g = *grid_;
  if (deg > M_) throw precondition_error("project: degree above analyzer limit");
  const int N = static_cast<int>(g.nodes.size());
  std::vector<double> out(N, 0.0);

  if (g.p == 1) {
    if (deg == 0) {
      double a = 0.0;
      for (int i = 0; i < N; ++i) a += g.weights[i] * f[i];
      a /= 2.0 * M_PI;
      out.assign(N, a);
      return out;
    }
    double ac = 0.0, as = 0.0;
    for (int i = 0; i < N; ++i) {
      ac += g.weights[i] * f[i] * std::cos(deg * g.theta[i]);
      as += g.weights[i] * f[i] * std::sin(deg * g.theta[i]);
    }
    for (int i = 0; i < N; ++i)
      out[i] = (ac * std::cos(deg * g.theta[i]) + as * std::sin(deg * g.theta[i])) /
               M_PI;
    return out;
  }

  // p = 2: a_{lm} via factorized quadrature, then synthesis of the degree
  const auto& gl = num::gauss_legendre(g.n_colat);
  const double az_w = 2.0 * M_PI / g.n_az;
  std::vector<double> ac(deg + 1, 0.0), as(deg + 1, 0.0);
  // longitude transforms per colatitude row
  std::vector<double> Fc(g.n_colat), Fs(g.n_colat);
  for (int m = 0; m <= deg; ++m) {
    for (int i = 0; i < g.n_colat; ++i) {
      double sc = 0.0, ss = 0.0;
      const int base = i * g.n_az;
      for (int j = 0; j < g.n_az; ++j) {
        sc += f[base + j] * cos_table_[m][j];
        ss += f[base + j] * sin_table_[m][j];
      }
      Fc[i] = sc * az_w;
      Fs[i] = ss * az_w;
    }
    double sum_c = 0.0, sum_s = 0.0;
    for (int i = 0; i < g.n_colat; ++i) {
      double pl = legendre_[m][deg - m][i];
      sum_c += gl.weights[i] * pl * Fc[i];
      sum_s += gl.weights[i] * pl * Fs[i];
    }
    double norm = m == 0 ? 1.0 : std::sqrt(2.0);
    ac[m] = norm * sum_c;
    as[m] = norm * sum_s;
  }
  for (int i = 0; i < g.n_colat; ++i)
    for (int j = 0; j < g.n_az; ++j) {
      double v = 0.0;
      for (int m = 0; m <= deg; ++m) {
        double pl = legendre_[m][deg - m][i];
        double norm = m == 0 ? 1.0 : std::sqrt(2.0);
        v += norm * pl *
             (ac[m] * cos_table_[m][j] + as[m] * sin_table_[m][j]);
      }
      out[i * g.n_az + j] = v;
    }
  return out;
}

HarmonicSpectrum HarmonicAnalyzer::spectrum(const std::vector<double>& f) const {
  HarmonicSpectrum sp;
  sp.max_degree = M_;
  sp.l1.resize(M_ + 1);
  sp.l2.resize(M_ + 1);
  for (int deg = 0; deg <= M_; ++deg) {
    auto q = project(f, deg);
    double l1 = 0.0, l2 = 0.0;
    for (std::size_t i = 0; i < q.size(); ++i) {
      l1 += grid_->weights[i] * std::abs(q[i]);
      l2 += grid_->weights[i] * q[i] * q[i];
    }
    sp.l1[deg] = l1;
    sp.l2[deg] = std::sqrt(l2);
  }
  return sp;
}

// --- hemispherical transform ----------------------------------------------------

std::vector<double> hemispherical_forward_grid(
    const SphereGrid& grid, const std::vector<double>& f,
    const std::vector<std::array<double, 3>>& s_points) {
  const int N = static_cast<int>(grid.nodes.size());
  // odd part: even-part quadrature error cancels exactly in the signed sum
  std::vector<double> fodd(N);
  for (int i = 0; i < N; ++i) fodd[i] = 0.5 * (f[i] - f[grid.antipode[i]]);

  std::vector<double> out(s_points.size(), 0.0);
  num::parallel_for(s_points.size(), [&](std::size_t k) {
    const auto& s = s_points[k];
    double acc = 0.0;
    for (int i = 0; i < N; ++i) {
      const auto& u = grid.nodes[i];
      double dot = u[0] * s[0] + u[1] * s[1] + u[2] * s[2];
      // nodes on the boundary circle must contribute 0 deterministically;
      // without the tolerance their sign is floating-point noise that the
      // spectral inversion amplifies
      double sgn = dot > 1e-12 ? 1.0 : (dot < -1e-12 ? -1.0 : 0.0);
      acc += grid.weights[i] * fodd[i] * sgn;
    }
    out[k] = 0.5 * acc;
  });
  return out;
}

double hemispherical_forward_smooth(
    int p, const std::function<double(const std::array<double, 3>&)>& f,
    const std::array<double, 3>& s, int resolution) {
  if (p == 1) {
    double phi_s = std::atan2(s[1], s[0]);
    double integral = num::integrate_gl(
        [&](double th) {
          return f({std::cos(th), std::sin(th), 0.0});
        },
        phi_s - 0.5 * M_PI, phi_s + 0.5 * M_PI, std::max(8, resolution / 4));
    return integral - 0.5;
  }
  if (p != 2) throw precondition_error("hemispherical_forward_smooth: p in {1,2}");

  // orthonormal frame with third axis s
  std::array<double, 3> a =
      std::abs(s[2]) < 0.9 ? std::array<double, 3>{0, 0, 1}
                           : std::array<double, 3>{1, 0, 0};
  double ad = a[0] * s[0] + a[1] * s[1] + a[2] * s[2];
  std::array<double, 3> e1{a[0] - ad * s[0], a[1] - ad * s[1], a[2] - ad * s[2]};
  double n1 = std::sqrt(e1[0] * e1[0] + e1[1] * e1[1] + e1[2] * e1[2]);
  for (auto& v : e1) v /= n1;
  std::array<double, 3> e2{s[1] * e1[2] - s[2] * e1[1],
                           s[2] * e1[0] - s[0] * e1[2],
                           s[0] * e1[1] - s[1] * e1[0]};

  const auto& gl = num::gauss_legendre(resolution);
  const int n_az = 2 * resolution;
  double acc = 0.0;
  for (int i = 0; i < resolution; ++i) {
    double c = 0.5 + 0.5 * gl.nodes[i];  // cos(theta') in (0, 1)
    double wc = 0.5 * gl.weights[i];
    double st = std::sqrt(std::max(0.0, 1.0 - c * c));
    for (int j = 0; j < n_az; ++j) {
      double ph = 2.0 * M_PI * j / n_az;
      double x1 = st * std::cos(ph), x2 = st * std::sin(ph);
      std::array<double, 3> u{
          x1 * e1[0] + x2 * e2[0] + c * s[0],
          x1 * e1[1] + x2 * e2[1] + c * s[1],
          x1 * e1[2] + x2 * e2[2] + c * s[2]};
      acc += wc * (2.0 * M_PI / n_az) * f(u);
    }
  }
  return acc - 0.5;
}

// --- inversion ------------------------------------------------------------------

SphericalDensity invert_hemispherical(const HarmonicAnalyzer& an,
                                      const std::vector<double>& g, int M,
                                      InversionReport* report) {
  const SphereGrid& grid = an.grid();
  const int N = static_cast<int>(grid.nodes.size());
  if (static_cast<int>(g.size()) != N)
    throw precondition_error("invert_hemispherical: value count mismatch");
  for (double v : g)
    if (v < -1e-9 || v > 1.0 + 1e-9)
      throw precondition_error("invert_hemispherical: g must lie in [0, 1]");
  if (2 * M + 1 > an.max_degree())
    throw precondition_error("invert_hemispherical: analyzer under-resolves M");

  InversionReport rep;
  std::vector<double> h(N);
  for (int i = 0; i < N; ++i) h[i] = g[i] - 0.5;

  std::vector<double> fminus(N, 0.0);
  for (int m = 0; m <= M; ++m) {
    auto q = an.project(h, 2 * m + 1);
    double lam = eigenvalue_lambda(m, grid.p);
    double qn = 0.0;
    for (int i = 0; i < N; ++i) qn = std::max(qn, std::abs(q[i]));
    if (qn / std::abs(lam) > 1e12) {
      rep.truncation_forced = true;
      break;
    }
    rep.lambda_used.push_back(lam);
    rep.truncation = m;
    for (int i = 0; i < N; ++i) fminus[i] += q[i] / lam;
  }

  // exact oddness: the antipodal-exclusion invariant holds by construction
  for (int i = 0; i < N; ++i) {
    int j = grid.antipode[i];
    if (i < j) {
      double v = 0.5 * (fminus[i] - fminus[j]);
      fminus[i] = v;
      fminus[j] = -v;
    }
  }

  SphericalDensity out;
  out.grid = &grid;
  out.values.resize(N);
  for (int i = 0; i < N; ++i)
    out.values[i] = fminus[i] > 0 ? 2.0 * fminus[i] : 0.0;
  double mass = out.mass();
  if (mass < 1e-12) {
    rep.degenerate = true;
    if (report) *report = rep;
    return out;
  }
  for (double& v : out.values) v /= mass;
  rep.renormalization = 1.0 / mass;
  if (report) *report = rep;
  return out;
}

// --- decay and Laplacian diagnostics ------------------------------------------------

DecayResult decay_check(const HarmonicSpectrum& spec, int M, double epsilon) {
  if (!(epsilon > 0) || !(epsilon < 1))
    throw precondition_error("decay_check: epsilon in (0,1)");
  if (2 * M + 1 > spec.max_degree)
    throw precondition_error("decay_check: spectrum shorter than M");
  DecayResult res;
  res.threshold = 1.0 / (1.0 + 2.0 * epsilon);
  res.window_lo = std::max(1, M / 2);
  res.window_hi = M;
  double best = 0.0;
  for (int m = res.window_lo; m <= res.window_hi; ++m) {
    double norm = spec.l1[2 * m + 1];
    if (norm < 1e-14) continue;  // machine zeros count as exact zeros
    best = std::max(best, std::pow(norm, 1.0 / m));
  }
  res.limsup_estimate = best;
  res.pass = best < res.threshold;
  return res;
}

std::vector<double> laplacian_power(const HarmonicAnalyzer& an,
                                    const std::vector<double>& f, int k) {
  if (k < 0) throw precondition_error("laplacian_power: k >= 0");
  if (k == 0) return f;
  const SphereGrid& grid = an.grid();
  const int M = an.max_degree();
  double zmax = std::abs(laplacian_eigenvalue(M, grid.p));
  if (k * std::log(zmax) > 700.0)
    throw numerical_error("laplacian_power: overflow guard");
  std::vector<double> out(f.size(), 0.0);
  for (int m = 1; m <= M; ++m) {
    auto q = an.project(f, m);
    double z = std::pow(laplacian_eigenvalue(m, grid.p), k);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += z * q[i];
  }
  return out;
}

std::vector<MembershipRow> laplacian_membership(
    const HarmonicAnalyzer& an, const std::vector<double>& f, int k_max,
    double c, double b, const momentseq::LogConvexSequence& M) {
  const SphereGrid& grid = an.grid();
  const int N = static_cast<int>(grid.nodes.size());
  std::vector<double> fodd(N);
  for (int i = 0; i < N; ++i) fodd[i] = 0.5 * (f[i] - f[grid.antipode[i]]);
  std::vector<MembershipRow> rows;
  for (int k = 0; k <= k_max; ++k) {
    auto dk = laplacian_power(an, fodd, k);
    double l1 = 0.0;
    for (int i = 0; i < N; ++i) l1 += grid.weights[i] * std::abs(dk[i]);
    MembershipRow row;
    row.k = k;
    row.norm = l1;
    double logb = std::log(c) + k * std::log(b) + M.log_value(std::min(k, M.max_order()));
    row.bound = std::exp(logb);
    row.within = l1 <= row.bound || row.bound == kInf;
    rows.push_back(row);
  }
  return rows;
}

// --- simulation ------------------------------------------------------------------------

BinaryDataset simulate_binary(
    const std::function<std::vector<double>(num::RngStream&, std::uint64_t)>&
        gamma_sampler,
    const std::function<std::vector<double>(num::RngStream&, std::uint64_t)>&
        x_sampler,
    int n, std::uint64_t seed) {
  if (n < 1) throw precondition_error("simulate_binary: n >= 1");
  num::RngStream gstream(seed, "simulate_binary_gamma");
  num::RngStream xstream(seed, "simulate_binary_x");
  BinaryDataset ds;
  ds.x.reserve(n);
  ds.y.reserve(n);
  for (int i = 0; i < n; ++i) {
    auto gamma = gamma_sampler(gstream, static_cast<std::uint64_t>(i));
    auto x = x_sampler(xstream, static_cast<std::uint64_t>(i));
    if (gamma.size() != x.size() + 1)
      throw precondition_error("simulate_binary: gamma must have p+1 entries");
    auto s = lift_regressors(x);
    double dot = 0.0;
    for (std::size_t j = 0; j < s.size(); ++j) dot += gamma[j] * s[j];
    ds.x.push_back(std::move(x));
    ds.y.push_back(dot >= 0 ? 1 : 0);
  }
  return ds;
}

}  // namespace rcid::sphere_bc
