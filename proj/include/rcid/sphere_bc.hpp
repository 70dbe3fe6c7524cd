#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <optional>
#include <vector>

#include "rcid/momentseq.hpp"
#include "rcid/numerics.hpp"

namespace rcid::sphere_bc {

// Quadrature grid on S^p, p in {1, 2}. For p = 1 uniform angles (trapezoid
// rule is spectrally accurate on the circle); for p = 2 Gauss-Legendre in
// cos(colatitude) x uniform longitude with exact antipodal pairing.
struct SphereGrid {
  int p = 1;
  std::vector<std::array<double, 3>> nodes;  // unit vectors (z = 0 for p = 1)
  std::vector<double> weights;               // sum to surface measure
  std::vector<int> antipode;                 // index of -u
  std::vector<double> theta;                 // angle (p=1) or colatitude (p=2)
  std::vector<double> phi;                   // longitude (p=2)
  int n_colat = 0, n_az = 0;                 // p = 2 factorization

  static SphereGrid circle(int n);
  static SphereGrid sphere2(int n_colat, int n_az);
  double surface_measure() const { return p == 1 ? 2.0 * M_PI : 4.0 * M_PI; }
  void validate() const;
};

// density on the grid (values per node)
struct SphericalDensity {
  const SphereGrid* grid = nullptr;
  std::vector<double> values;
  double mass() const;
  // antipodal exclusion: min(f(u), f(-u)) below tolerance at every pair
  bool antipodal_exclusion(double tol = 1e-10) const;
  void validate(double mass_tol = 1e-8, double neg_tol = 1e-10) const;
};

struct HarmonicSpectrum {
  int max_degree = 0;
  std::vector<double> l1;  // ||Q_m f||_{L1}, m = 0..max_degree
  std::vector<double> l2;
};

// lift x in R^p to s in the upper hemisphere H+ of S^p
std::vector<double> lift_regressors(const std::vector<double>& x);

// lambda(2m+1, p) of the hemispherical transform, log-space evaluation
double eigenvalue_lambda(int m, int p);

// Laplacian eigenvalue zeta_{m,p} = -m(m+p-1)
inline double laplacian_eigenvalue(int m, int p) {
  return -static_cast<double>(m) * (m + p - 1);
}

// Harmonic analysis on a fixed grid: degree projections Q_m f and synthesis.
class HarmonicAnalyzer {
 public:
  HarmonicAnalyzer(const SphereGrid& grid, int max_degree);
  int max_degree() const { return M_; }
  const SphereGrid& grid() const { return *grid_; }

  // projection Q_m f evaluated on the grid
  std::vector<double> project(const std::vector<double>& f, int m) const;
  HarmonicSpectrum spectrum(const std::vector<double>& f) const;

 private:
  const SphereGrid* grid_;
  int M_;
  // circle: nothing precomputed; sphere: normalized Legendre tables
  // P[m][l - m][i_colat] for the azimuthal order m
  std::vector<std::vector<std::vector<double>>> legendre_;
  std::vector<std::vector<double>> cos_table_, sin_table_;  // [order][i_az]
};

// T f(s) = int 1{u.s >= 0} f(u) dsigma(u) - 1/2 by grid quadrature
// (antisymmetrized: even-part errors cancel exactly)
std::vector<double> hemispherical_forward_grid(
    const SphereGrid& grid, const std::vector<double>& f,
    const std::vector<std::array<double, 3>>& s_points);

// smooth-callable variant: rotated-hemisphere product quadrature, exact for
// band-limited f; used by the eigenvalue identity checks
double hemispherical_forward_smooth(
    int p, const std::function<double(const std::array<double, 3>&)>& f,
    const std::array<double, 3>& s, int resolution = 48);

struct InversionReport {
  int truncation = 0;
  bool truncation_forced = false;   // amplification guard hit
  double renormalization = 1.0;     // mass factor after positive part
  bool degenerate = false;          // no odd information (f- ~ 0)
  std::vector<double> lambda_used;
};

// f- = sum_{m<=M} Q_{2m+1}(g - 1/2)/lambda(2m+1,p); f = 2 f- 1{f- > 0},
// renormalized to unit mass
SphericalDensity invert_hemispherical(const HarmonicAnalyzer& an,
                                      const std::vector<double>& g, int M,
                                      InversionReport* report = nullptr);

struct DecayResult {
  double limsup_estimate = 0.0;  // max over the tail window of norm^{1/m}
  double threshold = 0.0;        // 1/(1+2 eps)
  bool pass = false;
  int window_lo = 0, window_hi = 0;
};

DecayResult decay_check(const HarmonicSpectrum& spec, int M, double epsilon);

// spectral application of Delta^k
std::vector<double> laplacian_power(const HarmonicAnalyzer& an,
                                    const std::vector<double>& f, int k);

struct MembershipRow {
  int k = 0;
  double norm = 0.0;   // ||Delta^k f-||_{L1}
  double bound = 0.0;  // c b^k M_k
  bool within = false;
};
// C({M_m}) membership diagnostic for the odd part
std::vector<MembershipRow> laplacian_membership(
    const HarmonicAnalyzer& an, const std::vector<double>& f, int k_max,
    double c, double b, const momentseq::LogConvexSequence& M);

struct BinaryDataset {
  std::vector<std::vector<double>> x;
  std::vector<int> y;
};

// Y = 1{Gamma . S >= 0}, S = lift(X); deterministic given the seed
BinaryDataset simulate_binary(
    const std::function<std::vector<double>(num::RngStream&, std::uint64_t)>&
        gamma_sampler,
    const std::function<std::vector<double>(num::RngStream&, std::uint64_t)>&
        x_sampler,
    int n, std::uint64_t seed);

}  // namespace rcid::sphere_bc
