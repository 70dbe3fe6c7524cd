#pragma once

#include <complex>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rcid/char_fn.hpp"
#include "rcid/numerics.hpp"
#include "rcid/uniqueness.hpp"

namespace rcid::rc_linear {

using uniqueness::SupportSet;

// one atom of a discrete coefficient law: gamma = (alpha, beta_1..beta_p)
struct Atom {
  std::vector<double> gamma;
  double weight = 0.0;
};

class RCModel {
 public:
  RCModel(int p, std::vector<Atom> atoms,
          std::optional<std::vector<std::pair<double, double>>> support_box =
              std::nullopt);
  int p() const { return p_; }
  const std::vector<Atom>& atoms() const { return atoms_; }
  const std::optional<std::vector<std::pair<double, double>>>& support_box()
      const {
    return box_;
  }
  double index(const std::vector<double>& gamma,
               const std::vector<double>& x) const;

 private:
  int p_;
  std::vector<Atom> atoms_;
  std::optional<std::vector<std::pair<double, double>>> box_;
};

struct Dataset {
  int p = 0;
  std::vector<std::vector<double>> x;  // row per observation
  std::vector<double> y;
};

Dataset simulate_linear(const RCModel& model, const SupportSet& x_points,
                        int n_per_point, std::uint64_t seed);

class ConditionalMomentTable {
 public:
  ConditionalMomentTable(std::vector<std::vector<double>> points, int K,
                         std::vector<std::vector<double>> values);
  const std::vector<std::vector<double>>& points() const { return points_; }
  int max_order() const { return K_; }
  // E[Y^k | X = x_i]
  double value(std::size_t i, int k) const { return values_[i][k]; }

 private:
  std::vector<std::vector<double>> points_;
  int K_;
  std::vector<std::vector<double>> values_;  // [point][order]
};

// population oracle via atom enumeration
ConditionalMomentTable conditional_moments(const RCModel& model,
                                           const SupportSet& x_points, int K);

// Rows of multinomial(k; j) x^{j_2..j_{p+1}} over multi-indices |j| = k in
// graded-lex order; the unknowns are the degree-k mixed moments of
// (alpha, beta).
std::vector<std::vector<double>> index_moment_design(
    int k, const std::vector<std::vector<double>>& points, int p);

// Mixed moments s(m), m over p+1 slots, |m| <= K, graded-lex storage.
class MixedMomentSet {
 public:
  MixedMomentSet(int dim, int K);
  static MixedMomentSet from_atoms(const std::vector<Atom>& atoms, int K);
  int dim() const { return dim_; }
  int max_order() const { return K_; }
  double get(const std::vector<int>& mi) const;
  void set(const std::vector<int>& mi, double v);
  const std::vector<std::vector<int>>& index_set() const { return indices_; }
  double get_flat(std::size_t i) const { return values_[i]; }

 private:
  int dim_, K_;
  std::vector<std::vector<int>> indices_;
  std::map<std::vector<int>, std::size_t> lookup_;
  std::vector<double> values_;
};

struct DegreeRankReport {
  int degree = 0;
  int rank = 0;
  int n_unknowns = 0;
  double residual_rel = 0.0;
  bool deficient = false;
  std::vector<double> nullspace;  // over degree-k multi-indices, when deficient
};

struct RecoveryResult {
  MixedMomentSet moments;
  std::vector<DegreeRankReport> ranks;
  bool all_full_rank = true;
};

RecoveryResult recover_mixed_moments(const ConditionalMomentTable& table,
                                     double rank_tol = 1e-10,
                                     double residual_tol = 1e-8);

// --- independent-marginals recovery (R_L1 / R_L2) -------------------------

enum class MarginalMode { r_l1, r_l2 };

struct CoordinateRecovery {
  // CF of beta_j on its scaled grid, from triangular division
  double grid_step = 0.0;
  std::vector<double> grid_t;
  std::vector<cpx> values;
  double t0 = 0.0;  // division radius in the source grid
  // moment-based global extension (mode R_L1)
  std::vector<double> moments;
  std::vector<cpx> extended;        // on the same grid_t
  bool extension_available = false;
};

struct MarginalRecoveryResult {
  CharFnGrid phi_alpha;
  std::vector<CoordinateRecovery> coordinates;
};

struct MarginalOptions {
  double modulus_threshold = 1e-4;  // t0 selection
  double zero_threshold = 1e-6;     // zero marking (mode R_L2)
  int moment_orders = 8;
  // reconstruction grid for the moment extension, per coordinate
  double recon_lo = -2.0, recon_hi = 2.0;
  int recon_nodes = 81;
};

// cf_tables[0] is the x = 0 slice; cf_tables[j] corresponds to points[j-1],
// the j-th column of the upper-triangular configuration.
MarginalRecoveryResult independent_marginals_recover(
    const std::vector<CharFnGrid>& cf_tables,
    const std::vector<std::vector<double>>& points, MarginalMode mode,
    const MarginalOptions& opts = {});

// --- non-identification counterexample --------------------------------------

// homogeneous polynomial over p+1 slots: list of (multi-index, coefficient)
struct HomogeneousPoly {
  int dim = 0;
  int degree = 0;
  std::vector<std::pair<std::vector<int>, double>> terms;
  static HomogeneousPoly from_terms(
      int dim, std::vector<std::pair<std::vector<int>, double>> terms);
  // homogenize a witness over monomials of Z_1..Z_p into p+1 slots
  // (slot 0 receives the degree-completing power)
  static HomogeneousPoly homogenize_witness(
      const std::vector<std::vector<int>>& monomials,
      const std::vector<double>& coeffs, double coeff_tol = 1e-12);
};

struct CounterexampleResult {
  int dim = 0;                       // p + 1
  std::vector<double> nodes_1d;      // per-axis quadrature nodes
  std::vector<double> weights_1d;
  std::vector<double> h_values;      // flattened tensor grid, axis-0 major
  double h_sup = 0.0;                // grid sup of |h|
  double integral_h = 0.0;           // tensor quadrature of h
  double c = 0.0;                    // base-density lower bound used
  double tv_distance = 0.0;          // grid total variation distance
  double base_density = 0.0;         // uniform base value on [-1,1]^{p+1}
  // conditional index moment E[(gamma . y)^k] with y = (1, x^T)
  double conditional_index_moment(const std::vector<double>& y, int k,
                                  bool perturbed) const;
  double h_at(const std::vector<double>& gamma) const;  // closed-form eval
  const HomogeneousPoly& Q() const { return Q_; }

  HomogeneousPoly Q_;
  // 1-d integral tables int gamma^s g^{(a)} dgamma
  std::vector<std::vector<double>> J_;  // [a][s]
  int moment_cap_ = 0;
};

struct CounterexampleGrid {
  int panels_per_axis = 16;
  int gl_order = 8;
  int moment_cap = 8;  // orders of conditional moments supported
};

CounterexampleResult build_counterexample(const HomogeneousPoly& Q,
                                          const CounterexampleGrid& grid = {});

// --- finite moment-problem inversion ----------------------------------------

struct ReconstructionSpec {
  double residual_tol = 1e-8;
  int max_iter = 0;  // 0: NNLS default
  // Optional ridge toward a reference measure on the grid: minimizes
  // ||Aw - s||^2 + lambda ||w - ref||^2. With lambda -> 0 this selects the
  // moment-matching measure closest to the reference; falls back to NNLS
  // when the ridge solution leaves the nonnegative cone. An empty reference
  // means the uniform grid measure.
  double ridge_lambda = 0.0;
  std::vector<double> reference_weights;
};

struct ReconstructionResult {
  std::vector<double> weights;   // one per grid node
  double residual = 0.0;         // relative, on the scaled system
  int rank = 0;
  bool non_unique = false;
  bool success = false;
};

ReconstructionResult reconstruct_distribution(
    const MixedMomentSet& moments,
    const std::vector<std::vector<double>>& grid_nodes,
    const ReconstructionSpec& spec = {});

// 1-d convenience overload
ReconstructionResult reconstruct_distribution(
    const std::vector<double>& moments, const std::vector<double>& grid_nodes,
    const ReconstructionSpec& spec = {});

// --- partial Fourier slice -----------------------------------------------------

// xi -> sum_atoms w e^{i(t alpha + xi . beta)}
std::vector<cpx> partial_fourier_slice(const RCModel& model, double t,
                                       const std::vector<std::vector<double>>& xi);

// --- affine reparametrization ---------------------------------------------------

struct AffineReparam {
  std::vector<std::vector<double>> points;  // M (x - xbar)
  // linear map on mixed moments up to order K:
  // s'(row) = sum_col map[row][col] s(col) over graded-lex indices
  std::vector<std::vector<double>> moment_map;
  std::vector<std::vector<int>> index_set;
};

AffineReparam affine_reparametrize(
    const std::vector<std::vector<double>>& points,
    const std::vector<std::vector<double>>& M, const std::vector<double>& xbar,
    int K);

// apply the pulled-back map to a mixed moment set
MixedMomentSet apply_moment_map(const AffineReparam& rep,
                                const MixedMomentSet& s);

}  // namespace rcid::rc_linear
