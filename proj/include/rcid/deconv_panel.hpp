#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "rcid/char_fn.hpp"
#include "rcid/rc_linear.hpp"

namespace rcid::deconv_panel {

// empirical characteristic function on a symmetric grid
CharFnGrid ecf(const std::vector<double>& sample, double t_max, double step);

struct KotlarskiOptions {
  double modulus_threshold = 1e-4;  // t0 selection
  double zero_threshold = 1e-6;     // isolated-zero marking
  int moment_orders = 8;
  // reconstruction grid for the global sign extension of phi_eps1
  double recon_lo = -2.0, recon_hi = 2.0;
  int recon_nodes = 81;
  double phase_tol = 1e-6;  // bound on the recovered phase derivative at 0
};

struct KotlarskiResult {
  CharFnGrid phi_delta;
  CharFnGrid phi_eps1;
  CharFnGrid phi_eps2;
  double t0 = 0.0;
  double b_estimate = 0.0;           // phase derivative of phi_eps1 at 0
  std::vector<double> eps1_moments;  // from numerical differentiation at 0
  std::vector<double> zero_locations_eps1;
  double max_ratio_imag = 0.0;       // consistency diagnostic of the ratio
};

// Y_t = delta + eps_t, t = 1,2; inputs are the CFs of Y_1, Y_2, Y_2 - Y_1.
// The ratio phi_Y1 phi_{Y2-Y1} / phi_Y2 equals phi_eps1(t) phi_eps1(-t); its
// continuous square root recovers phi_eps1 up to e^{ibt}, pinned to b = 0 by
// the mean-zero normalization. Moments + reconstruction fix the branch signs
// across the isolated zeros; delta and eps2 follow by division.
KotlarskiResult kotlarski_recover(const CharFnGrid& phi_y1,
                                  const CharFnGrid& phi_y2,
                                  const CharFnGrid& phi_y2_minus_y1,
                                  const KotlarskiOptions& opts = {});

// pointwise ratio with isolated-zero interpolation
CharFnGrid two_sample_deconvolution(const CharFnGrid& phi_error,
                                    const CharFnGrid& phi_sum,
                                    double zero_threshold = 1e-6);

// --- Vandermonde change of variables -----------------------------------------

struct ThetaResult {
  double theta = 0.0;                       // closed form
  double theta_direct = 0.0;               // via direct linear solve
  std::vector<std::vector<double>> b;      // b[j][k], closed form
  double vandermonde_condition = 0.0;
  double agreement = 0.0;                  // |theta - theta_direct|
};

// x must lie in X_0: all coordinates nonzero, pairwise distinct
ThetaResult theta_change_of_variables(const std::vector<double>& v,
                                      const std::vector<double>& x,
                                      double degeneracy_tol = 1e-12);

// --- panel model ----------------------------------------------------------------

struct ErrorLaw {
  std::string name;
  std::function<cpx(double)> cf;
  std::function<double(int)> moment;  // E eps^m
};
ErrorLaw uniform_error(double a = -1.0, double b = 1.0);
ErrorLaw normal_error(double sd);
ErrorLaw point_mass_error(double c);

struct PanelModel {
  int T = 0;
  // atoms over (alpha, beta_1..beta_T)
  std::vector<rc_linear::Atom> coefficient_atoms;
  std::vector<ErrorLaw> errors;  // one per period; errors[0] must be mean zero
  double stayer_value = 1.0;     // r with r*1_c in the support

  void validate() const;
  double delta_at_stayer(const std::vector<double>& gamma) const;
  cpx phi_delta(double t) const;   // CF of alpha + sum beta_k r^k
  cpx phi_y(int period, double t) const;          // at the stayer point
  cpx phi_y_diff(int period, double t) const;     // CF of Y_t - Y_1
};

struct PanelEpsilonResult {
  CharFnGrid phi_delta;
  std::vector<CharFnGrid> phi_eps;  // per period
  KotlarskiResult first_pair;       // diagnostics from the (1,2) pair
};

// stayer-based recovery of all error CFs from population outputs
PanelEpsilonResult panel_epsilon_recover(const PanelModel& model, double t_max,
                                         double step,
                                         const KotlarskiOptions& opts = {});

// --- panel joint-moment recovery ----------------------------------------------

// E[prod_t Y_t^{k_t} | X = x] for multi-indices k over periods
struct JointMomentTable {
  int T = 0;
  std::vector<std::vector<double>> x_points;       // each of length T
  std::vector<std::vector<int>> period_indices;    // k vectors, |k| <= K
  std::vector<std::vector<double>> values;         // [point][k index]
};

// population oracle from the model
JointMomentTable joint_conditional_moments(
    const PanelModel& model, const std::vector<std::vector<double>>& x_points,
    int K);
// restriction to single-period powers of Y_1 (the rank-deficiency control)
JointMomentTable joint_conditional_moments_single_period(
    const PanelModel& model, const std::vector<std::vector<double>>& x_points,
    int K);

struct PanelRecoveryResult {
  rc_linear::MixedMomentSet moments;  // of (alpha, beta_1..beta_T)
  std::vector<rc_linear::DegreeRankReport> ranks;
  bool all_full_rank = true;
};

// eps_moments[t][m] = E[eps_{t+1}^m]; deconvolves the additive errors by the
// multinomial triangular relation, then solves the joint polynomial design
PanelRecoveryResult panel_moment_recover(
    const JointMomentTable& table,
    const std::vector<std::vector<double>>& eps_moments, int K,
    double rank_tol = 1e-10, double residual_tol = 1e-8);

// --- single-index reduction ------------------------------------------------------

struct SingleIndexData {
  // per unit: X_t vectors and outcomes for t = 1, 2
  std::vector<std::vector<double>> x1, x2;
  std::vector<double> y1, y2;
};

struct SingleIndexOptions {
  bool monotone_f_declared = true;
  bool recover_noise = false;
  double stayer_tol = 0.0;  // exact match by default
  double t_max = 5.0, step = 0.01;
  KotlarskiOptions kotlarski;
};

struct SingleIndexResult {
  std::vector<int> indicator;                  // 1{Y2 >= Y1}
  std::vector<std::vector<double>> delta_x;    // X2 - X1
  long stayer_count = 0;
  long tie_count = 0;                          // X2 == X1 rows
  bool degenerate = false;                     // all rows tied
  std::optional<KotlarskiResult> eta_recovery; // when noise recovery requested
};

SingleIndexResult single_index_reduce(const SingleIndexData& data,
                                      const SingleIndexOptions& opts = {});

}  // namespace rcid::deconv_panel
