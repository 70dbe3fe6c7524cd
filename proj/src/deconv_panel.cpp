#include "rcid/deconv_panel.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

namespace rcid::deconv_panel {

using rc_linear::MixedMomentSet;

CharFnGrid ecf(const std::vector<double>& sample, double t_max, double step) {
  return CharFnGrid::from_sample(sample, t_max, step);
}

// --- helpers -----------------------------------------------------------------

namespace {

void require_aligned(const CharFnGrid& a, const CharFnGrid& b) {
  if (a.half_n() != b.half_n() || a.step() != b.step())
    throw precondition_error("deconv: grids must be aligned");
}

// pointwise division num(t) / den(t) with isolated-zero interpolation of the
// quotient; a run of two or more below-threshold nodes aborts
CharFnGrid divide_with_isolated_zeros(const CharFnGrid& num,
                                      const CharFnGrid& den,
                                      double zero_threshold,
                                      bool den_negated_arg = false,
                                      const char* what = "deconv") {
  require_aligned(num, den);
  const int n = num.size();
  const int n0 = num.index_of_zero();
  std::vector<bool> zero(n, false);
  auto den_at = [&](int i) {
    return den_negated_arg ? den[2 * n0 - i] : den[i];
  };
  int run = 0;
  for (int i = 0; i < n; ++i) {
    zero[i] = std::abs(den_at(i)) < zero_threshold;
    run = zero[i] ? run + 1 : 0;
    if (run >= 2)
      throw numerical_error(std::string(what) +
                            ": denominator vanishes on a non-isolated region");
  }
  std::vector<cpx> vals(n);
  for (int i = 0; i < n; ++i)
    if (!zero[i]) vals[i] = num[i] / den_at(i);
  for (int i = 0; i < n; ++i)
    if (zero[i]) {
      if (i == 0)
        vals[i] = vals[1];
      else if (i == n - 1)
        vals[i] = vals[n - 2];
      else
        vals[i] = 0.5 * (vals[i - 1] + vals[i + 1]);
    }
  CharFnGrid out(num.step(), num.half_n(), std::move(vals),
                 CfProvenance::population_closed_form);
  out.hermitize();
  return out;
}

}  // namespace

CharFnGrid two_sample_deconvolution(const CharFnGrid& phi_error,
                                    const CharFnGrid& phi_sum,
                                    double zero_threshold) {
  return divide_with_isolated_zeros(phi_sum, phi_error, zero_threshold, false,
                                    "two_sample_deconvolution");
}

// --- Kotlarski ------------------------------------------------------------------

KotlarskiResult kotlarski_recover(const CharFnGrid& phi_y1,
                                  const CharFnGrid& phi_y2,
                                  const CharFnGrid& phi_y2_minus_y1,
                                  const KotlarskiOptions& opts) {
  require_aligned(phi_y1, phi_y2);
  require_aligned(phi_y1, phi_y2_minus_y1);
  const int n0 = phi_y1.index_of_zero();
  const int N = phi_y1.half_n();
  const double step = phi_y1.step();
  const int n = phi_y1.size();

  // t0: largest symmetric radius with all three moduli above threshold
  int k0 = 0;
  for (int k = 1; k <= N; ++k) {
    auto ok = [&](int i) {
      return std::abs(phi_y1[i]) > opts.modulus_threshold &&
             std::abs(phi_y2[i]) > opts.modulus_threshold &&
             std::abs(phi_y2_minus_y1[i]) > opts.modulus_threshold;
    };
    if (!ok(n0 + k) || !ok(n0 - k)) break;
    k0 = k;
  }
  if (k0 < 8)
    throw numerical_error("kotlarski: usable radius around 0 is too small");

  // ratio(t) = phi_Y1 phi_{Y2-Y1} / phi_Y2 = phi_eps1(t) phi_eps1(-t)
  // = |phi_eps1(t)|^2; available wherever |phi_Y2| is above threshold
  std::vector<double> ratio_mod(n, -1.0);  // |phi_eps1| where available
  double max_imag = 0.0;
  for (int i = 0; i < n; ++i) {
    if (std::abs(phi_y2[i]) <= opts.modulus_threshold) continue;
    cpx r = phi_y1[i] * phi_y2_minus_y1[i] / phi_y2[i];
    max_imag = std::max(max_imag, std::abs(r.imag()));
    double re = std::max(r.real(), 0.0);
    ratio_mod[i] = std::sqrt(re);
  }
  if (max_imag > 1e-6)
    throw numerical_error(
        "kotlarski: ratio system is not real; inputs inconsistent with the "
        "model structure");

  // phase of the recovered CF near 0 pins b: the positive square root on
  // the core region has zero phase, so b is the phase derivative of the
  // (complex) ratio-based CF estimate at 0
  KotlarskiResult res{phi_y1, phi_y1, phi_y1, 0.0, 0.0, {}, {}, max_imag};
  res.t0 = k0 * step;

  {
    cpx r_p = phi_y1[n0 + 1] * phi_y2_minus_y1[n0 + 1] / phi_y2[n0 + 1];
    double phase = 0.5 * std::arg(r_p);  // arg of phi_eps1(h) estimate
    res.b_estimate = phase / step;
    if (std::abs(res.b_estimate) > opts.phase_tol * 10 + 1e-8) {
      // mean-zero normalization: the recovered phase derivative must vanish
      throw numerical_error("kotlarski: phase derivative at 0 exceeds the "
                            "mean-zero tolerance");
    }
  }

  // core CF of eps1 on (-t0, t0): positive square root
  std::vector<cpx> core(2 * k0 + 1);
  for (int k = -k0; k <= k0; ++k) core[k0 + k] = cpx(ratio_mod[n0 + k], 0.0);
  CharFnGrid phi_eps1_core(step, k0, std::move(core),
                           CfProvenance::population_closed_form);
  phi_eps1_core.hermitize();

  // moments by symmetric-stencil differentiation at 0
  double window = std::min(0.9 * res.t0, 0.45 * res.t0 + 0.45);
  res.eps1_moments =
      cf_moments_local_fit(phi_eps1_core, opts.moment_orders, window);

  // global extension: finite moment-problem inversion on the declared
  // support, ridge-regularized toward the uniform reference measure
  const auto& gl = num::gauss_legendre(opts.recon_nodes);
  std::vector<double> nodes(opts.recon_nodes), ref(opts.recon_nodes);
  const double mid = 0.5 * (opts.recon_lo + opts.recon_hi);
  const double halfw = 0.5 * (opts.recon_hi - opts.recon_lo);
  for (int i = 0; i < opts.recon_nodes; ++i) {
    nodes[i] = mid + halfw * gl.nodes[i];
    ref[i] = 0.5 * gl.weights[i];  // uniform density discretized exactly
  }
  rc_linear::ReconstructionSpec rspec;
  rspec.ridge_lambda = 1e-10;
  rspec.reference_weights = ref;
  rspec.residual_tol = 1e-4;
  auto recon = rc_linear::reconstruct_distribution(res.eps1_moments, nodes, rspec);
  if (!recon.success)
    throw numerical_error("kotlarski: moment reconstruction of eps1 failed");

  auto extension_cf = [&](double t) {
    cpx acc(0, 0);
    for (std::size_t q = 0; q < nodes.size(); ++q)
      acc += recon.weights[q] * std::exp(cpx(0, t * nodes[q]));
    return acc;
  };

  // assemble the global phi_eps1: modulus from the ratio wherever available,
  // sign/phase from the extension; extension alone elsewhere
  std::vector<cpx> eps1(n);
  for (int i = 0; i < n; ++i) {
    cpx ext = extension_cf(phi_y1.t(i));
    if (ratio_mod[i] >= 0.0 && std::abs(ext) > 1e-5)
      eps1[i] = ratio_mod[i] * ext / std::abs(ext);
    else
      eps1[i] = ext;
  }
  CharFnGrid phi_eps1(step, N, std::move(eps1),
                      CfProvenance::population_closed_form);
  phi_eps1.hermitize();

  // isolated zeros of the recovered eps1 CF: sign changes of the real part
  // between nodes with small modulus, located by linear interpolation
  for (int i = 0; i + 1 < n; ++i) {
    double a = phi_eps1[i].real(), b = phi_eps1[i + 1].real();
    if (a * b < 0 && std::abs(phi_eps1[i]) < 0.05 &&
        std::abs(phi_eps1[i + 1]) < 0.05) {
      double frac = a / (a - b);
      res.zero_locations_eps1.push_back(phi_eps1.t(i) + frac * step);
    }
  }
  {
    int run = 0;
    for (int i = 0; i < n; ++i) {
      run = std::abs(phi_eps1[i]) < opts.zero_threshold ? run + 1 : 0;
      if (run >= 2)
        throw numerical_error(
            "kotlarski: recovered phi_eps1 vanishes on a non-isolated region");
    }
  }

  // completion by division; grid nodes falling inside the narrow zero
  // neighborhoods are crossed by continuity
  res.phi_eps1 = phi_eps1;
  res.phi_delta = divide_with_isolated_zeros(phi_y1, phi_eps1, 1e-4, false,
                                             "kotlarski delta");
  res.phi_eps2 = divide_with_isolated_zeros(phi_y2_minus_y1, phi_eps1, 1e-4,
                                            true, "kotlarski eps2");
  return res;
}

// --- Vandermonde change of variables ----------------------------------------------

ThetaResult theta_change_of_variables(const std::vector<double>& v,
                                      const std::vector<double>& x,
                                      double degeneracy_tol) {
  const int T = static_cast<int>(x.size());
  if (static_cast<int>(v.size()) != T)
    throw precondition_error("theta: v and x must share length T");
  for (int j = 0; j < T; ++j) {
    if (std::abs(x[j]) <= degeneracy_tol)
      throw precondition_error("theta: x outside X_0 (zero coordinate)");
    for (int m = j + 1; m < T; ++m)
      if (std::abs(x[m] - x[j]) <= degeneracy_tol)
        throw precondition_error("theta: x outside X_0 (coincident coordinates)");
  }

  ThetaResult res;
  res.b.assign(T, std::vector<double>(T, 0.0));
  for (int j = 0; j < T; ++j) {
    double denom = 1.0;
    std::vector<double> others;
    for (int m = 0; m < T; ++m)
      if (m != j) {
        denom *= (x[m] - x[j]);
        others.push_back(x[m]);
      }
    // elementary symmetric polynomials of the remaining coordinates
    std::vector<double> e(T, 0.0);
    e[0] = 1.0;
    for (double xv : others)
      for (int s = T - 1; s >= 1; --s) e[s] += e[s - 1] * xv;
    for (int k = 1; k <= T; ++k) {
      double sign = (k % 2 == 0) ? -1.0 : 1.0;  // (-1)^{k+1}
      double numer = (k == T) ? ((T % 2 == 0) ? -1.0 : 1.0) : sign * e[T - k];
      res.b[j][k - 1] = numer / denom;
    }
  }

  // Theta(v, x) = sum_k v_k sum_j b_jk x_j^T
  double theta = 0.0;
  for (int k = 0; k < T; ++k) {
    double inner = 0.0;
    for (int j = 0; j < T; ++j) inner += res.b[j][k] * std::pow(x[j], T);
    theta += v[k] * inner;
  }
  res.theta = theta;

  // cross-validation: direct linear solve of V(x)^T t = v, Theta = t . x^T
  Eigen::MatrixXd V(T, T);
  for (int j = 0; j < T; ++j)
    for (int k = 0; k < T; ++k) V(j, k) = std::pow(x[j], k);
  Eigen::VectorXd vv(T);
  for (int k = 0; k < T; ++k) vv(k) = v[k];
  Eigen::VectorXd t = V.transpose().fullPivLu().solve(vv);
  double direct = 0.0;
  for (int j = 0; j < T; ++j) direct += t(j) * std::pow(x[j], T);
  res.theta_direct = direct;
  res.agreement = std::abs(res.theta - res.theta_direct);

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(V);
  res.vandermonde_condition =
      svd.singularValues()(0) / svd.singularValues()(T - 1);
  return res;
}

// --- panel model ------------------------------------------------------------------

ErrorLaw uniform_error(double a, double b) {
  return ErrorLaw{
      "uniform", [a, b](double t) { return cf::uniform(t, a, b); },
      [a, b](int m) {
        // E X^m for X ~ U[a, b]
        return (std::pow(b, m + 1) - std::pow(a, m + 1)) / ((m + 1) * (b - a));
      }};
}

ErrorLaw normal_error(double sd) {
  return ErrorLaw{"normal", [sd](double t) { return cf::normal(t, 0.0, sd); },
                  [sd](int m) {
                    if (m % 2 == 1) return 0.0;
                    double v = 1.0;
                    for (int j = 1; j < m; j += 2) v *= j;
                    return v * std::pow(sd, m);
                  }};
}

ErrorLaw point_mass_error(double c) {
  return ErrorLaw{"point_mass",
                  [c](double t) { return cf::point_mass(t, c); },
                  [c](int m) { return std::pow(c, m); }};
}

void PanelModel::validate() const {
  if (T < 1) throw precondition_error("PanelModel: T >= 1");
  if (static_cast<int>(errors.size()) != T)
    throw precondition_error("PanelModel: one error law per period");
  if (coefficient_atoms.empty())
    throw data_error("PanelModel: empty coefficient law");
  double total = 0.0;
  for (const auto& a : coefficient_atoms) {
    if (static_cast<int>(a.gamma.size()) != T + 1)
      throw data_error("PanelModel: atoms must have T+1 slots");
    total += a.weight;
  }
  if (std::abs(total - 1.0) > 1e-9)
    throw data_error("PanelModel: weights must sum to 1");
  if (std::abs(errors[0].moment(1)) > 1e-10)
    throw data_error("PanelModel: eps_1 must be mean zero");
}

double PanelModel::delta_at_stayer(const std::vector<double>& gamma) const {
  double d = gamma[0];
  double rp = 1.0;
  for (int j = 1; j <= T; ++j) {
    rp *= stayer_value;
    d += gamma[j] * rp;
  }
  return d;
}

cpx PanelModel::phi_delta(double t) const {
  cpx acc(0, 0);
  for (const auto& a : coefficient_atoms)
    acc += a.weight * std::exp(cpx(0, t * delta_at_stayer(a.gamma)));
  return acc;
}

cpx PanelModel::phi_y(int period, double t) const {
  return phi_delta(t) * errors.at(period - 1).cf(t);
}

cpx PanelModel::phi_y_diff(int period, double t) const {
  // Y_t - Y_1 = eps_t - eps_1 at the stayer point
  return errors.at(period - 1).cf(t) * errors.at(0).cf(-t);
}

PanelEpsilonResult panel_epsilon_recover(const PanelModel& model, double t_max,
                                         double step,
                                         const KotlarskiOptions& opts) {
  model.validate();
  if (model.T < 2)
    throw precondition_error("panel_epsilon_recover: need T >= 2");

  auto grid_of = [&](const std::function<cpx(double)>& f) {
    return CharFnGrid::from_callable(f, t_max, step);
  };
  CharFnGrid y1 = grid_of([&](double t) { return model.phi_y(1, t); });
  CharFnGrid y2 = grid_of([&](double t) { return model.phi_y(2, t); });
  CharFnGrid d21 = grid_of([&](double t) { return model.phi_y_diff(2, t); });

  KotlarskiResult first = kotlarski_recover(y1, y2, d21, opts);
  PanelEpsilonResult out{first.phi_delta, {}, first};
  out.phi_eps.push_back(first.phi_eps1);
  out.phi_eps.push_back(first.phi_eps2);
  for (int t = 3; t <= model.T; ++t) {
    CharFnGrid dt1 = grid_of([&](double u) { return model.phi_y_diff(t, u); });
    out.phi_eps.push_back(divide_with_isolated_zeros(
        dt1, first.phi_eps1, 1e-4, true, "panel eps"));
  }
  return out;
}

// --- joint conditional moments ------------------------------------------------------

namespace {

// all componentwise-below multi-indices a <= k
void enumerate_below(const std::vector<int>& k, std::vector<int>& cur, int pos,
                     std::vector<std::vector<int>>& out) {
  if (pos == static_cast<int>(k.size())) {
    out.push_back(cur);
    return;
  }
  for (int v = 0; v <= k[pos]; ++v) {
    cur.push_back(v);
    enumerate_below(k, cur, pos + 1, out);
    cur.pop_back();
  }
}

double atom_index_moment(const PanelModel& model,
                         const std::vector<double>& x,
                         const std::vector<int>& a) {
  double acc = 0.0;
  for (const auto& atom : model.coefficient_atoms) {
    double v = atom.weight;
    for (int t = 0; t < model.T; ++t) {
      double idx = atom.gamma[0];
      double xp = 1.0;
      for (int j = 1; j <= model.T; ++j) {
        xp *= x[t];
        idx += atom.gamma[j] * xp;
      }
      for (int e = 0; e < a[t]; ++e) v *= idx;
    }
    acc += v;
  }
  return acc;
}

}  // namespace

JointMomentTable joint_conditional_moments(
    const PanelModel& model, const std::vector<std::vector<double>>& x_points,
    int K) {
  model.validate();
  JointMomentTable tab;
  tab.T = model.T;
  tab.x_points = x_points;
  for (int d = 1; d <= K; ++d)
    for (auto& k : num::multi_indices_of_degree(model.T, d))
      tab.period_indices.push_back(k);

  for (const auto& x : x_points) {
    if (static_cast<int>(x.size()) != model.T)
      throw precondition_error("joint moments: x must have T entries");
    std::vector<double> row;
    for (const auto& k : tab.period_indices) {
      std::vector<std::vector<int>> below;
      std::vector<int> cur;
      enumerate_below(k, cur, 0, below);
      double total = 0.0;
      for (const auto& a : below) {
        double coef = 1.0;
        for (int t = 0; t < model.T; ++t)
          coef *= num::binomial(k[t], a[t]) *
                  model.errors[t].moment(k[t] - a[t]);
        if (coef == 0.0) continue;
        total += coef * atom_index_moment(model, x, a);
      }
      row.push_back(total);
    }
    tab.values.push_back(std::move(row));
  }
  return tab;
}

JointMomentTable joint_conditional_moments_single_period(
    const PanelModel& model, const std::vector<std::vector<double>>& x_points,
    int K) {
  JointMomentTable full = joint_conditional_moments(model, x_points, K);
  JointMomentTable tab;
  tab.T = full.T;
  tab.x_points = full.x_points;
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < full.period_indices.size(); ++i) {
    bool single = true;
    for (int t = 1; t < full.T; ++t)
      if (full.period_indices[i][t] != 0) single = false;
    if (single) {
      keep.push_back(i);
      tab.period_indices.push_back(full.period_indices[i]);
    }
  }
  for (const auto& row : full.values) {
    std::vector<double> r;
    for (auto i : keep) r.push_back(row[i]);
    tab.values.push_back(std::move(r));
  }
  return tab;
}

// --- panel moment recovery ------------------------------------------------------------

PanelRecoveryResult panel_moment_recover(
    const JointMomentTable& table,
    const std::vector<std::vector<double>>& eps_moments, int K,
    double rank_tol, double residual_tol) {
  const int T = table.T;
  if (static_cast<int>(eps_moments.size()) != T)
    throw precondition_error("panel recovery: eps moments per period required");

  // index lookup within the table
  std::map<std::vector<int>, std::size_t> k_index;
  for (std::size_t i = 0; i < table.period_indices.size(); ++i)
    k_index[table.period_indices[i]] = i;

  auto eps_moment = [&](int t, int m) -> double {
    if (m == 0) return 1.0;
    if (m >= static_cast<int>(eps_moments[t].size()))
      throw precondition_error("panel recovery: missing eps moment");
    return eps_moments[t][m];
  };

  // deconvolve the additive errors point by point:
  // E[prod Y^k] = sum_{a<=k} prod C(k_t,a_t) E[prod I^a] prod m_eps(k-a)
  const std::size_t n_pts = table.x_points.size();
  std::vector<std::map<std::vector<int>, double>> index_moments(n_pts);
  // process in graded order so lower |a| are available
  for (std::size_t pi = 0; pi < n_pts; ++pi) {
    index_moments[pi][std::vector<int>(T, 0)] = 1.0;
    for (const auto& k : table.period_indices) {
      auto it = k_index.find(k);
      if (it == k_index.end()) continue;
      double yk = table.values[pi][it->second];
      std::vector<std::vector<int>> below;
      std::vector<int> cur;
      enumerate_below(k, cur, 0, below);
      double correction = 0.0;
      for (const auto& a : below) {
        if (a == k) continue;
        auto jt = index_moments[pi].find(a);
        if (jt == index_moments[pi].end())
          throw precondition_error(
              "panel recovery: table is not closed under componentwise order");
        double coef = 1.0;
        for (int t = 0; t < T; ++t)
          coef *= num::binomial(k[t], a[t]) * eps_moment(t, k[t] - a[t]);
        correction += coef * jt->second;
      }
      index_moments[pi][k] = yk - correction;
    }
  }

  // per-degree joint polynomial design over mixed moments of (alpha, beta)
  const int dim = T + 1;
  PanelRecoveryResult out{MixedMomentSet(dim, K), {}, true};
  for (int deg = 1; deg <= K; ++deg) {
    auto unknowns = num::multi_indices_of_degree(dim, deg);
    std::map<std::vector<int>, std::size_t> col_of;
    for (std::size_t c = 0; c < unknowns.size(); ++c) col_of[unknowns[c]] = c;

    std::vector<std::vector<double>> rows;
    std::vector<double> rhs;
    for (std::size_t pi = 0; pi < n_pts; ++pi) {
      const auto& x = table.x_points[pi];
      for (const auto& k : table.period_indices) {
        int total = 0;
        for (int t = 0; t < T; ++t) total += k[t];
        if (total != deg) continue;
        auto jt = index_moments[pi].find(k);
        if (jt == index_moments[pi].end()) continue;
        // expand prod_t I_t^{k_t}, I_t = g0 + sum_j g_j x_t^j
        num::MultiPoly prod = num::MultiPoly::constant(dim, 1.0);
        for (int t = 0; t < T; ++t) {
          if (k[t] == 0) continue;
          num::MultiPoly I(dim);
          I = num::MultiPoly::variable(dim, 0);
          double xp = 1.0;
          for (int j = 1; j <= T; ++j) {
            xp *= x[t];
            I = I + num::MultiPoly::constant(dim, xp) *
                        num::MultiPoly::variable(dim, j);
          }
          prod = prod * I.pow(k[t]);
        }
        std::vector<double> row(unknowns.size(), 0.0);
        for (const auto& [e, c] : prod.terms()) {
          auto ct = col_of.find(e);
          if (ct == col_of.end())
            throw numerical_error("panel recovery: degree bookkeeping failure");
          row[ct->second] += c;
        }
        rows.push_back(std::move(row));
        rhs.push_back(jt->second);
      }
    }
    if (rows.empty()) continue;

    const int nr = static_cast<int>(rows.size());
    const int nc = static_cast<int>(unknowns.size());
    Eigen::MatrixXd A(nr, nc);
    Eigen::VectorXd b(nr);
    for (int r = 0; r < nr; ++r) {
      b(r) = rhs[r];
      for (int c = 0; c < nc; ++c) A(r, c) = rows[r][c];
    }
    Eigen::VectorXd scale(nc);
    for (int c = 0; c < nc; ++c) {
      double nrm = A.col(c).norm();
      scale(c) = nrm > 0 ? nrm : 1.0;
      A.col(c) /= scale(c);
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(
        A, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    double cutoff = rank_tol * sv(0);
    int rank = 0;
    for (int i = 0; i < sv.size(); ++i)
      if (sv(i) > cutoff) ++rank;
    Eigen::VectorXd z = svd.matrixU().transpose() * b;
    Eigen::VectorXd w = Eigen::VectorXd::Zero(nc);
    for (int i = 0; i < rank; ++i) w += (z(i) / sv(i)) * svd.matrixV().col(i);
    Eigen::VectorXd sol = w.cwiseQuotient(scale);

    rc_linear::DegreeRankReport rep;
    rep.degree = deg;
    rep.rank = rank;
    rep.n_unknowns = nc;
    double bn = b.norm();
    rep.residual_rel = (A * w - b).norm() / (bn > 1e-300 ? bn : 1.0);
    rep.deficient = rank < nc;
    if (rep.deficient) {
      Eigen::VectorXd v = svd.matrixV().col(nc - 1);
      for (int c = 0; c < nc; ++c) v(c) /= scale(c);
      v.normalize();
      rep.nullspace.assign(v.data(), v.data() + nc);
      out.all_full_rank = false;
    } else if (rep.residual_rel > residual_tol) {
      out.all_full_rank = false;
    }
    for (int c = 0; c < nc; ++c) out.moments.set(unknowns[c], sol(c));
    out.ranks.push_back(std::move(rep));
  }
  return out;
}

// --- single-index reduction --------------------------------------------------------------

SingleIndexResult single_index_reduce(const SingleIndexData& data,
                                      const SingleIndexOptions& opts) {
  const std::size_t n = data.y1.size();
  if (data.y2.size() != n || data.x1.size() != n || data.x2.size() != n)
    throw precondition_error("single_index_reduce: ragged input");
  if (!opts.monotone_f_declared)
    throw precondition_error(
        "single_index_reduce: monotone transform must be declared");

  SingleIndexResult res;
  res.indicator.reserve(n);
  res.delta_x.reserve(n);
  std::vector<std::size_t> stayers;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& a = data.x1[i];
    const auto& b = data.x2[i];
    if (a.size() != b.size())
      throw precondition_error("single_index_reduce: dimension mismatch");
    bool same = true;
    std::vector<double> dx(a.size());
    for (std::size_t j = 0; j < a.size(); ++j) {
      dx[j] = b[j] - a[j];
      if (std::abs(dx[j]) > opts.stayer_tol) same = false;
    }
    if (same) {
      ++res.stayer_count;
      ++res.tie_count;
      stayers.push_back(i);
    }
    res.indicator.push_back(data.y2[i] >= data.y1[i] ? 1 : 0);
    res.delta_x.push_back(std::move(dx));
  }
  res.degenerate = res.tie_count == static_cast<long>(n);

  if (opts.recover_noise) {
    if (stayers.empty())
      throw precondition_error(
          "single_index_reduce: stayer subsample is empty (R_SI(i) violated)");
    std::vector<double> y1s, y2s, d21;
    for (auto i : stayers) {
      y1s.push_back(data.y1[i]);
      y2s.push_back(data.y2[i]);
      d21.push_back(data.y2[i] - data.y1[i]);
    }
    CharFnGrid phi1 = ecf(y1s, opts.t_max, opts.step);
    CharFnGrid phi2 = ecf(y2s, opts.t_max, opts.step);
    CharFnGrid phid = ecf(d21, opts.t_max, opts.step);
    res.eta_recovery = kotlarski_recover(phi1, phi2, phid, opts.kotlarski);
  }
  return res;
}

}  // namespace rcid::deconv_panel
