// Acceptance suite: one line per criterion, nonzero exit on any failure.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rcid/char_fn.hpp"
#include "rcid/deconv_panel.hpp"
#include "rcid/harness.hpp"
#include "rcid/momentseq.hpp"
#include "rcid/numerics.hpp"
#include "rcid/rc_linear.hpp"
#include "rcid/riesz_basis.hpp"
#include "rcid/sphere_bc.hpp"
#include "rcid/uniqueness.hpp"

using namespace rcid;
namespace uq = rcid::uniqueness;
namespace rl = rcid::rc_linear;
namespace dp = rcid::deconv_panel;
namespace sb = rcid::sphere_bc;
namespace rb = rcid::riesz_basis;
namespace ms = rcid::momentseq;

namespace {

struct Criterion {
  int id;
  std::string name;
  double time_limit_s;
  std::function<bool(std::string&)> run;
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3g", v);
  return buf;
}

bool approx_leq(double value, double bound, std::string& detail,
                const std::string& what) {
  detail += what + "=" + fmt(value) + " ";
  return value <= bound;
}

// ---- criterion 1 -----------------------------------------------------------

bool criterion1(std::string& detail) {
  // Degree-4 recovery needs C(2+4,4) = 15 unknowns and five fan slopes, so
  // the fan is realized with 25 points (the op's own precondition rules out
  // the nominal 12-point configuration).
  rl::RCModel model(2, {{{0.5, 1.0, -0.5}, 0.3},
                        {{-0.2, 0.4, 0.8}, 0.2},
                        {{1.1, -0.3, 0.2}, 0.4},
                        {{0.0, 0.7, 1.5}, 0.1}});
  auto V = uq::SupportSet::fan({1, 2, 3, 4, 5}, 25);
  int K = 4;
  auto tbl = rl::conditional_moments(model, V, K);
  auto rec = rl::recover_mixed_moments(tbl);
  if (!rec.all_full_rank) {
    detail = "rank deficient";
    return false;
  }
  auto oracle = rl::MixedMomentSet::from_atoms(model.atoms(), K);
  double max_rel = 0.0;
  for (std::size_t i = 0; i < oracle.index_set().size(); ++i) {
    double want = oracle.get_flat(i);
    double got = rec.moments.get_flat(i);
    max_rel = std::max(max_rel,
                       std::abs(got - want) / std::max(1.0, std::abs(want)));
  }
  return approx_leq(max_rel, 1e-8, detail, "max_rel_err");
}

// ---- criterion 2 -----------------------------------------------------------

bool criterion2(std::string& detail) {
  std::vector<std::vector<double>> pts;
  for (int i = 1; i <= 10; ++i) {
    double x = -1.2 + 2.4 * i / 10.0;
    pts.push_back({x, x * x});
  }
  auto V = uq::SupportSet::from_points(pts);
  auto rk = uq::polynomial_uniqueness_rank(V, 2);
  if (rk.full_rank || rk.rank != 5) {
    detail = "expected rank 5 of 6";
    return false;
  }
  // cosine similarity of the witness with Z1^2 - Z2
  std::vector<double> target{0, 0, -1, 1, 0, 0};
  double nt = std::sqrt(2.0), dot = 0.0;
  for (int i = 0; i < 6; ++i) dot += rk.witness[i] * target[i] / nt;
  detail += "cos=" + fmt(std::abs(dot)) + " ";
  if (std::abs(dot) < 0.999) return false;

  auto Q = rl::HomogeneousPoly::homogenize_witness(rk.monomials, rk.witness);
  auto ce = rl::build_counterexample(Q);
  double max_diff = 0.0;
  for (int xi = 0; xi < 20; ++xi) {
    double x = -2.0 + 4.0 * xi / 19.0;
    std::vector<double> y{1.0, x, x * x};
    for (int k = 1; k <= 3; ++k)
      max_diff = std::max(max_diff,
                          std::abs(ce.conditional_index_moment(y, k, true) -
                                   ce.conditional_index_moment(y, k, false)));
  }
  if (!approx_leq(max_diff, 1e-6, detail, "moment_diff")) return false;
  detail += "tv=" + fmt(ce.tv_distance) + " ";
  if (ce.tv_distance < 1e-2) return false;
  return approx_leq(std::abs(ce.integral_h), 1e-8, detail, "int_h");
}

// ---- criterion 3 -----------------------------------------------------------

bool criterion3(std::string& detail) {
  double worst = 0.0;
  for (int m = 0; m <= 10; ++m) {
    // circle: independent antiderivative oracle for the closed form
    double lam = sb::eigenvalue_lambda(m, 1);
    double oracle = 2.0 * std::sin((2 * m + 1) * M_PI_2) / (2 * m + 1);
    worst = std::max(worst, std::abs(lam - oracle));
    for (double phi_s : {0.3, 1.7}) {
      std::array<double, 3> s{std::cos(phi_s), std::sin(phi_s), 0.0};
      auto f = [m](const std::array<double, 3>& u) {
        return 1.0 / (2.0 * M_PI) +
               0.1 * std::cos((2 * m + 1) * std::atan2(u[1], u[0]));
      };
      double got = sb::hemispherical_forward_smooth(1, f, s, 64);
      worst = std::max(
          worst, std::abs(got - 0.1 * lam * std::cos((2 * m + 1) * phi_s)));
    }
    // sphere: zonal harmonics through std::legendre
    double lam2 = sb::eigenvalue_lambda(m, 2);
    int l = 2 * m + 1;
    for (double colat : {0.5, 1.2}) {
      std::array<double, 3> s{std::sin(colat), 0.0, std::cos(colat)};
      auto f = [l](const std::array<double, 3>& u) {
        return 1.0 / (4.0 * M_PI) + 0.1 * std::legendre(l, u[2]);
      };
      double got = sb::hemispherical_forward_smooth(2, f, s, 48);
      worst = std::max(
          worst, std::abs(got - 0.1 * lam2 * std::legendre(l, std::cos(colat))));
    }
  }
  return approx_leq(worst, 1e-10, detail, "max_err");
}

// ---- criterion 4 -----------------------------------------------------------

bool criterion4(std::string& detail) {
  // circle: grid forward at 4096 nodes, inversion at M in {8,16,32,64}
  {
    auto grid = sb::SphereGrid::circle(4096);
    std::vector<double> fminus(grid.nodes.size(), 0.0);
    for (std::size_t i = 0; i < fminus.size(); ++i) {
      double c = 1.0;
      for (int m = 0; m < 80; ++m) {
        fminus[i] += c * std::cos((2 * m + 1) * (grid.theta[i] - 0.4 * m));
        c *= 0.8;
      }
    }
    std::vector<double> f(grid.nodes.size());
    for (std::size_t i = 0; i < f.size(); ++i)
      f[i] = fminus[i] > 0 ? 2.0 * fminus[i] : 0.0;
    double mass = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) mass += grid.weights[i] * f[i];
    for (double& v : f) v /= mass;
    auto tf = sb::hemispherical_forward_grid(grid, f, grid.nodes);
    std::vector<double> g(tf.size());
    for (std::size_t i = 0; i < g.size(); ++i)
      g[i] = std::clamp(tf[i] + 0.5, 0.0, 1.0);
    sb::HarmonicAnalyzer an(grid, 2 * 64 + 1);
    double prev = 1e300, final_err = 0.0;
    for (int M : {8, 16, 32, 64}) {
      auto rec = sb::invert_hemispherical(an, g, M);
      double l1 = 0.0;
      for (std::size_t i = 0; i < f.size(); ++i)
        l1 += grid.weights[i] * std::abs(rec.values[i] - f[i]);
      if (l1 >= prev) {
        detail = "circle error not monotone at M=" + std::to_string(M);
        return false;
      }
      prev = l1;
      final_err = l1;
    }
    if (!approx_leq(final_err, 1e-3, detail, "circle_l1")) return false;
  }
  // sphere: zonal mix with geometric decay, quadrature forward, M = 32
  {
    auto grid = sb::SphereGrid::sphere2(96, 192);
    std::array<double, 3> axis{0.3, 0.5, std::sqrt(1.0 - 0.09 - 0.25)};
    auto fminus_at = [&](const std::array<double, 3>& u) {
      double t = u[0] * axis[0] + u[1] * axis[1] + u[2] * axis[2];
      // P_l(t) recurrence, odd degrees with ratio 0.75
      double p0 = 1.0, p1 = t, acc = 0.0, c = 1.0;
      for (int l = 1; l <= 41; ++l) {
        if (l % 2 == 1) {
          acc += c * p1;
          c *= 0.75;
        }
        double p2 = ((2.0 * l + 1.0) * t * p1 - l * p0) / (l + 1.0);
        p0 = p1;
        p1 = p2;
      }
      return acc;
    };
    std::vector<double> f(grid.nodes.size());
    double mass = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) {
      double fm = fminus_at(grid.nodes[i]);
      f[i] = fm > 0 ? 2.0 * fm : 0.0;
      mass += grid.weights[i] * f[i];
    }
    for (double& v : f) v /= mass;
    const double mass_c = mass;
    auto fc = [&](const std::array<double, 3>& u) {
      double fm = fminus_at(u);
      return (fm > 0 ? 2.0 * fm : 0.0) / mass_c;
    };
    std::vector<double> g(grid.nodes.size());
    num::parallel_for(grid.nodes.size(), [&](std::size_t i) {
      g[i] = std::clamp(
          sb::hemispherical_forward_smooth(2, fc, grid.nodes[i], 48) + 0.5,
          0.0, 1.0);
    });
    sb::HarmonicAnalyzer an(grid, 2 * 32 + 1);
    auto rec = sb::invert_hemispherical(an, g, 32);
    double l1 = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i)
      l1 += grid.weights[i] * std::abs(rec.values[i] - f[i]);
    if (!approx_leq(l1, 1e-2, detail, "sphere_l1")) return false;
  }
  return true;
}

// ---- criterion 5 -----------------------------------------------------------

bool criterion5(std::string& detail) {
  double t_max = 5.0, step = 0.01;
  auto y1 = CharFnGrid::from_callable(
      [](double t) { return cf::cauchy(t) * cf::uniform(t); }, t_max, step);
  auto y2 = CharFnGrid::from_callable(
      [](double t) { return cf::cauchy(t) * cf::triangular(t); }, t_max, step);
  auto d21 = CharFnGrid::from_callable(
      [](double t) { return cf::triangular(t) * cf::uniform(-t); }, t_max, step);
  dp::KotlarskiOptions opts;
  opts.recon_lo = -1.0;  // declared support Omega_1 of eps1 under R_K
  opts.recon_hi = 1.0;
  auto res = dp::kotlarski_recover(y1, y2, d21, opts);
  double e1 = 0, ed = 0, e2 = 0;
  for (int i = 0; i < res.phi_eps1.size(); ++i) {
    double t = res.phi_eps1.t(i);
    e1 = std::max(e1, std::abs(res.phi_eps1[i] - cf::uniform(t)));
    ed = std::max(ed, std::abs(res.phi_delta[i] - cf::cauchy(t)));
    e2 = std::max(e2, std::abs(res.phi_eps2[i] - cf::triangular(t)));
  }
  if (!approx_leq(e1, 1e-6, detail, "eps1")) return false;
  if (!approx_leq(ed, 1e-6, detail, "delta")) return false;
  if (!approx_leq(e2, 1e-6, detail, "eps2")) return false;

  // isolated sinc zeros crossed by continuity, refinement convergence
  auto crossing = [&](double st) {
    auto sum = CharFnGrid::from_callable(
        [](double t) { return cf::cauchy(t) * cf::uniform(t); }, t_max, st);
    auto err = CharFnGrid::from_callable(
        [](double t) { return cf::uniform(t); }, t_max, st);
    auto sig = dp::two_sample_deconvolution(err, sum, 1e-3);
    double worst = 0.0;
    for (int i = 0; i < sig.size(); ++i) {
      double t = sig.t(i);
      if (std::abs(std::abs(t) - M_PI) > 0.03) continue;
      worst = std::max(worst, std::abs(sig[i] - cf::cauchy(t)));
    }
    return worst;
  };
  double coarse = crossing(0.01), fine = crossing(0.005);
  detail += "crossing " + fmt(coarse) + " -> " + fmt(fine);
  return fine < coarse;
}

// ---- criterion 6 -----------------------------------------------------------

bool criterion6(std::string& detail) {
  // closed-form b_jk versus direct matrix inverses, 100 random x per T
  num::RngStream rng(2024, "acceptance_vandermonde");
  std::uint64_t ctr = 0;
  for (int T : {2, 3}) {
    int done = 0;
    double worst = 0.0;
    while (done < 100) {
      std::vector<double> x(T);
      for (int j = 0; j < T; ++j) {
        double mag = 0.2 + 2.0 * rng.uniform(ctr++);
        x[j] = rng.uniform(ctr++) < 0.5 ? -mag : mag;
      }
      bool ok = true;
      for (int a = 0; a < T; ++a)
        for (int b = a + 1; b < T; ++b)
          if (std::abs(x[a] - x[b]) < 0.15) ok = false;
      if (!ok) continue;
      ++done;
      std::vector<double> v(T);
      for (int k = 0; k < T; ++k) v[k] = 2.0 * rng.uniform(ctr++) - 1.0;
      auto r = dp::theta_change_of_variables(v, x);
      Eigen::MatrixXd V(T, T);
      for (int j = 0; j < T; ++j)
        for (int k = 0; k < T; ++k) V(j, k) = std::pow(x[j], k);
      Eigen::MatrixXd Vinv = V.inverse();
      for (int j = 0; j < T; ++j)
        for (int k = 0; k < T; ++k) {
          double rel = std::abs(r.b[j][k] - Vinv(k, j)) /
                       std::max(1.0, std::abs(Vinv(k, j)));
          worst = std::max(worst, rel / std::max(1.0, r.vandermonde_condition));
        }
    }
    if (!approx_leq(worst, 1e-12, detail, "b_T" + std::to_string(T))) return false;
  }

  // stayer-based error recovery and joint moment recovery
  dp::PanelModel model;
  model.T = 2;
  model.coefficient_atoms = {{{0.5, 1.0, -0.5}, 0.3},
                             {{-0.2, 0.4, 0.8}, 0.2},
                             {{1.1, -0.3, 0.2}, 0.4},
                             {{0.0, 0.7, 1.5}, 0.1}};
  model.errors = {dp::uniform_error(), dp::uniform_error()};
  model.stayer_value = 1.0;
  dp::KotlarskiOptions opts;
  opts.recon_lo = -1.0;
  opts.recon_hi = 1.0;
  auto eps = dp::panel_epsilon_recover(model, 5.0, 0.01, opts);
  double worst_eps = 0.0;
  for (int t = 0; t < 2; ++t)
    for (int i = 0; i < eps.phi_eps[t].size(); ++i)
      worst_eps = std::max(worst_eps,
                           std::abs(eps.phi_eps[t][i] -
                                    model.errors[t].cf(eps.phi_eps[t].t(i))));
  if (!approx_leq(worst_eps, 1e-6, detail, "eps_sup")) return false;

  num::RngStream xr(7, "panel_points");
  std::vector<std::vector<double>> x_points;
  for (int i = 0; i < 20; ++i)
    x_points.push_back(
        {0.3 + 2.0 * xr.next_uniform(), -2.3 + 2.0 * xr.next_uniform()});
  int K = 3;
  auto table = dp::joint_conditional_moments(model, x_points, K);
  std::vector<std::vector<double>> eps_mom(2);
  for (int t = 0; t < 2; ++t)
    for (int m = 0; m <= K; ++m)
      eps_mom[t].push_back(model.errors[t].moment(m));
  auto rec = dp::panel_moment_recover(table, eps_mom, K);
  if (!rec.all_full_rank) {
    detail += "joint design rank deficient ";
    return false;
  }
  auto oracle = rl::MixedMomentSet::from_atoms(model.coefficient_atoms, K);
  double max_err = 0.0;
  for (std::size_t i = 0; i < oracle.index_set().size(); ++i)
    max_err = std::max(max_err,
                       std::abs(rec.moments.get_flat(i) - oracle.get_flat(i)) /
                           std::max(1.0, std::abs(oracle.get_flat(i))));
  if (!approx_leq(max_err, 1e-7, detail, "joint_moments")) return false;

  // single-period-only design must be flagged rank-deficient
  std::vector<std::vector<double>> shared;
  for (int i = 1; i <= 15; ++i) {
    double x = 0.15 * i - 1.2;
    if (std::abs(x) < 0.05) continue;
    shared.push_back({x, x});
  }
  auto single = dp::joint_conditional_moments_single_period(model, shared, 2);
  std::vector<std::vector<double>> em2(2);
  for (int t = 0; t < 2; ++t)
    for (int m = 0; m <= 2; ++m) em2[t].push_back(model.errors[t].moment(m));
  auto rec2 = dp::panel_moment_recover(single, em2, 2);
  if (rec2.all_full_rank) {
    detail += "single-period design not flagged ";
    return false;
  }
  return true;
}

// ---- criterion 7 -----------------------------------------------------------

bool criterion7(std::string& detail) {
  harness::json cfg{
      {"pipeline", "determinacy"},
      {"seed", 1},
      {"determinacy",
       {{"max_order", 40},
        {"families",
         harness::json::array(
             {{{"name", "normal"}},
              {{"name", "chi2"}, {"dof", 3}},
              {{"name", "gamma"}, {"shape", 2}, {"rate", 1}},
              {{"name", "lognormal"}},
              {{"name", "abs_normal_power"}, {"r", 3}},
              {{"name", "abs_normal_power"}, {"r", 5}}})}}}};
  auto rep = harness::run_pipeline(cfg);
  if (rep.exit_code != 0) {
    detail = "pipeline failed";
    return false;
  }
  std::vector<std::pair<std::string, std::string>> want{
      {"normal", "determinate_evidence"},
      {"chi2", "determinate_evidence"},
      {"gamma", "determinate_evidence"},
      {"lognormal", "indeterminate_evidence"},
      {"abs_normal_power(3", "determinate_evidence"},
      {"abs_normal_power(5", "indeterminate_evidence"}};
  for (const auto& [label, verdict] : want) {
    bool found = false;
    for (const auto& v : rep.body["verdicts"])
      if (v["family"].get<std::string>().rfind(label, 0) == 0) {
        found = v["verdict"] == verdict;
        if (!found) detail += label + "=" + v["verdict"].get<std::string>() + " ";
      }
    if (!found) return false;
  }
  detail = "six verdicts match ";
  return true;
}

// ---- criterion 8 -----------------------------------------------------------

bool criterion8(std::string& detail) {
  for (double r : {1.1, std::exp(1.0), 10.0}) {
    rb::ExponentSystem sys(r, 1.0, 4);
    auto k = rb::kadec_check(sys);
    double expected = 1.0 / (5.0 * r);
    if (!k.pass || std::abs(k.sup_deviation - expected) > 1e-15) {
      detail = "kadec failed at r=" + std::to_string(r);
      return false;
    }
  }
  rb::ExponentSystem sys(std::exp(1.0), 1.0, 4);
  auto ind = rb::exponent_independence(sys, 6);
  detail += "combs=" + std::to_string(ind.combinations_checked) + " ";
  if (!ind.independent || ind.budget_exhausted) return false;

  rb::ExponentSystem big(std::exp(1.0), 1.0, 50);
  auto gram = rb::gram_frame_bounds(big);
  detail += "min_eig=" + fmt(gram.min_eigenvalue) + " ";
  if (!(gram.min_eigenvalue > 0)) return false;

  double repro = 0.0;
  for (int j0 : {1, -2, 3}) {
    auto bio = rb::biorthogonal_expand(
        sys, [&](double x) { return sys.f(j0, x); });
    for (std::size_t i = 0; i < bio.ordering.size(); ++i) {
      cpx want = bio.ordering[i] == j0 ? cpx(1, 0) : cpx(0, 0);
      repro = std::max(repro, std::abs(bio.coefficients[i] - want));
    }
  }
  return approx_leq(repro, 1e-8, detail, "reproduction");
}

// ---- criterion 9 -----------------------------------------------------------

bool criterion9(std::string& detail) {
  const int n = 10000;
  num::RngStream gstream(555, "si_gamma");
  num::RngStream xstream(555, "si_x");
  dp::SingleIndexData id_data, exp_data;
  std::vector<std::vector<double>> gammas;
  for (int i = 0; i < n; ++i) {
    // Gamma supported on a half circle: antipodal exclusion holds
    double om = 0.8 + std::asin(2.0 * gstream.uniform(i) - 1.0);
    std::vector<double> gamma{std::cos(om), std::sin(om)};
    gammas.push_back(gamma);
    std::vector<double> x1{6.0 * xstream.uniform(4 * i) - 3.0,
                           6.0 * xstream.uniform(4 * i + 1) - 3.0};
    std::vector<double> x2 = x1;
    if (i % 50 != 0) {
      x2[0] += 4.0 * xstream.uniform(4 * i + 2) - 2.0;
      x2[1] += 4.0 * xstream.uniform(4 * i + 3) - 2.0;
    }
    auto z = [&](const std::vector<double>& x) {
      return gamma[0] * x[0] + gamma[1] * x[1];
    };
    id_data.x1.push_back(x1);
    id_data.x2.push_back(x2);
    id_data.y1.push_back(z(x1));
    id_data.y2.push_back(z(x2));
    exp_data.x1.push_back(x1);
    exp_data.x2.push_back(x2);
    exp_data.y1.push_back(std::exp(z(x1)));
    exp_data.y2.push_back(std::exp(z(x2)));
  }
  auto r1 = dp::single_index_reduce(id_data);
  auto r2 = dp::single_index_reduce(exp_data);
  if (r1.indicator != r2.indicator) {
    detail = "indicator datasets differ between f = identity and f = exp";
    return false;
  }
  detail += "bit-identical (" + std::to_string(n) + " units), stayers=" +
            std::to_string(r1.stayer_count) + " ";

  // composition with the hemispherical inversion: cell means of the
  // indicators over lifted regressor differences feed invert_hemispherical;
  // Gamma lives on the equator slice (alpha = 0), so lift into S^2
  auto grid = sb::SphereGrid::sphere2(16, 32);
  std::vector<double> sum(grid.nodes.size(), 0.0);
  std::vector<long> count(grid.nodes.size(), 0);
  for (int i = 0; i < n; ++i) {
    if (r1.delta_x[i][0] == 0.0 && r1.delta_x[i][1] == 0.0) continue;
    auto s = sb::lift_regressors(r1.delta_x[i]);
    int best = 0;
    double bd = -2.0;
    for (std::size_t q = 0; q < grid.nodes.size(); ++q) {
      double d = s[0] * grid.nodes[q][0] + s[1] * grid.nodes[q][1] +
                 s[2] * grid.nodes[q][2];
      if (d > bd) {
        bd = d;
        best = static_cast<int>(q);
      }
    }
    sum[best] += r1.indicator[i];
    ++count[best];
  }
  std::vector<double> g(grid.nodes.size(), 0.5);
  for (std::size_t q = 0; q < grid.nodes.size(); ++q) {
    if (count[q] > 0)
      g[q] = sum[q] / count[q];
    else if (count[grid.antipode[q]] > 0)
      g[q] = 1.0 - sum[grid.antipode[q]] / count[grid.antipode[q]];
  }
  // oddness completion: average with the antipodal complement
  for (std::size_t q = 0; q < grid.nodes.size(); ++q) {
    std::size_t a = grid.antipode[q];
    if (q < a) {
      double h = 0.5 * (g[q] + 1.0 - g[a]);
      g[q] = h;
      g[a] = 1.0 - h;
    }
  }
  sb::HarmonicAnalyzer an(grid, 9);
  sb::InversionReport rep;
  auto rec = sb::invert_hemispherical(an, g, 4, &rep);
  if (rep.degenerate) {
    detail += "inversion degenerate ";
    return false;
  }
  if (!rec.antipodal_exclusion(1e-12)) {
    detail += "antipodal exclusion violated ";
    return false;
  }
  double mass = rec.mass();
  detail += "composed inversion mass=" + fmt(mass) + " ";
  if (std::abs(mass - 1.0) > 1e-8) return false;
  // the recovered density concentrates around the true mean direction
  std::array<double, 3> mean{0, 0, 0};
  for (std::size_t q = 0; q < grid.nodes.size(); ++q)
    for (int d = 0; d < 3; ++d)
      mean[d] += grid.weights[q] * rec.values[q] * grid.nodes[q][d];
  double norm = std::sqrt(mean[0] * mean[0] + mean[1] * mean[1] +
                          mean[2] * mean[2]);
  std::array<double, 3> truth{0.0, std::cos(0.8), std::sin(0.8)};
  double align =
      (mean[0] * truth[0] + mean[1] * truth[1] + mean[2] * truth[2]) / norm;
  detail += "alignment=" + fmt(align);
  return align > 0.7;
}

// ---- criterion 10 ----------------------------------------------------------

bool criterion10(std::string& detail) {
  using harness::json;
  std::vector<json> configs;
  configs.push_back(json{
      {"pipeline", "determinacy"},
      {"seed", 3},
      {"determinacy",
       {{"max_order", 30},
        {"families", json::array({{{"name", "normal"}},
                                  {{"name", "lognormal"}}})}}}});
  configs.push_back(json{
      {"pipeline", "uniqueness"},
      {"seed", 3},
      {"uniqueness",
       {{"support", {{"generator", "fan"}, {"slopes", {1, 2, 3}}, {"budget", 15}}},
        {"degree", 2},
        {"radii", {{"lo", 0.1}, {"hi", 20.0}, {"count", 10}}}}}});
  configs.push_back(json{
      {"pipeline", "recover-linear"},
      {"seed", 3},
      {"recover-linear",
       {{"p", 1},
        {"K", 2},
        {"atoms", json::array({{{"gamma", {0.5, 1.0}}, {"weight", 0.6}},
                               {{"gamma", {-0.5, 0.2}}, {"weight", 0.4}}})},
        {"support", {{"points", json::array({{0.0}, {1.0}, {2.0}, {-1.0}})}}}}}});
  configs.push_back(json{
      {"pipeline", "counterexample"},
      {"seed", 3},
      {"counterexample",
       {{"Q", json::array({{{"exponents", {0, 2, 0}}, {"coeff", 1.0}},
                           {{"exponents", {1, 0, 1}}, {"coeff", -1.0}}})}}}});
  configs.push_back(json{{"pipeline", "kotlarski"},
                         {"seed", 3},
                         {"kotlarski",
                          {{"eps1", "uniform"},
                           {"delta", "cauchy"},
                           {"eps2", "triangular"},
                           {"t_max", 3.0},
                           {"step", 0.02},
                           {"omega", {-1.0, 1.0}}}}});
  configs.push_back(json{
      {"pipeline", "panel"},
      {"seed", 3},
      {"panel",
       {{"T", 2},
        {"atoms", json::array({{{"gamma", {0.5, 0.3, -0.2}}, {"weight", 1.0}}})},
        {"errors", {"uniform", "uniform"}},
        {"stayer", 1.0},
        {"K", 2},
        {"n_x", 10},
        {"t_max", 3.0},
        {"step", 0.02}}}});
  configs.push_back(json{{"pipeline", "binary-invert"},
                         {"seed", 3},
                         {"binary-invert",
                          {{"p", 1}, {"nodes", 512}, {"M", 8},
                           {"rho", 0.7}, {"n_harmonics", 20}}}});
  configs.push_back(json{{"pipeline", "single-index"},
                         {"seed", 3},
                         {"single-index", {{"n", 2000}, {"f", "exp"}}}});
  configs.push_back(json{{"pipeline", "riesz"},
                         {"seed", 3},
                         {"riesz",
                          {{"r", 2.0}, {"max_index", 3}, {"bound", 4},
                           {"gram_max_index", 20}}}});
  configs.push_back(json{
      {"pipeline", "simulate"},
      {"seed", 3},
      {"simulate",
       {{"model", "linear"},
        {"p", 1},
        {"n_per_point", 25},
        {"atoms", json::array({{{"gamma", {0.1, 1.0}}, {"weight", 0.5}},
                               {{"gamma", {0.9, -1.0}}, {"weight", 0.5}}})},
        {"support", {{"points", json::array({{0.5}, {1.5}})}}}}}});

  for (const auto& cfg : configs) {
    auto a = harness::run_pipeline(cfg);
    auto b = harness::run_pipeline(cfg);
    if (a.exit_code != 0 || b.exit_code != 0) {
      detail = cfg["pipeline"].get<std::string>() + " failed to run";
      return false;
    }
    if (a.body.dump() != b.body.dump()) {
      detail = cfg["pipeline"].get<std::string>() + " report not reproducible";
      return false;
    }
    if (a.files.size() != b.files.size()) {
      detail = cfg["pipeline"].get<std::string>() + " artifact count differs";
      return false;
    }
    for (std::size_t i = 0; i < a.files.size(); ++i)
      if (a.files[i] != b.files[i]) {
        detail = cfg["pipeline"].get<std::string>() + " artifact bytes differ";
        return false;
      }
  }
  detail = std::to_string(configs.size()) + " pipelines byte-identical";
  return true;
}

}  // namespace

int main() {
  std::vector<Criterion> criteria{
      {1, "moment recovery exactness (fan support, 4-atom law)", 1.0, criterion1},
      {2, "non-identification witness and counterexample", 5.0, criterion2},
      {3, "hemispherical eigenvalues to 1e-10", 2.0, criterion3},
      {4, "binary-choice round trips (S1 and S2)", 30.0, criterion4},
      {5, "kotlarski recovery to 1e-6", 5.0, criterion5},
      {6, "panel vandermonde and joint moments", 10.0, criterion6},
      {7, "determinacy roster classification", 2.0, criterion7},
      {8, "riesz exponent system", 10.0, criterion8},
      {9, "single-index reduction and composition", 10.0, criterion9},
      {10, "pipeline determinism", 60.0, criterion10},
  };

  int failures = 0;
  for (auto& c : criteria) {
    std::string detail;
    auto t0 = std::chrono::steady_clock::now();
    bool ok = false;
    try {
      ok = c.run(detail);
    } catch (const std::exception& e) {
      detail = std::string("exception: ") + e.what();
    }
    double dt =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    bool in_time = dt <= c.time_limit_s;
    bool pass = ok && in_time;
    if (!pass) ++failures;
    std::printf("%s criterion %2d: %s — %s(%.2f s%s)\n",
                pass ? "PASS" : "FAIL", c.id, c.name.c_str(), detail.c_str(),
                dt, in_time ? "" : ", over time limit");
  }
  return failures == 0 ? 0 : 1;
}
