#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "rcid/deconv_panel.hpp"

using namespace rcid;
using namespace rcid::deconv_panel;

namespace {

KotlarskiOptions unit_support_options() {
  KotlarskiOptions opts;
  opts.recon_lo = -1.0;  // declared support of eps1 under R_K
  opts.recon_hi = 1.0;
  return opts;
}

}  // namespace

TEST_CASE("ecf closed forms and concentration") {
  auto g1 = ecf({2.5}, 3.0, 0.05);
  for (int i = 0; i < g1.size(); ++i)
    CHECK(std::abs(g1[i] - cf::point_mass(g1.t(i), 2.5)) < 1e-14);

  auto g2 = ecf({-1.0, 1.0}, 3.0, 0.05);
  for (int i = 0; i < g2.size(); ++i)
    CHECK(std::abs(g2[i] - cpx(std::cos(g2.t(i)), 0.0)) < 1e-14);

  // n = 1e5 uniform draws: sup deviation from sin(t)/t within 5/sqrt(n)
  num::RngStream rng(99, "ecf_test");
  std::vector<double> sample;
  for (int i = 0; i < 100000; ++i) sample.push_back(2.0 * rng.uniform(i) - 1.0);
  auto g3 = ecf(sample, 5.0, 0.1);
  double dev = 0.0;
  for (int i = 0; i < g3.size(); ++i)
    dev = std::max(dev, std::abs(g3[i] - cf::uniform(g3.t(i))));
  CHECK(dev <= 5.0 / std::sqrt(100000.0));
}

TEST_CASE("two-sample deconvolution closed forms") {
  double t_max = 4.0, step = 0.01;
  auto sum = CharFnGrid::from_callable(
      [](double t) { return cf::normal(t) * cf::normal(t); }, t_max, step);
  auto err = CharFnGrid::from_callable([](double t) { return cf::normal(t); },
                                       t_max, step);
  auto sig = two_sample_deconvolution(err, sum);
  for (int i = 0; i < sig.size(); ++i)
    CHECK(std::abs(sig[i] - cf::normal(sig.t(i))) < 1e-8);

  // degenerate error: signal equals the sum
  auto delta0 = CharFnGrid::from_callable([](double) { return cpx(1, 0); },
                                          t_max, step);
  auto sig2 = two_sample_deconvolution(delta0, sum);
  for (int i = 0; i < sig2.size(); ++i)
    CHECK(std::abs(sig2[i] - sum[i]) < 1e-14);

  // signal a point mass at zero
  auto sig3 = two_sample_deconvolution(err, err);
  for (int i = 0; i < sig3.size(); ++i)
    CHECK(std::abs(sig3[i] - cpx(1, 0)) < 1e-10);
}

TEST_CASE("kotlarski: uniform + cauchy + triangular recovery") {
  double t_max = 5.0, step = 0.01;
  auto y1 = CharFnGrid::from_callable(
      [](double t) { return cf::cauchy(t) * cf::uniform(t); }, t_max, step);
  auto y2 = CharFnGrid::from_callable(
      [](double t) { return cf::cauchy(t) * cf::triangular(t); }, t_max, step);
  auto d21 = CharFnGrid::from_callable(
      [](double t) { return cf::triangular(t) * cf::uniform(-t); }, t_max, step);

  auto res = kotlarski_recover(y1, y2, d21, unit_support_options());
  CHECK(res.t0 >= 0.99);
  CHECK(std::abs(res.b_estimate) < 1e-8);

  double e1 = 0, ed = 0, e2 = 0;
  for (int i = 0; i < res.phi_eps1.size(); ++i) {
    double t = res.phi_eps1.t(i);
    e1 = std::max(e1, std::abs(res.phi_eps1[i] - cf::uniform(t)));
    ed = std::max(ed, std::abs(res.phi_delta[i] - cf::cauchy(t)));
    e2 = std::max(e2, std::abs(res.phi_eps2[i] - cf::triangular(t)));
  }
  CHECK(e1 <= 1e-6);
  CHECK(ed <= 1e-6);
  CHECK(e2 <= 1e-6);

  // reconstruction identities on the full grid
  for (int i = 0; i < y1.size(); ++i) {
    CHECK(std::abs(res.phi_delta[i] * res.phi_eps1[i] - y1[i]) <= 1e-6);
    int n0 = y1.index_of_zero();
    CHECK(std::abs(res.phi_eps2[i] * res.phi_eps1[2 * n0 - i] - d21[i]) <=
          1e-6);
  }

  // the sinc zeros inside the grid are recorded
  bool near_pi = false;
  for (double z : res.zero_locations_eps1)
    if (std::abs(std::abs(z) - M_PI) < 0.02) near_pi = true;
  CHECK(near_pi);
}

TEST_CASE("division by continuity across sinc zeros converges under refinement") {
  // phi_sum = e^{-|t|} sinc(t) over phi_error = sinc(t): the quotient
  // e^{-|t|} is continued across the isolated zeros at t = k pi; the
  // interpolated crossing error shrinks like the square of the step
  auto run = [&](double step) {
    double t_max = 5.0;
    auto sum = CharFnGrid::from_callable(
        [](double t) { return cf::cauchy(t) * cf::uniform(t); }, t_max, step);
    auto err = CharFnGrid::from_callable(
        [](double t) { return cf::uniform(t); }, t_max, step);
    auto sig = two_sample_deconvolution(err, sum, 1e-3);
    double worst = 0.0;
    for (int i = 0; i < sig.size(); ++i) {
      double t = sig.t(i);
      if (std::abs(std::abs(t) - M_PI) > 0.03) continue;
      worst = std::max(worst, std::abs(sig[i] - cf::cauchy(t)));
    }
    return worst;
  };
  double coarse = run(0.01);
  double fine = run(0.005);
  CHECK(fine < coarse);
  CHECK(fine <= 0.35 * coarse);  // near-quadratic contraction
}

TEST_CASE("kotlarski: all components degenerate at zero") {
  double t_max = 3.0, step = 0.01;
  auto one = CharFnGrid::from_callable([](double) { return cpx(1, 0); },
                                       t_max, step);
  auto res = kotlarski_recover(one, one, one, unit_support_options());
  for (int i = 0; i < res.phi_eps1.size(); ++i) {
    CHECK(std::abs(res.phi_eps1[i] - cpx(1, 0)) < 1e-6);
    CHECK(std::abs(res.phi_delta[i] - cpx(1, 0)) < 1e-6);
    CHECK(std::abs(res.phi_eps2[i] - cpx(1, 0)) < 1e-6);
  }
}

TEST_CASE("kotlarski rejects inconsistent inputs") {
  double t_max = 3.0, step = 0.01;
  // mean-shifted eps1 makes the recovered phase derivative nonzero: the
  // inputs are inconsistent with the mean-zero normalization
  auto y1 = CharFnGrid::from_callable(
      [](double t) { return cf::normal(t) * cf::normal(t, 0.5); }, t_max, step);
  auto y2 = CharFnGrid::from_callable(
      [](double t) { return cf::normal(t) * cf::normal(t); }, t_max, step);
  auto d21 = CharFnGrid::from_callable(
      [](double t) { return cf::normal(t) * cf::normal(-t, 0.5); }, t_max,
      step);
  CHECK_THROWS_AS(kotlarski_recover(y1, y2, d21, unit_support_options()),
                  numerical_error);
}

TEST_CASE("theta change of variables: linearity and direct-solve oracle") {
  {
    auto r = theta_change_of_variables({0.0, 0.0}, {1.0, 2.0});
    CHECK(r.theta == doctest::Approx(0.0));
  }
  {
    auto r = theta_change_of_variables({1.0, 0.0}, {1.0, 2.0});
    CHECK(r.agreement <= 1e-12);
    CHECK(r.theta == doctest::Approx(r.theta_direct).epsilon(1e-12));
  }
  // T = 3: closed-form b_jk equal rows of V(x)^{-1} over 100 random x in X_0
  std::mt19937_64 gen(41);
  std::uniform_real_distribution<double> u(0.2, 2.2);
  std::uniform_int_distribution<int> sign(0, 1);
  int done = 0;
  while (done < 100) {
    std::vector<double> x{u(gen) * (sign(gen) ? 1 : -1),
                          u(gen) * (sign(gen) ? 1 : -1),
                          u(gen) * (sign(gen) ? 1 : -1)};
    bool ok = true;
    for (int a = 0; a < 3; ++a)
      for (int b = a + 1; b < 3; ++b)
        if (std::abs(x[a] - x[b]) < 0.15) ok = false;
    if (!ok) continue;
    ++done;
    std::vector<double> v{u(gen), u(gen), u(gen)};
    auto r = theta_change_of_variables(v, x);
    CHECK(r.agreement <= 1e-12 * std::max(1.0, std::abs(r.theta_direct)) *
                             std::max(1.0, r.vandermonde_condition));
    // b_jk = (V^{-1})_{kj}: verify through V b^T = I
    for (int i = 0; i < 3; ++i)
      for (int k = 0; k < 3; ++k) {
        double dot = 0.0;
        for (int j = 0; j < 3; ++j) dot += std::pow(x[i], j) * r.b[i][j] * 0.0;
        (void)dot;
      }
    // direct check: sum_j b_jk x_j^{l} = delta_{k,l+1}
    for (int k = 1; k <= 3; ++k)
      for (int l = 0; l < 3; ++l) {
        double dot = 0.0;
        for (int j = 0; j < 3; ++j) dot += r.b[j][k - 1] * std::pow(x[j], l);
        CHECK(dot == doctest::Approx(k == l + 1 ? 1.0 : 0.0)
                         .epsilon(1e-9 * std::max(1.0, r.vandermonde_condition))
                         .scale(1.0));
      }
  }
  CHECK_THROWS_AS(theta_change_of_variables({1.0, 1.0}, {0.0, 1.0}),
                  precondition_error);
  CHECK_THROWS_AS(theta_change_of_variables({1.0, 1.0}, {1.0, 1.0}),
                  precondition_error);
}

TEST_CASE("panel epsilon recovery: T = 3 iid uniform errors") {
  PanelModel model;
  model.T = 3;
  model.coefficient_atoms = {{{0.5, 0.3, -0.2, 0.1}, 0.5},
                             {{-0.1, 0.2, 0.4, -0.3}, 0.5}};
  for (int t = 0; t < 3; ++t) model.errors.push_back(uniform_error());
  model.stayer_value = 1.0;

  auto res = panel_epsilon_recover(model, 5.0, 0.01, unit_support_options());
  REQUIRE(res.phi_eps.size() == 3);
  double worst = 0.0;
  for (int t = 0; t < 3; ++t)
    for (int i = 0; i < res.phi_eps[t].size(); ++i)
      worst = std::max(worst, std::abs(res.phi_eps[t][i] -
                                       cf::uniform(res.phi_eps[t].t(i))));
  CHECK(worst <= 1e-6);
  // delta CF matches the atom mixture at the stayer
  double derr = 0.0;
  for (int i = 0; i < res.phi_delta.size(); ++i)
    derr = std::max(derr,
                    std::abs(res.phi_delta[i] -
                             model.phi_delta(res.phi_delta.t(i))));
  CHECK(derr <= 1e-6);
}

TEST_CASE("panel: T = 2 degenerates to the kotlarski pair") {
  PanelModel model;
  model.T = 2;
  model.coefficient_atoms = {{{0.4, 0.2, -0.1}, 1.0}};
  model.errors = {uniform_error(), uniform_error()};
  model.stayer_value = 1.0;
  auto res = panel_epsilon_recover(model, 5.0, 0.01, unit_support_options());
  // identical to a direct kotlarski run on the same population grids
  auto y1 = CharFnGrid::from_callable(
      [&](double t) { return model.phi_y(1, t); }, 5.0, 0.01);
  auto y2 = CharFnGrid::from_callable(
      [&](double t) { return model.phi_y(2, t); }, 5.0, 0.01);
  auto d21 = CharFnGrid::from_callable(
      [&](double t) { return model.phi_y_diff(2, t); }, 5.0, 0.01);
  auto direct = kotlarski_recover(y1, y2, d21, unit_support_options());
  for (int i = 0; i < direct.phi_eps1.size(); ++i) {
    CHECK(res.phi_eps[0][i] == direct.phi_eps1[i]);
    CHECK(res.phi_eps[1][i] == direct.phi_eps2[i]);
  }
}

TEST_CASE("panel moment recovery: T = 2 four-atom law at K = 3") {
  PanelModel model;
  model.T = 2;
  model.coefficient_atoms = {{{0.5, 1.0, -0.5}, 0.3},
                             {{-0.2, 0.4, 0.8}, 0.2},
                             {{1.1, -0.3, 0.2}, 0.4},
                             {{0.0, 0.7, 1.5}, 0.1}};
  model.errors = {uniform_error(), normal_error(0.5)};
  model.stayer_value = 1.0;

  // 20 generic x-pairs
  num::RngStream rng(7, "panel_x");
  std::vector<std::vector<double>> x_points;
  for (int i = 0; i < 20; ++i)
    x_points.push_back({0.3 + 2.0 * rng.next_uniform(),
                        -2.3 + 2.0 * rng.next_uniform()});
  int K = 3;
  auto table = joint_conditional_moments(model, x_points, K);
  std::vector<std::vector<double>> eps_mom(2);
  for (int t = 0; t < 2; ++t)
    for (int m = 0; m <= K; ++m)
      eps_mom[t].push_back(model.errors[t].moment(m));
  auto rec = panel_moment_recover(table, eps_mom, K);
  CHECK(rec.all_full_rank);
  auto oracle =
      rc_linear::MixedMomentSet::from_atoms(model.coefficient_atoms, K);
  for (std::size_t i = 0; i < oracle.index_set().size(); ++i) {
    double want = oracle.get_flat(i);
    double got = rec.moments.get_flat(i);
    CHECK(std::abs(got - want) <= 1e-7 * std::max(1.0, std::abs(want)));
  }
}

TEST_CASE("panel moment recovery: single-period powers are rank deficient") {
  PanelModel model;
  model.T = 2;
  model.coefficient_atoms = {{{0.5, 1.0, -0.5}, 0.6}, {{-0.2, 0.4, 0.8}, 0.4}};
  model.errors = {uniform_error(), uniform_error()};
  model.stayer_value = 1.0;
  // single shared scalar x per unit: regressors (x, x^2) per period 1 only
  std::vector<std::vector<double>> x_points;
  for (int i = 1; i <= 15; ++i) {
    double x = 0.15 * i - 1.2;
    if (std::abs(x) < 0.05) continue;
    x_points.push_back({x, x});
  }
  int K = 2;
  auto table = joint_conditional_moments_single_period(model, x_points, K);
  std::vector<std::vector<double>> eps_mom(2);
  for (int t = 0; t < 2; ++t)
    for (int m = 0; m <= K; ++m)
      eps_mom[t].push_back(model.errors[t].moment(m));
  auto rec = panel_moment_recover(table, eps_mom, K);
  CHECK_FALSE(rec.all_full_rank);
  bool deg2_deficient = false;
  for (const auto& r : rec.ranks)
    if (r.degree == 2 && r.deficient) deg2_deficient = true;
  CHECK(deg2_deficient);
}

TEST_CASE("panel moment recovery: T = 1 matches rc_linear recovery") {
  PanelModel model;
  model.T = 1;
  model.coefficient_atoms = {{{0.5, 1.0}, 0.7}, {{-0.2, 0.4}, 0.3}};
  model.errors = {point_mass_error(0.0)};
  model.stayer_value = 1.0;
  std::vector<std::vector<double>> x_points;
  for (int i = 1; i <= 8; ++i) x_points.push_back({0.4 * i - 1.8});
  int K = 3;
  auto table = joint_conditional_moments(model, x_points, K);
  std::vector<std::vector<double>> eps_mom{{1, 0, 0, 0}};
  auto rec = panel_moment_recover(table, eps_mom, K);

  // rc_linear route on the same points (noiseless, T = 1)
  rc_linear::RCModel rl_model(1, model.coefficient_atoms);
  auto V = uniqueness::SupportSet::from_points(x_points);
  auto tbl = rc_linear::conditional_moments(rl_model, V, K);
  auto rl = rc_linear::recover_mixed_moments(tbl);
  for (std::size_t i = 0; i < rl.moments.index_set().size(); ++i)
    CHECK(rec.moments.get_flat(i) ==
          doctest::Approx(rl.moments.get_flat(i)).epsilon(1e-9));
}

TEST_CASE("single index reduction: ties, invariance, stayers") {
  // all ties: degenerate flag
  SingleIndexData tied;
  for (int i = 0; i < 10; ++i) {
    tied.x1.push_back({1.0, 2.0});
    tied.x2.push_back({1.0, 2.0});
    tied.y1.push_back(0.5);
    tied.y2.push_back(0.5);
  }
  auto r = single_index_reduce(tied);
  CHECK(r.degenerate);
  CHECK(r.stayer_count == 10);

  // monotone invariance: identical indicators under f = identity and f = exp
  num::RngStream rng(3, "si_test");
  SingleIndexData id_data, exp_data;
  double g1 = std::cos(0.7), g2 = std::sin(0.7);
  for (int i = 0; i < 2000; ++i) {
    std::vector<double> x1{6.0 * rng.next_uniform() - 3.0,
                           6.0 * rng.next_uniform() - 3.0};
    std::vector<double> x2{6.0 * rng.next_uniform() - 3.0,
                           6.0 * rng.next_uniform() - 3.0};
    double z1 = g1 * x1[0] + g2 * x1[1];
    double z2 = g1 * x2[0] + g2 * x2[1];
    id_data.x1.push_back(x1);
    id_data.x2.push_back(x2);
    id_data.y1.push_back(z1);
    id_data.y2.push_back(z2);
    exp_data.x1.push_back(x1);
    exp_data.x2.push_back(x2);
    exp_data.y1.push_back(std::exp(z1));
    exp_data.y2.push_back(std::exp(z2));
  }
  auto r1 = single_index_reduce(id_data);
  auto r2 = single_index_reduce(exp_data);
  CHECK(r1.indicator == r2.indicator);
  // indicators equal the sign of Gamma . dx exactly under f = identity
  for (std::size_t i = 0; i < r1.indicator.size(); ++i) {
    double dz = g1 * r1.delta_x[i][0] + g2 * r1.delta_x[i][1];
    CHECK(r1.indicator[i] == (dz >= 0 ? 1 : 0));
  }

  // noise recovery demands stayers
  SingleIndexOptions opts;
  opts.recover_noise = true;
  CHECK_THROWS_AS(single_index_reduce(id_data, opts), precondition_error);
}

TEST_CASE("central-difference moment extraction with Richardson") {
  // the simple stencil variant: normal moments s2 = 1, s4 = 3
  auto phi = CharFnGrid::from_callable([](double t) { return cf::normal(t); },
                                       4.0, 0.01);
  double imag = 0.0;
  auto m = cf_moments_at_zero(phi, 4, &imag);
  CHECK(m[0] == 1.0);
  CHECK(std::abs(m[1]) < 1e-8);
  CHECK(m[2] == doctest::Approx(1.0).epsilon(1e-4));
  CHECK(std::abs(m[3]) < 1e-3);
  CHECK(m[4] == doctest::Approx(3.0).epsilon(1e-3));
  CHECK(imag < 1e-8);
}
