#include "rcid/rc_linear.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>
#include <Eigen/SVD>

namespace rcid::rc_linear {

// --- RCModel -----------------------------------------------------------------

RCModel::RCModel(int p, std::vector<Atom> atoms,
                 std::optional<std::vector<std::pair<double, double>>> box)
    : p_(p), atoms_(std::move(atoms)), box_(std::move(box)) {
  if (p_ < 1) throw precondition_error("RCModel: p must be >= 1");
  if (atoms_.empty()) throw data_error("RCModel: empty coefficient law");
  double total = 0.0;
  for (const auto& a : atoms_) {
    if (static_cast<int>(a.gamma.size()) != p_ + 1)
      throw data_error("RCModel: atom dimension must be p+1");
    if (!(a.weight > 0)) throw data_error("RCModel: weights must be positive");
    total += a.weight;
    if (box_) {
      for (int i = 0; i <= p_; ++i)
        if (a.gamma[i] < (*box_)[i].first - 1e-12 ||
            a.gamma[i] > (*box_)[i].second + 1e-12)
          throw data_error("RCModel: atom outside declared support box");
    }
  }
  if (std::abs(total - 1.0) > 1e-9)
    throw data_error("RCModel: weights must sum to 1");
}

double RCModel::index(const std::vector<double>& gamma,
                      const std::vector<double>& x) const {
  double v = gamma[0];
  for (int i = 0; i < p_; ++i) v += gamma[i + 1] * x[i];
  return v;
}

// --- simulate ------------------------------------------------------------------

Dataset simulate_linear(const RCModel& model, const SupportSet& x_points,
                        int n_per_point, std::uint64_t seed) {
  if (n_per_point < 1) throw precondition_error("simulate_linear: n >= 1");
  if (x_points.dimension() != model.p())
    throw precondition_error("simulate_linear: dimension mismatch");
  std::vector<double> cumulative;
  double acc = 0.0;
  for (const auto& a : model.atoms()) {
    acc += a.weight;
    cumulative.push_back(acc);
  }
  num::RngStream stream(seed, "simulate_linear");
  Dataset ds;
  ds.p = model.p();
  std::uint64_t counter = 0;
  for (const auto& x : x_points.points()) {
    for (int i = 0; i < n_per_point; ++i) {
      double u = stream.uniform(counter++) * cumulative.back();
      std::size_t k =
          std::upper_bound(cumulative.begin(), cumulative.end(), u) -
          cumulative.begin();
      k = std::min(k, cumulative.size() - 1);
      ds.x.push_back(x);
      ds.y.push_back(model.index(model.atoms()[k].gamma, x));
    }
  }
  return ds;
}

// --- conditional moments ----------------------------------------------------------

ConditionalMomentTable::ConditionalMomentTable(
    std::vector<std::vector<double>> points, int K,
    std::vector<std::vector<double>> values)
    : points_(std::move(points)), K_(K), values_(std::move(values)) {
  if (points_.size() != values_.size())
    throw data_error("ConditionalMomentTable: size mismatch");
  for (auto& row : values_) {
    if (static_cast<int>(row.size()) != K_ + 1)
      throw data_error("ConditionalMomentTable: order mismatch");
    if (std::abs(row[0] - 1.0) > 1e-12)
      throw data_error("ConditionalMomentTable: order-0 column must be 1");
    for (double v : row)
      if (!std::isfinite(v)) throw data_error("ConditionalMomentTable: non-finite");
  }
}

ConditionalMomentTable conditional_moments(const RCModel& model,
                                           const SupportSet& x_points, int K) {
  std::vector<std::vector<double>> values;
  for (const auto& x : x_points.points()) {
    std::vector<double> row(K + 1, 0.0);
    for (const auto& a : model.atoms()) {
      double idx = model.index(a.gamma, x);
      double pw = a.weight;
      for (int k = 0; k <= K; ++k) {
        row[k] += pw;
        pw *= idx;
      }
    }
    values.push_back(std::move(row));
  }
  return ConditionalMomentTable(x_points.points(), K, std::move(values));
}

// --- index design -------------------------------------------------------------------

std::vector<std::vector<double>> index_moment_design(
    int k, const std::vector<std::vector<double>>& points, int p) {
  if (k < 1) throw precondition_error("index_moment_design: k >= 1");
  auto indices = num::multi_indices_of_degree(p + 1, k);
  std::vector<std::vector<double>> rows;
  rows.reserve(points.size());
  for (const auto& x : points) {
    std::vector<double> row;
    row.reserve(indices.size());
    for (const auto& j : indices) {
      double v = num::multinomial(k, j);
      for (int c = 1; c <= p; ++c)
        for (int e = 0; e < j[c]; ++e) v *= x[c - 1];
      row.push_back(v);
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

// --- MixedMomentSet ------------------------------------------------------------------

MixedMomentSet::MixedMomentSet(int dim, int K) : dim_(dim), K_(K) {
  indices_ = num::multi_indices_up_to(dim, K);
  values_.assign(indices_.size(), 0.0);
  for (std::size_t i = 0; i < indices_.size(); ++i) lookup_[indices_[i]] = i;
  values_[0] = 1.0;  // s(0) = 1
}

MixedMomentSet MixedMomentSet::from_atoms(const std::vector<Atom>& atoms, int K) {
  if (atoms.empty()) throw precondition_error("from_atoms: no atoms");
  MixedMomentSet s(static_cast<int>(atoms[0].gamma.size()), K);
  for (std::size_t i = 0; i < s.indices_.size(); ++i) {
    double acc = 0.0;
    for (const auto& a : atoms) {
      double v = a.weight;
      for (int c = 0; c < s.dim_; ++c)
        for (int e = 0; e < s.indices_[i][c]; ++e) v *= a.gamma[c];
      acc += v;
    }
    s.values_[i] = acc;
  }
  return s;
}

double MixedMomentSet::get(const std::vector<int>& mi) const {
  auto it = lookup_.find(mi);
  if (it == lookup_.end()) throw precondition_error("MixedMomentSet: unknown index");
  return values_[it->second];
}

void MixedMomentSet::set(const std::vector<int>& mi, double v) {
  auto it = lookup_.find(mi);
  if (it == lookup_.end()) throw precondition_error("MixedMomentSet: unknown index");
  values_[it->second] = v;
}

// --- recovery ---------------------------------------------------------------------------

RecoveryResult recover_mixed_moments(const ConditionalMomentTable& table,
                                     double rank_tol, double residual_tol) {
  const auto& pts = table.points();
  const int p = static_cast<int>(pts[0].size());
  const int K = table.max_order();

  RecoveryResult out{MixedMomentSet(p + 1, K), {}, true};
  for (int k = 1; k <= K; ++k) {
    auto rows = index_moment_design(k, pts, p);
    const int n = static_cast<int>(rows.size());
    const int c = static_cast<int>(rows[0].size());
    Eigen::MatrixXd A(n, c);
    Eigen::VectorXd b(n);
    for (int i = 0; i < n; ++i) {
      b(i) = table.value(i, k);
      for (int j = 0; j < c; ++j) A(i, j) = rows[i][j];
    }
    Eigen::VectorXd scale(c);
    for (int j = 0; j < c; ++j) {
      double nrm = A.col(j).norm();
      scale(j) = nrm > 0 ? nrm : 1.0;
      A.col(j) /= scale(j);
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(
        A, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    double cutoff = rank_tol * sv(0);
    int rank = 0;
    for (int i = 0; i < sv.size(); ++i)
      if (sv(i) > cutoff) ++rank;

    // minimum-norm least squares restricted to the numerical rank
    Eigen::VectorXd z = svd.matrixU().transpose() * b;
    Eigen::VectorXd w = Eigen::VectorXd::Zero(c);
    for (int i = 0; i < rank; ++i)
      w += (z(i) / sv(i)) * svd.matrixV().col(i);
    Eigen::VectorXd sol = w.cwiseQuotient(scale);

    DegreeRankReport rep;
    rep.degree = k;
    rep.rank = rank;
    rep.n_unknowns = c;
    double bn = b.norm();
    rep.residual_rel = (A * w - b).norm() / (bn > 1e-300 ? bn : 1.0);
    rep.deficient = rank < c;
    if (rep.deficient) {
      Eigen::VectorXd v = svd.matrixV().col(c - 1);
      for (int j = 0; j < c; ++j) v(j) /= scale(j);
      v.normalize();
      int imax = 0;
      for (int j = 1; j < c; ++j)
        if (std::abs(v(j)) > std::abs(v(imax))) imax = j;
      if (v(imax) < 0) v = -v;
      rep.nullspace.assign(v.data(), v.data() + c);
      out.all_full_rank = false;
    } else if (rep.residual_rel > residual_tol) {
      out.all_full_rank = false;
    }

    auto indices = num::multi_indices_of_degree(p + 1, k);
    for (int j = 0; j < c; ++j) out.moments.set(indices[j], sol(j));
    out.ranks.push_back(std::move(rep));
  }
  return out;
}

// --- independent marginals -------------------------------------------------------------

namespace {

cpx interp_coordinate(const CoordinateRecovery& rec, double u) {
  const auto& t = rec.grid_t;
  if (t.empty()) throw numerical_error("marginal recovery: empty coordinate grid");
  if (u <= t.front() || u >= t.back()) {
    if (rec.extension_available) {
      // extension grids share grid_t; clamp
      double uu = std::clamp(u, t.front(), t.back());
      double pos = (uu - t.front()) / rec.grid_step;
      int i = std::clamp(static_cast<int>(std::floor(pos)), 0,
                         static_cast<int>(t.size()) - 2);
      double f = pos - i;
      return rec.extended[i] * (1.0 - f) + rec.extended[i + 1] * f;
    }
    throw numerical_error("marginal recovery: evaluation outside recovered range");
  }
  double pos = (u - t.front()) / rec.grid_step;
  int i = static_cast<int>(std::floor(pos));
  double f = pos - i;
  if (f < 1e-12) return rec.values[i];
  return rec.values[i] * (1.0 - f) + rec.values[i + 1] * f;
}

}  // namespace

MarginalRecoveryResult independent_marginals_recover(
    const std::vector<CharFnGrid>& cf_tables,
    const std::vector<std::vector<double>>& points, MarginalMode mode,
    const MarginalOptions& opts) {
  const int p = static_cast<int>(points.size());
  if (static_cast<int>(cf_tables.size()) != p + 1)
    throw precondition_error("marginals: need p+1 CF tables (x = 0 first)");
  for (int j = 0; j < p; ++j) {
    if (static_cast<int>(points[j].size()) != p)
      throw precondition_error("marginals: point dimension mismatch");
    for (int i = j + 1; i < p; ++i)
      if (points[j][i] != 0.0)
        throw precondition_error("marginals: points must be upper triangular");
    if (points[j][j] == 0.0)
      throw precondition_error("marginals: zero diagonal in configuration");
  }
  const auto& alpha = cf_tables[0];
  for (const auto& t : cf_tables)
    if (t.half_n() != alpha.half_n() || t.step() != alpha.step())
      throw precondition_error("marginals: grids must be aligned");

  MarginalRecoveryResult out{alpha, {}};
  const int n0 = alpha.index_of_zero();
  const int N = alpha.half_n();
  const double step = alpha.step();

  for (int j = 0; j < p; ++j) {
    const CharFnGrid& table = cf_tables[j + 1];
    const double xjj = points[j][j];

    // denominator at source index i: phi_alpha(t) * prod_{l<j} phi_beta_l(t x_l)
    auto denominator = [&](int i) -> cpx {
      double t = alpha.t(i);
      cpx d = alpha[i];
      for (int l = 0; l < j; ++l) {
        double xl = points[j][l];
        if (xl == 0.0) continue;
        d *= interp_coordinate(out.coordinates[l], t * xl);
      }
      return d;
    };

    CoordinateRecovery rec;
    rec.grid_step = step * std::abs(xjj);

    if (mode == MarginalMode::r_l1) {
      // largest symmetric radius on which every denominator stays above the
      // modulus threshold
      int k0 = 0;
      for (int k = 1; k <= N; ++k) {
        if (std::abs(denominator(n0 + k)) <= opts.modulus_threshold ||
            std::abs(denominator(n0 - k)) <= opts.modulus_threshold)
          break;
        k0 = k;
      }
      if (k0 < 4)
        throw numerical_error("marginals: division region too small");
      rec.t0 = k0 * step;
      for (int k = -k0; k <= k0; ++k) {
        int i = n0 + k;
        rec.grid_t.push_back(alpha.t(i) * xjj);
        rec.values.push_back(table[i] / denominator(i));
      }
      if (xjj < 0) {
        std::reverse(rec.grid_t.begin(), rec.grid_t.end());
        std::reverse(rec.values.begin(), rec.values.end());
      }

      // moment extraction at 0, then global extension through the finite
      // moment-problem inversion
      CharFnGrid local(rec.grid_step, k0, rec.values,
                       CfProvenance::population_closed_form);
      local.hermitize();
      rec.moments =
          cf_moments_local_fit(local, opts.moment_orders, 0.9 * local.t_max());
      std::vector<double> nodes;
      for (int i = 0; i < opts.recon_nodes; ++i)
        nodes.push_back(opts.recon_lo + (opts.recon_hi - opts.recon_lo) * i /
                                            (opts.recon_nodes - 1));
      ReconstructionSpec rspec;
      rspec.residual_tol = 1e-4;  // extraction-limited moment accuracy
      auto recon = reconstruct_distribution(rec.moments, nodes, rspec);
      if (recon.success) {
        rec.extension_available = true;
        // extend onto the full source extent
        std::vector<double> full_t;
        std::vector<cpx> ext;
        for (int k = -N; k <= N; ++k) {
          double u = alpha.t(n0 + k) * xjj;
          cpx v(0, 0);
          for (std::size_t q = 0; q < nodes.size(); ++q)
            v += recon.weights[q] * std::exp(cpx(0, u * nodes[q]));
          full_t.push_back(u);
          ext.push_back(v);
        }
        if (xjj < 0) {
          std::reverse(full_t.begin(), full_t.end());
          std::reverse(ext.begin(), ext.end());
        }
        // splice: keep exact division values inside, extension outside
        std::vector<cpx> merged = ext;
        int offset = static_cast<int>((rec.grid_t.front() - full_t.front()) /
                                          rec.grid_step +
                                      0.5);
        for (std::size_t q = 0; q < rec.values.size(); ++q)
          merged[offset + q] = rec.values[q];
        rec.grid_t = full_t;
        rec.values.resize(full_t.size());
        rec.values = merged;
        rec.extended = std::move(ext);
      }
    } else {
      // mode R_L2: divide off the zero set; isolated zeros crossed by
      // linear interpolation of the ratio
      std::vector<bool> is_zero(2 * N + 1, false);
      for (int i = 0; i <= 2 * N; ++i)
        is_zero[i] = std::abs(denominator(i)) < opts.zero_threshold;
      for (int i = 0; i + 1 <= 2 * N; ++i)
        if (is_zero[i] && is_zero[i + 1])
          throw numerical_error(
              "marginals: denominator vanishes on a non-isolated region near t=" +
              std::to_string(alpha.t(i)));
      std::vector<cpx> ratio(2 * N + 1);
      for (int i = 0; i <= 2 * N; ++i)
        if (!is_zero[i]) ratio[i] = table[i] / denominator(i);
      for (int i = 0; i <= 2 * N; ++i)
        if (is_zero[i]) {
          if (i == 0)
            ratio[i] = ratio[1];
          else if (i == 2 * N)
            ratio[i] = ratio[2 * N - 1];
          else
            ratio[i] = 0.5 * (ratio[i - 1] + ratio[i + 1]);
        }
      rec.t0 = N * step;
      for (int k = -N; k <= N; ++k) {
        int i = n0 + k;
        rec.grid_t.push_back(alpha.t(i) * xjj);
        rec.values.push_back(ratio[i]);
      }
      if (xjj < 0) {
        std::reverse(rec.grid_t.begin(), rec.grid_t.end());
        std::reverse(rec.values.begin(), rec.values.end());
      }
    }
    out.coordinates.push_back(std::move(rec));
  }
  return out;
}

// --- counterexample -----------------------------------------------------------------------

HomogeneousPoly HomogeneousPoly::from_terms(
    int dim, std::vector<std::pair<std::vector<int>, double>> terms) {
  if (terms.empty()) throw precondition_error("HomogeneousPoly: empty Q");
  HomogeneousPoly q;
  q.dim = dim;
  q.degree = -1;
  for (auto& [e, c] : terms) {
    if (static_cast<int>(e.size()) != dim)
      throw precondition_error("HomogeneousPoly: exponent dimension");
    int deg = 0;
    for (int v : e) deg += v;
    if (q.degree < 0) q.degree = deg;
    if (deg != q.degree)
      throw precondition_error("HomogeneousPoly: Q is not homogeneous");
  }
  if (q.degree < 1) throw precondition_error("HomogeneousPoly: degree >= 1");
  q.terms = std::move(terms);
  return q;
}

HomogeneousPoly HomogeneousPoly::homogenize_witness(
    const std::vector<std::vector<int>>& monomials,
    const std::vector<double>& coeffs, double coeff_tol) {
  if (monomials.size() != coeffs.size())
    throw precondition_error("homogenize_witness: size mismatch");
  int deg = 0;
  for (std::size_t i = 0; i < monomials.size(); ++i) {
    if (std::abs(coeffs[i]) <= coeff_tol) continue;
    int d = 0;
    for (int e : monomials[i]) d += e;
    deg = std::max(deg, d);
  }
  std::vector<std::pair<std::vector<int>, double>> terms;
  for (std::size_t i = 0; i < monomials.size(); ++i) {
    if (std::abs(coeffs[i]) <= coeff_tol) continue;
    int d = 0;
    for (int e : monomials[i]) d += e;
    std::vector<int> full;
    full.push_back(deg - d);  // slot 0 completes the degree
    for (int e : monomials[i]) full.push_back(e);
    terms.emplace_back(std::move(full), coeffs[i]);
  }
  return from_terms(static_cast<int>(monomials[0].size()) + 1,
                    std::move(terms));
}

namespace {

// 1-d bump factor g(x) = x exp(1/(x^2-1)) on (-1,1), extended by 0.
// Derivatives stay in the family P(x) (x^2-1)^{-2a} exp(1/(x^2-1)).
struct BumpDerivative {
  num::Poly1 P;
  int inv_power;  // (x^2-1)^{-inv_power}
  double operator()(double x) const {
    double w = x * x - 1.0;
    if (w >= 0) return 0.0;
    double e = 1.0 / w;  // negative inside (-1,1)... 1/(x^2-1) < 0? no: w<0 so e<0
    double log_mag = e;  // exp(1/(x^2-1)) has negative exponent inside
    if (log_mag < -700.0) return 0.0;
    return P(x) * std::pow(w, -inv_power) * std::exp(log_mag);
  }
};

std::vector<BumpDerivative> bump_derivatives(int max_order) {
  std::vector<BumpDerivative> out;
  num::Poly1 P({0.0, 1.0});  // x
  int m = 0;
  out.push_back({P, 0});
  num::Poly1 w({-1.0, 0.0, 1.0});  // x^2 - 1
  num::Poly1 two_x({0.0, 2.0});
  for (int a = 1; a <= max_order; ++a) {
    // d/dx [P w^{-m} e^{1/w}] = [P' w^2 - 2 m x P w - 2 x P] w^{-(m+2)} e^{1/w}
    num::Poly1 Pn = P.derivative() * w * w;
    num::Poly1 corr = two_x * P;
    num::Poly1 scaled = corr * num::Poly1({static_cast<double>(m)});
    Pn = Pn - scaled * w - corr;
    P = Pn;
    m += 2;
    out.push_back({P, m});
  }
  return out;
}

}  // namespace

double CounterexampleResult::h_at(const std::vector<double>& gamma) const {
  static thread_local std::vector<BumpDerivative> cache;
  int max_a = 0;
  for (const auto& [e, c] : Q_.terms)
    for (int v : e) max_a = std::max(max_a, v);
  if (static_cast<int>(cache.size()) <= max_a) cache = bump_derivatives(max_a);
  double total = 0.0;
  for (const auto& [e, c] : Q_.terms) {
    double prod = c;
    for (int j = 0; j < dim; ++j) prod *= cache[e[j]](gamma[j]);
    total += prod;
  }
  return total;
}

double CounterexampleResult::conditional_index_moment(
    const std::vector<double>& y, int k, bool perturbed) const {
  if (k > moment_cap_)
    throw precondition_error("conditional_index_moment: order above cap");
  if (static_cast<int>(y.size()) != dim)
    throw precondition_error("conditional_index_moment: y dimension");
  auto base_u = [](int u) { return u % 2 == 0 ? 1.0 / (u + 1) : 0.0; };
  double total = 0.0;
  for (const auto& n : num::multi_indices_of_degree(dim, k)) {
    double mono = num::multinomial(k, n);
    for (int j = 0; j < dim; ++j)
      for (int e = 0; e < n[j]; ++e) mono *= y[j];
    double base_prod = 1.0;
    for (int j = 0; j < dim; ++j) base_prod *= base_u(n[j]);
    total += mono * base_prod;
    if (perturbed) {
      double pert = 0.0;
      for (const auto& [e, qc] : Q_.terms) {
        double prod = qc;
        for (int j = 0; j < dim; ++j) prod *= J_[e[j]][n[j]];
        pert += prod;
      }
      total += mono * pert * (c / h_sup);
    }
  }
  return total;
}

CounterexampleResult build_counterexample(const HomogeneousPoly& Q,
                                          const CounterexampleGrid& grid) {
  CounterexampleResult res;
  res.Q_ = Q;
  res.dim = Q.dim;
  res.moment_cap_ = grid.moment_cap;
  res.base_density = std::pow(0.5, Q.dim);
  res.c = res.base_density;  // uniform base: the lower bound is the density

  int max_a = 0;
  for (const auto& [e, c2] : Q.terms)
    for (int v : e) max_a = std::max(max_a, v);
  auto derivs = bump_derivatives(max_a);

  // per-axis quadrature nodes (composite Gauss-Legendre over [-1,1])
  const auto& gl = num::gauss_legendre(grid.gl_order);
  for (int pnl = 0; pnl < grid.panels_per_axis; ++pnl) {
    double lo = -1.0 + 2.0 * pnl / grid.panels_per_axis;
    double hi = -1.0 + 2.0 * (pnl + 1) / grid.panels_per_axis;
    for (int i = 0; i < grid.gl_order; ++i) {
      res.nodes_1d.push_back(0.5 * (lo + hi) + 0.5 * (hi - lo) * gl.nodes[i]);
      res.weights_1d.push_back(0.5 * (hi - lo) * gl.weights[i]);
    }
  }
  const int n1 = static_cast<int>(res.nodes_1d.size());

  // 1-d tables: base integrals B(u) = int x^u g(x) dx, then
  // J(a, s) = (-1)^a s!/(s-a)! B(s-a)   (integration by parts, boundary-free)
  const int smax = grid.moment_cap + max_a;
  std::vector<double> B(smax + 1, 0.0);
  for (int u = 1; u <= smax; u += 2) {
    B[u] = num::integrate_gl([&](double x) { return std::pow(x, u) * derivs[0](x); },
                             -1.0, 1.0, 64, 16);
  }
  res.J_.assign(max_a + 1, std::vector<double>(grid.moment_cap + 1, 0.0));
  for (int a = 0; a <= max_a; ++a)
    for (int s = 0; s <= grid.moment_cap; ++s) {
      if (s < a) continue;
      double fall = 1.0;
      for (int r = 0; r < a; ++r) fall *= (s - r);
      res.J_[a][s] = ((a % 2 == 0) ? 1.0 : -1.0) * fall * B[s - a];
    }

  // derivative factor tables on the 1-d nodes
  std::vector<std::vector<double>> fac(max_a + 1, std::vector<double>(n1));
  for (int a = 0; a <= max_a; ++a)
    for (int i = 0; i < n1; ++i) fac[a][i] = derivs[a](res.nodes_1d[i]);

  // tensor h values (axis-0 major)
  std::size_t total = 1;
  for (int d = 0; d < Q.dim; ++d) total *= n1;
  res.h_values.assign(total, 0.0);
  std::vector<int> idx(Q.dim, 0);
  for (std::size_t flat = 0; flat < total; ++flat) {
    std::size_t rem = flat;
    for (int d = Q.dim - 1; d >= 0; --d) {
      idx[d] = static_cast<int>(rem % n1);
      rem /= n1;
    }
    double v = 0.0;
    for (const auto& [e, c2] : Q.terms) {
      double prod = c2;
      for (int d = 0; d < Q.dim; ++d) prod *= fac[e[d]][idx[d]];
      v += prod;
    }
    res.h_values[flat] = v;
  }

  // grid diagnostics
  double hsup = 0.0, hint = 0.0, habs = 0.0;
  for (std::size_t flat = 0; flat < total; ++flat) {
    std::size_t rem = flat;
    double w = 1.0;
    for (int d = Q.dim - 1; d >= 0; --d) {
      w *= res.weights_1d[rem % n1];
      rem /= n1;
    }
    hsup = std::max(hsup, std::abs(res.h_values[flat]));
    hint += w * res.h_values[flat];
    habs += w * std::abs(res.h_values[flat]);
  }
  if (!(hsup > 0)) throw numerical_error("build_counterexample: h vanishes");
  res.h_sup = hsup;
  res.integral_h = hint;
  res.tv_distance = 0.5 * (res.c / hsup) * habs;
  return res;
}

// --- reconstruction -------------------------------------------------------------------------

ReconstructionResult reconstruct_distribution(
    const MixedMomentSet& moments,
    const std::vector<std::vector<double>>& grid_nodes,
    const ReconstructionSpec& spec) {
  if (grid_nodes.empty()) throw precondition_error("reconstruct: empty grid");
  const auto& indices = moments.index_set();
  const int rows = static_cast<int>(indices.size());
  const int cols = static_cast<int>(grid_nodes.size());
  const int dim = moments.dim();

  std::vector<std::vector<double>> A(rows, std::vector<double>(cols));
  std::vector<double> b(rows);
  for (int r = 0; r < rows; ++r) {
    double rmax = 0.0;
    for (int cix = 0; cix < cols; ++cix) {
      double v = 1.0;
      for (int d = 0; d < dim; ++d)
        for (int e = 0; e < indices[r][d]; ++e) v *= grid_nodes[cix][d];
      A[r][cix] = v;
      rmax = std::max(rmax, std::abs(v));
    }
    double s = rmax > 0 ? rmax : 1.0;
    for (int cix = 0; cix < cols; ++cix) A[r][cix] /= s;
    b[r] = moments.get_flat(r) / s;
  }

  ReconstructionResult res;
  bool solved = false;
  if (spec.ridge_lambda > 0) {
    // ridge toward the reference: w = ref + A^T (A A^T + lambda I)^{-1} (s - A ref)
    Eigen::VectorXd ref(cols);
    if (spec.reference_weights.empty())
      ref.setConstant(1.0 / cols);
    else {
      if (static_cast<int>(spec.reference_weights.size()) != cols)
        throw precondition_error("reconstruct: reference size mismatch");
      for (int i = 0; i < cols; ++i) ref(i) = spec.reference_weights[i];
    }
    Eigen::MatrixXd Am(rows, cols);
    Eigen::VectorXd bv(rows);
    for (int r = 0; r < rows; ++r) {
      bv(r) = b[r];
      for (int cix = 0; cix < cols; ++cix) Am(r, cix) = A[r][cix];
    }
    Eigen::MatrixXd K = Am * Am.transpose();
    K.diagonal().array() += spec.ridge_lambda;
    Eigen::VectorXd w = ref + Am.transpose() * K.ldlt().solve(bv - Am * ref);
    if (w.minCoeff() >= -1e-8) {
      w = w.cwiseMax(0.0);
      res.weights.assign(w.data(), w.data() + cols);
      double bn = bv.norm();
      res.residual = (Am * w - bv).norm() / (bn > 1e-300 ? bn : 1.0);
      res.success = res.residual <= spec.residual_tol;
      solved = true;
    }
  }
  if (!solved) {
    auto sol = num::nnls(A, b, spec.max_iter);
    res.weights = sol.x;
    double bn = 0.0;
    for (double v : b) bn += v * v;
    bn = std::sqrt(bn);
    res.residual = sol.residual_norm / (bn > 1e-300 ? bn : 1.0);
    res.success = res.residual <= spec.residual_tol;
  }

  // rank of the scaled moment matrix: uniqueness diagnostic
  Eigen::MatrixXd Am(rows, cols);
  for (int r = 0; r < rows; ++r)
    for (int cix = 0; cix < cols; ++cix) Am(r, cix) = A[r][cix];
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(Am);
  const auto& sv = svd.singularValues();
  double cutoff = 1e-10 * sv(0);
  for (int i = 0; i < sv.size(); ++i)
    if (sv(i) > cutoff) ++res.rank;
  res.non_unique = res.rank < cols;

  // renormalize the total mass
  double mass = 0.0;
  for (double w : res.weights) mass += w;
  if (mass > 1e-300)
    for (double& w : res.weights) w /= mass;
  return res;
}

ReconstructionResult reconstruct_distribution(
    const std::vector<double>& moments, const std::vector<double>& grid_nodes,
    const ReconstructionSpec& spec) {
  MixedMomentSet s(1, static_cast<int>(moments.size()) - 1);
  for (std::size_t m = 0; m < moments.size(); ++m)
    s.set({static_cast<int>(m)}, moments[m]);
  std::vector<std::vector<double>> nodes;
  nodes.reserve(grid_nodes.size());
  for (double v : grid_nodes) nodes.push_back({v});
  return reconstruct_distribution(s, nodes, spec);
}

// --- partial Fourier slice ---------------------------------------------------------------------

std::vector<cpx> partial_fourier_slice(const RCModel& model, double t,
                                       const std::vector<std::vector<double>>& xi) {
  std::vector<cpx> out;
  out.reserve(xi.size());
  for (const auto& x : xi) {
    if (static_cast<int>(x.size()) != model.p())
      throw precondition_error("partial_fourier_slice: xi dimension");
    cpx acc(0, 0);
    for (const auto& a : model.atoms()) {
      double phase = t * a.gamma[0];
      for (int i = 0; i < model.p(); ++i) phase += x[i] * a.gamma[i + 1];
      acc += a.weight * std::exp(cpx(0, phase));
    }
    out.push_back(acc);
  }
  return out;
}

// --- affine reparametrization --------------------------------------------------------------------

AffineReparam affine_reparametrize(
    const std::vector<std::vector<double>>& points,
    const std::vector<std::vector<double>>& M, const std::vector<double>& xbar,
    int K) {
  const int p = static_cast<int>(xbar.size());
  Eigen::MatrixXd Mm(p, p);
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < p; ++j) Mm(i, j) = M[i][j];
  Eigen::FullPivLU<Eigen::MatrixXd> lu(Mm);
  if (!lu.isInvertible())
    throw precondition_error("affine_reparametrize: singular M");
  Eigen::MatrixXd Minv = lu.inverse();

  AffineReparam rep;
  for (const auto& x : points) {
    std::vector<double> nx(p, 0.0);
    for (int i = 0; i < p; ++i)
      for (int j = 0; j < p; ++j) nx[i] += Mm(i, j) * (x[j] - xbar[j]);
    rep.points.push_back(std::move(nx));
  }

  // transformed coefficients: alpha' = alpha + xbar . beta,
  // beta' = (M^{-1})^T beta
  const int dim = p + 1;
  std::vector<num::MultiPoly> forms;
  {
    num::MultiPoly a0 = num::MultiPoly::variable(dim, 0);
    for (int i = 0; i < p; ++i) {
      num::MultiPoly term = num::MultiPoly::variable(dim, i + 1);
      num::MultiPoly c = num::MultiPoly::constant(dim, xbar[i]);
      a0 = a0 + c * term;
    }
    forms.push_back(a0);
    for (int k = 0; k < p; ++k) {
      num::MultiPoly bk(dim);
      for (int i = 0; i < p; ++i) {
        double coeff = Minv(i, k);  // ((M^{-1})^T)_{k i} = (M^{-1})_{i k}
        if (coeff == 0.0) continue;
        bk = bk + num::MultiPoly::constant(dim, coeff) *
                      num::MultiPoly::variable(dim, i + 1);
      }
      forms.push_back(bk);
    }
  }

  rep.index_set = num::multi_indices_up_to(dim, K);
  std::map<std::vector<int>, std::size_t> lookup;
  for (std::size_t i = 0; i < rep.index_set.size(); ++i)
    lookup[rep.index_set[i]] = i;
  rep.moment_map.assign(rep.index_set.size(),
                        std::vector<double>(rep.index_set.size(), 0.0));
  for (std::size_t r = 0; r < rep.index_set.size(); ++r) {
    num::MultiPoly prod = num::MultiPoly::constant(dim, 1.0);
    for (int k = 0; k < dim; ++k)
      for (int e = 0; e < rep.index_set[r][k]; ++e) prod = prod * forms[k];
    for (const auto& [expo, coeff] : prod.terms()) {
      auto it = lookup.find(expo);
      if (it == lookup.end())
        throw numerical_error("affine_reparametrize: index overflow");
      rep.moment_map[r][it->second] += coeff;
    }
  }
  return rep;
}

MixedMomentSet apply_moment_map(const AffineReparam& rep,
                                const MixedMomentSet& s) {
  const int dim = s.dim();
  int K = s.max_order();
  MixedMomentSet out(dim, K);
  for (std::size_t r = 0; r < rep.index_set.size(); ++r) {
    double acc = 0.0;
    for (std::size_t c = 0; c < rep.index_set.size(); ++c)
      if (rep.moment_map[r][c] != 0.0)
        acc += rep.moment_map[r][c] * s.get_flat(c);
    out.set(rep.index_set[r], acc);
  }
  return out;
}

}  // namespace rcid::rc_linear
