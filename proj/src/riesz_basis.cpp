#include "rcid/riesz_basis.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

namespace rcid::riesz_basis {

ExponentSystem::ExponentSystem(double r, double T, int max_index,
                               std::pair<long, long> coeff)
    : r_(r), T_(T), max_index_(max_index), coeff_num_(coeff.first),
      coeff_den_(coeff.second) {
  if (!(r > 1)) throw precondition_error("ExponentSystem: r must exceed 1");
  if (!(T > 0)) throw precondition_error("ExponentSystem: T must be positive");
  if (max_index < 1) throw precondition_error("ExponentSystem: empty index set");
  if (coeff_den_ <= 0 || coeff_num_ < 0)
    throw precondition_error("ExponentSystem: invalid perturbation coefficient");
  for (int j = -max_index; j <= max_index; ++j)
    if (j != 0) J_.push_back(j);
}

double ExponentSystem::lambda(int j) const {
  double c = static_cast<double>(coeff_num_) / coeff_den_;
  return j + c * std::pow(r_, -std::abs(j));
}

cpx ExponentSystem::f(int j, double x) const {
  double phase = M_PI * lambda(j) * x / T_;
  return cpx(std::cos(phase), std::sin(phase));
}

double ExponentSystem::sup_deviation() const {
  return static_cast<double>(coeff_num_) / coeff_den_ / r_;
}

KadecResult kadec_check(const ExponentSystem& sys) {
  KadecResult k;
  k.sup_deviation = sys.sup_deviation();
  k.pass = k.sup_deviation < 0.25;
  return k;
}

IndependenceResult exponent_independence(const ExponentSystem& sys, int bound,
                                         long combination_budget) {
  if (bound < 1) throw precondition_error("exponent_independence: bound >= 1");
  const auto& J = sys.indices();
  const int n = static_cast<int>(J.size());

  IndependenceResult res;
  std::vector<int> b(n, 0);

  // sum_j b_j lambda_j = (integer part) + (c) * sum_e coeff_e r^{-e};
  // with c = num/den exact, zero forces every piece to vanish
  auto is_zero_combination = [&](const std::vector<int>& bb) {
    long integer_part = 0;
    std::map<int, long> exponent_coeff;  // e -> sum of b_j with |j| = e
    for (int i = 0; i < n; ++i) {
      if (bb[i] == 0) continue;
      integer_part += static_cast<long>(bb[i]) * J[i];
      exponent_coeff[std::abs(J[i])] += bb[i] * sys.coeff_num();
    }
    if (integer_part != 0) return false;
    for (const auto& [e, c] : exponent_coeff)
      if (c != 0) return false;
    return true;
  };

  // enumerate compositions with |b|_1 <= bound (depth-first)
  std::function<bool(int, int)> rec = [&](int pos, int remaining) -> bool {
    if (res.combinations_checked >= combination_budget) {
      res.budget_exhausted = true;
      return false;
    }
    if (pos == n) {
      int total = 0;
      for (int v : b) total += v;
      if (total == 0) return false;
      ++res.combinations_checked;
      if (is_zero_combination(b)) {
        res.independent = false;
        res.violating_combination = b;
        return true;
      }
      return false;
    }
    for (int v = 0; v <= remaining; ++v) {
      b[pos] = v;
      if (rec(pos + 1, remaining - v)) return true;
      b[pos] = 0;
    }
    return false;
  };
  rec(0, bound);
  return res;
}

GramResult gram_frame_bounds(const ExponentSystem& sys) {
  const auto& J = sys.indices();
  const int n = static_cast<int>(J.size());
  GramResult res;
  res.gram.assign(n, std::vector<double>(n, 0.0));
  const double twoT = 2.0 * sys.T();
  for (int a = 0; a < n; ++a)
    for (int bb = a; bb < n; ++bb) {
      double d = M_PI * (sys.lambda(J[a]) - sys.lambda(J[bb]));
      double v = a == bb ? twoT : twoT * std::sin(d) / d;
      res.gram[a][bb] = v;
      res.gram[bb][a] = v;
    }
  Eigen::MatrixXd G(n, n);
  for (int a = 0; a < n; ++a)
    for (int bb = 0; bb < n; ++bb) G(a, bb) = res.gram[a][bb];
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(G);
  res.min_eigenvalue = eig.eigenvalues().minCoeff();
  res.max_eigenvalue = eig.eigenvalues().maxCoeff();
  res.condition = res.min_eigenvalue > 0
                      ? res.max_eigenvalue / res.min_eigenvalue
                      : kInf;
  return res;
}

BiorthogonalResult biorthogonal_expand(const ExponentSystem& sys,
                                       const std::function<cpx(double)>& g) {
  const auto& J = sys.indices();
  std::vector<int> order;
  order.push_back(0);  // f_0 = 1
  for (int j : J) order.push_back(j);
  const int n = static_cast<int>(order.size());
  const double T = sys.T();

  // oscillation-aware composite quadrature: >= 8 nodes per unit of
  // pi lambda_max / T phase, i.e. >= 8 panels per full period
  double lambda_max = std::abs(sys.lambda(sys.max_index()));
  int panels = std::max(8, static_cast<int>(std::ceil(4.0 * lambda_max)));
  const auto& gl = num::gauss_legendre(16);

  auto basis_f = [&](int j, double x) -> cpx {
    return j == 0 ? cpx(1, 0) : sys.f(j, x);
  };
  auto inner_with_f = [&](int j) {
    cpx acc(0, 0);
    double h = 2.0 * T / panels;
    for (int p = 0; p < panels; ++p) {
      double lo = -T + p * h;
      for (int q = 0; q < 16; ++q) {
        double x = lo + 0.5 * h + 0.5 * h * gl.nodes[q];
        acc += 0.5 * h * gl.weights[q] * g(x) * std::conj(basis_f(j, x));
      }
    }
    return acc;
  };

  Eigen::MatrixXcd G(n, n);
  for (int a = 0; a < n; ++a)
    for (int bb = 0; bb < n; ++bb) {
      // lambda_0 = 0 for the constant element
      double la = order[a] == 0 ? 0.0 : sys.lambda(order[a]);
      double lb = order[bb] == 0 ? 0.0 : sys.lambda(order[bb]);
      double d = M_PI * (la - lb);
      G(a, bb) = std::abs(d) < 1e-14 ? 2.0 * T : 2.0 * T * std::sin(d) / d;
    }
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(G);
  double cond = svd.singularValues()(0) / svd.singularValues()(n - 1);
  if (cond > 1e12)
    throw numerical_error("biorthogonal_expand: Gram condition exceeds 1e12");

  Eigen::VectorXcd bvec(n);
  for (int a = 0; a < n; ++a) bvec(a) = inner_with_f(order[a]);

  Eigen::VectorXcd gamma = G.ldlt().solve(bvec);

  BiorthogonalResult res;
  res.ordering = order;
  res.gram_condition = cond;
  res.coefficients.assign(gamma.data(), gamma.data() + n);

  // reconstruction residual ||g - sum gamma_j f_j||_2
  auto synth = [&](double x) {
    cpx acc(0, 0);
    for (int a = 0; a < n; ++a) acc += gamma(a) * basis_f(order[a], x);
    return acc;
  };
  double err2 = 0.0;
  double h = 2.0 * T / panels;
  for (int p = 0; p < panels; ++p) {
    double lo = -T + p * h;
    for (int q = 0; q < 16; ++q) {
      double x = lo + 0.5 * h + 0.5 * h * gl.nodes[q];
      cpx d = synth(x) - g(x);
      err2 += 0.5 * h * gl.weights[q] * std::norm(d);
    }
  }
  res.reconstruction_residual = std::sqrt(err2);
  return res;
}

double MixtureSummary::quantile(double q) const {
  if (atom_values.empty()) throw precondition_error("quantile: empty mixture");
  q = std::clamp(q, 0.0, 1.0);
  double acc = 0.0;
  for (std::size_t i = 0; i < atom_values.size(); ++i) {
    acc += atom_weights[i];
    if (acc >= q - 1e-15) return atom_values[i];
  }
  return atom_values.back();
}

std::vector<MixtureSummary> snl_forward_extrapolate(
    const ExponentSystem& sys, const std::vector<ThetaAtom>& atoms,
    const std::vector<double>& xs) {
  const auto& J = sys.indices();
  for (const auto& a : atoms)
    if (a.gamma.size() != J.size())
      throw precondition_error("snl_forward: coefficient count mismatch");
  double wsum = 0.0;
  for (const auto& a : atoms) wsum += a.weight;
  if (std::abs(wsum - 1.0) > 1e-9)
    throw precondition_error("snl_forward: weights must sum to 1");

  std::vector<MixtureSummary> out;
  for (double x : xs) {
    MixtureSummary s;
    s.x = x;
    std::vector<std::pair<double, double>> vals;
    for (const auto& a : atoms) {
      cpx y(a.gamma0, 0.0);
      for (std::size_t i = 0; i < J.size(); ++i)
        y += a.gamma[i] * sys.f(J[i], x);
      s.max_imag_residual = std::max(s.max_imag_residual, std::abs(y.imag()));
      vals.emplace_back(y.real(), a.weight);
    }
    std::sort(vals.begin(), vals.end());
    double mean = 0.0, m2 = 0.0;
    for (auto& [v, w] : vals) {
      s.atom_values.push_back(v);
      s.atom_weights.push_back(w);
      mean += w * v;
      m2 += w * v * v;
    }
    s.mean = mean;
    s.variance = m2 - mean * mean;
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace rcid::riesz_basis
