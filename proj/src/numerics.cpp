#include "rcid/numerics.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <map>
#include <mutex>
#include <thread>

#include <Eigen/Dense>

namespace rcid::num {

// --- RNG ------------------------------------------------------------------

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

static std::uint64_t hash_tag(const std::string& tag) {
  std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
  for (unsigned char c : tag) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

RngStream::RngStream(std::uint64_t seed, const std::string& tag)
    : key_(splitmix64(seed ^ hash_tag(tag))) {}

double RngStream::uniform(std::uint64_t counter) const {
  std::uint64_t z = splitmix64(key_ + 0x632be59bd9b4e019ULL * (counter + 1));
  // 53-bit mantissa, shifted to (0,1)
  return (static_cast<double>(z >> 11) + 0.5) * 0x1.0p-53;
}

double RngStream::normal(std::uint64_t counter) const {
  double u1 = uniform(2 * counter);
  double u2 = uniform(2 * counter + 1);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

double RngStream::cauchy(std::uint64_t counter) const {
  return std::tan(M_PI * (uniform(counter) - 0.5));
}

std::size_t RngStream::next_index(const std::vector<double>& cumulative) {
  double u = next_uniform() * cumulative.back();
  auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
  std::size_t i = static_cast<std::size_t>(it - cumulative.begin());
  return std::min(i, cumulative.size() - 1);
}

// --- quadrature -------------------------------------------------------------

static GaussLegendre compute_gl(int n) {
  GaussLegendre gl;
  gl.nodes.resize(n);
  gl.weights.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    // Newton iteration from the Chebyshev-like initial guess
    double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = 0.0;
      for (int j = 0; j < n; ++j) {
        double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j + 1.0) * x * p1 - j * p2) / (j + 1.0);
      }
      pp = n * (x * p0 - p1) / (x * x - 1.0);
      double dx = p0 / pp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    gl.nodes[i] = -x;
    gl.nodes[n - 1 - i] = x;
    gl.weights[i] = 2.0 / ((1.0 - x * x) * pp * pp);
    gl.weights[n - 1 - i] = gl.weights[i];
  }
  return gl;
}

const GaussLegendre& gauss_legendre(int n) {
  static std::mutex m;
  static std::map<int, GaussLegendre> cache;
  std::lock_guard<std::mutex> lock(m);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, compute_gl(n)).first;
  return it->second;
}

double integrate_gl(const std::function<double(double)>& f, double a, double b,
                    int panels, int order) {
  const GaussLegendre& gl = gauss_legendre(order);
  double total = 0.0;
  double h = (b - a) / panels;
  for (int p = 0; p < panels; ++p) {
    double lo = a + p * h;
    double mid = lo + 0.5 * h;
    double half = 0.5 * h;
    double acc = 0.0;
    for (int i = 0; i < order; ++i)
      acc += gl.weights[i] * f(mid + half * gl.nodes[i]);
    total += acc * half;
  }
  return total;
}

namespace {
double simpson(double a, double fa, double b, double fb, double fm) {
  return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

double adaptive_rec(const std::function<double(double)>& f, double a, double fa,
                    double b, double fb, double m, double fm, double whole,
                    double tol, int depth, bool* ok) {
  double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  double flm = f(lm), frm = f(rm);
  double left = simpson(a, fa, m, fm, flm);
  double right = simpson(m, fm, b, fb, frm);
  double err = left + right - whole;
  if (std::abs(err) <= 15.0 * tol * (std::abs(left + right) + 1e-300) ||
      depth <= 0) {
    if (depth <= 0 && ok) *ok = false;
    return left + right + err / 15.0;
  }
  return adaptive_rec(f, a, fa, m, fm, lm, flm, left, tol / 2, depth - 1, ok) +
         adaptive_rec(f, m, fm, b, fb, rm, frm, right, tol / 2, depth - 1, ok);
}
}  // namespace

double integrate_adaptive(const std::function<double(double)>& f, double a,
                          double b, double rel_tol, bool* converged) {
  if (converged) *converged = true;
  double m = 0.5 * (a + b);
  double fa = f(a), fb = f(b), fm = f(m);
  double whole = simpson(a, fa, b, fb, fm);
  return adaptive_rec(f, a, fa, b, fb, m, fm, whole, rel_tol, 40, converged);
}

// --- fitting ---------------------------------------------------------------

double ls_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2)
    throw precondition_error("ls_slope: need at least two points");
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= x.size();
  my /= y.size();
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx == 0.0) throw precondition_error("ls_slope: degenerate abscissae");
  return sxy / sxx;
}

// --- combinatorics -----------------------------------------------------------

double log_factorial(int n) { return std::lgamma(static_cast<double>(n) + 1.0); }

double log_double_factorial_odd(int m) {
  // (2m-1)!! = (2m)! / (2^m m!)
  if (m <= 0) return 0.0;
  return log_factorial(2 * m) - m * std::log(2.0) - log_factorial(m);
}

double binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  return std::round(std::exp(log_factorial(n) - log_factorial(k) -
                             log_factorial(n - k)));
}

double multinomial(int k, const std::vector<int>& parts) {
  double lg = log_factorial(k);
  int sum = 0;
  for (int p : parts) {
    lg -= log_factorial(p);
    sum += p;
  }
  if (sum != k) throw precondition_error("multinomial: parts do not sum to k");
  return std::round(std::exp(lg));
}

static void gen_degree(int dim, int degree, std::vector<int>& cur,
                       std::vector<std::vector<int>>& out) {
  if (dim == 1) {
    cur.push_back(degree);
    out.push_back(cur);
    cur.pop_back();
    return;
  }
  for (int e = degree; e >= 0; --e) {  // lexicographically descending
    cur.push_back(e);
    gen_degree(dim - 1, degree - e, cur, out);
    cur.pop_back();
  }
}

std::vector<std::vector<int>> multi_indices_of_degree(int dim, int degree) {
  std::vector<std::vector<int>> out;
  std::vector<int> cur;
  gen_degree(dim, degree, cur, out);
  return out;
}

std::vector<std::vector<int>> multi_indices_up_to(int dim, int max_degree) {
  std::vector<std::vector<int>> out;
  for (int d = 0; d <= max_degree; ++d) {
    auto block = multi_indices_of_degree(dim, d);
    out.insert(out.end(), block.begin(), block.end());
  }
  return out;
}

long n_monomials(int p, int d) {
  return static_cast<long>(std::llround(binomial(p + d, d)));
}

// --- Poly1 -------------------------------------------------------------------

void Poly1::trim() {
  while (c_.size() > 1 && c_.back() == 0.0) c_.pop_back();
}

Poly1 Poly1::monomial(int degree, double coeff) {
  std::vector<double> c(degree + 1, 0.0);
  c[degree] = coeff;
  return Poly1(std::move(c));
}

double Poly1::operator()(double x) const {
  double v = 0.0;
  for (auto it = c_.rbegin(); it != c_.rend(); ++it) v = v * x + *it;
  return v;
}

Poly1 Poly1::derivative() const {
  if (c_.size() <= 1) return Poly1(std::vector<double>{0.0});
  std::vector<double> d(c_.size() - 1);
  for (std::size_t i = 1; i < c_.size(); ++i) d[i - 1] = c_[i] * i;
  return Poly1(std::move(d));
}

Poly1 Poly1::operator+(const Poly1& o) const {
  std::vector<double> r(std::max(c_.size(), o.c_.size()), 0.0);
  for (std::size_t i = 0; i < c_.size(); ++i) r[i] += c_[i];
  for (std::size_t i = 0; i < o.c_.size(); ++i) r[i] += o.c_[i];
  return Poly1(std::move(r));
}

Poly1 Poly1::operator-(const Poly1& o) const {
  std::vector<double> r(std::max(c_.size(), o.c_.size()), 0.0);
  for (std::size_t i = 0; i < c_.size(); ++i) r[i] += c_[i];
  for (std::size_t i = 0; i < o.c_.size(); ++i) r[i] -= o.c_[i];
  return Poly1(std::move(r));
}

Poly1 Poly1::operator*(const Poly1& o) const {
  if (c_.empty() || o.c_.empty()) return Poly1(std::vector<double>{0.0});
  std::vector<double> r(c_.size() + o.c_.size() - 1, 0.0);
  for (std::size_t i = 0; i < c_.size(); ++i)
    for (std::size_t j = 0; j < o.c_.size(); ++j) r[i + j] += c_[i] * o.c_[j];
  return Poly1(std::move(r));
}

Poly1& Poly1::operator*=(double s) {
  for (double& v : c_) v *= s;
  return *this;
}

// --- MultiPoly ----------------------------------------------------------------

MultiPoly MultiPoly::constant(int dim, double v) {
  MultiPoly p(dim);
  p.add_term(std::vector<int>(dim, 0), v);
  return p;
}

MultiPoly MultiPoly::variable(int dim, int which) {
  MultiPoly p(dim);
  std::vector<int> e(dim, 0);
  e[which] = 1;
  p.add_term(e, 1.0);
  return p;
}

void MultiPoly::add_term(const std::vector<int>& expo, double coeff) {
  if (static_cast<int>(expo.size()) != dim_)
    throw precondition_error("MultiPoly: exponent dimension mismatch");
  terms_.emplace_back(expo, coeff);
  compact();
}

void MultiPoly::compact() {
  std::map<std::vector<int>, double> acc;
  for (auto& [e, c] : terms_) acc[e] += c;
  terms_.clear();
  for (auto& [e, c] : acc)
    if (c != 0.0) terms_.emplace_back(e, c);
}

MultiPoly MultiPoly::operator+(const MultiPoly& o) const {
  MultiPoly r(dim_);
  r.terms_ = terms_;
  r.terms_.insert(r.terms_.end(), o.terms_.begin(), o.terms_.end());
  r.compact();
  return r;
}

MultiPoly MultiPoly::operator*(const MultiPoly& o) const {
  MultiPoly r(dim_);
  for (auto& [e1, c1] : terms_)
    for (auto& [e2, c2] : o.terms_) {
      std::vector<int> e(dim_);
      for (int i = 0; i < dim_; ++i) e[i] = e1[i] + e2[i];
      r.terms_.emplace_back(std::move(e), c1 * c2);
    }
  r.compact();
  return r;
}

MultiPoly MultiPoly::pow(int k) const {
  MultiPoly r = constant(dim_, 1.0);
  for (int i = 0; i < k; ++i) r = r * (*this);
  return r;
}

// --- NNLS (Lawson-Hanson) ------------------------------------------------------

NnlsResult nnls(const std::vector<std::vector<double>>& Arows,
                const std::vector<double>& b, int max_iter, double tol) {
  const int m = static_cast<int>(Arows.size());
  if (m == 0) throw precondition_error("nnls: empty system");
  const int n = static_cast<int>(Arows[0].size());
  Eigen::MatrixXd A(m, n);
  Eigen::VectorXd bb(m);
  for (int i = 0; i < m; ++i) {
    bb(i) = b[i];
    for (int j = 0; j < n; ++j) A(i, j) = Arows[i][j];
  }
  if (max_iter <= 0) max_iter = 3 * n + 30;

  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  std::vector<bool> passive(n, false);
  NnlsResult res;

  auto solve_passive = [&](Eigen::VectorXd& z) {
    std::vector<int> idx;
    for (int j = 0; j < n; ++j)
      if (passive[j]) idx.push_back(j);
    z = Eigen::VectorXd::Zero(n);
    if (idx.empty()) return;
    Eigen::MatrixXd Ap(m, idx.size());
    for (std::size_t k = 0; k < idx.size(); ++k) Ap.col(k) = A.col(idx[k]);
    Eigen::VectorXd zp =
        Ap.colPivHouseholderQr().solve(bb);
    for (std::size_t k = 0; k < idx.size(); ++k) z(idx[k]) = zp(k);
  };

  for (int outer = 0; outer < max_iter; ++outer) {
    Eigen::VectorXd w = A.transpose() * (bb - A * x);
    int best = -1;
    double best_w = tol * (1.0 + bb.norm());
    for (int j = 0; j < n; ++j)
      if (!passive[j] && w(j) > best_w) {
        best_w = w(j);
        best = j;
      }
    if (best < 0) {
      res.converged = true;
      break;
    }
    passive[best] = true;

    for (int inner = 0; inner < max_iter; ++inner) {
      Eigen::VectorXd z;
      solve_passive(z);
      bool feasible = true;
      double alpha = 1.0;
      for (int j = 0; j < n; ++j)
        if (passive[j] && z(j) <= 0.0) {
          feasible = false;
          double a = x(j) / (x(j) - z(j));
          alpha = std::min(alpha, a);
        }
      if (feasible) {
        x = z;
        break;
      }
      x += alpha * (z - x);
      for (int j = 0; j < n; ++j)
        if (passive[j] && x(j) <= tol) {
          x(j) = 0.0;
          passive[j] = false;
        }
    }
    res.iterations = outer + 1;
  }
  res.x.assign(x.data(), x.data() + n);
  res.residual_norm = (A * x - bb).norm();
  return res;
}

// --- parallel map ---------------------------------------------------------------

static std::atomic<int> g_threads{0};

void set_parallelism(int threads) { g_threads = threads; }

int parallelism() {
  int t = g_threads.load();
  if (t > 0) return t;
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) {
  int nt = parallelism();
  if (nt <= 1 || n < 64) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  // chunk size depends on n only, so the work decomposition is stable
  std::size_t chunk = std::max<std::size_t>(1, n / 256);
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (;;) {
      std::size_t lo = next.fetch_add(chunk);
      if (lo >= n) return;
      std::size_t hi = std::min(n, lo + chunk);
      for (std::size_t i = lo; i < hi; ++i) fn(i);
    }
  };
  std::vector<std::thread> pool;
  for (int t = 0; t < nt; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
}

}  // namespace rcid::num
