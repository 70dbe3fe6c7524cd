#include "rcid/harness.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "rcid/char_fn.hpp"
#include "rcid/deconv_panel.hpp"
#include "rcid/momentseq.hpp"
#include "rcid/numerics.hpp"
#include "rcid/rc_linear.hpp"
#include "rcid/riesz_basis.hpp"
#include "rcid/sphere_bc.hpp"
#include "rcid/uniqueness.hpp"

namespace rcid::harness {

namespace fs = std::filesystem;
namespace ms = rcid::momentseq;
namespace uq = rcid::uniqueness;
namespace rl = rcid::rc_linear;
namespace dp = rcid::deconv_panel;
namespace sb = rcid::sphere_bc;
namespace rb = rcid::riesz_basis;

// --- CSV ------------------------------------------------------------------

CsvTable load_dataset(const std::string& path, const std::string& schema) {
  static const std::map<std::string, std::vector<std::string>> schemas = {
      {"moments", {"order", "value"}},
      {"points", {"x1"}},
      {"cf", {"t", "re", "im"}},
      {"panel", {"unit", "period", "y", "x"}},
      {"linear", {"y", "x1"}},
      {"atoms", {"weight", "g0"}},
  };
  auto it = schemas.find(schema);
  if (it == schemas.end()) throw data_error("load_dataset: unknown schema " + schema);

  std::ifstream in(path);
  if (!in) throw data_error("load_dataset: cannot open " + path);
  CsvTable tab;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (line_no == 1) {
      tab.header = cells;
      // prefix match against the schema's required columns
      for (std::size_t k = 0; k < it->second.size(); ++k)
        if (k >= cells.size() || cells[k] != it->second[k])
          throw data_error("load_dataset: header mismatch for schema '" +
                           schema + "' in " + path);
      continue;
    }
    std::vector<double> row;
    for (const auto& c : cells) {
      try {
        row.push_back(std::stod(c));
      } catch (...) {
        throw data_error("load_dataset: malformed value at line " +
                         std::to_string(line_no) + " of " + path);
      }
    }
    if (row.size() != tab.header.size())
      throw data_error("load_dataset: wrong cell count at line " +
                       std::to_string(line_no) + " of " + path);
    tab.rows.push_back(std::move(row));
  }
  if (tab.header.empty())
    throw data_error("load_dataset: empty file " + path);
  std::cerr << "loaded " << tab.rows.size() << " rows from " << path << "\n";
  return tab;
}

namespace {

std::string csv_of(const std::vector<std::string>& header,
                   const std::vector<std::vector<double>>& rows) {
  std::ostringstream out;
  out.precision(17);
  for (std::size_t i = 0; i < header.size(); ++i)
    out << header[i] << (i + 1 < header.size() ? "," : "\n");
  for (const auto& r : rows) {
    for (std::size_t i = 0; i < r.size(); ++i)
      out << r[i] << (i + 1 < r.size() ? "," : "\n");
  }
  return out.str();
}

// --- shared builders ---------------------------------------------------------

uq::SupportSet support_from_config(const json& cfg) {
  if (cfg.contains("csv")) {
    auto tab = load_dataset(cfg.at("csv").get<std::string>(), "points");
    return uq::SupportSet::from_points(tab.rows);
  }
  if (cfg.contains("points")) {
    std::vector<std::vector<double>> pts;
    for (const auto& p : cfg.at("points"))
      pts.push_back(p.get<std::vector<double>>());
    return uq::SupportSet::from_points(std::move(pts));
  }
  std::string gen = cfg.at("generator").get<std::string>();
  if (gen == "fan")
    return uq::SupportSet::fan(cfg.at("slopes").get<std::vector<double>>(),
                               cfg.at("budget").get<int>());
  if (gen == "staircase")
    return uq::SupportSet::staircase(cfg.at("lo").get<double>(),
                                     cfg.at("hi").get<double>(),
                                     cfg.at("budget").get<int>());
  if (gen == "geometric")
    return uq::SupportSet::geometric(cfg.at("ratio").get<double>(),
                                     cfg.at("count").get<int>());
  if (gen == "grid") {
    std::vector<std::vector<double>> axes;
    for (const auto& a : cfg.at("axes")) axes.push_back(a.get<std::vector<double>>());
    return uq::SupportSet::grid(axes);
  }
  throw data_error("unknown support generator: " + gen);
}

std::vector<rl::Atom> atoms_from_config(const json& cfg) {
  std::vector<rl::Atom> atoms;
  if (cfg.is_object() && cfg.contains("csv")) {
    // header: weight,g0,g1,...
    auto tab = load_dataset(cfg.at("csv").get<std::string>(), "atoms");
    for (const auto& row : tab.rows) {
      rl::Atom atom;
      atom.weight = row[0];
      atom.gamma.assign(row.begin() + 1, row.end());
      atoms.push_back(std::move(atom));
    }
    return atoms;
  }
  for (const auto& a : cfg) {
    rl::Atom atom;
    atom.gamma = a.at("gamma").get<std::vector<double>>();
    atom.weight = a.at("weight").get<double>();
    atoms.push_back(std::move(atom));
  }
  return atoms;
}

struct Family {
  std::string label;
  ms::MomentSequence seq;
  std::function<double(double)> density, density_prime;
  bool has_density = false;
};

Family family_from_config(const json& f, int K) {
  std::string name = f.at("name").get<std::string>();
  if (name == "normal") {
    Family fam{name, ms::MomentSequence::normal(K), {}, {}, true};
    fam.density = [](double x) {
      return std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI);
    };
    fam.density_prime = [d = fam.density](double x) { return -x * d(x); };
    return fam;
  }
  if (name == "lognormal") {
    Family fam{name, ms::MomentSequence::lognormal(K), {}, {}, true};
    fam.density = [](double x) {
      double l = std::log(x);
      return std::exp(-0.5 * l * l) / (x * std::sqrt(2.0 * M_PI));
    };
    fam.density_prime = [d = fam.density](double x) {
      return d(x) * (-(std::log(x) + 1.0) / x);
    };
    return fam;
  }
  if (name == "chi2") {
    double k = f.at("dof").get<double>();
    Family fam{"chi2(" + std::to_string(static_cast<int>(k)) + ")",
               ms::MomentSequence::chi_squared(K, k), {}, {}, true};
    double logc = -0.5 * k * std::log(2.0) - std::lgamma(0.5 * k);
    fam.density = [k, logc](double x) {
      return std::exp(logc + (0.5 * k - 1.0) * std::log(x) - 0.5 * x);
    };
    fam.density_prime = [k, d = fam.density](double x) {
      return d(x) * ((0.5 * k - 1.0) / x - 0.5);
    };
    return fam;
  }
  if (name == "gamma") {
    double a = f.at("shape").get<double>(), b = f.at("rate").get<double>();
    Family fam{"gamma", ms::MomentSequence::gamma_dist(K, a, b), {}, {}, true};
    double logc = a * std::log(b) - std::lgamma(a);
    fam.density = [a, b, logc](double x) {
      return std::exp(logc + (a - 1.0) * std::log(x) - b * x);
    };
    fam.density_prime = [a, b, d = fam.density](double x) {
      return d(x) * ((a - 1.0) / x - b);
    };
    return fam;
  }
  if (name == "abs_normal_power") {
    double r = f.at("r").get<double>();
    Family fam{"abs_normal_power(" + std::to_string(r) + ")",
               ms::MomentSequence::abs_normal_power(K, r), {}, {}, true};
    fam.density = [r](double x) {
      return 2.0 / (r * std::sqrt(2.0 * M_PI)) *
             std::pow(x, 1.0 / r - 1.0) * std::exp(-0.5 * std::pow(x, 2.0 / r));
    };
    fam.density_prime = [r, d = fam.density](double x) {
      return d(x) * ((1.0 / r - 1.0) / x - std::pow(x, 2.0 / r - 1.0) / r);
    };
    return fam;
  }
  if (name == "factorial")
    return {name, ms::MomentSequence::factorial(K), {}, {}, false};
  if (name == "exp_power")
    return {name, ms::MomentSequence::exp_power_growth(K, f.at("alpha").get<double>()),
            {}, {}, false};
  if (name == "csv") {
    auto tab = load_dataset(f.at("path").get<std::string>(), "moments");
    std::vector<double> vals(tab.rows.size());
    std::optional<std::vector<double>> abs_vals;
    if (tab.header.size() >= 3) abs_vals.emplace(tab.rows.size());
    for (const auto& r : tab.rows) {
      int order = static_cast<int>(r[0]);
      if (order < 0 || order >= static_cast<int>(vals.size()))
        throw data_error("moments csv: orders must be 0..K contiguous");
      vals[order] = r[1];
      if (abs_vals) (*abs_vals)[order] = r[2];
    }
    std::string sup = f.value("support", "real_line");
    ms::SupportClass sc = sup == "half_line" ? ms::SupportClass::half_line
                          : sup == "compact" ? ms::SupportClass::compact
                                             : ms::SupportClass::real_line;
    return {"csv:" + f.at("path").get<std::string>(),
            ms::MomentSequence::from_values(vals, sc, abs_vals), {}, {}, false};
  }
  throw data_error("unknown moment family: " + name);
}

json criteria_json(const std::vector<ms::CriterionResult>& criteria) {
  json arr = json::array();
  for (const auto& c : criteria)
    arr.push_back({{"name", c.name},
                   {"statistic", c.statistic},
                   {"applicable", c.applicable},
                   {"fired", c.fired},
                   {"note", c.note}});
  return arr;
}

// --- pipelines ----------------------------------------------------------------

void pipeline_determinacy(const json& cfg, RunReport& rep) {
  int K = cfg.value("max_order", 40);
  ms::IntegrationCutoffs cuts;
  cuts.x0 = cfg.value("krein_x0", 1.0);
  cuts.x_max = cfg.value("krein_x_max", 1e6);
  json verdicts = json::array();
  for (const auto& fj : cfg.at("families")) {
    Family fam = family_from_config(fj, K);
    ms::DeterminacyReport r =
        fam.has_density
            ? ms::assess(fam.seq, &fam.density, &fam.density_prime, cuts)
            : ms::assess(fam.seq);
    verdicts.push_back({{"family", fam.label},
                        {"verdict", ms::verdict_name(r.verdict)},
                        {"growth_exponent", r.growth_exponent},
                        {"criteria", criteria_json(r.criteria)},
                        {"window", "last half of orders"},
                        {"gamma_cutoff", "1 +- 0.05"}});
  }
  rep.body["verdicts"] = verdicts;
}

void pipeline_uniqueness(const json& cfg, RunReport& rep) {
  auto V = support_from_config(cfg.at("support"));
  int degree = cfg.at("degree").get<int>();
  auto rk = uq::polynomial_uniqueness_rank(V, degree);
  json out{{"degree", degree},
           {"rank", rk.rank},
           {"n_columns", rk.n_columns},
           {"full_rank", rk.full_rank},
           {"rank_tolerance", 1e-10},
           {"monomial_order", "graded-lex"}};
  if (!rk.witness.empty()) {
    json w = json::array();
    for (std::size_t i = 0; i < rk.witness.size(); ++i)
      w.push_back({{"monomial", rk.monomials[i]}, {"coeff", rk.witness[i]}});
    out["witness"] = w;
  }
  rep.body["uniqueness"] = out;

  if (cfg.contains("radii")) {
    const auto& rj = cfg.at("radii");
    std::vector<double> radii;
    int count = rj.at("count").get<int>();
    double lo = rj.at("lo").get<double>(), hi = rj.at("hi").get<double>();
    for (int i = 0; i < count; ++i)
      radii.push_back(lo * std::pow(hi / lo, double(i) / (count - 1)));
    auto prof = uq::counting_function(V, radii);
    std::vector<std::vector<double>> rows;
    for (std::size_t i = 0; i < prof.radii.size(); ++i)
      rows.push_back({prof.radii[i], double(prof.counts[i])});
    rep.files.emplace_back("counting_profile.csv", csv_of({"radius", "count"}, rows));
    if (cfg.contains("growth")) {
      const auto& gj = cfg.at("growth");
      uq::GrowthConditionSpec spec;
      std::string kind = gj.at("kind").get<std::string>();
      spec.threshold = gj.value("threshold", 1.0);
      if (kind == "e2")
        spec.kind = uq::GrowthConditionSpec::Kind::e2;
      else if (kind == "e4a") {
        spec.kind = uq::GrowthConditionSpec::Kind::e4a;
        spec.n = gj.value("n", 1);
      } else if (kind == "e1") {
        spec.kind = uq::GrowthConditionSpec::Kind::e1;
        double rho = gj.value("rho", 1.0);
        spec.m_envelope = [rho](double r) { return std::exp(rho * r); };
        spec.t_grid = gj.value("t_grid", std::vector<double>{1.0});
      } else {
        throw data_error("unknown growth condition kind: " + kind);
      }
      auto g = uq::growth_condition_check(prof, spec);
      rep.body["growth_check"] = {{"kind", kind},
                                  {"pass", g.pass},
                                  {"statistic_at_rmax", g.statistic_at_rmax},
                                  {"trend_slope", g.trend_slope},
                                  {"threshold", spec.threshold},
                                  {"window", "largest decade of radii"}};
    }
  }
}

// long-format conditional moment table: x1..xp,k,value
rl::ConditionalMomentTable moment_table_from_csv(const std::string& path,
                                                 int p, int K) {
  auto tab = load_dataset(path, "points");
  std::map<std::vector<double>, std::vector<double>> by_point;
  for (const auto& row : tab.rows) {
    if (static_cast<int>(row.size()) != p + 2)
      throw data_error("moment table csv: expected x1..xp,k,value");
    std::vector<double> x(row.begin(), row.begin() + p);
    int k = static_cast<int>(row[p]);
    if (k < 0 || k > K) throw data_error("moment table csv: order out of range");
    auto& vals = by_point[x];
    vals.resize(K + 1, std::nan(""));
    vals[k] = row[p + 1];
  }
  std::vector<std::vector<double>> points, values;
  for (auto& [x, vals] : by_point) {
    for (double v : vals)
      if (std::isnan(v)) throw data_error("moment table csv: missing order");
    points.push_back(x);
    values.push_back(vals);
  }
  return rl::ConditionalMomentTable(std::move(points), K, std::move(values));
}

void pipeline_recover_linear(const json& cfg, RunReport& rep) {
  int p = cfg.at("p").get<int>();
  rl::RCModel model(p, atoms_from_config(cfg.at("atoms")));
  auto V = support_from_config(cfg.at("support"));
  int K = cfg.at("K").get<int>();

  auto table = cfg.contains("table_csv")
                   ? moment_table_from_csv(
                         cfg.at("table_csv").get<std::string>(), p, K)
                   : rl::conditional_moments(model, V, K);
  auto rank = uq::polynomial_uniqueness_rank(V, K);
  auto rec = rl::recover_mixed_moments(table);

  {
    // conditional moment table exchanged as CSV (long format)
    std::vector<std::vector<double>> rows;
    for (std::size_t i = 0; i < table.points().size(); ++i)
      for (int k = 0; k <= K; ++k) {
        std::vector<double> row = table.points()[i];
        row.push_back(double(k));
        row.push_back(table.value(i, k));
        rows.push_back(std::move(row));
      }
    std::vector<std::string> hdr;
    for (int d = 1; d <= p; ++d) hdr.push_back("x" + std::to_string(d));
    hdr.push_back("k");
    hdr.push_back("value");
    rep.files.emplace_back("conditional_moments.csv", csv_of(hdr, rows));
  }

  json ranks = json::array();
  for (const auto& r : rec.ranks)
    ranks.push_back({{"degree", r.degree},
                     {"rank", r.rank},
                     {"n_unknowns", r.n_unknowns},
                     {"residual_rel", r.residual_rel},
                     {"deficient", r.deficient}});
  rep.body["recovery"] = {{"support_full_rank", rank.full_rank},
                          {"all_full_rank", rec.all_full_rank},
                          {"ranks", ranks},
                          {"rank_tolerance", 1e-10},
                          {"residual_tolerance", 1e-8}};

  // oracle comparison and moment export
  auto oracle = rl::MixedMomentSet::from_atoms(model.atoms(), K);
  double max_rel = 0.0;
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < oracle.index_set().size(); ++i) {
    double got = rec.moments.get_flat(i);
    double want = oracle.get_flat(i);
    double rel = std::abs(got - want) / std::max(1.0, std::abs(want));
    max_rel = std::max(max_rel, rel);
    rows.push_back({double(i), want, got, rel});
  }
  rep.body["recovery"]["max_relative_error_vs_atom_oracle"] = max_rel;
  rep.files.emplace_back("mixed_moments.csv",
                         csv_of({"index", "oracle", "recovered", "rel_error"}, rows));

  if (cfg.contains("reconstruct_grid")) {
    const auto& gj = cfg.at("reconstruct_grid");
    // tensor grid over the declared box
    std::vector<std::vector<double>> axes;
    for (const auto& a : gj.at("axes")) {
      double lo = a.at("lo").get<double>(), hi = a.at("hi").get<double>();
      int n = a.at("n").get<int>();
      std::vector<double> ax;
      for (int i = 0; i < n; ++i) ax.push_back(lo + (hi - lo) * i / (n - 1));
      axes.push_back(std::move(ax));
    }
    std::vector<std::vector<double>> nodes{{}};
    for (const auto& ax : axes) {
      std::vector<std::vector<double>> next;
      for (const auto& partial : nodes)
        for (double v : ax) {
          auto q = partial;
          q.push_back(v);
          next.push_back(std::move(q));
        }
      nodes = std::move(next);
    }
    auto recon = rl::reconstruct_distribution(rec.moments, nodes);
    rep.body["reconstruction"] = {{"residual", recon.residual},
                                  {"rank", recon.rank},
                                  {"non_unique", recon.non_unique},
                                  {"success", recon.success}};
    std::vector<std::vector<double>> wrows;
    for (std::size_t i = 0; i < nodes.size(); ++i)
      if (recon.weights[i] > 1e-12) {
        std::vector<double> row = nodes[i];
        row.push_back(recon.weights[i]);
        wrows.push_back(std::move(row));
      }
    std::vector<std::string> hdr;
    for (int d = 0; d <= p; ++d) hdr.push_back("g" + std::to_string(d));
    hdr.push_back("weight");
    rep.files.emplace_back("reconstruction_weights.csv", csv_of(hdr, wrows));
  }
}

void pipeline_counterexample(const json& cfg, RunReport& rep) {
  rl::HomogeneousPoly Q;
  if (cfg.contains("Q")) {
    std::vector<std::pair<std::vector<int>, double>> terms;
    for (const auto& t : cfg.at("Q"))
      terms.emplace_back(t.at("exponents").get<std::vector<int>>(),
                         t.at("coeff").get<double>());
    const int dim = static_cast<int>(terms.at(0).first.size());
    Q = rl::HomogeneousPoly::from_terms(dim, std::move(terms));
  } else {
    auto V = support_from_config(cfg.at("support"));
    int degree = cfg.at("degree").get<int>();
    auto rk = uq::polynomial_uniqueness_rank(V, degree);
    if (rk.full_rank)
      throw numerical_error(
          "counterexample: support has full rank, no witness polynomial");
    Q = rl::HomogeneousPoly::homogenize_witness(rk.monomials, rk.witness);
  }

  auto ce = rl::build_counterexample(Q);
  int k_max = cfg.value("k_max", 3);
  int n_x = cfg.value("x_values", 20);
  double max_moment_diff = 0.0;
  for (int xi = 0; xi < n_x; ++xi) {
    double x = -2.0 + 4.0 * xi / (n_x - 1);
    std::vector<double> y{1.0};
    // regressors (x, x^2, ..., x^{dim-1}) under the polynomial support map
    double xp = 1.0;
    for (int d = 1; d < ce.dim; ++d) {
      xp *= x;
      y.push_back(xp);
    }
    for (int k = 1; k <= k_max; ++k) {
      double d = std::abs(ce.conditional_index_moment(y, k, true) -
                          ce.conditional_index_moment(y, k, false));
      max_moment_diff = std::max(max_moment_diff, d);
    }
  }
  rep.body["counterexample"] = {
      {"degree", Q.degree},
      {"integral_h", ce.integral_h},
      {"h_sup", ce.h_sup},
      {"base_lower_bound_c", ce.c},
      {"tv_distance", ce.tv_distance},
      {"max_conditional_moment_diff", max_moment_diff},
      {"k_max", k_max},
      {"x_values", n_x}};
}

CharFnGrid cf_grid_from_csv(const std::string& path) {
  auto tab = load_dataset(path, "cf");
  if (tab.rows.empty()) throw data_error("cf csv: no rows in " + path);
  // rows must form a symmetric grid in t; infer the step from the spacing
  std::vector<std::vector<double>> rows = tab.rows;
  std::sort(rows.begin(), rows.end(),
            [](const auto& a, const auto& b) { return a[0] < b[0]; });
  int half_n = static_cast<int>(rows.size()) / 2;
  double step = rows[1][0] - rows[0][0];
  std::vector<cpx> vals;
  for (const auto& r : rows) vals.emplace_back(r[1], r[2]);
  CharFnGrid g(step, half_n, std::move(vals),
               CfProvenance::population_closed_form);
  g.validate(1e-6);
  return g;
}

void pipeline_kotlarski(const json& cfg, RunReport& rep) {
  double t_max = cfg.value("t_max", 5.0);
  double step = cfg.value("step", 0.01);
  auto comp_cf = [&](const std::string& name) -> std::function<cpx(double)> {
    if (name == "uniform") return [](double t) { return cf::uniform(t); };
    if (name == "cauchy") return [](double t) { return cf::cauchy(t); };
    if (name == "triangular") return [](double t) { return cf::triangular(t); };
    if (name == "normal") return [](double t) { return cf::normal(t); };
    throw data_error("kotlarski: unknown component " + name);
  };

  bool from_csv = cfg.contains("y1_csv");
  std::function<cpx(double)> eps1, delta, eps2;
  if (!from_csv) {
    eps1 = comp_cf(cfg.at("eps1").get<std::string>());
    delta = comp_cf(cfg.at("delta").get<std::string>());
    eps2 = comp_cf(cfg.at("eps2").get<std::string>());
  }
  auto y1 = from_csv
                ? cf_grid_from_csv(cfg.at("y1_csv").get<std::string>())
                : CharFnGrid::from_callable(
                      [&](double t) { return delta(t) * eps1(t); }, t_max, step);
  auto y2 = from_csv
                ? cf_grid_from_csv(cfg.at("y2_csv").get<std::string>())
                : CharFnGrid::from_callable(
                      [&](double t) { return delta(t) * eps2(t); }, t_max, step);
  auto d21 = from_csv
                 ? cf_grid_from_csv(cfg.at("y2_minus_y1_csv").get<std::string>())
                 : CharFnGrid::from_callable(
                       [&](double t) { return eps2(t) * eps1(-t); }, t_max, step);

  dp::KotlarskiOptions opts;
  if (cfg.contains("omega")) {
    opts.recon_lo = cfg.at("omega")[0].get<double>();
    opts.recon_hi = cfg.at("omega")[1].get<double>();
  }
  auto res = dp::kotlarski_recover(y1, y2, d21, opts);

  rep.body["kotlarski"] = {{"t0", res.t0},
                           {"b_estimate", res.b_estimate},
                           {"zero_locations_eps1", res.zero_locations_eps1},
                           {"max_ratio_imag", res.max_ratio_imag}};
  if (!from_csv) {
    auto sup_err = [&](const CharFnGrid& got,
                       const std::function<cpx(double)>& want) {
      double e = 0.0;
      for (int i = 0; i < got.size(); ++i)
        e = std::max(e, std::abs(got[i] - want(got.t(i))));
      return e;
    };
    rep.body["kotlarski"]["sup_error_eps1"] = sup_err(res.phi_eps1, eps1);
    rep.body["kotlarski"]["sup_error_delta"] = sup_err(res.phi_delta, delta);
    rep.body["kotlarski"]["sup_error_eps2"] = sup_err(res.phi_eps2, eps2);
  }

  auto cf_csv = [&](const CharFnGrid& g) {
    std::vector<std::vector<double>> rows;
    for (int i = 0; i < g.size(); ++i)
      rows.push_back({g.t(i), g[i].real(), g[i].imag()});
    return csv_of({"t", "re", "im"}, rows);
  };
  rep.files.emplace_back("phi_eps1.csv", cf_csv(res.phi_eps1));
  rep.files.emplace_back("phi_delta.csv", cf_csv(res.phi_delta));
  rep.files.emplace_back("phi_eps2.csv", cf_csv(res.phi_eps2));
}

void pipeline_panel(const json& cfg, RunReport& rep) {
  dp::PanelModel model;
  model.T = cfg.at("T").get<int>();
  model.coefficient_atoms = atoms_from_config(cfg.at("atoms"));
  for (const auto& e : cfg.at("errors")) {
    std::string name = e.get<std::string>();
    if (name == "uniform")
      model.errors.push_back(dp::uniform_error());
    else if (name == "normal")
      model.errors.push_back(dp::normal_error(1.0));
    else
      throw data_error("panel: unknown error law " + name);
  }
  model.stayer_value = cfg.value("stayer", 1.0);
  model.validate();

  double t_max = cfg.value("t_max", 5.0), step = cfg.value("step", 0.01);
  dp::KotlarskiOptions opts;
  opts.recon_lo = -1.0;
  opts.recon_hi = 1.0;
  auto eps = dp::panel_epsilon_recover(model, t_max, step, opts);
  double worst = 0.0;
  for (int t = 1; t <= model.T; ++t) {
    const auto& grid = eps.phi_eps[t - 1];
    for (int i = 0; i < grid.size(); ++i)
      worst = std::max(worst,
                       std::abs(grid[i] - model.errors[t - 1].cf(grid.t(i))));
  }
  rep.body["panel"]["eps_recovery_sup_error"] = worst;
  rep.body["panel"]["t0"] = eps.first_pair.t0;

  // joint moment recovery
  int K = cfg.value("K", 3);
  std::vector<std::vector<double>> x_points;
  if (cfg.contains("x_points"))
    for (const auto& x : cfg.at("x_points"))
      x_points.push_back(x.get<std::vector<double>>());
  else {
    num::RngStream rng(cfg.value("seed", 7ULL), "panel_x");
    for (int i = 0; i < cfg.value("n_x", 20); ++i) {
      std::vector<double> x(model.T);
      for (int t = 0; t < model.T; ++t) x[t] = 0.3 + 2.0 * rng.next_uniform();
      x_points.push_back(std::move(x));
    }
  }
  auto table = dp::joint_conditional_moments(model, x_points, K);
  std::vector<std::vector<double>> eps_mom(model.T);
  for (int t = 0; t < model.T; ++t)
    for (int m = 0; m <= K; ++m) eps_mom[t].push_back(model.errors[t].moment(m));
  auto rec = dp::panel_moment_recover(table, eps_mom, K);
  auto oracle = rl::MixedMomentSet::from_atoms(model.coefficient_atoms, K);
  double max_err = 0.0;
  for (std::size_t i = 0; i < oracle.index_set().size(); ++i)
    max_err = std::max(max_err, std::abs(rec.moments.get_flat(i) -
                                          oracle.get_flat(i)) /
                                    std::max(1.0, std::abs(oracle.get_flat(i))));
  json ranks = json::array();
  for (const auto& r : rec.ranks)
    ranks.push_back({{"degree", r.degree},
                     {"rank", r.rank},
                     {"n_unknowns", r.n_unknowns},
                     {"residual_rel", r.residual_rel},
                     {"deficient", r.deficient}});
  rep.body["panel"]["moment_recovery_max_rel_error"] = max_err;
  rep.body["panel"]["ranks"] = ranks;
  rep.body["panel"]["all_full_rank"] = rec.all_full_rank;
}

// the pi_BC test density on the circle: odd part with geometric spectrum
std::vector<double> circle_pbc_density(const sb::SphereGrid& grid, double rho,
                                       int n_harmonics) {
  std::vector<double> fm(grid.nodes.size(), 0.0);
  for (std::size_t i = 0; i < grid.nodes.size(); ++i) {
    double th = grid.theta[i];
    double c = 1.0;
    for (int m = 0; m < n_harmonics; ++m) {
      fm[i] += c * std::cos((2.0 * m + 1.0) * (th - 0.4 * m));
      c *= rho;
    }
  }
  std::vector<double> f(grid.nodes.size());
  for (std::size_t i = 0; i < f.size(); ++i)
    f[i] = fm[i] > 0 ? 2.0 * fm[i] : 0.0;
  double mass = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) mass += grid.weights[i] * f[i];
  for (double& v : f) v /= mass;
  return f;
}

std::vector<double> sphere_pbc_density(const sb::SphereGrid& grid, double kappa) {
  // odd part of exp(kappa u.a), full odd spectrum with fast decay
  std::array<double, 3> a{0.3, 0.5, std::sqrt(1.0 - 0.09 - 0.25)};
  std::vector<double> f(grid.nodes.size());
  for (std::size_t i = 0; i < grid.nodes.size(); ++i) {
    const auto& u = grid.nodes[i];
    double d = kappa * (u[0] * a[0] + u[1] * a[1] + u[2] * a[2]);
    double odd = 0.5 * (std::exp(d) - std::exp(-d));
    f[i] = odd > 0 ? 2.0 * odd : 0.0;
  }
  double mass = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) mass += grid.weights[i] * f[i];
  for (double& v : f) v /= mass;
  return f;
}

void pipeline_binary_invert(const json& cfg, RunReport& rep) {
  int p = cfg.value("p", 1);
  int M = cfg.value("M", 64);
  sb::SphereGrid grid = p == 1
                            ? sb::SphereGrid::circle(cfg.value("nodes", 4096))
                            : sb::SphereGrid::sphere2(cfg.value("n_colat", 96),
                                                      cfg.value("n_az", 192));
  std::vector<double> f =
      p == 1 ? circle_pbc_density(grid, cfg.value("rho", 0.8),
                                  cfg.value("n_harmonics", 80))
             : sphere_pbc_density(grid, cfg.value("kappa", 6.0));

  auto tf = sb::hemispherical_forward_grid(grid, f, grid.nodes);
  std::vector<double> g(tf.size());
  for (std::size_t i = 0; i < g.size(); ++i)
    g[i] = std::clamp(tf[i] + 0.5, 0.0, 1.0);

  sb::HarmonicAnalyzer an(grid, 2 * M + 1);
  sb::InversionReport irep;
  auto rec = sb::invert_hemispherical(an, g, M, &irep);

  double l1 = 0.0, l1f = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    l1 += grid.weights[i] * std::abs(rec.values[i] - f[i]);
    l1f += grid.weights[i] * std::abs(f[i]);
  }
  rep.body["binary_invert"] = {
      {"p", p},
      {"M", M},
      {"relative_l1_error", l1 / l1f},
      {"renormalization", irep.renormalization},
      {"truncation", irep.truncation},
      {"truncation_forced", irep.truncation_forced},
      {"lambda_table", irep.lambda_used},
      {"degenerate", irep.degenerate}};

  auto spec = an.spectrum(rec.values);
  std::vector<std::vector<double>> rows;
  for (int d = 0; d <= spec.max_degree; ++d)
    rows.push_back({double(d), spec.l1[d], spec.l2[d]});
  rep.files.emplace_back("spectrum.csv", csv_of({"degree", "l1_norm", "l2_norm"}, rows));

  std::vector<std::vector<double>> drows;
  for (std::size_t i = 0; i < rec.values.size(); ++i) {
    if (p == 1)
      drows.push_back({double(i), grid.theta[i], rec.values[i]});
    else
      drows.push_back({double(i), grid.theta[i], grid.phi[i], rec.values[i]});
  }
  rep.files.emplace_back(
      "recovered_density.csv",
      csv_of(p == 1 ? std::vector<std::string>{"node_index", "theta", "value"}
                    : std::vector<std::string>{"node_index", "theta", "phi",
                                               "value"},
             drows));
}

void pipeline_single_index(const json& cfg, RunReport& rep) {
  int n = cfg.value("n", 10000);
  std::uint64_t seed = cfg.value("seed", 1234ULL);
  std::string fname = cfg.value("f", "identity");

  num::RngStream gstream(seed, "si_gamma");
  num::RngStream xstream(seed, "si_x");
  dp::SingleIndexData data;
  for (int i = 0; i < n; ++i) {
    double om = 2.0 * M_PI * gstream.uniform(i);
    std::vector<double> gamma{std::cos(om), std::sin(om)};
    std::vector<double> x1{-3.0 + 6.0 * xstream.uniform(4 * i),
                           -3.0 + 6.0 * xstream.uniform(4 * i + 1)};
    std::vector<double> x2 = x1;
    if (i % 50 != 0) {
      x2[0] += -2.0 + 4.0 * xstream.uniform(4 * i + 2);
      x2[1] += -2.0 + 4.0 * xstream.uniform(4 * i + 3);
    }
    auto fval = [&](const std::vector<double>& x) {
      double z = gamma[0] * x[0] + gamma[1] * x[1];
      return fname == "exp" ? std::exp(z) : z;
    };
    data.x1.push_back(x1);
    data.x2.push_back(x2);
    data.y1.push_back(fval(x1));
    data.y2.push_back(fval(x2));
  }
  auto res = dp::single_index_reduce(data);
  long ones = 0;
  for (int v : res.indicator) ones += v;
  rep.body["single_index"] = {{"n", n},
                              {"f", fname},
                              {"stayer_count", res.stayer_count},
                              {"tie_count", res.tie_count},
                              {"degenerate", res.degenerate},
                              {"indicator_sum", ones}};
  std::vector<std::vector<double>> rows;
  for (int i = 0; i < n; ++i)
    rows.push_back({double(res.indicator[i]), res.delta_x[i][0], res.delta_x[i][1]});
  rep.files.emplace_back("single_index_reduced.csv",
                         csv_of({"indicator", "dx1", "dx2"}, rows));
}

void pipeline_riesz(const json& cfg, RunReport& rep) {
  double r = cfg.value("r", std::exp(1.0));
  double T = cfg.value("T", 1.0);
  int max_index = cfg.value("max_index", 4);
  rb::ExponentSystem sys(r, T, max_index);

  auto kad = rb::kadec_check(sys);
  auto ind = rb::exponent_independence(sys, cfg.value("bound", 6));
  rb::ExponentSystem gram_sys(r, T, cfg.value("gram_max_index", 50));
  auto gram = rb::gram_frame_bounds(gram_sys);

  // biorthogonal reproduction of a basis element
  int j0 = std::min(2, max_index);
  auto bio = rb::biorthogonal_expand(
      sys, [&](double x) { return sys.f(j0, x); });
  double repro_err = 0.0;
  for (std::size_t i = 0; i < bio.ordering.size(); ++i) {
    cpx want = bio.ordering[i] == j0 ? cpx(1, 0) : cpx(0, 0);
    repro_err = std::max(repro_err, std::abs(bio.coefficients[i] - want));
  }

  {
    std::vector<std::vector<double>> rows;
    for (std::size_t i = 0; i < bio.ordering.size(); ++i)
      rows.push_back({double(bio.ordering[i]), bio.coefficients[i].real(),
                      bio.coefficients[i].imag()});
    rep.files.emplace_back("biorthogonal_coefficients.csv",
                           csv_of({"j", "re", "im"}, rows));
  }
  rep.body["riesz"] = {
      {"r", r},
      {"kadec_sup_deviation", kad.sup_deviation},
      {"kadec_pass", kad.pass},
      {"independent", ind.independent},
      {"combinations_checked", ind.combinations_checked},
      {"gram_min_eigenvalue", gram.min_eigenvalue},
      {"gram_max_eigenvalue", gram.max_eigenvalue},
      {"gram_condition", gram.condition},
      {"biorthogonal_residual", bio.reconstruction_residual},
      {"reproduction_error", repro_err}};
}

void pipeline_simulate(const json& cfg, RunReport& rep) {
  std::string what = cfg.value("model", "linear");
  std::uint64_t seed = cfg.value("seed", 1ULL);
  if (what == "linear") {
    int p = cfg.at("p").get<int>();
    rl::RCModel model(p, atoms_from_config(cfg.at("atoms")));
    auto V = support_from_config(cfg.at("support"));
    auto ds = rl::simulate_linear(model, V, cfg.value("n_per_point", 100), seed);
    std::vector<std::vector<double>> rows;
    for (std::size_t i = 0; i < ds.y.size(); ++i) {
      std::vector<double> row{ds.y[i]};
      row.insert(row.end(), ds.x[i].begin(), ds.x[i].end());
      rows.push_back(std::move(row));
    }
    std::vector<std::string> hdr{"y"};
    for (int d = 1; d <= p; ++d) hdr.push_back("x" + std::to_string(d));
    rep.files.emplace_back("linear_dataset.csv", csv_of(hdr, rows));
    rep.body["simulate"] = {{"model", "linear"}, {"rows", rows.size()}};
  } else if (what == "binary") {
    int n = cfg.value("n", 1000);
    auto gamma_sampler = [](num::RngStream& s, std::uint64_t i) {
      double om = 2.0 * M_PI * s.uniform(i);
      return std::vector<double>{std::cos(om), std::sin(om), 0.0};
    };
    auto x_sampler = [](num::RngStream& s, std::uint64_t i) {
      return std::vector<double>{-3.0 + 6.0 * s.uniform(2 * i),
                                 -3.0 + 6.0 * s.uniform(2 * i + 1)};
    };
    auto ds = sb::simulate_binary(gamma_sampler, x_sampler, n, seed);
    std::vector<std::vector<double>> rows;
    for (int i = 0; i < n; ++i)
      rows.push_back({double(ds.y[i]), ds.x[i][0], ds.x[i][1]});
    rep.files.emplace_back("binary_dataset.csv", csv_of({"y", "x1", "x2"}, rows));
    rep.body["simulate"] = {{"model", "binary"}, {"rows", rows.size()}};
  } else {
    throw data_error("simulate: unknown model " + what);
  }
}

}  // namespace

// --- config resolution ---------------------------------------------------------

json resolve_config(const json& raw) {
  json cfg = raw;
  if (!cfg.contains("pipeline"))
    throw data_error("config: missing 'pipeline'");
  static const std::vector<std::string> known{
      "determinacy", "uniqueness",  "recover-linear", "counterexample",
      "kotlarski",   "panel",       "binary-invert",  "single-index",
      "riesz",       "simulate"};
  std::string p = cfg.at("pipeline").get<std::string>();
  if (std::find(known.begin(), known.end(), p) == known.end())
    throw data_error("config: unknown pipeline '" + p + "'");
  if (!cfg.contains("seed")) cfg["seed"] = 0;
  if (!cfg.contains("threads")) cfg["threads"] = 0;
  // pipelines with full defaults run without a section; the others fail
  // validation when they reach for a missing key
  if (!cfg.contains(p)) cfg[p] = json::object();
  // tolerance overrides must be positive
  if (cfg.contains("tolerances"))
    for (const auto& [k, v] : cfg.at("tolerances").items())
      if (!(v.get<double>() > 0))
        throw data_error("config: tolerance '" + k + "' must be positive");
  return cfg;
}

RunReport run_pipeline(const json& raw) {
  json cfg = resolve_config(raw);
  std::string name = cfg.at("pipeline").get<std::string>();
  num::set_parallelism(cfg.value("threads", 0));

  RunReport rep;
  rep.body["schema_version"] = 1;
  rep.body["pipeline"] = name;
  rep.body["config"] = cfg;
  json stages = json::array();

  auto stage = [&](const std::string& sname, auto&& fn) {
    auto t0 = std::chrono::steady_clock::now();
    fn();
    auto dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0);
    std::cerr << "[stage] " << sname << " " << dt.count() << " s\n";
    stages.push_back({{"name", sname}, {"status", "ok"}});
  };

  json section = cfg.contains(name) ? cfg.at(name) : json::object();
  if (!section.contains("seed") && cfg.contains("seed"))
    section["seed"] = cfg.at("seed");

  try {
    if (name == "determinacy")
      stage(name, [&] { pipeline_determinacy(section, rep); });
    else if (name == "uniqueness")
      stage(name, [&] { pipeline_uniqueness(section, rep); });
    else if (name == "recover-linear")
      stage(name, [&] { pipeline_recover_linear(section, rep); });
    else if (name == "counterexample")
      stage(name, [&] { pipeline_counterexample(section, rep); });
    else if (name == "kotlarski")
      stage(name, [&] { pipeline_kotlarski(section, rep); });
    else if (name == "panel")
      stage(name, [&] { pipeline_panel(section, rep); });
    else if (name == "binary-invert")
      stage(name, [&] { pipeline_binary_invert(section, rep); });
    else if (name == "single-index")
      stage(name, [&] { pipeline_single_index(section, rep); });
    else if (name == "riesz")
      stage(name, [&] { pipeline_riesz(section, rep); });
    else if (name == "simulate")
      stage(name, [&] { pipeline_simulate(section, rep); });
  } catch (const data_error& e) {
    stages.push_back({{"name", name}, {"status", "validation_error"},
                      {"message", e.what()}});
    rep.exit_code = kExitValidation;
  } catch (const precondition_error& e) {
    stages.push_back({{"name", name}, {"status", "validation_error"},
                      {"message", e.what()}});
    rep.exit_code = kExitValidation;
  } catch (const json::exception& e) {
    // malformed or missing config keys surface as validation errors
    stages.push_back({{"name", name}, {"status", "validation_error"},
                      {"message", e.what()}});
    rep.exit_code = kExitValidation;
  } catch (const std::exception& e) {
    stages.push_back({{"name", name}, {"status", "numerical_failure"},
                      {"message", e.what()}});
    rep.exit_code = kExitNumerical;
  }
  rep.body["stages"] = stages;
  json names = json::array();
  for (const auto& [fname, content] : rep.files) names.push_back(fname);
  rep.body["artifact_files"] = names;
  return rep;
}

std::string emit_report(const RunReport& report, const std::string& out_dir) {
  fs::create_directories(out_dir);
  // fail before discarding computation if the directory is not writable
  fs::path probe = fs::path(out_dir) / ".write_probe";
  {
    std::ofstream p(probe);
    if (!p) throw data_error("emit_report: output directory not writable");
  }
  fs::remove(probe);

  for (const auto& [name, content] : report.files) {
    std::ofstream f(fs::path(out_dir) / name);
    f << content;
  }
  fs::path rp = fs::path(out_dir) / "report.json";
  std::ofstream f(rp);
  f << report.body.dump(2) << "\n";
  return rp.string();
}

}  // namespace rcid::harness
