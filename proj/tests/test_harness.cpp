#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "rcid/char_fn.hpp"
#include "rcid/harness.hpp"
#include "rcid/numerics.hpp"

using namespace rcid;
using namespace rcid::harness;

namespace {

json determinacy_config() {
  return json{
      {"pipeline", "determinacy"},
      {"seed", 1},
      {"determinacy",
       {{"max_order", 40},
        {"families", json::array({{{"name", "normal"}},
                                  {{"name", "chi2"}, {"dof", 3}},
                                  {{"name", "gamma"}, {"shape", 2}, {"rate", 1}},
                                  {{"name", "lognormal"}},
                                  {{"name", "abs_normal_power"}, {"r", 3}},
                                  {{"name", "abs_normal_power"}, {"r", 5}}})}}}};
}

}  // namespace

TEST_CASE("config validation") {
  CHECK_THROWS_AS(resolve_config(json{{"seed", 1}}), data_error);
  CHECK_THROWS_AS(resolve_config(json{{"pipeline", "nope"}}), data_error);
  CHECK_THROWS_AS(resolve_config(json{{"pipeline", "riesz"},
                                      {"riesz", json::object()},
                                      {"tolerances", {{"x", -1.0}}}}),
                  data_error);
  auto cfg = resolve_config(json{{"pipeline", "riesz"}, {"riesz", json::object()}});
  CHECK(cfg["seed"] == 0);
}

TEST_CASE("determinacy pipeline reproduces the roster classification") {
  auto rep = run_pipeline(determinacy_config());
  REQUIRE(rep.exit_code == 0);
  auto verdicts = rep.body["verdicts"];
  REQUIRE(verdicts.size() == 6);
  auto verdict_of = [&](const std::string& label) {
    for (const auto& v : verdicts)
      if (v["family"].get<std::string>().find(label) != std::string::npos)
        return v["verdict"].get<std::string>();
    return std::string("missing");
  };
  CHECK(verdict_of("normal") == "determinate_evidence");
  CHECK(verdict_of("chi2") == "determinate_evidence");
  CHECK(verdict_of("gamma") == "determinate_evidence");
  CHECK(verdict_of("lognormal") == "indeterminate_evidence");
  CHECK(verdict_of("abs_normal_power(3") == "determinate_evidence");
  CHECK(verdict_of("abs_normal_power(5") == "indeterminate_evidence");
}

TEST_CASE("reports are byte-identical across reruns") {
  auto cfg = determinacy_config();
  auto a = run_pipeline(cfg);
  auto b = run_pipeline(cfg);
  CHECK(a.body.dump() == b.body.dump());

  json sim{{"pipeline", "simulate"},
           {"seed", 42},
           {"simulate",
            {{"model", "linear"},
             {"p", 1},
             {"n_per_point", 50},
             {"atoms", json::array({{{"gamma", {0.5, 1.0}}, {"weight", 0.5}},
                                     {{"gamma", {-0.5, 2.0}}, {"weight", 0.5}}})},
             {"support", {{"points", json::array({{0.0}, {1.0}})}}}}}};
  auto s1 = run_pipeline(sim);
  auto s2 = run_pipeline(sim);
  REQUIRE(s1.files.size() == 1);
  CHECK(s1.files[0].second == s2.files[0].second);
  CHECK(s1.body.dump() == s2.body.dump());

  // a different seed changes the dataset
  sim["seed"] = 43;
  auto s3 = run_pipeline(sim);
  CHECK(s1.files[0].second != s3.files[0].second);
}

TEST_CASE("uniqueness pipeline emits witness and counting artifacts") {
  json cfg{{"pipeline", "uniqueness"},
           {"uniqueness",
            {{"support",
              {{"points", json::array({{-1.0, 1.0},
                                       {-0.5, 0.25},
                                       {0.2, 0.04},
                                       {0.5, 0.25},
                                       {0.8, 0.64},
                                       {1.0, 1.0},
                                       {1.5, 2.25},
                                       {2.0, 4.0}})}}},
             {"degree", 2},
             {"radii", {{"lo", 0.05}, {"hi", 10.0}, {"count", 12}}},
             {"growth", {{"kind", "e2"}}}}}};
  auto rep = run_pipeline(cfg);
  REQUIRE(rep.exit_code == 0);
  CHECK(rep.body["uniqueness"]["full_rank"] == false);
  CHECK(rep.body["uniqueness"].contains("witness"));
  bool have_profile = false;
  for (auto& [name, content] : rep.files)
    if (name == "counting_profile.csv") have_profile = true;
  CHECK(have_profile);
}

TEST_CASE("recover-linear pipeline reports ranks and residuals") {
  json cfg{{"pipeline", "recover-linear"},
           {"recover-linear",
            {{"p", 2},
             {"K", 3},
             {"atoms",
              json::array({{{"gamma", {0.5, 1.0, -0.5}}, {"weight", 0.5}},
                           {{"gamma", {-0.2, 0.4, 0.8}}, {"weight", 0.5}}})},
             {"support",
              {{"generator", "fan"}, {"slopes", {1, 2, 3, 4}}, {"budget", 20}}}}}};
  auto rep = run_pipeline(cfg);
  REQUIRE(rep.exit_code == 0);
  CHECK(rep.body["recovery"]["all_full_rank"] == true);
  CHECK(rep.body["recovery"]["max_relative_error_vs_atom_oracle"].get<double>() <
        1e-8);
}

TEST_CASE("counterexample pipeline from the parabola support") {
  json cfg{{"pipeline", "counterexample"},
           {"counterexample",
            {{"support",
              {{"points", json::array({{-1.0, 1.0},
                                       {-0.6, 0.36},
                                       {-0.2, 0.04},
                                       {0.2, 0.04},
                                       {0.6, 0.36},
                                       {1.0, 1.0},
                                       {1.4, 1.96},
                                       {1.8, 3.24},
                                       {2.2, 4.84},
                                       {2.6, 6.76}})}}},
             {"degree", 2}}}};
  auto rep = run_pipeline(cfg);
  REQUIRE(rep.exit_code == 0);
  CHECK(std::abs(rep.body["counterexample"]["integral_h"].get<double>()) < 1e-8);
  CHECK(rep.body["counterexample"]["tv_distance"].get<double>() >= 1e-2);
  CHECK(rep.body["counterexample"]["max_conditional_moment_diff"].get<double>() <
        1e-6);
}

TEST_CASE("pipeline failures map to exit codes") {
  // validation failure: fan without slopes
  json bad{{"pipeline", "uniqueness"},
           {"uniqueness", {{"support", {{"generator", "fan"}}}, {"degree", 2}}}};
  auto rep = run_pipeline(bad);
  CHECK(rep.exit_code == kExitValidation);

  // numerical failure: counterexample on a full-rank support
  json full{{"pipeline", "counterexample"},
            {"counterexample",
             {{"support",
               {{"points",
                 json::array({{0.0, 0.0}, {1.0, 0.2}, {2.0, 1.7}, {0.3, 2.0},
                              {1.2, 0.9}, {0.7, 1.4}})}}},
              {"degree", 1}}}};
  auto rep2 = run_pipeline(full);
  CHECK(rep2.exit_code == kExitNumerical);
}

TEST_CASE("emit_report writes canonical JSON and artifacts") {
  auto dir = std::filesystem::temp_directory_path() / "rcid_harness_test";
  std::filesystem::remove_all(dir);
  auto rep = run_pipeline(determinacy_config());
  auto path = emit_report(rep, dir.string());
  std::ifstream in(path);
  REQUIRE(in.good());
  json parsed;
  in >> parsed;
  CHECK(parsed["pipeline"] == "determinacy");
  CHECK(parsed["schema_version"] == 1);
  std::filesystem::remove_all(dir);
}

TEST_CASE("csv loading validates schema and rows") {
  auto dir = std::filesystem::temp_directory_path() / "rcid_csv_test";
  std::filesystem::create_directories(dir);
  {
    std::ofstream f(dir / "ok.csv");
    f << "order,value\n0,1.0\n1,0.5\n";
  }
  auto tab = load_dataset((dir / "ok.csv").string(), "moments");
  CHECK(tab.rows.size() == 2);
  {
    std::ofstream f(dir / "badheader.csv");
    f << "nope,value\n0,1\n";
  }
  CHECK_THROWS_AS(load_dataset((dir / "badheader.csv").string(), "moments"),
                  data_error);
  {
    std::ofstream f(dir / "badrow.csv");
    f << "order,value\n0,abc\n";
  }
  CHECK_THROWS_AS(load_dataset((dir / "badrow.csv").string(), "moments"),
                  data_error);
  {
    std::ofstream f(dir / "empty.csv");
    f << "order,value\n";
  }
  auto empty = load_dataset((dir / "empty.csv").string(), "moments");
  CHECK(empty.rows.empty());
  std::filesystem::remove_all(dir);
}

TEST_CASE("csv interface round trips") {
  auto dir = std::filesystem::temp_directory_path() / "rcid_iface_test";
  std::filesystem::create_directories(dir);

  // support set from CSV
  {
    std::ofstream f(dir / "pts.csv");
    f << "x1,x2\n0,0\n1,1\n2,4\n3,9\n1,2\n2,3\n3,1\n0.5,1.5\n";
  }
  // atoms from CSV
  {
    std::ofstream f(dir / "atoms.csv");
    f << "weight,g0,g1,g2\n0.5,0.5,1.0,-0.5\n0.5,-0.2,0.4,0.8\n";
  }
  json cfg{{"pipeline", "recover-linear"},
           {"recover-linear",
            {{"p", 2},
             {"K", 2},
             {"atoms", {{"csv", (dir / "atoms.csv").string()}}},
             {"support", {{"csv", (dir / "pts.csv").string()}}}}}};
  auto rep = run_pipeline(cfg);
  REQUIRE(rep.exit_code == 0);
  CHECK(rep.body["recovery"]["max_relative_error_vs_atom_oracle"].get<double>() <
        1e-8);

  // emitted conditional-moment CSV feeds back through table_csv
  std::string cm_csv;
  for (auto& [name, content] : rep.files)
    if (name == "conditional_moments.csv") cm_csv = content;
  REQUIRE(!cm_csv.empty());
  {
    std::ofstream f(dir / "table.csv");
    f << cm_csv;
  }
  auto cfg2 = cfg;
  cfg2["recover-linear"]["table_csv"] = (dir / "table.csv").string();
  auto rep2 = run_pipeline(cfg2);
  REQUIRE(rep2.exit_code == 0);
  CHECK(rep2.body["recovery"]["max_relative_error_vs_atom_oracle"].get<double>() <
        1e-8);

  // kotlarski from CF grid CSVs: write population grids, read them back
  {
    json kcfg{{"pipeline", "kotlarski"},
              {"kotlarski",
               {{"eps1", "uniform"},
                {"delta", "normal"},
                {"eps2", "normal"},
                {"t_max", 3.0},
                {"step", 0.02},
                {"omega", {-1.0, 1.0}}}}};
    auto krep = run_pipeline(kcfg);
    REQUIRE(krep.exit_code == 0);
    // reuse the emitted artifact format as input: build input grids
    auto write_cf = [&](const std::string& name,
                        const std::function<cpx(double)>& phi) {
      std::ofstream f(dir / name);
      f << "t,re,im\n";
      f.precision(17);
      for (int i = -150; i <= 150; ++i) {
        double t = 0.02 * i;
        f << t << "," << phi(t).real() << "," << phi(t).imag() << "\n";
      }
    };
    write_cf("y1.csv", [](double t) { return cf::normal(t) * cf::uniform(t); });
    write_cf("y2.csv", [](double t) { return cf::normal(t) * cf::normal(t); });
    write_cf("d21.csv",
             [](double t) { return cf::normal(t) * cf::uniform(-t); });
    json kcfg2{{"pipeline", "kotlarski"},
               {"kotlarski",
                {{"y1_csv", (dir / "y1.csv").string()},
                 {"y2_csv", (dir / "y2.csv").string()},
                 {"y2_minus_y1_csv", (dir / "d21.csv").string()},
                 {"omega", {-1.0, 1.0}}}}};
    auto krep2 = run_pipeline(kcfg2);
    REQUIRE(krep2.exit_code == 0);
    bool has_eps1 = false;
    for (auto& [name, content] : krep2.files)
      if (name == "phi_eps1.csv") has_eps1 = true;
    CHECK(has_eps1);
  }
  std::filesystem::remove_all(dir);
}
