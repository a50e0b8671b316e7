#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "casimir/cli.hpp"
#include "casimir/lifshitz.hpp"
#include "casimir/material.hpp"

using nlohmann::json;

namespace {

struct RunOutcome {
  int code;
  std::string out, err;
};

RunOutcome run_cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = casimir::cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

int count_lines(const std::string& text) {
  int n = 0;
  for (char c : text)
    if (c == '\n') n++;
  return n;
}

}  // namespace

TEST_CASE("plane json output matches the library") {
  const RunOutcome r = run_cli({"plane", "--a", "0.5um"});
  REQUIRE(r.code == 0);
  const json doc = json::parse(r.out);
  CHECK(doc["subcommand"] == "plane");
  CHECK(doc["inputs"]["separation_m"] == 0.5e-6);
  const casimir::PlaneInteractionSplit s = casimir::plane_interaction(
      casimir::MaterialResponse::gold(), casimir::ThermalEnvironment(300.0), 0.5e-6);
  CHECK(doc["result"]["force_total_N_per_m2"].get<double>() == s.force_total());
  CHECK(doc["result"]["force_gradient_n0_N_per_m3"].get<double>() == s.force_gradient_n0);
  CHECK(doc["result"]["modes_used"].get<long>() == s.modes_used);
  CHECK(doc["provenance"]["temperature_K"] == 300.0);
  CHECK(doc["provenance"]["material"].get<std::string>().find("drude") != std::string::npos);
}

TEST_CASE("plane csv output is a single data row") {
  const RunOutcome r = run_cli({"plane", "--a", "200nm", "--format", "csv"});
  REQUIRE(r.code == 0);
  CHECK(count_lines(r.out) == 2);
  CHECK(r.out.rfind("separation_m,", 0) == 0);
}

TEST_CASE("material selection flags change the model") {
  const RunOutcome ideal = run_cli({"plane", "--a", "0.5um", "--material", "ideal"});
  const RunOutcome drude = run_cli({"plane", "--a", "0.5um"});
  REQUIRE(ideal.code == 0);
  REQUIRE(drude.code == 0);
  const double fi = json::parse(ideal.out)["result"]["force_total_N_per_m2"].get<double>();
  const double fd = json::parse(drude.out)["result"]["force_total_N_per_m2"].get<double>();
  CHECK(std::fabs(fi) > std::fabs(fd));

  const RunOutcome custom =
      run_cli({"plane", "--a", "0.5um", "--material", "drude", "--omega-p", "7.0"});
  const double fc = json::parse(custom.out)["result"]["force_total_N_per_m2"].get<double>();
  CHECK(std::fabs(fc) < std::fabs(fd));

  const RunOutcome tab = run_cli({"plane", "--a", "0.5um", "--material", "tabulated",
                                  "--eps-table", CASIMIR_DATA_DIR "/eps_example.csv"});
  REQUIRE(tab.code == 0);
  const double ft = json::parse(tab.out)["result"]["force_total_N_per_m2"].get<double>();
  CHECK(ft == doctest::Approx(fd).epsilon(1e-4));

  const RunOutcome missing = run_cli({"plane", "--a", "0.5um", "--material", "tabulated"});
  CHECK(missing.code == 2);
}

TEST_CASE("spheres reports the thermal fraction implied by the high-temperature limit") {
  const RunOutcome r = run_cli({"spheres", "--R1", "30um", "--R2", "inf", "--a", "8um"});
  REQUIRE(r.code == 0);
  const json doc = json::parse(r.out);
  const double total = doc["result"]["force_gradient_N_per_m"].get<double>();
  const double classical = doc["result"]["classical_n0_N_per_m"].get<double>();
  const double thermal = doc["result"]["thermal_npos_N_per_m"].get<double>();
  CHECK(total == doctest::Approx(classical + thermal).epsilon(1e-12));
  CHECK(total > 0.0);
  // documented high-temperature example: the n>0 remainder should be < 1e-4
  // of the total at 8 um; the exponential suppression has a polynomial
  // prefactor that only brings it below 1e-4 near 9 um
  CHECK(std::fabs(thermal / total) < 1e-4);
}

TEST_CASE("spheres warns when a radius is below ten thermal lengths") {
  const RunOutcome r = run_cli({"spheres", "--R1", "5um", "--R2", "inf", "--a", "0.4um"});
  REQUIRE(r.code == 0);
  CHECK(r.err.find("thermal lengths") != std::string::npos);
  const RunOutcome ok = run_cli({"spheres", "--R1", "30um", "--R2", "inf", "--a", "0.4um"});
  CHECK(ok.err.empty());
}

TEST_CASE("spheres accepts effective-radius geometry") {
  const RunOutcome a = run_cli({"spheres", "--Rtilde", "15um", "--u", "0.25", "--a", "0.4um"});
  const RunOutcome b = run_cli({"spheres", "--R1", "30um", "--R2", "30um", "--a", "0.4um"});
  REQUIRE(a.code == 0);
  REQUIRE(b.code == 0);
  CHECK(json::parse(a.out)["result"]["force_gradient_N_per_m"].get<double>() ==
        doctest::Approx(
            json::parse(b.out)["result"]["force_gradient_N_per_m"].get<double>())
            .epsilon(1e-12));
  const RunOutcome mixed =
      run_cli({"spheres", "--R1", "30um", "--Rtilde", "15um", "--a", "0.4um"});
  CHECK(mixed.code == 2);
}

TEST_CASE("classical subcommand emits the closed-form diagnostics") {
  const RunOutcome r =
      run_cli({"classical", "--R1", "20um", "--R2", "20um", "--a", "10um", "--format", "json"});
  REQUIRE(r.code == 0);
  const json doc = json::parse(r.out);
  CHECK(doc["inputs"]["x"].get<double>() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(doc["inputs"]["z_parameter"].get<double>() == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(doc["result"]["force_N"].get<double>() < 0.0);
  CHECK(doc["result"]["force_gradient_N_per_m"].get<double>() > 0.0);
  CHECK(doc["result"]["terms"].get<long>() > 0);
}

TEST_CASE("coeffs inside the grids returns table and computed values") {
  const RunOutcome r = run_cli({"coeffs", "--a", "0.3um"});
  REQUIRE(r.code == 0);
  const json doc = json::parse(r.out);
  CHECK(doc["result"]["theta_tilde"].get<double>() == 0.454);
  CHECK(doc["result"]["kappa"].get<double>() == 0.319);
  CHECK(doc["result"]["theta_hat"].get<double>() == 0.419);
  CHECK(doc["result"]["kappa_hat"].get<double>() == 0.298);
  CHECK(doc["result"]["kappa_provenance"] == "table");
  CHECK(doc["result"]["kappa_computed_from_lifshitz"].get<double>() ==
        doctest::Approx(0.319).epsilon(0.05));
  CHECK(doc["result"]["hat_from_conversion"]["theta_hat"].get<double>() ==
        doctest::Approx(0.419).epsilon(0.02));
}

TEST_CASE("coeffs outside the primary grid is a usage error") {
  const RunOutcome r = run_cli({"coeffs", "--a", "3um"});
  CHECK(r.code == 2);
  CHECK(r.err.find("grid") != std::string::npos);
  CHECK(r.out.empty());
}

TEST_CASE("coeffs outside only the hat grid reports null hat entries") {
  const RunOutcome r = run_cli({"coeffs", "--a", "1um"});
  REQUIRE(r.code == 0);
  const json doc = json::parse(r.out);
  CHECK(doc["result"]["theta_hat"].is_null());
  CHECK(doc["result"]["kappa_hat"].is_null());
  CHECK(doc["result"]["theta_tilde"].get<double>() == 0.332);
}

TEST_CASE("deviation u-sweep emits eleven csv rows") {
  const RunOutcome r = run_cli({"deviation", "--u-sweep", "--a", "0.4um", "--Rtilde", "30um"});
  REQUIRE(r.code == 0);
  CHECK(count_lines(r.out) == 12);
  std::istringstream lines(r.out);
  std::string header;
  std::getline(lines, header);
  CHECK(header.rfind("a_um,u,Rtilde_um,", 0) == 0);
  double prev_metric = 0.0;
  std::string row;
  int i = 0;
  while (std::getline(lines, row)) {
    double a_um, u, rt_um, grad, pfa, metric, beta;
    REQUIRE(std::sscanf(row.c_str(), "%lf,%lf,%lf,%lf,%lf,%lf,%lf", &a_um, &u, &rt_um, &grad,
                        &pfa, &metric, &beta) == 7);
    CHECK(a_um == doctest::Approx(0.4).epsilon(1e-9));
    CHECK(u == doctest::Approx(0.025 * i).epsilon(1e-9));
    CHECK(grad > 0.0);
    CHECK(metric < 0.0);
    if (i > 0) CHECK(metric < prev_metric);  // more deviation as u grows
    prev_metric = metric;
    // the linear prediction from the hat table should sit close to the metric
    CHECK(metric == doctest::Approx(beta).epsilon(2e-3));
    i++;
  }
  CHECK(i == 11);
}

TEST_CASE("deviation a-sweep spans the requested grid") {
  const RunOutcome r = run_cli({"deviation", "--a-sweep", "--a-min", "0.2um", "--a-max",
                                "0.4um", "--a-count", "5", "--R1", "30um", "--R2", "inf"});
  REQUIRE(r.code == 0);
  CHECK(count_lines(r.out) == 6);
  const RunOutcome bad = run_cli({"deviation", "--a-sweep", "--a-min", "0.4um", "--a-max",
                                  "0.2um", "--R1", "30um"});
  CHECK(bad.code == 2);
  const RunOutcome neither = run_cli({"deviation", "--R1", "30um", "--a", "0.4um"});
  CHECK(neither.code == 2);
}

TEST_CASE("config file supplies defaults and flags still win") {
  const char* path = "/tmp/casimir_cli_config.json";
  {
    std::ofstream f(path);
    f << R"({"a": "0.5um", "temperature": 350, "term-tol": 1e-9})";
  }
  const RunOutcome from_config = run_cli({"plane", "--config", path});
  REQUIRE(from_config.code == 0);
  const json doc = json::parse(from_config.out);
  CHECK(doc["inputs"]["separation_m"] == 0.5e-6);
  CHECK(doc["provenance"]["temperature_K"] == 350.0);
  CHECK(doc["provenance"]["tolerances"]["relative_term_tolerance"] == 1e-9);

  const RunOutcome overridden = run_cli({"plane", "--config", path, "--a", "0.25um"});
  REQUIRE(overridden.code == 0);
  CHECK(json::parse(overridden.out)["inputs"]["separation_m"] == 0.25e-6);
  CHECK(json::parse(overridden.out)["provenance"]["temperature_K"] == 350.0);
  std::remove(path);
}

TEST_CASE("config validation failures are usage errors") {
  const char* path = "/tmp/casimir_cli_config_bad.json";
  {
    std::ofstream f(path);
    f << R"({"not-a-real-option": 1})";
  }
  const RunOutcome unknown = run_cli({"plane", "--config", path, "--a", "0.5um"});
  CHECK(unknown.code == 2);
  CHECK(unknown.err.find("not-a-real-option") != std::string::npos);
  {
    std::ofstream f(path);
    f << "{ definitely not json";
  }
  CHECK(run_cli({"plane", "--config", path, "--a", "0.5um"}).code == 2);
  CHECK(run_cli({"plane", "--a", "0.5um", "--config", "/tmp/missing_config.json"}).code == 2);
  CHECK(run_cli({"--config", path}).code == 2);
  std::remove(path);
}

TEST_CASE("length parsing demands explicit units") {
  CHECK(run_cli({"plane", "--a", "500"}).code == 2);
  CHECK(run_cli({"plane", "--a", "500xyz"}).code == 2);
  CHECK(run_cli({"plane", "--a", "-3um"}).code == 2);
  CHECK(run_cli({"plane", "--a", "1e-7m"}).code == 0);
  // 100 nm and 0.1 um differ by one ulp after unit conversion, so compare softly
  const RunOutcome nm = run_cli({"plane", "--a", "100nm"});
  const RunOutcome um = run_cli({"plane", "--a", "0.1um"});
  CHECK(json::parse(nm.out)["result"]["force_total_N_per_m2"].get<double>() ==
        doctest::Approx(json::parse(um.out)["result"]["force_total_N_per_m2"].get<double>())
            .epsilon(1e-9));
}

TEST_CASE("usage errors and numeric failures use distinct exit codes") {
  CHECK(run_cli({}).code == 2);
  CHECK(run_cli({"plane"}).code == 2);                   // missing --a
  CHECK(run_cli({"warp", "--a", "1um"}).code == 2);      // unknown subcommand
  CHECK(run_cli({"plane", "--a", "1um", "--material", "unobtanium"}).code == 2);
  const RunOutcome numeric =
      run_cli({"plane", "--a", "0.1um", "--max-modes", "3"});
  CHECK(numeric.code == 3);
  CHECK(numeric.err.find("numeric error") != std::string::npos);
}

TEST_CASE("help is printed on request with a zero exit") {
  const RunOutcome top = run_cli({"--help"});
  CHECK(top.code == 0);
  CHECK(top.out.find("plane") != std::string::npos);
  CHECK(top.out.find("spheres") != std::string::npos);
  CHECK(top.out.find("fit") != std::string::npos);
  const RunOutcome sub = run_cli({"plane", "--help"});
  CHECK(sub.code == 0);
  CHECK(sub.out.find("--a") != std::string::npos);
}

TEST_CASE("output file redirection") {
  const char* path = "/tmp/casimir_cli_out.json";
  const RunOutcome r = run_cli({"plane", "--a", "0.5um", "--output", path});
  REQUIRE(r.code == 0);
  CHECK(r.out.empty());
  std::ifstream f(path);
  REQUIRE(f.good());
  const json doc = json::parse(f);
  CHECK(doc["subcommand"] == "plane");
  std::remove(path);
}

TEST_CASE("fit subcommand synthesizes, fits, and exports deterministically") {
  const char* path = "/tmp/casimir_cli_fit_ds.csv";
  const RunOutcome r = run_cli({"fit", "--fit-a", "102.4nm", "--noise", "0.5", "--seed", "9",
                                "--emit-dataset", path});
  REQUIRE(r.code == 0);
  const json doc = json::parse(r.out);
  CHECK(doc["dataset"]["records"] == 312);
  CHECK(doc["dataset"]["source"] == "synthesized");
  CHECK(doc["fits"].contains("one_parameter"));
  CHECK(doc["fits"].contains("two_parameter"));
  CHECK(doc["fits"]["two_parameter"]["coefficients"][0]["name"] == "theta_hat");
  CHECK(doc["fits"]["two_parameter"]["n_records"] == 12);
  CHECK(doc["provenance"]["seed"] == 9);

  const RunOutcome again = run_cli({"fit", "--fit-a", "102.4nm", "--noise", "0.5", "--seed",
                                    "9", "--emit-dataset", path});
  CHECK(again.out == r.out);  // bytewise deterministic for a fixed seed

  // round-trip: the emitted dataset reloads and fits identically
  const RunOutcome reload =
      run_cli({"fit", "--dataset", path, "--fit-a", "102.4nm", "--model", "two"});
  REQUIRE(reload.code == 0);
  const json redoc = json::parse(reload.out);
  CHECK(redoc["dataset"]["source"] == path);
  CHECK(redoc["fits"]["two_parameter"]["coefficients"][0]["estimate"] ==
        doc["fits"]["two_parameter"]["coefficients"][0]["estimate"]);
  CHECK_FALSE(redoc["fits"].contains("one_parameter"));
  std::remove(path);
}

TEST_CASE("fit usage and failure modes") {
  // no --fit-a and no --emit-dataset: nothing to do
  CHECK(run_cli({"fit"}).code == 2);
  // off-grid separation: no records there
  CHECK(run_cli({"fit", "--fit-a", "100nm"}).code == 3);
  CHECK(run_cli({"fit", "--fit-a", "100nm"}).err.find("fit error") != std::string::npos);
}

TEST_CASE("repeated flags take the last value") {
  const RunOutcome r = run_cli({"plane", "--a", "0.3um", "--a", "0.5um"});
  REQUIRE(r.code == 0);
  CHECK(json::parse(r.out)["inputs"]["separation_m"] == 0.5e-6);
}

TEST_CASE("thread override is accepted") {
  const RunOutcome r = run_cli({"plane", "--a", "0.5um", "--threads", "2"});
  CHECK(r.code == 0);
}

TEST_CASE("custom coefficient tables are accepted only as a checksummed pair") {
  const RunOutcome both =
      run_cli({"coeffs", "--a", "0.3um", "--table1", CASIMIR_DATA_DIR "/table1_coefficients.csv",
               "--table2", CASIMIR_DATA_DIR "/table2_coefficients.csv"});
  REQUIRE(both.code == 0);
  CHECK(json::parse(both.out)["result"]["theta_tilde"].get<double>() == 0.454);
  const RunOutcome lone = run_cli(
      {"coeffs", "--a", "0.3um", "--table1", CASIMIR_DATA_DIR "/table1_coefficients.csv"});
  CHECK(lone.code == 2);
}
