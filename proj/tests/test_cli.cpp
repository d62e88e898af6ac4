// Drives the installed command line binary end to end. The binary path
// arrives via the DIRLIN_CLI_PATH compile definition so the suite always
// tests the artifact it was built with.

#include <catch2/catch_amalgamated.hpp>

#include <sys/wait.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "dirlin/rng.hpp"

#ifndef DIRLIN_CLI_PATH
#error "DIRLIN_CLI_PATH must point at the binary under test"
#endif

namespace {

namespace fs = std::filesystem;
using nlohmann::json;
constexpr double pi = std::numbers::pi;

fs::path work_dir() {
  const auto dir = fs::temp_directory_path() / "dirlin_cli_tests";
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

struct Run {
  int code = -1;
  std::string out;
  std::string err;
};

Run cli(const std::string& args) {
  const auto dir = work_dir();
  const auto out_path = dir / "stdout.txt";
  const auto err_path = dir / "stderr.txt";
  const std::string cmd = std::string(DIRLIN_CLI_PATH) + " " + args + " > " +
                          out_path.string() + " 2> " + err_path.string();
  const int rc = std::system(cmd.c_str());
  REQUIRE(rc != -1);
  Run r;
  r.code = WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
  r.out = slurp(out_path);
  r.err = slurp(err_path);
  return r;
}

std::string write_file(const char* name, const std::string& text) {
  const auto path = work_dir() / name;
  std::ofstream out(path, std::ios::binary);
  out << text;
  return path.string();
}

// Circular sample with a strong orientation/size link.
std::string circ_csv() {
  static const std::string path = [] {
    dirlin::Rng rng(42);
    std::string text = "theta,z\n";
    char row[80];
    for (int i = 0; i < 40; ++i) {
      const double theta = 2.0 * pi * rng.uniform();
      const double z = 1.5 * std::cos(2.0 * theta) + 0.4 * rng.normal();
      std::snprintf(row, sizeof row, "%.12f,%.12f\n", theta, z);
      text += row;
    }
    return write_file("circ.csv", text);
  }();
  return path;
}

std::string axial_csv() {
  static const std::string path = [] {
    dirlin::Rng rng(7);
    std::string text = "theta,phi,z\n";
    char row[96];
    for (int i = 0; i < 30; ++i) {
      const double theta = pi * rng.uniform();
      const double phi = 0.5 * pi * rng.uniform();
      const double z = std::sin(phi) * std::cos(theta) + 0.5 * rng.normal();
      std::snprintf(row, sizeof row, "%.12f,%.12f,%.12f\n", theta, phi, z);
      text += row;
    }
    return write_file("axial.csv", text);
  }();
  return path;
}

std::string vector3_csv() {
  static const std::string path = [] {
    dirlin::Rng rng(13);
    std::string text = "x1,x2,x3,z\n";
    char row[120];
    for (int i = 0; i < 24; ++i) {
      double c[3] = {rng.normal(), rng.normal(), rng.normal()};
      const double norm = std::sqrt(c[0] * c[0] + c[1] * c[1] + c[2] * c[2]);
      std::snprintf(row, sizeof row, "%.12f,%.12f,%.12f,%.12f\n", c[0] / norm,
                    c[1] / norm, c[2] / norm, rng.normal());
      text += row;
    }
    // One row a hair off the sphere: renormalized with a warning.
    text += "1.000005,0.0,0.0,0.25\n";
    return write_file("vector3.csv", text);
  }();
  return path;
}

std::string vector4_csv() {
  static const std::string path = [] {
    dirlin::Rng rng(19);
    std::string text = "x1,x2,x3,x4,z\n";
    char row[140];
    for (int i = 0; i < 12; ++i) {
      double c[4] = {rng.normal(), rng.normal(), rng.normal(), rng.normal()};
      const double norm =
          std::sqrt(c[0] * c[0] + c[1] * c[1] + c[2] * c[2] + c[3] * c[3]);
      std::snprintf(row, sizeof row, "%.12f,%.12f,%.12f,%.12f,%.12f\n", c[0] / norm,
                    c[1] / norm, c[2] / norm, c[3] / norm, rng.normal());
      text += row;
    }
    return write_file("vector4.csv", text);
  }();
  return path;
}

std::string fires_csv() {
  static const std::string path = [] {
    dirlin::Rng rng(23);
    std::string text = "fire_id,watershed_id,vertex_index,lon,lat,alt,burnt_area_ha\n";
    char row[160];
    int serial = 0;
    for (const char* ws : {"north", "south"}) {
      for (int i = 0; i < 18; ++i) {
        const double theta = pi * rng.uniform();
        const double area = std::exp(1.2 * std::cos(2.0 * theta) + 0.5 * rng.normal());
        const double cx = 3.0 * rng.normal(), cy = 3.0 * rng.normal();
        for (int k = 0; k < 12; ++k) {
          const double t = 2.0 * pi * k / 12;
          const double u = 2.0 * std::cos(t), v = 0.8 * std::sin(t);
          std::snprintf(row, sizeof row, "f%d,%s,%d,%.9f,%.9f,,%.9f\n", serial, ws, k,
                        cx + u * std::cos(theta) - v * std::sin(theta),
                        cy + u * std::sin(theta) + v * std::cos(theta), area);
          text += row;
        }
        ++serial;
      }
    }
    return write_file("fires.csv", text);
  }();
  return path;
}

}  // namespace

TEST_CASE("test subcommand reports JSON and repeats byte for byte", "[cli]") {
  const std::string base = "test " + circ_csv() + " --selector lcv --B 99 --seed 7";
  const Run r = cli(base);
  REQUIRE(r.code == 0);
  const json j = json::parse(r.out);
  CHECK(j["statistic"].is_number());
  CHECK(j["statistic"].get<double>() > 0.0);
  const double p = j["p_value"].get<double>();
  CHECK(p >= 0.0);
  CHECK(p <= 1.0);
  CHECK(std::abs(p * 99.0 - std::round(p * 99.0)) < 1e-9);
  CHECK(j["method"] == "permutation");
  CHECK(j["B"] == 99);
  CHECK(j["bandwidths"]["h"].get<double>() > 0.0);
  CHECK(j["bandwidths"]["g"].get<double>() > 0.0);
  CHECK(j["selector"] == "LCV");
  CHECK(j["seed"] == 7);
  CHECK(j["n"] == 40);
  CHECK(j["q"] == 1);
  CHECK(j["add_one"] == false);
  CHECK(j["input"] == circ_csv());
  CHECK(j["warnings"].is_array());

  CHECK(cli(base).out == r.out);
  CHECK(cli(base + " --workers 4").out == r.out);

  const Run r1 = cli(base + " --add-one");
  REQUIRE(r1.code == 0);
  const json j1 = json::parse(r1.out);
  CHECK(j1["add_one"] == true);
  const double p1 = j1["p_value"].get<double>();
  CHECK(p1 * 100.0 >= 1.0 - 1e-9);
  CHECK(std::abs(p1 * 100.0 - std::round(p1 * 100.0)) < 1e-9);
}

TEST_CASE("fixed bandwidths, baselines and the bootstrap route", "[cli]") {
  const Run fixed =
      cli("test " + circ_csv() + " --fixed-h 0.5 --fixed-g 0.4 --B 99 --seed 1");
  REQUIRE(fixed.code == 0);
  const json jf = json::parse(fixed.out);
  CHECK(jf["selector"] == "fixed");
  CHECK(jf["bandwidths"]["h"] == 0.5);
  CHECK(jf["bandwidths"]["g"] == 0.4);
  CHECK(jf["method"] == "permutation");

  const Run r2 = cli("test " + circ_csv() + " --method baseline-R2 --B 199 --seed 2");
  REQUIRE(r2.code == 0);
  const json j2 = json::parse(r2.out);
  CHECK(j2["method"] == "baseline-R2");
  CHECK(j2["bandwidths"].is_null());
  CHECK(j2["selector"] == "none");

  const Run u = cli("test " + circ_csv() + " --method u --B 199 --seed 2");
  REQUIRE(u.code == 0);
  CHECK(json::parse(u.out)["method"] == "baseline-U");

  const Run boot = cli("test " + axial_csv() + " --method bootstrap --B 29 --seed 4");
  REQUIRE(boot.code == 0);
  const json jb = json::parse(boot.out);
  CHECK(jb["method"] == "bootstrap");
  CHECK(jb["selector"] == "BO");
  CHECK(jb["q"] == 2);
  CHECK(jb["bandwidths"]["h"].get<double>() > 0.0);
}

TEST_CASE("unit vector layouts renormalize borderline rows", "[cli]") {
  const Run r = cli("test " + vector3_csv() + " --B 19 --seed 5");
  REQUIRE(r.code == 0);
  const json j = json::parse(r.out);
  CHECK(j["q"] == 2);
  CHECK(j["n"] == 25);
  bool renormalized = false;
  for (const auto& w : j["warnings"])
    if (w.get<std::string>().find("renormalized") != std::string::npos) renormalized = true;
  CHECK(renormalized);
}

TEST_CASE("bad inputs exit 2 with diagnostics", "[cli]") {
  CHECK(cli("test " + work_dir().string() + "/absent.csv").code == 2);

  const auto badnorm = write_file("badnorm.csv", "x1,x2,x3,z\n1.5,0.0,0.0,1.0\n");
  const Run bn = cli("test " + badnorm);
  CHECK(bn.code == 2);
  CHECK(bn.err.find("(line 2)") != std::string::npos);

  const auto badheader = write_file("badheader.csv", "a,b\n1,2\n");
  CHECK(cli("test " + badheader).code == 2);

  CHECK(cli("test " + circ_csv() + " --method nope").code == 2);
  CHECK(cli("test " + circ_csv() + " --selector nope").code == 2);
  CHECK(cli("test " + circ_csv() + " --B 0").code == 2);
  CHECK(cli("test " + axial_csv() + " --method baseline-U").code == 2);
  CHECK(cli("test " + vector4_csv() + " --method bootstrap").code == 2);
  CHECK(cli("test " + circ_csv() + " --fixed-h 0.5 --fixed-g 0.4 --method bootstrap").code == 2);
  CHECK(cli("test " + circ_csv() + " --fixed-h -1 --fixed-g 0.4").code == 2);

  const Run needs = cli("test " + circ_csv() + " --fixed-h 0.5");
  CHECK(needs.code == 2);
  CHECK(needs.err.find("Usage") != std::string::npos);

  const Run bare = cli("test");
  CHECK(bare.code == 2);
  CHECK(bare.err.find("Usage") != std::string::npos);

  CHECK(cli("").code == 2);
  CHECK(cli("frobnicate").code == 2);
}

TEST_CASE("numeric failures exit 3", "[cli]") {
  // The bootstrap objective needs a spherical product rule, which only
  // exists for q <= 2; on S^3 data the run phase fails numerically.
  const Run r = cli("test " + vector4_csv() + " --selector bo --B 9");
  CHECK(r.code == 3);
  CHECK(r.err.find("numeric failure") != std::string::npos);
  CHECK(cli("bandwidth " + vector4_csv() + " --selector bo").code == 3);
}

TEST_CASE("bandwidth subcommand reports selection and pilots", "[cli]") {
  const Run lcv = cli("bandwidth " + circ_csv() + " --selector lcv");
  REQUIRE(lcv.code == 0);
  const json jl = json::parse(lcv.out);
  CHECK(jl["selector"] == "LCV");
  CHECK(jl["h"].get<double>() > 0.0);
  CHECK(jl["g"].get<double>() > 0.0);
  CHECK(jl["pilots"].is_null());
  CHECK(jl["n"] == 40);
  CHECK(jl["q"] == 1);
  CHECK(cli("bandwidth " + circ_csv() + " --selector lcv").out == lcv.out);

  const Run bo = cli("bandwidth " + circ_csv() + " --selector bo");
  REQUIRE(bo.code == 0);
  const json jo = json::parse(bo.out);
  CHECK(jo["selector"] == "BO");
  for (const char* key : {"h_p", "g_p", "h_amise", "g_nr", "kappa_hat", "r_bar"})
    CHECK(jo["pilots"].contains(key));
  CHECK(jo["pilots"]["h_p"].get<double>() > 0.0);

  const Run blcv = cli("bandwidth " + circ_csv() + " --selector blcv");
  REQUIRE(blcv.code == 0);
  const json jb = json::parse(blcv.out);
  CHECK(jb["pilots"].contains("h_p"));
  CHECK(jb["pilots"].contains("g_p"));
  CHECK_FALSE(jb["pilots"].contains("h_amise"));

  CHECK(cli("bandwidth " + circ_csv() + " --selector fixed").code == 2);
}

TEST_CASE("simulate emits the study table", "[cli]") {
  const std::string base =
      "simulate --models 1 --deltas 0 0.6 --n 20 --M 4 --B 19 --methods T-LCV U --seed 3";
  const Run r = cli(base);
  REQUIRE(r.code == 0);

  std::istringstream lines(r.out);
  std::string line;
  REQUIRE(std::getline(lines, line));
  CHECK(line == "model,delta,q,n,method,rejections,M,proportion,se,seconds");
  std::vector<std::vector<std::string>> rows;
  while (std::getline(lines, line)) {
    std::vector<std::string> fields;
    std::istringstream ls(line);
    std::string field;
    while (std::getline(ls, field, ',')) fields.push_back(field);
    REQUIRE(fields.size() == 10);
    rows.push_back(fields);
  }
  REQUIRE(rows.size() == 4);
  for (const auto& f : rows) {
    CHECK(f[0] == "1");
    CHECK((f[1] == "0.00" || f[1] == "0.60"));
    CHECK(f[2] == "1");
    CHECK(f[3] == "20");
    CHECK((f[4] == "T-LCV" || f[4] == "U"));
    const double prop = std::stod(f[7]);
    CHECK(prop >= 0.0);
    CHECK(prop <= 1.0);
    CHECK(f[9] == "0.000000");
  }

  CHECK(cli(base + " --workers 2").out == r.out);

  const auto out_path = (work_dir() / "study.csv").string();
  const Run to_file = cli(base + " --output " + out_path);
  REQUIRE(to_file.code == 0);
  CHECK(to_file.out.empty());
  CHECK(slurp(out_path) == r.out);

  const Run preset =
      cli("simulate --preset table1-desk --M 1 --B 9 --n 10 --methods U --seed 1");
  REQUIRE(preset.code == 0);
  CHECK(std::count(preset.out.begin(), preset.out.end(), '\n') == 7);
  CHECK(preset.out.find("3,0.50,1,10,U,") != std::string::npos);

  CHECK(cli("simulate --models 9 --M 1 --B 1").code == 2);
  CHECK(cli("simulate --preset nope").code == 2);
  CHECK(cli("simulate --q 2 --methods R2 --M 1 --B 1").code == 2);
  CHECK(cli("simulate --M 0").code == 2);
}

TEST_CASE("wildfire pipeline writes reproducible reports", "[cli]") {
  const auto dir1 = (work_dir() / "wf1").string();
  const auto dir2 = (work_dir() / "wf2").string();
  std::filesystem::remove_all(dir1);
  std::filesystem::remove_all(dir2);

  const std::string base = "wildfire --input " + fires_csv() +
                           " --selector lcv --B 29 --alpha 0.05 --min-fires 15 --seed 9";
  const Run r = cli(base + " --out " + dir1);
  REQUIRE(r.code == 0);
  CHECK(r.out.find("watersheds tested: 2") != std::string::npos);
  CHECK(r.out.find("reports written to") != std::string::npos);

  const json manifest = json::parse(slurp(fs::path(dir1) / "manifest.json"));
  CHECK(manifest["config"]["dims"] == 2);
  CHECK(manifest["config"]["selector"] == "LCV");
  CHECK(manifest["config"]["B"] == 29);
  CHECK(manifest["config"]["seed"] == 9);
  CHECK(manifest["config"]["min_fires"] == 15);
  CHECK(manifest["results"]["watersheds_tested"] == 2);
  CHECK(manifest["results"]["fires_analyzed"] == 36);
  CHECK_FALSE(fs::exists(fs::path(dir1) / "scatter.csv"));

  const Run r2 = cli(base + " --workers 3 --out " + dir2);
  REQUIRE(r2.code == 0);
  for (const char* name : {"watersheds.csv", "pvalues.csv", "manifest.json"})
    CHECK(slurp(fs::path(dir1) / name) == slurp(fs::path(dir2) / name));

  CHECK(cli(base + " --dims 4").code == 2);
  CHECK(cli(base + " --alpha 1.5").code == 2);
  CHECK(cli(base + " --format geojson").code == 2);
  CHECK(cli(base + " --B 0").code == 2);
  CHECK(cli("wildfire --input " + work_dir().string() + "/absent.csv").code == 2);
}
