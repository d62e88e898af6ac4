// dirlin command line. Four subcommands:
//   test       independence test on a (direction, value) CSV, report as JSON
//   bandwidth  bandwidth selection only, report as JSON
//   simulate   rejection-rate study over the built-in models, report as CSV
//   wildfire   per-watershed fire orientation/size analysis, reports to a directory
//
// Exit codes: 0 success, 2 input or validation problem, 3 numeric failure.
// Every output is a pure function of the inputs and --seed; --workers only
// changes how the work is scheduled.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "dirlin/dirlin.hpp"

namespace {

using nlohmann::json;

dirlin::Selector parse_selector(const std::string& name) {
  std::string s;
  for (char c : name) s.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  if (s == "lcv") return dirlin::Selector::lcv;
  if (s == "lscv") return dirlin::Selector::lscv;
  if (s == "blcv") return dirlin::Selector::blcv;
  if (s == "blscv") return dirlin::Selector::blscv;
  if (s == "bo") return dirlin::Selector::bo;
  throw dirlin::DomainError("unknown selector '" + name +
                            "' (expected lcv, lscv, blcv, blscv, or bo)");
}

dirlin::TestMethod parse_test_method(const std::string& name) {
  std::string s;
  for (char c : name) s.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  if (s == "permutation") return dirlin::TestMethod::permutation;
  if (s == "bootstrap") return dirlin::TestMethod::bootstrap;
  if (s == "baseline-r2" || s == "r2") return dirlin::TestMethod::baseline_r2;
  if (s == "baseline-u" || s == "u") return dirlin::TestMethod::baseline_u;
  throw dirlin::DomainError("unknown method '" + name +
                            "' (expected permutation, bootstrap, baseline-R2, or baseline-U)");
}

// Input CSV for `test` and `bandwidth`. The header picks the layout:
//   theta,z             circular data, theta in radians
//   theta,phi,z         axial orientations on the sphere (theta in [0,pi),
//                       phi in [0,pi/2]); encoded by angle doubling
//   x1,...,xk,z         unit vectors in R^k, k >= 2
// Unit-vector rows off by more than 1e-6 are renormalized with a warning,
// and rejected past 1e-3.
struct InputSample {
  dirlin::DirLinSample sample;
  std::vector<std::string> warnings;
};

InputSample read_sample_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw dirlin::SchemaError("cannot open '" + path + "'", 0);
  std::string line;
  if (!std::getline(in, line)) throw dirlin::SchemaError("empty file", 1);
  const auto header = dirlin::detail::split_fields(line);

  enum class Layout { angle, axial, vector } layout;
  if (header == std::vector<std::string>{"theta", "z"}) {
    layout = Layout::angle;
  } else if (header == std::vector<std::string>{"theta", "phi", "z"}) {
    layout = Layout::axial;
  } else if (header.size() >= 3 && header.back() == "z") {
    layout = Layout::vector;
    for (std::size_t i = 0; i + 1 < header.size(); ++i)
      if (header[i] != "x" + std::to_string(i + 1))
        throw dirlin::SchemaError("header must be theta,z or theta,phi,z or x1,...,xk,z", 1);
  } else {
    throw dirlin::SchemaError("header must be theta,z or theta,phi,z or x1,...,xk,z", 1);
  }

  InputSample out;
  const std::size_t columns = header.size();
  long line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto f = dirlin::detail::split_fields(line);
    if (f.size() != columns)
      throw dirlin::SchemaError("expected " + std::to_string(columns) + " columns, got " +
                                    std::to_string(f.size()),
                                line_no);
    const double z = dirlin::detail::parse_real(f.back(), line_no, "z");
    switch (layout) {
      case Layout::angle: {
        const double theta = dirlin::detail::parse_real(f[0], line_no, "theta");
        out.sample.x.push_back(dirlin::circle_point(theta));
        break;
      }
      case Layout::axial: {
        const double theta = dirlin::detail::parse_real(f[0], line_no, "theta");
        const double phi = dirlin::detail::parse_real(f[1], line_no, "phi");
        if (phi < -1e-12 || phi > 0.5 * std::numbers::pi + 1e-12)
          throw dirlin::SchemaError("phi must lie in [0, pi/2]", line_no);
        out.sample.x.push_back(dirlin::encode_axial(
            dirlin::make_axial(dirlin::wrap_axial_angle(theta), phi)));
        break;
      }
      case Layout::vector: {
        std::vector<double> coords(columns - 1);
        for (std::size_t i = 0; i + 1 < columns; ++i)
          coords[i] = dirlin::detail::parse_real(f[i], line_no, header[i].c_str());
        const double deviation = std::abs(dirlin::norm(coords) - 1.0);
        if (deviation > 1e-3)
          throw dirlin::SchemaError("vector norm off unit by " + std::to_string(deviation),
                                    line_no);
        if (deviation > 1e-6)
          out.warnings.push_back("line " + std::to_string(line_no) +
                                 ": vector renormalized (norm off unit by " +
                                 std::to_string(deviation) + ")");
        out.sample.x.push_back(dirlin::normalized(coords));
        break;
      }
    }
    out.sample.z.push_back(z);
  }
  if (out.sample.x.empty()) throw dirlin::SchemaError("no data rows", line_no);
  return out;
}

json report_to_json(const dirlin::TestReport& report, const std::string& input, bool add_one) {
  json j;
  j["statistic"] = report.statistic;
  j["p_value"] = report.p_value;
  j["method"] = dirlin::method_name(report.method);
  j["B"] = report.B;
  if (report.bandwidths)
    j["bandwidths"] = {{"h", report.bandwidths->h}, {"g", report.bandwidths->g}};
  else
    j["bandwidths"] = nullptr;
  j["selector"] = dirlin::selector_name(report.selector);
  j["seed"] = report.seed;
  j["n"] = report.n;
  j["q"] = report.q;
  j["add_one"] = add_one;
  j["input"] = input;
  j["warnings"] = report.warnings;
  return j;
}

int data_error(const std::exception& e) {
  std::cerr << "error: " << e.what() << "\n";
  return 2;
}

int numeric_error(const std::exception& e) {
  std::cerr << "numeric failure: " << e.what() << "\n";
  return 3;
}

// Shared by the run phase of every subcommand: degenerate or malformed data
// keeps exit 2, anything numeric maps to 3.
template <typename Fn>
int run_phase(Fn&& fn) {
  try {
    return fn();
  } catch (const dirlin::SchemaError& e) {
    return data_error(e);
  } catch (const dirlin::DegenerateData& e) {
    return data_error(e);
  } catch (const dirlin::Error& e) {
    return numeric_error(e);
  }
}

struct TestArgs {
  std::string input;
  std::string method = "permutation";
  std::string selector = "lcv";
  std::size_t B = 1000;
  std::uint64_t seed = 0;
  unsigned workers = 1;
  bool add_one = false;
  double fixed_h = 0.0;
  double fixed_g = 0.0;
  bool has_fixed = false;
};

int cmd_test(const TestArgs& args) {
  dirlin::TestMethod method;
  dirlin::Selector selector;
  InputSample input;
  try {
    method = parse_test_method(args.method);
    selector = parse_selector(args.selector);
    if (args.B < 1) throw dirlin::DomainError("B must be >= 1");
    if (args.has_fixed) {
      if (method != dirlin::TestMethod::permutation)
        throw dirlin::DomainError("--fixed-h/--fixed-g apply to the permutation method only");
      if (!(args.fixed_h > 0) || !(args.fixed_g > 0))
        throw dirlin::DomainError("--fixed-h and --fixed-g must both be positive");
    }
    input = read_sample_csv(args.input);
    const bool baseline = method == dirlin::TestMethod::baseline_r2 ||
                          method == dirlin::TestMethod::baseline_u;
    if (baseline && input.sample.q() != 1)
      throw dirlin::DomainError("baseline methods need circular data (q = 1)");
    if (method == dirlin::TestMethod::bootstrap && input.sample.q() > 2)
      throw dirlin::DomainError("bootstrap method supports q = 1 or 2");
  } catch (const dirlin::Error& e) {
    return data_error(e);
  }

  return run_phase([&] {
    dirlin::TestOptions opts;
    opts.add_one = args.add_one;
    opts.workers = args.workers;
    dirlin::TestReport report;
    switch (method) {
      case dirlin::TestMethod::permutation:
        if (args.has_fixed)
          report = dirlin::permutation_test(input.sample, {args.fixed_h, args.fixed_g},
                                            args.B, args.seed, opts);
        else
          report = dirlin::selected_permutation_test(input.sample, selector, args.B,
                                                     args.seed, opts);
        break;
      case dirlin::TestMethod::bootstrap:
        report = dirlin::bootstrap_test(input.sample, args.B, args.seed, opts);
        break;
      case dirlin::TestMethod::baseline_r2:
      case dirlin::TestMethod::baseline_u: {
        std::vector<double> thetas(input.sample.size());
        for (std::size_t i = 0; i < thetas.size(); ++i)
          thetas[i] = dirlin::circle_angle(input.sample.x[i]);
        report = method == dirlin::TestMethod::baseline_r2
                     ? dirlin::baseline_r2(thetas, input.sample.z, args.B, args.seed, opts)
                     : dirlin::baseline_rank_u(thetas, input.sample.z, args.B, args.seed, opts);
        break;
      }
    }
    report.warnings.insert(report.warnings.begin(), input.warnings.begin(),
                           input.warnings.end());
    std::cout << report_to_json(report, args.input, args.add_one).dump(2) << "\n";
    return 0;
  });
}

struct BandwidthArgs {
  std::string input;
  std::string selector = "lcv";
  std::uint64_t seed = 0;
};

int cmd_bandwidth(const BandwidthArgs& args) {
  dirlin::Selector selector;
  InputSample input;
  try {
    selector = parse_selector(args.selector);
    input = read_sample_csv(args.input);
  } catch (const dirlin::Error& e) {
    return data_error(e);
  }

  return run_phase([&] {
    std::vector<std::string> warnings = input.warnings;
    dirlin::PilotBandwidths pilots;
    const bool pilot_based = selector == dirlin::Selector::blcv ||
                             selector == dirlin::Selector::blscv ||
                             selector == dirlin::Selector::bo;
    const dirlin::BandwidthPair bw =
        dirlin::select_bandwidths(input.sample, selector, &warnings,
                                  pilot_based ? &pilots : nullptr);
    json j;
    j["selector"] = dirlin::selector_name(selector);
    j["h"] = bw.h;
    j["g"] = bw.g;
    if (pilot_based) {
      j["pilots"] = {{"h_p", pilots.h_p}, {"g_p", pilots.g_p}};
      if (selector == dirlin::Selector::bo) {
        // Rule-of-thumb diagnostics exist only when the pilots came from it.
        j["pilots"]["h_amise"] = pilots.h_amise;
        j["pilots"]["g_nr"] = pilots.g_nr;
        j["pilots"]["kappa_hat"] = pilots.kappa_hat;
        j["pilots"]["r_bar"] = pilots.r_bar;
      }
    } else {
      j["pilots"] = nullptr;
    }
    j["n"] = input.sample.size();
    j["q"] = input.sample.q();
    j["seed"] = args.seed;
    j["input"] = args.input;
    j["warnings"] = warnings;
    std::cout << j.dump(2) << "\n";
    return 0;
  });
}

struct SimulateArgs {
  std::vector<int> models{1};
  std::vector<double> deltas{0.0};
  std::vector<std::size_t> ns{50};
  std::size_t M = 1000;
  std::size_t B = 1000;
  double alpha = 0.05;
  std::vector<std::string> methods{"T-LCV"};
  int q = 1;
  std::uint64_t seed = 0;
  unsigned workers = 1;
  bool add_one = false;
  bool timings = false;
  std::string preset;
  std::string output;
};

int cmd_simulate(const SimulateArgs& args, const CLI::App* sub) {
  dirlin::StudyConfig config;
  try {
    if (!args.preset.empty()) {
      if (args.preset != "table1-desk")
        throw dirlin::DomainError("unknown preset '" + args.preset + "'");
      config.models = {{1, 0.0}, {1, 0.25}, {1, 0.5}, {2, 0.5}, {3, 0.0}, {3, 0.5}};
      config.ns = {50, 100};
      config.M = 100;
      config.B = 199;
      config.methods = {dirlin::Method::t_lcv, dirlin::Method::r2, dirlin::Method::u};
      config.q = 1;
    }
    // Explicit flags override the preset.
    const bool preset = !args.preset.empty();
    if (!preset || sub->count("--models") || sub->count("--deltas")) {
      config.models.clear();
      for (int id : args.models)
        for (double delta : args.deltas) config.models.emplace_back(id, delta);
    }
    if (!preset || sub->count("--n")) config.ns = args.ns;
    if (!preset || sub->count("--M")) config.M = args.M;
    if (!preset || sub->count("--B")) config.B = args.B;
    if (!preset || sub->count("--methods")) {
      config.methods.clear();
      for (const std::string& m : args.methods) config.methods.push_back(dirlin::parse_method(m));
    }
    if (!preset || sub->count("--q")) config.q = args.q;
    config.alpha = args.alpha;
    config.seed = args.seed;
    config.workers = args.workers;
    config.add_one = args.add_one;
    config.timings = args.timings;
    // Surface bad model ids, q/method mismatches, and sizes as validation
    // failures here rather than mid-run.
    dirlin::detail::validate_study_config(config);
  } catch (const dirlin::Error& e) {
    return data_error(e);
  }

  return run_phase([&] {
    const dirlin::StudyResult result = dirlin::run_study(config);
    if (args.output.empty()) {
      dirlin::write_study_csv(result, std::cout);
    } else {
      std::ofstream out(args.output, std::ios::binary);
      if (!out) throw dirlin::SchemaError("cannot write '" + args.output + "'", 0);
      dirlin::write_study_csv(result, out);
    }
    if (result.total_failures > 0)
      std::cerr << "note: " << result.total_failures << " replicate(s) failed and were excluded\n";
    return 0;
  });
}

struct WildfireArgs {
  std::string input;
  std::string out_dir = ".";
  std::string format = "vertex-csv";
  int dims = 2;
  std::string selector = "blcv";
  std::size_t B = 1000;
  double alpha = 0.05;
  std::uint64_t seed = 0;
  std::size_t min_fires = 25;
  unsigned workers = 1;
};

int cmd_wildfire(const WildfireArgs& args) {
  dirlin::Selector selector;
  dirlin::LoadResult load;
  try {
    selector = parse_selector(args.selector);
    if (args.dims != 2 && args.dims != 3) throw dirlin::DomainError("--dims must be 2 or 3");
    if (!(args.alpha > 0 && args.alpha < 1))
      throw dirlin::DomainError("--alpha must be in (0,1)");
    if (args.B < 1) throw dirlin::DomainError("B must be >= 1");
    load = dirlin::load_fires(args.input, args.format);
  } catch (const dirlin::Error& e) {
    return data_error(e);
  }

  return run_phase([&] {
    const dirlin::WildfireAnalysis analysis =
        dirlin::watershed_analysis(load.fires, args.dims, selector, args.B, args.alpha,
                                   args.seed, args.min_fires, args.workers);
    std::filesystem::create_directories(args.out_dir);
    dirlin::emit_reports(analysis, args.out_dir, &load);
    char line[128];
    std::snprintf(line, sizeof line,
                  "watersheds tested: %zu, fires analyzed: %zu\n"
                  "global p: %.6f, combined p: %.6f\n",
                  analysis.watersheds.size(), analysis.fires_analyzed, analysis.global_p,
                  analysis.combined_p);
    std::cout << line << "reports written to " << args.out_dir << "\n";
    return 0;
  });
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Directional-linear independence testing"};
  app.require_subcommand(1);

  TestArgs test_args;
  CLI::App* test = app.add_subcommand("test", "Independence test on a CSV sample");
  test->add_option("input", test_args.input, "CSV with theta,z | theta,phi,z | x1..xk,z")
      ->required();
  test->add_option("--method", test_args.method,
                   "permutation | bootstrap | baseline-R2 | baseline-U");
  test->add_option("--selector", test_args.selector, "lcv | lscv | blcv | blscv | bo");
  test->add_option("--B", test_args.B, "Calibration resamples");
  test->add_option("--seed", test_args.seed, "RNG seed (default 0)");
  test->add_option("--workers", test_args.workers, "Calibration threads");
  test->add_flag("--add-one", test_args.add_one, "Report (count+1)/(B+1) p-values");
  CLI::Option* opt_h =
      test->add_option("--fixed-h", test_args.fixed_h, "Fixed directional bandwidth");
  test->add_option("--fixed-g", test_args.fixed_g, "Fixed linear bandwidth")->needs(opt_h);
  opt_h->needs(test->get_option("--fixed-g"));

  BandwidthArgs bw_args;
  CLI::App* bandwidth = app.add_subcommand("bandwidth", "Bandwidth selection only");
  bandwidth->add_option("input", bw_args.input, "CSV in any `test` layout")->required();
  bandwidth->add_option("--selector", bw_args.selector, "lcv | lscv | blcv | blscv | bo");
  bandwidth->add_option("--seed", bw_args.seed, "Recorded in the report (selection is deterministic)");

  SimulateArgs sim_args;
  CLI::App* simulate = app.add_subcommand("simulate", "Rejection-rate study over built-in models");
  simulate->add_option("--models", sim_args.models, "Model ids (1-6)");
  simulate->add_option("--deltas,--delta", sim_args.deltas, "Dependence levels");
  simulate->add_option("--n", sim_args.ns, "Sample sizes");
  simulate->add_option("--M", sim_args.M, "Replicates per scenario");
  simulate->add_option("--B", sim_args.B, "Calibration resamples");
  simulate->add_option("--alpha", sim_args.alpha, "Test level");
  simulate->add_option("--methods", sim_args.methods, "T-LCV | T-BLCV | T-boot | R2 | U");
  simulate->add_option("--q", sim_args.q, "Sphere dimension");
  simulate->add_option("--seed", sim_args.seed, "RNG seed (default 0)");
  simulate->add_option("--workers", sim_args.workers, "Replicate threads");
  simulate->add_flag("--add-one", sim_args.add_one, "Use (count+1)/(B+1) p-values");
  simulate->add_flag("--timings", sim_args.timings, "Fill the seconds column (not byte-reproducible)");
  simulate->add_option("--preset", sim_args.preset, "table1-desk: reduced standard grid");
  simulate->add_option("--output", sim_args.output, "CSV path (default stdout)");

  WildfireArgs wf_args;
  CLI::App* wildfire = app.add_subcommand("wildfire", "Watershed orientation/size analysis");
  wildfire->add_option("--input", wf_args.input, "Vertex CSV")->required();
  wildfire->add_option("--out", wf_args.out_dir, "Output directory (default .)");
  wildfire->add_option("--format", wf_args.format, "Input format (vertex-csv)");
  wildfire->add_option("--dims", wf_args.dims, "2: lon/lat axes, 3: with altitude");
  wildfire->add_option("--selector", wf_args.selector, "Bandwidth selector (default blcv)");
  wildfire->add_option("--B", wf_args.B, "Calibration resamples");
  wildfire->add_option("--alpha", wf_args.alpha, "FDR level");
  wildfire->add_option("--seed", wf_args.seed, "RNG seed (default 0)");
  wildfire->add_option("--min-fires", wf_args.min_fires, "Smallest watershed tested");
  wildfire->add_option("--workers", wf_args.workers, "Calibration threads");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n\n" << app.help() << "\n";
    return 2;
  }

  test_args.has_fixed = test->count("--fixed-h") > 0;
  if (test->parsed()) return cmd_test(test_args);
  if (bandwidth->parsed()) return cmd_bandwidth(bw_args);
  if (simulate->parsed()) return cmd_simulate(sim_args, simulate);
  if (wildfire->parsed()) return cmd_wildfire(wf_args);
  return 2;
}
