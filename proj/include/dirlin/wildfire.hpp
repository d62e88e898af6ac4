#pragma once
// Fire-perimeter pipeline: ingest vertex rows, reduce each perimeter to its
// dominant axis and log burnt area, test orientation/size independence per
// watershed and on the pooled sample, and adjust the per-watershed p-values
// for multiplicity with the Benjamini-Yekutieli step-up.
//
// Input is one CSV row per perimeter vertex. Structural problems (bad
// header, unparsable numbers, duplicate vertex keys, a fire whose rows
// disagree about its area or watershed) raise SchemaError with the line
// number; fires that are merely unusable (fewer than 3 vertices,
// nonpositive area) are skipped and counted. Orientation degeneracies
// (perimeters with no preferred axis) are likewise counted, and watersheds
// are only tested once they keep a minimum number of usable fires.

#include <array>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"

#include "dirlin/bootstrap_bandwidths.hpp"
#include "dirlin/errors.hpp"
#include "dirlin/fdr.hpp"
#include "dirlin/independence.hpp"
#include "dirlin/orientation.hpp"
#include "dirlin/rng.hpp"
#include "dirlin/sample.hpp"

namespace dirlin {

struct FireRecord {
  std::string fire_id;
  std::string watershed_id;
  std::vector<std::array<double, 3>> vertices;  // lon, lat, alt (alt 0 when absent)
  bool has_alt = false;
  double burnt_area = 0.0;  // hectares
};

struct LoadResult {
  std::vector<FireRecord> fires;  // input order of first appearance
  std::size_t skipped_few_vertices = 0;
  std::size_t skipped_nonpositive_area = 0;
};

namespace detail {

inline std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  for (char c : line) {
    if (c == ',') {
      out.push_back(std::move(field));
      field.clear();
    } else if (c != '\r') {
      field.push_back(c);
    }
  }
  out.push_back(std::move(field));
  return out;
}

inline double parse_real(const std::string& field, long line_no, const char* what) {
  if (field.empty()) throw SchemaError(std::string("empty ") + what, line_no);
  std::size_t pos = 0;
  double value = 0.0;
  try {
    value = std::stod(field, &pos);
  } catch (const std::exception&) {
    throw SchemaError(std::string("cannot parse ") + what + " '" + field + "'", line_no);
  }
  if (pos != field.size() || !std::isfinite(value))
    throw SchemaError(std::string("cannot parse ") + what + " '" + field + "'", line_no);
  return value;
}

inline long parse_count(const std::string& field, long line_no, const char* what) {
  if (field.empty()) throw SchemaError(std::string("empty ") + what, line_no);
  std::size_t pos = 0;
  long value = 0;
  try {
    value = std::stol(field, &pos);
  } catch (const std::exception&) {
    throw SchemaError(std::string("cannot parse ") + what + " '" + field + "'", line_no);
  }
  if (pos != field.size() || value < 0)
    throw SchemaError(std::string("cannot parse ") + what + " '" + field + "'", line_no);
  return value;
}

}  // namespace detail

// Read the vertex CSV. The only supported format is "vertex-csv": header
// fire_id,watershed_id,vertex_index,lon,lat,alt,burnt_area_ha and one row
// per vertex, with alt left empty for 2-D perimeters.
inline LoadResult load_fires(const std::string& path,
                             const std::string& format = "vertex-csv") {
  if (format != "vertex-csv")
    throw DomainError("load_fires: unknown format '" + format + "'");
  std::ifstream in(path);
  if (!in) throw SchemaError("load_fires: cannot open '" + path + "'", 0);

  std::string line;
  if (!std::getline(in, line)) throw SchemaError("load_fires: empty file", 1);
  {
    const auto header = detail::split_fields(line);
    static const std::vector<std::string> expected{
        "fire_id", "watershed_id", "vertex_index", "lon", "lat", "alt", "burnt_area_ha"};
    if (header != expected)
      throw SchemaError("load_fires: header must be "
                        "fire_id,watershed_id,vertex_index,lon,lat,alt,burnt_area_ha",
                        1);
  }

  struct Building {
    FireRecord record;
    std::map<long, std::array<double, 3>> vertices;  // vertex_index -> coords
    bool alt_known = false;
  };
  std::vector<Building> building;
  std::map<std::string, std::size_t> index_of;

  long line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto f = detail::split_fields(line);
    if (f.size() != 7)
      throw SchemaError("load_fires: expected 7 columns, got " + std::to_string(f.size()),
                        line_no);
    const std::string& fire_id = f[0];
    const std::string& watershed_id = f[1];
    if (fire_id.empty()) throw SchemaError("load_fires: empty fire_id", line_no);
    if (watershed_id.empty()) throw SchemaError("load_fires: empty watershed_id", line_no);
    const long vidx = detail::parse_count(f[2], line_no, "vertex_index");
    const double lon = detail::parse_real(f[3], line_no, "lon");
    const double lat = detail::parse_real(f[4], line_no, "lat");
    const bool row_has_alt = !f[5].empty();
    const double alt = row_has_alt ? detail::parse_real(f[5], line_no, "alt") : 0.0;
    const double area = detail::parse_real(f[6], line_no, "burnt_area_ha");

    auto [it, inserted] = index_of.try_emplace(fire_id, building.size());
    if (inserted) {
      Building b;
      b.record.fire_id = fire_id;
      b.record.watershed_id = watershed_id;
      b.record.burnt_area = area;
      b.record.has_alt = row_has_alt;
      b.alt_known = true;
      building.push_back(std::move(b));
    }
    Building& b = building[it->second];
    if (b.record.watershed_id != watershed_id)
      throw SchemaError("load_fires: fire '" + fire_id + "' listed in two watersheds",
                        line_no);
    if (b.record.burnt_area != area)
      throw SchemaError("load_fires: inconsistent burnt_area_ha for fire '" + fire_id + "'",
                        line_no);
    if (b.record.has_alt != row_has_alt)
      throw SchemaError("load_fires: fire '" + fire_id + "' mixes rows with and without alt",
                        line_no);
    if (!b.vertices.emplace(vidx, std::array<double, 3>{lon, lat, alt}).second)
      throw SchemaError("load_fires: duplicate vertex_index " + std::to_string(vidx) +
                            " for fire '" + fire_id + "'",
                        line_no);
  }

  LoadResult result;
  for (auto& b : building) {
    if (b.vertices.size() < 3) {
      ++result.skipped_few_vertices;
      continue;
    }
    if (!(b.record.burnt_area > 0)) {
      ++result.skipped_nonpositive_area;
      continue;
    }
    b.record.vertices.reserve(b.vertices.size());
    for (const auto& [idx, v] : b.vertices) b.record.vertices.push_back(v);
    result.fires.push_back(std::move(b.record));
  }
  return result;
}

struct OrientationSample {
  DirLinSample sample;                          // encoded axes and log areas
  std::vector<std::size_t> fire_index;          // row -> index into the input fires
  std::vector<AxialOrientation> orientations;   // row-aligned
  std::size_t degenerate = 0;                   // fires without a preferred axis
};

inline OrientationSample build_orientation_sample(const std::vector<FireRecord>& fires,
                                                  int dims) {
  if (dims != 2 && dims != 3)
    throw DomainError("build_orientation_sample: dims must be 2 or 3");
  if (fires.empty()) throw DomainError("build_orientation_sample: no fires");
  OrientationSample out;
  for (std::size_t i = 0; i < fires.size(); ++i) {
    const FireRecord& fire = fires[i];
    if (dims == 3 && !fire.has_alt)
      throw DomainError("build_orientation_sample: fire '" + fire.fire_id +
                        "' has no altitude for a 3-D run");
    AxialOrientation orient;
    try {
      orient = pca_orientation(fire.vertices, dims);
    } catch (const DegenerateOrientation&) {
      ++out.degenerate;
      continue;
    }
    out.sample.x.push_back(encode_axial(orient));
    out.sample.z.push_back(std::log(fire.burnt_area));
    out.fire_index.push_back(i);
    out.orientations.push_back(orient);
  }
  if (out.sample.x.empty())
    throw DegenerateData("build_orientation_sample: every fire has a degenerate orientation");
  return out;
}

struct WatershedResult {
  std::string watershed_id;
  std::size_t n_fires = 0;  // usable fires entering the test
  std::optional<double> p_circular;
  std::optional<double> p_spherical;
  std::optional<double> adjusted_circular;
  std::optional<double> adjusted_spherical;
  bool rejected_circular = false;
  bool rejected_spherical = false;
};

struct WildfireAnalysis {
  int dims = 2;
  Selector selector = Selector::blcv;
  std::size_t B = 0;
  double alpha = 0.05;
  std::uint64_t seed = 0;
  std::size_t min_fires = 25;

  std::vector<WatershedResult> watersheds;  // ordered by watershed_id
  double global_p = 1.0;                    // pooled-sample test
  double combined_p = 1.0;                  // min BY-adjusted p
  std::vector<std::pair<std::string, std::size_t>> excluded_small;  // id, usable fires
  std::size_t degenerate_fires = 0;
  std::size_t fires_analyzed = 0;

  struct ScatterRow {
    std::string fire_id;
    std::string watershed_id;
    double phi = 0.0;
    double log_burnt_area = 0.0;
  };
  std::vector<ScatterRow> scatter;  // filled for 3-D runs
};

namespace detail {

constexpr std::uint64_t stream_wildfire = 0x77696c64'66697265ULL;
constexpr std::uint64_t wildfire_global_key = 0x676c6f62'616c0000ULL;

inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t hash = 1469598103934665603ULL;
  for (unsigned char c : s) {
    hash ^= c;
    hash *= 1099511628211ULL;
  }
  return hash;
}

}  // namespace detail

// Per-watershed and pooled independence tests between fire orientation and
// log burnt area. Watershed p-values are BY-adjusted; a watershed is
// rejected when its adjusted p is at most alpha. Each watershed's
// calibration stream is keyed by a hash of its id, so results do not depend
// on input order, and the whole analysis is reproducible from the seed.
inline WildfireAnalysis watershed_analysis(const std::vector<FireRecord>& fires, int dims,
                                           Selector selector, std::size_t B, double alpha,
                                           std::uint64_t seed, std::size_t min_fires = 25,
                                           unsigned workers = 1) {
  if (!(alpha > 0 && alpha < 1)) throw DomainError("watershed_analysis: alpha must be in (0,1)");
  if (B < 1) throw DomainError("watershed_analysis: B must be >= 1");
  const OrientationSample oriented = build_orientation_sample(fires, dims);

  WildfireAnalysis out;
  out.dims = dims;
  out.selector = selector;
  out.B = B;
  out.alpha = alpha;
  out.seed = seed;
  out.min_fires = min_fires;
  out.degenerate_fires = oriented.degenerate;
  out.fires_analyzed = oriented.sample.size();

  if (dims == 3) {
    out.scatter.reserve(oriented.sample.size());
    for (std::size_t row = 0; row < oriented.sample.size(); ++row) {
      const FireRecord& fire = fires[oriented.fire_index[row]];
      out.scatter.push_back({fire.fire_id, fire.watershed_id,
                             oriented.orientations[row].phi.value_or(0.0),
                             oriented.sample.z[row]});
    }
  }

  // Group rows by watershed, ordered by id.
  std::map<std::string, std::vector<std::size_t>> groups;
  for (std::size_t row = 0; row < oriented.sample.size(); ++row)
    groups[fires[oriented.fire_index[row]].watershed_id].push_back(row);

  TestOptions opts;
  opts.workers = workers;  // permutation scoring is order-independent, so this is safe
  std::vector<double> raw_p;
  for (const auto& [watershed_id, rows] : groups) {
    if (rows.size() < min_fires) {
      out.excluded_small.emplace_back(watershed_id, rows.size());
      continue;
    }
    DirLinSample sub;
    sub.x.reserve(rows.size());
    sub.z.reserve(rows.size());
    for (std::size_t row : rows) {
      sub.x.push_back(oriented.sample.x[row]);
      sub.z.push_back(oriented.sample.z[row]);
    }
    const std::uint64_t cal_seed =
        mix_keys(seed, {detail::stream_wildfire, detail::fnv1a64(watershed_id)});
    const TestReport report = selected_permutation_test(sub, selector, B, cal_seed, opts);

    WatershedResult w;
    w.watershed_id = watershed_id;
    w.n_fires = rows.size();
    if (dims == 2)
      w.p_circular = report.p_value;
    else
      w.p_spherical = report.p_value;
    out.watersheds.push_back(std::move(w));
    raw_p.push_back(report.p_value);
  }

  const std::vector<double> adjusted = by_adjust(raw_p);
  for (std::size_t i = 0; i < out.watersheds.size(); ++i) {
    WatershedResult& w = out.watersheds[i];
    if (dims == 2) {
      w.adjusted_circular = adjusted[i];
      w.rejected_circular = adjusted[i] <= alpha;
    } else {
      w.adjusted_spherical = adjusted[i];
      w.rejected_spherical = adjusted[i] <= alpha;
    }
    if (i == 0 || adjusted[i] < out.combined_p) out.combined_p = adjusted[i];
  }
  if (adjusted.empty()) out.combined_p = 1.0;

  const std::uint64_t global_seed =
      mix_keys(seed, {detail::stream_wildfire, detail::wildfire_global_key});
  out.global_p =
      selected_permutation_test(oriented.sample, selector, B, global_seed, opts).p_value;
  return out;
}

namespace detail {

inline std::string format_fixed6(double v) {
  char buffer[64];
  std::snprintf(buffer, sizeof buffer, "%.6f", v);
  return buffer;
}

}  // namespace detail

// Write watersheds.csv, pvalues.csv, manifest.json and (3-D runs)
// scatter.csv into out_dir. Numbers are fixed six-decimal, lines LF; a
// rerun with the same inputs and seed reproduces every file byte for byte.
inline void emit_reports(const WildfireAnalysis& analysis, const std::string& out_dir,
                         const LoadResult* load = nullptr) {
  const std::string base = out_dir.empty() ? std::string(".") : out_dir;
  auto open = [&](const char* name) {
    std::ofstream f(base + "/" + name, std::ios::binary);
    if (!f) throw SchemaError(std::string("emit_reports: cannot write ") + base + "/" + name, 0);
    return f;
  };

  {
    auto f = open("watersheds.csv");
    f << "watershed_id,n_fires,p_value,adjusted_p,rejected\n";
    for (const auto& w : analysis.watersheds) {
      const bool circular = analysis.dims == 2;
      const double p = circular ? *w.p_circular : *w.p_spherical;
      const double adj = circular ? *w.adjusted_circular : *w.adjusted_spherical;
      const bool rejected = circular ? w.rejected_circular : w.rejected_spherical;
      f << w.watershed_id << ',' << w.n_fires << ',' << detail::format_fixed6(p) << ','
        << detail::format_fixed6(adj) << ',' << (rejected ? "true" : "false") << '\n';
    }
  }
  {
    auto f = open("pvalues.csv");
    f << "watershed_id,p_value\n";
    for (const auto& w : analysis.watersheds) {
      const double p = analysis.dims == 2 ? *w.p_circular : *w.p_spherical;
      f << w.watershed_id << ',' << detail::format_fixed6(p) << '\n';
    }
  }
  if (analysis.dims == 3) {
    auto f = open("scatter.csv");
    f << "fire_id,watershed_id,phi,log_burnt_area\n";
    for (const auto& row : analysis.scatter)
      f << row.fire_id << ',' << row.watershed_id << ',' << detail::format_fixed6(row.phi)
        << ',' << detail::format_fixed6(row.log_burnt_area) << '\n';
  }
  {
    nlohmann::json manifest;
    manifest["config"] = {
        {"dims", analysis.dims},         {"selector", selector_name(analysis.selector)},
        {"B", analysis.B},               {"alpha", analysis.alpha},
        {"seed", analysis.seed},         {"min_fires", analysis.min_fires},
    };
    nlohmann::json small = nlohmann::json::array();
    for (const auto& [id, count] : analysis.excluded_small)
      small.push_back({{"watershed_id", id}, {"n_fires", count}});
    manifest["exclusions"] = {
        {"degenerate_orientation", analysis.degenerate_fires},
        {"small_watersheds", small},
    };
    if (load) {
      manifest["exclusions"]["skipped_few_vertices"] = load->skipped_few_vertices;
      manifest["exclusions"]["skipped_nonpositive_area"] = load->skipped_nonpositive_area;
    }
    manifest["results"] = {
        {"watersheds_tested", analysis.watersheds.size()},
        {"fires_analyzed", analysis.fires_analyzed},
        {"global_p", analysis.global_p},
        {"combined_p", analysis.combined_p},
    };
    auto f = open("manifest.json");
    f << manifest.dump(2) << '\n';
  }
}

}  // namespace dirlin
