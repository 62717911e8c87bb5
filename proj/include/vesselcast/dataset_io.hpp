#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "vesselcast/common.hpp"
#include "vesselcast/trajectory.hpp"

namespace vesselcast::dataset_io {

static_assert(std::endian::native == std::endian::little,
              "segment files are little-endian float64");

inline constexpr int kSchemaVersion = 1;
inline constexpr int kFieldsPerRow = 10;  // t + 9 features

namespace detail {

inline void write_rows(std::ofstream& out, const TrajectorySegment& seg) {
  std::vector<double> row(kFieldsPerRow);
  for (const auto& p : seg.points) {
    row = {p.t, p.x, p.y, p.v, p.psi, p.a, p.psi_dot, p.j, p.beta, p.beta_dot};
    out.write(reinterpret_cast<const char*>(row.data()),
              static_cast<std::streamsize>(row.size() * sizeof(double)));
  }
}

inline std::string segment_file_name(std::size_t id) {
  std::ostringstream os;
  os << "seg_" << std::setw(6) << std::setfill('0') << id << ".bin";
  return os.str();
}

}  // namespace detail

// Writes one binary file per segment plus manifest.json. Rows are
// little-endian float64: t, lon, lat, sog, cog, acc, cog_rate, jerk,
// bearing, bearing_rate. Output bytes depend only on the dataset contents.
inline void save_dataset(const Dataset& ds, const std::string& dir,
                         const nlohmann::json& provenance = {}) {
  namespace fs = std::filesystem;
  fs::create_directories(fs::path(dir) / "segments");

  nlohmann::json manifest;
  manifest["schema_version"] = kSchemaVersion;
  manifest["interval_s"] = ds.interval_s;
  manifest["fields"] = {"t", "lon", "lat", "sog", "cog", "acc",
                        "cog_rate", "jerk", "bearing", "bearing_rate"};
  manifest["counts"] = {{"segments", ds.segments.size()},
                        {"points", ds.total_points()}};
  if (!provenance.is_null() && !provenance.empty())
    manifest["provenance"] = provenance;

  nlohmann::json entries = nlohmann::json::array();
  for (std::size_t i = 0; i < ds.segments.size(); ++i) {
    const auto& seg = ds.segments[i];
    const std::string name = detail::segment_file_name(i);
    std::ofstream bin(fs::path(dir) / "segments" / name, std::ios::binary);
    if (!bin) throw IoError("save_dataset: cannot write segment " + name);
    detail::write_rows(bin, seg);
    entries.push_back({{"id", i},
                       {"file", "segments/" + name},
                       {"mmsi", seg.mmsi},
                       {"n_points", seg.points.size()},
                       {"t_start", seg.t_start()},
                       {"t_end", seg.t_end()}});
  }
  manifest["segments"] = std::move(entries);

  std::ofstream mf(fs::path(dir) / "manifest.json");
  if (!mf) throw IoError("save_dataset: cannot write manifest in " + dir);
  mf << manifest.dump(2) << "\n";
}

inline Dataset load_dataset(const std::string& dir) {
  namespace fs = std::filesystem;
  std::ifstream mf(fs::path(dir) / "manifest.json");
  if (!mf) throw IoError("load_dataset: no manifest.json in " + dir);
  nlohmann::json manifest;
  try {
    mf >> manifest;
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("load_dataset: bad manifest: ") + e.what());
  }
  if (manifest.value("schema_version", -1) != kSchemaVersion)
    throw SchemaError("load_dataset: unsupported schema version");

  Dataset ds;
  ds.interval_s = manifest.at("interval_s").get<double>();
  for (const auto& entry : manifest.at("segments")) {
    TrajectorySegment seg;
    seg.mmsi = entry.at("mmsi").get<std::int64_t>();
    seg.interval_s = ds.interval_s;
    const std::size_t n = entry.at("n_points").get<std::size_t>();
    const std::string file = entry.at("file").get<std::string>();
    std::ifstream bin(fs::path(dir) / file, std::ios::binary);
    if (!bin) throw IoError("load_dataset: missing segment file " + file);
    std::vector<double> row(kFieldsPerRow);
    seg.points.reserve(n);
    for (std::size_t k = 0; k < n; ++k) {
      bin.read(reinterpret_cast<char*>(row.data()),
               static_cast<std::streamsize>(row.size() * sizeof(double)));
      if (!bin) throw IoError("load_dataset: truncated segment file " + file);
      TrajectoryPoint p;
      p.t = row[0];
      p.x = row[1];
      p.y = row[2];
      p.v = row[3];
      p.psi = row[4];
      p.a = row[5];
      p.psi_dot = row[6];
      p.j = row[7];
      p.beta = row[8];
      p.beta_dot = row[9];
      seg.points.push_back(p);
    }
    ds.segments.push_back(std::move(seg));
  }
  return ds;
}

}  // namespace vesselcast::dataset_io
