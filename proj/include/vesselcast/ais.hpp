#pragma once

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdint>
#include <ctime>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "vesselcast/common.hpp"
#include "vesselcast/geo.hpp"

namespace vesselcast::ais {

// One raw AIS report as received. SOG stays in knots until interpolation.
struct AisRecord {
  std::int64_t mmsi = 0;
  double timestamp = 0.0;  // UTC seconds
  geo::GeoPoint position;
  double sog_kn = 0.0;
  double cog_deg = 0.0;
  std::string ship_type;
};

struct Voyage {
  std::int64_t mmsi = 0;
  std::vector<AisRecord> records;  // time-ordered
};

// Canonical input columns. A schema map lets callers rename them; lookup is
// by header name, so column order never matters.
struct CsvSchema {
  std::string mmsi = "mmsi";
  std::string timestamp = "timestamp";
  std::string lat = "lat";
  std::string lon = "lon";
  std::string sog = "sog";
  std::string cog = "cog";
  std::string ship_type = "ship_type";
  char delimiter = ',';
};

namespace detail {

inline std::string lower_trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  std::string out(s.substr(b, e - b));
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

inline std::vector<std::string> split_line(const std::string& line, char delim) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= line.size(); ++i) {
    if (i == line.size() || line[i] == delim) {
      std::string f = line.substr(start, i - start);
      if (!f.empty() && f.back() == '\r') f.pop_back();
      fields.push_back(std::move(f));
      start = i + 1;
    }
  }
  return fields;
}

inline bool parse_double(std::string_view s, double& out) {
  const std::string t(s);
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(t.c_str(), &end);
  if (end == t.c_str() || errno == ERANGE) return false;
  while (*end != '\0') {
    if (!std::isspace(static_cast<unsigned char>(*end))) return false;
    ++end;
  }
  out = v;
  return std::isfinite(v);
}

// Accepts epoch seconds (possibly fractional) or ISO-8601 UTC
// (YYYY-MM-DD[T ]HH:MM:SS[.fff][Z]). Offsets other than Z are not AIS
// practice and are rejected.
inline std::optional<double> parse_timestamp(std::string_view raw) {
  const std::string s{raw};
  double epoch = 0.0;
  const bool looks_numeric =
      !s.empty() && s.find_first_not_of("0123456789+-.eE") == std::string::npos;
  if (looks_numeric && parse_double(s, epoch)) return epoch;

  std::tm tm{};
  double frac = 0.0;
  int y, mo, d, h, mi;
  double sec;
  char sep;
  std::istringstream is(s);
  is >> y;
  if (is.get() != '-') return std::nullopt;
  is >> mo;
  if (is.get() != '-') return std::nullopt;
  is >> d;
  sep = static_cast<char>(is.get());
  if (sep != 'T' && sep != ' ') return std::nullopt;
  is >> h;
  if (is.get() != ':') return std::nullopt;
  is >> mi;
  if (is.get() != ':') return std::nullopt;
  is >> sec;
  if (is.fail()) return std::nullopt;
  int trailing = is.get();
  if (trailing != EOF && trailing != 'Z') return std::nullopt;
  if (trailing == 'Z' && is.get() != EOF) return std::nullopt;

  tm.tm_year = y - 1900;
  tm.tm_mon = mo - 1;
  tm.tm_mday = d;
  tm.tm_hour = h;
  tm.tm_min = mi;
  tm.tm_sec = 0;
  frac = sec;
  const std::time_t base = timegm(&tm);
  if (base == static_cast<std::time_t>(-1)) return std::nullopt;
  return static_cast<double>(base) + frac;
}

}  // namespace detail

struct ParseResult {
  std::vector<AisRecord> records;
  std::size_t rows_skipped = 0;
};

// Parses a delimited AIS file with a header row. Malformed rows (bad numbers,
// out-of-range coordinates, unreadable timestamps) are counted and skipped;
// a missing mandatory column is a schema error.
inline ParseResult parse_ais_csv(const std::string& path,
                                 const CsvSchema& schema = {}) {
  std::ifstream in(path);
  if (!in) throw IoError("parse_ais_csv: cannot open " + path);

  std::string header;
  if (!std::getline(in, header))
    throw SchemaError("parse_ais_csv: empty file " + path);

  const auto cols = detail::split_line(header, schema.delimiter);
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < cols.size(); ++i)
    index[detail::lower_trim(cols[i])] = i;

  auto col = [&](const std::string& name, bool required) -> std::ptrdiff_t {
    auto it = index.find(detail::lower_trim(name));
    if (it == index.end()) {
      if (required)
        throw SchemaError("parse_ais_csv: missing column '" + name + "' in " + path);
      return -1;
    }
    return static_cast<std::ptrdiff_t>(it->second);
  };

  const auto c_mmsi = col(schema.mmsi, true);
  const auto c_ts = col(schema.timestamp, true);
  const auto c_lat = col(schema.lat, true);
  const auto c_lon = col(schema.lon, true);
  const auto c_sog = col(schema.sog, true);
  const auto c_cog = col(schema.cog, true);
  const auto c_type = col(schema.ship_type, false);

  ParseResult out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    const auto f = detail::split_line(line, schema.delimiter);
    const std::size_t need = static_cast<std::size_t>(
        std::max({c_mmsi, c_ts, c_lat, c_lon, c_sog, c_cog, c_type}));
    if (f.size() <= need) {
      ++out.rows_skipped;
      continue;
    }
    AisRecord r;
    double mmsi_val = 0.0;
    const auto ts = detail::parse_timestamp(f[static_cast<std::size_t>(c_ts)]);
    if (!detail::parse_double(f[static_cast<std::size_t>(c_mmsi)], mmsi_val) ||
        !ts ||
        !detail::parse_double(f[static_cast<std::size_t>(c_lat)], r.position.lat) ||
        !detail::parse_double(f[static_cast<std::size_t>(c_lon)], r.position.lon) ||
        !detail::parse_double(f[static_cast<std::size_t>(c_sog)], r.sog_kn) ||
        !detail::parse_double(f[static_cast<std::size_t>(c_cog)], r.cog_deg)) {
      ++out.rows_skipped;
      continue;
    }
    r.mmsi = static_cast<std::int64_t>(mmsi_val);
    r.timestamp = *ts;
    if (r.position.lat < -90.0 || r.position.lat > 90.0 ||
        r.position.lon < -360.0 || r.position.lon > 360.0 || r.sog_kn < 0.0) {
      ++out.rows_skipped;
      continue;
    }
    r.position.lon = geo::wrap_lon(r.position.lon);
    if (c_type >= 0) r.ship_type = f[static_cast<std::size_t>(c_type)];
    out.records.push_back(std::move(r));
  }
  return out;
}

// Groups records by MMSI into time-ordered voyages. Grouping preserves the
// input order of equal timestamps so the duplicate-timestamp rule is stable.
inline std::vector<Voyage> group_by_vessel(std::vector<AisRecord> records) {
  std::stable_sort(records.begin(), records.end(),
                   [](const AisRecord& a, const AisRecord& b) {
                     if (a.mmsi != b.mmsi) return a.mmsi < b.mmsi;
                     return a.timestamp < b.timestamp;
                   });
  std::vector<Voyage> voyages;
  for (auto& r : records) {
    if (voyages.empty() || voyages.back().mmsi != r.mmsi)
      voyages.push_back({r.mmsi, {}});
    voyages.back().records.push_back(std::move(r));
  }
  return voyages;
}

// ITU structural rule: nine digits, leading digit 2-7 (ship stations).
inline bool valid_mmsi(std::int64_t mmsi) {
  if (mmsi < 100000000 || mmsi > 999999999) return false;
  const int lead = static_cast<int>(mmsi / 100000000);
  return lead >= 2 && lead <= 7;
}

struct FilterConfig {
  double min_sog_kn = 0.5;
  std::size_t min_points = 300;
  bool check_mmsi = true;
};

enum class RejectReason { kNone, kInvalidMmsi, kTooShort };

struct FilterOutcome {
  RejectReason reject = RejectReason::kNone;
  Voyage voyage;  // valid only when reject == kNone
  std::size_t duplicates_dropped = 0;
  std::size_t low_sog_dropped = 0;

  bool accepted() const { return reject == RejectReason::kNone; }
};

inline const char* to_string(RejectReason r) {
  switch (r) {
    case RejectReason::kNone: return "none";
    case RejectReason::kInvalidMmsi: return "invalid-mmsi";
    case RejectReason::kTooShort: return "too-short";
  }
  return "unknown";
}

// Noise filtering: rejects invalid-MMSI voyages, drops duplicate timestamps
// (first occurrence wins, before any other rule), drops records below the
// SOG floor, wraps COG into [0, 360), and rejects voyages left with fewer
// than min_points records.
inline FilterOutcome filter_noise(const Voyage& voyage,
                                  const FilterConfig& cfg = {}) {
  FilterOutcome out;
  if (cfg.check_mmsi && !valid_mmsi(voyage.mmsi)) {
    out.reject = RejectReason::kInvalidMmsi;
    return out;
  }
  out.voyage.mmsi = voyage.mmsi;
  double last_ts = -std::numeric_limits<double>::infinity();
  for (const auto& r : voyage.records) {
    if (r.timestamp == last_ts) {
      ++out.duplicates_dropped;
      continue;
    }
    last_ts = r.timestamp;
    if (r.sog_kn < cfg.min_sog_kn) {
      ++out.low_sog_dropped;
      continue;
    }
    AisRecord kept = r;
    kept.cog_deg = geo::wrap_deg360(kept.cog_deg);
    out.voyage.records.push_back(std::move(kept));
  }
  if (out.voyage.records.size() < cfg.min_points) {
    out.reject = RejectReason::kTooShort;
    out.voyage.records.clear();
  }
  return out;
}

}  // namespace vesselcast::ais
