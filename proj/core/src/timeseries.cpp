#include "srdetect/timeseries.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace srdetect {

int64_t granularity_seconds(Granularity g) {
  switch (g) {
    case Granularity::Minute: return 60;
    case Granularity::Hour: return 3600;
    case Granularity::Day: return 86400;
  }
  throw std::invalid_argument("unknown granularity");
}

Granularity granularity_from_string(const std::string& s) {
  if (s == "minute") return Granularity::Minute;
  if (s == "hour") return Granularity::Hour;
  if (s == "day") return Granularity::Day;
  throw std::invalid_argument("unknown granularity: " + s);
}

std::string to_string(Granularity g) {
  switch (g) {
    case Granularity::Minute: return "minute";
    case Granularity::Hour: return "hour";
    case Granularity::Day: return "day";
  }
  return "?";
}

std::size_t default_window(Granularity g) {
  switch (g) {
    case Granularity::Minute: return 1440;
    case Granularity::Hour: return 64;
    case Granularity::Day: return 30;
  }
  return 64;
}

std::size_t default_delay(Granularity g) {
  switch (g) {
    case Granularity::Minute: return 7;
    case Granularity::Hour: return 3;
    case Granularity::Day: return 1;
  }
  return 3;
}

SeriesClass series_class_from_string(const std::string& s) {
  if (s == "seasonal") return SeriesClass::Seasonal;
  if (s == "stable") return SeriesClass::Stable;
  if (s == "unstable") return SeriesClass::Unstable;
  throw std::invalid_argument("unknown series class: " + s);
}

std::string to_string(SeriesClass c) {
  switch (c) {
    case SeriesClass::Seasonal: return "seasonal";
    case SeriesClass::Stable: return "stable";
    case SeriesClass::Unstable: return "unstable";
  }
  return "?";
}

bool TimeSeries::labeled() const {
  return !points.empty() &&
         std::all_of(points.begin(), points.end(),
                     [](const TimeSeriesPoint& p) { return p.label.has_value(); });
}

std::vector<double> TimeSeries::values() const {
  std::vector<double> v;
  v.reserve(points.size());
  for (const auto& p : points) v.push_back(p.value);
  return v;
}

TimeSeries finalize_series(std::string id, Granularity g, std::vector<TimeSeriesPoint> pts) {
  const int64_t step = granularity_seconds(g);
  std::stable_sort(pts.begin(), pts.end(),
                   [](const TimeSeriesPoint& a, const TimeSeriesPoint& b) {
                     return a.timestamp < b.timestamp;
                   });
  for (const auto& p : pts) {
    if (!std::isfinite(p.value))
      throw std::invalid_argument("non-finite value at timestamp " +
                                  std::to_string(p.timestamp));
  }
  for (std::size_t i = 1; i < pts.size(); ++i) {
    if (pts[i].timestamp == pts[i - 1].timestamp)
      throw std::invalid_argument("duplicate timestamp " + std::to_string(pts[i].timestamp));
    if ((pts[i].timestamp - pts[i - 1].timestamp) % step != 0)
      throw std::invalid_argument("timestamp " + std::to_string(pts[i].timestamp) +
                                  " not aligned to " + to_string(g) + " granularity");
  }

  TimeSeries out;
  out.id = std::move(id);
  out.granularity = g;
  out.points.reserve(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (i > 0) {
      const auto& prev = out.points.back();
      int64_t gap = (pts[i].timestamp - prev.timestamp) / step;
      double prev_v = prev.value;
      int64_t prev_t = prev.timestamp;
      for (int64_t j = 1; j < gap; ++j) {
        TimeSeriesPoint fill;
        fill.timestamp = prev_t + j * step;
        fill.value = prev_v + (pts[i].value - prev_v) * static_cast<double>(j) /
                                  static_cast<double>(gap);
        fill.label = pts[i].label.has_value() ? std::optional<bool>(false) : std::nullopt;
        fill.interpolated = true;
        out.points.push_back(fill);
      }
    }
    out.points.push_back(pts[i]);
  }
  return out;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  std::stringstream ss(line);
  while (std::getline(ss, cur, ',')) fields.push_back(cur);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

bool parse_int64(const std::string& s, int64_t& out) {
  try {
    std::size_t pos = 0;
    out = std::stoll(s, &pos);
    return pos == s.size();
  } catch (...) {
    return false;
  }
}

bool parse_double(const std::string& s, double& out) {
  try {
    std::size_t pos = 0;
    out = std::stod(s, &pos);
    return pos == s.size();
  } catch (...) {
    return false;
  }
}

}  // namespace

TimeSeries ingest_csv(const std::string& path, Granularity g, const CsvSchema& schema,
                      std::string id) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  if (id.empty()) id = path;

  std::vector<TimeSeriesPoint> pts;
  std::string line;
  std::size_t lineno = 0;
  int needed = std::max({schema.timestamp_col, schema.value_col, schema.label_col}) + 1;
  while (std::getline(in, line)) {
    ++lineno;
    std::string t = trim(line);
    if (t.empty()) continue;
    auto fields = split_csv_line(t);
    if (static_cast<int>(fields.size()) < needed)
      throw ParseError("expected at least " + std::to_string(needed) + " columns", lineno);

    TimeSeriesPoint p;
    if (!parse_int64(trim(fields[schema.timestamp_col]), p.timestamp)) {
      // A non-numeric first row is treated as the optional header.
      if (lineno == 1) continue;
      throw ParseError("bad timestamp '" + fields[schema.timestamp_col] + "'", lineno);
    }
    if (!parse_double(trim(fields[schema.value_col]), p.value))
      throw ParseError("bad value '" + fields[schema.value_col] + "'", lineno);
    if (!std::isfinite(p.value)) throw ParseError("non-finite value", lineno);
    if (schema.label_col >= 0) {
      std::string l = trim(fields[schema.label_col]);
      if (l == "0")
        p.label = false;
      else if (l == "1")
        p.label = true;
      else
        throw ParseError("bad label '" + l + "' (expected 0 or 1)", lineno);
    } else if (fields.size() >= 3 && schema.timestamp_col == 0 && schema.value_col == 1) {
      // Default schema: a third column, when present, is the label.
      std::string l = trim(fields[2]);
      if (l == "0")
        p.label = false;
      else if (l == "1")
        p.label = true;
      else
        throw ParseError("bad label '" + l + "' (expected 0 or 1)", lineno);
    }
    pts.push_back(p);
  }
  return finalize_series(std::move(id), g, std::move(pts));
}

TimeSeries ingest_json(const std::string& path, Granularity g, std::string id) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  if (id.empty()) id = path;

  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
  if (!doc.is_array()) throw std::runtime_error(path + ": expected a JSON array");

  std::vector<TimeSeriesPoint> pts;
  for (const auto& obj : doc) {
    TimeSeriesPoint p;
    p.timestamp = obj.at("t").get<int64_t>();
    p.value = obj.at("v").get<double>();
    if (obj.contains("l")) p.label = obj.at("l").get<int>() != 0;
    pts.push_back(p);
  }
  return finalize_series(std::move(id), g, std::move(pts));
}

void write_csv(const TimeSeries& series, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  bool labeled = series.labeled();
  out << (labeled ? "timestamp,value,label\n" : "timestamp,value\n");
  out.precision(17);
  for (const auto& p : series.points) {
    out << p.timestamp << ',' << p.value;
    if (labeled) out << ',' << (*p.label ? 1 : 0);
    out << '\n';
  }
}

std::vector<Window> windows(const TimeSeries& series, std::size_t window) {
  if (window == 0) throw std::invalid_argument("window must be positive");
  const std::size_t n = series.size();
  if (n < window)
    throw std::invalid_argument("series of length " + std::to_string(n) +
                                " shorter than window " + std::to_string(window));
  std::vector<Window> out;
  out.reserve(n - window + 1);
  for (std::size_t end = window - 1; end < n; ++end) {
    Window w;
    w.series_id = series.id;
    w.end_index = end;
    w.values.reserve(window);
    for (std::size_t j = end + 1 - window; j <= end; ++j) w.values.push_back(series.value(j));
    out.push_back(std::move(w));
  }
  return out;
}

}  // namespace srdetect
