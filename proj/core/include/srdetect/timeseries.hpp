#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace srdetect {

enum class Granularity { Minute, Hour, Day };

int64_t granularity_seconds(Granularity g);
Granularity granularity_from_string(const std::string& s);
std::string to_string(Granularity g);

/// Default sliding window size per granularity (1440 / 64 / 30).
std::size_t default_window(Granularity g);
/// Default allowed detection delay per granularity (7 / 3 / 1).
std::size_t default_delay(Granularity g);

enum class SeriesClass { Seasonal, Stable, Unstable };
SeriesClass series_class_from_string(const std::string& s);
std::string to_string(SeriesClass c);

struct TimeSeriesPoint {
  int64_t timestamp = 0;
  double value = 0.0;
  std::optional<bool> label;
  bool interpolated = false;  // gap-filled point, never reported as an anomaly
};

/// Immutable after construction via finalize()/ingest.
struct TimeSeries {
  std::string id;
  Granularity granularity = Granularity::Minute;
  std::vector<TimeSeriesPoint> points;
  std::optional<SeriesClass> class_tag;

  std::size_t size() const { return points.size(); }
  double value(std::size_t i) const { return points[i].value; }
  bool labeled() const;
  std::vector<double> values() const;
};

struct Window {
  std::string series_id;
  std::size_t end_index = 0;
  std::vector<double> values;
};

struct CsvSchema {
  int timestamp_col = 0;
  int value_col = 1;
  int label_col = -1;  // -1: no label column
};

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& msg, std::size_t line)
      : std::runtime_error("line " + std::to_string(line) + ": " + msg), line(line) {}
  std::size_t line;
};

/// Sorts by timestamp, rejects duplicates and non-finite values, checks
/// granularity alignment and fills gaps by linear interpolation.
TimeSeries finalize_series(std::string id, Granularity g, std::vector<TimeSeriesPoint> pts);

/// CSV columns: timestamp,value[,label]; header row optional.
TimeSeries ingest_csv(const std::string& path, Granularity g, const CsvSchema& schema = {},
                      std::string id = "");

/// JSON: array of objects {"t": epoch-seconds, "v": value, "l": 0|1}.
TimeSeries ingest_json(const std::string& path, Granularity g, std::string id = "");

void write_csv(const TimeSeries& series, const std::string& path);

/// One window per index i in [window-1, n), each holding points i-window+1..i.
std::vector<Window> windows(const TimeSeries& series, std::size_t window);

}  // namespace srdetect
