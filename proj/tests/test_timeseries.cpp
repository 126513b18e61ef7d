#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "srdetect/timeseries.hpp"

using namespace srdetect;

namespace {

struct TempFile {
  std::string path;
  explicit TempFile(const std::string& contents, const std::string& ext = ".csv") {
    static int counter = 0;
    path = (std::filesystem::temp_directory_path() /
            ("srdetect_ts_" + std::to_string(counter++) + ext))
               .string();
    std::ofstream out(path);
    out << contents;
  }
  ~TempFile() { std::remove(path.c_str()); }
};

}  // namespace

TEST_CASE("three-row csv parses to three points") {
  TempFile f("0,1.0\n60,2.0\n120,3.0\n");
  auto ts = ingest_csv(f.path, Granularity::Minute);
  REQUIRE(ts.size() == 3);
  CHECK(ts.points[0].timestamp == 0);
  CHECK(ts.points[2].value == doctest::Approx(3.0));
  CHECK_FALSE(ts.points[0].label.has_value());
  CHECK_FALSE(ts.labeled());
}

TEST_CASE("label column is picked up") {
  TempFile f("timestamp,value,label\n0,1.0,0\n60,2.0,1\n");
  auto ts = ingest_csv(f.path, Granularity::Minute);
  REQUIRE(ts.size() == 2);
  CHECK(ts.labeled());
  CHECK(*ts.points[1].label);
}

TEST_CASE("malformed value reports the line number") {
  TempFile f("0,1.0\n60,abc\n");
  try {
    ingest_csv(f.path, Granularity::Minute);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line == 2);
  }
}

TEST_CASE("out-of-order rows are sorted and gap-filled") {
  TempFile f("120,3.0\n0,1.0\n");
  auto ts = ingest_csv(f.path, Granularity::Minute);
  // Reference: sort gives [0, 120]; linear interpolation fills t=60 with 2.0.
  REQUIRE(ts.size() == 3);
  CHECK(ts.points[0].timestamp == 0);
  CHECK(ts.points[1].timestamp == 60);
  CHECK(ts.points[1].value == doctest::Approx(2.0));
  CHECK(ts.points[1].interpolated);
  CHECK(ts.points[2].timestamp == 120);
  CHECK_FALSE(ts.points[2].interpolated);
}

TEST_CASE("duplicate timestamps are a hard error") {
  TempFile f("0,1.0\n0,2.0\n");
  CHECK_THROWS_AS(ingest_csv(f.path, Granularity::Minute), std::invalid_argument);
}

TEST_CASE("misaligned timestamps are rejected") {
  TempFile f("0,1.0\n90,2.0\n");
  CHECK_THROWS_AS(ingest_csv(f.path, Granularity::Minute), std::invalid_argument);
}

TEST_CASE("json ingestion") {
  TempFile f(R"([{"t":0,"v":1.5},{"t":3600,"v":2.5,"l":1}])", ".json");
  auto ts = ingest_json(f.path, Granularity::Hour);
  REQUIRE(ts.size() == 2);
  CHECK(ts.points[0].value == doctest::Approx(1.5));
  CHECK(ts.points[1].label.has_value());
  CHECK(*ts.points[1].label);
}

TEST_CASE("ingestion round trip is idempotent") {
  TempFile f("0,1.25\n60,2.5\n120,0.75\n240,4.0\n");
  auto ts = ingest_csv(f.path, Granularity::Minute);
  TempFile out("");
  write_csv(ts, out.path);
  auto ts2 = ingest_csv(out.path, Granularity::Minute);
  REQUIRE(ts2.size() == ts.size());
  for (std::size_t i = 0; i < ts.size(); ++i) {
    CHECK(ts2.points[i].timestamp == ts.points[i].timestamp);
    CHECK(ts2.points[i].value == doctest::Approx(ts.points[i].value).epsilon(1e-15));
  }
}

TEST_CASE("window counts") {
  std::vector<TimeSeriesPoint> pts;
  for (int i = 0; i < 5; ++i) pts.push_back({i * 60, double(i), std::nullopt, false});
  auto ts = finalize_series("t", Granularity::Minute, pts);

  SUBCASE("length 5, window 3 gives 3 windows ending at 2,3,4") {
    auto ws = windows(ts, 3);
    REQUIRE(ws.size() == 3);
    CHECK(ws[0].end_index == 2);
    CHECK(ws[2].end_index == 4);
    CHECK(ws[1].values == std::vector<double>{1, 2, 3});
  }
  SUBCASE("boundary: length == window gives exactly one window") {
    auto ws = windows(ts, 5);
    REQUIRE(ws.size() == 1);
  }
  SUBCASE("series shorter than window is an error") {
    CHECK_THROWS_AS(windows(ts, 6), std::invalid_argument);
  }
}

TEST_CASE("window tails reproduce the series suffix") {
  std::vector<TimeSeriesPoint> pts;
  for (int i = 0; i < 17; ++i) pts.push_back({i * 3600, std::sin(i * 0.3), std::nullopt, false});
  auto ts = finalize_series("t", Granularity::Hour, pts);
  const std::size_t w = 6;
  auto ws = windows(ts, w);
  CHECK(ws.size() == ts.size() - w + 1);
  for (std::size_t i = 0; i < ws.size(); ++i)
    CHECK(ws[i].values.back() == ts.value(w - 1 + i));
}
