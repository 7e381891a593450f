#include <gtest/gtest.h>

#include <filesystem>
#include <sstream>

#include "infers/error.hpp"
#include "infers/records_io.hpp"
#include "infers/simulator.hpp"
#include "support.hpp"

using namespace infers;

namespace {

std::string header()
{
    return std::string(kCsvHeader) + "\n";
}

const char* kRow = "1994-03-01T00:00:00Z,20.5,-140,0.1,0.2,0.1,0.2,0.1,0.2,0.1,0.2,0.1,0.2,0.1,0.2\n";

ErrorCode code_of(const std::string& text)
{
    std::istringstream in(text);
    try {
        parse_csv(in);
    } catch (const Error& e) {
        return e.code();
    }
    return ErrorCode::InvalidArgument;
}

}  // namespace

TEST(RecordsIo, ThreeRows)
{
    std::istringstream in(header() + kRow + kRow + kRow);
    const auto got = parse_csv(in);
    EXPECT_EQ(got.records.size(), 3u);
    EXPECT_TRUE(got.rejected.empty());
    EXPECT_EQ(got.records[0].lat, 20.5);
    EXPECT_EQ(got.records[0][Tag::S], Velocity(0.1, 0.2));
    EXPECT_EQ(got.records[0].time, parse_time("1994-03-01T00:00:00Z"));
}

TEST(RecordsIo, RejectsInvalidRows)
{
    const std::string nan_row = "1994-03-02T00:00:00Z,20,0,nan,0.2,0.1,0.2,0.1,0.2,0.1,0.2,0.1,0.2,0.1,0.2\n";
    const std::string fast_row = "1994-03-02T00:00:00Z,20,0,11,0.2,0.1,0.2,0.1,0.2,0.1,0.2,0.1,0.2,0.1,0.2\n";
    const std::string lat_row = "1994-03-02T00:00:00Z,95,0,0.1,0.2,0.1,0.2,0.1,0.2,0.1,0.2,0.1,0.2,0.1,0.2\n";
    std::istringstream in(header() + kRow + nan_row + kRow + fast_row + lat_row);
    const auto got = parse_csv(in);
    EXPECT_EQ(got.records.size(), 2u);
    ASSERT_EQ(got.rejected.size(), 3u);
    EXPECT_EQ(got.rejected[0].line, 3u);
    EXPECT_EQ(got.rejected[1].line, 5u);
    EXPECT_EQ(got.rejected[2].line, 6u);
}

TEST(RecordsIo, StructuralErrors)
{
    EXPECT_EQ(code_of(""), ErrorCode::EmptyFile);
    EXPECT_EQ(code_of(header()), ErrorCode::EmptyFile);
    EXPECT_EQ(code_of("time,lat,lon,u_i,v_i\n"), ErrorCode::MissingColumn);
    EXPECT_EQ(code_of(header() + "1994-03-01T00:00:00Z,1,2,3\n"), ErrorCode::ParseError);
    EXPECT_EQ(code_of(header() + "1994-03-01T00:00:00Z,x,0,0.1,0.2,0.1,0.2,0.1,0.2,0.1,0.2,0.1,0.2,0.1,0.2\n"),
              ErrorCode::ParseError);
    EXPECT_EQ(code_of(header() + "yesterday,1,0,0.1,0.2,0.1,0.2,0.1,0.2,0.1,0.2,0.1,0.2,0.1,0.2\n"),
              ErrorCode::ParseError);
    try {
        std::istringstream in(header() + kRow + "1994-03-01T00:00:00Z,1,2,3\n");
        parse_csv(in);
        FAIL();
    } catch (const Error& e) {
        EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos);
    }
    EXPECT_THROW(load_csv("/nonexistent/file.csv"), Error);
}

TEST(RecordsIo, RoundTripIsBitIdentical)
{
    auto cfg = testing_support::reference_config(1000, 19);
    cfg.lat = 33.25;
    cfg.lon = -120.125;
    const auto recs = simulate(cfg);
    const auto path = std::filesystem::temp_directory_path() / "infers_roundtrip.csv";
    write_csv(path, recs);
    const auto back = load_csv(path);
    std::filesystem::remove(path);
    ASSERT_EQ(back.records.size(), recs.size());
    EXPECT_EQ(back.records, recs);
}

TEST(RecordsIo, TimeFormat)
{
    EXPECT_EQ(format_time(757382400), "1994-01-01T00:00:00Z");
    EXPECT_EQ(parse_time("1994-01-01T00:00:00Z"), 757382400);
    EXPECT_EQ(format_time(parse_time("2000-02-29T23:59:59Z")), "2000-02-29T23:59:59Z");
    EXPECT_EQ(civil_date(parse_time("1996-12-31T10:00:00Z")).day_of_year, 366);
    EXPECT_EQ(civil_date(parse_time("1997-12-31T10:00:00Z")).day_of_year, 365);
    EXPECT_EQ(civil_date(parse_time("1997-12-31T10:00:00Z")).year, 1997);
    EXPECT_THROW(parse_time("1994-13-01T00:00:00Z"), Error);
    EXPECT_EQ(parse_time("1994-01-01 00:00:00"), 757382400);
    EXPECT_THROW(parse_time("1994/01/01T00:00:00Z"), Error);
    EXPECT_THROW(parse_time("1994-01-01T00:00Z"), Error);
}

TEST(RecordsIo, AtomicFileLeavesNothingOnAbort)
{
    const auto path = std::filesystem::temp_directory_path() / "infers_atomic.txt";
    std::filesystem::remove(path);
    {
        AtomicFile f(path);
        f.stream() << "partial";
    }
    EXPECT_FALSE(std::filesystem::exists(path));
    EXPECT_FALSE(std::filesystem::exists(path.string() + ".tmp"));
    write_file_atomic(path, "done");
    EXPECT_EQ(std::filesystem::file_size(path), 4u);
    std::filesystem::remove(path);
}
