#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "infers/record.hpp"

namespace infers {

// Exact header of the collocation CSV.
inline constexpr std::string_view kCsvHeader = "time,lat,lon,u_i,v_i,u_n,v_n,u_f,v_f,u_e,v_e,u_r,v_r,u_s,v_s";

struct RejectedRow {
    std::size_t line = 0;  // 1-based, header is line 1
    std::string reason;
};

struct LoadResult {
    std::vector<CollocationRecord> records;
    std::vector<RejectedRow> rejected;
};

// Rows that parse but violate record invariants are rejected and reported;
// structurally malformed rows raise ParseError with their line number.
LoadResult load_csv(const std::filesystem::path& path);
LoadResult parse_csv(std::istream& in);

// Velocities are written in shortest round-trip form, so a reload is bit-identical.
void write_csv(std::ostream& out, std::span<const CollocationRecord> records);
void write_csv(const std::filesystem::path& path, std::span<const CollocationRecord> records);

// ISO-8601 UTC, "YYYY-MM-DDTHH:MM:SSZ".
std::string format_time(std::int64_t epoch_seconds);
std::int64_t parse_time(std::string_view text);  // throws ParseError

struct CivilDate {
    int year = 1970;
    int day_of_year = 1;  // 1..366
};
CivilDate civil_date(std::int64_t epoch_seconds);

// Shortest decimal string that reads back to the same double.
std::string format_double(double v);

// Writes to a sibling temporary file and renames it into place on commit().
// An uncommitted file is removed on destruction.
class AtomicFile {
public:
    explicit AtomicFile(std::filesystem::path target);
    ~AtomicFile();
    AtomicFile(const AtomicFile&) = delete;
    AtomicFile& operator=(const AtomicFile&) = delete;

    std::ostream& stream() { return out_; }
    void commit();

private:
    std::filesystem::path target_;
    std::filesystem::path temp_;
    std::ofstream out_;
    bool committed_ = false;
};

void write_file_atomic(const std::filesystem::path& path, std::string_view content);

}  // namespace infers
