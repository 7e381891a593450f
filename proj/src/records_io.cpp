#include "infers/records_io.hpp"

#include <array>
#include <charconv>
#include <chrono>
#include <system_error>

#include "infers/error.hpp"

namespace infers {

namespace {

constexpr std::size_t kColumns = 15;

std::vector<std::string_view> split(std::string_view line)
{
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            out.push_back(line.substr(start));
            return out;
        }
        out.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
}

std::string_view trim(std::string_view s)
{
    while (!s.empty() && (s.back() == '\r' || s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    return s;
}

double parse_number(std::string_view text, std::size_t line)
{
    text = trim(text);
    if (!text.empty() && text.front() == '+') text.remove_prefix(1);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) {
        throw Error(ErrorCode::ParseError, "line " + std::to_string(line) + ": bad number '" + std::string(text) + "'");
    }
    return v;
}

int parse_int(std::string_view text, std::size_t begin, std::size_t len)
{
    int v = 0;
    const auto s = text.substr(begin, len);
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
        throw Error(ErrorCode::ParseError, "bad time '" + std::string(text) + "'");
    }
    return v;
}

}  // namespace

std::string format_double(double v)
{
    std::array<char, 32> buf{};
    const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), ptr);
}

std::string format_time(std::int64_t epoch_seconds)
{
    using namespace std::chrono;
    const sys_seconds tp{seconds{epoch_seconds}};
    const sys_days day = floor<days>(tp);
    const year_month_day ymd{day};
    const hh_mm_ss hms{tp - day};
    char buf[32];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02dZ", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                  static_cast<int>(hms.hours().count()), static_cast<int>(hms.minutes().count()),
                  static_cast<int>(hms.seconds().count()));
    return buf;
}

std::int64_t parse_time(std::string_view text)
{
    using namespace std::chrono;
    text = trim(text);
    if (!text.empty() && text.back() == 'Z') text.remove_suffix(1);
    if (text.size() != 19 || text[4] != '-' || text[7] != '-' || (text[10] != 'T' && text[10] != ' ') ||
        text[13] != ':' || text[16] != ':') {
        throw Error(ErrorCode::ParseError, "bad time '" + std::string(text) + "'");
    }
    const year_month_day ymd{year{parse_int(text, 0, 4)}, month{static_cast<unsigned>(parse_int(text, 5, 2))},
                             day{static_cast<unsigned>(parse_int(text, 8, 2))}};
    const int hh = parse_int(text, 11, 2);
    const int mm = parse_int(text, 14, 2);
    const int ss = parse_int(text, 17, 2);
    if (!ymd.ok() || hh > 23 || mm > 59 || ss > 60) {
        throw Error(ErrorCode::ParseError, "bad time '" + std::string(text) + "'");
    }
    const sys_seconds tp = sys_days{ymd} + hours{hh} + minutes{mm} + seconds{ss};
    return tp.time_since_epoch().count();
}

CivilDate civil_date(std::int64_t epoch_seconds)
{
    using namespace std::chrono;
    const sys_days day = floor<days>(sys_seconds{seconds{epoch_seconds}});
    const year_month_day ymd{day};
    const sys_days jan1{ymd.year() / January / 1};
    return {static_cast<int>(ymd.year()), static_cast<int>((day - jan1).count()) + 1};
}

LoadResult parse_csv(std::istream& in)
{
    std::string line;
    if (!std::getline(in, line)) throw Error(ErrorCode::EmptyFile, "no header line");
    const auto header = split(trim(line));
    const auto expected = split(kCsvHeader);
    for (std::size_t k = 0; k < expected.size(); ++k) {
        if (k >= header.size() || trim(header[k]) != expected[k]) {
            throw Error(ErrorCode::MissingColumn, "expected column '" + std::string(expected[k]) + "' at position " +
                                                      std::to_string(k + 1));
        }
    }
    if (header.size() != expected.size()) {
        throw Error(ErrorCode::MissingColumn, "unexpected extra columns in header");
    }

    LoadResult result;
    std::size_t line_no = 1;
    std::size_t data_rows = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string_view row = trim(line);
        if (row.empty()) continue;
        ++data_rows;
        const auto fields = split(row);
        if (fields.size() != kColumns) {
            throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": expected " +
                                                   std::to_string(kColumns) + " fields, got " +
                                                   std::to_string(fields.size()));
        }
        CollocationRecord r;
        try {
            r.time = parse_time(fields[0]);
        } catch (const Error&) {
            throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": bad time");
        }
        r.lat = parse_number(fields[1], line_no);
        r.lon = parse_number(fields[2], line_no);
        for (std::size_t j = 0; j < kTagCount; ++j) {
            r.vel[j] = Velocity(parse_number(fields[3 + 2 * j], line_no), parse_number(fields[4 + 2 * j], line_no));
        }
        if (auto reason = check_record(r)) {
            result.rejected.push_back({line_no, *reason});
            continue;
        }
        result.records.push_back(r);
    }
    if (data_rows == 0) throw Error(ErrorCode::EmptyFile, "no data rows");
    return result;
}

LoadResult load_csv(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
    return parse_csv(in);
}

void write_csv(std::ostream& out, std::span<const CollocationRecord> records)
{
    out << kCsvHeader << '\n';
    std::string row;
    for (const auto& r : records) {
        row.clear();
        row += format_time(r.time);
        row += ',';
        row += format_double(r.lat);
        row += ',';
        row += format_double(r.lon);
        for (const Velocity& v : r.vel) {
            row += ',';
            row += format_double(v.real());
            row += ',';
            row += format_double(v.imag());
        }
        row += '\n';
        out << row;
    }
}

void write_csv(const std::filesystem::path& path, std::span<const CollocationRecord> records)
{
    AtomicFile file(path);
    write_csv(file.stream(), records);
    file.commit();
}

AtomicFile::AtomicFile(std::filesystem::path target)
    : target_(std::move(target)), temp_(target_.string() + ".tmp"), out_(temp_, std::ios::binary | std::ios::trunc)
{
    if (!out_) throw Error(ErrorCode::IoError, "cannot write " + temp_.string());
}

AtomicFile::~AtomicFile()
{
    if (!committed_) {
        out_.close();
        std::error_code ec;
        std::filesystem::remove(temp_, ec);
    }
}

void AtomicFile::commit()
{
    out_.flush();
    if (!out_) throw Error(ErrorCode::IoError, "write failed for " + temp_.string());
    out_.close();
    std::error_code ec;
    std::filesystem::rename(temp_, target_, ec);
    if (ec) throw Error(ErrorCode::IoError, "cannot rename into " + target_.string() + ": " + ec.message());
    committed_ = true;
}

void write_file_atomic(const std::filesystem::path& path, std::string_view content)
{
    AtomicFile file(path);
    file.stream() << content;
    file.commit();
}

}  // namespace infers
