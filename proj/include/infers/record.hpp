#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace infers {

// Sample tags of one collocation: in situ (drifter), nowcast, forecast,
// extended forecast, revcast, extended revcast.
enum class Tag : std::size_t { I = 0, N, F, E, R, S };

inline constexpr std::size_t kTagCount = 6;
inline constexpr std::array<Tag, kTagCount> kAllTags{Tag::I, Tag::N, Tag::F,
                                                      Tag::E, Tag::R, Tag::S};
// Analysis samples, i.e. everything but the drifter.
inline constexpr std::array<Tag, 5> kAnalysisTags{Tag::N, Tag::F, Tag::E, Tag::R, Tag::S};

constexpr std::size_t index(Tag t) { return static_cast<std::size_t>(t); }
std::string_view tag_name(Tag t);
std::optional<Tag> parse_tag(std::string_view name);

// Velocity component selector: zonal (u), meridional (v), or both taken
// together as one complex variate.
enum class Component { Joint, U, V };

using Velocity = std::complex<double>;  // u + i v, m/s

// Upper bound on a plausible surface-current speed; faster samples are
// rejected at ingest.
inline constexpr double kMaxSpeed = 10.0;

struct CollocationRecord {
    std::int64_t time = 0;  // epoch seconds, UTC
    double lat = 0.0;
    double lon = 0.0;
    std::array<Velocity, kTagCount> vel{};

    const Velocity& operator[](Tag t) const { return vel[index(t)]; }
    Velocity& operator[](Tag t) { return vel[index(t)]; }

    friend bool operator==(const CollocationRecord&, const CollocationRecord&) = default;
};

// Empty when the record satisfies all invariants, otherwise the reason.
std::optional<std::string> check_record(const CollocationRecord& r);

}  // namespace infers
