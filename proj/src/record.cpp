#include "infers/record.hpp"

#include <cmath>

namespace infers {

namespace {
constexpr std::array<std::string_view, kTagCount> kNames{"I", "N", "F", "E", "R", "S"};
}

std::string_view tag_name(Tag t) { return kNames[index(t)]; }

std::optional<Tag> parse_tag(std::string_view name)
{
    for (Tag t : kAllTags) {
        if (kNames[index(t)] == name) return t;
    }
    return std::nullopt;
}

std::optional<std::string> check_record(const CollocationRecord& r)
{
    if (!std::isfinite(r.lat) || r.lat < -90.0 || r.lat > 90.0) return "latitude out of range";
    if (!std::isfinite(r.lon) || r.lon < -180.0 || r.lon >= 360.0) return "longitude out of range";
    for (Tag t : kAllTags) {
        const Velocity& v = r[t];
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
            return "non-finite velocity for " + std::string(tag_name(t));
        }
        if (std::abs(v) >= kMaxSpeed) {
            return "speed above bound for " + std::string(tag_name(t));
        }
    }
    return std::nullopt;
}

}  // namespace infers
