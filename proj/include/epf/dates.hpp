#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace epf {

// Proleptic Gregorian calendar day. Arithmetic goes through a serial day
// number (days since 1970-01-01) so consecutive-day checks are exact.
struct Date {
    int year = 1970;
    int month = 1;  // 1..12
    int day = 1;    // 1..31

    auto operator<=>(const Date&) const = default;

    std::int64_t serial() const;
    static Date from_serial(std::int64_t days);

    Date next() const { return from_serial(serial() + 1); }
    Date plus_days(std::int64_t n) const { return from_serial(serial() + n); }

    std::string iso() const;
    // Accepts YYYY-MM-DD; rejects impossible dates.
    static std::optional<Date> parse(std::string_view s);
};

}  // namespace epf
