#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "epf/dates.hpp"

namespace epf {

struct HourlyRecord {
    Date date;
    int hour;  // 1..24
    double price;
};

// Validated hourly series: sorted by (date, hour), complete 24-hour days,
// finite prices, no duplicates.
struct HourlyPriceSeries {
    std::vector<HourlyRecord> records;

    // Sorts and validates; throws std::runtime_error on any invariant breach.
    static HourlyPriceSeries from_records(std::vector<HourlyRecord> recs);

    std::size_t num_days() const { return records.size() / 24; }
};

HourlyPriceSeries load_hourly_csv(const std::string& path);

// One row per calendar day, 24 columns (hours 1..24). Days are consecutive.
struct DailyPriceMatrix {
    std::vector<Date> days;
    Eigen::MatrixXd values;  // days.size() x 24

    std::size_t num_days() const { return days.size(); }
    Date start_date() const { return days.front(); }
    // Row index of `d`; throws if outside the covered range.
    Eigen::Index row_of(Date d) const;
};

DailyPriceMatrix to_daily_matrix(const HourlyPriceSeries& series);
HourlyPriceSeries flatten(const DailyPriceMatrix& matrix);

struct VolatilitySeries {
    // One entry per hourly time point; disengaged while the trailing window
    // is not yet filled.
    std::vector<std::optional<double>> values;
    int window_days = 0;
};

// Population standard deviation of the trailing window_days*24 hourly
// observations (pooled across hours), including the current one.
VolatilitySeries rolling_volatility(const HourlyPriceSeries& series, int window_days);

struct VolShift {
    std::int64_t start_day = 0;
    double factor = 1.0;
};

// Per-hour AR(1)/discrete-OU generator with optional linear trend and a
// volatility regime change. Daily recursion, not the continuous transition
// density, so tau=1 Kramers-Moyal estimates have a closed-form target.
struct SyntheticSpec {
    Eigen::VectorXd theta;        // 24, per-hour mean reversion, >= 0
    Eigen::VectorXd m;            // 24, equilibrium level
    Eigen::MatrixXd sigma;        // 24x24 noise mixing (scalar specs expand to s*I)
    Eigen::VectorXd trend_slope;  // 24, currency/day, default 0
    std::optional<VolShift> vol_shift;
    std::optional<Eigen::VectorXd> x0;  // start state, defaults to m
    std::int64_t num_days = 0;
    std::uint64_t seed = 0;
    Date start_date{2004, 1, 1};

    static SyntheticSpec make(double theta, double m, double sigma, std::int64_t num_days,
                              std::uint64_t seed);
    void validate() const;
};

DailyPriceMatrix generate_synthetic(const SyntheticSpec& spec);

// Splits into [first..train_end] and (train_end..last]; train_end must be
// strictly inside the date range.
std::pair<DailyPriceMatrix, DailyPriceMatrix> split(const DailyPriceMatrix& matrix,
                                                    Date train_end);

}  // namespace epf
