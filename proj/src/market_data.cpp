#include "epf/market_data.hpp"

#include <algorithm>
#include <cmath>
#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "epf/rng.hpp"

namespace epf {

HourlyPriceSeries HourlyPriceSeries::from_records(std::vector<HourlyRecord> recs) {
    std::sort(recs.begin(), recs.end(), [](const HourlyRecord& a, const HourlyRecord& b) {
        return std::pair(a.date, a.hour) < std::pair(b.date, b.hour);
    });
    for (std::size_t i = 0; i < recs.size(); ++i) {
        const auto& r = recs[i];
        if (r.hour < 1 || r.hour > 24)
            throw std::runtime_error("hour out of range 1..24 on " + r.date.iso());
        if (!std::isfinite(r.price))
            throw std::runtime_error("non-finite price on " + r.date.iso() + " hour " +
                                     std::to_string(r.hour));
        if (i > 0 && recs[i - 1].date == r.date && recs[i - 1].hour == r.hour)
            throw std::runtime_error("duplicate (date,hour): " + r.date.iso() + " hour " +
                                     std::to_string(r.hour));
    }
    // Every date must contribute exactly hours 1..24.
    std::size_t i = 0;
    while (i < recs.size()) {
        const Date d = recs[i].date;
        std::size_t j = i;
        while (j < recs.size() && recs[j].date == d) ++j;
        if (j - i != 24)
            throw std::runtime_error("incomplete day " + d.iso() + ": " +
                                     std::to_string(j - i) + " hours (expected 24)");
        for (std::size_t k = 0; k < 24; ++k)
            if (recs[i + k].hour != static_cast<int>(k) + 1)
                throw std::runtime_error("incomplete day " + d.iso() + ": missing hour " +
                                         std::to_string(k + 1));
        i = j;
    }
    HourlyPriceSeries out;
    out.records = std::move(recs);
    return out;
}

HourlyPriceSeries load_hourly_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error(path + ": empty file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "date,hour,price")
        throw std::runtime_error(path + ": expected header 'date,hour,price'");

    std::vector<HourlyRecord> recs;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto c1 = line.find(',');
        const auto c2 = c1 == std::string::npos ? std::string::npos : line.find(',', c1 + 1);
        auto bad = [&](const char* what) {
            return std::runtime_error(path + ":" + std::to_string(lineno) + ": " + what);
        };
        if (c2 == std::string::npos) throw bad("malformed row (need 3 fields)");
        const auto date = Date::parse(std::string_view(line).substr(0, c1));
        if (!date) throw bad("malformed date");
        int hour;
        {
            auto res = std::from_chars(line.data() + c1 + 1, line.data() + c2, hour);
            if (res.ec != std::errc{} || res.ptr != line.data() + c2) throw bad("malformed hour");
        }
        double price;
        try {
            std::size_t used = 0;
            price = std::stod(line.substr(c2 + 1), &used);
            if (used != line.size() - c2 - 1) throw bad("malformed price");
        } catch (const std::logic_error&) {
            throw bad("malformed price");
        }
        if (hour < 1 || hour > 24) throw bad("hour out of range 1..24");
        if (!std::isfinite(price)) throw bad("non-finite price");
        recs.push_back({*date, hour, price});
    }
    return HourlyPriceSeries::from_records(std::move(recs));
}

Eigen::Index DailyPriceMatrix::row_of(Date d) const {
    if (days.empty()) throw std::runtime_error("empty matrix");
    const auto off = d.serial() - days.front().serial();
    if (off < 0 || off >= static_cast<std::int64_t>(days.size()))
        throw std::runtime_error("date " + d.iso() + " outside matrix range");
    return static_cast<Eigen::Index>(off);
}

DailyPriceMatrix to_daily_matrix(const HourlyPriceSeries& series) {
    if (series.records.empty()) throw std::runtime_error("empty series");
    DailyPriceMatrix out;
    const std::size_t nd = series.num_days();
    out.values.resize(static_cast<Eigen::Index>(nd), 24);
    for (std::size_t d = 0; d < nd; ++d) {
        const Date date = series.records[d * 24].date;
        if (d > 0 && date.serial() != out.days.back().serial() + 1)
            throw std::runtime_error("calendar gap between " + out.days.back().iso() + " and " +
                                     date.iso());
        out.days.push_back(date);
        for (int h = 0; h < 24; ++h)
            out.values(static_cast<Eigen::Index>(d), h) = series.records[d * 24 + h].price;
    }
    return out;
}

HourlyPriceSeries flatten(const DailyPriceMatrix& matrix) {
    std::vector<HourlyRecord> recs;
    recs.reserve(matrix.num_days() * 24);
    for (std::size_t d = 0; d < matrix.num_days(); ++d)
        for (int h = 0; h < 24; ++h)
            recs.push_back({matrix.days[d], h + 1, matrix.values(static_cast<Eigen::Index>(d), h)});
    return HourlyPriceSeries::from_records(std::move(recs));
}

VolatilitySeries rolling_volatility(const HourlyPriceSeries& series, int window_days) {
    if (window_days < 1) throw std::invalid_argument("window_days must be >= 1");
    VolatilitySeries out;
    out.window_days = window_days;
    const std::size_t w = static_cast<std::size_t>(window_days) * 24;
    const std::size_t n = series.records.size();
    out.values.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (i + 1 >= w) {
            // Window is small (w=72 in practice); a direct two-pass stddev
            // keeps it numerically clean.
            double mean = 0.0;
            for (std::size_t k = i + 1 - w; k <= i; ++k) mean += series.records[k].price;
            mean /= static_cast<double>(w);
            double var = 0.0;
            for (std::size_t k = i + 1 - w; k <= i; ++k) {
                const double dlt = series.records[k].price - mean;
                var += dlt * dlt;
            }
            var /= static_cast<double>(w);
            out.values[i] = std::sqrt(var);
        }
    }
    return out;
}

SyntheticSpec SyntheticSpec::make(double theta, double m, double sigma, std::int64_t num_days,
                                  std::uint64_t seed) {
    SyntheticSpec s;
    s.theta = Eigen::VectorXd::Constant(24, theta);
    s.m = Eigen::VectorXd::Constant(24, m);
    s.sigma = sigma * Eigen::MatrixXd::Identity(24, 24);
    s.trend_slope = Eigen::VectorXd::Zero(24);
    s.num_days = num_days;
    s.seed = seed;
    return s;
}

void SyntheticSpec::validate() const {
    if (theta.size() != 24 || m.size() != 24) throw std::invalid_argument("theta/m must be 24-vectors");
    if (sigma.rows() != 24 || sigma.cols() != 24)
        throw std::invalid_argument("sigma must be 24x24 (scalars expand to s*I)");
    if (trend_slope.size() != 24) throw std::invalid_argument("trend_slope must be a 24-vector");
    if ((theta.array() < 0.0).any()) throw std::invalid_argument("theta must be non-negative");
    if (num_days < 2) throw std::invalid_argument("num_days must be >= 2");
    if (vol_shift && vol_shift->factor <= 0.0) throw std::invalid_argument("vol_shift factor must be > 0");
    if (x0 && x0->size() != 24) throw std::invalid_argument("x0 must be a 24-vector");
}

DailyPriceMatrix generate_synthetic(const SyntheticSpec& spec) {
    spec.validate();
    DailyPriceMatrix out;
    out.values.resize(static_cast<Eigen::Index>(spec.num_days), 24);
    out.days.reserve(static_cast<std::size_t>(spec.num_days));
    Eigen::VectorXd x = spec.x0 ? *spec.x0 : spec.m;
    for (std::int64_t d = 0; d < spec.num_days; ++d) {
        out.days.push_back(spec.start_date.plus_days(d));
        out.values.row(static_cast<Eigen::Index>(d)) =
            (x + static_cast<double>(d) * spec.trend_slope).transpose();
        // One counter-based draw per (day, hour): evaluation order cannot
        // change the output.
        Eigen::VectorXd xi(24);
        for (int h = 0; h < 24; ++h)
            xi(h) = rng::normal(spec.seed, static_cast<std::uint64_t>(d),
                                static_cast<std::uint64_t>(h));
        double amp = 1.0;
        if (spec.vol_shift && d >= spec.vol_shift->start_day) amp = spec.vol_shift->factor;
        x += spec.theta.cwiseProduct(spec.m - x) + amp * (spec.sigma * xi);
    }
    return out;
}

std::pair<DailyPriceMatrix, DailyPriceMatrix> split(const DailyPriceMatrix& matrix,
                                                    Date train_end) {
    if (matrix.num_days() < 2) throw std::invalid_argument("matrix too small to split");
    if (train_end <= matrix.days.front() || train_end >= matrix.days.back())
        throw std::invalid_argument("train_end must be strictly inside the date range");
    const Eigen::Index cut = matrix.row_of(train_end) + 1;
    DailyPriceMatrix train, val;
    train.days.assign(matrix.days.begin(), matrix.days.begin() + cut);
    train.values = matrix.values.topRows(cut);
    val.days.assign(matrix.days.begin() + cut, matrix.days.end());
    val.values = matrix.values.bottomRows(matrix.values.rows() - cut);
    return {std::move(train), std::move(val)};
}

}  // namespace epf
