#pragma once

#include <Eigen/Dense>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace epf {

struct ErrorSample {
    std::string method_tag;
    std::string scenario;
    std::vector<double> errors;  // |truth - mean_forecast| per evaluated cell
};

struct Histogram {
    std::vector<double> edges;  // bins+1 uniform edges over [0, max error]
    std::vector<long> counts;
};

struct MethodReport {
    double mae = 0.0;
    std::pair<double, double> iqr{0.0, 0.0};
    Histogram hist;
};

// scenario -> method -> report
using BenchmarkReport = std::map<std::string, std::map<std::string, MethodReport>>;

struct MethodRank {
    std::string scenario;
    std::vector<std::string> methods;  // best first
};

ErrorSample abs_errors(const Eigen::MatrixXd& truth, const Eigen::MatrixXd& forecast_mean,
                       std::string method_tag = {}, std::string scenario = {});

double mae(const ErrorSample& sample);

// 25th/75th percentiles, linear interpolation between order statistics.
std::pair<double, double> iqr(const ErrorSample& sample);

// Uniform bins spanning [0, max error]; right-open except the last bin.
Histogram histogram(const ErrorSample& sample, int bins);

MethodReport make_report(const ErrorSample& sample, int bins = 20);

// Orders methods per scenario by MAE, narrower IQR breaking ties.
std::vector<MethodRank> compare_methods(const BenchmarkReport& report);

}  // namespace epf
