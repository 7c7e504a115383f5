#include "epf/bench.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "epf/stats.hpp"

namespace epf {

ErrorSample abs_errors(const Eigen::MatrixXd& truth, const Eigen::MatrixXd& forecast_mean,
                       std::string method_tag, std::string scenario) {
    if (truth.rows() != forecast_mean.rows() || truth.cols() != forecast_mean.cols())
        throw std::invalid_argument("truth/forecast shape mismatch");
    ErrorSample out;
    out.method_tag = std::move(method_tag);
    out.scenario = std::move(scenario);
    out.errors.reserve(static_cast<std::size_t>(truth.size()));
    for (Eigen::Index r = 0; r < truth.rows(); ++r)
        for (Eigen::Index c = 0; c < truth.cols(); ++c)
            out.errors.push_back(std::abs(truth(r, c) - forecast_mean(r, c)));
    return out;
}

double mae(const ErrorSample& sample) {
    if (sample.errors.empty()) throw std::invalid_argument("empty error sample");
    double sum = 0.0;
    for (double e : sample.errors) sum += e;
    return sum / static_cast<double>(sample.errors.size());
}

std::pair<double, double> iqr(const ErrorSample& sample) {
    if (sample.errors.empty()) throw std::invalid_argument("empty error sample");
    std::vector<double> sorted = sample.errors;
    std::sort(sorted.begin(), sorted.end());
    return {percentile_sorted(sorted, 25), percentile_sorted(sorted, 75)};
}

Histogram histogram(const ErrorSample& sample, int bins) {
    if (sample.errors.empty()) throw std::invalid_argument("empty error sample");
    if (bins < 1) throw std::invalid_argument("bins must be >= 1");
    Histogram h;
    const double top = *std::max_element(sample.errors.begin(), sample.errors.end());
    h.edges.resize(static_cast<std::size_t>(bins) + 1);
    for (int b = 0; b <= bins; ++b)
        h.edges[static_cast<std::size_t>(b)] = top * static_cast<double>(b) / bins;
    h.counts.assign(static_cast<std::size_t>(bins), 0);
    for (double e : sample.errors) {
        int b = top > 0.0 ? static_cast<int>(e / top * bins) : 0;
        if (b >= bins) b = bins - 1;  // last bin is closed on the right
        ++h.counts[static_cast<std::size_t>(b)];
    }
    return h;
}

MethodReport make_report(const ErrorSample& sample, int bins) {
    return {mae(sample), iqr(sample), histogram(sample, bins)};
}

std::vector<MethodRank> compare_methods(const BenchmarkReport& report) {
    std::vector<MethodRank> out;
    for (const auto& [scenario, methods] : report) {
        if (methods.size() < 2)
            throw std::invalid_argument("scenario '" + scenario + "' has fewer than 2 methods");
        std::vector<std::pair<std::string, const MethodReport*>> entries;
        for (const auto& [tag, rep] : methods) entries.emplace_back(tag, &rep);
        std::sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) {
            if (a.second->mae != b.second->mae) return a.second->mae < b.second->mae;
            const double wa = a.second->iqr.second - a.second->iqr.first;
            const double wb = b.second->iqr.second - b.second->iqr.first;
            if (wa != wb) return wa < wb;
            return a.first < b.first;
        });
        MethodRank rank;
        rank.scenario = scenario;
        for (const auto& [tag, rep] : entries) rank.methods.push_back(tag);
        out.push_back(std::move(rank));
    }
    return out;
}

}  // namespace epf
