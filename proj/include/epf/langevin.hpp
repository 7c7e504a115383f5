#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <map>
#include <vector>

#include "epf/km_estimation.hpp"

namespace epf {

// Fitted 24-dimensional Langevin model: per-hour drift fields plus one
// state-independent diffusion matrix.
struct LangevinModel {
    std::array<DriftField, 24> drift_fields;  // index h-1 holds hour h
    DiffusionMatrix diffusion;

    void validate() const;
};

// Estimates all 24 drift fields and the full diffusion matrix from data.
LangevinModel fit_langevin_model(const DailyPriceMatrix& matrix,
                                 const DriftEstimationOptions& opts = {});

struct LangevinEnsemble {
    std::vector<Eigen::MatrixXd> paths;  // n matrices of shape (p+1) x 24
    Date t0;
    std::uint64_t seed = 0;

    int num_paths() const { return static_cast<int>(paths.size()); }
    int horizon() const { return paths.empty() ? 0 : static_cast<int>(paths[0].rows()) - 1; }
};

struct EnsembleStats {
    Eigen::MatrixXd mean;                    // (p+1) x 24
    std::map<int, Eigen::MatrixXd> percentiles;  // {10,25,75,90}
};

// Euler-Maruyama with a one-day step. Per-path noise comes from counter-based
// streams keyed by (seed, path, step), so the result is independent of the
// thread count. threads == 0 picks the hardware concurrency.
LangevinEnsemble simulate(const LangevinModel& model, const Eigen::VectorXd& x0, int p, int n,
                          std::uint64_t seed, Date t0 = {2021, 1, 1}, int threads = 0);

EnsembleStats ensemble_stats(const LangevinEnsemble& ens);
Eigen::MatrixXd ensemble_mean(const LangevinEnsemble& ens);

}  // namespace epf
