#include "epf/langevin.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "epf/rng.hpp"
#include "epf/stats.hpp"

namespace epf {

void LangevinModel::validate() const {
    for (int h = 1; h <= 24; ++h) {
        if (drift_fields[h - 1].hour != h)
            throw std::invalid_argument("drift field for hour " + std::to_string(h) +
                                        " missing or out of order");
    }
    if (diffusion.sigma.rows() != 24 || diffusion.sigma.cols() != 24)
        throw std::invalid_argument("diffusion sigma must be 24x24");
}

LangevinModel fit_langevin_model(const DailyPriceMatrix& matrix,
                                 const DriftEstimationOptions& opts) {
    LangevinModel model;
    for (int h = 1; h <= 24; ++h)
        model.drift_fields[h - 1] = estimate_drift(build_drift_dataset(matrix, h), opts);
    Eigen::MatrixXd d2(24, 24);
    for (int i = 1; i <= 24; ++i) {
        for (int j = i; j <= 24; ++j) {
            const double v = estimate_diffusion(build_diffusion_dataset(matrix, i, j));
            d2(i - 1, j - 1) = v;
            d2(j - 1, i - 1) = v;
        }
    }
    model.diffusion = assemble_diffusion_matrix(d2);
    return model;
}

LangevinEnsemble simulate(const LangevinModel& model, const Eigen::VectorXd& x0, int p, int n,
                          std::uint64_t seed, Date t0, int threads) {
    model.validate();
    if (p < 1 || n < 1) throw std::invalid_argument("need p >= 1 and n >= 1");
    if (x0.size() != 24 || !x0.allFinite())
        throw std::invalid_argument("x0 must be a finite 24-vector");

    LangevinEnsemble ens;
    ens.t0 = t0;
    ens.seed = seed;
    ens.paths.assign(static_cast<std::size_t>(n), Eigen::MatrixXd(p + 1, 24));

    const auto run_path = [&](int k) {
        Eigen::MatrixXd& path = ens.paths[static_cast<std::size_t>(k)];
        Eigen::VectorXd x = x0;
        path.row(0) = x.transpose();
        Eigen::VectorXd xi(24), mu(24);
        for (int s = 0; s < p; ++s) {
            for (int h = 0; h < 24; ++h) {
                mu(h) = drift_at(model.drift_fields[h], x(h));
                // Stream id encodes the path, counter the (step, hour) cell.
                xi(h) = rng::normal(seed, static_cast<std::uint64_t>(k),
                                    static_cast<std::uint64_t>(s) * 24u +
                                        static_cast<std::uint64_t>(h));
            }
            x += mu + model.diffusion.sigma * xi;  // dt = 1
            if (!x.allFinite())
                throw std::runtime_error("non-finite state at path " + std::to_string(k) +
                                         ", step " + std::to_string(s + 1));
            path.row(s + 1) = x.transpose();
        }
    };

    int nt = threads > 0 ? threads : static_cast<int>(std::thread::hardware_concurrency());
    nt = std::max(1, std::min(nt, n));
    if (nt == 1) {
        for (int k = 0; k < n; ++k) run_path(k);
    } else {
        std::vector<std::thread> pool;
        std::exception_ptr err;
        std::mutex err_mx;
        for (int t = 0; t < nt; ++t) {
            pool.emplace_back([&, t] {
                try {
                    for (int k = t; k < n; k += nt) run_path(k);
                } catch (...) {
                    std::lock_guard lock(err_mx);
                    if (!err) err = std::current_exception();
                }
            });
        }
        for (auto& th : pool) th.join();
        if (err) std::rethrow_exception(err);
    }
    return ens;
}

EnsembleStats ensemble_stats(const LangevinEnsemble& ens) {
    if (ens.paths.empty()) throw std::invalid_argument("empty ensemble");
    const Eigen::Index rows = ens.paths[0].rows();
    EnsembleStats stats;
    stats.mean = ensemble_mean(ens);
    for (int q : {10, 25, 75, 90}) stats.percentiles[q] = Eigen::MatrixXd(rows, 24);
    std::vector<double> cell(ens.paths.size());
    for (Eigen::Index r = 0; r < rows; ++r) {
        for (int h = 0; h < 24; ++h) {
            for (std::size_t k = 0; k < ens.paths.size(); ++k) cell[k] = ens.paths[k](r, h);
            std::sort(cell.begin(), cell.end());
            for (int q : {10, 25, 75, 90})
                stats.percentiles[q](r, h) = percentile_sorted(cell, q);
        }
    }
    return stats;
}

Eigen::MatrixXd ensemble_mean(const LangevinEnsemble& ens) {
    if (ens.paths.empty()) throw std::invalid_argument("empty ensemble");
    Eigen::MatrixXd mean = Eigen::MatrixXd::Zero(ens.paths[0].rows(), 24);
    for (const auto& path : ens.paths) mean += path;
    return mean / static_cast<double>(ens.paths.size());
}

}  // namespace epf
