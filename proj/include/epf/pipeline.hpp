#pragma once

#include <Eigen/Dense>
#include <map>
#include <string>
#include <vector>

#include "epf/langevin.hpp"
#include "epf/node.hpp"
#include "epf/residual.hpp"

namespace epf {

// Per-path forecasts S_hat = X + Y for days t0+p+1 .. t0+p+q. The Y
// correction is deterministic and shared across paths; the stochastic part
// lives entirely in X.
struct ForecastSet {
    std::vector<Eigen::MatrixXd> forecasts;  // n matrices of shape q x 24
    Eigen::MatrixXd mean_forecast;           // q x 24
    std::string method_tag;                  // le_only | le_node | naive_1day | naive_init
};

struct ScenarioConfig {
    Date initial_date;
    int p = 8;
    int q = 1;
    int n = 1000;
    std::uint64_t seed = 0;
    node::TrainConfig train;

    void validate() const;
};

// Elementwise S - X over the ensemble horizon; requires the ensemble initial
// condition to equal the observed row at t0.
ResidualDataset build_residuals(const DailyPriceMatrix& S, const LangevinEnsemble& ens);

ForecastSet forecast_le_only(const DailyPriceMatrix& S, const LangevinModel& model,
                             const ScenarioConfig& cfg);

// Simulates the LE through day p+q and adds the trained residual correction
// Y_{t0+p+k} (k = 1..q) to every path.
ForecastSet forecast_le_node(const DailyPriceMatrix& S, const LangevinModel& model,
                             const node::NodeParams& params, const ScenarioConfig& cfg);

// Y_{t0+p+1} = S_{t0+p} - S_{t0+p-1}; defined for q = 1 only.
ForecastSet naive_one_day(const DailyPriceMatrix& S, const LangevinEnsemble& ens,
                          const ScenarioConfig& cfg);

// Y_{t0+p+1} = S_{t0+p} - S_{t0}; defined for q = 1 only.
ForecastSet naive_initial_condition(const DailyPriceMatrix& S, const LangevinEnsemble& ens,
                                    const ScenarioConfig& cfg);

struct ScenarioResult {
    std::map<std::string, ForecastSet> methods;
    Eigen::MatrixXd truth;  // q x 24, observed prices at days t0+p+1 .. t0+p+q
    ResidualDataset residuals;
    node::TrainResult node_training;
};

// Full validation procedure for one scenario: simulate the ensemble through
// p+q days, train the residual model on days 0..p of the same ensemble, then
// produce LE-only, LE+NODE and (for q = 1) both naive forecasts.
ScenarioResult run_scenario(const ScenarioConfig& cfg, const DailyPriceMatrix& data,
                            const LangevinModel& model);

}  // namespace epf
