#pragma once

#include <string>

#include "epf/bench.hpp"
#include "epf/langevin.hpp"
#include "epf/market_data.hpp"
#include "epf/node.hpp"
#include "epf/pipeline.hpp"

namespace epf::io {

// Fit metadata stored alongside the model for traceability.
struct ModelProvenance {
    long sample_count = 0;     // drift pairs per hour
    double bandwidth_d2 = 0.0;  // Scott factor, d = 2
    double bandwidth_d3 = 0.0;  // Scott factor, d = 3
    double data_min = 0.0;
    double data_max = 0.0;
};

void save_model(const std::string& path, const LangevinModel& model,
                const ModelProvenance& prov);
std::pair<LangevinModel, ModelProvenance> load_model(const std::string& path);

void save_node_params(const std::string& path, const node::NodeParams& params);
node::NodeParams load_node_params(const std::string& path);

void save_loss_curve(const std::string& path, const std::vector<double>& losses);

SyntheticSpec load_synthetic_spec(const std::string& path);
ScenarioConfig load_scenario_config(const std::string& path);

void save_prices_csv(const std::string& path, const DailyPriceMatrix& matrix);

// One row per (path, day, hour) cell.
void save_ensemble_csv(const std::string& path, const LangevinEnsemble& ens);
void save_ensemble_stats(const std::string& path, const EnsembleStats& stats);

// (method, day, hour, forecast, truth) rows plus a JSON summary next to it.
void save_scenario_csv(const std::string& path, const ScenarioResult& result,
                       const ScenarioConfig& cfg);
void save_scenario_summary(const std::string& path, const ScenarioResult& result,
                           const ScenarioConfig& cfg);

void save_report(const std::string& path, const BenchmarkReport& report);
BenchmarkReport load_report(const std::string& path);

}  // namespace epf::io
