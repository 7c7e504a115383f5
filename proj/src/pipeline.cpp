#include "epf/pipeline.hpp"

#include <stdexcept>
#include <utility>

namespace epf {

namespace {

// Rows p+1..p+q of every path, with the shared correction added. The Eq-style
// decomposition S_hat = X + Y is re-verified cell-exactly after assembly.
ForecastSet combine(const LangevinEnsemble& ens, int p, int q, const Eigen::MatrixXd& correction,
                    std::string tag) {
    if (ens.horizon() < p + q) throw std::invalid_argument("ensemble horizon too short");
    ForecastSet out;
    out.method_tag = std::move(tag);
    out.forecasts.reserve(ens.paths.size());
    out.mean_forecast = Eigen::MatrixXd::Zero(q, 24);
    for (const auto& path : ens.paths) {
        Eigen::MatrixXd f = path.middleRows(p + 1, q) + correction;
        out.mean_forecast += f;
        out.forecasts.push_back(std::move(f));
    }
    out.mean_forecast /= static_cast<double>(ens.paths.size());
    for (std::size_t k = 0; k < ens.paths.size(); ++k) {
        const Eigen::MatrixXd expect = ens.paths[k].middleRows(p + 1, q) + correction;
        if (!out.forecasts[k].cwiseEqual(expect).all())
            throw std::logic_error("forecast decomposition X + Y violated");
    }
    return out;
}

Eigen::MatrixXd node_correction(const node::NodeParams& params, const ScenarioConfig& cfg) {
    const node::Trajectory y = node::ode_solve(params, Eigen::VectorXd::Zero(24), 0.0,
                                               static_cast<double>(cfg.p + cfg.q),
                                               cfg.train.solver_steps_per_day);
    return y.values.middleRows(cfg.p + 1, cfg.q);
}

LangevinEnsemble slice_ensemble(const LangevinEnsemble& ens, int days) {
    LangevinEnsemble out;
    out.t0 = ens.t0;
    out.seed = ens.seed;
    out.paths.reserve(ens.paths.size());
    for (const auto& path : ens.paths) out.paths.push_back(path.topRows(days + 1));
    return out;
}

}  // namespace

void ScenarioConfig::validate() const {
    if (p < 1 || q < 1 || n < 1) throw std::invalid_argument("need p >= 1, q >= 1, n >= 1");
}

ResidualDataset build_residuals(const DailyPriceMatrix& S, const LangevinEnsemble& ens) {
    if (ens.paths.empty()) throw std::invalid_argument("empty ensemble");
    const int p = ens.horizon();
    const Eigen::Index r0 = S.row_of(ens.t0);
    if (r0 + p >= S.values.rows())
        throw std::invalid_argument("ensemble horizon exceeds observed data");
    const Eigen::MatrixXd obs = S.values.middleRows(r0, p + 1);
    for (const auto& path : ens.paths)
        if (!path.row(0).cwiseEqual(obs.row(0)).all())
            throw std::invalid_argument("ensemble initial condition does not match S at t0");
    ResidualDataset out;
    out.t0 = ens.t0;
    out.p = p;
    out.n = static_cast<int>(ens.paths.size());
    out.residuals.reserve(ens.paths.size());
    for (const auto& path : ens.paths) out.residuals.push_back(obs - path);
    return out;
}

ForecastSet forecast_le_only(const DailyPriceMatrix& S, const LangevinModel& model,
                             const ScenarioConfig& cfg) {
    cfg.validate();
    const Eigen::VectorXd x0 = S.values.row(S.row_of(cfg.initial_date)).transpose();
    const LangevinEnsemble ens =
        simulate(model, x0, cfg.p + cfg.q, cfg.n, cfg.seed, cfg.initial_date);
    return combine(ens, cfg.p, cfg.q, Eigen::MatrixXd::Zero(cfg.q, 24), "le_only");
}

ForecastSet forecast_le_node(const DailyPriceMatrix& S, const LangevinModel& model,
                             const node::NodeParams& params, const ScenarioConfig& cfg) {
    cfg.validate();
    const Eigen::VectorXd x0 = S.values.row(S.row_of(cfg.initial_date)).transpose();
    const LangevinEnsemble ens =
        simulate(model, x0, cfg.p + cfg.q, cfg.n, cfg.seed, cfg.initial_date);
    return combine(ens, cfg.p, cfg.q, node_correction(params, cfg), "le_node");
}

ForecastSet naive_one_day(const DailyPriceMatrix& S, const LangevinEnsemble& ens,
                          const ScenarioConfig& cfg) {
    cfg.validate();
    if (cfg.q != 1) throw std::invalid_argument("naive corrections are defined for q = 1 only");
    const Eigen::Index r0 = S.row_of(cfg.initial_date);
    if (r0 + cfg.p - 1 < 0 || r0 + cfg.p >= S.values.rows())
        throw std::invalid_argument("insufficient history for the one-day difference");
    const Eigen::MatrixXd y = S.values.row(r0 + cfg.p) - S.values.row(r0 + cfg.p - 1);
    return combine(ens, cfg.p, 1, y, "naive_1day");
}

ForecastSet naive_initial_condition(const DailyPriceMatrix& S, const LangevinEnsemble& ens,
                                    const ScenarioConfig& cfg) {
    cfg.validate();
    if (cfg.q != 1) throw std::invalid_argument("naive corrections are defined for q = 1 only");
    const Eigen::Index r0 = S.row_of(cfg.initial_date);
    if (r0 + cfg.p >= S.values.rows())
        throw std::invalid_argument("insufficient history for the initial-condition difference");
    const Eigen::MatrixXd y = S.values.row(r0 + cfg.p) - S.values.row(r0);
    return combine(ens, cfg.p, 1, y, "naive_init");
}

ScenarioResult run_scenario(const ScenarioConfig& cfg, const DailyPriceMatrix& data,
                            const LangevinModel& model) {
    cfg.validate();
    const Eigen::Index r0 = data.row_of(cfg.initial_date);
    if (r0 + cfg.p + cfg.q >= data.values.rows())
        throw std::invalid_argument("scenario horizon exceeds observed data");

    const Eigen::VectorXd x0 = data.values.row(r0).transpose();
    const LangevinEnsemble ens =
        simulate(model, x0, cfg.p + cfg.q, cfg.n, cfg.seed, cfg.initial_date);

    ScenarioResult result;
    result.residuals = build_residuals(data, slice_ensemble(ens, cfg.p));
    result.node_training = node::train(result.residuals, cfg.train);
    result.truth = data.values.middleRows(r0 + cfg.p + 1, cfg.q);

    result.methods.emplace("le_only",
                           combine(ens, cfg.p, cfg.q, Eigen::MatrixXd::Zero(cfg.q, 24), "le_only"));
    result.methods.emplace(
        "le_node", combine(ens, cfg.p, cfg.q, node_correction(result.node_training.params, cfg),
                           "le_node"));
    if (cfg.q == 1) {
        result.methods.emplace("naive_1day", naive_one_day(data, ens, cfg));
        result.methods.emplace("naive_init", naive_initial_condition(data, ens, cfg));
    }
    return result;
}

}  // namespace epf
