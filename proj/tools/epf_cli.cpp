#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "epf/io.hpp"

namespace fs = std::filesystem;

namespace {

epf::DailyPriceMatrix load_matrix(const std::string& path) {
    return epf::to_daily_matrix(epf::load_hourly_csv(path));
}

int cmd_synth(const std::string& spec_path, const std::string& out) {
    const epf::SyntheticSpec spec = epf::io::load_synthetic_spec(spec_path);
    epf::io::save_prices_csv(out, epf::generate_synthetic(spec));
    std::cout << "wrote " << out << " (" << spec.num_days << " days)\n";
    return 0;
}

int cmd_fit(const std::string& data_path, const std::string& out, int grid_size, bool raw_scott) {
    const epf::DailyPriceMatrix matrix = load_matrix(data_path);
    epf::DriftEstimationOptions opts;
    opts.grid_size = grid_size;
    opts.standardize = !raw_scott;
    const epf::LangevinModel model = epf::fit_langevin_model(matrix, opts);
    epf::io::ModelProvenance prov;
    prov.sample_count = static_cast<long>(matrix.num_days()) - 1;
    prov.bandwidth_d2 = epf::scott_bandwidth(prov.sample_count, 2).h;
    prov.bandwidth_d3 = epf::scott_bandwidth(prov.sample_count, 3).h;
    prov.data_min = matrix.values.minCoeff();
    prov.data_max = matrix.values.maxCoeff();
    epf::io::save_model(out, model, prov);
    std::cout << "fitted " << matrix.num_days() << " days -> " << out
              << " (clamped eigenvalues: " << model.diffusion.clamped_eigenvalues << ")\n";
    return 0;
}

int cmd_simulate(const std::string& model_path, const std::string& data_path,
                 const std::string& init, int days, int paths, std::uint64_t seed,
                 const std::string& out_dir) {
    const auto [model, prov] = epf::io::load_model(model_path);
    const epf::DailyPriceMatrix matrix = load_matrix(data_path);
    const auto date = epf::Date::parse(init);
    if (!date) throw std::runtime_error("invalid --init date");
    const Eigen::VectorXd x0 = matrix.values.row(matrix.row_of(*date)).transpose();
    const epf::LangevinEnsemble ens = epf::simulate(model, x0, days, paths, seed, *date);
    fs::create_directories(out_dir);
    epf::io::save_ensemble_csv((fs::path(out_dir) / "ensemble.csv").string(), ens);
    epf::io::save_ensemble_stats((fs::path(out_dir) / "stats.json").string(),
                                 epf::ensemble_stats(ens));
    std::cout << "simulated " << paths << " paths over " << days << " days from " << init << '\n';
    return 0;
}

int cmd_forecast(const std::string& config_path, const std::string& data_path,
                 const std::string& model_path, const std::string& out_dir) {
    const epf::ScenarioConfig cfg = epf::io::load_scenario_config(config_path);
    const epf::DailyPriceMatrix matrix = load_matrix(data_path);
    const auto [model, prov] = epf::io::load_model(model_path);
    const epf::ScenarioResult result = epf::run_scenario(cfg, matrix, model);
    fs::create_directories(out_dir);
    const std::string stem = "scenario_" + cfg.initial_date.iso() + "_p" + std::to_string(cfg.p);
    epf::io::save_scenario_csv((fs::path(out_dir) / (stem + ".csv")).string(), result, cfg);
    epf::io::save_scenario_summary((fs::path(out_dir) / (stem + ".json")).string(), result, cfg);
    epf::io::save_node_params((fs::path(out_dir) / (stem + "_node.json")).string(),
                              result.node_training.params);
    epf::io::save_loss_curve((fs::path(out_dir) / (stem + "_loss.csv")).string(),
                             result.node_training.loss_curve);
    for (const auto& [tag, fc] : result.methods) {
        const auto sample = epf::abs_errors(result.truth, fc.mean_forecast, tag, stem);
        std::cout << stem << ' ' << tag << " mae=" << epf::mae(sample) << '\n';
    }
    return 0;
}

// Scenario CSVs produced by `forecast`: method,day,hour,forecast,truth.
int cmd_benchmark(const std::string& runs_dir, int bins, const std::string& out) {
    epf::BenchmarkReport report;
    std::map<std::pair<std::string, std::string>, epf::ErrorSample> samples;
    for (const auto& entry : fs::directory_iterator(runs_dir)) {
        if (entry.path().extension() != ".csv") continue;
        std::ifstream in(entry.path());
        std::string line;
        if (!std::getline(in, line)) continue;
        if (line.rfind("method,day,hour,forecast,truth", 0) != 0) continue;
        const std::string scenario = entry.path().stem().string();
        while (std::getline(in, line)) {
            std::istringstream row(line);
            std::string method, f;
            std::getline(row, method, ',');
            std::getline(row, f, ',');  // day
            std::getline(row, f, ',');  // hour
            std::getline(row, f, ',');
            const double forecast = std::stod(f);
            std::getline(row, f, ',');
            const double truth = std::stod(f);
            auto& s = samples[{scenario, method}];
            s.method_tag = method;
            s.scenario = scenario;
            s.errors.push_back(std::abs(truth - forecast));
        }
    }
    if (samples.empty()) throw std::runtime_error("no scenario CSVs found in " + runs_dir);
    for (const auto& [key, sample] : samples)
        report[key.first][key.second] = epf::make_report(sample, bins);
    epf::io::save_report(out, report);
    for (const auto& rank : epf::compare_methods(report)) {
        std::cout << rank.scenario << ':';
        for (const auto& m : rank.methods) std::cout << ' ' << m;
        std::cout << '\n';
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Langevin + neural-ODE electricity price forecasting toolkit"};
    app.require_subcommand(1);

    std::string spec_path, data_path, model_path, config_path, out, init;
    int days = 9, paths = 1000, grid_size = 1000, bins = 20;
    std::uint64_t seed = 0;
    bool raw_scott = false;

    auto* synth = app.add_subcommand("synth", "Generate a synthetic price CSV");
    synth->add_option("--spec", spec_path, "Synthetic spec JSON")->required();
    synth->add_option("--out", out, "Output CSV path")->required();

    auto* fit = app.add_subcommand("fit", "Estimate drift/diffusion from a price CSV");
    fit->add_option("--data", data_path, "Input price CSV")->required();
    fit->add_option("--out", out, "Output model JSON")->required();
    fit->add_option("--grid-size", grid_size, "Drift mesh resolution");
    fit->add_flag("--raw-scott", raw_scott, "Apply Scott's rule in raw coordinates");

    auto* sim = app.add_subcommand("simulate", "Simulate a Langevin ensemble");
    sim->add_option("--model", model_path, "Model JSON")->required();
    sim->add_option("--data", data_path, "Price CSV providing the initial condition")->required();
    sim->add_option("--init", init, "Initial date YYYY-MM-DD")->required();
    sim->add_option("--days", days, "Horizon in days");
    sim->add_option("--paths", paths, "Number of sample paths");
    sim->add_option("--seed", seed, "RNG seed");
    sim->add_option("--out", out, "Output directory")->required();

    auto* fc = app.add_subcommand("forecast", "Run one forecasting scenario");
    fc->add_option("--config", config_path, "Scenario config JSON")->required();
    fc->add_option("--data", data_path, "Price CSV")->required();
    fc->add_option("--model", model_path, "Model JSON")->required();
    fc->add_option("--out", out, "Output directory")->required();

    auto* bench = app.add_subcommand("benchmark", "Aggregate scenario runs into a report");
    bench->add_option("--runs", data_path, "Directory of scenario CSVs")->required();
    bench->add_option("--bins", bins, "Histogram bins");
    bench->add_option("--out", out, "Output report JSON")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*synth) return cmd_synth(spec_path, out);
        if (*fit) return cmd_fit(data_path, out, grid_size, raw_scott);
        if (*sim) return cmd_simulate(model_path, data_path, init, days, paths, seed, out);
        if (*fc) return cmd_forecast(config_path, data_path, model_path, out);
        if (*bench) return cmd_benchmark(data_path, bins, out);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
