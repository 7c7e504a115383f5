#include "epf/io.hpp"

#include <fstream>
#include <json.hpp>
#include <stdexcept>

namespace epf::io {

using nlohmann::json;

namespace {

json to_json(const Eigen::MatrixXd& m) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        rows.push_back(std::move(row));
    }
    return rows;
}

Eigen::MatrixXd matrix_from_json(const json& j) {
    if (!j.is_array() || j.empty()) throw std::runtime_error("expected non-empty matrix");
    const auto rows = static_cast<Eigen::Index>(j.size());
    const auto cols = static_cast<Eigen::Index>(j[0].size());
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
        if (static_cast<Eigen::Index>(j[r].size()) != cols)
            throw std::runtime_error("ragged matrix rows");
        for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = j[r][c].get<double>();
    }
    return m;
}

Eigen::VectorXd vector_from_json(const json& j, Eigen::Index expect) {
    if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != expect)
        throw std::runtime_error("expected vector of length " + std::to_string(expect));
    Eigen::VectorXd v(expect);
    for (Eigen::Index i = 0; i < expect; ++i) v(i) = j[i].get<double>();
    return v;
}

json dump_field(const DriftField& f) {
    json mask = json::array();
    for (char c : f.valid) mask.push_back(c != 0);
    return {{"grid", f.grid}, {"values", f.values}, {"mask", mask}};
}

DriftField parse_field(int hour, const json& j) {
    DriftField f;
    f.hour = hour;
    f.grid = j.at("grid").get<std::vector<double>>();
    f.values = j.at("values").get<std::vector<double>>();
    for (bool b : j.at("mask").get<std::vector<bool>>()) f.valid.push_back(b ? 1 : 0);
    if (f.grid.size() != f.values.size() || f.grid.size() != f.valid.size())
        throw std::runtime_error("drift field arrays disagree in length");
    return f;
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << text;
    if (!out) throw std::runtime_error("write failed: " + path);
}

json read_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    return json::parse(in);
}

}  // namespace

void save_model(const std::string& path, const LangevinModel& model,
                const ModelProvenance& prov) {
    model.validate();
    json hours;
    for (int h = 1; h <= 24; ++h) hours[std::to_string(h)] = dump_field(model.drift_fields[h - 1]);
    const json j = {
        {"schema_version", 1},
        {"hours", hours},
        {"diffusion",
         {{"d2", to_json(model.diffusion.d2)},
          {"sigma", to_json(model.diffusion.sigma)},
          {"clamped_eigenvalues", model.diffusion.clamped_eigenvalues}}},
        {"provenance",
         {{"sample_count", prov.sample_count},
          {"bandwidth_d2", prov.bandwidth_d2},
          {"bandwidth_d3", prov.bandwidth_d3},
          {"data_min", prov.data_min},
          {"data_max", prov.data_max}}},
    };
    write_text(path, j.dump(2));
}

std::pair<LangevinModel, ModelProvenance> load_model(const std::string& path) {
    const json j = read_json(path);
    LangevinModel model;
    for (int h = 1; h <= 24; ++h)
        model.drift_fields[h - 1] = parse_field(h, j.at("hours").at(std::to_string(h)));
    const json& d = j.at("diffusion");
    model.diffusion.d2 = matrix_from_json(d.at("d2"));
    model.diffusion.sigma = matrix_from_json(d.at("sigma"));
    model.diffusion.clamped_eigenvalues = d.at("clamped_eigenvalues").get<int>();
    ModelProvenance prov;
    const json& p = j.at("provenance");
    prov.sample_count = p.at("sample_count").get<long>();
    prov.bandwidth_d2 = p.at("bandwidth_d2").get<double>();
    prov.bandwidth_d3 = p.at("bandwidth_d3").get<double>();
    prov.data_min = p.at("data_min").get<double>();
    prov.data_max = p.at("data_max").get<double>();
    model.validate();
    return {std::move(model), prov};
}

void save_node_params(const std::string& path, const node::NodeParams& params) {
    params.validate();
    const json j = {{"schema_version", 1},
                    {"w1", to_json(params.w1)},
                    {"b1", std::vector<double>(params.b1.data(), params.b1.data() + params.b1.size())},
                    {"w2", to_json(params.w2)},
                    {"b2", std::vector<double>(params.b2.data(), params.b2.data() + params.b2.size())}};
    write_text(path, j.dump(2));
}

node::NodeParams load_node_params(const std::string& path) {
    const json j = read_json(path);
    node::NodeParams p;
    p.w1 = matrix_from_json(j.at("w1"));
    p.b1 = vector_from_json(j.at("b1"), node::kHidden);
    p.w2 = matrix_from_json(j.at("w2"));
    p.b2 = vector_from_json(j.at("b2"), node::kDim);
    p.validate();
    return p;
}

void save_loss_curve(const std::string& path, const std::vector<double>& losses) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "epoch,loss\n";
    out.precision(17);
    for (std::size_t i = 0; i < losses.size(); ++i) out << i + 1 << ',' << losses[i] << '\n';
}

SyntheticSpec load_synthetic_spec(const std::string& path) {
    const json j = read_json(path);
    SyntheticSpec spec;
    auto vec24 = [&](const char* key, double fallback, bool has_fallback) -> Eigen::VectorXd {
        if (!j.contains(key)) {
            if (!has_fallback) throw std::runtime_error(std::string("missing field ") + key);
            return Eigen::VectorXd::Constant(24, fallback);
        }
        if (j[key].is_number()) return Eigen::VectorXd::Constant(24, j[key].get<double>());
        return vector_from_json(j[key], 24);
    };
    spec.theta = vec24("theta", 0, false);
    spec.m = vec24("m", 0, false);
    if (j.at("sigma").is_number())
        spec.sigma = j["sigma"].get<double>() * Eigen::MatrixXd::Identity(24, 24);
    else
        spec.sigma = matrix_from_json(j["sigma"]);
    spec.trend_slope = vec24("trend_slope", 0.0, true);
    if (j.contains("vol_shift"))
        spec.vol_shift = VolShift{j["vol_shift"].at("start_day").get<std::int64_t>(),
                                  j["vol_shift"].at("factor").get<double>()};
    if (j.contains("x0")) spec.x0 = vector_from_json(j["x0"], 24);
    spec.num_days = j.at("num_days").get<std::int64_t>();
    spec.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("start_date")) {
        const auto d = Date::parse(j["start_date"].get<std::string>());
        if (!d) throw std::runtime_error("invalid start_date");
        spec.start_date = *d;
    }
    spec.validate();
    return spec;
}

ScenarioConfig load_scenario_config(const std::string& path) {
    const json j = read_json(path);
    ScenarioConfig cfg;
    const auto d = Date::parse(j.at("initial_date").get<std::string>());
    if (!d) throw std::runtime_error("invalid initial_date");
    cfg.initial_date = *d;
    cfg.p = j.value("p", cfg.p);
    cfg.q = j.value("q", cfg.q);
    cfg.n = j.value("n", cfg.n);
    cfg.seed = j.value("seed", cfg.seed);
    if (j.contains("train")) {
        const json& t = j["train"];
        cfg.train.epochs = t.value("epochs", cfg.train.epochs);
        cfg.train.batch_size = t.value("batch_size", cfg.train.batch_size);
        cfg.train.learning_rate = t.value("learning_rate", cfg.train.learning_rate);
        cfg.train.rms_decay = t.value("rms_decay", cfg.train.rms_decay);
        cfg.train.rms_epsilon = t.value("rms_epsilon", cfg.train.rms_epsilon);
        cfg.train.solver_steps_per_day = t.value("solver_steps_per_day", cfg.train.solver_steps_per_day);
        cfg.train.seed = t.value("seed", cfg.train.seed);
    } else {
        cfg.train.seed = cfg.seed;
    }
    cfg.validate();
    cfg.train.validate();
    return cfg;
}

void save_prices_csv(const std::string& path, const DailyPriceMatrix& matrix) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "date,hour,price\n";
    out.precision(17);
    for (std::size_t d = 0; d < matrix.num_days(); ++d)
        for (int h = 0; h < 24; ++h)
            out << matrix.days[d].iso() << ',' << h + 1 << ','
                << matrix.values(static_cast<Eigen::Index>(d), h) << '\n';
}

void save_ensemble_csv(const std::string& path, const LangevinEnsemble& ens) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "path,day,hour,value\n";
    out.precision(17);
    for (std::size_t k = 0; k < ens.paths.size(); ++k)
        for (Eigen::Index d = 0; d < ens.paths[k].rows(); ++d)
            for (int h = 0; h < 24; ++h)
                out << k << ',' << d << ',' << h + 1 << ',' << ens.paths[k](d, h) << '\n';
}

void save_ensemble_stats(const std::string& path, const EnsembleStats& stats) {
    json j;
    j["mean"] = to_json(stats.mean);
    for (const auto& [q, m] : stats.percentiles) j["percentiles"][std::to_string(q)] = to_json(m);
    write_text(path, j.dump(2));
}

void save_scenario_csv(const std::string& path, const ScenarioResult& result,
                       const ScenarioConfig& cfg) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "method,day,hour,forecast,truth\n";
    out.precision(17);
    for (const auto& [tag, fs] : result.methods)
        for (Eigen::Index r = 0; r < fs.mean_forecast.rows(); ++r)
            for (int h = 0; h < 24; ++h)
                out << tag << ',' << cfg.p + 1 + r << ',' << h + 1 << ','
                    << fs.mean_forecast(r, h) << ',' << result.truth(r, h) << '\n';
}

void save_scenario_summary(const std::string& path, const ScenarioResult& result,
                           const ScenarioConfig& cfg) {
    json methods;
    for (const auto& [tag, fs] : result.methods) {
        const ErrorSample sample = abs_errors(result.truth, fs.mean_forecast, tag);
        methods[tag] = {{"mae", mae(sample)}};
    }
    const json j = {{"initial_date", cfg.initial_date.iso()},
                    {"p", cfg.p},
                    {"q", cfg.q},
                    {"n", cfg.n},
                    {"seed", cfg.seed},
                    {"final_training_loss",
                     result.node_training.loss_curve.empty()
                         ? nullptr
                         : json(result.node_training.loss_curve.back())},
                    {"methods", methods}};
    write_text(path, j.dump(2));
}

void save_report(const std::string& path, const BenchmarkReport& report) {
    json j;
    for (const auto& [scenario, methods] : report)
        for (const auto& [tag, rep] : methods)
            j[scenario][tag] = {{"mae", rep.mae},
                                {"iqr", {rep.iqr.first, rep.iqr.second}},
                                {"histogram", {{"edges", rep.hist.edges}, {"counts", rep.hist.counts}}}};
    write_text(path, j.dump(2));
}

BenchmarkReport load_report(const std::string& path) {
    const json j = read_json(path);
    BenchmarkReport report;
    for (const auto& [scenario, methods] : j.items())
        for (const auto& [tag, rep] : methods.items()) {
            MethodReport m;
            m.mae = rep.at("mae").get<double>();
            m.iqr = {rep.at("iqr")[0].get<double>(), rep.at("iqr")[1].get<double>()};
            m.hist.edges = rep.at("histogram").at("edges").get<std::vector<double>>();
            m.hist.counts = rep.at("histogram").at("counts").get<std::vector<long>>();
            report[scenario][tag] = std::move(m);
        }
    return report;
}

}  // namespace epf::io
