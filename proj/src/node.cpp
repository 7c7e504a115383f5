#include "epf/node.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

#include "epf/rng.hpp"

namespace epf::node {

namespace {

Eigen::VectorXd hidden_activation(const NodeParams& p, const Eigen::VectorXd& y) {
    return ((p.w1 * y + p.b1).array().tanh()).matrix();
}

// One f evaluation with the hidden activation kept for the backward pass.
struct StageRecord {
    Eigen::VectorXd y;  // input state
    Eigen::VectorXd a;  // tanh activations
};

Eigen::VectorXd eval_stage(const NodeParams& p, const Eigen::VectorXd& y, StageRecord& rec) {
    rec.y = y;
    rec.a = hidden_activation(p, y);
    return p.w2 * rec.a + p.b2;
}

struct StepTape {
    StageRecord s1, s2, s3, s4;
};

// Accumulates d(out)/d(params) for one f evaluation and returns the input
// adjoint w1^T u.
Eigen::VectorXd field_vjp(const NodeParams& p, const StageRecord& rec, const Eigen::VectorXd& v,
                          NodeParams& g) {
    g.w2.noalias() += v * rec.a.transpose();
    g.b2 += v;
    const Eigen::VectorXd u =
        (p.w2.transpose() * v).cwiseProduct((1.0 - rec.a.array().square()).matrix());
    g.w1.noalias() += u * rec.y.transpose();
    g.b1 += u;
    return p.w1.transpose() * u;
}

// RK4 forward over `total_steps` uniform steps of size h, sampling the state
// every steps_per_day steps. The tape, when given, records all stage inputs.
Eigen::MatrixXd rk4_forward(const NodeParams& p, const Eigen::VectorXd& y0, int days,
                            int steps_per_day, std::vector<StepTape>* tape) {
    const double h = 1.0 / steps_per_day;
    Eigen::MatrixXd out(days + 1, kDim);
    Eigen::VectorXd y = y0;
    out.row(0) = y.transpose();
    if (tape) tape->resize(static_cast<std::size_t>(days) * steps_per_day);
    StepTape scratch;
    for (int s = 0; s < days * steps_per_day; ++s) {
        StepTape& t = tape ? (*tape)[static_cast<std::size_t>(s)] : scratch;
        const Eigen::VectorXd k1 = eval_stage(p, y, t.s1);
        const Eigen::VectorXd k2 = eval_stage(p, y + 0.5 * h * k1, t.s2);
        const Eigen::VectorXd k3 = eval_stage(p, y + 0.5 * h * k2, t.s3);
        const Eigen::VectorXd k4 = eval_stage(p, y + h * k3, t.s4);
        y += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if (!y.allFinite())
            throw std::runtime_error("non-finite state at solver step " + std::to_string(s + 1));
        if ((s + 1) % steps_per_day == 0) out.row((s + 1) / steps_per_day) = y.transpose();
    }
    return out;
}

// Reverse sweep through the unrolled RK4 steps. day_adjoints[d] is dL/dy at
// integer day d (d >= 1); the y0 adjoint is discarded.
NodeParams rk4_backward(const NodeParams& p, const std::vector<StepTape>& tape, int steps_per_day,
                        const std::vector<Eigen::VectorXd>& day_adjoints) {
    const double h = 1.0 / steps_per_day;
    NodeParams g = NodeParams::zeros();
    Eigen::VectorXd adj = Eigen::VectorXd::Zero(kDim);
    for (int s = static_cast<int>(tape.size()) - 1; s >= 0; --s) {
        if ((s + 1) % steps_per_day == 0) adj += day_adjoints[(s + 1) / steps_per_day];
        const StepTape& t = tape[static_cast<std::size_t>(s)];
        const Eigen::VectorXd v4 = field_vjp(p, t.s4, (h / 6.0) * adj, g);
        const Eigen::VectorXd v3 = field_vjp(p, t.s3, (h / 3.0) * adj + h * v4, g);
        const Eigen::VectorXd v2 = field_vjp(p, t.s2, (h / 3.0) * adj + 0.5 * h * v3, g);
        const Eigen::VectorXd v1 = field_vjp(p, t.s1, (h / 6.0) * adj + 0.5 * h * v2, g);
        adj += v1 + v2 + v3 + v4;
    }
    return g;
}

double sign0(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

template <typename F>
void for_each_block(NodeParams& a, NodeParams& b, const NodeParams& c, F&& f) {
    f(a.w1, b.w1, c.w1);
    f(a.b1, b.b1, c.b1);
    f(a.w2, b.w2, c.w2);
    f(a.b2, b.b2, c.b2);
}

}  // namespace

NodeParams NodeParams::zeros() {
    NodeParams p;
    p.set_zero();
    return p;
}

void NodeParams::set_zero() {
    w1.setZero(kHidden, kDim);
    b1.setZero(kHidden);
    w2.setZero(kDim, kHidden);
    b2.setZero(kDim);
}

NodeParams NodeParams::init(std::uint64_t seed) {
    NodeParams p = zeros();
    rng::Stream stream(seed, /*stream=*/0);
    auto fill = [&](Eigen::MatrixXd& w, int fan_in) {
        const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
        for (Eigen::Index r = 0; r < w.rows(); ++r)
            for (Eigen::Index c = 0; c < w.cols(); ++c)
                w(r, c) = bound * (2.0 * stream.next_u01() - 1.0);
    };
    fill(p.w1, kDim);
    fill(p.w2, kHidden);
    return p;
}

void NodeParams::validate() const {
    if (w1.rows() != kHidden || w1.cols() != kDim || b1.size() != kHidden ||
        w2.rows() != kDim || w2.cols() != kHidden || b2.size() != kDim)
        throw std::invalid_argument("NodeParams shapes must be 96x24 / 96 / 24x96 / 24");
    if (!w1.allFinite() || !b1.allFinite() || !w2.allFinite() || !b2.allFinite())
        throw std::invalid_argument("NodeParams entries must be finite");
}

void TrainConfig::validate() const {
    if (epochs < 1) throw std::invalid_argument("epochs must be >= 1");
    if (batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");
    if (learning_rate <= 0.0) throw std::invalid_argument("learning_rate must be > 0");
    if (rms_decay <= 0.0 || rms_decay >= 1.0) throw std::invalid_argument("rms_decay must be in (0,1)");
    if (rms_epsilon <= 0.0) throw std::invalid_argument("rms_epsilon must be > 0");
    if (solver_steps_per_day < 1) throw std::invalid_argument("solver_steps_per_day must be >= 1");
}

Eigen::VectorXd vector_field(const NodeParams& params, const Eigen::VectorXd& y) {
    if (y.size() != kDim || !y.allFinite())
        throw std::invalid_argument("vector_field input must be a finite 24-vector");
    return params.w2 * hidden_activation(params, y) + params.b2;
}

Trajectory ode_solve(const NodeParams& params, const Eigen::VectorXd& y0, double t0, double t1,
                     int steps_per_day) {
    if (steps_per_day < 1) throw std::invalid_argument("steps_per_day must be >= 1");
    if (t1 <= t0 || t0 != std::floor(t0) || t1 != std::floor(t1))
        throw std::invalid_argument("t0 and t1 must be integer days with t1 > t0");
    if (y0.size() != kDim) throw std::invalid_argument("y0 must be a 24-vector");
    Trajectory traj;
    traj.t0 = t0;
    traj.values = rk4_forward(params, y0, static_cast<int>(t1 - t0), steps_per_day, nullptr);
    return traj;
}

double mae_loss(const Trajectory& pred, const Trajectory& target) {
    if (pred.t0 != target.t0 || pred.values.rows() != target.values.rows())
        throw std::invalid_argument("trajectory grids do not match");
    const int p = pred.horizon();
    if (p < 1) throw std::invalid_argument("trajectory must span at least one day");
    return (pred.values.bottomRows(p) - target.values.bottomRows(p)).cwiseAbs().sum() /
           static_cast<double>(p * kDim);
}

NodeParams grad(const NodeParams& params, const Eigen::VectorXd& y0, const Trajectory& target,
                int steps_per_day) {
    const int p = target.horizon();
    if (p < 1) throw std::invalid_argument("target must span at least one day");
    std::vector<StepTape> tape;
    const Eigen::MatrixXd pred = rk4_forward(params, y0, p, steps_per_day, &tape);
    std::vector<Eigen::VectorXd> day_adjoints(static_cast<std::size_t>(p) + 1);
    const double scale = 1.0 / static_cast<double>(p * kDim);
    for (int d = 1; d <= p; ++d) {
        Eigen::VectorXd a(kDim);
        for (int h = 0; h < kDim; ++h)
            a(h) = scale * sign0(pred(d, h) - target.values(d, h));
        day_adjoints[static_cast<std::size_t>(d)] = a;
    }
    return rk4_backward(params, tape, steps_per_day, day_adjoints);
}

TrainResult train(const ResidualDataset& dataset, const TrainConfig& config) {
    config.validate();
    if (dataset.n < 1 || dataset.residuals.empty())
        throw std::invalid_argument("empty residual dataset");
    const int p = dataset.p;
    if (p < 1) throw std::invalid_argument("dataset horizon must be >= 1");
    for (const auto& r : dataset.residuals)
        if (r.rows() != p + 1 || r.cols() != kDim)
            throw std::invalid_argument("inconsistent residual trajectory shape");

    TrainResult result;
    result.params = NodeParams::init(config.seed);
    NodeParams rms = NodeParams::zeros();
    rng::Stream shuffle(config.seed, /*stream=*/1);

    const int n = static_cast<int>(dataset.residuals.size());
    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    const Eigen::VectorXd y0 = Eigen::VectorXd::Zero(kDim);
    const double cell_scale = 1.0 / static_cast<double>(p * kDim);

    result.loss_curve.reserve(static_cast<std::size_t>(config.epochs));
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        // Seeded Fisher-Yates; identical config gives identical batches.
        for (int i = n - 1; i > 0; --i) {
            const auto j = static_cast<int>(shuffle.next_below(static_cast<std::uint64_t>(i) + 1));
            std::swap(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(j)]);
        }
        double epoch_abs_sum = 0.0;
        for (int start = 0; start < n; start += config.batch_size) {
            const int bsz = std::min(config.batch_size, n - start);
            // Every residual trajectory shares the initial condition Y0 = 0,
            // so the batch needs a single forward integration; the batch-mean
            // gradient enters through the averaged loss adjoint.
            std::vector<StepTape> tape;
            const Eigen::MatrixXd pred =
                rk4_forward(result.params, y0, p, config.solver_steps_per_day, &tape);
            std::vector<Eigen::VectorXd> day_adjoints(static_cast<std::size_t>(p) + 1,
                                                      Eigen::VectorXd::Zero(kDim));
            for (int b = 0; b < bsz; ++b) {
                const Eigen::MatrixXd& target =
                    dataset.residuals[static_cast<std::size_t>(order[start + b])];
                for (int d = 1; d <= p; ++d)
                    for (int h = 0; h < kDim; ++h) {
                        const double diff = pred(d, h) - target(d, h);
                        epoch_abs_sum += std::abs(diff);
                        day_adjoints[static_cast<std::size_t>(d)](h) +=
                            cell_scale / bsz * sign0(diff);
                    }
            }
            NodeParams g = rk4_backward(result.params, tape, config.solver_steps_per_day,
                                        day_adjoints);
            for_each_block(result.params, rms, g, [&](auto& theta, auto& v, const auto& gb) {
                v = config.rms_decay * v + (1.0 - config.rms_decay) * gb.cwiseProduct(gb);
                theta.array() -= config.learning_rate * gb.array() /
                                 (v.array() + config.rms_epsilon).sqrt();
            });
        }
        const double epoch_loss = epoch_abs_sum * cell_scale / n;
        if (!std::isfinite(epoch_loss))
            throw std::runtime_error("training diverged at epoch " + std::to_string(epoch + 1));
        result.loss_curve.push_back(epoch_loss);
    }
    return result;
}

Eigen::VectorXd predict(const NodeParams& params, int p, int q, int steps_per_day) {
    if (q < 1) throw std::invalid_argument("q must be >= 1");
    if (p < 0) throw std::invalid_argument("p must be >= 0");
    const Eigen::MatrixXd traj = rk4_forward(params, Eigen::VectorXd::Zero(kDim), p + q,
                                             steps_per_day, nullptr);
    return traj.row(p + q).transpose();
}

}  // namespace epf::node
