#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "epf/residual.hpp"

namespace epf::node {

constexpr int kDim = 24;
constexpr int kHidden = 96;

// Weights of the residual vector field f(y) = w2 * tanh(w1 * y + b1) + b2.
struct NodeParams {
    Eigen::MatrixXd w1{kHidden, kDim};
    Eigen::VectorXd b1{kHidden};
    Eigen::MatrixXd w2{kDim, kHidden};
    Eigen::VectorXd b2{kDim};

    static NodeParams zeros();
    // Uniform (-1/sqrt(fan_in), +1/sqrt(fan_in)) weights, zero biases.
    static NodeParams init(std::uint64_t seed);

    void set_zero();
    void validate() const;
};

struct TrainConfig {
    int epochs = 2000;
    int batch_size = 32;
    double learning_rate = 1e-3;
    double rms_decay = 0.99;
    double rms_epsilon = 1e-8;
    int solver_steps_per_day = 10;
    std::uint64_t seed = 0;

    void validate() const;
};

// State sampled at integer days t0, t0+1, ..., t0+p.
struct Trajectory {
    double t0 = 0.0;
    Eigen::MatrixXd values;  // (p+1) x 24

    int horizon() const { return static_cast<int>(values.rows()) - 1; }
};

Eigen::VectorXd vector_field(const NodeParams& params, const Eigen::VectorXd& y);

// Fixed-step RK4; (t1-t0)*steps_per_day uniform steps, sampled at integer days.
Trajectory ode_solve(const NodeParams& params, const Eigen::VectorXd& y0, double t0, double t1,
                     int steps_per_day);

// Mean absolute error over all (day >= 1, hour) cells; the shared initial
// condition cell is excluded.
double mae_loss(const Trajectory& pred, const Trajectory& target);

// Exact reverse-mode gradient of mae_loss(ode_solve(params, y0, ...), target)
// through the unrolled RK4 steps. MAE subgradient at zero is 0.
NodeParams grad(const NodeParams& params, const Eigen::VectorXd& y0, const Trajectory& target,
                int steps_per_day);

struct TrainResult {
    NodeParams params;
    std::vector<double> loss_curve;  // per-epoch mean training MAE
};

// Mini-batch RMSprop on the MAE trajectory loss, integrating from Y0 = 0.
TrainResult train(const ResidualDataset& dataset, const TrainConfig& config);

// Terminal residual prediction: integrates from Y0 = 0 through day p+q.
Eigen::VectorXd predict(const NodeParams& params, int p, int q, int steps_per_day);

}  // namespace epf::node
