#pragma once

#include <Eigen/Dense>
#include <vector>

#include "epf/dates.hpp"

namespace epf {

// Observed-minus-simulated price trajectories used to train the residual
// model. residuals[k](d, h) = S_{t0+d}^{h+1} - X_{t0+d}^{h+1,(k)}; row 0 is
// identically zero because every path starts at the observed price.
struct ResidualDataset {
    std::vector<Eigen::MatrixXd> residuals;  // n matrices of shape (p+1) x 24
    Date t0;
    int p = 0;
    int n = 0;
};

}  // namespace epf
