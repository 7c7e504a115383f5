#pragma once

#include <Eigen/Dense>
#include <utility>
#include <vector>

#include "epf/market_data.hpp"

namespace epf {

// (x_t, x_{t+1} - x_t) samples for one hour; tau fixed at one day.
struct DriftPairs {
    int hour = 0;  // 1..24
    std::vector<std::pair<double, double>> pairs;
};

struct DiffusionTriple {
    double xi, xj;
    double half_product;  // (1/2) dx_i dx_j
};

struct DiffusionTriples {
    int hour_i = 0, hour_j = 0;
    std::vector<DiffusionTriple> triples;
};

// First Kramers-Moyal coefficient of one hour, tabulated on a price grid.
struct DriftField {
    int hour = 0;
    std::vector<double> grid;    // strictly increasing
    std::vector<double> values;  // currency/day, meaningful where valid
    std::vector<char> valid;     // sufficient marginal density
};

struct DiffusionMatrix {
    Eigen::MatrixXd d2;     // 24x24 symmetric
    Eigen::MatrixXd sigma;  // symmetric PSD, sigma*sigma^T = 2*d2 projected to PSD
    int clamped_eigenvalues = 0;
};

// Scott's rule: h = N^(-1/(d+4)).
struct Bandwidth {
    double h = 0.0;
    int dims = 0;
    long sample_count = 0;
};

DriftPairs build_drift_dataset(const DailyPriceMatrix& matrix, int hour);
DiffusionTriples build_diffusion_dataset(const DailyPriceMatrix& matrix, int hi, int hj);
Bandwidth scott_bandwidth(long N, int d);

struct DriftEstimationOptions {
    int grid_size = 1000;
    // Scale each KDE axis by its sample standard deviation before applying
    // the scalar Scott factor. `false` reproduces the raw-coordinate rule.
    bool standardize = true;
    double density_floor_ratio = 1e-4;
};

// Gaussian-KDE conditional mean E[dx | x] evaluated on a uniform price grid
// spanning the data range +- 3 bandwidths, via normalized Riemann sums over
// the increment axis of a grid_size x grid_size mesh.
DriftField estimate_drift(const DriftPairs& pairs, const DriftEstimationOptions& opts = {});

// State-independent D2: sample mean of the half products.
double estimate_diffusion(const DiffusionTriples& triples);

// Mesh cross-check for estimate_diffusion: mean of the third coordinate under
// the 3-D Gaussian KDE sampled on a 100 x 100 x 500 mesh.
double estimate_diffusion_kde_check(const DiffusionTriples& triples, bool standardize = true);

// Symmetrizes d2, eigendecomposes 2*d2, clamps negative eigenvalues to zero
// and returns the symmetric PSD square root.
DiffusionMatrix assemble_diffusion_matrix(const Eigen::MatrixXd& d2);

// Piecewise-linear interpolation between valid grid points, clamped to the
// outermost valid values beyond the grid.
double drift_at(const DriftField& field, double x);

}  // namespace epf
