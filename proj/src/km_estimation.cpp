#include "epf/km_estimation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace epf {

namespace {

int check_hour(int h) {
    if (h < 1 || h > 24) throw std::invalid_argument("hour must be in 1..24");
    return h;
}

double population_std(const std::vector<double>& xs) {
    const double n = static_cast<double>(xs.size());
    const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
    double var = 0.0;
    for (double x : xs) var += (x - mean) * (x - mean);
    return std::sqrt(var / n);
}

// Unnormalized Gaussian kernel sums of a uniform grid against one center.
// Returns sum of w(g) and sum of g*w(g) over grid points within 8 bandwidths.
struct KernelGridSums {
    double w = 0.0;
    double gw = 0.0;
};

KernelGridSums kernel_grid_sums(double lo, double step, int count, double center, double h) {
    KernelGridSums s;
    const double cut = 8.0 * h;
    int first = static_cast<int>(std::ceil((center - cut - lo) / step));
    int last = static_cast<int>(std::floor((center + cut - lo) / step));
    first = std::max(first, 0);
    last = std::min(last, count - 1);
    const double inv2h2 = 1.0 / (2.0 * h * h);
    for (int g = first; g <= last; ++g) {
        const double x = lo + step * g;
        const double w = std::exp(-(x - center) * (x - center) * inv2h2);
        s.w += w;
        s.gw += x * w;
    }
    return s;
}

}  // namespace

DriftPairs build_drift_dataset(const DailyPriceMatrix& matrix, int hour) {
    check_hour(hour);
    const Eigen::Index n = matrix.values.rows();
    if (n < 2) throw std::invalid_argument("need at least 2 days");
    DriftPairs out;
    out.hour = hour;
    out.pairs.reserve(static_cast<std::size_t>(n - 1));
    const int c = hour - 1;
    for (Eigen::Index k = 0; k + 1 < n; ++k)
        out.pairs.emplace_back(matrix.values(k, c), matrix.values(k + 1, c) - matrix.values(k, c));
    return out;
}

DiffusionTriples build_diffusion_dataset(const DailyPriceMatrix& matrix, int hi, int hj) {
    check_hour(hi);
    check_hour(hj);
    const Eigen::Index n = matrix.values.rows();
    if (n < 2) throw std::invalid_argument("need at least 2 days");
    DiffusionTriples out;
    out.hour_i = hi;
    out.hour_j = hj;
    out.triples.reserve(static_cast<std::size_t>(n - 1));
    const int ci = hi - 1, cj = hj - 1;
    for (Eigen::Index k = 0; k + 1 < n; ++k) {
        const double dxi = matrix.values(k + 1, ci) - matrix.values(k, ci);
        const double dxj = matrix.values(k + 1, cj) - matrix.values(k, cj);
        out.triples.push_back({matrix.values(k, ci), matrix.values(k, cj), 0.5 * dxi * dxj});
    }
    return out;
}

Bandwidth scott_bandwidth(long N, int d) {
    if (N < 1) throw std::invalid_argument("N must be >= 1");
    return {std::pow(static_cast<double>(N), -1.0 / (d + 4)), d, N};
}

DriftField estimate_drift(const DriftPairs& pairs, const DriftEstimationOptions& opts) {
    const std::size_t n = pairs.pairs.size();
    if (n < 10) throw std::invalid_argument("need at least 10 drift pairs");
    if (opts.grid_size < 2) throw std::invalid_argument("grid_size must be >= 2");

    std::vector<double> xs(n), ys(n);
    for (std::size_t k = 0; k < n; ++k) {
        xs[k] = pairs.pairs[k].first;
        ys[k] = pairs.pairs[k].second;
    }
    const double sx_raw = population_std(xs);
    if (sx_raw == 0.0) throw std::invalid_argument("degenerate drift dataset: all x identical");
    const double sx = opts.standardize ? sx_raw : 1.0;
    const double sy_raw = population_std(ys);
    const double sy = (opts.standardize && sy_raw > 0.0) ? sy_raw : 1.0;

    // Standardized coordinates; with standardize=false these are the raw ones.
    std::vector<double> u(n), v(n);
    for (std::size_t k = 0; k < n; ++k) {
        u[k] = xs[k] / sx;
        v[k] = ys[k] / sy;
    }
    const double h = scott_bandwidth(static_cast<long>(n), 2).h;
    const auto [umin_it, umax_it] = std::minmax_element(u.begin(), u.end());
    const auto [vmin_it, vmax_it] = std::minmax_element(v.begin(), v.end());
    const int G = opts.grid_size;
    const double ulo = *umin_it - 3.0 * h, uhi = *umax_it + 3.0 * h;
    const double vlo = *vmin_it - 3.0 * h, vhi = *vmax_it + 3.0 * h;
    const double ustep = (uhi - ulo) / (G - 1);
    const double vstep = (vhi - vlo) / (G - 1);

    // The mesh expectation E[v|u] = sum_g v_g p(u,v_g) / sum_g p(u,v_g)
    // factorizes per sample because the kernel is a product kernel:
    // precompute each sample's column sums over the v grid once.
    std::vector<double> colw(n), colvw(n);
    for (std::size_t k = 0; k < n; ++k) {
        const auto s = kernel_grid_sums(vlo, vstep, G, v[k], h);
        colw[k] = s.w;
        colvw[k] = s.gw;
    }

    // Sort samples by u so each grid point only visits a +-8h window.
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return u[a] < u[b]; });
    std::vector<double> us(n), cw(n), cvw(n);
    for (std::size_t k = 0; k < n; ++k) {
        us[k] = u[order[k]];
        cw[k] = colw[order[k]];
        cvw[k] = colvw[order[k]];
    }

    DriftField field;
    field.hour = pairs.hour;
    field.grid.resize(G);
    field.values.assign(G, 0.0);
    field.valid.assign(G, 0);
    std::vector<double> marginal(G, 0.0);
    const double inv2h2 = 1.0 / (2.0 * h * h);
    const double cut = 8.0 * h;
    for (int g = 0; g < G; ++g) {
        const double ug = ulo + ustep * g;
        field.grid[g] = ug * sx;
        const auto first = std::lower_bound(us.begin(), us.end(), ug - cut) - us.begin();
        const auto last = std::upper_bound(us.begin(), us.end(), ug + cut) - us.begin();
        double mw = 0.0, den = 0.0, num = 0.0;
        for (auto k = first; k < last; ++k) {
            const double w = std::exp(-(us[k] - ug) * (us[k] - ug) * inv2h2);
            mw += w;
            den += w * cw[k];
            num += w * cvw[k];
        }
        marginal[g] = mw;
        if (den > 0.0) field.values[g] = sy * num / den;
    }
    const double peak = *std::max_element(marginal.begin(), marginal.end());
    for (int g = 0; g < G; ++g)
        field.valid[g] = (marginal[g] > opts.density_floor_ratio * peak &&
                          std::isfinite(field.values[g]))
                             ? 1
                             : 0;
    return field;
}

double estimate_diffusion(const DiffusionTriples& triples) {
    if (triples.triples.size() < 2) throw std::invalid_argument("need at least 2 diffusion triples");
    double sum = 0.0;
    for (const auto& t : triples.triples) sum += t.half_product;
    return sum / static_cast<double>(triples.triples.size());
}

double estimate_diffusion_kde_check(const DiffusionTriples& triples, bool standardize) {
    const std::size_t n = triples.triples.size();
    if (n < 2) throw std::invalid_argument("need at least 2 diffusion triples");
    std::vector<double> a1(n), a2(n), a3(n);
    for (std::size_t k = 0; k < n; ++k) {
        a1[k] = triples.triples[k].xi;
        a2[k] = triples.triples[k].xj;
        a3[k] = triples.triples[k].half_product;
    }
    auto scale = [&](const std::vector<double>& a) {
        if (!standardize) return 1.0;
        const double s = population_std(a);
        return s > 0.0 ? s : 1.0;
    };
    const double s1 = scale(a1), s2 = scale(a2), s3 = scale(a3);
    const double h = scott_bandwidth(static_cast<long>(n), 3).h;

    auto axis = [&](std::vector<double>& a, double s, int count, double& lo, double& step) {
        for (double& x : a) x /= s;
        const auto [mn, mx] = std::minmax_element(a.begin(), a.end());
        lo = *mn - 3.0 * h;
        step = (*mx + 3.0 * h - lo) / (count - 1);
    };
    double lo1, st1, lo2, st2, lo3, st3;
    axis(a1, s1, 100, lo1, st1);
    axis(a2, s2, 100, lo2, st2);
    axis(a3, s3, 500, lo3, st3);

    // Mesh mean of the third coordinate; product kernel factorizes the
    // triple sum into per-sample axis sums.
    double num = 0.0, den = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double w1 = kernel_grid_sums(lo1, st1, 100, a1[k], h).w;
        const double w2 = kernel_grid_sums(lo2, st2, 100, a2[k], h).w;
        const auto s = kernel_grid_sums(lo3, st3, 500, a3[k], h);
        num += w1 * w2 * s.gw;
        den += w1 * w2 * s.w;
    }
    return s3 * num / den;
}

DiffusionMatrix assemble_diffusion_matrix(const Eigen::MatrixXd& d2) {
    if (d2.rows() != d2.cols()) throw std::invalid_argument("d2 must be square");
    const double norm = d2.norm();
    const double asym = (d2 - d2.transpose()).norm();
    if (norm > 0.0 && asym > 1e-6 * norm)
        throw std::invalid_argument("d2 asymmetry exceeds 1e-6 relative tolerance");
    DiffusionMatrix out;
    out.d2 = 0.5 * (d2 + d2.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(2.0 * out.d2);
    Eigen::VectorXd lam = eig.eigenvalues();
    for (Eigen::Index i = 0; i < lam.size(); ++i) {
        if (lam(i) < 0.0) {
            lam(i) = 0.0;
            ++out.clamped_eigenvalues;
        }
    }
    out.sigma = eig.eigenvectors() * lam.cwiseSqrt().asDiagonal() * eig.eigenvectors().transpose();
    return out;
}

double drift_at(const DriftField& field, double x) {
    const auto G = static_cast<std::ptrdiff_t>(field.grid.size());
    if (G == 0 || std::none_of(field.valid.begin(), field.valid.end(), [](char c) { return c; }))
        throw std::invalid_argument("drift field has no valid points");
    // Bracketing grid slot, then nearest valid point on each side.
    std::ptrdiff_t hi = std::upper_bound(field.grid.begin(), field.grid.end(), x) -
                        field.grid.begin();
    std::ptrdiff_t lo = hi - 1;
    while (lo >= 0 && !field.valid[static_cast<std::size_t>(lo)]) --lo;
    while (hi < G && !field.valid[static_cast<std::size_t>(hi)]) ++hi;
    if (lo < 0) return field.values[static_cast<std::size_t>(hi)];
    if (hi >= G) return field.values[static_cast<std::size_t>(lo)];
    const double gl = field.grid[static_cast<std::size_t>(lo)];
    const double gh = field.grid[static_cast<std::size_t>(hi)];
    const double vl = field.values[static_cast<std::size_t>(lo)];
    const double vh = field.values[static_cast<std::size_t>(hi)];
    if (gh == gl) return vl;
    return vl + (x - gl) / (gh - gl) * (vh - vl);
}

}  // namespace epf
