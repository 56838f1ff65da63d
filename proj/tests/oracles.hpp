#pragma once

// Independent brute-force oracles for the test suites. Everything here
// deliberately avoids the library's solver paths: designs are built with
// explicit loops over raw powers and solved through the normal equations
// (A^T A) x = A^T b, metrics are naive double loops.

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "thermonu/types.hpp"

namespace oracle {

using thermonu::Grid;

/// Normal-equations polynomial fit: coefficients of t^0..t^max_exp for each
/// column of rhs. Raw powers, no scaling; callers keep the instances
/// well-conditioned.
inline Eigen::MatrixXd polyfit_normal_equations(const Eigen::VectorXd& t,
                                                const Eigen::MatrixXd& rhs, int max_exp) {
    Eigen::MatrixXd a(t.size(), max_exp + 1);
    for (Eigen::Index i = 0; i < t.size(); ++i) {
        double p = 1.0;
        for (int j = 0; j <= max_exp; ++j) {
            a(i, j) = p;
            p *= t[i];
        }
    }
    return (a.transpose() * a).ldlt().solve(a.transpose() * rhs);
}

/// Full-design spatial fit: one row per pixel, one column per (q, z) basis
/// function H^q W^z, solved by normal equations. Returns (M+1) x (M+1).
inline Eigen::MatrixXd spatial_fit_normal_equations(const Grid& map, int max_exp) {
    const Eigen::Index h = map.rows();
    const Eigen::Index w = map.cols();
    const Eigen::Index n = max_exp + 1;
    Eigen::MatrixXd a(h * w, n * n);
    Eigen::VectorXd b(h * w);
    Eigen::Index row = 0;
    for (Eigen::Index i = 0; i < h; ++i)
        for (Eigen::Index c = 0; c < w; ++c, ++row) {
            const double x = (static_cast<double>(i) - (h - 1) / 2.0) / (h - 1);
            const double y = (static_cast<double>(c) - (w - 1) / 2.0) / (w - 1);
            for (Eigen::Index q = 0; q < n; ++q)
                for (Eigen::Index z = 0; z < n; ++z)
                    a(row, q * n + z) = std::pow(x, q) * std::pow(y, z);
            b[row] = map(i, c);
        }
    const Eigen::VectorXd sol = (a.transpose() * a).ldlt().solve(a.transpose() * b);
    Eigen::MatrixXd out(n, n);
    for (Eigen::Index q = 0; q < n; ++q)
        for (Eigen::Index z = 0; z < n; ++z) out(q, z) = sol[q * n + z];
    return out;
}

/// Radial fit over all pixels by normal equations.
inline Eigen::VectorXd radial_fit_normal_equations(const Grid& surface, const Grid& p,
                                                   int max_exp) {
    const Eigen::Index npx = surface.size();
    Eigen::MatrixXd a(npx, max_exp + 1);
    Eigen::VectorXd b(npx);
    Eigen::Index row = 0;
    for (Eigen::Index i = 0; i < surface.rows(); ++i)
        for (Eigen::Index c = 0; c < surface.cols(); ++c, ++row) {
            for (int r = 0; r <= max_exp; ++r) a(row, r) = std::pow(p(i, c), r);
            b[row] = surface(i, c);
        }
    return (a.transpose() * a).ldlt().solve(a.transpose() * b);
}

inline double mae_loop(const Grid& a, const Grid& b) {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index c = 0; c < a.cols(); ++c) acc += std::abs(a(i, c) - b(i, c));
    return acc / static_cast<double>(a.size());
}

inline double mse_loop(const Grid& a, const Grid& b) {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index c = 0; c < a.cols(); ++c)
            acc += (a(i, c) - b(i, c)) * (a(i, c) - b(i, c));
    return acc / static_cast<double>(a.size());
}

inline double psnr_loop(const Grid& a, const Grid& b, double peak) {
    return 10.0 * std::log10(peak * peak / mse_loop(a, b));
}

inline double tv_loop(const Grid& m) {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            if (c + 1 < m.cols()) acc += std::abs(m(i, c + 1) - m(i, c));
            if (i + 1 < m.rows()) acc += std::abs(m(i + 1, c) - m(i, c));
        }
    return acc / static_cast<double>(m.size());
}

/// Windowed SSIM by direct per-window loops (valid region, Gaussian
/// weights), mirroring the standard definition term by term.
inline double ssim_loop(const Grid& a, const Grid& b, int window, double sigma, double peak) {
    std::vector<double> k(window);
    const double mid = (window - 1) / 2.0;
    double ksum = 0.0;
    for (int i = 0; i < window; ++i) {
        k[i] = std::exp(-0.5 * (i - mid) * (i - mid) / (sigma * sigma));
        ksum += k[i];
    }
    for (double& v : k) v /= ksum;
    const double c1 = (0.01 * peak) * (0.01 * peak);
    const double c2 = (0.03 * peak) * (0.03 * peak);
    double total = 0.0;
    Eigen::Index count = 0;
    for (Eigen::Index i = 0; i + window <= a.rows(); ++i)
        for (Eigen::Index c = 0; c + window <= a.cols(); ++c, ++count) {
            double mu_a = 0, mu_b = 0, e_aa = 0, e_bb = 0, e_ab = 0;
            for (int di = 0; di < window; ++di)
                for (int dc = 0; dc < window; ++dc) {
                    const double wgt = k[di] * k[dc];
                    const double va = a(i + di, c + dc);
                    const double vb = b(i + di, c + dc);
                    mu_a += wgt * va;
                    mu_b += wgt * vb;
                    e_aa += wgt * va * va;
                    e_bb += wgt * vb * vb;
                    e_ab += wgt * va * vb;
                }
            const double var_a = e_aa - mu_a * mu_a;
            const double var_b = e_bb - mu_b * mu_b;
            const double cov = e_ab - mu_a * mu_b;
            total += ((2 * mu_a * mu_b + c1) * (2 * cov + c2)) /
                     ((mu_a * mu_a + mu_b * mu_b + c1) * (var_a + var_b + c2));
        }
    return total / static_cast<double>(count);
}

/// Two-pass mean and sample variance across a stack of frames.
inline void mean_var_two_pass(const std::vector<Grid>& frames, Grid& mean, Grid& var) {
    mean = Grid::Zero(frames.front().rows(), frames.front().cols());
    for (const auto& f : frames) mean += f;
    mean /= static_cast<double>(frames.size());
    var = Grid::Zero(mean.rows(), mean.cols());
    if (frames.size() > 1) {
        for (const auto& f : frames) var += (f - mean).square();
        var /= static_cast<double>(frames.size() - 1);
    }
}

}  // namespace oracle
