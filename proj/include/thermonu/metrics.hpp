#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include "thermonu/types.hpp"

namespace thermonu {

/// Metric weights and SSIM parameters. dynamic_range is the peak value L
/// used by SSIM and PSNR; the default matches the global temperature range.
struct MetricsConfig {
    double beta = 0.01;    // DSSIM weight in the combined loss
    double gamma = 0.001;  // TV weight in the combined loss
    int ssim_window = 11;
    double ssim_sigma = 1.5;
    double dynamic_range = kDefaultTempMax - kDefaultTempMin;
};

inline double mae(const Grid& a, const Grid& b) {
    require_same_shape(a, b, "mae");
    return (a - b).abs().mean();
}

/// MAE over pixels where the mask is false.
inline double mae(const Grid& a, const Grid& b, const Mask& mask) {
    require_same_shape(a, b, "mae");
    if (mask.rows() != a.rows() || mask.cols() != a.cols())
        throw GeometryError("mae: mask shape mismatch");
    double acc = 0.0;
    std::int64_t n = 0;
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index c = 0; c < a.cols(); ++c)
            if (!mask(i, c)) {
                acc += std::abs(a(i, c) - b(i, c));
                ++n;
            }
    if (n == 0) throw DomainError("mae: every pixel is masked");
    return acc / static_cast<double>(n);
}

namespace detail {

inline std::vector<double> ssim_window_kernel(int window, double sigma) {
    std::vector<double> k(window);
    const double mid = (window - 1) / 2.0;
    double sum = 0.0;
    for (int i = 0; i < window; ++i) {
        k[i] = std::exp(-0.5 * (i - mid) * (i - mid) / (sigma * sigma));
        sum += k[i];
    }
    for (double& v : k) v /= sum;
    return k;
}

// Separable weighted filter, valid region only (no padding).
inline Grid valid_filter(const Grid& src, const std::vector<double>& k) {
    const int win = static_cast<int>(k.size());
    const Eigen::Index h = src.rows();
    const Eigen::Index w = src.cols();
    Grid horiz(h, w - win + 1);
    for (Eigen::Index i = 0; i < h; ++i)
        for (Eigen::Index c = 0; c + win <= w; ++c) {
            double acc = 0.0;
            for (int t = 0; t < win; ++t) acc += k[t] * src(i, c + t);
            horiz(i, c) = acc;
        }
    Grid out(h - win + 1, w - win + 1);
    for (Eigen::Index i = 0; i + win <= h; ++i)
        for (Eigen::Index c = 0; c < out.cols(); ++c) {
            double acc = 0.0;
            for (int t = 0; t < win; ++t) acc += k[t] * horiz(i + t, c);
            out(i, c) = acc;
        }
    return out;
}

}  // namespace detail

/// Mean structural similarity with a Gaussian window and the standard
/// constants C1 = (0.01 L)^2, C2 = (0.03 L)^2. Local statistics use the
/// valid window region only.
inline double ssim(const Grid& a, const Grid& b, const MetricsConfig& cfg = {}) {
    require_same_shape(a, b, "ssim");
    if (cfg.ssim_window < 1 || cfg.ssim_window % 2 == 0)
        throw DomainError("ssim: window must be odd and positive");
    if (a.rows() < cfg.ssim_window || a.cols() < cfg.ssim_window)
        throw GeometryError("ssim: frame " + std::to_string(a.rows()) + "x" +
                            std::to_string(a.cols()) + " smaller than the " +
                            std::to_string(cfg.ssim_window) + "-pixel window");
    const auto k = detail::ssim_window_kernel(cfg.ssim_window, cfg.ssim_sigma);
    const Grid mu_a = detail::valid_filter(a, k);
    const Grid mu_b = detail::valid_filter(b, k);
    const Grid e_aa = detail::valid_filter(a * a, k);
    const Grid e_bb = detail::valid_filter(b * b, k);
    const Grid e_ab = detail::valid_filter(a * b, k);
    const Grid var_a = e_aa - mu_a.square();
    const Grid var_b = e_bb - mu_b.square();
    const Grid cov = e_ab - mu_a * mu_b;

    const double c1 = (0.01 * cfg.dynamic_range) * (0.01 * cfg.dynamic_range);
    const double c2 = (0.03 * cfg.dynamic_range) * (0.03 * cfg.dynamic_range);
    const Grid numerator = (2.0 * mu_a * mu_b + c1) * (2.0 * cov + c2);
    const Grid denominator = (mu_a.square() + mu_b.square() + c1) * (var_a + var_b + c2);
    return (numerator / denominator).mean();
}

/// (1 - SSIM) / 2; zero for identical inputs.
inline double dssim(const Grid& a, const Grid& b, const MetricsConfig& cfg = {}) {
    return (1.0 - ssim(a, b, cfg)) / 2.0;
}

/// Mean total variation: forward differences, no wraparound, normalized by
/// the pixel count.
inline double tv(const Grid& map) {
    if (map.rows() < 2 && map.cols() < 2) throw GeometryError("tv: need at least a 2-pixel extent");
    double acc = 0.0;
    for (Eigen::Index i = 0; i < map.rows(); ++i)
        for (Eigen::Index c = 0; c + 1 < map.cols(); ++c) acc += std::abs(map(i, c + 1) - map(i, c));
    for (Eigen::Index i = 0; i + 1 < map.rows(); ++i)
        for (Eigen::Index c = 0; c < map.cols(); ++c) acc += std::abs(map(i + 1, c) - map(i, c));
    return acc / static_cast<double>(map.rows() * map.cols());
}

/// 10 log10(L^2 / MSE); +infinity for identical inputs.
inline double psnr(const Grid& a, const Grid& b, double peak) {
    require_same_shape(a, b, "psnr");
    const double mse = (a - b).square().mean();
    if (mse == 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(peak * peak / mse);
}

/// MAE + beta * DSSIM + gamma * TV(estimate).
inline double combined_loss(const Grid& estimate, const Grid& truth, const MetricsConfig& cfg = {}) {
    return mae(estimate, truth) + cfg.beta * dssim(estimate, truth, cfg) + cfg.gamma * tv(estimate);
}

}  // namespace thermonu
