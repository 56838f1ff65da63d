#pragma once

#include <cmath>
#include <vector>

#include "thermonu/types.hpp"

namespace thermonu {

/// Discrete Gaussian kernel truncated at radius ceil(4*sigma) and
/// renormalized to sum to 1. Returns 2*radius+1 taps.
inline std::vector<double> gaussian_kernel(double sigma) {
    if (!(sigma > 0.0)) throw DomainError("gaussian_kernel: sigma must be > 0");
    const int radius = static_cast<int>(std::ceil(4.0 * sigma));
    std::vector<double> k(2 * radius + 1);
    double sum = 0.0;
    for (int i = -radius; i <= radius; ++i) {
        k[i + radius] = std::exp(-0.5 * (i * i) / (sigma * sigma));
        sum += k[i + radius];
    }
    for (double& w : k) w /= sum;
    return k;
}

namespace detail {

// Mirror index into [0, n): ... 2 1 0 | 0 1 2 ... n-1 | n-1 n-2 ...
// Handles any overshoot, so kernels wider than the grid still work.
inline Eigen::Index reflect_index(Eigen::Index i, Eigen::Index n) {
    const Eigen::Index period = 2 * n;
    i = ((i % period) + period) % period;
    return i < n ? i : period - 1 - i;
}

}  // namespace detail

/// Separable Gaussian blur with reflect padding. The normalized kernel
/// leaves constant maps unchanged.
inline Grid gaussian_smooth(const Grid& src, double sigma) {
    const auto kernel = gaussian_kernel(sigma);
    const int radius = static_cast<int>(kernel.size() / 2);
    const Eigen::Index h = src.rows();
    const Eigen::Index w = src.cols();

    Grid tmp(h, w);  // horizontal pass
    for (Eigen::Index i = 0; i < h; ++i) {
        for (Eigen::Index c = 0; c < w; ++c) {
            double acc = 0.0;
            for (int k = -radius; k <= radius; ++k)
                acc += kernel[k + radius] * src(i, detail::reflect_index(c + k, w));
            tmp(i, c) = acc;
        }
    }
    Grid dst(h, w);  // vertical pass
    for (Eigen::Index i = 0; i < h; ++i) {
        for (Eigen::Index c = 0; c < w; ++c) {
            double acc = 0.0;
            for (int k = -radius; k <= radius; ++k)
                acc += kernel[k + radius] * tmp(detail::reflect_index(i + k, h), c);
            dst(i, c) = acc;
        }
    }
    return dst;
}

}  // namespace thermonu
