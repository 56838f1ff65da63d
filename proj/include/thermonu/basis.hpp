#pragma once

#include "thermonu/types.hpp"

namespace thermonu {

/// Uniform ramp of n values from -0.5 to +0.5 (spacing 1/(n-1)).
/// Built as (j - (n-1)/2) / (n-1): the numerator is an exact half-integer,
/// so ramp[n-1-j] == -ramp[j] holds bit-exactly and the flip symmetries of
/// the derived grids are exact rather than approximate.
inline Eigen::VectorXd center_ramp(Eigen::Index n) {
    Eigen::VectorXd r(n);
    const double mid = static_cast<double>(n - 1) / 2.0;
    for (Eigen::Index j = 0; j < n; ++j)
        r[j] = (static_cast<double>(j) - mid) / static_cast<double>(n - 1);
    return r;
}

/// Builds the normalized coordinate grids for an h x w frame.
/// W repeats the width ramp along every row, H the height ramp down every
/// column, and P = sqrt(H^2 + W^2) is the radial kernel.
inline BasisGrids make_basis_grids(Eigen::Index h, Eigen::Index w) {
    if (h < 2 || w < 2)
        throw GeometryError("make_basis_grids: dimensions must be >= 2, got " + std::to_string(h) +
                            "x" + std::to_string(w));
    const Eigen::VectorXd rh = center_ramp(h);
    const Eigen::VectorXd rw = center_ramp(w);
    BasisGrids g;
    g.H = rh.replicate(1, w).array();
    g.W = rw.transpose().replicate(h, 1).array();
    g.P = (g.H.square() + g.W.square()).sqrt();
    return g;
}

}  // namespace thermonu
