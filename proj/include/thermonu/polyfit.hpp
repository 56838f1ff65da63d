#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <string>

#include "thermonu/errors.hpp"

namespace thermonu {

/// Vandermonde matrix of raw powers: column j holds t^j, j in 0..max_exp.
inline Eigen::MatrixXd vandermonde(const Eigen::VectorXd& t, int max_exp) {
    Eigen::MatrixXd v(t.size(), max_exp + 1);
    v.col(0).setOnes();
    for (int j = 1; j <= max_exp; ++j) v.col(j) = v.col(j - 1).cwiseProduct(t);
    return v;
}

namespace detail {

/// Change of basis from powers of u = (t - center)/halfspan back to powers
/// of t: beta = U * alpha with U[m][j] = C(j,m) * (-center)^(j-m) / halfspan^j.
inline Eigen::MatrixXd unscale_matrix(int max_exp, double center, double halfspan) {
    const int n = max_exp + 1;
    Eigen::MatrixXd binom = Eigen::MatrixXd::Zero(n, n);
    for (int j = 0; j < n; ++j) {
        binom(j, 0) = 1.0;
        for (int m = 1; m <= j; ++m)
            binom(j, m) = binom(j - 1, m - 1) + (m <= j - 1 ? binom(j - 1, m) : 0.0);
    }
    Eigen::MatrixXd u = Eigen::MatrixXd::Zero(n, n);
    for (int j = 0; j < n; ++j) {
        const double sj = std::pow(halfspan, -j);
        double cpow = 1.0;  // (-center)^(j-m), built from m = j downward
        for (int m = j; m >= 0; --m) {
            u(m, j) = binom(j, m) * cpow * sj;
            cpow *= -center;
        }
    }
    return u;
}

}  // namespace detail

/// Least-squares polynomial fit of every column of rhs against the sample
/// locations t, maximum exponent max_exp. The locations are centered and
/// scaled to [-1, 1] before the Vandermonde is built (raw high-degree powers
/// of ambient/object temperatures in degrees C are numerically hopeless);
/// the returned (max_exp+1) x rhs.cols() coefficients are mapped back to raw
/// powers of t, so externally the scaling is invisible.
///
/// Throws SingularFitError when the design matrix is rank deficient
/// (duplicate locations, too few samples).
inline Eigen::MatrixXd polyfit(const Eigen::VectorXd& t, const Eigen::MatrixXd& rhs, int max_exp,
                               const std::string& what) {
    const double lo = t.minCoeff();
    const double hi = t.maxCoeff();
    const double center = 0.5 * (lo + hi);
    const double halfspan = hi > lo ? 0.5 * (hi - lo) : 1.0;
    const Eigen::VectorXd u = (t.array() - center) / halfspan;
    const Eigen::MatrixXd design = vandermonde(u, max_exp);
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
    if (qr.rank() < max_exp + 1)
        throw SingularFitError(what + ": design matrix rank " + std::to_string(qr.rank()) +
                               " < " + std::to_string(max_exp + 1) +
                               " (duplicate or too few sample locations)");
    const Eigen::MatrixXd scaled = qr.solve(rhs);
    return detail::unscale_matrix(max_exp, center, halfspan) * scaled;
}

/// Evaluates a raw-power polynomial at a scalar location (Horner).
inline double polyval(const Eigen::VectorXd& coeffs, double t) {
    double acc = 0.0;
    for (Eigen::Index j = coeffs.size() - 1; j >= 0; --j) acc = acc * t + coeffs[j];
    return acc;
}

}  // namespace thermonu
