#pragma once

#include <cmath>
#include <map>
#include <set>
#include <vector>

#include "thermonu/parallel.hpp"
#include "thermonu/polyfit.hpp"
#include "thermonu/simulate.hpp"
#include "thermonu/types.hpp"

namespace thermonu {

/// Temperature map plus a validity mask. Masked pixels carry the nearest
/// bound rather than a fabricated root, so downstream metrics can exclude
/// them instead of absorbing a clamp bias.
struct MaskedTemperature {
    TemperatureMap map;
    Mask mask;
    std::int64_t masked_count = 0;
};

namespace detail {

// Monotone-bracket bisection for sum_m beta_m t^m = gl on [lo, hi].
// increasing: response rises with t. Tolerance is on the gray-level residual.
inline double bisect_root(const Eigen::VectorXd& beta, double gl, double lo, double hi,
                          bool increasing, double tol_gl) {
    double a = lo, b = hi;
    for (int iter = 0; iter < 200; ++iter) {
        const double mid = 0.5 * (a + b);
        const double f = polyval(beta, mid) - gl;
        if (std::abs(f) < tol_gl || b - a < 1e-15 * (std::abs(b) + 1.0)) return mid;
        if ((f > 0.0) == increasing)
            b = mid;
        else
            a = mid;
    }
    return 0.5 * (a + b);
}

}  // namespace detail

/// Inverts the per-pixel polynomial: recovers the temperature map whose
/// simulated response equals the given frame at the given ambient
/// temperature. Requires a response monotone in t_obj over the model's
/// temperature bounds (checked per pixel via the derivative sign at both
/// bounds). Quadratic models with positive curvature use the closed-form
/// positive root; anything else brackets by bisection. Gray levels with no
/// root in range are masked.
inline MaskedTemperature invert_polynomial(const CameraModel& model, const GrayFrame& frame,
                                           double t_amb) {
    if (frame.height() != model.height || frame.width() != model.width)
        throw GeometryError("invert_polynomial: frame is " + std::to_string(frame.height()) + "x" +
                            std::to_string(frame.width()) + ", model is " +
                            std::to_string(model.height) + "x" + std::to_string(model.width));
    const PixelwiseCoeffs coeffs = pixelwise_at(model, t_amb);
    const int order = model.degrees.m_gl;
    const double t_lo = model.temp_min;
    const double t_hi = model.temp_max;
    const double tol_gl = 1e-6 * (model.gl_max - model.gl_min);

    MaskedTemperature out;
    out.map.values.resize(frame.height(), frame.width());
    out.mask = Mask::Constant(frame.height(), frame.width(), false);
    std::vector<std::int64_t> masked_per_row(frame.height(), 0);

    parallel_for(frame.height(), [&](std::int64_t i) {
        Eigen::VectorXd beta(order + 1);
        Eigen::VectorXd dbeta(std::max(order, 1));
        for (Eigen::Index c = 0; c < frame.width(); ++c) {
            for (int m = 0; m <= order; ++m) beta[m] = coeffs.maps[m](i, c);
            for (int m = 1; m <= order; ++m) dbeta[m - 1] = m * beta[m];
            if (order == 0) dbeta[0] = 0.0;
            const double d_lo = polyval(dbeta, t_lo);
            const double d_hi = polyval(dbeta, t_hi);
            if (d_lo == 0.0 || d_hi == 0.0 || (d_lo > 0.0) != (d_hi > 0.0))
                throw DomainError("invert_polynomial: response not monotone in t_obj at pixel (" +
                                  std::to_string(i) + "," + std::to_string(c) + ")");
            const bool increasing = d_lo > 0.0;
            const double f_lo = polyval(beta, t_lo);
            const double f_hi = polyval(beta, t_hi);
            const double gl = frame.values(i, c);
            const double gl_min = increasing ? f_lo : f_hi;
            const double gl_max = increasing ? f_hi : f_lo;

            double t;
            if (gl == f_lo) {
                t = t_lo;
            } else if (gl == f_hi) {
                t = t_hi;
            } else if (gl < gl_min || gl > gl_max) {
                out.mask(i, c) = true;
                ++masked_per_row[i];
                t = (gl < gl_min) == increasing ? t_lo : t_hi;
            } else if (order == 1) {
                t = (gl - beta[0]) / beta[1];
            } else if (order == 2 && beta[2] > 0.0) {
                const double disc = beta[1] * beta[1] - 4.0 * beta[2] * (beta[0] - gl);
                t = (-beta[1] + std::sqrt(std::max(disc, 0.0))) / (2.0 * beta[2]);
                if (t < t_lo || t > t_hi)  // numerical slop near a bound
                    t = detail::bisect_root(beta, gl, t_lo, t_hi, increasing, tol_gl);
            } else {
                t = detail::bisect_root(beta, gl, t_lo, t_hi, increasing, tol_gl);
            }
            out.map.values(i, c) = t;
        }
    });
    for (const auto n : masked_per_row) out.masked_count += n;
    return out;
}

/// Per-pixel linear acquisition model: gray level = G(t_amb) * t_obj +
/// D(t_amb), with the gain and offset polynomials of ambient temperature.
struct LinearGD {
    std::vector<Grid> g_poly;  // gain coefficient maps, index k multiplies t_amb^k
    std::vector<Grid> d_poly;  // offset coefficient maps
    double min_abs_gain = 0.0;  // smallest |G| seen over the fit's ambient samples
    double t_amb_lo = 0.0;
    double t_amb_hi = 0.0;

    Eigen::Index height() const { return g_poly.empty() ? 0 : g_poly.front().rows(); }
    Eigen::Index width() const { return g_poly.empty() ? 0 : g_poly.front().cols(); }
};

/// Two-stage fit: per ambient temperature a pixel-wise linear fit of gray
/// level against object temperature yields gain/offset samples; each is then
/// fitted as a polynomial of t_amb.
inline LinearGD fit_linear_gd(const std::vector<OperatingPoint>& points, int m_ambient) {
    if (points.empty()) throw DomainError("fit_linear_gd: no operating points");
    const Eigen::Index h = points.front().mean_frame.height();
    const Eigen::Index w = points.front().mean_frame.width();

    std::map<double, std::vector<const OperatingPoint*>> by_ambient;
    for (const auto& p : points) {
        require_same_shape(p.mean_frame.values, points.front().mean_frame.values, "fit_linear_gd");
        by_ambient[p.t_amb].push_back(&p);
    }
    if (by_ambient.size() < static_cast<std::size_t>(m_ambient) + 1)
        throw DomainError("fit_linear_gd: " + std::to_string(by_ambient.size()) +
                          " distinct ambient temperatures, need " + std::to_string(m_ambient + 1));

    const auto n_amb = static_cast<Eigen::Index>(by_ambient.size());
    Eigen::VectorXd ambients(n_amb);
    Eigen::MatrixXd gains(n_amb, h * w);
    Eigen::MatrixXd offsets(n_amb, h * w);
    Eigen::Index row = 0;
    for (const auto& [t_amb, group] : by_ambient) {
        std::set<double> objs;
        for (const auto* p : group) objs.insert(p->t_obj);
        if (objs.size() < 2)
            throw DomainError("fit_linear_gd: ambient " + std::to_string(t_amb) +
                              " needs >= 2 distinct object temperatures");
        Eigen::VectorXd t(group.size());
        Eigen::MatrixXd rhs(group.size(), h * w);
        for (std::size_t i = 0; i < group.size(); ++i) {
            t[i] = group[i]->t_obj;
            rhs.row(i) =
                Eigen::Map<const Eigen::VectorXd>(group[i]->mean_frame.values.data(), h * w);
        }
        const Eigen::MatrixXd gd = polyfit(t, rhs, 1, "fit_linear_gd[stage=per-ambient]");
        ambients[row] = t_amb;
        offsets.row(row) = gd.row(0);
        gains.row(row) = gd.row(1);
        ++row;
    }

    const Eigen::MatrixXd g_fit = polyfit(ambients, gains, m_ambient, "fit_linear_gd[stage=ambient]");
    const Eigen::MatrixXd d_fit =
        polyfit(ambients, offsets, m_ambient, "fit_linear_gd[stage=ambient]");

    LinearGD out;
    out.t_amb_lo = ambients.minCoeff();
    out.t_amb_hi = ambients.maxCoeff();
    out.min_abs_gain = gains.array().abs().minCoeff();
    for (int k = 0; k <= m_ambient; ++k) {
        const Eigen::VectorXd g_row = g_fit.row(k);
        const Eigen::VectorXd d_row = d_fit.row(k);
        out.g_poly.push_back(Eigen::Map<const Grid>(g_row.data(), h, w));
        out.d_poly.push_back(Eigen::Map<const Grid>(d_row.data(), h, w));
    }
    return out;
}

namespace detail {

inline Grid eval_poly_maps(const std::vector<Grid>& maps, double t) {
    Grid acc = maps.back();
    for (auto it = maps.rbegin() + 1; it != maps.rend(); ++it) acc = acc * t + *it;
    return acc;
}

}  // namespace detail

/// Inverts the linear model: t = (GL - D(t_amb)) / G(t_amb) per pixel.
/// Pixels whose gain magnitude falls below the threshold are masked.
inline MaskedTemperature estimate_linear(const LinearGD& cal, const GrayFrame& frame, double t_amb,
                                         double gain_threshold = 1e-12) {
    if (frame.height() != cal.height() || frame.width() != cal.width())
        throw GeometryError("estimate_linear: frame is " + std::to_string(frame.height()) + "x" +
                            std::to_string(frame.width()) + ", calibration is " +
                            std::to_string(cal.height()) + "x" + std::to_string(cal.width()));
    const Grid gain = detail::eval_poly_maps(cal.g_poly, t_amb);
    const Grid offset = detail::eval_poly_maps(cal.d_poly, t_amb);

    MaskedTemperature out;
    out.map.values.resize(frame.height(), frame.width());
    out.mask = Mask::Constant(frame.height(), frame.width(), false);
    for (Eigen::Index i = 0; i < frame.height(); ++i)
        for (Eigen::Index c = 0; c < frame.width(); ++c) {
            if (std::abs(gain(i, c)) <= gain_threshold) {
                out.mask(i, c) = true;
                ++out.masked_count;
                out.map.values(i, c) = 0.0;
            } else {
                out.map.values(i, c) = (frame.values(i, c) - offset(i, c)) / gain(i, c);
            }
        }
    return out;
}

}  // namespace thermonu
