#pragma once

#include <algorithm>
#include <map>
#include <set>
#include <vector>

#include "thermonu/basis.hpp"
#include "thermonu/parallel.hpp"
#include "thermonu/polyfit.hpp"
#include "thermonu/smoothing.hpp"
#include "thermonu/types.hpp"

namespace thermonu {

/// Per-pixel polynomial fit of gray level against object temperature for a
/// set of operating points sharing one ambient temperature. A single design
/// matrix (the Vandermonde of the t_obj values) is factored once and its
/// pseudoinverse applied to every pixel.
inline PixelwiseCoeffs fit_pixelwise(const std::vector<OperatingPoint>& points, int m_gl) {
    if (points.size() < static_cast<std::size_t>(m_gl) + 1)
        throw DomainError("fit_pixelwise: need at least " + std::to_string(m_gl + 1) +
                          " operating points, got " + std::to_string(points.size()));
    const double t_amb = points.front().t_amb;
    const Eigen::Index h = points.front().mean_frame.height();
    const Eigen::Index w = points.front().mean_frame.width();
    Eigen::VectorXd t(points.size());
    Eigen::MatrixXd rhs(points.size(), h * w);
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (points[i].t_amb != t_amb)
            throw DomainError("fit_pixelwise: operating points span several ambient temperatures");
        require_same_shape(points[i].mean_frame.values, points.front().mean_frame.values,
                           "fit_pixelwise");
        t[i] = points[i].t_obj;
        rhs.row(i) = Eigen::Map<const Eigen::VectorXd>(points[i].mean_frame.values.data(), h * w);
    }
    const Eigen::MatrixXd coeffs = polyfit(t, rhs, m_gl, "fit_pixelwise");
    PixelwiseCoeffs out;
    out.maps.reserve(m_gl + 1);
    for (int m = 0; m <= m_gl; ++m) {
        const Eigen::VectorXd row = coeffs.row(m);
        out.maps.push_back(Eigen::Map<const Grid>(row.data(), h, w));
    }
    return out;
}

/// Gaussian-smooths every coefficient map (dead pixels show up as spikes in
/// the per-pixel fit; the filter removes them blindly).
inline PixelwiseCoeffs smooth_coeffs(const PixelwiseCoeffs& coeffs, double sigma) {
    PixelwiseCoeffs out;
    out.maps.reserve(coeffs.maps.size());
    for (const auto& map : coeffs.maps) out.maps.push_back(gaussian_smooth(map, sigma));
    return out;
}

namespace detail {

// Vandermonde of the centered ramp scaled to [-1, 1]; column j holds
// (2 * ramp)^j. The power-of-two scaling is undone exactly afterwards.
inline Eigen::MatrixXd scaled_ramp_vandermonde(Eigen::Index n, int max_exp) {
    return vandermonde(2.0 * center_ramp(n), max_exp);
}

}  // namespace detail

/// Least-squares fit of an h x w map onto the tensor-product basis
/// {H^q * W^z : 0 <= q,z <= max_exp}. Because H varies only down columns and
/// W only along rows, the design matrix is a Kronecker product and the fit
/// reduces to one pseudoinverse per axis; the result is identical to the
/// full normal-equations solution over all pixels.
inline SpatialPolyCoeffs fit_spatial(const Grid& map, int max_exp) {
    const Eigen::Index h = map.rows();
    const Eigen::Index w = map.cols();
    const Eigen::Index n = max_exp + 1;
    if (n * n > h * w)
        throw SingularFitError("fit_spatial: under-determined, " + std::to_string(n * n) +
                               " coefficients > " + std::to_string(h * w) + " pixels");
    const Eigen::MatrixXd vh = detail::scaled_ramp_vandermonde(h, max_exp);
    const Eigen::MatrixXd vw = detail::scaled_ramp_vandermonde(w, max_exp);
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr_h(vh);
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr_w(vw);
    if (qr_h.rank() < n || qr_w.rank() < n)
        throw SingularFitError("fit_spatial: rank-deficient design (max exponent " +
                               std::to_string(max_exp) + " on a " + std::to_string(h) + "x" +
                               std::to_string(w) + " grid)");
    const Eigen::MatrixXd partial = qr_h.solve(map.matrix());             // (n) x w
    const Eigen::MatrixXd scaled = qr_w.solve(partial.transpose()).transpose();  // n x n

    SpatialPolyCoeffs out;
    out.max_exp = max_exp;
    out.coeffs.resize(n, n);
    double row_scale = 1.0;  // 2^q
    for (Eigen::Index q = 0; q < n; ++q, row_scale *= 2.0) {
        double scale = row_scale;  // 2^(q+z)
        for (Eigen::Index z = 0; z < n; ++z, scale *= 2.0) out.coeffs(q, z) = scaled(q, z) * scale;
    }
    return out;
}

/// Evaluates a tensor-product surface on the h x w basis grids.
inline Grid evaluate_spatial(const SpatialPolyCoeffs& c, Eigen::Index h, Eigen::Index w) {
    const Eigen::MatrixXd vh = vandermonde(center_ramp(h), c.max_exp);
    const Eigen::MatrixXd vw = vandermonde(center_ramp(w), c.max_exp);
    return (vh * c.coeffs * vw.transpose()).array();
}

namespace detail {

// Subtraction of the quadratic fit from the fine fit with bias averaging.
// Quadratic entries beyond the fine degree cannot occur; fine entries beyond
// the quadratic degree are kept as-is (the quadratic fit is zero there).
inline SpatialPolyCoeffs deskew_any(const SpatialPolyCoeffs& fine, const SpatialPolyCoeffs& quad) {
    SpatialPolyCoeffs out = fine;
    for (int q = 0; q <= quad.max_exp; ++q)
        for (int z = 0; z <= quad.max_exp; ++z)
            if (q != 0 || z != 0) out.coeffs(q, z) -= quad.coeffs(q, z);
    out.coeffs(0, 0) = 0.5 * (fine.coeffs(0, 0) + quad.coeffs(0, 0));
    return out;
}

}  // namespace detail

/// Removes low-frequency skew: the quadratic fit is subtracted from the fine
/// fit term by term, except the bias, which is averaged between the two.
inline SpatialPolyCoeffs deskew(const SpatialPolyCoeffs& fine, const SpatialPolyCoeffs& quad) {
    if (quad.max_exp != 2)
        throw DomainError("deskew: quadratic fit must have max exponent 2, got " +
                          std::to_string(quad.max_exp));
    if (fine.max_exp <= 2)
        throw DomainError("deskew: fine fit must have max exponent > 2, got " +
                          std::to_string(fine.max_exp));
    return detail::deskew_any(fine, quad);
}

/// Least-squares fit, over all pixels, of the evaluated spatial surface onto
/// radial powers {P^r : 0 <= r <= max_exp}.
inline RadialCoeffs fit_radial(const SpatialPolyCoeffs& spatial, const BasisGrids& grids,
                               int max_exp) {
    const Eigen::Index h = grids.height();
    const Eigen::Index w = grids.width();
    const Eigen::Index n = max_exp + 1;
    if (n > h * w)
        throw SingularFitError("fit_radial: under-determined, " + std::to_string(n) +
                               " coefficients > " + std::to_string(h * w) + " pixels");
    const Grid surface = evaluate_spatial(spatial, h, w);
    Eigen::MatrixXd design(h * w, n);
    design.col(0).setOnes();
    const Eigen::Map<const Eigen::VectorXd> p_flat(grids.P.data(), h * w);
    for (Eigen::Index r = 1; r < n; ++r)
        design.col(r) = design.col(r - 1).cwiseProduct(p_flat);
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
    if (qr.rank() < n)
        throw SingularFitError("fit_radial: rank-deficient design (too few distinct radii for "
                               "max exponent " +
                               std::to_string(max_exp) + ")");
    RadialCoeffs out;
    out.coeffs = qr.solve(Eigen::Map<const Eigen::VectorXd>(surface.data(), h * w).eval());
    return out;
}

/// Fits the trajectory of every radial coefficient across ambient
/// temperature to a polynomial of t_amb. Row k of the returned
/// (m_ambient+1) x (m_radial+1) matrix multiplies t_amb^k.
inline Eigen::MatrixXd fit_ambient(const std::vector<RadialCoeffs>& radial_sets,
                                   const std::vector<double>& t_amb, int m_ambient) {
    if (radial_sets.size() != t_amb.size())
        throw DomainError("fit_ambient: " + std::to_string(radial_sets.size()) +
                          " radial sets for " + std::to_string(t_amb.size()) +
                          " ambient temperatures");
    const std::set<double> distinct(t_amb.begin(), t_amb.end());
    if (distinct.size() < static_cast<std::size_t>(m_ambient) + 1)
        throw DomainError("fit_ambient: need " + std::to_string(m_ambient + 1) +
                          " distinct ambient temperatures, got " + std::to_string(distinct.size()));
    const Eigen::Index n_radial = radial_sets.front().coeffs.size();
    Eigen::MatrixXd rhs(t_amb.size(), n_radial);
    for (std::size_t i = 0; i < radial_sets.size(); ++i) {
        if (radial_sets[i].coeffs.size() != n_radial)
            throw DomainError("fit_ambient: radial sets have mixed lengths");
        rhs.row(i) = radial_sets[i].coeffs;
    }
    const Eigen::Map<const Eigen::VectorXd> t(t_amb.data(), t_amb.size());
    return polyfit(t, rhs, m_ambient, "fit_ambient");
}

/// Spatial mean of each point's per-pixel variance, averaged over all
/// operating points. This is the default sensor noise recorded in the model.
inline double estimate_noise_variance(const std::vector<OperatingPoint>& points) {
    if (points.empty()) throw DomainError("estimate_noise_variance: no operating points");
    double acc = 0.0;
    for (const auto& p : points) acc += p.var_frame.mean();
    return acc / static_cast<double>(points.size());
}

namespace detail {

inline Eigen::Index count_distinct(const Grid& g) {
    std::set<double> values(g.data(), g.data() + g.size());
    return static_cast<Eigen::Index>(values.size());
}

template <typename Fn>
auto stage(const char* name, Fn&& fn) {
    try {
        return fn();
    } catch (const Error& e) {
        throw Error(std::string("characterize_camera [") + name + "]: " + e.what());
    }
}

}  // namespace detail

/// Builds a CameraModel from a blackbody campaign: per-ambient pixel-wise
/// fits, Gaussian smoothing, quadratic + fine spatial fits, skew removal,
/// radial fit, and the ambient-temperature fit producing one gamma matrix
/// per gray-level order.
///
/// Degrees that the frame geometry cannot support are reduced: the fine
/// spatial exponent is capped at min(h, w) - 1 and the radial exponent at
/// the number of distinct radii minus one, so degenerate grids (a 2x2
/// frame) still characterize. The effective degrees are recorded in the
/// returned model.
inline CameraModel characterize_camera(const std::vector<OperatingPoint>& points,
                                       const FitConfig& cfg) {
    if (points.empty()) throw DomainError("characterize_camera: no operating points");
    const Eigen::Index h = points.front().mean_frame.height();
    const Eigen::Index w = points.front().mean_frame.width();
    for (const auto& p : points)
        require_same_shape(p.mean_frame.values, points.front().mean_frame.values,
                           "characterize_camera");

    std::map<double, std::vector<OperatingPoint>> by_ambient;
    for (const auto& p : points) by_ambient[p.t_amb].push_back(p);
    std::vector<double> ambients;
    std::vector<const std::vector<OperatingPoint>*> groups;
    for (const auto& [t, group] : by_ambient) {
        ambients.push_back(t);
        groups.push_back(&group);
        std::set<double> objs;
        for (const auto& p : group) objs.insert(p.t_obj);
        if (objs.size() < static_cast<std::size_t>(cfg.m_gl) + 1)
            throw DomainError("characterize_camera: ambient " + std::to_string(t) + " has " +
                              std::to_string(objs.size()) + " distinct object temperatures, need " +
                              std::to_string(cfg.m_gl + 1));
    }
    if (ambients.size() < static_cast<std::size_t>(cfg.m_ambient) + 1)
        throw DomainError("characterize_camera: " + std::to_string(ambients.size()) +
                          " distinct ambient temperatures, need " +
                          std::to_string(cfg.m_ambient + 1));

    const BasisGrids grids = make_basis_grids(h, w);
    const int fine_exp =
        std::min<int>(cfg.m_spatial_fine, static_cast<int>(std::min(h, w)) - 1);
    const int quad_exp = std::min(cfg.m_spatial_quad, std::max(fine_exp - 1, 0));
    const int radial_exp = std::min<int>(
        cfg.m_radial, static_cast<int>(std::min(detail::count_distinct(grids.P), h * w)) - 1);

    const auto n_amb = static_cast<std::int64_t>(ambients.size());
    std::vector<PixelwiseCoeffs> pixelwise(n_amb);
    parallel_for(n_amb, [&](std::int64_t i) {
        pixelwise[i] = detail::stage("fit_pixelwise",
                                     [&] { return fit_pixelwise(*groups[i], cfg.m_gl); });
    });

    CameraModel model;
    model.gamma.resize(cfg.m_gl + 1);
    for (int m = 0; m <= cfg.m_gl; ++m) {
        std::vector<RadialCoeffs> radial(n_amb);
        parallel_for(n_amb, [&](std::int64_t i) {
            const Grid smoothed = detail::stage(
                "smooth", [&] { return gaussian_smooth(pixelwise[i].maps[m], cfg.smoothing_sigma); });
            const SpatialPolyCoeffs quad =
                detail::stage("fit_spatial_quad", [&] { return fit_spatial(smoothed, quad_exp); });
            const SpatialPolyCoeffs fine =
                detail::stage("fit_spatial_fine", [&] { return fit_spatial(smoothed, fine_exp); });
            const SpatialPolyCoeffs skewless = detail::deskew_any(fine, quad);
            radial[i] =
                detail::stage("fit_radial", [&] { return fit_radial(skewless, grids, radial_exp); });
        });
        model.gamma[m] = detail::stage(
            "fit_ambient", [&] { return fit_ambient(radial, ambients, cfg.m_ambient); });
    }

    model.degrees = {cfg.m_gl, fine_exp, radial_exp, cfg.m_ambient};
    model.height = h;
    model.width = w;
    model.gl_min = points.front().mean_frame.values.minCoeff();
    model.gl_max = points.front().mean_frame.values.maxCoeff();
    model.temp_min = points.front().t_obj;
    model.temp_max = points.front().t_obj;
    for (const auto& p : points) {
        model.gl_min = std::min(model.gl_min, p.mean_frame.values.minCoeff());
        model.gl_max = std::max(model.gl_max, p.mean_frame.values.maxCoeff());
        model.temp_min = std::min(model.temp_min, p.t_obj);
        model.temp_max = std::max(model.temp_max, p.t_obj);
    }
    if (model.gl_max <= model.gl_min) model.gl_max = model.gl_min + 1.0;  // flat campaign
    if (model.temp_max <= model.temp_min) model.temp_max = model.temp_min + 1.0;
    model.t_amb_lo = ambients.front();
    model.t_amb_hi = ambients.back();
    model.noise_var_gl2 = estimate_noise_variance(points);
    return model;
}

}  // namespace thermonu
