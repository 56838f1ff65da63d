#pragma once

#include <chrono>
#include <cmath>
#include <vector>

#include "thermonu/characterize.hpp"
#include "thermonu/estimate.hpp"
#include "thermonu/metrics.hpp"
#include "thermonu/rng.hpp"
#include "thermonu/simulate.hpp"
#include "thermonu/types.hpp"

namespace thermonu {

/// Ambient and object temperature sets of the reference blackbody campaign.
inline std::vector<double> default_ambient_set() {
    return {27.0, 31.0, 37.2, 38.9, 40.4, 41.5, 43.6, 44.7, 46.2, 46.8, 48.0, 50.8};
}

inline std::vector<double> default_object_set() {
    return {20.0, 25.0, 30.0, 35.0, 40.0, 45.0, 50.0, 55.0, 60.0};
}

namespace detail {

// Radial coefficient vector (powers P^2..P^max) whose surface the
// characterization chain preserves: its quadratic fit carries nothing
// beyond the bias (the skew-removal step subtracts the full quadratic
// projection, so quadratic-captured structure cannot survive), and its
// grid mean equals its fine-fit bias (so the bias averaging in the deskew
// step is a no-op). P^1 is excluded: its kink at the frame center is
// poorly representable by the fine spatial fit. The returned vector is
// scaled to unit surface standard deviation; zero when the radial degree
// leaves no room for such a direction.
inline Eigen::VectorXd preserved_radial_shape(Eigen::Index h, Eigen::Index w, int m_radial,
                                              int m_spatial_fine) {
    Eigen::VectorXd shape = Eigen::VectorXd::Zero(m_radial + 1);
    const Eigen::Index cols = m_radial - 1;  // powers 2..m_radial
    if (cols <= 4) return shape;             // the 4 constraints consume everything
    const BasisGrids grids = make_basis_grids(h, w);
    const int fine = std::min<int>(m_spatial_fine, static_cast<int>(std::min(h, w)) - 1);

    Eigen::MatrixXd constraints(4, cols);
    std::vector<Grid> surfaces;
    Grid power = grids.P * grids.P;
    for (Eigen::Index k = 0; k < cols; ++k) {
        if (k > 0) power *= grids.P;
        surfaces.push_back(power);
        const SpatialPolyCoeffs quad = fit_spatial(power, 2);
        const SpatialPolyCoeffs fine_fit = fit_spatial(power, fine);
        constraints(0, k) = quad.coeffs(0, 2);
        constraints(1, k) = quad.coeffs(2, 0);
        constraints(2, k) = quad.coeffs(2, 2);
        constraints(3, k) = power.mean() - fine_fit.coeffs(0, 0);
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(constraints, Eigen::ComputeFullV);
    const Eigen::VectorXd dir = svd.matrixV().col(4);  // first null direction
    Grid surface = Grid::Zero(h, w);
    for (Eigen::Index k = 0; k < cols; ++k) surface += dir[k] * surfaces[k];
    const double sd = std::sqrt((surface - surface.mean()).square().mean());
    if (!(sd > 0.0)) return shape;
    for (Eigen::Index k = 0; k < cols; ++k) shape[k + 2] = dir[k] / sd;
    return shape;
}

}  // namespace detail

/// Builds a synthetic reference camera with realistic magnitudes: a
/// gray-level response near 2215 + 0.36 t + 2.55 t^2 at the frame center,
/// an ambient-dependent offset drift, and a radially symmetric, skew-free
/// nonuniformity pattern on every order. The pattern lives in the subspace
/// the characterization chain preserves (see preserved_radial_shape) and is
/// scaled to roughly 12 gray levels of spatial standard deviation on the
/// order-0 map.
inline CameraModel make_reference_model(Eigen::Index h, Eigen::Index w,
                                        const FitConfig& cfg = {}) {
    const int n_radial = cfg.m_radial;
    const Eigen::VectorXd shape =
        detail::preserved_radial_shape(h, w, n_radial, cfg.m_spatial_fine);

    Eigen::VectorXd constant = Eigen::VectorXd::Zero(n_radial + 1);
    constant[0] = 1.0;

    CameraModel m;
    m.degrees = cfg.degrees();
    m.height = h;
    m.width = w;
    m.gamma.resize(cfg.m_gl + 1, Eigen::MatrixXd::Zero(cfg.m_ambient + 1, n_radial + 1));

    // Order 0: large offset with ambient drift and the dominant pattern.
    m.gamma[0].row(0) = (2215.32 * constant + 12.0 * shape).transpose();
    if (cfg.m_ambient >= 1) m.gamma[0].row(1) = (1.5 * constant + 0.15 * shape).transpose();
    if (cfg.m_ambient >= 2) m.gamma[0].row(2) = (0.02 * constant).transpose();
    // Order 1 and 2: center coefficients of realistic size, small shaped parts.
    if (cfg.m_gl >= 1) {
        m.gamma[1].row(0) = (0.36 * constant + 0.004 * shape).transpose();
        if (cfg.m_ambient >= 1) m.gamma[1].row(1) = (0.002 * constant).transpose();
    }
    if (cfg.m_gl >= 2) {
        m.gamma[2].row(0) = (2.55 * constant + 0.002 * shape).transpose();
        if (cfg.m_ambient >= 1) m.gamma[2].row(1) = (1e-4 * constant).transpose();
    }

    m.temp_min = 20.0;
    m.temp_max = 60.0;
    m.t_amb_lo = default_ambient_set().front();
    m.t_amb_hi = default_ambient_set().back();
    m.gl_min = 0.0;
    m.gl_max = kGrayLevelMax;
    m.noise_var_gl2 = 0.0;
    return m;
}

/// Synthesizes a blackbody campaign from a model. With noise_var > 0 the
/// mean frames carry averaged sensor noise (variance noise_var / n_avg per
/// pixel) and the variance frames are set to noise_var, matching the
/// statistics of averaging n_avg raw frames.
inline std::vector<OperatingPoint> synthesize_campaign(const CameraModel& model,
                                                       const std::vector<double>& t_ambs,
                                                       const std::vector<double>& t_objs,
                                                       double noise_var = 0.0, int n_avg = 1,
                                                       std::uint64_t seed = 0) {
    std::vector<OperatingPoint> points;
    points.reserve(t_ambs.size() * t_objs.size());
    std::uint64_t index = 0;
    for (const double t_amb : t_ambs) {
        const PixelwiseCoeffs coeffs = pixelwise_at(model, t_amb);
        for (const double t_obj : t_objs) {
            const Grid uniform = Grid::Constant(model.height, model.width, t_obj);
            Grid mean = apply_pixelwise(coeffs, uniform);
            if (noise_var > 0.0) {
                CounterRng rng(derive_stream(seed, index));
                const double sd = std::sqrt(noise_var / std::max(n_avg, 1));
                for (Eigen::Index i = 0; i < mean.rows(); ++i)
                    for (Eigen::Index c = 0; c < mean.cols(); ++c)
                        mean(i, c) += rng.next_gaussian(0.0, sd);
            }
            OperatingPoint op;
            op.t_amb = t_amb;
            op.t_obj = t_obj;
            op.mean_frame = GrayFrame{std::move(mean), false};
            op.var_frame = Grid::Constant(model.height, model.width, noise_var);
            op.n_frames = std::max(n_avg, 1);
            points.push_back(std::move(op));
            ++index;
        }
    }
    return points;
}

struct OperatingPointScore {
    double t_amb = 0.0;
    double t_obj = 0.0;
    double r2 = 0.0;            // across the pixel population
    double max_rel_error = 0.0;  // |data - fit| / |data|
};

struct SelfCalReport {
    std::vector<OperatingPointScore> per_point;
    double min_r2 = 1.0;         // worst spatial R^2 over operating points
    double min_pixel_r2 = 1.0;   // worst per-pixel R^2 over the operating-point sweep
    double max_rel_error = 0.0;
    double roundtrip_mae = 0.0;  // simulate with reference, invert with rebuilt
    double noise_var_estimate = 0.0;
    double elapsed_seconds = 0.0;
    CameraModel rebuilt;
};

/// End-to-end oracle: synthesizes a campaign from the reference model,
/// re-characterizes it, and scores the rebuilt model against the campaign
/// data at every operating point.
inline SelfCalReport selfcal_check(const CameraModel& reference,
                                   const std::vector<double>& t_ambs,
                                   const std::vector<double>& t_objs, double noise_var = 0.0,
                                   int n_avg = 1, const FitConfig& cfg = {},
                                   std::uint64_t seed = 0) {
    const auto start = std::chrono::steady_clock::now();
    const std::vector<OperatingPoint> points =
        synthesize_campaign(reference, t_ambs, t_objs, noise_var, n_avg, seed);

    SelfCalReport report;
    report.rebuilt = characterize_camera(points, cfg);
    report.noise_var_estimate = report.rebuilt.noise_var_gl2;

    Grid px_sum = Grid::Zero(reference.height, reference.width);
    Grid px_sumsq = Grid::Zero(reference.height, reference.width);
    Grid px_ssres = Grid::Zero(reference.height, reference.width);
    for (const auto& op : points) {
        const Grid fit =
            apply_pixelwise(pixelwise_at(report.rebuilt, op.t_amb),
                            Grid::Constant(reference.height, reference.width, op.t_obj));
        const Grid& data = op.mean_frame.values;
        const double mean = data.mean();
        const double ss_tot = (data - mean).square().sum();
        const double ss_res = (data - fit).square().sum();
        OperatingPointScore score;
        score.t_amb = op.t_amb;
        score.t_obj = op.t_obj;
        score.r2 = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : (ss_res == 0.0 ? 1.0 : 0.0);
        score.max_rel_error = ((data - fit).abs() / data.abs().max(1e-12)).maxCoeff();
        report.per_point.push_back(score);
        report.min_r2 = std::min(report.min_r2, score.r2);
        report.max_rel_error = std::max(report.max_rel_error, score.max_rel_error);
        px_sum += data;
        px_sumsq += data.square();
        px_ssres += (data - fit).square();
    }
    {
        const double n_ops = static_cast<double>(points.size());
        const Grid px_sstot = px_sumsq - px_sum.square() / n_ops;
        const Grid px_r2 =
            (px_sstot > 0.0).select(1.0 - px_ssres / px_sstot.max(1e-300), Grid::Constant(
                reference.height, reference.width, 1.0));
        report.min_pixel_r2 = px_r2.minCoeff();
    }

    // Round trip: reference simulates an interior gradient, rebuilt inverts.
    {
        const double lo = reference.temp_min + 0.1 * (reference.temp_max - reference.temp_min);
        const double hi = reference.temp_max - 0.1 * (reference.temp_max - reference.temp_min);
        Grid ramp(reference.height, reference.width);
        for (Eigen::Index i = 0; i < ramp.rows(); ++i)
            for (Eigen::Index c = 0; c < ramp.cols(); ++c)
                ramp(i, c) = lo + (hi - lo) * static_cast<double>(i + c) /
                                      static_cast<double>(ramp.rows() + ramp.cols() - 2);
        const double t_amb_mid = 0.5 * (reference.t_amb_lo + reference.t_amb_hi);
        const GrayFrame frame = simulate_frame(reference, TemperatureMap{ramp}, t_amb_mid);
        const MaskedTemperature est = invert_polynomial(report.rebuilt, frame, t_amb_mid);
        report.roundtrip_mae = mae(est.map.values, ramp, est.mask);
    }

    report.elapsed_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return report;
}

}  // namespace thermonu
