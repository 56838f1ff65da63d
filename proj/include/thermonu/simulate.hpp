#pragma once

#include <cfenv>
#include <cmath>
#include <cstdint>

#include "thermonu/basis.hpp"
#include "thermonu/polyfit.hpp"
#include "thermonu/rng.hpp"
#include "thermonu/types.hpp"

namespace thermonu {

/// Degradation parameters. gaussian_var is the additive-equivalent noise
/// variance in gray levels squared; the FPN bounds are multiplicative
/// per-column factors.
struct NoiseSpec {
    double gaussian_var = 5.0;
    double fpn_vmin = 0.9;
    double fpn_vmax = 1.0;
    std::uint64_t seed = 0;
};

inline void validate_noise_spec(const NoiseSpec& s) {
    if (!(s.gaussian_var >= 0.0)) throw DomainError("noise spec: gaussian_var must be >= 0");
    if (!(s.fpn_vmin > 0.0) || !(s.fpn_vmin <= s.fpn_vmax))
        throw DomainError("noise spec: need 0 < fpn_vmin <= fpn_vmax");
}

// Sub-stream tags so one seed drives independent draws.
namespace stream {
constexpr std::uint64_t kFpn = 1;
constexpr std::uint64_t kGaussian = 2;
constexpr std::uint64_t kAmbient = 3;
constexpr std::uint64_t kAugment = 4;
}  // namespace stream

/// Radial coefficients at a given ambient temperature:
/// coeffs[r] = sum_k gamma[order](k, r) * t_amb^k.
/// Ambient temperatures outside the model's validity interval extrapolate;
/// callers that care should warn (see CameraModel::t_amb_lo/hi).
inline RadialCoeffs radial_at(const CameraModel& model, int order, double t_amb) {
    if (order < 0 || order > model.degrees.m_gl)
        throw DomainError("radial_at: order " + std::to_string(order) + " out of range [0, " +
                          std::to_string(model.degrees.m_gl) + "]");
    const Eigen::MatrixXd& g = model.gamma[order];
    RadialCoeffs out;
    out.coeffs.resize(g.cols());
    for (Eigen::Index r = 0; r < g.cols(); ++r) out.coeffs[r] = polyval(g.col(r), t_amb);
    return out;
}

/// Evaluates a radial polynomial element-wise on the radial kernel P.
inline Grid evaluate_radial(const RadialCoeffs& radial, const Grid& p) {
    Grid acc = Grid::Constant(p.rows(), p.cols(), 0.0);
    for (Eigen::Index r = radial.coeffs.size() - 1; r >= 0; --r)
        acc = acc * p + radial.coeffs[r];
    return acc;
}

/// Per-pixel coefficient maps at a given ambient temperature; map m is the
/// radial polynomial of order m evaluated on P.
inline PixelwiseCoeffs pixelwise_at(const CameraModel& model, double t_amb) {
    const BasisGrids grids = make_basis_grids(model.height, model.width);
    PixelwiseCoeffs out;
    out.maps.reserve(model.degrees.m_gl + 1);
    for (int m = 0; m <= model.degrees.m_gl; ++m)
        out.maps.push_back(evaluate_radial(radial_at(model, m, t_amb), grids.P));
    return out;
}

/// Applies per-pixel coefficients to a temperature map (Horner in t_obj).
inline Grid apply_pixelwise(const PixelwiseCoeffs& coeffs, const Grid& t_obj) {
    Grid acc = coeffs.maps.back();
    for (auto it = coeffs.maps.rbegin() + 1; it != coeffs.maps.rend(); ++it)
        acc = acc * t_obj + *it;
    return acc;
}

/// Synthesizes the noiseless, real-valued gray-level response of the camera
/// to a temperature map at the given ambient temperature.
inline GrayFrame simulate_frame(const CameraModel& model, const TemperatureMap& t_obj,
                                double t_amb) {
    if (t_obj.height() != model.height || t_obj.width() != model.width)
        throw GeometryError("simulate_frame: map is " + std::to_string(t_obj.height()) + "x" +
                            std::to_string(t_obj.width()) + ", model is " +
                            std::to_string(model.height) + "x" + std::to_string(model.width));
    for (Eigen::Index i = 0; i < t_obj.height(); ++i)
        for (Eigen::Index c = 0; c < t_obj.width(); ++c) {
            const double v = t_obj.values(i, c);
            if (!std::isfinite(v) || v < model.temp_min || v > model.temp_max)
                throw DomainError("simulate_frame: temperature " + std::to_string(v) +
                                  " at pixel (" + std::to_string(i) + "," + std::to_string(c) +
                                  ") outside model bounds [" + std::to_string(model.temp_min) +
                                  ", " + std::to_string(model.temp_max) + "]");
        }
    return GrayFrame{apply_pixelwise(pixelwise_at(model, t_amb), t_obj.values), false};
}

/// Column-correlated fixed-pattern noise: one uniform draw in
/// [fpn_vmin, fpn_vmax] per column, replicated down all rows.
inline Grid gen_fpn(Eigen::Index h, Eigen::Index w, const NoiseSpec& spec) {
    validate_noise_spec(spec);
    CounterRng rng(derive_stream(spec.seed, stream::kFpn));
    Eigen::RowVectorXd cols(w);
    for (Eigen::Index j = 0; j < w; ++j) cols[j] = rng.next_uniform(spec.fpn_vmin, spec.fpn_vmax);
    return cols.replicate(h, 1).array();
}

/// Degrades a normalized frame: multiplies it element-wise by a Gaussian
/// field of mean 1 and by the FPN map. The Gaussian standard deviation is
/// sqrt(gaussian_var)/gl_span, so in gray levels the additive-equivalent
/// variance of a full-scale pixel is gaussian_var.
inline Grid degrade(const Grid& frame_norm, const NoiseSpec& spec,
                    double gl_span = kGrayLevelMax) {
    validate_noise_spec(spec);
    if (!(gl_span > 0.0)) throw DomainError("degrade: gl_span must be > 0");
    const double sigma_norm = std::sqrt(spec.gaussian_var) / gl_span;
    const Grid fpn = gen_fpn(frame_norm.rows(), frame_norm.cols(), spec);
    CounterRng rng(derive_stream(spec.seed, stream::kGaussian));
    Grid field(frame_norm.rows(), frame_norm.cols());
    for (Eigen::Index i = 0; i < field.rows(); ++i)
        for (Eigen::Index c = 0; c < field.cols(); ++c)
            field(i, c) = rng.next_gaussian(1.0, sigma_norm);
    return field * fpn * frame_norm;
}

struct QuantizeResult {
    GrayFrame frame;         // quantized, values in [0, 16383]
    std::int64_t clamped = 0;  // pixels that fell outside the 14-bit range
};

/// Rounds half-to-even and clamps to the 14-bit range.
inline QuantizeResult quantize(const GrayFrame& frame) {
    QuantizeResult out;
    out.frame.quantized = true;
    out.frame.values.resize(frame.height(), frame.width());
    for (Eigen::Index i = 0; i < frame.height(); ++i)
        for (Eigen::Index c = 0; c < frame.width(); ++c) {
            double v = std::nearbyint(frame.values(i, c));  // FE_TONEAREST: ties to even
            if (v < 0.0) {
                v = 0.0;
                ++out.clamped;
            } else if (v > kGrayLevelMax) {
                v = kGrayLevelMax;
                ++out.clamped;
            }
            out.frame.values(i, c) = v;
        }
    return out;
}

}  // namespace thermonu
