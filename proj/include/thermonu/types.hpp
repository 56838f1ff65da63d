#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "thermonu/errors.hpp"

namespace thermonu {

/// 2D grid of doubles, indexed (row, col). Row 0 is the top of the frame.
using Grid = Eigen::ArrayXXd;

/// Per-pixel validity mask; true marks an invalid pixel.
using Mask = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;

/// Scene temperatures in degrees Celsius.
struct TemperatureMap {
    Grid values;

    Eigen::Index height() const { return values.rows(); }
    Eigen::Index width() const { return values.cols(); }
};

/// Raw camera output. Quantized frames hold 14-bit integer gray levels;
/// unquantized frames hold real-valued counts (pre-quantization or averaged).
struct GrayFrame {
    Grid values;
    bool quantized = false;

    Eigen::Index height() const { return values.rows(); }
    Eigen::Index width() const { return values.cols(); }
};

constexpr double kGrayLevelMax = 16383.0;  // 14-bit sensor output

/// Global default range for scene temperatures, degrees Celsius.
constexpr double kDefaultTempMin = 0.0;
constexpr double kDefaultTempMax = 100.0;

/// One averaged blackbody measurement: N frames taken at a fixed
/// (ambient temperature, object temperature) pair, reduced to a per-pixel
/// mean and sample variance.
struct OperatingPoint {
    double t_amb = 0.0;  // degrees C
    double t_obj = 0.0;  // degrees C
    GrayFrame mean_frame;
    Grid var_frame;  // gray levels squared, >= 0
    int n_frames = 1;
};

/// Normalized coordinate grids shared by the spatial and radial fits.
/// H varies only with the row index, W only with the column index; both
/// ramp uniformly from -0.5 to +0.5. P is the per-pixel distance from the
/// frame center, invariant under horizontal and vertical flips.
struct BasisGrids {
    Grid H;
    Grid W;
    Grid P;  // sqrt(H^2 + W^2), element-wise

    Eigen::Index height() const { return P.rows(); }
    Eigen::Index width() const { return P.cols(); }
};

/// Per-pixel polynomial coefficients of gray level vs object temperature:
/// maps[m] multiplies t_obj^m.
struct PixelwiseCoeffs {
    std::vector<Grid> maps;

    int order_count() const { return static_cast<int>(maps.size()); }
};

/// Tensor-product surface coefficients: coeffs(q, z) multiplies H^q * W^z.
struct SpatialPolyCoeffs {
    int max_exp = 0;
    Eigen::MatrixXd coeffs;  // (max_exp+1) x (max_exp+1)
};

/// Radial polynomial coefficients: coeffs[r] multiplies P^r.
struct RadialCoeffs {
    Eigen::VectorXd coeffs;

    int max_exp() const { return static_cast<int>(coeffs.size()) - 1; }
};

/// Maximum exponents of the four polynomial stages.
struct FitDegrees {
    int m_gl = 2;
    int m_spatial_fine = 15;
    int m_radial = 8;
    int m_ambient = 3;
};

/// Fit configuration. Every degree is a maximum exponent; sums run
/// inclusively over 0..M.
struct FitConfig {
    int m_gl = 2;
    int m_spatial_quad = 2;
    int m_spatial_fine = 15;
    int m_radial = 8;
    int m_ambient = 3;
    double smoothing_sigma = 1.0;  // pixels

    FitDegrees degrees() const { return {m_gl, m_spatial_fine, m_radial, m_ambient}; }
};

/// The complete camera characterization. gamma[m] holds the ambient-
/// temperature polynomial of every radial coefficient for gray-level order
/// m: entry (k, r) multiplies t_amb^k in the trajectory of the coefficient
/// of P^r. All coefficient bases are raw powers (no internal scaling).
struct CameraModel {
    std::vector<Eigen::MatrixXd> gamma;  // m_gl+1 matrices, (m_ambient+1) x (m_radial+1)
    FitDegrees degrees;
    Eigen::Index height = 0;
    Eigen::Index width = 0;
    double gl_min = 0.0;
    double gl_max = kGrayLevelMax;
    double temp_min = kDefaultTempMin;
    double temp_max = kDefaultTempMax;
    double t_amb_lo = 0.0;  // validity interval of the ambient fit
    double t_amb_hi = 0.0;
    double noise_var_gl2 = 0.0;  // default sensor noise, gray levels squared

    /// Rebinds the frame geometry. The radial coefficients live on the
    /// normalized [-0.5, 0.5] ramps, so the model evaluates on any grid;
    /// only the geometry metadata changes.
    CameraModel with_geometry(Eigen::Index h, Eigen::Index w) const {
        CameraModel m = *this;
        m.height = h;
        m.width = w;
        return m;
    }
};

inline bool all_finite(const Grid& g) { return g.isFinite().all(); }

inline void require_same_shape(const Grid& a, const Grid& b, const std::string& what) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        throw GeometryError(what + ": shape mismatch, " + std::to_string(a.rows()) + "x" +
                            std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + "x" +
                            std::to_string(b.cols()));
    }
}

/// Checks the CameraModel invariants; throws DomainError on violation.
inline void validate_model(const CameraModel& m) {
    if (m.gamma.size() != static_cast<std::size_t>(m.degrees.m_gl + 1))
        throw DomainError("camera model: expected " + std::to_string(m.degrees.m_gl + 1) +
                          " gamma matrices, got " + std::to_string(m.gamma.size()));
    for (std::size_t i = 0; i < m.gamma.size(); ++i) {
        const auto& g = m.gamma[i];
        if (g.rows() != m.degrees.m_ambient + 1 || g.cols() != m.degrees.m_radial + 1)
            throw DomainError("camera model: gamma[" + std::to_string(i) + "] has shape " +
                              std::to_string(g.rows()) + "x" + std::to_string(g.cols()));
        if (!g.allFinite())
            throw DomainError("camera model: non-finite entry in gamma[" + std::to_string(i) + "]");
    }
    if (m.height < 2 || m.width < 2)
        throw GeometryError("camera model: frame geometry must be at least 2x2");
    if (!(m.gl_min < m.gl_max)) throw DomainError("camera model: gl_bounds not strictly ordered");
    if (!(m.temp_min < m.temp_max))
        throw DomainError("camera model: temp_bounds not strictly ordered");
    if (!(m.noise_var_gl2 >= 0.0)) throw DomainError("camera model: negative noise variance");
}

}  // namespace thermonu
