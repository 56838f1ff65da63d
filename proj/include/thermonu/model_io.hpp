#pragma once

#include <fstream>
#include <nlohmann/json.hpp>
#include <string>

#include "thermonu/types.hpp"

namespace thermonu {

/// Camera model file format (".tcam.json"): a single JSON document.
///
///   magic         "tcam1"
///   height, width frame geometry in pixels
///   degrees       {m_gl, m_spatial_fine, m_radial, m_ambient}
///   gamma         m_gl+1 matrices, each (m_ambient+1) rows x (m_radial+1)
///                 cols, nested row-major arrays
///   gl_bounds     [min, max] gray levels seen during characterization
///   temp_bounds   [min, max] object temperatures, degrees C
///   t_amb_range   [lo, hi] ambient validity interval, degrees C
///   noise_var_gl2 default sensor noise variance
///
/// Reals are serialized as JSON numbers at full round-trip precision.
inline constexpr const char* kModelMagic = "tcam1";

namespace detail {

inline nlohmann::json matrix_to_json(const Eigen::MatrixXd& m) {
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

inline Eigen::MatrixXd matrix_from_json(const nlohmann::json& j, Eigen::Index rows,
                                        Eigen::Index cols, const std::string& field) {
    if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != rows)
        throw ParseError("model load: field '" + field + "' must be an array of " +
                         std::to_string(rows) + " rows");
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
        const auto& row = j[i];
        if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols)
            throw ParseError("model load: field '" + field + "' row " + std::to_string(i) +
                             " must have " + std::to_string(cols) + " entries");
        for (Eigen::Index c = 0; c < cols; ++c) {
            if (!row[c].is_number())
                throw ParseError("model load: field '" + field + "' has a non-numeric entry");
            m(i, c) = row[c].get<double>();
            if (!std::isfinite(m(i, c)))
                throw ParseError("model load: field '" + field + "' has a non-finite entry");
        }
    }
    return m;
}

template <typename T>
T require_field(const nlohmann::json& j, const std::string& key) {
    if (!j.contains(key)) throw ParseError("model load: missing field '" + key + "'");
    try {
        return j.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
        throw ParseError("model load: field '" + key + "' has the wrong type");
    }
}

inline std::pair<double, double> require_pair(const nlohmann::json& j, const std::string& key) {
    const auto arr = require_field<std::vector<double>>(j, key);
    if (arr.size() != 2) throw ParseError("model load: field '" + key + "' must be [min, max]");
    if (!std::isfinite(arr[0]) || !std::isfinite(arr[1]))
        throw ParseError("model load: field '" + key + "' has a non-finite entry");
    return {arr[0], arr[1]};
}

}  // namespace detail

/// Serializes a model. The model is validated first; a NaN anywhere in
/// gamma, or unordered bounds, rejects the save.
inline void save_model(const CameraModel& m, const std::string& path) {
    validate_model(m);
    nlohmann::json j;
    j["magic"] = kModelMagic;
    j["height"] = m.height;
    j["width"] = m.width;
    j["degrees"] = {{"m_gl", m.degrees.m_gl},
                    {"m_spatial_fine", m.degrees.m_spatial_fine},
                    {"m_radial", m.degrees.m_radial},
                    {"m_ambient", m.degrees.m_ambient}};
    nlohmann::json gamma = nlohmann::json::array();
    for (const auto& g : m.gamma) gamma.push_back(detail::matrix_to_json(g));
    j["gamma"] = std::move(gamma);
    j["gl_bounds"] = {m.gl_min, m.gl_max};
    j["temp_bounds"] = {m.temp_min, m.temp_max};
    j["t_amb_range"] = {m.t_amb_lo, m.t_amb_hi};
    j["noise_var_gl2"] = m.noise_var_gl2;

    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("save_model: cannot open '" + path + "' for writing");
    out << j.dump(1) << '\n';
    if (!out) throw IoError("save_model: write failed for '" + path + "'");
}

inline CameraModel load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("load_model: cannot open '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("load_model: '" + path + "' is not valid JSON: " + e.what());
    }

    const auto magic = detail::require_field<std::string>(j, "magic");
    if (magic != kModelMagic)
        throw ParseError("model load: field 'magic' is '" + magic + "', expected '" +
                         kModelMagic + "'");

    CameraModel m;
    m.height = detail::require_field<Eigen::Index>(j, "height");
    m.width = detail::require_field<Eigen::Index>(j, "width");
    if (!j.contains("degrees") || !j["degrees"].is_object())
        throw ParseError("model load: missing field 'degrees'");
    const auto& deg = j["degrees"];
    m.degrees.m_gl = detail::require_field<int>(deg, "m_gl");
    m.degrees.m_spatial_fine = detail::require_field<int>(deg, "m_spatial_fine");
    m.degrees.m_radial = detail::require_field<int>(deg, "m_radial");
    m.degrees.m_ambient = detail::require_field<int>(deg, "m_ambient");
    if (m.degrees.m_gl < 0 || m.degrees.m_radial < 0 || m.degrees.m_ambient < 0)
        throw ParseError("model load: field 'degrees' has a negative entry");

    if (!j.contains("gamma") || !j["gamma"].is_array() ||
        static_cast<int>(j["gamma"].size()) != m.degrees.m_gl + 1)
        throw ParseError("model load: field 'gamma' must hold " +
                         std::to_string(m.degrees.m_gl + 1) + " matrices");
    for (int g = 0; g <= m.degrees.m_gl; ++g)
        m.gamma.push_back(detail::matrix_from_json(j["gamma"][g], m.degrees.m_ambient + 1,
                                                   m.degrees.m_radial + 1,
                                                   "gamma[" + std::to_string(g) + "]"));

    std::tie(m.gl_min, m.gl_max) = detail::require_pair(j, "gl_bounds");
    std::tie(m.temp_min, m.temp_max) = detail::require_pair(j, "temp_bounds");
    std::tie(m.t_amb_lo, m.t_amb_hi) = detail::require_pair(j, "t_amb_range");
    m.noise_var_gl2 = detail::require_field<double>(j, "noise_var_gl2");

    validate_model(m);
    return m;
}

}  // namespace thermonu
