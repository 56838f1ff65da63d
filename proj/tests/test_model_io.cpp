#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "thermonu/model_io.hpp"
#include "thermonu/rng.hpp"

using namespace thermonu;

namespace {

CameraModel sample_model() {
    CameraModel m;
    m.degrees = {2, 15, 8, 3};
    m.height = 8;
    m.width = 6;
    CounterRng rng(42);
    for (int g = 0; g < 3; ++g) {
        Eigen::MatrixXd mat(4, 9);
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 9; ++j) mat(i, j) = rng.next_uniform(-10.0, 10.0);
        m.gamma.push_back(mat);
    }
    m.gl_min = 1200.5;
    m.gl_max = 15000.25;
    m.temp_min = 20.0;
    m.temp_max = 60.0;
    m.t_amb_lo = 27.0;
    m.t_amb_hi = 50.8;
    m.noise_var_gl2 = 5.0;
    return m;
}

std::string temp_path(const char* name) {
    return (std::filesystem::temp_directory_path() / name).string();
}

}  // namespace

TEST(ModelIo, RoundTripIsExact) {
    const auto m = sample_model();
    const auto path = temp_path("model_roundtrip.tcam.json");
    save_model(m, path);
    const auto loaded = load_model(path);
    ASSERT_EQ(loaded.gamma.size(), m.gamma.size());
    for (std::size_t g = 0; g < m.gamma.size(); ++g)
        for (int i = 0; i < m.gamma[g].rows(); ++i)
            for (int j = 0; j < m.gamma[g].cols(); ++j)
                EXPECT_EQ(loaded.gamma[g](i, j), m.gamma[g](i, j));
    EXPECT_EQ(loaded.height, m.height);
    EXPECT_EQ(loaded.width, m.width);
    EXPECT_EQ(loaded.gl_min, m.gl_min);
    EXPECT_EQ(loaded.gl_max, m.gl_max);
    EXPECT_EQ(loaded.temp_min, m.temp_min);
    EXPECT_EQ(loaded.temp_max, m.temp_max);
    EXPECT_EQ(loaded.t_amb_lo, m.t_amb_lo);
    EXPECT_EQ(loaded.t_amb_hi, m.t_amb_hi);
    EXPECT_EQ(loaded.noise_var_gl2, m.noise_var_gl2);
    std::remove(path.c_str());
}

TEST(ModelIo, TruncatedFileIsStructuredError) {
    const auto path = temp_path("model_truncated.tcam.json");
    save_model(sample_model(), path);
    std::ifstream in(path);
    std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    in.close();
    std::ofstream out(path, std::ios::trunc);
    out << content.substr(0, content.size() / 2);
    out.close();
    EXPECT_THROW(load_model(path), ParseError);
    std::remove(path.c_str());
}

TEST(ModelIo, NanGammaRejectedOnSave) {
    auto m = sample_model();
    m.gamma[1](2, 3) = std::nan("");
    EXPECT_THROW(save_model(m, temp_path("model_nan.tcam.json")), DomainError);
}

TEST(ModelIo, BadMagicNamesField) {
    const auto path = temp_path("model_magic.tcam.json");
    std::ofstream out(path);
    out << R"({"magic":"tcam9","height":4,"width":4})";
    out.close();
    try {
        load_model(path);
        FAIL() << "expected ParseError";
    } catch (const ParseError& e) {
        EXPECT_NE(std::string(e.what()).find("magic"), std::string::npos);
    }
    std::remove(path.c_str());
}

TEST(ModelIo, MissingFieldNamesField) {
    const auto path = temp_path("model_missing.tcam.json");
    save_model(sample_model(), path);
    std::ifstream in(path);
    nlohmann::json j;
    in >> j;
    in.close();
    j.erase("gl_bounds");
    std::ofstream out(path, std::ios::trunc);
    out << j.dump();
    out.close();
    try {
        load_model(path);
        FAIL() << "expected ParseError";
    } catch (const ParseError& e) {
        EXPECT_NE(std::string(e.what()).find("gl_bounds"), std::string::npos);
    }
    std::remove(path.c_str());
}

TEST(ModelIo, NonFiniteGammaInFileNamesField) {
    const auto path = temp_path("model_inf.tcam.json");
    save_model(sample_model(), path);
    std::ifstream in(path);
    nlohmann::json j;
    in >> j;
    in.close();
    j["gamma"][0][1][2] = "oops";
    std::ofstream out(path, std::ios::trunc);
    out << j.dump();
    out.close();
    try {
        load_model(path);
        FAIL() << "expected ParseError";
    } catch (const ParseError& e) {
        EXPECT_NE(std::string(e.what()).find("gamma[0]"), std::string::npos);
    }
    std::remove(path.c_str());
}

TEST(ModelIo, MissingFileIsIoError) {
    EXPECT_THROW(load_model("/nonexistent/not_here.tcam.json"), IoError);
}
