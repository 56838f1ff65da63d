#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "thermonu/characterize.hpp"
#include "thermonu/rng.hpp"
#include "thermonu/selfcal.hpp"

using namespace thermonu;

namespace {

OperatingPoint make_point(double t_amb, double t_obj, const Grid& response) {
    OperatingPoint op;
    op.t_amb = t_amb;
    op.t_obj = t_obj;
    op.mean_frame = GrayFrame{response, false};
    op.var_frame = Grid::Zero(response.rows(), response.cols());
    return op;
}

}  // namespace

// --- fit_pixelwise -----------------------------------------------------

TEST(FitPixelwise, RecoversQuadraticResponse) {
    // Response of every pixel: 2215.32 + 0.36 t + 2.55 t^2 over t in 20..60.
    std::vector<OperatingPoint> points;
    for (double t = 20.0; t <= 60.0; t += 5.0)
        points.push_back(make_point(38.9, t, Grid::Constant(4, 4, 2215.32 + 0.36 * t + 2.55 * t * t)));
    const auto coeffs = fit_pixelwise(points, 2);
    ASSERT_EQ(coeffs.order_count(), 3);
    EXPECT_NEAR(coeffs.maps[0](2, 1), 2215.32, 1e-6);
    EXPECT_NEAR(coeffs.maps[1](2, 1), 0.36, 1e-6);
    EXPECT_NEAR(coeffs.maps[2](2, 1), 2.55, 1e-6);
}

TEST(FitPixelwise, ConstantResponseGivesBiasOnly) {
    std::vector<OperatingPoint> points;
    for (double t = 20.0; t <= 60.0; t += 10.0)
        points.push_back(make_point(30.0, t, Grid::Constant(3, 3, 1000.0)));
    const auto coeffs = fit_pixelwise(points, 2);
    EXPECT_NEAR(coeffs.maps[0](1, 1), 1000.0, 1e-9);
    EXPECT_NEAR(coeffs.maps[1](1, 1), 0.0, 1e-10);
    EXPECT_NEAR(coeffs.maps[2](1, 1), 0.0, 1e-11);
}

TEST(FitPixelwise, MatchesNormalEquationsOracle) {
    CounterRng rng(5);
    std::vector<OperatingPoint> points;
    Eigen::VectorXd t(9);
    Eigen::MatrixXd rhs(9, 4);
    for (int i = 0; i < 9; ++i) {
        t[i] = 20.0 + 5.0 * i;
        Grid g(2, 2);
        for (int p = 0; p < 4; ++p) g(p / 2, p % 2) = rng.next_uniform(1000.0, 9000.0);
        rhs.row(i) = Eigen::Map<const Eigen::VectorXd>(g.data(), 4);
        points.push_back(make_point(30.0, t[i], g));
    }
    const auto coeffs = fit_pixelwise(points, 1);
    const Eigen::MatrixXd expected = oracle::polyfit_normal_equations(t, rhs, 1);
    for (int p = 0; p < 4; ++p) {
        EXPECT_NEAR(coeffs.maps[0](p / 2, p % 2), expected(0, p),
                    1e-9 * std::abs(expected(0, p)));
        EXPECT_NEAR(coeffs.maps[1](p / 2, p % 2), expected(1, p),
                    1e-9 * std::max(std::abs(expected(1, p)), 1.0));
    }
}

TEST(FitPixelwise, DuplicateObjectTemperatureIsSingular) {
    std::vector<OperatingPoint> points;
    points.push_back(make_point(30.0, 25.0, Grid::Constant(2, 2, 1.0)));
    points.push_back(make_point(30.0, 25.0, Grid::Constant(2, 2, 2.0)));
    points.push_back(make_point(30.0, 40.0, Grid::Constant(2, 2, 3.0)));
    EXPECT_THROW(fit_pixelwise(points, 2), SingularFitError);
}

TEST(FitPixelwise, TooFewPointsRejected) {
    std::vector<OperatingPoint> points;
    points.push_back(make_point(30.0, 25.0, Grid::Constant(2, 2, 1.0)));
    EXPECT_THROW(fit_pixelwise(points, 2), DomainError);
}

TEST(FitPixelwise, MixedAmbientRejected) {
    std::vector<OperatingPoint> points;
    for (int i = 0; i < 4; ++i) points.push_back(make_point(30.0 + i, 20.0 + 5 * i, Grid::Zero(2, 2)));
    EXPECT_THROW(fit_pixelwise(points, 2), DomainError);
}

// --- smooth_coeffs ------------------------------------------------------

TEST(SmoothCoeffs, ConstantMapUnchanged) {
    PixelwiseCoeffs c;
    c.maps.push_back(Grid::Constant(10, 12, 3.25));
    const auto out = smooth_coeffs(c, 1.0);
    EXPECT_LT((out.maps[0] - 3.25).abs().maxCoeff(), 1e-12);
}

TEST(SmoothCoeffs, ImpulseReproducesKernel) {
    // sigma = 1, radius 4: the response to a unit impulse is the separable
    // normalized kernel, enumerated here independently.
    const int radius = 4;
    std::vector<double> k(2 * radius + 1);
    double sum = 0.0;
    for (int i = -radius; i <= radius; ++i) sum += (k[i + radius] = std::exp(-0.5 * i * i));
    for (double& v : k) v /= sum;

    Grid g = Grid::Zero(11, 11);
    g(5, 5) = 1.0;
    PixelwiseCoeffs c;
    c.maps.push_back(g);
    const auto out = smooth_coeffs(c, 1.0);
    for (int di = -radius; di <= radius; ++di)
        for (int dc = -radius; dc <= radius; ++dc)
            EXPECT_NEAR(out.maps[0](5 + di, 5 + dc), k[di + radius] * k[dc + radius], 1e-14);
    EXPECT_NEAR(out.maps[0].sum(), 1.0, 1e-12);  // mass preserved away from borders
}

TEST(SmoothCoeffs, SpikeOnFlatBackgroundIsLinear) {
    const double background = 7.0, amplitude = 123.0;
    Grid g = Grid::Constant(13, 13, background);
    g(6, 6) += amplitude;
    PixelwiseCoeffs c;
    c.maps.push_back(g);
    const auto out = smooth_coeffs(c, 1.0);
    const double center_weight = [] {
        double sum = 0.0;
        for (int i = -4; i <= 4; ++i) sum += std::exp(-0.5 * i * i);
        return (1.0 / sum) * (1.0 / sum);
    }();
    EXPECT_NEAR(out.maps[0](6, 6), background + amplitude * center_weight, 1e-10);
}

TEST(SmoothCoeffs, InvalidSigmaRejected) {
    PixelwiseCoeffs c;
    c.maps.push_back(Grid::Zero(4, 4));
    EXPECT_THROW(smooth_coeffs(c, 0.0), DomainError);
    EXPECT_THROW(smooth_coeffs(c, -1.0), DomainError);
}

TEST(SmoothCoeffs, TinyFramesStillSmooth) {
    PixelwiseCoeffs c;
    c.maps.push_back(Grid::Constant(2, 2, 5.0));
    const auto out = smooth_coeffs(c, 1.0);  // kernel wider than the frame
    EXPECT_LT((out.maps[0] - 5.0).abs().maxCoeff(), 1e-12);
}

// --- fit_spatial ---------------------------------------------------------

TEST(FitSpatial, ExactLowOrderSurface) {
    const auto grids = make_basis_grids(12, 10);
    const Grid map = 1.0 + 2.0 * grids.W + 3.0 * grids.H * grids.W;
    const auto fit = fit_spatial(map, 2);
    EXPECT_NEAR(fit.coeffs(0, 0), 1.0, 1e-9);
    EXPECT_NEAR(fit.coeffs(0, 1), 2.0, 1e-9);
    EXPECT_NEAR(fit.coeffs(1, 1), 3.0, 1e-9);
    EXPECT_NEAR(fit.coeffs(1, 0), 0.0, 1e-9);
    EXPECT_NEAR(fit.coeffs(2, 2), 0.0, 1e-9);
}

TEST(FitSpatial, ConstantMapIsBiasOnly) {
    const auto fit = fit_spatial(Grid::Constant(9, 9, 42.0), 4);
    for (int q = 0; q <= 4; ++q)
        for (int z = 0; z <= 4; ++z)
            EXPECT_NEAR(fit.coeffs(q, z), q == 0 && z == 0 ? 42.0 : 0.0, 1e-10);
}

TEST(FitSpatial, MatchesFullNormalEquationsOracle) {
    CounterRng rng(17);
    Grid map(8, 7);
    const auto grids = make_basis_grids(8, 7);
    for (Eigen::Index i = 0; i < 8; ++i)
        for (Eigen::Index c = 0; c < 7; ++c)
            map(i, c) = std::sin(3.0 * grids.H(i, c)) + std::cos(2.0 * grids.W(i, c)) +
                        0.1 * rng.next_unit();
    const auto fit = fit_spatial(map, 3);
    const Eigen::MatrixXd expected = oracle::spatial_fit_normal_equations(map, 3);
    const double scale = expected.cwiseAbs().maxCoeff();
    for (int q = 0; q <= 3; ++q)
        for (int z = 0; z <= 3; ++z) EXPECT_NEAR(fit.coeffs(q, z), expected(q, z), 1e-8 * scale);
}

TEST(FitSpatial, UnderDeterminedRejected) {
    EXPECT_THROW(fit_spatial(Grid::Zero(2, 2), 2), SingularFitError);   // 9 coeffs > 4 px
    EXPECT_THROW(fit_spatial(Grid::Zero(3, 24), 4), SingularFitError);  // rank: 5 > min dim
}

// --- deskew ---------------------------------------------------------------

TEST(Deskew, SelfSubtractionFlattens) {
    const auto grids = make_basis_grids(16, 16);
    const Grid map = 5.0 + 1.5 * grids.H + 2.5 * grids.W.square();
    const auto quad = fit_spatial(map, 2);
    const auto fine = fit_spatial(map, 5);
    const auto out = deskew(fine, quad);
    EXPECT_NEAR(out.coeffs(0, 0), quad.coeffs(0, 0), 1e-9);
    for (int q = 0; q <= 5; ++q)
        for (int z = 0; z <= 5; ++z)
            if (q != 0 || z != 0) EXPECT_NEAR(out.coeffs(q, z), 0.0, 1e-8);
}

TEST(Deskew, BiasAveragingRule) {
    SpatialPolyCoeffs quad{2, Eigen::MatrixXd::Zero(3, 3)};
    quad.coeffs(0, 0) = 10.0;
    SpatialPolyCoeffs fine{4, Eigen::MatrixXd::Zero(5, 5)};
    fine.coeffs(0, 0) = 4.0;
    fine.coeffs(3, 2) = 7.0;
    const auto out = deskew(fine, quad);
    EXPECT_DOUBLE_EQ(out.coeffs(0, 0), 7.0);  // (4 + 10) / 2
    EXPECT_DOUBLE_EQ(out.coeffs(3, 2), 7.0);  // untouched beyond quad support
}

TEST(Deskew, TiltedBowlBecomesCentroSymmetric) {
    const Eigen::Index h = 32, w = 24;
    const auto grids = make_basis_grids(h, w);
    // Radial quartic plus a tilt exactly representable at exponent <= 2.
    const Grid map = 40.0 * grids.P.square().square() + 3.0 * grids.H + 2.0 * grids.W +
                     1.5 * grids.H * grids.W + 100.0;
    const auto out = deskew(fit_spatial(map, 9), fit_spatial(map, 2));
    const Grid s = evaluate_spatial(out, h, w);
    const Grid reversed = s.rowwise().reverse().colwise().reverse();
    const double range = s.maxCoeff() - s.minCoeff();
    EXPECT_LT((s - reversed).abs().maxCoeff(), 1e-6 * range);
}

TEST(Deskew, DegreePreconditions) {
    SpatialPolyCoeffs quad{1, Eigen::MatrixXd::Zero(2, 2)};
    SpatialPolyCoeffs quad2{2, Eigen::MatrixXd::Zero(3, 3)};
    SpatialPolyCoeffs fine{5, Eigen::MatrixXd::Zero(6, 6)};
    SpatialPolyCoeffs shallow{2, Eigen::MatrixXd::Zero(3, 3)};
    EXPECT_THROW(deskew(fine, quad), DomainError);
    EXPECT_THROW(deskew(shallow, quad2), DomainError);
    EXPECT_NO_THROW(deskew(fine, quad2));
}

// --- fit_radial -------------------------------------------------------------

TEST(FitRadial, RecognizesExactRadialSurface) {
    const auto grids = make_basis_grids(14, 11);
    SpatialPolyCoeffs spatial{2, Eigen::MatrixXd::Zero(3, 3)};
    spatial.coeffs(2, 0) = 1.0;  // H^2
    spatial.coeffs(0, 2) = 1.0;  // W^2  -> surface equals P^2
    const auto radial = fit_radial(spatial, grids, 4);
    EXPECT_NEAR(radial.coeffs[0], 0.0, 1e-9);
    EXPECT_NEAR(radial.coeffs[1], 0.0, 1e-9);
    EXPECT_NEAR(radial.coeffs[2], 1.0, 1e-9);
    EXPECT_NEAR(radial.coeffs[3], 0.0, 1e-9);
    EXPECT_NEAR(radial.coeffs[4], 0.0, 1e-9);
}

TEST(FitRadial, ConstantSurface) {
    const auto grids = make_basis_grids(8, 8);
    SpatialPolyCoeffs spatial{3, Eigen::MatrixXd::Zero(4, 4)};
    spatial.coeffs(0, 0) = 6.5;
    const auto radial = fit_radial(spatial, grids, 3);
    EXPECT_NEAR(radial.coeffs[0], 6.5, 1e-10);
    for (int r = 1; r <= 3; ++r) EXPECT_NEAR(radial.coeffs[r], 0.0, 1e-9);
}

TEST(FitRadial, MatchesNormalEquationsOracle) {
    const auto grids = make_basis_grids(10, 9);
    SpatialPolyCoeffs spatial{4, Eigen::MatrixXd::Zero(5, 5)};
    spatial.coeffs(0, 0) = 2.0;
    spatial.coeffs(2, 0) = 1.0;
    spatial.coeffs(0, 2) = 1.3;
    spatial.coeffs(2, 2) = -4.0;
    spatial.coeffs(4, 0) = 0.7;
    const auto radial = fit_radial(spatial, grids, 5);
    const Grid surface = evaluate_spatial(spatial, 10, 9);
    const Eigen::VectorXd expected = oracle::radial_fit_normal_equations(surface, grids.P, 5);
    for (int r = 0; r <= 5; ++r)
        EXPECT_NEAR(radial.coeffs[r], expected[r], 1e-8 * std::max(1.0, expected.cwiseAbs().maxCoeff()));
}

TEST(FitRadial, TooFewRadiiIsSingular) {
    const auto grids = make_basis_grids(2, 2);  // a single distinct radius
    SpatialPolyCoeffs spatial{1, Eigen::MatrixXd::Zero(2, 2)};
    EXPECT_THROW(fit_radial(spatial, grids, 3), SingularFitError);
}

// --- fit_ambient ---------------------------------------------------------

TEST(FitAmbient, ExactPolynomialTrajectories) {
    // Radial coefficient r follows 2 + 0.5 t - 0.01 t^2 + r.
    std::vector<double> ambients{27.0, 31.0, 37.2, 40.4, 46.8, 50.8};
    std::vector<RadialCoeffs> sets;
    for (const double t : ambients) {
        RadialCoeffs rc;
        rc.coeffs.resize(4);
        for (int r = 0; r < 4; ++r) rc.coeffs[r] = 2.0 + 0.5 * t - 0.01 * t * t + r;
        sets.push_back(rc);
    }
    const Eigen::MatrixXd gamma = fit_ambient(sets, ambients, 3);
    ASSERT_EQ(gamma.rows(), 4);
    ASSERT_EQ(gamma.cols(), 4);
    for (int r = 0; r < 4; ++r) {
        EXPECT_NEAR(gamma(0, r), 2.0 + r, 1e-8);
        EXPECT_NEAR(gamma(1, r), 0.5, 1e-8);
        EXPECT_NEAR(gamma(2, r), -0.01, 1e-8);
        EXPECT_NEAR(gamma(3, r), 0.0, 1e-8);
    }
}

TEST(FitAmbient, ConstantTrajectoriesFillRowZero) {
    std::vector<double> ambients{27.0, 35.0, 43.0, 50.0};
    std::vector<RadialCoeffs> sets(4);
    for (auto& rc : sets) {
        rc.coeffs.resize(3);
        rc.coeffs << 5.0, -1.0, 0.25;
    }
    const Eigen::MatrixXd gamma = fit_ambient(sets, ambients, 3);
    EXPECT_NEAR(gamma(0, 0), 5.0, 1e-9);
    EXPECT_NEAR(gamma(0, 1), -1.0, 1e-9);
    EXPECT_NEAR(gamma(0, 2), 0.25, 1e-9);
    for (int k = 1; k <= 3; ++k)
        for (int r = 0; r < 3; ++r) EXPECT_NEAR(gamma(k, r), 0.0, 1e-9);
}

TEST(FitAmbient, MatchesPseudoinverseOracle) {
    CounterRng rng(33);
    std::vector<double> ambients{27.0, 31.0, 37.2, 38.9, 40.4, 43.6, 46.2, 50.8};
    Eigen::VectorXd t(8);
    Eigen::MatrixXd rhs(8, 3);
    std::vector<RadialCoeffs> sets;
    for (int i = 0; i < 8; ++i) {
        t[i] = ambients[i];
        RadialCoeffs rc;
        rc.coeffs.resize(3);
        for (int r = 0; r < 3; ++r) rc.coeffs[r] = rhs(i, r) = rng.next_uniform(-5.0, 5.0);
        sets.push_back(rc);
    }
    const Eigen::MatrixXd gamma = fit_ambient(sets, ambients, 2);
    const Eigen::MatrixXd expected = oracle::polyfit_normal_equations(t, rhs, 2);
    const double scale = expected.cwiseAbs().maxCoeff();
    for (int k = 0; k <= 2; ++k)
        for (int r = 0; r < 3; ++r) EXPECT_NEAR(gamma(k, r), expected(k, r), 1e-9 * scale);
}

TEST(FitAmbient, TooFewAmbientsRejected) {
    std::vector<double> ambients{30.0, 40.0};
    std::vector<RadialCoeffs> sets(2);
    for (auto& rc : sets) rc.coeffs = Eigen::VectorXd::Zero(2);
    EXPECT_THROW(fit_ambient(sets, ambients, 3), DomainError);
}

// --- estimate_noise_variance ---------------------------------------------

TEST(NoiseVariance, ConstantFive) {
    std::vector<OperatingPoint> points;
    for (int i = 0; i < 6; ++i) {
        auto op = make_point(30.0, 20.0 + i, Grid::Zero(3, 3));
        op.var_frame = Grid::Constant(3, 3, 5.0);
        points.push_back(op);
    }
    EXPECT_DOUBLE_EQ(estimate_noise_variance(points), 5.0);
}

TEST(NoiseVariance, ZeroAndHandMean) {
    std::vector<OperatingPoint> points;
    points.push_back(make_point(30.0, 20.0, Grid::Zero(2, 2)));
    EXPECT_DOUBLE_EQ(estimate_noise_variance(points), 0.0);

    auto a = make_point(30.0, 20.0, Grid::Zero(2, 2));
    a.var_frame = Grid::Constant(2, 2, 4.0);
    auto b = make_point(30.0, 25.0, Grid::Zero(2, 2));
    b.var_frame = Grid::Constant(2, 2, 6.0);
    EXPECT_DOUBLE_EQ(estimate_noise_variance({a, b}), 5.0);
    EXPECT_THROW(estimate_noise_variance({}), DomainError);
}

// --- characterize_camera ----------------------------------------------------

TEST(CharacterizeCamera, RecoversSyntheticModel) {
    const Eigen::Index h = 96, w = 80;
    const auto reference = make_reference_model(h, w);
    const auto report = selfcal_check(reference, default_ambient_set(), default_object_set());
    EXPECT_GE(report.min_r2, 0.99);
    EXPECT_GE(report.min_pixel_r2, 0.99);
    EXPECT_LT(report.max_rel_error, 0.02);
    EXPECT_LT(report.roundtrip_mae, 0.05);
}

TEST(CharacterizeCamera, DegenerateTinyGeometryFlatData) {
    std::vector<OperatingPoint> points;
    for (const double ta : {27.0, 32.0, 38.0, 44.0, 50.0})
        for (const double to : {20.0, 30.0, 40.0, 50.0})
            points.push_back(make_point(ta, to, Grid::Constant(2, 2, 4000.0)));
    const auto model = characterize_camera(points, FitConfig{});
    ASSERT_EQ(model.gamma.size(), 3u);
    // Flat data: the bias term of order 0 carries the mean response and
    // every other coefficient vanishes.
    EXPECT_NEAR(model.gamma[0](0, 0), 4000.0, 1e-6);
    for (std::size_t m = 1; m < model.gamma.size(); ++m)
        EXPECT_LT(model.gamma[m].cwiseAbs().maxCoeff(), 1e-6);
    for (int k = 1; k < model.gamma[0].rows(); ++k)
        EXPECT_LT(model.gamma[0].row(k).cwiseAbs().maxCoeff(), 1e-7);
}

TEST(CharacterizeCamera, Deterministic) {
    const auto reference = make_reference_model(24, 20);
    const auto points = synthesize_campaign(reference, default_ambient_set(), default_object_set());
    const auto a = characterize_camera(points, FitConfig{});
    const auto b = characterize_camera(points, FitConfig{});
    for (std::size_t m = 0; m < a.gamma.size(); ++m)
        EXPECT_TRUE(a.gamma[m] == b.gamma[m]) << "gamma[" << m << "] differs between runs";
}

TEST(CharacterizeCamera, RecordsBoundsAndNoise) {
    std::vector<OperatingPoint> points;
    for (const double ta : {27.0, 32.0, 38.0, 44.0, 50.0})
        for (const double to : {20.0, 30.0, 40.0, 50.0}) {
            auto op = make_point(ta, to, Grid::Constant(4, 4, 100.0 * to));
            op.var_frame = Grid::Constant(4, 4, 5.0);
            points.push_back(op);
        }
    const auto model = characterize_camera(points, FitConfig{});
    EXPECT_DOUBLE_EQ(model.gl_min, 2000.0);
    EXPECT_DOUBLE_EQ(model.gl_max, 5000.0);
    EXPECT_DOUBLE_EQ(model.temp_min, 20.0);
    EXPECT_DOUBLE_EQ(model.temp_max, 50.0);
    EXPECT_DOUBLE_EQ(model.t_amb_lo, 27.0);
    EXPECT_DOUBLE_EQ(model.t_amb_hi, 50.0);
    EXPECT_DOUBLE_EQ(model.noise_var_gl2, 5.0);
}

TEST(CharacterizeCamera, InsufficientCoverageRejected) {
    std::vector<OperatingPoint> points;
    for (const double ta : {27.0, 35.0})  // only two ambients, need 4
        for (const double to : {20.0, 30.0, 40.0})
            points.push_back(make_point(ta, to, Grid::Zero(4, 4)));
    EXPECT_THROW(characterize_camera(points, FitConfig{}), DomainError);
}
