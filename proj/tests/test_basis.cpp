#include <gtest/gtest.h>

#include "thermonu/basis.hpp"

using namespace thermonu;

TEST(BasisGrids, ThreeByThreeRamps) {
    const auto g = make_basis_grids(3, 3);
    for (int i = 0; i < 3; ++i) {
        EXPECT_DOUBLE_EQ(g.W(i, 0), -0.5);
        EXPECT_DOUBLE_EQ(g.W(i, 1), 0.0);
        EXPECT_DOUBLE_EQ(g.W(i, 2), 0.5);
    }
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) EXPECT_DOUBLE_EQ(g.H(i, j), g.W(j, i));
    EXPECT_DOUBLE_EQ(g.P(1, 1), 0.0);
}

TEST(BasisGrids, TwoByTwoCorners) {
    const auto g = make_basis_grids(2, 2);
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) EXPECT_NEAR(g.P(i, j), 0.7071, 1e-4);
}

TEST(BasisGrids, FiveByFiveRotationInvariance) {
    const auto g = make_basis_grids(5, 5);
    for (int i = 0; i < 5; ++i)
        for (int j = 0; j < 5; ++j) EXPECT_EQ(g.P(i, j), g.P(j, 4 - i));  // 90 degrees
}

TEST(BasisGrids, RampSpacingAndEndpoints) {
    for (const auto [h, w] : {std::pair<int, int>{2, 2}, {7, 5}, {33, 64}, {336, 256}}) {
        const auto g = make_basis_grids(h, w);
        for (int i = 0; i < h; ++i) {
            EXPECT_EQ(g.W(i, 0), -0.5);
            EXPECT_EQ(g.W(i, w - 1), 0.5);
        }
        // Telescoped sum of consecutive differences along a row is exactly
        // 1.0; each spacing is 1/(w-1).
        EXPECT_EQ(g.W(0, w - 1) - g.W(0, 0), 1.0);
        for (int j = 0; j + 1 < w; ++j) {
            EXPECT_GT(g.W(0, j + 1), g.W(0, j));
            EXPECT_NEAR(g.W(0, j + 1) - g.W(0, j), 1.0 / (w - 1), 1e-15);
        }
    }
}

TEST(BasisGrids, RadialIsExactHypotenuse) {
    const auto g = make_basis_grids(13, 9);
    for (int i = 0; i < 13; ++i)
        for (int j = 0; j < 9; ++j)
            EXPECT_DOUBLE_EQ(g.P(i, j), std::sqrt(g.H(i, j) * g.H(i, j) + g.W(i, j) * g.W(i, j)));
}

TEST(BasisGrids, RadialFlipInvariance) {
    for (const auto [h, w] : {std::pair<int, int>{4, 6}, {5, 5}, {12, 7}}) {
        const auto g = make_basis_grids(h, w);
        for (int i = 0; i < h; ++i)
            for (int j = 0; j < w; ++j) {
                EXPECT_EQ(g.P(i, j), g.P(i, w - 1 - j));  // horizontal flip, bit exact
                EXPECT_EQ(g.P(i, j), g.P(h - 1 - i, j));  // vertical flip
            }
    }
}

TEST(BasisGrids, RejectsDegenerateGeometry) {
    EXPECT_THROW(make_basis_grids(1, 5), GeometryError);
    EXPECT_THROW(make_basis_grids(5, 1), GeometryError);
    EXPECT_THROW(make_basis_grids(0, 0), GeometryError);
}
