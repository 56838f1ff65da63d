#include <gtest/gtest.h>
#include "thermonu/thermonu.hpp"

TEST(Smoke, Compiles) {
    const auto g = thermonu::make_basis_grids(4, 4);
    EXPECT_EQ(g.P.rows(), 4);
}
