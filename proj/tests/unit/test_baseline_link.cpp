#include <doctest.h>

#include "qbopt/baseline_link.hpp"

#include <Eigen/Dense>

#include <bit>
#include <cmath>

using namespace qbopt;

TEST_CASE("association matrices for small m") {
    CHECK(AssociationMatrix(0).matrix() == IntMatrix::Constant(1, 1, 1));

    IntMatrix a1(2, 2);
    a1 << 1, -1, 0, 2;
    CHECK(AssociationMatrix(1).matrix() == a1);

    IntMatrix a2(4, 4);
    a2 << 1, -1, -1, 1, 0, 2, 0, -2, 0, 0, 2, -2, 0, 0, 0, 4;
    CHECK(AssociationMatrix(2).matrix() == a2);

    CHECK_THROWS(AssociationMatrix(-1));
    CHECK_THROWS(AssociationMatrix(11));
}

TEST_CASE("A_m equals X_b^-1 X_c computed in floating point") {
    for (int m = 1; m <= 5; ++m) {
        FullDesignMatrices x = full_design_matrices(m);
        Eigen::MatrixXd t = x.baseline.cast<double>().fullPivLu().solve(x.centered.cast<double>());
        Eigen::MatrixXd a = AssociationMatrix(m).matrix().cast<double>();
        CHECK((t - a).cwiseAbs().maxCoeff() < 1e-9);
    }
}

TEST_CASE("structure of A_m") {
    for (int m = 1; m <= 6; ++m) {
        AssociationMatrix a(m);
        AssociationMatrix prev(m - 1);
        const int half = 1 << (m - 1);
        CHECK(a.matrix().topLeftCorner(half, half) == prev.matrix());
        std::vector<std::uint32_t> eff = yates_effects(m);
        for (int i = 0; i < (1 << m); ++i) {
            CHECK(a(i, i) == (std::int64_t{1} << effect_order(eff[i])));
            for (int j = 0; j < (1 << m); ++j) {
                if (j < i) CHECK(a(i, j) == 0);
                if (effect_order(eff[j]) < effect_order(eff[i])) CHECK(a(i, j) == 0);
            }
        }
    }
    for (int m = 1; m <= 5; ++m) {
        const double det = AssociationMatrix(m).matrix().cast<double>().determinant();
        CHECK(det == doctest::Approx(std::ldexp(1.0, m * (1 << (m - 1)))));
    }
}

TEST_CASE("Yates effect order is bitmask order") {
    std::vector<std::uint32_t> e = yates_effects(3);
    REQUIRE(e.size() == 8);
    for (std::uint32_t i = 0; i < 8; ++i) CHECK(e[i] == i);
    CHECK(effect_order(0b101) == 2);
}

TEST_CASE("full design matrices") {
    FullDesignMatrices x0 = full_design_matrices(0);
    CHECK(x0.baseline == IntMatrix::Constant(1, 1, 1));
    CHECK(x0.centered == IntMatrix::Constant(1, 1, 1));

    IntMatrix xb2(4, 4);
    xb2 << 1, 1, 1, 1, 1, 0, 1, 0, 1, 1, 0, 0, 1, 0, 0, 0;
    CHECK(full_design_matrices(2).baseline == xb2);

    for (int m = 1; m <= 6; ++m) {
        IntMatrix xc = full_design_matrices(m).centered;
        CHECK(xc.col(0) == IntMatrix::Ones(1 << m, 1));
        CHECK(xc.transpose() * xc == IntMatrix::Identity(1 << m, 1 << m) * (std::int64_t{1} << m));
    }
}

TEST_CASE("verify_link for m = 1..8") {
    for (int m = 1; m <= 8; ++m) CHECK(verify_link(m));
    CHECK_THROWS(verify_link(0));
    CHECK_THROWS(verify_link(9));
}

TEST_CASE("truncate_association") {
    AssociationMatrix a2(2);
    CHECK(truncate_association(a2, 2) == a2.matrix());
    IntMatrix t(3, 3);
    t << 1, -1, -1, 0, 2, 0, 0, 0, 2;
    CHECK(truncate_association(a2, 1) == t);

    AssociationMatrix a3(3);
    IntMatrix t3 = truncate_association(a3, 2);
    REQUIRE(t3.rows() == 7);
    // Kept effects in Yates order: 0, 1, 2, 3(12), 4, 5(13), 6(23).
    const int order[7] = {0, 1, 1, 2, 1, 2, 2};
    for (int i = 0; i < 7; ++i)
        for (int j = 0; j < 7; ++j)
            if (order[j] < order[i]) CHECK(t3(i, j) == 0);
    CHECK_THROWS(truncate_association(a3, 4));
}

TEST_CASE("replicated full factorials give the same linkage") {
    for (int m = 1; m <= 4; ++m)
        for (int r = 1; r <= 3; ++r) CHECK(replication_invariance_check(m, r));
    CHECK_THROWS(replication_invariance_check(6, 1));
    CHECK_THROWS(replication_invariance_check(2, 0));
}
