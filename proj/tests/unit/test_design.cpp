#include <doctest.h>

#include "qbopt/design.hpp"
#include "support.hpp"

#include <set>
#include <sstream>

using namespace qbopt;

TEST_CASE("parse_design reads centered and baseline text") {
    Design one = parse_design("1 1\n", Coding::Centered);
    CHECK(one.runs() == 1);
    CHECK(one.factors() == 2);
    CHECK(one(0, 0) == 1);
    CHECK(one(0, 1) == 1);

    Design b = parse_design("# comment\n0 1\n1 0\n", Coding::Baseline);
    CHECK(b(0, 0) == -1);
    CHECK(b(0, 1) == 1);
    CHECK(b(1, 0) == 1);
}

TEST_CASE("parse_design rejects bad input") {
    CHECK_THROWS_AS(parse_design("2 1\n", Coding::Centered), DesignError);
    CHECK_THROWS_AS(parse_design("0 1\n", Coding::Centered), DesignError);
    CHECK_THROWS_AS(parse_design("-1 1\n", Coding::Baseline), DesignError);
    CHECK_THROWS_AS(parse_design("1 1\n1\n", Coding::Centered), DesignError);
    CHECK_THROWS_AS(parse_design("# only a comment\n\n", Coding::Centered), DesignError);
    CHECK_THROWS_AS(parse_design("1 x\n", Coding::Centered), DesignError);
}

TEST_CASE("baseline Min K maps onto the centered Min K up to row order") {
    Design base = support::load("table2/mink_baseline.txt", Coding::Baseline);
    Design cent = support::load("table2/mink_centered.txt");
    REQUIRE(base.runs() == 12);
    REQUIRE(base.factors() == 6);
    std::multiset<std::string> a, b;
    for (int r = 0; r < 12; ++r) {
        a.insert(base.row_string(r));
        b.insert(cent.row_string(r));
    }
    CHECK(a == b);
}

TEST_CASE("serialize round-trips in both codings") {
    std::mt19937_64 rng(11);
    for (int t = 0; t < 20; ++t) {
        Design d = support::random_pm1(1 + t % 7, 1 + t % 5, rng);
        for (Coding c : {Coding::Centered, Coding::Baseline}) CHECK(parse_design(serialize_design(d, c), c) == d);
    }
    Design d = parse_design("1 -1\n-1 -1\n", Coding::Centered);
    CHECK(serialize_design(d, Coding::Baseline) == "1 0\n0 0\n");
    CHECK(serialize_design(d, Coding::Centered) == "1 -1\n-1 -1\n");
}

TEST_CASE("Design validates entries") {
    CHECK_THROWS_AS(Design(2, 2, {1, 1, 1}), DesignError);
    CHECK_THROWS_AS(Design(1, 2, {1, 0}), DesignError);
    CHECK_THROWS_AS(Design(0, 2, {}), DesignError);
    Design d = Design::filled(2, 3, -1);
    d.flip(1, 2);
    CHECK(d(1, 2) == 1);
    CHECK(d.column_sum(2) == 0);
    CHECK_THROWS_AS(d.set(0, 0, 3), DesignError);
}

TEST_CASE("ModelSpec heredity and parsing") {
    ModelSpec s = ModelSpec::parse("3,1,2", "2:1,3:2");
    CHECK(s.mains() == std::vector<int>{0, 1, 2});
    CHECK(s.interactions() == std::vector<FactorPair>{{0, 1}, {1, 2}});
    CHECK(s.parameter_count() == 6);
    CHECK_THROWS_AS(ModelSpec::parse("1", "1:2"), DesignError);
    CHECK_THROWS_AS(ModelSpec::parse("1,1x", ""), DesignError);
    CHECK_THROWS_AS(ModelSpec::parse("1,2", "1-2"), DesignError);
    CHECK_THROWS_AS(ModelSpec::parse("1,5", "").validate_for(4), DesignError);
    CHECK(ModelSpec::full_second_order(4).parameter_count() == 11);
    CHECK(ModelSpec::intercept_only().parameter_count() == 1);
}

TEST_CASE("full_factorial follows reverse Yates order") {
    Design f1 = full_factorial(1);
    CHECK(f1(0, 0) == 1);
    CHECK(f1(1, 0) == -1);

    Design f2 = full_factorial(2);
    const int expect[4][2] = {{1, 1}, {-1, 1}, {1, -1}, {-1, -1}};
    for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 2; ++c) CHECK(f2(r, c) == expect[r][c]);

    // X_c(3) = [[X_c(2), X_c(2)], [X_c(2), -X_c(2)]] on the main-effect columns.
    Design f3 = full_factorial(3);
    for (int r = 0; r < 4; ++r) {
        for (int c = 0; c < 2; ++c) {
            CHECK(f3(r, c) == f2(r, c));
            CHECK(f3(r + 4, c) == f2(r, c));
        }
        CHECK(f3(r, 2) == 1);
        CHECK(f3(r + 4, 2) == -1);
    }

    for (int m = 1; m <= 8; ++m) {
        Design f = full_factorial(m);
        std::set<std::string> rows;
        for (int r = 0; r < f.runs(); ++r) rows.insert(f.row_string(r));
        CHECK(rows.size() == (1u << m));
    }
    CHECK_THROWS_AS(full_factorial(0), DesignError);
    CHECK_THROWS_AS(full_factorial(13), DesignError);
}

TEST_CASE("model_matrix of the 2^2 factorial in baseline coding is X_b(2)") {
    Eigen::MatrixXd x = model_matrix(full_factorial(2), ModelSpec::full_second_order(2), Coding::Baseline);
    Eigen::MatrixXd expect(4, 4);
    expect << 1, 1, 1, 1, 1, 0, 1, 0, 1, 1, 0, 0, 1, 0, 0, 0;
    CHECK(x == expect);
}

TEST_CASE("model_matrix column conventions") {
    std::mt19937_64 rng(5);
    ModelSpec spec = ModelSpec::full_second_order(4);
    for (int t = 0; t < 10; ++t) {
        Design d = support::random_pm1(5, 4, rng);
        Eigen::MatrixXd xb = model_matrix(d, spec, Coding::Baseline);
        Eigen::MatrixXd xc = model_matrix(d, spec, Coding::Centered);
        REQUIRE(xb.cols() == 11);
        for (int r = 0; r < 5; ++r) {
            CHECK(xb(r, 0) == 1.0);
            CHECK(xc(r, 0) == 1.0);
            for (int j = 1; j <= 4; ++j) CHECK(xb(r, j) == (xc(r, j) + 1.0) / 2.0);
            // Interaction columns, lexicographic pairs, are products of baseline mains.
            int col = 5;
            for (int a = 0; a < 4; ++a)
                for (int b = a + 1; b < 4; ++b, ++col) {
                    CHECK(xb(r, col) == xb(r, 1 + a) * xb(r, 1 + b));
                    CHECK(xc(r, col) == xc(r, 1 + a) * xc(r, 1 + b));
                }
        }
    }

    Design d = support::random_pm1(6, 3, rng);
    Eigen::MatrixXd x0 = model_matrix(d, ModelSpec::intercept_only(), Coding::Baseline);
    CHECK(x0.cols() == 1);
    CHECK(x0 == Eigen::MatrixXd::Ones(6, 1));
    CHECK_THROWS_AS(model_matrix(d, ModelSpec::full_second_order(4), Coding::Centered), DesignError);
}

TEST_CASE("rescaled centered products differ from baseline interactions") {
    // (x+1)/2 * (y+1)/2 is the baseline interaction, (xy+1)/2 is not.
    Design d = parse_design("-1 -1\n", Coding::Centered);
    Eigen::MatrixXd xb = model_matrix(d, ModelSpec::full_second_order(2), Coding::Baseline);
    Eigen::MatrixXd xc = model_matrix(d, ModelSpec::full_second_order(2), Coding::Centered);
    CHECK(xb(0, 3) == 0.0);
    CHECK((xc(0, 3) + 1.0) / 2.0 == 1.0);
}

TEST_CASE("second_order_centered shape") {
    Eigen::MatrixXd x = second_order_centered(full_factorial(4));
    CHECK(x.rows() == 16);
    CHECK(x.cols() == 11);
    CHECK((x.transpose() * x).isApprox(16.0 * Eigen::MatrixXd::Identity(11, 11)));
}
