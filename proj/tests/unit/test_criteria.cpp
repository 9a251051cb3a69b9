#include <doctest.h>

#include "qbopt/criteria.hpp"
#include "qbopt/evaluate.hpp"
#include "support.hpp"

#include <Eigen/Dense>

#include <cmath>

using namespace qbopt;

namespace {

// sum_i w_i sum_j p_ij a_ij^2 / n^2 with X'X and p_ij built independently.
double direct_oracle(const Design& d, const PriorPair& p) {
    const int m = d.factors();
    const int n = d.runs();
    const int v = 1 + m + m * (m - 1) / 2;
    // Centered second-order columns built by hand.
    Eigen::MatrixXd x(n, v);
    for (int r = 0; r < n; ++r) {
        int col = 0;
        x(r, col++) = 1;
        for (int f = 0; f < m; ++f) x(r, col++) = d(r, f);
        for (int a = 0; a < m; ++a)
            for (int b = a + 1; b < m; ++b) x(r, col++) = d(r, a) * d(r, b);
    }
    Eigen::MatrixXd info = x.transpose() * x;
    Eigen::MatrixXd pm = p_matrix(m, p, PMethod::Enumeration);
    double total = 0.0;
    for (int i = 1; i < v; ++i) {
        const double w = i <= m ? 4.0 : 24.0;
        for (int j = 0; j < v; ++j) total += w * pm(i, j) * info(i, j) * info(i, j) / (double(n) * n);
    }
    return total;
}

// Trace of the inverse by LU, intercept entry removed.
std::optional<double> exact_as_oracle(const Design& d, const ModelSpec& spec) {
    Eigen::MatrixXd x = model_matrix(d, spec, Coding::Baseline);
    Eigen::MatrixXd info = x.transpose() * x;
    Eigen::FullPivLU<Eigen::MatrixXd> lu(info);
    if (!lu.isInvertible()) return std::nullopt;
    Eigen::MatrixXd inv = lu.inverse();
    return inv.trace() - inv(0, 0);
}

const WordCountPattern kMinK{{0, 0, 2.2222, 1.6667}};
const WordCountPattern kAd1{{0, 0.7778, 0, 3.4444}};
const WordCountPattern kAd2{{0, 0.4444, 1.5556, 1.2222}};

}  // namespace

TEST_CASE("PriorPair validates its range") {
    CHECK_NOTHROW(PriorPair(0.0, 1.0));
    CHECK_THROWS(PriorPair(-0.1, 0.5));
    CHECK_THROWS(PriorPair(0.5, 1.5));
    CHECK_THROWS(PriorPair(std::nan(""), 0.5));
}

TEST_CASE("word counts of the Table 2 designs") {
    WordCountPattern mink = word_counts(support::load("table2/mink_centered.txt"));
    WordCountPattern mink_b = word_counts(support::load("table2/mink_baseline.txt", Coding::Baseline));
    WordCountPattern ad1 = word_counts(support::load("table2/ad1.txt"));
    WordCountPattern ad2 = word_counts(support::load("table2/ad2.txt"));
    for (int i = 1; i <= 4; ++i) {
        CHECK(std::abs(mink[i] - kMinK[i]) < 1e-4);
        CHECK(std::abs(mink_b[i] - kMinK[i]) < 1e-4);
        CHECK(std::abs(ad1[i] - kAd1[i]) < 1e-4);
        CHECK(std::abs(ad2[i] - kAd2[i]) < 1e-4);
    }
    WordCountPattern ff = word_counts(full_factorial(4));
    for (int i = 1; i <= 4; ++i) CHECK(ff[i] == 0.0);
}

TEST_CASE("word counts agree with the bitmask oracle") {
    std::mt19937_64 rng(21);
    for (int t = 0; t < 40; ++t) {
        const int n = 4 + t % 13;
        const int m = 1 + t % 8;
        Design d = support::random_pm1(n, m, rng);
        std::vector<double> ref = support::bitmask_word_counts(d, m);
        std::vector<double> got = generalized_word_counts(d, m);
        REQUIRE(got.size() == ref.size());
        for (std::size_t i = 0; i < ref.size(); ++i) CHECK(std::abs(got[i] - ref[i]) < 1e-12);
        WordCountPattern wc = word_counts(d);
        for (int i = 1; i <= 4; ++i) {
            const double expect = i <= m ? ref[i - 1] : 0.0;
            CHECK(std::abs(wc[i] - expect) < 1e-12);
            CHECK(wc[i] >= 0.0);
            CHECK(wc[i] <= static_cast<double>(binomial(m, i)) + 1e-9);
        }
    }
}

TEST_CASE("xi and model priors") {
    PriorPair p(0.4, 0.2);
    CHECK(xi(1, 0, p) == doctest::Approx(0.4));
    CHECK(xi(2, 1, p) == doctest::Approx(0.032));
    CHECK(xi(4, 2, p) == doctest::Approx(0.001024));
    CHECK(xi(0, 0, PriorPair(0, 0)) == 1.0);

    CHECK(model_prior(ModelSpec::full_second_order(2), 2, PriorPair(1, 1)) == doctest::Approx(1.0));
    CHECK(model_prior(ModelSpec::intercept_only(), 2, p) == doctest::Approx(0.36));

    std::mt19937_64 rng(3);
    for (int m = 1; m <= 4; ++m)
        for (int t = 0; t < 3; ++t) {
            PriorPair q = support::random_prior(rng);
            double sum = 0.0;
            for (const ModelSpec& s : hereditary_models(m)) sum += model_prior(s, m, q);
            CHECK(std::abs(sum - 1.0) < 1e-12);
        }
    // m = 3: 1 + 3*1 + 3*2 + 1*8 = 18 hereditary models.
    CHECK(hereditary_models(3).size() == 18);
}

TEST_CASE("p matrix closed form equals enumeration") {
    PriorPair half(0.5, 0.5);
    Eigen::MatrixXd p3 = p_matrix(3, half);
    CHECK(p3(main_index(0), main_index(1)) == doctest::Approx(0.25));
    CHECK(p3(0, 0) == 1.0);
    CHECK(((p_matrix(3, half) - p_matrix(3, half, PMethod::Enumeration)).cwiseAbs().maxCoeff()) < 1e-12);
    PriorPair q(0.3, 0.7);
    CHECK(((p_matrix(4, q) - p_matrix(4, q, PMethod::Enumeration)).cwiseAbs().maxCoeff()) < 1e-12);

    std::mt19937_64 rng(17);
    for (int m = 3; m <= 5; ++m)
        for (int t = 0; t < 3; ++t) {
            PriorPair r = support::random_prior(rng);
            Eigen::MatrixXd a = p_matrix(m, r);
            Eigen::MatrixXd b = p_matrix(m, r, PMethod::Enumeration);
            CHECK((a - b).cwiseAbs().maxCoeff() < 1e-12);
            CHECK((a - a.transpose()).cwiseAbs().maxCoeff() == 0.0);
            for (int j = 0; j < a.rows(); ++j) CHECK(a(0, j) == doctest::Approx(a(j, j)));
        }
    CHECK_THROWS(p_matrix(6, half, PMethod::Enumeration));
}

TEST_CASE("effect indexing") {
    CHECK(second_order_size(6) == 22);
    CHECK(main_index(0) == 1);
    CHECK(interaction_index(0, 1, 4) == 5);
    CHECK(interaction_index(0, 3, 4) == 7);
    CHECK(interaction_index(1, 2, 4) == 8);
    CHECK(interaction_index(2, 3, 4) == 10);
}

TEST_CASE("closed-form Q_B on the quarter scale") {
    CHECK(std::abs(qb_closed(kMinK, 6, {0.4, 0.2}, QbScale::Quarter) - 0.6588) < 1e-3);
    CHECK(std::abs(qb_closed(kAd1, 6, {0.4, 0.2}, QbScale::Quarter) - 0.6208) < 1e-3);
    CHECK(std::abs(qb_closed(kAd2, 6, {0.6, 0.6}, QbScale::Quarter) - 8.8413) < 1e-3);
    CHECK(qb_closed(kMinK, 6, {0.4, 0.2}) == doctest::Approx(4 * qb_closed(kMinK, 6, {0.4, 0.2}, QbScale::Quarter)));
    for (double p2 : {0.0, 0.3, 1.0}) CHECK(qb_closed(kAd2, 6, {0.0, p2}) == 0.0);
    WordCountPattern b34{{0, 0, 3.1, 0.7}};
    for (double p1 : {0.1, 0.5, 1.0}) CHECK(qb_closed(b34, 6, {p1, 0.0}) == 0.0);

    // Nondecreasing in each b_i.
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(0.0, 5.0);
    for (int t = 0; t < 50; ++t) {
        PriorPair p = support::random_prior(rng);
        WordCountPattern wc{{u(rng), u(rng), u(rng), u(rng)}};
        for (int i = 1; i <= 4; ++i) {
            WordCountPattern up = wc;
            up[i] += 0.5;
            CHECK(qb_closed(up, 6, p) >= qb_closed(wc, 6, p));
        }
    }
}

TEST_CASE("qb_direct matches an independent computation and the diagonal constant") {
    std::mt19937_64 rng(29);
    for (int t = 0; t < 30; ++t) {
        const int n = 8 + t % 9;
        const int m = 3 + t % 3;
        Design d = support::random_pm1(n, m, rng);
        PriorPair p = support::random_prior(rng);
        const double direct = qb_direct(d, p);
        CHECK(std::abs(direct - direct_oracle(d, p)) < 1e-9 * std::max(1.0, direct));
        const double diff = direct - qb_closed(word_counts(d), m, p);
        CHECK(std::abs(diff - qb_diagonal_constant(m, p)) < 1e-9);
    }
    PriorPair p(0.4, 0.2);
    CHECK(qb_direct(full_factorial(4), p) == doctest::Approx(qb_diagonal_constant(4, p)));
    // 4*6*0.4 + 24*15*0.032
    CHECK(qb_diagonal_constant(6, p) == doctest::Approx(9.6 + 11.52));
}

TEST_CASE("qb_direct and qb_closed rank the Table 2 designs alike") {
    std::vector<Design> ds = {support::load("table2/mink_baseline.txt", Coding::Baseline),
                              support::load("table2/mink_centered.txt"), support::load("table2/ad1.txt"),
                              support::load("table2/ad2.txt")};
    PriorPair p(0.6, 0.4);
    for (std::size_t i = 0; i < ds.size(); ++i)
        for (std::size_t j = 0; j < ds.size(); ++j) {
            const double di = qb_direct(ds[i], p), dj = qb_direct(ds[j], p);
            const double ci = qb_closed(word_counts(ds[i]), 6, p), cj = qb_closed(word_counts(ds[j]), 6, p);
            if (std::abs(ci - cj) > 1e-9) CHECK((di < dj) == (ci < cj));
        }
}

TEST_CASE("exact baseline A_s for the four-factor designs") {
    ModelSpec full = ModelSpec::full_second_order(4);
    auto d1 = as_exact_baseline(support::load("table1/design1.txt"), full);
    auto d2 = as_exact_baseline(support::load("table1/design2.txt"), full);
    auto d3 = as_exact_baseline(support::load("table1/design3.txt"), full);
    auto mk = as_exact_baseline(support::load("table1/mink.txt"), full);
    REQUIRE(d1);
    REQUIRE(d2);
    REQUIRE(mk);
    CHECK(std::abs(*d1 - 63) < 0.5);
    CHECK(std::abs(*d2 - 18.25) < 0.01);
    CHECK_FALSE(d3.has_value());
    CHECK(std::abs(*mk - 23.67) < 0.01);
}

TEST_CASE("exact A_s agrees with an LU inverse") {
    std::mt19937_64 rng(41);
    for (int t = 0; t < 40; ++t) {
        Design d = support::random_pm1(12, 4, rng);
        ModelSpec spec = t % 2 ? ModelSpec::full_second_order(4) : ModelSpec::parse("1,2,3", "1:2");
        auto got = as_exact_baseline(d, spec);
        auto ref = exact_as_oracle(d, spec);
        CHECK(got.has_value() == ref.has_value());
        if (got && ref) CHECK(std::abs(*got - *ref) < 1e-8 * std::max(1.0, *ref));
        if (got) CHECK(spec.parameter_count() <= d.runs());
    }
    CHECK(as_exact_baseline(full_factorial(2), ModelSpec::intercept_only()) == doctest::Approx(0.0));
}

TEST_CASE("approximate baseline A_s for the four-factor designs") {
    ModelSpec full = ModelSpec::full_second_order(4);
    CHECK(std::abs(as_approx_baseline(support::load("table1/design1.txt"), full) - 18.44) < 0.01);
    CHECK(std::abs(as_approx_baseline(support::load("table1/design2.txt"), full) - 16.07) < 0.01);
    CHECK(std::abs(as_approx_baseline(support::load("table1/design3.txt"), full) - 20.53) < 0.01);
    CHECK(std::abs(as_approx_baseline(support::load("table1/mink.txt"), full) - 17.78) < 0.01);
}

TEST_CASE("criteria are invariant under row permutation and column relabeling") {
    std::mt19937_64 rng(77);
    for (int t = 0; t < 20; ++t) {
        const int n = 10 + t % 5;
        const int m = 4 + t % 3;
        Design d = support::random_pm1(n, m, rng);
        PriorPair p = support::random_prior(rng);
        Design rows = support::permute_rows(d, support::shuffled(n, rng));
        Design cols = support::permute_columns(d, support::shuffled(m, rng));
        WordCountPattern w = word_counts(d);
        for (const Design& e : {rows, cols}) {
            WordCountPattern we = word_counts(e);
            for (int i = 1; i <= 4; ++i) CHECK(std::abs(we[i] - w[i]) < 1e-12);
            CHECK(std::abs(qb_closed(we, m, p) - qb_closed(w, m, p)) < 1e-12);
        }
        CHECK(std::abs(qb_direct(rows, p) - qb_direct(d, p)) < 1e-9);
        ModelSpec spec = ModelSpec::parse("1,2,3", "1:3");
        auto a = as_exact_baseline(d, spec);
        auto b = as_exact_baseline(rows, spec);
        CHECK(a.has_value() == b.has_value());
        if (a && b) CHECK(std::abs(*a - *b) < 1e-8 * std::max(1.0, *a));
    }
}

TEST_CASE("snapping and keys") {
    WordCountPattern w{{0, 0.6667, 0, 3.6667}};
    WordCountPattern s = w.snapped(12);
    CHECK(s[2] == doctest::Approx(96.0 / 144.0).epsilon(1e-15));
    CHECK(s[4] == doctest::Approx(528.0 / 144.0).epsilon(1e-15));
    CHECK(w.key() == WordCountPattern{{0, 0.66670004, 0, 3.6667}}.key());
    CHECK(kMinK.to_string() == "(0.0000, 0.0000, 2.2222, 1.6667)");
}
