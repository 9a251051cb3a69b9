/**
 * @file criteria.hpp
 * @brief Generalized word counts, hereditary model priors, Q_B and A_s.
 *
 * Q_B here is the baseline-parameterization criterion for the second-order
 * maximal model. Tables report it on the quarter scale, see QbScale.
 */
#pragma once

#include "qbopt/design.hpp"

#include <Eigen/Core>

#include <array>
#include <compare>
#include <optional>
#include <string>
#include <vector>

namespace qbopt {

/// (pi1, pi2): main-effect prior and conditional interaction prior.
struct PriorPair {
    double pi1 = 0.0;
    double pi2 = 0.0;

    PriorPair() = default;
    PriorPair(double p1, double p2);

    auto operator<=>(const PriorPair&) const = default;
};

/// (b1(1), b2(2), b3(3), b4(4)).
struct WordCountPattern {
    std::array<double, 4> b{};

    double operator[](int order) const { return b[order - 1]; }  // order in 1..4
    double& operator[](int order) { return b[order - 1]; }

    /// Rounded to 1e-6, used to deduplicate designs.
    std::array<long long, 4> key() const;

    /// Each b_i snapped to the nearest multiple of 1/n^2, the exact grid for n-run designs.
    WordCountPattern snapped(int runs) const;

    std::string to_string(int decimals = 4) const;
};

/// Coefficients multiplying b1..b4 in the closed-form criterion.
struct QbWeights {
    std::array<double, 4> w{};

    /// Full scale: {4xi10 + 28(m-1)xi21, 8xi20 + 24xi21 + 48(m-2)xi32, 84xi31, 144xi42}.
    static QbWeights make(int factors, const PriorPair& p);

    double apply(const WordCountPattern& wc) const {
        return w[0] * wc.b[0] + w[1] * wc.b[1] + w[2] * wc.b[2] + w[3] * wc.b[3];
    }
};

enum class QbScale {
    Full,    ///< the criterion as derived
    Quarter  ///< one quarter of it; the scale every table uses
};

enum class PMethod { ClosedForm, Enumeration };

WordCountPattern word_counts(const Design& d);

/// b_1(1) .. b_k(k) for k = max_order (capped at m); entry i-1 holds order i.
std::vector<double> generalized_word_counts(const Design& d, int max_order);

/// pi1^a pi2^b with 0^0 = 1.
double xi(int a, int b, const PriorPair& p);

/// Prior probability of a hereditary model among m factors.
double model_prior(const ModelSpec& spec, int factors, const PriorPair& p);

/// Every strong-heredity submodel of the second-order model (2^m * 2^C(a,2) growth).
std::vector<ModelSpec> hereditary_models(int factors);

/// Effect index in the second-order model: 0 intercept, 1..m mains, then pairs.
int main_index(int factor);
int interaction_index(int a, int b, int factors);
int second_order_size(int factors);  ///< 1 + m + C(m,2)

/**
 * Joint inclusion probabilities p_ij of effects i and j.
 * Enumeration is limited to m <= 5.
 */
Eigen::MatrixXd p_matrix(int factors, const PriorPair& p, PMethod method = PMethod::ClosedForm);

double qb_closed(const WordCountPattern& wc, int factors, const PriorPair& p, QbScale scale = QbScale::Full);

/// p_ij a_ij^2 / n^2 sums over the centered information matrix, diagonal included.
double qb_direct(const Design& d, const PriorPair& p);

/// Diagonal contribution of qb_direct for any -1/+1 design: 4m pi1 + 24 C(m,2) pi1^2 pi2.
double qb_diagonal_constant(int factors, const PriorPair& p);

/// Smallest over largest eigenvalue of X'X below this marks a model as singular.
inline constexpr double kSingularityTolerance = 1e-8;

/**
 * Sum of baseline estimator variances (intercept excluded, unit error
 * variance). std::nullopt when X'X is numerically singular.
 */
std::optional<double> as_exact_baseline(const Design& d, const ModelSpec& spec);

/// 4 * sum over mains + 24 * sum over interactions of r_ij = a_ij^2 / (a_ii^2 a_jj).
double as_approx_baseline(const Design& d, const ModelSpec& spec);

}  // namespace qbopt
