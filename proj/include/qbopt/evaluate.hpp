/**
 * @file evaluate.hpp
 * @brief Design comparison: efficiencies, projection reports, contours and
 *        prior-space optimality regions.
 */
#pragma once

#include "qbopt/criteria.hpp"
#include "qbopt/design.hpp"

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace qbopt {

/// qb(best) / qb(ref) on the quarter scale; 1 when both vanish.
double efficiency(const WordCountPattern& ref, const WordCountPattern& best, int factors, const PriorPair& p);

/// Round to nearest, ties to even (4.5 -> 4, 1.5 -> 2).
long long round_half_even(double x);

/// Binomial coefficient in 64-bit arithmetic (n <= 62).
std::uint64_t binomial(int n, int k);

struct ExpectedModelSize {
    int mains = 0;         ///< M = round(m pi1)
    int interactions = 0;  ///< N_I = round(C(M,2) pi2)
    std::uint64_t total = 0;  ///< n_T = C(m, M) C(C(M,2), N_I)
};

ExpectedModelSize expected_model_size(int factors, const PriorPair& p);

/// Count of models with exactly `mains` mains and `interactions` interactions among them.
std::uint64_t model_count(int factors, int mains, int interactions);

/// Streams the models in lexicographic order (main subsets, then interaction subsets).
void enumerate_models(int factors, int mains, int interactions, const std::function<void(const ModelSpec&)>& visit);

struct EvalReport {
    PriorPair prior;
    ExpectedModelSize size;
    std::uint64_t estimable_a = 0;
    std::uint64_t estimable_b = 0;
    std::uint64_t estimable_both = 0;
    double ratio_a = 0.0;
    double ratio_b = 0.0;
    std::optional<double> avg_as_a;  ///< over models estimable under both designs
    std::optional<double> avg_as_b;
    /// Expected model has more parameters than runs; ratios are then zero by construction.
    bool exceeds_runs = false;
};

inline constexpr std::uint64_t kMaxEnumeratedModels = 200000;

/// Throws std::length_error when n_T exceeds the enumeration cap.
EvalReport projection_report(const Design& a, const Design& b, const PriorPair& p,
                             std::uint64_t cap = kMaxEnumeratedModels);

struct Contour {
    enum class Kind { Roots, EqualEverywhere, NeverEqual };
    Kind kind = Kind::Roots;
    /// Delta(pi2) = c[0] + c[1] pi2 + c[2] pi2^2, quarter scale.
    std::array<double, 3> coefficients{};
    std::vector<double> roots;  ///< ascending, in [0, 1]
};

/// Coefficients of qb(a) - qb(b) as a polynomial in pi2 at fixed pi1.
std::array<double, 3> contour_polynomial(const WordCountPattern& a, const WordCountPattern& b, int factors, double pi1);

Contour pairwise_contour(const WordCountPattern& a, const WordCountPattern& b, int factors, double pi1);

struct LabeledPattern {
    std::string label;
    WordCountPattern word_counts;
};

/// Rows "label,b1,b2,b3,b4"; '#' lines and a header row starting with "label" are skipped.
std::vector<LabeledPattern> parse_word_count_csv(std::string_view text);
std::vector<LabeledPattern> read_word_count_csv(const std::string& path);

struct RegionPoint {
    double pi1 = 0.0;
    double pi2 = 0.0;
    std::vector<int> winners;  ///< indices into the design list; more than one on ties
};

struct RegionMap {
    std::vector<LabeledPattern> designs;
    std::vector<RegionPoint> grid;

    std::string winner_label(const RegionPoint& pt) const;  ///< ties joined with '|'
};

/// Designs attaining the minimum qb at p, ties within 1e-9 relative.
std::vector<int> optimal_designs(const std::vector<LabeledPattern>& designs, int factors, const PriorPair& p);

/// Grid over (0,1]^2 with the given step; pi1 = 0 is excluded.
RegionMap region_map(const std::vector<LabeledPattern>& designs, int factors, double grid_step = 0.01);

struct CurvePoint {
    double pi1 = 0.0;
    double pi2 = 0.0;
    double qb = 0.0;
};

/// Quarter-scale qb along pi2 in [0,1] for each pi1.
std::vector<CurvePoint> qb_curve(const WordCountPattern& wc, int factors, const std::vector<double>& pi1_list,
                                 double pi2_step);

}  // namespace qbopt
