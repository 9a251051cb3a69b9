/**
 * @file optimize.hpp
 * @brief Searches for Q_B-optimal two-level designs.
 *
 * All searches minimise Q_B on the quarter scale. Candidate moves are scored
 * with IncrementalWordCounts, which keeps the integer column-product sums of
 * every subset of at most four columns, so scores never drift.
 */
#pragma once

#include "qbopt/criteria.hpp"
#include "qbopt/design.hpp"

#include <array>
#include <cstdint>
#include <random>
#include <vector>

namespace qbopt {

/// Word counts of a design kept up to date under single flips and column swaps.
class IncrementalWordCounts {
public:
    using Totals = std::array<std::int64_t, 4>;

    explicit IncrementalWordCounts(Design d);

    const Design& design() const { return design_; }

    /// Sum over i-subsets of squared column-product sums; b_i = totals[i-1] / n^2.
    const Totals& totals() const { return totals_; }
    WordCountPattern pattern() const;

    /// Change in totals if entry (row, col) were flipped.
    Totals flip_delta(int row, int col) const;
    void apply_flip(int row, int col);

    /// Change in totals if rows a and b (holding opposite levels) traded entries in col.
    Totals swap_delta(int col, int row_a, int row_b) const;
    void apply_swap(int col, int row_a, int row_b);

private:
    struct Subset {
        std::array<int, 4> cols{};
        int size = 0;
    };

    int product(const Subset& s, int row) const;

    Design design_;
    std::vector<Subset> subsets_;
    std::vector<std::int64_t> sums_;
    std::vector<std::vector<int>> by_column_;  // subset ids containing each column
    Totals totals_{};
};

/// Quarter-scale Q_B as a linear function of the integer totals.
class QbObjective {
public:
    QbObjective(int runs, int factors, const PriorPair& p);

    double operator()(const IncrementalWordCounts::Totals& t) const;
    double with_delta(const IncrementalWordCounts::Totals& t, const IncrementalWordCounts::Totals& d) const;

    /// True when candidate beats incumbent by more than round-off.
    static bool improves(double candidate, double incumbent);

private:
    std::array<double, 4> coef_{};
};

struct SearchOptions {
    int restarts = 0;        ///< 0 selects default_restarts(n, m)
    std::uint64_t seed = 1;
};

/// 1000 restarts when n*m <= 100, otherwise 200.
int default_restarts(int runs, int factors);

/// Independent generator for one restart, derived from (seed, restart index).
std::mt19937_64 restart_rng(std::uint64_t seed, std::uint64_t stream);

struct OptimResult {
    Design design;
    double qb = 0.0;  ///< quarter scale
    PriorPair prior;
    WordCountPattern word_counts;
    int restarts_used = 0;
    std::uint64_t seed = 0;
};

Design random_design(int runs, int factors, std::mt19937_64& rng);
Design random_balanced_design(int runs, int factors, std::mt19937_64& rng);

/**
 * Row-major single-coordinate flips, kept on strict decrease, repeated until
 * a full sweep changes nothing. accepted (if given) receives the objective
 * after every kept flip, starting with the initial value.
 */
Design flip_descent(Design start, const PriorPair& p, std::vector<double>* accepted = nullptr);

/// Column-wise +1/-1 swaps, steepest per +1 entry; preserves column sums.
Design swap_descent(Design start, const PriorPair& p);

OptimResult coordinate_exchange(int runs, int factors, const PriorPair& p, const SearchOptions& opts = {});

struct ExtendedResult {
    std::vector<OptimResult> results;  ///< same order as the prior list
    int rounds = 0;                    ///< cross-prior reconciliation rounds run
    bool round_cap_reached = false;
};

inline constexpr int kMaxReconcileRounds = 50;

/**
 * Plain coordinate exchange per prior, then repeatedly restart the descent
 * at prior i from any other prior's design that scores better there.
 */
ExtendedResult extended_exchange(int runs, int factors, const std::vector<PriorPair>& priors,
                                 const SearchOptions& opts = {});

/// Level-balanced search; throws DesignError for odd run counts.
OptimResult level_balanced_exchange(int runs, int factors, const PriorPair& p, const SearchOptions& opts = {});

/// Raised when a matrix fails H'H = N I.
class HadamardError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct ColumnSubsetPattern {
    std::vector<int> columns;  ///< zero-based, after dropping the constant column
    WordCountPattern word_counts;
    std::vector<double> full_sequence;  ///< b_1(1) .. b_k(k)
    int multiplicity = 0;               ///< subsets sharing this sequence
};

bool is_hadamard(const Design& h);

/// Sylvester construction, order a power of two.
Design sylvester_hadamard(int order);
/// Paley construction of order q+1 for a prime q = 3 mod 4.
Design paley_hadamard(int q);

/**
 * Normalise h to an all-plus first column, drop it, and collect the distinct
 * generalized word-count sequences b_1(1)..b_k(k) over all k-column subsets
 * of the remaining N-1 columns (deduplicated at 1e-6).
 */
std::vector<ColumnSubsetPattern> hadamard_subset_search(const Design& h, int k);

/// Design made of the given columns of the normalised Hadamard matrix.
Design hadamard_subdesign(const Design& h, const std::vector<int>& columns);

}  // namespace qbopt
