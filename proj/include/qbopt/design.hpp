/**
 * @file design.hpp
 * @brief Two-level designs, model specifications and model matrices.
 *
 * Designs are stored in centered coding (entries -1/+1). Baseline (0/1)
 * views are derived on demand: the low level -1 maps to 0 and the high
 * level +1 maps to 1.
 */
#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace qbopt {

enum class Coding { Centered, Baseline };

/// Raised for malformed design text, invalid entries and bad model specs.
class DesignError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/**
 * An n x m two-level design, row-major, entries exactly -1 or +1.
 * Duplicate rows are allowed.
 */
class Design {
public:
    Design() = default;
    Design(int runs, int factors, std::vector<int8_t> entries);

    /// Uniform fill, mostly for tests and as a starting point for searches.
    static Design filled(int runs, int factors, int8_t level);

    int runs() const { return runs_; }
    int factors() const { return factors_; }

    int8_t operator()(int row, int col) const { return entries_[index(row, col)]; }
    void set(int row, int col, int8_t level);
    void flip(int row, int col) { entries_[index(row, col)] = static_cast<int8_t>(-entries_[index(row, col)]); }

    std::span<const int8_t> row(int r) const {
        return {entries_.data() + static_cast<std::size_t>(r) * factors_, static_cast<std::size_t>(factors_)};
    }
    std::span<const int8_t> entries() const { return entries_; }

    int column_sum(int col) const;

    /// Rows are written as space separated integers in the requested coding.
    std::string row_string(int r, Coding coding = Coding::Centered) const;

    bool operator==(const Design&) const = default;

private:
    std::size_t index(int row, int col) const {
        return static_cast<std::size_t>(row) * factors_ + col;
    }

    int runs_ = 0;
    int factors_ = 0;
    std::vector<int8_t> entries_;
};

using FactorPair = std::pair<int, int>;

/**
 * A hereditary submodel of the second-order model. Factors are zero-based
 * internally; the text syntax used by the CLI is one-based.
 */
class ModelSpec {
public:
    ModelSpec() = default;
    ModelSpec(std::vector<int> mains, std::vector<FactorPair> interactions);

    /// All m main effects and all C(m,2) two-factor interactions.
    static ModelSpec full_second_order(int factors);
    static ModelSpec intercept_only() { return {}; }

    /// Parse "1,2,3" and "1:2,2:3" (one-based factor labels).
    static ModelSpec parse(std::string_view mains, std::string_view interactions);

    const std::vector<int>& mains() const { return mains_; }
    const std::vector<FactorPair>& interactions() const { return interactions_; }

    int parameter_count() const {
        return 1 + static_cast<int>(mains_.size()) + static_cast<int>(interactions_.size());
    }
    int max_factor() const { return mains_.empty() ? -1 : mains_.back(); }

    void validate_for(int factors) const;

    bool operator==(const ModelSpec&) const = default;

private:
    std::vector<int> mains_;
    std::vector<FactorPair> interactions_;
};

/// Parse whitespace separated rows; '#' starts a comment line.
Design parse_design(std::string_view text, Coding coding);
Design read_design_file(const std::string& path, Coding coding);

std::string serialize_design(const Design& d, Coding coding);
void write_design(std::ostream& os, const Design& d, Coding coding);

/// Columns: intercept, mains ascending, interactions in lexicographic order.
Eigen::MatrixXd model_matrix(const Design& d, const ModelSpec& spec, Coding coding);

/// 2^m runs: first row all high, last row all low (reverse Yates order).
Design full_factorial(int factors);

/// Centered model matrix of the full second-order model (n x (1+m+C(m,2))).
Eigen::MatrixXd second_order_centered(const Design& d);

}  // namespace qbopt
