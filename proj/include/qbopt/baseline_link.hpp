/**
 * @file baseline_link.hpp
 * @brief Linkage between baseline (0/1) and centered (-1/+1) effect estimators.
 *
 * Effects are indexed in Yates order. Index e is read as a bitmask of the
 * factors it involves (bit k set means factor k+1 takes part), which is the
 * order produced by a_k = {a_{k-1}, F_k * a_{k-1}}. All matrices here are
 * exact integer matrices.
 */
#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <vector>

namespace qbopt {

using IntMatrix = Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic>;

/// Factor bitmasks of all 2^m effects in Yates order.
std::vector<std::uint32_t> yates_effects(int factors);

/// Number of factors an effect involves (0 for the intercept).
int effect_order(std::uint32_t effect);

/// A_m with theta_hat = A_m beta_hat, valid for 0 <= m <= 10.
class AssociationMatrix {
public:
    explicit AssociationMatrix(int factors);

    int factors() const { return factors_; }
    const IntMatrix& matrix() const { return a_; }
    std::int64_t operator()(int r, int c) const { return a_(r, c); }

    /// Rows and columns of effects with order <= max_order, Yates order kept.
    IntMatrix truncate(int max_order) const;

private:
    int factors_;
    IntMatrix a_;
};

struct FullDesignMatrices {
    IntMatrix baseline;
    IntMatrix centered;
};

/// X_b(m) and X_c(m) by the block recursion, rows in reverse Yates order.
FullDesignMatrices full_design_matrices(int factors);

/// True iff X_b(m) * A_m == X_c(m) in exact integer arithmetic (1 <= m <= 8).
bool verify_link(int factors);

IntMatrix truncate_association(const AssociationMatrix& a, int max_order);

/**
 * Least-squares linkage for the r-fold replicated full factorial,
 * (X_b'X_b)^{-1} X_b'X_c, compared against A_m. 1 <= m <= 5, 1 <= r <= 5.
 */
bool replication_invariance_check(int factors, int replicates);

}  // namespace qbopt
