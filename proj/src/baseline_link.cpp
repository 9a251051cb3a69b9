#include "qbopt/baseline_link.hpp"
#include "qbopt/design.hpp"

#include <Eigen/Dense>

#include <bit>

namespace qbopt {

namespace {

void require_range(int m, int lo, int hi, const char* what) {
    if (m < lo || m > hi)
        throw DesignError(std::string(what) + ": factor count " + std::to_string(m) + " outside [" +
                          std::to_string(lo) + ", " + std::to_string(hi) + "]");
}

}  // namespace

std::vector<std::uint32_t> yates_effects(int factors) {
    std::vector<std::uint32_t> effects{0};
    for (int k = 0; k < factors; ++k) {
        const auto prev = effects.size();
        for (std::size_t i = 0; i < prev; ++i) effects.push_back(effects[i] | (1u << k));
    }
    return effects;
}

int effect_order(std::uint32_t effect) { return std::popcount(effect); }

AssociationMatrix::AssociationMatrix(int factors) : factors_(factors) {
    require_range(factors, 0, 10, "association matrix");
    a_ = IntMatrix::Ones(1, 1);
    for (int k = 1; k <= factors; ++k) {
        const auto h = a_.rows();
        IntMatrix next = IntMatrix::Zero(2 * h, 2 * h);
        next.topLeftCorner(h, h) = a_;
        next.topRightCorner(h, h) = -a_;
        next.bottomRightCorner(h, h) = 2 * a_;
        a_ = std::move(next);
    }
}

IntMatrix AssociationMatrix::truncate(int max_order) const {
    if (max_order < 0 || max_order > factors_)
        throw DesignError("truncation order must lie in [0, m]");
    const auto effects = yates_effects(factors_);
    std::vector<int> keep;
    for (std::size_t i = 0; i < effects.size(); ++i)
        if (effect_order(effects[i]) <= max_order) keep.push_back(static_cast<int>(i));
    const auto k = static_cast<Eigen::Index>(keep.size());
    IntMatrix out(k, k);
    for (Eigen::Index r = 0; r < k; ++r)
        for (Eigen::Index c = 0; c < k; ++c) out(r, c) = a_(keep[r], keep[c]);
    return out;
}

IntMatrix truncate_association(const AssociationMatrix& a, int max_order) { return a.truncate(max_order); }

FullDesignMatrices full_design_matrices(int factors) {
    require_range(factors, 0, 10, "full design matrices");
    IntMatrix xb = IntMatrix::Ones(1, 1);
    IntMatrix xc = IntMatrix::Ones(1, 1);
    for (int k = 1; k <= factors; ++k) {
        const auto h = xb.rows();
        IntMatrix nb = IntMatrix::Zero(2 * h, 2 * h);
        IntMatrix nc(2 * h, 2 * h);
        nb.topLeftCorner(h, h) = xb;
        nb.topRightCorner(h, h) = xb;
        nb.bottomLeftCorner(h, h) = xb;
        nc.topLeftCorner(h, h) = xc;
        nc.topRightCorner(h, h) = xc;
        nc.bottomLeftCorner(h, h) = xc;
        nc.bottomRightCorner(h, h) = -xc;
        xb = std::move(nb);
        xc = std::move(nc);
    }
    return {std::move(xb), std::move(xc)};
}

bool verify_link(int factors) {
    require_range(factors, 1, 8, "verify_link");
    const auto [xb, xc] = full_design_matrices(factors);
    const AssociationMatrix a(factors);
    return IntMatrix(xb * a.matrix()) == xc;
}

bool replication_invariance_check(int factors, int replicates) {
    require_range(factors, 1, 5, "replication check");
    if (replicates < 1 || replicates > 5) throw DesignError("replicate count must lie in [1, 5]");
    const auto [xb1, xc1] = full_design_matrices(factors);
    const auto n = xb1.rows();
    Eigen::MatrixXd xb(n * replicates, n), xc(n * replicates, n);
    for (int r = 0; r < replicates; ++r) {
        xb.middleRows(r * n, n) = xb1.cast<double>();
        xc.middleRows(r * n, n) = xc1.cast<double>();
    }
    // theta_hat = (Xb'Xb)^{-1} Xb' y and beta_hat = (Xc'Xc)^{-1} Xc' y for every y,
    // so the linkage is (Xb'Xb)^{-1} Xb' Xc.
    const Eigen::MatrixXd link = (xb.transpose() * xb).ldlt().solve(xb.transpose() * xc);
    const Eigen::MatrixXd expected = AssociationMatrix(factors).matrix().cast<double>();
    if ((link - expected).cwiseAbs().maxCoeff() > 1e-9) return false;

    // The estimator maps themselves must agree as well.
    const Eigen::MatrixXd lhs = (xb.transpose() * xb).ldlt().solve(xb.transpose());
    const Eigen::MatrixXd rhs = expected * (xc.transpose() * xc).ldlt().solve(xc.transpose());
    return (lhs - rhs).cwiseAbs().maxCoeff() <= 1e-9;
}

}  // namespace qbopt
