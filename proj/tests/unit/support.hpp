#pragma once

#include "qbopt/criteria.hpp"
#include "qbopt/design.hpp"

#include <algorithm>
#include <bit>
#include <cstdint>
#include <numeric>
#include <random>
#include <string>
#include <vector>

namespace support {

inline std::string data_path(const std::string& rel) { return std::string(QBOPT_DATA_DIR) + "/" + rel; }

inline qbopt::Design load(const std::string& rel, qbopt::Coding coding = qbopt::Coding::Centered) {
    return qbopt::read_design_file(data_path(rel), coding);
}

inline qbopt::Design random_pm1(int n, int m, std::mt19937_64& rng) {
    std::bernoulli_distribution coin(0.5);
    std::vector<int8_t> e(static_cast<std::size_t>(n) * m);
    for (auto& v : e) v = coin(rng) ? 1 : -1;
    return qbopt::Design(n, m, std::move(e));
}

// Word counts by scanning every column bitmask directly.
inline std::vector<double> bitmask_word_counts(const qbopt::Design& d, int max_order) {
    const int n = d.runs();
    const int m = d.factors();
    std::vector<double> b(max_order, 0.0);
    for (std::uint32_t mask = 1; mask < (1u << m); ++mask) {
        const int k = std::popcount(mask);
        if (k > max_order) continue;
        long long s = 0;
        for (int r = 0; r < n; ++r) {
            int prod = 1;
            for (int c = 0; c < m; ++c)
                if (mask & (1u << c)) prod *= d(r, c);
            s += prod;
        }
        b[k - 1] += static_cast<double>(s * s) / (static_cast<double>(n) * n);
    }
    return b;
}

inline qbopt::Design permute_rows(const qbopt::Design& d, const std::vector<int>& perm) {
    std::vector<int8_t> e;
    for (int r : perm)
        for (int c = 0; c < d.factors(); ++c) e.push_back(d(r, c));
    return qbopt::Design(d.runs(), d.factors(), std::move(e));
}

inline qbopt::Design permute_columns(const qbopt::Design& d, const std::vector<int>& perm) {
    std::vector<int8_t> e;
    for (int r = 0; r < d.runs(); ++r)
        for (int c : perm) e.push_back(d(r, c));
    return qbopt::Design(d.runs(), d.factors(), std::move(e));
}

inline std::vector<int> shuffled(int n, std::mt19937_64& rng) {
    std::vector<int> v(n);
    std::iota(v.begin(), v.end(), 0);
    std::shuffle(v.begin(), v.end(), rng);
    return v;
}

inline qbopt::PriorPair random_prior(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    return {u(rng), u(rng)};
}

}  // namespace support
