#include "qbopt/criteria.hpp"

#include <Eigen/Dense>

#include <bit>
#include <cmath>
#include <iomanip>
#include <sstream>

namespace qbopt {

namespace {

double power(double base, int exponent) {
    return exponent == 0 ? 1.0 : std::pow(base, exponent);
}

// Factors and interactions touched by one effect of the second-order model.
struct EffectParts {
    unsigned factors = 0;  // bitmask
    int interaction = -1;  // -1 when not an interaction
};

std::vector<EffectParts> effect_parts(int m) {
    std::vector<EffectParts> parts;
    parts.push_back({});
    for (int f = 0; f < m; ++f) parts.push_back({1u << f, -1});
    int k = 0;
    for (int a = 0; a < m; ++a)
        for (int b = a + 1; b < m; ++b) parts.push_back({(1u << a) | (1u << b), k++});
    return parts;
}

}  // namespace

PriorPair::PriorPair(double p1, double p2) : pi1(p1), pi2(p2) {
    if (!(p1 >= 0.0 && p1 <= 1.0) || !(p2 >= 0.0 && p2 <= 1.0))
        throw std::invalid_argument("prior probabilities must lie in [0, 1]");
}

std::array<long long, 4> WordCountPattern::key() const {
    std::array<long long, 4> k{};
    for (int i = 0; i < 4; ++i) k[i] = std::llround(b[i] * 1e6);
    return k;
}

WordCountPattern WordCountPattern::snapped(int runs) const {
    const double n2 = static_cast<double>(runs) * runs;
    WordCountPattern out;
    for (int i = 0; i < 4; ++i) out.b[i] = std::round(b[i] * n2) / n2;
    return out;
}

std::string WordCountPattern::to_string(int decimals) const {
    std::ostringstream os;
    os << std::fixed << std::setprecision(decimals) << '(' << b[0] << ", " << b[1] << ", " << b[2] << ", " << b[3]
       << ')';
    return os.str();
}

QbWeights QbWeights::make(int m, const PriorPair& p) {
    QbWeights w;
    w.w[0] = 4 * xi(1, 0, p) + 28.0 * (m - 1) * xi(2, 1, p);
    w.w[1] = 8 * xi(2, 0, p) + 24 * xi(2, 1, p) + 48.0 * (m - 2) * xi(3, 2, p);
    w.w[2] = 84 * xi(3, 1, p);
    w.w[3] = 144 * xi(4, 2, p);
    return w;
}

WordCountPattern word_counts(const Design& d) {
    const int n = d.runs();
    const int m = d.factors();
    std::vector<std::vector<int>> cols(m, std::vector<int>(n));
    for (int c = 0; c < m; ++c)
        for (int r = 0; r < n; ++r) cols[c][r] = d(r, c);

    const double n2 = static_cast<double>(n) * n;
    WordCountPattern wc;
    std::vector<int> p2(n), p3(n);
    for (int i = 0; i < m; ++i) {
        long long s1 = 0;
        for (int r = 0; r < n; ++r) s1 += cols[i][r];
        wc.b[0] += static_cast<double>(s1 * s1) / n2;
        for (int j = i + 1; j < m; ++j) {
            long long s2 = 0;
            for (int r = 0; r < n; ++r) s2 += p2[r] = cols[i][r] * cols[j][r];
            wc.b[1] += static_cast<double>(s2 * s2) / n2;
            for (int k = j + 1; k < m; ++k) {
                long long s3 = 0;
                for (int r = 0; r < n; ++r) s3 += p3[r] = p2[r] * cols[k][r];
                wc.b[2] += static_cast<double>(s3 * s3) / n2;
                for (int l = k + 1; l < m; ++l) {
                    long long s4 = 0;
                    for (int r = 0; r < n; ++r) s4 += p3[r] * cols[l][r];
                    wc.b[3] += static_cast<double>(s4 * s4) / n2;
                }
            }
        }
    }
    return wc;
}

std::vector<double> generalized_word_counts(const Design& d, int max_order) {
    const int n = d.runs();
    const int m = d.factors();
    const int top = std::min(max_order, m);
    std::vector<double> out(std::max(top, 0), 0.0);
    if (top < 1) return out;
    const double n2 = static_cast<double>(n) * n;
    // depth-first over column subsets, carrying the running row products
    std::vector<std::vector<int>> prod(top + 1, std::vector<int>(n, 1));
    auto visit = [&](auto&& self, int next, int depth) -> void {
        for (int c = next; c < m; ++c) {
            long long sum = 0;
            for (int r = 0; r < n; ++r) sum += prod[depth + 1][r] = prod[depth][r] * d(r, c);
            out[depth] += static_cast<double>(sum * sum) / n2;
            if (depth + 1 < top) self(self, c + 1, depth + 1);
        }
    };
    visit(visit, 0, 0);
    return out;
}

double xi(int a, int b, const PriorPair& p) {
    if (a < 0 || b < 0) throw std::invalid_argument("xi exponents must be nonnegative");
    return power(p.pi1, a) * power(p.pi2, b);
}

double model_prior(const ModelSpec& spec, int m, const PriorPair& p) {
    spec.validate_for(m);
    const int a = static_cast<int>(spec.mains().size());
    const int b = static_cast<int>(spec.interactions().size());
    return power(p.pi1, a) * power(1 - p.pi1, m - a) * power(p.pi2, b) * power(1 - p.pi2, a * (a - 1) / 2 - b);
}

std::vector<ModelSpec> hereditary_models(int m) {
    if (m < 0 || m > 6) throw std::invalid_argument("hereditary model enumeration needs 0 <= m <= 6");
    std::vector<ModelSpec> models;
    for (unsigned mask = 0; mask < (1u << m); ++mask) {
        std::vector<int> mains;
        for (int f = 0; f < m; ++f)
            if (mask & (1u << f)) mains.push_back(f);
        std::vector<FactorPair> pairs;
        for (std::size_t i = 0; i < mains.size(); ++i)
            for (std::size_t j = i + 1; j < mains.size(); ++j) pairs.emplace_back(mains[i], mains[j]);
        const auto np = pairs.size();
        for (unsigned long long sub = 0; sub < (1ull << np); ++sub) {
            std::vector<FactorPair> chosen;
            for (std::size_t k = 0; k < np; ++k)
                if (sub & (1ull << k)) chosen.push_back(pairs[k]);
            models.emplace_back(mains, std::move(chosen));
        }
    }
    return models;
}

int main_index(int factor) { return 1 + factor; }

int interaction_index(int a, int b, int m) {
    if (a > b) std::swap(a, b);
    return 1 + m + a * (2 * m - a - 1) / 2 + (b - a - 1);
}

int second_order_size(int m) { return 1 + m + m * (m - 1) / 2; }

Eigen::MatrixXd p_matrix(int m, const PriorPair& p, PMethod method) {
    const int size = second_order_size(m);
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(size, size);
    if (method == PMethod::ClosedForm) {
        // p_ij = xi(a, b) where a counts distinct factors and b distinct
        // interactions appearing in effects i and j together.
        const auto parts = effect_parts(m);
        for (int i = 0; i < size; ++i) {
            for (int j = 0; j < size; ++j) {
                const int a = std::popcount(parts[i].factors | parts[j].factors);
                int b = 0;
                if (parts[i].interaction >= 0) ++b;
                if (parts[j].interaction >= 0 && parts[j].interaction != parts[i].interaction) ++b;
                out(i, j) = xi(a, b, p);
            }
        }
        return out;
    }
    if (m > 5) throw std::invalid_argument("enumerated p matrix needs m <= 5");
    for (const auto& model : hereditary_models(m)) {
        const double w = model_prior(model, m, p);
        std::vector<int> present{0};
        for (int f : model.mains()) present.push_back(main_index(f));
        for (auto [a, b] : model.interactions()) present.push_back(interaction_index(a, b, m));
        for (int i : present)
            for (int j : present) out(i, j) += w;
    }
    return out;
}

double qb_closed(const WordCountPattern& wc, int m, const PriorPair& p, QbScale scale) {
    const double full = QbWeights::make(m, p).apply(wc);
    return scale == QbScale::Full ? full : full / 4.0;
}

double qb_direct(const Design& d, const PriorPair& p) {
    const int m = d.factors();
    const double n = d.runs();
    const Eigen::MatrixXd x = second_order_centered(d);
    const Eigen::MatrixXd a = x.transpose() * x;
    const Eigen::MatrixXd pm = p_matrix(m, p, PMethod::ClosedForm);
    const Eigen::ArrayXXd terms = pm.array() * a.array().square() / (n * n);
    const double mains = terms.middleRows(1, m).sum();
    const double ints = terms.bottomRows(a.rows() - 1 - m).sum();
    return 4 * mains + 24 * ints;
}

double qb_diagonal_constant(int m, const PriorPair& p) {
    return 4.0 * m * xi(1, 0, p) + 24.0 * (m * (m - 1) / 2) * xi(2, 1, p);
}

std::optional<double> as_exact_baseline(const Design& d, const ModelSpec& spec) {
    const Eigen::MatrixXd x = model_matrix(d, spec, Coding::Baseline);
    const Eigen::MatrixXd info = x.transpose() * x;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(info);
    const Eigen::VectorXd& ev = eig.eigenvalues();  // ascending
    const double largest = ev(ev.size() - 1);
    if (!(largest > 0) || ev(0) < kSingularityTolerance * largest) return std::nullopt;
    // trace of the inverse minus its (0,0) entry
    const Eigen::MatrixXd& v = eig.eigenvectors();
    double total = 0.0;
    for (Eigen::Index k = 0; k < ev.size(); ++k) total += (1.0 - v(0, k) * v(0, k)) / ev(k);
    return total;
}

double as_approx_baseline(const Design& d, const ModelSpec& spec) {
    const int m = d.factors();
    spec.validate_for(m);
    const Eigen::MatrixXd x = second_order_centered(d);
    const Eigen::MatrixXd a = x.transpose() * x;
    std::vector<int> js{0};
    for (int f : spec.mains()) js.push_back(main_index(f));
    for (auto [f, g] : spec.interactions()) js.push_back(interaction_index(f, g, m));
    auto row_sum = [&](int i) {
        double s = 0.0;
        for (int j : js) s += a(i, j) * a(i, j) / (a(i, i) * a(i, i) * a(j, j));
        return s;
    };
    double total = 0.0;
    for (int f : spec.mains()) total += 4 * row_sum(main_index(f));
    for (auto [f, g] : spec.interactions()) total += 24 * row_sum(interaction_index(f, g, m));
    return total;
}

}  // namespace qbopt
