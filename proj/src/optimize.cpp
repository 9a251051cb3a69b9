#include "qbopt/optimize.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <numeric>

namespace qbopt {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

void check_shape(int runs, int factors) {
    if (runs < 1) throw DesignError("run count must be positive");
    if (factors < 2) throw DesignError("Q_B search needs at least two factors");
}

OptimResult make_result(Design d, const PriorPair& p, const SearchOptions& opts, int restarts) {
    OptimResult r;
    r.word_counts = word_counts(d);
    r.qb = qb_closed(r.word_counts, d.factors(), p, QbScale::Quarter);
    r.design = std::move(d);
    r.prior = p;
    r.restarts_used = restarts;
    r.seed = opts.seed;
    return r;
}

}  // namespace

// --- IncrementalWordCounts -------------------------------------------------

IncrementalWordCounts::IncrementalWordCounts(Design d) : design_(std::move(d)) {
    const int m = design_.factors();
    by_column_.assign(m, {});
    std::array<int, 4> cols{};
    // enumerate subsets of size 1..4 in lexicographic order
    auto add = [&](int size) {
        Subset s;
        s.cols = cols;
        s.size = size;
        const int id = static_cast<int>(subsets_.size());
        subsets_.push_back(s);
        for (int i = 0; i < size; ++i) by_column_[cols[i]].push_back(id);
    };
    for (cols[0] = 0; cols[0] < m; ++cols[0]) {
        add(1);
        for (cols[1] = cols[0] + 1; cols[1] < m; ++cols[1]) {
            add(2);
            for (cols[2] = cols[1] + 1; cols[2] < m; ++cols[2]) {
                add(3);
                for (cols[3] = cols[2] + 1; cols[3] < m; ++cols[3]) add(4);
            }
        }
    }
    sums_.assign(subsets_.size(), 0);
    for (std::size_t s = 0; s < subsets_.size(); ++s) {
        std::int64_t sum = 0;
        for (int r = 0; r < design_.runs(); ++r) sum += product(subsets_[s], r);
        sums_[s] = sum;
        totals_[subsets_[s].size - 1] += sum * sum;
    }
}

int IncrementalWordCounts::product(const Subset& s, int row) const {
    const auto x = design_.row(row);
    int p = x[s.cols[0]];
    for (int i = 1; i < s.size; ++i) p *= x[s.cols[i]];
    return p;
}

WordCountPattern IncrementalWordCounts::pattern() const {
    const double n2 = static_cast<double>(design_.runs()) * design_.runs();
    WordCountPattern wc;
    for (int i = 0; i < 4; ++i) wc.b[i] = static_cast<double>(totals_[i]) / n2;
    return wc;
}

IncrementalWordCounts::Totals IncrementalWordCounts::flip_delta(int row, int col) const {
    Totals d{};
    for (int id : by_column_[col]) {
        const auto& s = subsets_[id];
        const std::int64_t sum = sums_[id];
        const std::int64_t next = sum - 2 * product(s, row);
        d[s.size - 1] += next * next - sum * sum;
    }
    return d;
}

void IncrementalWordCounts::apply_flip(int row, int col) {
    for (int id : by_column_[col]) {
        const auto& s = subsets_[id];
        const std::int64_t sum = sums_[id];
        const std::int64_t next = sum - 2 * product(s, row);
        totals_[s.size - 1] += next * next - sum * sum;
        sums_[id] = next;
    }
    design_.flip(row, col);
}

IncrementalWordCounts::Totals IncrementalWordCounts::swap_delta(int col, int row_a, int row_b) const {
    Totals d{};
    for (int id : by_column_[col]) {
        const auto& s = subsets_[id];
        const std::int64_t sum = sums_[id];
        const std::int64_t next = sum - 2 * product(s, row_a) - 2 * product(s, row_b);
        d[s.size - 1] += next * next - sum * sum;
    }
    return d;
}

void IncrementalWordCounts::apply_swap(int col, int row_a, int row_b) {
    for (int id : by_column_[col]) {
        const auto& s = subsets_[id];
        const std::int64_t sum = sums_[id];
        const std::int64_t next = sum - 2 * product(s, row_a) - 2 * product(s, row_b);
        totals_[s.size - 1] += next * next - sum * sum;
        sums_[id] = next;
    }
    design_.flip(row_a, col);
    design_.flip(row_b, col);
}

// --- objective ---------------------------------------------------------------

QbObjective::QbObjective(int runs, int factors, const PriorPair& p) {
    const auto w = QbWeights::make(factors, p);
    const double scale = 4.0 * runs * runs;
    for (int i = 0; i < 4; ++i) coef_[i] = w.w[i] / scale;
}

double QbObjective::operator()(const IncrementalWordCounts::Totals& t) const {
    double v = 0.0;
    for (int i = 0; i < 4; ++i) v += coef_[i] * static_cast<double>(t[i]);
    return v;
}

double QbObjective::with_delta(const IncrementalWordCounts::Totals& t, const IncrementalWordCounts::Totals& d) const {
    double v = 0.0;
    for (int i = 0; i < 4; ++i) v += coef_[i] * static_cast<double>(t[i] + d[i]);
    return v;
}

bool QbObjective::improves(double candidate, double incumbent) {
    return candidate < incumbent - 1e-12 * std::max(1.0, std::abs(incumbent));
}

// --- random starts -----------------------------------------------------------

int default_restarts(int runs, int factors) { return runs * factors <= 100 ? 1000 : 200; }

std::mt19937_64 restart_rng(std::uint64_t seed, std::uint64_t stream) {
    return std::mt19937_64(splitmix64(seed ^ splitmix64(stream)));
}

Design random_design(int runs, int factors, std::mt19937_64& rng) {
    std::vector<int8_t> e(static_cast<std::size_t>(runs) * factors);
    std::uint64_t bits = 0;
    int left = 0;
    for (auto& v : e) {
        if (left == 0) {
            bits = rng();
            left = 64;
        }
        v = (bits & 1u) ? 1 : -1;
        bits >>= 1;
        --left;
    }
    return Design(runs, factors, std::move(e));
}

Design random_balanced_design(int runs, int factors, std::mt19937_64& rng) {
    if (runs % 2 != 0) throw DesignError("level-balanced designs need an even run count");
    Design d = Design::filled(runs, factors, 1);
    std::vector<int8_t> col(runs);
    for (int c = 0; c < factors; ++c) {
        std::fill(col.begin(), col.begin() + runs / 2, int8_t{1});
        std::fill(col.begin() + runs / 2, col.end(), int8_t{-1});
        // Fisher-Yates with the raw generator so the order is library independent
        for (int i = runs - 1; i > 0; --i) std::swap(col[i], col[rng() % static_cast<std::uint64_t>(i + 1)]);
        for (int r = 0; r < runs; ++r) d.set(r, c, col[r]);
    }
    return d;
}

// --- local searches ----------------------------------------------------------

Design flip_descent(Design start, const PriorPair& p, std::vector<double>* accepted) {
    const int n = start.runs();
    const int m = start.factors();
    const QbObjective objective(n, m, p);
    IncrementalWordCounts state(std::move(start));
    double current = objective(state.totals());
    if (accepted) accepted->push_back(current);
    bool changed = true;
    while (changed) {
        changed = false;
        for (int r = 0; r < n; ++r) {
            for (int c = 0; c < m; ++c) {
                const double candidate = objective.with_delta(state.totals(), state.flip_delta(r, c));
                if (QbObjective::improves(candidate, current)) {
                    state.apply_flip(r, c);
                    current = candidate;
                    changed = true;
                    if (accepted) accepted->push_back(current);
                }
            }
        }
    }
    return state.design();
}

Design swap_descent(Design start, const PriorPair& p) {
    const int n = start.runs();
    const int m = start.factors();
    const QbObjective objective(n, m, p);
    IncrementalWordCounts state(std::move(start));
    double current = objective(state.totals());
    bool changed = true;
    while (changed) {
        changed = false;
        for (int c = 0; c < m; ++c) {
            for (int hi = 0; hi < n; ++hi) {
                if (state.design()(hi, c) != 1) continue;
                double best = current;
                int best_lo = -1;
                for (int lo = 0; lo < n; ++lo) {
                    if (state.design()(lo, c) != -1) continue;
                    const double candidate = objective.with_delta(state.totals(), state.swap_delta(c, hi, lo));
                    if (QbObjective::improves(candidate, best)) {
                        best = candidate;
                        best_lo = lo;
                    }
                }
                if (best_lo >= 0) {
                    state.apply_swap(c, hi, best_lo);
                    current = best;
                    changed = true;
                }
            }
        }
    }
    return state.design();
}

// --- drivers -------------------------------------------------------------------

OptimResult coordinate_exchange(int runs, int factors, const PriorPair& p, const SearchOptions& opts) {
    check_shape(runs, factors);
    const int restarts = opts.restarts > 0 ? opts.restarts : default_restarts(runs, factors);
    const QbObjective objective(runs, factors, p);
    Design best;
    double best_qb = 0.0;
    for (int r = 0; r < restarts; ++r) {
        auto rng = restart_rng(opts.seed, static_cast<std::uint64_t>(r));
        Design d = flip_descent(random_design(runs, factors, rng), p);
        const double qb = objective(IncrementalWordCounts(d).totals());
        if (r == 0 || QbObjective::improves(qb, best_qb)) {
            best = std::move(d);
            best_qb = qb;
        }
    }
    return make_result(std::move(best), p, opts, restarts);
}

ExtendedResult extended_exchange(int runs, int factors, const std::vector<PriorPair>& priors,
                                 const SearchOptions& opts) {
    if (priors.empty()) throw std::invalid_argument("extended exchange needs at least one prior");
    ExtendedResult out;
    out.results.reserve(priors.size());
    for (const auto& p : priors) out.results.push_back(coordinate_exchange(runs, factors, p, opts));

    const auto k = priors.size();
    bool replaced = k > 1;
    while (replaced) {
        if (out.rounds == kMaxReconcileRounds) {
            out.round_cap_reached = true;
            break;
        }
        ++out.rounds;
        replaced = false;
        for (std::size_t i = 0; i < k; ++i) {
            const auto& prior = priors[i];
            for (std::size_t j = 0; j < k; ++j) {
                if (j == i) continue;
                // efficiency ratio qb(OD_i)/qb(OD_j) at prior i above one
                const double rival = qb_closed(out.results[j].word_counts, factors, prior, QbScale::Quarter);
                if (!QbObjective::improves(rival, out.results[i].qb)) continue;
                Design d = flip_descent(out.results[j].design, prior);
                auto candidate = make_result(std::move(d), prior, opts, out.results[i].restarts_used);
                if (QbObjective::improves(candidate.qb, out.results[i].qb)) {
                    out.results[i] = std::move(candidate);
                    replaced = true;
                }
            }
        }
    }
    return out;
}

OptimResult level_balanced_exchange(int runs, int factors, const PriorPair& p, const SearchOptions& opts) {
    check_shape(runs, factors);
    if (runs % 2 != 0) throw DesignError("level-balanced search needs an even run count");
    const int restarts = opts.restarts > 0 ? opts.restarts : default_restarts(runs, factors);
    const QbObjective objective(runs, factors, p);
    Design best;
    double best_qb = 0.0;
    for (int r = 0; r < restarts; ++r) {
        auto rng = restart_rng(opts.seed, static_cast<std::uint64_t>(r));
        Design d = swap_descent(random_balanced_design(runs, factors, rng), p);
        const double qb = objective(IncrementalWordCounts(d).totals());
        if (r == 0 || QbObjective::improves(qb, best_qb)) {
            best = std::move(d);
            best_qb = qb;
        }
    }
    return make_result(std::move(best), p, opts, restarts);
}

// --- Hadamard column subsets ---------------------------------------------------

bool is_hadamard(const Design& h) {
    const int n = h.runs();
    if (h.factors() != n) return false;
    for (int a = 0; a < n; ++a) {
        for (int b = a; b < n; ++b) {
            int dot = 0;
            for (int r = 0; r < n; ++r) dot += h(r, a) * h(r, b);
            if (dot != (a == b ? n : 0)) return false;
        }
    }
    return true;
}

Design sylvester_hadamard(int order) {
    if (order < 1 || (order & (order - 1)) != 0) throw DesignError("Sylvester order must be a power of two");
    std::vector<int8_t> e(static_cast<std::size_t>(order) * order);
    for (int r = 0; r < order; ++r)
        for (int c = 0; c < order; ++c) e[static_cast<std::size_t>(r) * order + c] = (std::popcount(static_cast<unsigned>(r & c)) & 1) ? -1 : 1;
    return Design(order, order, std::move(e));
}

Design paley_hadamard(int q) {
    auto is_prime = [](int v) {
        if (v < 2) return false;
        for (int d = 2; d * d <= v; ++d)
            if (v % d == 0) return false;
        return true;
    };
    if (!is_prime(q) || q % 4 != 3) throw DesignError("Paley construction needs a prime q with q = 3 mod 4");
    std::vector<int> chi(q, -1);
    chi[0] = 0;
    for (int x = 1; x < q; ++x) chi[(x * x) % q] = 1;
    const int n = q + 1;
    Design h = Design::filled(n, n, 1);
    // H = I + S with S = [[0, 1'], [-1, Q]], Q the Jacobsthal matrix
    for (int r = 1; r < n; ++r) {
        h.set(r, 0, -1);
        for (int c = 1; c < n; ++c) {
            if (r == c) continue;
            h.set(r, c, static_cast<int8_t>(chi[((c - r) % q + q) % q]));
        }
    }
    return h;
}

namespace {

Design normalised_columns(const Design& h) {
    Design out = h;
    for (int r = 0; r < h.runs(); ++r)
        if (h(r, 0) < 0)
            for (int c = 0; c < h.factors(); ++c) out.flip(r, c);
    return out;
}

}  // namespace

Design hadamard_subdesign(const Design& h, const std::vector<int>& columns) {
    const Design norm = normalised_columns(h);
    const int n = h.runs();
    const int k = static_cast<int>(columns.size());
    std::vector<int8_t> e(static_cast<std::size_t>(n) * k);
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < k; ++c) e[static_cast<std::size_t>(r) * k + c] = norm(r, columns[c] + 1);
    return Design(n, k, std::move(e));
}

std::vector<ColumnSubsetPattern> hadamard_subset_search(const Design& h, int k) {
    if (!is_hadamard(h)) throw HadamardError("matrix fails the Hadamard identity H'H = N I");
    const int avail = h.factors() - 1;
    if (k < 1 || k > avail) throw DesignError("subset size must lie in [1, N-1]");

    std::vector<ColumnSubsetPattern> patterns;
    std::map<std::vector<long long>, std::size_t> seen;
    std::vector<int> idx(k);
    std::iota(idx.begin(), idx.end(), 0);
    while (true) {
        const Design sub = hadamard_subdesign(h, idx);
        auto sequence = generalized_word_counts(sub, k);
        std::vector<long long> key(sequence.size());
        for (std::size_t i = 0; i < sequence.size(); ++i) key[i] = std::llround(sequence[i] * 1e6);
        const auto [it, fresh] = seen.emplace(std::move(key), patterns.size());
        if (fresh) patterns.push_back({idx, word_counts(sub), std::move(sequence), 0});
        ++patterns[it->second].multiplicity;

        int pos = k - 1;
        while (pos >= 0 && idx[pos] == avail - k + pos) --pos;
        if (pos < 0) break;
        ++idx[pos];
        for (int i = pos + 1; i < k; ++i) idx[i] = idx[i - 1] + 1;
    }
    return patterns;
}

}  // namespace qbopt
