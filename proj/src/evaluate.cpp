#include "qbopt/evaluate.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <numeric>
#include <stdexcept>

namespace qbopt {

namespace {

// Advance a k-combination of {0..n-1}; false after the last one.
bool next_combination(std::vector<int>& idx, int n) {
    const int k = static_cast<int>(idx.size());
    int pos = k - 1;
    while (pos >= 0 && idx[pos] == n - k + pos) --pos;
    if (pos < 0) return false;
    ++idx[pos];
    for (int i = pos + 1; i < k; ++i) idx[i] = idx[i - 1] + 1;
    return true;
}

std::vector<int> first_combination(int k) {
    std::vector<int> idx(k);
    std::iota(idx.begin(), idx.end(), 0);
    return idx;
}

}  // namespace

double efficiency(const WordCountPattern& ref, const WordCountPattern& best, int m, const PriorPair& p) {
    const double q_ref = qb_closed(ref, m, p, QbScale::Quarter);
    const double q_best = qb_closed(best, m, p, QbScale::Quarter);
    if (q_best > q_ref + 1e-12) throw std::invalid_argument("best design scores worse than the reference");
    if (q_ref == 0.0) return 1.0;
    return q_best / q_ref;
}

long long round_half_even(double x) {
    // m*pi1 and C(M,2)*pi2 land on halves only up to representation error
    const double snapped = std::round(x * 1e9) / 1e9;
    const double lower = std::floor(snapped);
    const double frac = snapped - lower;
    long long r = static_cast<long long>(lower);
    if (frac > 0.5) ++r;
    else if (frac == 0.5 && (r % 2 != 0)) ++r;
    return r;
}

std::uint64_t binomial(int n, int k) {
    if (k < 0 || n < 0 || k > n) return 0;
    k = std::min(k, n - k);
    std::uint64_t r = 1;
    for (int i = 1; i <= k; ++i) r = r * static_cast<std::uint64_t>(n - k + i) / static_cast<std::uint64_t>(i);
    return r;
}

ExpectedModelSize expected_model_size(int m, const PriorPair& p) {
    if (m < 1) throw std::invalid_argument("factor count must be positive");
    ExpectedModelSize s;
    s.mains = static_cast<int>(round_half_even(m * p.pi1));
    const int pairs = s.mains * (s.mains - 1) / 2;
    s.interactions = static_cast<int>(round_half_even(pairs * p.pi2));
    s.total = model_count(m, s.mains, s.interactions);
    return s;
}

std::uint64_t model_count(int m, int mains, int interactions) {
    return binomial(m, mains) * binomial(mains * (mains - 1) / 2, interactions);
}

void enumerate_models(int m, int mains, int interactions, const std::function<void(const ModelSpec&)>& visit) {
    const int pairs = mains * (mains - 1) / 2;
    if (mains < 0 || mains > m || interactions < 0 || interactions > pairs)
        throw std::invalid_argument("model size outside the admissible range");
    auto main_set = first_combination(mains);
    do {
        std::vector<FactorPair> candidates;
        for (int i = 0; i < mains; ++i)
            for (int j = i + 1; j < mains; ++j) candidates.emplace_back(main_set[i], main_set[j]);
        auto pick = first_combination(interactions);
        do {
            std::vector<FactorPair> chosen;
            chosen.reserve(interactions);
            for (int k : pick) chosen.push_back(candidates[k]);
            visit(ModelSpec(main_set, std::move(chosen)));
        } while (next_combination(pick, pairs));
    } while (next_combination(main_set, m));
}

EvalReport projection_report(const Design& a, const Design& b, const PriorPair& p, std::uint64_t cap) {
    if (a.factors() != b.factors()) throw std::invalid_argument("designs must have the same number of factors");
    const int m = a.factors();
    EvalReport report;
    report.prior = p;
    report.size = expected_model_size(m, p);
    if (report.size.total > cap)
        throw std::length_error("expected model count " + std::to_string(report.size.total) +
                                " exceeds the enumeration cap " + std::to_string(cap));
    const int params = 1 + report.size.mains + report.size.interactions;
    report.exceeds_runs = params > std::min(a.runs(), b.runs());

    double sum_a = 0.0, sum_b = 0.0;
    enumerate_models(m, report.size.mains, report.size.interactions, [&](const ModelSpec& spec) {
        const auto as_a = as_exact_baseline(a, spec);
        const auto as_b = as_exact_baseline(b, spec);
        if (as_a) ++report.estimable_a;
        if (as_b) ++report.estimable_b;
        if (as_a && as_b) {
            ++report.estimable_both;
            sum_a += *as_a;
            sum_b += *as_b;
        }
    });
    const double total = static_cast<double>(report.size.total);
    report.ratio_a = report.estimable_a / total;
    report.ratio_b = report.estimable_b / total;
    if (report.estimable_both > 0) {
        report.avg_as_a = sum_a / static_cast<double>(report.estimable_both);
        report.avg_as_b = sum_b / static_cast<double>(report.estimable_both);
    }
    return report;
}

std::array<double, 3> contour_polynomial(const WordCountPattern& a, const WordCountPattern& b, int m, double pi1) {
    const double d1 = a[1] - b[1], d2 = a[2] - b[2], d3 = a[3] - b[3], d4 = a[4] - b[4];
    const double p1 = pi1, p2 = pi1 * pi1, p3 = p2 * pi1, p4 = p3 * pi1;
    // quarter-scale weights split by their power of pi2
    return {
        p1 * d1 + 2 * p2 * d2,
        7.0 * (m - 1) * p2 * d1 + 6 * p2 * d2 + 21 * p3 * d3,
        12.0 * (m - 2) * p3 * d2 + 36 * p4 * d4,
    };
}

Contour pairwise_contour(const WordCountPattern& a, const WordCountPattern& b, int m, double pi1) {
    if (!(pi1 > 0.0 && pi1 <= 1.0)) throw std::invalid_argument("pi1 must lie in (0, 1]");
    Contour out;
    out.coefficients = contour_polynomial(a, b, m, pi1);
    const auto [c0, c1, c2] = out.coefficients;
    const double scale = std::max({1.0, std::abs(c0), std::abs(c1), std::abs(c2)});
    const double tiny = 1e-14 * scale;

    std::vector<double> roots;
    if (std::abs(c2) < tiny) {
        if (std::abs(c1) < tiny) {
            out.kind = std::abs(c0) < tiny ? Contour::Kind::EqualEverywhere : Contour::Kind::NeverEqual;
            return out;
        }
        roots.push_back(-c0 / c1);
    } else {
        const double disc = c1 * c1 - 4 * c2 * c0;
        if (disc >= 0) {
            // cancellation-free pair
            const double q = -0.5 * (c1 + std::copysign(std::sqrt(disc), c1));
            roots.push_back(q / c2);
            if (q != 0.0) roots.push_back(c0 / q);
        }
    }
    for (double r : roots) {
        if (r >= -1e-12 && r <= 1 + 1e-12) out.roots.push_back(std::clamp(r, 0.0, 1.0));
    }
    std::sort(out.roots.begin(), out.roots.end());
    out.roots.erase(std::unique(out.roots.begin(), out.roots.end(),
                                [](double x, double y) { return std::abs(x - y) < 1e-12; }),
                    out.roots.end());
    out.kind = out.roots.empty() ? Contour::Kind::NeverEqual : Contour::Kind::Roots;
    return out;
}

std::vector<int> optimal_designs(const std::vector<LabeledPattern>& designs, int m, const PriorPair& p) {
    if (designs.empty()) throw std::invalid_argument("design list is empty");
    std::vector<double> q(designs.size());
    for (std::size_t i = 0; i < designs.size(); ++i) q[i] = qb_closed(designs[i].word_counts, m, p, QbScale::Quarter);
    const double best = *std::min_element(q.begin(), q.end());
    const double tol = 1e-9 * std::max(1e-300, std::abs(best));
    std::vector<int> winners;
    for (std::size_t i = 0; i < q.size(); ++i)
        if (q[i] - best <= tol) winners.push_back(static_cast<int>(i));
    return winners;
}

std::vector<LabeledPattern> parse_word_count_csv(std::string_view text) {
    std::vector<LabeledPattern> out;
    std::istringstream in{std::string(text)};
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#' || line.rfind("label", 0) == 0) continue;
        std::istringstream fields(line);
        LabeledPattern lp;
        std::string cell;
        std::getline(fields, lp.label, ',');
        int count = 0;
        while (std::getline(fields, cell, ',')) {
            if (count == 4) throw DesignError("word-count line " + std::to_string(line_no) + ": too many fields");
            std::size_t used = 0;
            try {
                lp.word_counts.b[count] = std::stod(cell, &used);
            } catch (const std::exception&) {
                used = 0;
            }
            if (used == 0) throw DesignError("word-count line " + std::to_string(line_no) + ": bad number '" + cell + "'");
            ++count;
        }
        if (lp.label.empty() || count != 4)
            throw DesignError("word-count line " + std::to_string(line_no) + ": expected label and four values");
        out.push_back(std::move(lp));
    }
    if (out.empty()) throw DesignError("no word-count rows");
    return out;
}

std::vector<LabeledPattern> read_word_count_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DesignError("cannot read " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_word_count_csv(buf.str());
}

std::string RegionMap::winner_label(const RegionPoint& pt) const {
    std::string s;
    for (int w : pt.winners) {
        if (!s.empty()) s += '|';
        s += designs[w].label;
    }
    return s;
}

RegionMap region_map(const std::vector<LabeledPattern>& designs, int m, double step) {
    if (!(step > 0.0 && step <= 0.1)) throw std::invalid_argument("grid step must lie in (0, 0.1]");
    if (designs.empty()) throw std::invalid_argument("design list is empty");
    RegionMap map;
    map.designs = designs;
    const int count = static_cast<int>(std::floor(1.0 / step + 1e-9));
    for (int i = 1; i <= count; ++i) {
        for (int j = 1; j <= count; ++j) {
            RegionPoint pt;
            pt.pi1 = std::min(1.0, i * step);
            pt.pi2 = std::min(1.0, j * step);
            pt.winners = optimal_designs(designs, m, PriorPair(pt.pi1, pt.pi2));
            map.grid.push_back(std::move(pt));
        }
    }
    return map;
}

std::vector<CurvePoint> qb_curve(const WordCountPattern& wc, int m, const std::vector<double>& pi1_list,
                                 double pi2_step) {
    if (!(pi2_step > 0.0 && pi2_step <= 1.0)) throw std::invalid_argument("pi2 step must lie in (0, 1]");
    const int count = static_cast<int>(std::floor(1.0 / pi2_step + 1e-9));
    std::vector<CurvePoint> out;
    for (double pi1 : pi1_list) {
        for (int j = 0; j <= count; ++j) {
            const double pi2 = std::min(1.0, j * pi2_step);
            out.push_back({pi1, pi2, qb_closed(wc, m, PriorPair(pi1, pi2), QbScale::Quarter)});
        }
    }
    return out;
}

}  // namespace qbopt
