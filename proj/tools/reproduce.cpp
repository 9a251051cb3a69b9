#include "reproduce.hpp"

#include "qbopt/criteria.hpp"
#include "qbopt/design.hpp"
#include "qbopt/evaluate.hpp"
#include "qbopt/optimize.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <stdexcept>

namespace qbopt::cli {

namespace {

constexpr double kQbTol = 1e-3;
constexpr double kWordCountTol = 1e-4;
constexpr double kProjectionTol = 0.02;
constexpr double kEq51Tol = 1e-9;

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    int column(const std::string& name) const {
        auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end()) throw std::runtime_error("expected-value table lacks column '" + name + "'");
        return static_cast<int>(it - header.begin());
    }
    double num(std::size_t row, const std::string& name) const { return std::stod(rows[row][column(name)]); }
    const std::string& str(std::size_t row, const std::string& name) const { return rows[row][column(name)]; }
};

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream in(line);
    while (std::getline(in, cell, sep)) out.push_back(cell);
    return out;
}

CsvTable read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read bundled data file '" + path + "'");
    CsvTable t;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        if (t.header.empty())
            t.header = split(line, ',');
        else
            t.rows.push_back(split(line, ','));
    }
    return t;
}

struct Context {
    const ReproduceOptions& opts;
    Reproduction out;

    std::string path(const std::string& rel) const { return opts.data_dir + "/" + rel; }
    Design design(const std::string& rel) const { return read_design_file(path(rel), Coding::Centered); }
    CsvTable expected(const std::string& name) const { return read_csv(path("expected/" + name + ".csv")); }

    // Counts one comparison; returns ok unchanged.
    bool check(bool ok) {
        ++out.checked;
        if (!ok) ++out.failures;
        return ok;
    }
    SearchOptions search() const { return {opts.restarts, opts.seed}; }
};

std::string fixed(double x, int decimals) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, x);
    std::string s = buf;
    if (s.find_first_not_of("-0.") == std::string::npos && s[0] == '-') s.erase(0, 1);
    return s;
}

std::string status(bool ok) { return ok ? "ok" : "FAIL"; }

std::vector<PriorPair> priors_of(const CsvTable& t) {
    std::vector<PriorPair> out;
    for (std::size_t r = 0; r < t.rows.size(); ++r) out.emplace_back(t.num(r, "pi1"), t.num(r, "pi2"));
    return out;
}

bool same_prior(const PriorPair& a, const PriorPair& b) {
    return std::abs(a.pi1 - b.pi1) < 1e-9 && std::abs(a.pi2 - b.pi2) < 1e-9;
}

std::string label_for(const WordCountPattern& wc, const std::vector<LabeledPattern>& known) {
    for (const auto& k : known) {
        bool match = true;
        for (int i = 1; i <= 4; ++i) match = match && std::abs(wc[i] - k.word_counts[i]) < kQbTol;
        if (match) return k.label;
    }
    return "new";
}

// --- word counts and Q_B of the bundled 6-factor designs ------------------------

void table3(Context& c) {
    CsvTable exp = c.expected("table3");
    const std::map<std::string, std::string> files = {
        {"MinK", "table2/mink_centered.txt"}, {"AD1", "table2/ad1.txt"}, {"AD2", "table2/ad2.txt"}};
    c.out.table.header = {"design", "b1", "b2", "b3", "b4", "max_abs_diff", "status"};
    for (std::size_t r = 0; r < exp.rows.size(); ++r) {
        const std::string& name = exp.str(r, "design");
        WordCountPattern wc = word_counts(c.design(files.at(name)));
        double worst = 0.0;
        std::vector<std::string> row{name};
        for (int i = 1; i <= 4; ++i) {
            row.push_back(fixed4(wc[i]));
            worst = std::max(worst, std::abs(wc[i] - exp.num(r, "b" + std::to_string(i))));
        }
        bool ok = true;
        for (int i = 1; i <= 4; ++i) ok = c.check(std::abs(wc[i] - exp.num(r, "b" + std::to_string(i))) <= kWordCountTol) && ok;
        row.push_back(fixed(worst, 6));
        row.push_back(status(ok));
        c.out.table.rows.push_back(std::move(row));
    }
}

void table4(Context& c) {
    CsvTable exp = c.expected("table4");
    const std::vector<std::pair<std::string, std::string>> designs = {
        {"MinK", "table2/mink_centered.txt"}, {"AD1", "table2/ad1.txt"}, {"AD2", "table2/ad2.txt"}};
    std::vector<WordCountPattern> wcs;
    for (const auto& d : designs) wcs.push_back(word_counts(c.design(d.second)));
    c.out.table.header = {"pi1", "pi2", "MinK", "AD1", "AD2", "max_abs_diff", "status"};
    for (std::size_t r = 0; r < exp.rows.size(); ++r) {
        PriorPair p(exp.num(r, "pi1"), exp.num(r, "pi2"));
        std::vector<std::string> row{fixed(p.pi1, 1), fixed(p.pi2, 1)};
        double worst = 0.0;
        bool ok = true;
        for (std::size_t k = 0; k < designs.size(); ++k) {
            const double qb = qb_closed(wcs[k], 6, p, QbScale::Quarter);
            const double diff = std::abs(qb - exp.num(r, designs[k].first));
            worst = std::max(worst, diff);
            ok = c.check(diff <= kQbTol) && ok;
            row.push_back(fixed4(qb));
        }
        row.push_back(fixed(worst, 6));
        row.push_back(status(ok));
        c.out.table.rows.push_back(std::move(row));
    }
}

// --- optimizer tables ---------------------------------------------------------------

struct GridSearch {
    std::vector<OptimResult> results;
    std::vector<std::string> source;  // "exchange" or "balanced"
};

// Extended exchange over the grid; with balanced_restarts > 0 a level-balanced
// search per prior replaces the exchange result where it is strictly better.
GridSearch search_grid(Context& c, int runs, int m, const std::vector<PriorPair>& grid, int balanced_restarts) {
    ExtendedResult ext = extended_exchange(runs, m, grid, c.search());
    if (ext.round_cap_reached) c.out.notes.push_back("warning: reconciliation round cap reached");
    GridSearch g{ext.results, std::vector<std::string>(grid.size(), "exchange")};
    if (balanced_restarts > 0) {
        for (std::size_t i = 0; i < grid.size(); ++i) {
            OptimResult lb = level_balanced_exchange(runs, m, grid[i], {balanced_restarts, c.opts.seed});
            if (QbObjective::improves(lb.qb, g.results[i].qb)) {
                g.results[i] = std::move(lb);
                g.source[i] = "balanced";
            }
        }
    }
    return g;
}

void efficiency_table(Context& c, const std::string& name, int runs, int m, const std::string& mink_file,
                      const std::string& labels_file, int balanced_restarts) {
    CsvTable exp = c.expected(name);
    const std::vector<PriorPair> grid = priors_of(exp);
    const WordCountPattern mink = word_counts(c.design(mink_file));
    const auto known = read_word_count_csv(c.path(labels_file));
    GridSearch g = search_grid(c, runs, m, grid, balanced_restarts);

    c.out.table.header = {"pi1",        "pi2",          "qb_mink",         "best_qb",
                          "efficiency", "design",       "search",          "paper_best_qb",   "paper_efficiency",
                          "paper_design", "status"};
    for (std::size_t r = 0; r < grid.size(); ++r) {
        const PriorPair& p = grid[r];
        const OptimResult& best = g.results[r];
        const double qm = qb_closed(mink, m, p, QbScale::Quarter);
        const double eff = efficiency(mink, best.word_counts, m, p);
        const double paper_best = exp.num(r, "best_qb");
        bool ok = c.check(std::abs(qm - exp.num(r, "qb_mink")) <= kQbTol);
        ok = c.check(best.qb <= paper_best + kQbTol) && ok;
        const bool improved = best.qb < paper_best - kQbTol;
        if (!improved) ok = c.check(std::abs(eff - exp.num(r, "efficiency")) <= kQbTol) && ok;
        std::string label = label_for(best.word_counts, known);
        c.out.table.rows.push_back({fixed(p.pi1, 1), fixed(p.pi2, 1), fixed4(qm), fixed4(best.qb), fixed4(eff), label, g.source[r],
                                    exp.str(r, "best_qb"), exp.str(r, "efficiency"), exp.str(r, "design"),
                                    ok ? (improved ? "improved" : "ok") : "FAIL"});
    }
    c.out.notes.push_back("restarts " + std::to_string(g.results.front().restarts_used) + ", seed " +
                          std::to_string(c.opts.seed));
}

void balanced_table(Context& c, const std::string& name, int runs, int m) {
    CsvTable exp = c.expected(name);
    c.out.table.header = {"pi1", "pi2", "qb", "paper_qb", "status"};
    int used = 0;
    for (std::size_t r = 0; r < exp.rows.size(); ++r) {
        PriorPair p(exp.num(r, "pi1"), exp.num(r, "pi2"));
        OptimResult res = level_balanced_exchange(runs, m, p, c.search());
        used = res.restarts_used;
        const double paper = exp.num(r, "qb");
        const bool ok = c.check(res.qb <= paper + kQbTol);
        const bool improved = res.qb < paper - kQbTol;
        c.out.table.rows.push_back({fixed(p.pi1, 1), fixed(p.pi2, 1), fixed4(res.qb), exp.str(r, "qb"),
                                    ok ? (improved ? "improved" : "ok") : "FAIL"});
    }
    c.out.notes.push_back("restarts " + std::to_string(used) + ", seed " + std::to_string(c.opts.seed));
}

// --- projection tables -----------------------------------------------------------------

void projection_table(Context& c, const std::string& name, const std::string& grid_name, int runs, int m,
                      const std::string& mink_file, int balanced_restarts) {
    CsvTable exp = c.expected(name);
    const std::vector<PriorPair> grid = priors_of(c.expected(grid_name));
    const Design mink = c.design(mink_file);
    GridSearch g = search_grid(c, runs, m, grid, balanced_restarts);

    c.out.table.header = {"pi1",       "pi2",          "ratio_qb",          "ratio_mink",
                          "n_total",   "avg_as_qb",    "avg_as_mink",       "paper_ratio_qb",
                          "paper_ratio_mink", "paper_n_total", "paper_avg_as_qb", "paper_avg_as_mink", "status"};
    for (std::size_t r = 0; r < exp.rows.size(); ++r) {
        PriorPair p(exp.num(r, "pi1"), exp.num(r, "pi2"));
        auto it = std::find_if(grid.begin(), grid.end(), [&](const PriorPair& q) { return same_prior(p, q); });
        if (it == grid.end()) throw std::runtime_error("projection prior missing from the search grid");
        const Design& qd = g.results[static_cast<std::size_t>(it - grid.begin())].design;
        EvalReport rep = projection_report(qd, mink, p);
        bool ok = c.check(rep.size.total == static_cast<std::uint64_t>(std::llround(exp.num(r, "n_total"))));
        ok = c.check(std::abs(rep.ratio_a - exp.num(r, "ratio_qb")) <= kProjectionTol) && ok;
        ok = c.check(std::abs(rep.ratio_b - exp.num(r, "ratio_mink")) <= kProjectionTol) && ok;
        const double aa = rep.avg_as_a.value_or(std::nan(""));
        const double ab = rep.avg_as_b.value_or(std::nan(""));
        ok = c.check(std::abs(aa - exp.num(r, "avg_as_qb")) <= kProjectionTol) && ok;
        ok = c.check(std::abs(ab - exp.num(r, "avg_as_mink")) <= kProjectionTol) && ok;
        c.out.table.rows.push_back({fixed(p.pi1, 1), fixed(p.pi2, 1), fixed4(rep.ratio_a), fixed4(rep.ratio_b),
                                    std::to_string(rep.size.total), rep.avg_as_a ? fixed4(aa) : "NA",
                                    rep.avg_as_b ? fixed4(ab) : "NA", exp.str(r, "ratio_qb"),
                                    exp.str(r, "ratio_mink"), exp.str(r, "n_total"), exp.str(r, "avg_as_qb"),
                                    exp.str(r, "avg_as_mink"), status(ok)});
    }
}

// --- curves, contours and regions --------------------------------------------------------

void figure1(Context& c) {
    const WordCountPattern mink = word_counts(c.design("table2/mink_centered.txt"));
    CsvTable exp = c.expected("table4");
    std::vector<CurvePoint> curve = qb_curve(mink, 6, {0.2, 0.4, 0.6, 0.8, 1.0}, 0.01);
    c.out.table.header = {"pi1", "pi2", "qb", "paper_qb", "status"};
    for (const CurvePoint& pt : curve) {
        std::string paper, st;
        for (std::size_t r = 0; r < exp.rows.size(); ++r) {
            if (!same_prior({exp.num(r, "pi1"), exp.num(r, "pi2")}, {pt.pi1, pt.pi2})) continue;
            paper = exp.str(r, "MinK");
            st = status(c.check(std::abs(pt.qb - exp.num(r, "MinK")) <= kQbTol));
        }
        c.out.table.rows.push_back({fixed(pt.pi1, 2), fixed(pt.pi2, 2), fixed4(pt.qb), paper, st});
    }
}

void eq51_check(Context& c) {
    auto known = read_word_count_csv(c.path("wordcounts/m6_n12.csv"));
    auto find = [&](const std::string& l) {
        for (const auto& k : known)
            if (k.label == l) return k.word_counts.snapped(12);
        throw std::runtime_error("bundled word counts lack " + l);
    };
    const WordCountPattern d2 = find("D2"), d4 = find("D4");
    c.out.table.header = {"pi1", "c0", "c1", "c2", "scale", "ref_c1", "ref_c2", "max_rel_dev", "status"};
    for (double p1 : {0.1, 0.3, 0.5, 0.7, 0.9}) {
        auto co = contour_polynomial(d2, d4, 6, p1);
        const double ref[3] = {1.0, 3 - 28 * p1, 24 * p1 + 36 * p1 * p1};
        const double k = co[0] / ref[0];
        double dev = 0.0;
        for (int i = 0; i < 3; ++i) dev = std::max(dev, std::abs(co[i] - k * ref[i]) / std::abs(k * ref[i]));
        const bool ok = c.check(k > 0 && dev <= kEq51Tol);
        c.out.table.rows.push_back({fixed(p1, 1), fixed(co[0], 8), fixed(co[1], 8), fixed(co[2], 8), fixed(k, 8),
                                    fixed4(ref[1]), fixed4(ref[2]), fixed(dev, 12), status(ok)});
    }
}

void region_figure(Context& c, const std::string& labels_file, const std::string& table_name, int m) {
    auto designs = read_word_count_csv(c.path(labels_file));
    CsvTable exp = c.expected(table_name);
    RegionMap map = region_map(designs, m, 0.01);
    c.out.table.header = {"pi1", "pi2", "winner", "paper_design", "status"};
    for (const RegionPoint& pt : map.grid) {
        std::string paper, st;
        for (std::size_t r = 0; r < exp.rows.size(); ++r) {
            if (!same_prior({exp.num(r, "pi1"), exp.num(r, "pi2")}, {pt.pi1, pt.pi2})) continue;
            paper = exp.str(r, "design");
            const std::string win = map.winner_label(pt);
            const bool ok = c.check(("|" + win + "|").find("|" + paper + "|") != std::string::npos);
            st = status(ok);
        }
        c.out.table.rows.push_back({fixed(pt.pi1, 2), fixed(pt.pi2, 2), map.winner_label(pt), paper, st});
    }
}

}  // namespace

std::string fixed4(double x) { return fixed(x, 4); }

std::string render(const TextTable& t, Format f) {
    std::ostringstream os;
    if (f == Format::Csv) {
        auto line = [&](const std::vector<std::string>& cells) {
            for (std::size_t i = 0; i < cells.size(); ++i) os << (i ? "," : "") << cells[i];
            os << '\n';
        };
        line(t.header);
        for (const auto& r : t.rows) line(r);
    } else if (f == Format::Json) {
        nlohmann::ordered_json arr = nlohmann::ordered_json::array();
        for (const auto& r : t.rows) {
            nlohmann::ordered_json obj;
            for (std::size_t i = 0; i < t.header.size() && i < r.size(); ++i) obj[t.header[i]] = r[i];
            arr.push_back(std::move(obj));
        }
        os << arr.dump(2) << '\n';
    } else {
        std::vector<std::size_t> width(t.header.size(), 0);
        auto widen = [&](const std::vector<std::string>& cells) {
            for (std::size_t i = 0; i < cells.size() && i < width.size(); ++i) width[i] = std::max(width[i], cells[i].size());
        };
        widen(t.header);
        for (const auto& r : t.rows) widen(r);
        auto line = [&](const std::vector<std::string>& cells) {
            std::string s;
            for (std::size_t i = 0; i < cells.size(); ++i) {
                if (i) s += "  ";
                s += std::string(width[i] - cells[i].size(), ' ') + cells[i];
            }
            os << s << '\n';
        };
        line(t.header);
        for (const auto& r : t.rows) line(r);
    }
    return os.str();
}

const std::vector<std::string>& reproduce_targets() {
    static const std::vector<std::string> targets = {"table3", "table4", "table5",  "table6",  "table7",  "table8",
                                                     "table9", "table10", "figure1", "figure2", "figure3", "eq51_check"};
    return targets;
}

Reproduction reproduce(const std::string& target, const ReproduceOptions& opts) {
    Context c{opts, {}};
    if (target == "table3") {
        table3(c);
    } else if (target == "table4") {
        table4(c);
    } else if (target == "table5") {
        efficiency_table(c, "table5", 12, 6, "table2/mink_centered.txt", "wordcounts/m6_n12.csv", 0);
    } else if (target == "table6") {
        efficiency_table(c, "table6", 16, 9, "table8/mink_m9.txt", "wordcounts/m9_n16.csv", opts.balanced_restarts);
    } else if (target == "table7") {
        projection_table(c, "table7", "table5", 12, 6, "table2/mink_centered.txt", 0);
    } else if (target == "table8") {
        projection_table(c, "table8", "table6", 16, 9, "table8/mink_m9.txt", opts.balanced_restarts);
    } else if (target == "table9") {
        balanced_table(c, "table9", 12, 6);
    } else if (target == "table10") {
        balanced_table(c, "table10", 16, 9);
    } else if (target == "figure1") {
        figure1(c);
    } else if (target == "figure2") {
        region_figure(c, "wordcounts/m6_n12.csv", "table5", 6);
    } else if (target == "figure3") {
        region_figure(c, "wordcounts/m9_n16.csv", "table6", 9);
    } else if (target == "eq51_check") {
        eq51_check(c);
    } else {
        throw std::invalid_argument("unknown reproduce target '" + target + "'");
    }
    return std::move(c.out);
}

}  // namespace qbopt::cli
