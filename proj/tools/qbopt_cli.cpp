// qbopt: command-line front end for the Q_B design library.
//
// Exit status: 0 success, 1 invalid input, 2 numerical failure or a
// reproduced value outside its tolerance.

#include "reproduce.hpp"

#include "qbopt/baseline_link.hpp"
#include "qbopt/criteria.hpp"
#include "qbopt/design.hpp"
#include "qbopt/evaluate.hpp"
#include "qbopt/optimize.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <stdexcept>

#ifndef QBOPT_DATA_DIR
#define QBOPT_DATA_DIR "data"
#endif

namespace fs = std::filesystem;
using namespace qbopt;
using cli::fixed4;
using cli::Format;
using cli::TextTable;
using json = nlohmann::ordered_json;

namespace {

// Numerical failures map to exit status 2.
struct NumericalFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

const std::map<std::string, Coding> kCodings = {{"centered", Coding::Centered}, {"baseline", Coding::Baseline}};
const std::map<std::string, Format> kFormats = {{"text", Format::Text}, {"csv", Format::Csv}, {"json", Format::Json}};

std::vector<double> parse_list(const std::string& text) {
    std::vector<double> out;
    std::stringstream in(text);
    std::string cell;
    while (std::getline(in, cell, ',')) {
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(cell, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || used != cell.size()) throw std::invalid_argument("bad number '" + cell + "' in list");
        out.push_back(v);
    }
    if (out.empty()) throw std::invalid_argument("empty list");
    return out;
}

PriorPair prior(double pi1, double pi2) { return PriorPair(pi1, pi2); }

void emit(const std::string& text, const std::string& out_path) {
    if (out_path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream os(out_path, std::ios::binary);
    if (!os) throw std::invalid_argument("cannot write '" + out_path + "'");
    os << text;
}

json word_count_json(const WordCountPattern& wc) {
    return json::array({wc.b[0], wc.b[1], wc.b[2], wc.b[3]});
}

json result_json(const OptimResult& r) {
    json rows = json::array();
    for (int i = 0; i < r.design.runs(); ++i) rows.push_back(r.design.row_string(i));
    return json{{"pi1", r.prior.pi1},        {"pi2", r.prior.pi2}, {"qb", r.qb},
                {"word_counts", word_count_json(r.word_counts)}, {"design", rows},
                {"seed", r.seed},            {"restarts_used", r.restarts_used}};
}

// Design files in a directory (label = file stem) plus any word-count CSVs.
std::vector<LabeledPattern> load_patterns(const std::string& path, Coding coding, int& factors) {
    std::vector<LabeledPattern> out;
    auto add_csv = [&](const fs::path& p) {
        for (auto& lp : read_word_count_csv(p.string())) out.push_back(std::move(lp));
    };
    if (fs::is_directory(path)) {
        std::vector<fs::path> files;
        for (const auto& e : fs::directory_iterator(path))
            if (e.is_regular_file()) files.push_back(e.path());
        std::sort(files.begin(), files.end());
        for (const auto& f : files) {
            if (f.extension() == ".csv") {
                add_csv(f);
            } else if (f.extension() == ".txt") {
                Design d = read_design_file(f.string(), coding);
                if (factors == 0) factors = d.factors();
                if (d.factors() != factors) throw DesignError("designs in " + path + " differ in factor count");
                out.push_back({f.stem().string(), word_counts(d)});
            }
        }
    } else if (fs::exists(path)) {
        add_csv(path);
    } else {
        throw std::invalid_argument("no such file or directory '" + path + "'");
    }
    if (out.empty()) throw std::invalid_argument("no designs found in '" + path + "'");
    if (factors == 0) throw std::invalid_argument("--m is required when only word-count tables are given");
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Q_B-optimal two-level factorial designs under the baseline parameterization"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all", "Show help for every subcommand");

    std::string coding_name = "centered";
    std::string format_name = "text";
    std::string out_path;
    auto add_coding = [&](CLI::App* s) {
        s->add_option("--coding", coding_name, "Level coding of input designs")
            ->check(CLI::IsMember({"centered", "baseline"}));
    };
    auto add_format = [&](CLI::App* s) {
        s->add_option("--format", format_name, "Output format")->check(CLI::IsMember({"text", "csv", "json"}));
    };

    // assoc
    auto* assoc = app.add_subcommand("assoc", "Print the association matrix A_m");
    int assoc_m = 2;
    int assoc_order = -1;
    bool assoc_verify = false;
    assoc->add_option("--m", assoc_m, "Number of factors (0..10)")->required();
    assoc->add_option("--max-order", assoc_order, "Keep effects of at most this order");
    assoc->add_flag("--verify", assoc_verify, "Also check X_b A_m = X_c exactly");

    // wordcounts
    auto* wcmd = app.add_subcommand("wordcounts", "Generalized word counts b_1(1)..b_k(k)");
    std::string wc_design;
    int wc_order = 4;
    wcmd->add_option("design", wc_design, "Design file")->required();
    wcmd->add_option("--max-order", wc_order, "Highest order reported")->check(CLI::PositiveNumber);
    add_coding(wcmd);
    add_format(wcmd);

    // qb
    auto* qb = app.add_subcommand("qb", "Q_B of a design at one prior");
    std::string qb_design;
    double qb_pi1 = 0.0, qb_pi2 = 0.0;
    bool qb_full = false, qb_direct_flag = false;
    qb->add_option("design", qb_design, "Design file")->required();
    qb->add_option("--pi1", qb_pi1, "Main-effect prior")->required();
    qb->add_option("--pi2", qb_pi2, "Interaction prior")->required();
    qb->add_flag("--full-scale", qb_full, "Report the full criterion instead of the tabulated quarter scale");
    qb->add_flag("--direct", qb_direct_flag, "Also print the direct information-matrix sum");
    add_coding(qb);

    // as-exact / as-approx
    std::string as_design, as_mains, as_ints;
    auto add_model = [&](CLI::App* s) {
        s->add_option("design", as_design, "Design file")->required();
        s->add_option("--mains", as_mains, "Main effects, e.g. 1,2,3 (default: all)");
        s->add_option("--interactions", as_ints, "Interactions, e.g. 1:2,2:3 (default: all pairs)");
        add_coding(s);
    };
    auto* as_exact = app.add_subcommand("as-exact", "Exact baseline A_s of a model");
    add_model(as_exact);
    auto* as_approx = app.add_subcommand("as-approx", "Approximate baseline A_s of a model");
    add_model(as_approx);

    // optimize
    auto* opt = app.add_subcommand("optimize", "Search for Q_B-optimal designs over a prior grid");
    int opt_n = 0, opt_m = 0, opt_restarts = 0;
    std::uint64_t opt_seed = 1;
    std::string opt_g1, opt_g2;
    bool opt_balanced = false;
    opt->add_option("--n", opt_n, "Runs")->required()->check(CLI::PositiveNumber);
    opt->add_option("--m", opt_m, "Factors")->required()->check(CLI::Range(2, 30));
    opt->add_option("--pi1-grid", opt_g1, "Comma separated pi1 values")->required();
    opt->add_option("--pi2-grid", opt_g2, "Comma separated pi2 values")->required();
    opt->add_flag("--level-balanced", opt_balanced, "Restrict to level-balanced designs");
    opt->add_option("--restarts", opt_restarts, "Random starts per prior (default by problem size)")
        ->check(CLI::NonNegativeNumber);
    opt->add_option("--seed", opt_seed, "Seed recorded in the output");
    opt->add_option("--out", out_path, "Write the JSON results here instead of stdout");

    // hadamard-search
    auto* had = app.add_subcommand("hadamard-search", "Distinct word-count sequences over Hadamard column subsets");
    std::string had_file;
    int had_k = 0;
    had->add_option("matrix", had_file, "Hadamard matrix file (-1/+1)")->required();
    had->add_option("--k", had_k, "Columns per subset")->required()->check(CLI::PositiveNumber);
    add_format(had);

    // evaluate
    auto* ev = app.add_subcommand("evaluate", "Projection report of design A against design B");
    std::string ev_a, ev_b;
    double ev_pi1 = 0.0, ev_pi2 = 0.0;
    ev->add_option("--design-a", ev_a, "First design (reported as A)")->required();
    ev->add_option("--design-b", ev_b, "Second design (reported as B)")->required();
    ev->add_option("--pi1", ev_pi1)->required();
    ev->add_option("--pi2", ev_pi2)->required();
    ev->add_option("--out", out_path, "Also write the report as JSON here");
    add_coding(ev);
    add_format(ev);

    // regions
    auto* reg = app.add_subcommand("regions", "Optimal design over a grid of priors");
    std::string reg_designs;
    int reg_m = 0;
    double reg_step = 0.01;
    reg->add_option("--designs", reg_designs, "Directory of design files (*.txt) and word-count tables (*.csv), or one table")
        ->required();
    reg->add_option("--m", reg_m, "Factors (taken from the designs when omitted)");
    reg->add_option("--step", reg_step, "Grid step in (0, 0.1]");
    reg->add_option("--out", out_path, "Write CSV here instead of stdout");
    add_coding(reg);

    // contour
    auto* con = app.add_subcommand("contour", "Values of pi2 where two designs tie in Q_B");
    std::string con_a, con_b;
    double con_pi1 = 0.0;
    con->add_option("--a", con_a, "First design file")->required();
    con->add_option("--b", con_b, "Second design file")->required();
    con->add_option("--pi1", con_pi1, "Main-effect prior in (0, 1]")->required();
    add_coding(con);

    // curve
    auto* cur = app.add_subcommand("curve", "Q_B along pi2 for several pi1");
    std::string cur_design, cur_list = "0.2,0.4,0.6,0.8,1";
    double cur_step = 0.01;
    cur->add_option("--design", cur_design, "Design file")->required();
    cur->add_option("--pi1-list", cur_list, "Comma separated pi1 values");
    cur->add_option("--step", cur_step, "pi2 step");
    cur->add_option("--out", out_path, "Write CSV here instead of stdout");
    add_coding(cur);

    // reproduce
    auto* rep = app.add_subcommand("reproduce", "Recompute a published table and compare with bundled values");
    std::string rep_target;
    cli::ReproduceOptions rep_opts;
    rep_opts.data_dir = QBOPT_DATA_DIR;
    std::string rep_format = "csv";
    rep->add_option("target", rep_target, "Table or figure id")->required()->check(CLI::IsMember(cli::reproduce_targets()));
    rep->add_option("--restarts", rep_opts.restarts, "Random starts per prior for optimizer tables")
        ->check(CLI::NonNegativeNumber);
    rep->add_option("--seed", rep_opts.seed, "Seed for optimizer tables");
    rep->add_option("--balanced-restarts", rep_opts.balanced_restarts,
                    "Level-balanced starts per prior used alongside exchange for 16-run tables (0 disables)")
        ->check(CLI::NonNegativeNumber);
    rep->add_option("--data-dir", rep_opts.data_dir, "Bundled data directory");
    rep->add_option("--format", rep_format, "Output format")->check(CLI::IsMember({"text", "csv", "json"}));
    rep->add_option("--out", out_path, "Write the table here instead of stdout");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        const Coding coding = kCodings.at(coding_name);
        const Format format = kFormats.at(format_name);
        auto model_for = [&](const Design& d) {
            if (as_mains.empty() && as_ints.empty()) return ModelSpec::full_second_order(d.factors());
            ModelSpec s = ModelSpec::parse(as_mains, as_ints);
            s.validate_for(d.factors());
            return s;
        };

        if (*assoc) {
            AssociationMatrix a(assoc_m);
            IntMatrix mat = assoc_order >= 0 ? a.truncate(assoc_order) : a.matrix();
            std::ostringstream os;
            for (Eigen::Index r = 0; r < mat.rows(); ++r) {
                for (Eigen::Index c = 0; c < mat.cols(); ++c) os << (c ? " " : "") << mat(r, c);
                os << '\n';
            }
            std::cout << os.str();
            if (assoc_verify) {
                const bool ok = verify_link(assoc_m);
                std::cout << "verify_link " << (ok ? "true" : "false") << '\n';
                if (!ok) return 2;
            }
        } else if (*wcmd) {
            Design d = read_design_file(wc_design, coding);
            std::vector<double> b = generalized_word_counts(d, wc_order);
            TextTable t{{"order", "b"}, {}};
            for (std::size_t i = 0; i < b.size(); ++i) t.rows.push_back({std::to_string(i + 1), fixed4(b[i])});
            std::cout << cli::render(t, format);
        } else if (*qb) {
            Design d = read_design_file(qb_design, coding);
            PriorPair p = prior(qb_pi1, qb_pi2);
            std::cout << fixed4(qb_closed(word_counts(d), d.factors(), p, qb_full ? QbScale::Full : QbScale::Quarter))
                      << '\n';
            if (qb_direct_flag) std::cout << "direct " << fixed4(qb_direct(d, p)) << '\n';
        } else if (*as_exact) {
            Design d = read_design_file(as_design, coding);
            auto v = as_exact_baseline(d, model_for(d));
            std::cout << (v ? fixed4(*v) : std::string("singular")) << '\n';
        } else if (*as_approx) {
            Design d = read_design_file(as_design, coding);
            std::cout << fixed4(as_approx_baseline(d, model_for(d))) << '\n';
        } else if (*opt) {
            std::vector<PriorPair> priors;
            for (double a : parse_list(opt_g1))
                for (double b : parse_list(opt_g2)) priors.push_back(prior(a, b));
            SearchOptions so{opt_restarts, opt_seed};
            json doc{{"runs", opt_n}, {"factors", opt_m}, {"level_balanced", opt_balanced}, {"seed", opt_seed}};
            json results = json::array();
            if (opt_balanced) {
                for (const auto& p : priors) results.push_back(result_json(level_balanced_exchange(opt_n, opt_m, p, so)));
            } else {
                ExtendedResult ext = extended_exchange(opt_n, opt_m, priors, so);
                if (ext.round_cap_reached) std::cerr << "warning: reconciliation stopped at the round cap\n";
                doc["rounds"] = ext.rounds;
                for (const auto& r : ext.results) results.push_back(result_json(r));
            }
            doc["results"] = std::move(results);
            emit(doc.dump(2) + "\n", out_path);
            if (!out_path.empty()) {
                TextTable t{{"pi1", "pi2", "qb"}, {}};
                for (const auto& r : doc["results"])
                    t.rows.push_back({fixed4(r["pi1"].get<double>()), fixed4(r["pi2"].get<double>()),
                                      fixed4(r["qb"].get<double>())});
                std::cout << cli::render(t, Format::Text);
            }
        } else if (*had) {
            Design h = read_design_file(had_file, Coding::Centered);
            std::vector<ColumnSubsetPattern> pats;
            try {
                pats = hadamard_subset_search(h, had_k);
            } catch (const HadamardError& e) {
                throw NumericalFailure(e.what());
            }
            TextTable t{{"pattern", "b1", "b2", "b3", "b4", "sequence", "multiplicity", "columns"}, {}};
            for (std::size_t i = 0; i < pats.size(); ++i) {
                std::string seq, cols;
                for (std::size_t j = 0; j < pats[i].full_sequence.size(); ++j)
                    seq += (j ? " " : "") + fixed4(pats[i].full_sequence[j]);
                for (std::size_t j = 0; j < pats[i].columns.size(); ++j)
                    cols += (j ? " " : "") + std::to_string(pats[i].columns[j] + 1);
                const auto& w = pats[i].word_counts;
                t.rows.push_back({std::to_string(i + 1), fixed4(w[1]), fixed4(w[2]), fixed4(w[3]), fixed4(w[4]), seq,
                                  std::to_string(pats[i].multiplicity), cols});
            }
            std::cout << cli::render(t, format);
        } else if (*ev) {
            Design a = read_design_file(ev_a, coding);
            Design b = read_design_file(ev_b, coding);
            EvalReport r = projection_report(a, b, prior(ev_pi1, ev_pi2));
            auto opt_num = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
            json doc{{"pi1", r.prior.pi1},
                     {"pi2", r.prior.pi2},
                     {"M", r.size.mains},
                     {"N_I", r.size.interactions},
                     {"n_T", r.size.total},
                     {"estimable_a", r.estimable_a},
                     {"estimable_b", r.estimable_b},
                     {"estimable_both", r.estimable_both},
                     {"ratio_a", r.ratio_a},
                     {"ratio_b", r.ratio_b},
                     {"avg_as_a", opt_num(r.avg_as_a)},
                     {"avg_as_b", opt_num(r.avg_as_b)},
                     {"exceeds_runs", r.exceeds_runs}};
            if (!out_path.empty()) emit(doc.dump(2) + "\n", out_path);
            if (format == Format::Json) {
                std::cout << doc.dump(2) << '\n';
            } else {
                auto na = [](const std::optional<double>& v) { return v ? fixed4(*v) : std::string("NA"); };
                TextTable t{{"pi1", "pi2", "M", "N_I", "n_T", "ratio_a", "ratio_b", "n_both", "avg_as_a", "avg_as_b"},
                            {{fixed4(r.prior.pi1), fixed4(r.prior.pi2), std::to_string(r.size.mains),
                              std::to_string(r.size.interactions), std::to_string(r.size.total), fixed4(r.ratio_a),
                              fixed4(r.ratio_b), std::to_string(r.estimable_both), na(r.avg_as_a), na(r.avg_as_b)}}};
                std::cout << cli::render(t, format);
                if (r.exceeds_runs) std::cerr << "note: the expected model has more parameters than runs\n";
            }
        } else if (*reg) {
            int m = reg_m;
            auto designs = load_patterns(reg_designs, coding, m);
            RegionMap map = region_map(designs, m, reg_step);
            TextTable t{{"pi1", "pi2", "winner"}, {}};
            for (const auto& pt : map.grid) t.rows.push_back({fixed4(pt.pi1), fixed4(pt.pi2), map.winner_label(pt)});
            emit(cli::render(t, Format::Csv), out_path);
        } else if (*con) {
            Design a = read_design_file(con_a, coding);
            Design b = read_design_file(con_b, coding);
            if (a.factors() != b.factors()) throw DesignError("designs differ in factor count");
            Contour c = pairwise_contour(word_counts(a), word_counts(b), a.factors(), con_pi1);
            std::cout << "coefficients " << c.coefficients[0] << ' ' << c.coefficients[1] << ' ' << c.coefficients[2]
                      << '\n';
            if (c.kind == Contour::Kind::EqualEverywhere) {
                std::cout << "degenerate: equal everywhere\n";
            } else if (c.kind == Contour::Kind::NeverEqual) {
                std::cout << "degenerate: never equal\n";
            } else if (c.roots.empty()) {
                std::cout << "no roots in [0, 1]\n";
            } else {
                for (double r : c.roots) std::cout << "pi2 " << fixed4(r) << '\n';
            }
        } else if (*cur) {
            Design d = read_design_file(cur_design, coding);
            auto pts = qb_curve(word_counts(d), d.factors(), parse_list(cur_list), cur_step);
            TextTable t{{"pi1", "pi2", "qb"}, {}};
            for (const auto& pt : pts) t.rows.push_back({fixed4(pt.pi1), fixed4(pt.pi2), fixed4(pt.qb)});
            emit(cli::render(t, Format::Csv), out_path);
        } else if (*rep) {
            cli::Reproduction r = cli::reproduce(rep_target, rep_opts);
            emit(cli::render(r.table, kFormats.at(rep_format)), out_path);
            for (const auto& n : r.notes) std::cerr << n << '\n';
            std::cerr << rep_target << ": " << r.checked - r.failures << " of " << r.checked
                      << " cells within tolerance\n";
            if (r.failures > 0) return 2;
        }
    } catch (const NumericalFailure& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::length_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::invalid_argument& e) {  // includes DesignError
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::runtime_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
