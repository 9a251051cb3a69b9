#include "qbopt/design.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

namespace qbopt {

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> parts;
    std::size_t start = 0;
    while (start <= s.size()) {
        const auto pos = s.find(sep, start);
        const auto end = pos == std::string_view::npos ? s.size() : pos;
        parts.push_back(trim(s.substr(start, end - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return parts;
}

int parse_label(std::string_view token) {
    int value = 0;
    const auto* end = token.data() + token.size();
    auto [ptr, ec] = std::from_chars(token.data(), end, value);
    if (ec != std::errc() || ptr != end || value < 1)
        throw DesignError("invalid factor label '" + std::string(token) + "'");
    return value - 1;
}

}  // namespace

Design::Design(int runs, int factors, std::vector<int8_t> entries)
    : runs_(runs), factors_(factors), entries_(std::move(entries)) {
    if (runs < 1 || factors < 1) throw DesignError("design needs at least one run and one factor");
    if (entries_.size() != static_cast<std::size_t>(runs) * factors)
        throw DesignError("design entry count does not match n x m");
    for (auto v : entries_)
        if (v != 1 && v != -1) throw DesignError("design entries must be -1 or +1");
}

Design Design::filled(int runs, int factors, int8_t level) {
    return Design(runs, factors, std::vector<int8_t>(static_cast<std::size_t>(runs) * factors, level));
}

void Design::set(int row, int col, int8_t level) {
    if (level != 1 && level != -1) throw DesignError("design entries must be -1 or +1");
    entries_[index(row, col)] = level;
}

int Design::column_sum(int col) const {
    int s = 0;
    for (int r = 0; r < runs_; ++r) s += (*this)(r, col);
    return s;
}

std::string Design::row_string(int r, Coding coding) const {
    std::string out;
    for (int c = 0; c < factors_; ++c) {
        if (c) out += ' ';
        const int v = (*this)(r, c);
        out += coding == Coding::Centered ? std::to_string(v) : (v > 0 ? "1" : "0");
    }
    return out;
}

ModelSpec::ModelSpec(std::vector<int> mains, std::vector<FactorPair> interactions)
    : mains_(std::move(mains)), interactions_(std::move(interactions)) {
    std::sort(mains_.begin(), mains_.end());
    mains_.erase(std::unique(mains_.begin(), mains_.end()), mains_.end());
    if (!mains_.empty() && mains_.front() < 0) throw DesignError("negative factor index");
    for (auto& [a, b] : interactions_) {
        if (a == b) throw DesignError("interaction needs two distinct factors");
        if (a > b) std::swap(a, b);
        if (!std::binary_search(mains_.begin(), mains_.end(), a) ||
            !std::binary_search(mains_.begin(), mains_.end(), b))
            throw DesignError("interaction " + std::to_string(a + 1) + ":" + std::to_string(b + 1) +
                              " violates strong heredity");
    }
    std::sort(interactions_.begin(), interactions_.end());
    interactions_.erase(std::unique(interactions_.begin(), interactions_.end()), interactions_.end());
}

ModelSpec ModelSpec::full_second_order(int factors) {
    std::vector<int> mains(factors);
    std::vector<FactorPair> ints;
    for (int i = 0; i < factors; ++i) {
        mains[i] = i;
        for (int j = i + 1; j < factors; ++j) ints.emplace_back(i, j);
    }
    return ModelSpec(std::move(mains), std::move(ints));
}

ModelSpec ModelSpec::parse(std::string_view mains, std::string_view interactions) {
    std::vector<int> m;
    std::vector<FactorPair> ints;
    if (!trim(mains).empty())
        for (auto tok : split(mains, ',')) m.push_back(parse_label(tok));
    if (!trim(interactions).empty()) {
        for (auto tok : split(interactions, ',')) {
            const auto colon = tok.find(':');
            if (colon == std::string_view::npos)
                throw DesignError("interaction '" + std::string(tok) + "' must look like i:j");
            ints.emplace_back(parse_label(trim(tok.substr(0, colon))), parse_label(trim(tok.substr(colon + 1))));
        }
    }
    return ModelSpec(std::move(m), std::move(ints));
}

void ModelSpec::validate_for(int factors) const {
    if (max_factor() >= factors)
        throw DesignError("model refers to factor " + std::to_string(max_factor() + 1) + " but the design has " +
                          std::to_string(factors));
}

Design parse_design(std::string_view text, Coding coding) {
    std::vector<int8_t> entries;
    int runs = 0;
    int factors = -1;
    std::size_t line_no = 0;
    for (auto line : split(text, '\n')) {
        ++line_no;
        if (line.empty() || line.front() == '#') continue;
        std::istringstream in{std::string(line)};
        std::string tok;
        int count = 0;
        while (in >> tok) {
            int v = 0;
            auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
            if (ec != std::errc() || ptr != tok.data() + tok.size())
                throw DesignError("line " + std::to_string(line_no) + ": '" + tok + "' is not an integer");
            if (coding == Coding::Centered) {
                if (v != 1 && v != -1)
                    throw DesignError("line " + std::to_string(line_no) + ": entry " + tok +
                                      " outside centered alphabet {-1,1}");
                entries.push_back(static_cast<int8_t>(v));
            } else {
                if (v != 0 && v != 1)
                    throw DesignError("line " + std::to_string(line_no) + ": entry " + tok +
                                      " outside baseline alphabet {0,1}");
                entries.push_back(static_cast<int8_t>(v == 1 ? 1 : -1));
            }
            ++count;
        }
        if (factors < 0) factors = count;
        else if (count != factors)
            throw DesignError("line " + std::to_string(line_no) + ": ragged row (" + std::to_string(count) +
                              " entries, expected " + std::to_string(factors) + ")");
        ++runs;
    }
    if (runs == 0) throw DesignError("empty design");
    return Design(runs, factors, std::move(entries));
}

Design read_design_file(const std::string& path, Coding coding) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read design file '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_design(buf.str(), coding);
}

void write_design(std::ostream& os, const Design& d, Coding coding) {
    for (int r = 0; r < d.runs(); ++r) os << d.row_string(r, coding) << '\n';
}

std::string serialize_design(const Design& d, Coding coding) {
    std::ostringstream os;
    write_design(os, d, coding);
    return os.str();
}

Eigen::MatrixXd model_matrix(const Design& d, const ModelSpec& spec, Coding coding) {
    spec.validate_for(d.factors());
    const int n = d.runs();
    Eigen::MatrixXd x(n, spec.parameter_count());
    auto level = [&](int r, int c) -> double {
        const int v = d(r, c);
        return coding == Coding::Centered ? v : (v > 0 ? 1.0 : 0.0);
    };
    for (int r = 0; r < n; ++r) {
        int col = 0;
        x(r, col++) = 1.0;
        for (int f : spec.mains()) x(r, col++) = level(r, f);
        for (auto [a, b] : spec.interactions()) x(r, col++) = level(r, a) * level(r, b);
    }
    return x;
}

Eigen::MatrixXd second_order_centered(const Design& d) {
    return model_matrix(d, ModelSpec::full_second_order(d.factors()), Coding::Centered);
}

Design full_factorial(int factors) {
    if (factors < 1 || factors > 12) throw DesignError("full factorial needs 1 <= m <= 12");
    const int n = 1 << factors;
    std::vector<int8_t> e(static_cast<std::size_t>(n) * factors);
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < factors; ++c) e[static_cast<std::size_t>(r) * factors + c] = ((r >> c) & 1) ? -1 : 1;
    return Design(n, factors, std::move(e));
}

}  // namespace qbopt
