#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace qbopt::cli {

struct TextTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

enum class Format { Text, Csv, Json };

/// Aligned columns for Text, comma separated for Csv, an array of objects for Json.
std::string render(const TextTable& t, Format f);

/// Fixed four decimals, never "-0.0000".
std::string fixed4(double x);

struct ReproduceOptions {
    std::string data_dir;
    int restarts = 0;  ///< 0 selects the library default
    std::uint64_t seed = 1;
    int balanced_restarts = 2000;
};

struct Reproduction {
    TextTable table;
    int checked = 0;   ///< cells compared against the bundled expected values
    int failures = 0;  ///< cells outside tolerance
    std::vector<std::string> notes;
};

const std::vector<std::string>& reproduce_targets();

/// Throws std::invalid_argument for an unknown target and std::runtime_error for missing data.
Reproduction reproduce(const std::string& target, const ReproduceOptions& opts);

}  // namespace qbopt::cli
