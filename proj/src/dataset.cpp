#include "natboost/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <numeric>
#include <optional>
#include <sstream>

#include "natboost/kernels.hpp"
#include "natboost/rng.hpp"

namespace natboost {
namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() &&
           (s.back() == ' ' || s.back() == '\t' || s.back() == '\r' || s.back() == '\n'))
        s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split_line(std::string_view line) {
    std::vector<std::string_view> cells;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            cells.push_back(trim(line.substr(start)));
            break;
        }
        cells.push_back(trim(line.substr(start, comma - start)));
        start = comma + 1;
    }
    return cells;
}

// Parses a cell as double. Returns nullopt when the text is not a number at
// all; finite-ness is the caller's concern.
std::optional<double> parse_cell(std::string_view cell) {
    if (cell.empty()) return std::nullopt;
    double value = 0.0;
    const char* begin = cell.data();
    const char* end = begin + cell.size();
    const auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ptr != end) return std::nullopt;
    if (ec == std::errc::result_out_of_range)
        return std::numeric_limits<double>::infinity();
    if (ec != std::errc()) return std::nullopt;
    return value;
}

std::optional<std::size_t> parse_index(std::string_view text) {
    std::size_t value = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || ptr != text.data() + text.size()) return std::nullopt;
    return value;
}

struct RawTable {
    std::vector<std::string> column_names;  // synthesized when no header
    std::vector<std::vector<double>> rows;
    std::size_t dropped_rows = 0;
};

RawTable read_table(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open file: " + path);

    RawTable table;
    std::string line;
    std::size_t line_no = 0;
    std::size_t n_cols = 0;
    bool saw_first = false;

    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto cells = split_line(line);

        if (!saw_first) {
            saw_first = true;
            n_cols = cells.size();
            const bool all_numeric = std::all_of(
                cells.begin(), cells.end(),
                [](std::string_view c) { return parse_cell(c).has_value(); });
            if (!all_numeric) {
                for (const auto cell : cells) table.column_names.emplace_back(cell);
                continue;  // header row
            }
            for (std::size_t c = 0; c < n_cols; ++c)
                table.column_names.push_back("col" + std::to_string(c));
            // fall through: the first line is data
        }

        if (cells.size() != n_cols)
            throw DataError(path + ": line " + std::to_string(line_no) + " has " +
                            std::to_string(cells.size()) + " cells, expected " +
                            std::to_string(n_cols));

        std::vector<double> row(n_cols);
        bool finite = true;
        for (std::size_t c = 0; c < n_cols; ++c) {
            const auto value = parse_cell(cells[c]);
            if (!value)
                throw DataError(path + ": line " + std::to_string(line_no) +
                                ", column " + std::to_string(c) + " (" +
                                table.column_names[c] + "): cannot parse '" +
                                std::string(cells[c]) + "' as a number");
            if (!std::isfinite(*value)) finite = false;
            row[c] = *value;
        }
        if (!finite) {
            ++table.dropped_rows;
            continue;
        }
        table.rows.push_back(std::move(row));
    }
    if (table.dropped_rows > 0)
        warn(path + ": dropped " + std::to_string(table.dropped_rows) +
             " row(s) with non-finite values");
    if (!saw_first) throw DataError(path + ": file is empty");
    return table;
}

std::size_t resolve_target_column(const RawTable& table, const std::string& target,
                                  const std::string& path) {
    const auto by_name =
        std::find(table.column_names.begin(), table.column_names.end(), target);
    if (by_name != table.column_names.end())
        return static_cast<std::size_t>(by_name - table.column_names.begin());
    if (const auto index = parse_index(target)) {
        if (*index >= table.column_names.size())
            throw DataError(path + ": target column index " + target +
                            " out of range (file has " +
                            std::to_string(table.column_names.size()) + " columns)");
        return *index;
    }
    throw DataError(path + ": target column '" + target + "' not found");
}

}  // namespace

Dataset Dataset::subset(std::span<const std::size_t> rows) const {
    Dataset out;
    out.feature_names = feature_names;
    out.features = Matrix(rows.size(), n_features());
    out.targets.resize(rows.size());
    for (std::size_t c = 0; c < n_features(); ++c) {
        const auto src = features.col(c);
        auto dst = out.features.col(c);
        for (std::size_t i = 0; i < rows.size(); ++i) dst[i] = src[rows[i]];
    }
    for (std::size_t i = 0; i < rows.size(); ++i) out.targets[i] = targets[rows[i]];
    return out;
}

ScalerStats ScalerStats::identity(std::size_t n_features) {
    ScalerStats stats;
    stats.feature_means.assign(n_features, 0.0);
    stats.feature_stds.assign(n_features, 1.0);
    return stats;
}

Dataset load_csv(const std::string& path, const std::string& target) {
    RawTable table = read_table(path);
    const std::size_t target_col = resolve_target_column(table, target, path);
    if (table.column_names.size() < 2)
        throw DataError(path + ": need at least one feature column besides the target");
    if (table.rows.size() < 2)
        throw DataError(path + ": need at least 2 data rows, got " +
                        std::to_string(table.rows.size()));

    const std::size_t n = table.rows.size();
    const std::size_t d = table.column_names.size() - 1;

    Dataset ds;
    ds.features = Matrix(n, d);
    ds.targets.resize(n);
    for (std::size_t c = 0, f = 0; c < table.column_names.size(); ++c) {
        if (c == target_col) continue;
        ds.feature_names.push_back(table.column_names[c]);
        auto col = ds.features.col(f++);
        for (std::size_t r = 0; r < n; ++r) col[r] = table.rows[r][c];
    }
    for (std::size_t r = 0; r < n; ++r) ds.targets[r] = table.rows[r][target_col];
    return ds;
}

FeatureTable load_feature_csv(const std::string& path) {
    RawTable table = read_table(path);
    if (table.rows.empty()) throw DataError(path + ": no data rows");
    const std::size_t n = table.rows.size();
    const std::size_t d = table.column_names.size();
    FeatureTable out;
    out.feature_names = table.column_names;
    out.features = Matrix(n, d);
    for (std::size_t c = 0; c < d; ++c) {
        auto col = out.features.col(c);
        for (std::size_t r = 0; r < n; ++r) col[r] = table.rows[r][c];
    }
    return out;
}

namespace {

// Mean + population std over the gathered values; constant columns pass
// through as exact zeros after standardization.
std::pair<double, double> column_stats(std::span<const double> values) {
    const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    if (*lo == *hi) return {*lo, 1.0};
    const auto& k = kernels::active();
    const double mean = k.sum(values.data(), values.size()) /
                        static_cast<double>(values.size());
    const double var = k.sum_sq_dev(values.data(), values.size(), mean) /
                       static_cast<double>(values.size());
    const double sd = std::sqrt(var);
    return {mean, sd > 0.0 ? sd : 1.0};
}

}  // namespace

ScalerStats fit_scaler(const Dataset& ds, std::span<const std::size_t> train_rows) {
    if (train_rows.empty()) throw DataError("fit_scaler: empty training index list");
    for (const auto r : train_rows)
        if (r >= ds.n_rows())
            throw DataError("fit_scaler: row index " + std::to_string(r) +
                            " out of bounds");

    std::vector<double> gathered(train_rows.size());
    ScalerStats stats;
    for (std::size_t c = 0; c < ds.n_features(); ++c) {
        const auto col = ds.features.col(c);
        for (std::size_t i = 0; i < train_rows.size(); ++i)
            gathered[i] = col[train_rows[i]];
        const auto [mean, sd] = column_stats(gathered);
        stats.feature_means.push_back(mean);
        stats.feature_stds.push_back(sd);
    }
    for (std::size_t i = 0; i < train_rows.size(); ++i)
        gathered[i] = ds.targets[train_rows[i]];
    std::tie(stats.target_mean, stats.target_std) = column_stats(gathered);
    return stats;
}

Matrix standardize_features(const Matrix& features, const ScalerStats& stats) {
    if (features.cols() != stats.feature_means.size())
        throw DataError("standardize: feature count mismatch (expected " +
                        std::to_string(stats.feature_means.size()) + ", found " +
                        std::to_string(features.cols()) + ")");
    Matrix out(features.rows(), features.cols());
    for (std::size_t c = 0; c < features.cols(); ++c) {
        const auto src = features.col(c);
        auto dst = out.col(c);
        const double m = stats.feature_means[c];
        const double inv = 1.0 / stats.feature_stds[c];
        for (std::size_t r = 0; r < features.rows(); ++r) dst[r] = (src[r] - m) * inv;
    }
    return out;
}

Dataset apply_scaler(const Dataset& ds, const ScalerStats& stats) {
    Dataset out;
    out.feature_names = ds.feature_names;
    out.features = standardize_features(ds.features, stats);
    out.targets.resize(ds.n_rows());
    const double inv = 1.0 / stats.target_std;
    for (std::size_t r = 0; r < ds.n_rows(); ++r)
        out.targets[r] = (ds.targets[r] - stats.target_mean) * inv;
    return out;
}

SplitIndices split(const Dataset& ds, const SplitSpec& spec) {
    if (!(spec.test_fraction > 0.0 && spec.test_fraction < 1.0))
        throw DataError("split: test_fraction must be in (0,1)");
    if (!(spec.validation_fraction > 0.0 && spec.validation_fraction < 1.0))
        throw DataError("split: validation_fraction must be in (0,1)");

    const std::size_t n = ds.n_rows();
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    Rng rng(spec.seed);
    shuffle(perm, rng);

    const auto round_half_up = [](double x) {
        return static_cast<std::size_t>(std::floor(x + 0.5));
    };
    const std::size_t n_test = round_half_up(static_cast<double>(n) * spec.test_fraction);
    const std::size_t remainder = n - n_test;
    const std::size_t n_val =
        round_half_up(static_cast<double>(remainder) * spec.validation_fraction);
    const std::size_t n_train = remainder - n_val;
    if (n_test == 0 || n_val == 0 || n_train == 0 || n_test >= n || n_val >= remainder)
        throw DataError("split: a partition would be empty (N=" + std::to_string(n) +
                        ")");

    SplitIndices out;
    out.test.assign(perm.begin(), perm.begin() + n_test);
    out.validation.assign(perm.begin() + n_test, perm.begin() + n_test + n_val);
    out.train.assign(perm.begin() + n_test + n_val, perm.end());
    std::sort(out.test.begin(), out.test.end());
    std::sort(out.validation.begin(), out.validation.end());
    std::sort(out.train.begin(), out.train.end());
    return out;
}

}  // namespace natboost
