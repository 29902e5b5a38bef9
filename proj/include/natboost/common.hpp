#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace natboost {

// Base error for anything that goes wrong at runtime. The CLI maps error
// categories onto exit codes, so library code should throw the most specific
// type that applies.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Bad input data: unreadable files, malformed CSV cells, dimension
// mismatches, schema violations.
class DataError : public Error {
public:
    using Error::Error;
};

// Dense column-major matrix of doubles. Rows are examples, columns are
// features; column-major so split scans and scalers walk contiguous memory.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols)
        : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    double& at(std::size_t r, std::size_t c) { return data_[c * rows_ + r]; }
    double at(std::size_t r, std::size_t c) const { return data_[c * rows_ + r]; }

    std::span<double> col(std::size_t c) { return {data_.data() + c * rows_, rows_}; }
    std::span<const double> col(std::size_t c) const {
        return {data_.data() + c * rows_, rows_};
    }

    bool empty() const { return data_.empty(); }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

// One-line warning on stderr, prefixed so it is easy to grep in logs.
void warn(const std::string& message);

}  // namespace natboost
