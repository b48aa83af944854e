#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "cbo/error.hpp"

namespace cbo {

using Point = std::vector<double>;

/// Dense row-major matrix. Rows are particles, columns are coordinates.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    static Matrix from_rows(const std::vector<Point>& rows) {
        if (rows.empty()) return {};
        Matrix m(rows.size(), rows.front().size());
        for (std::size_t j = 0; j < rows.size(); ++j) {
            if (rows[j].size() != m.cols_) throw InputError("from_rows: ragged rows");
            std::copy(rows[j].begin(), rows[j].end(), m.row(j).begin());
        }
        return m;
    }

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    bool empty() const noexcept { return data_.empty(); }

    std::span<double> row(std::size_t j) noexcept { return {data_.data() + j * cols_, cols_}; }
    std::span<const double> row(std::size_t j) const noexcept {
        return {data_.data() + j * cols_, cols_};
    }

    double& operator()(std::size_t j, std::size_t k) noexcept { return data_[j * cols_ + k]; }
    double operator()(std::size_t j, std::size_t k) const noexcept { return data_[j * cols_ + k]; }

    std::span<double> data() noexcept { return data_; }
    std::span<const double> data() const noexcept { return data_; }

    /// First `n` rows as a new matrix.
    Matrix head(std::size_t n) const {
        Matrix m(n, cols_);
        std::copy_n(data_.begin(), n * cols_, m.data_.begin());
        return m;
    }

    friend bool operator==(const Matrix&, const Matrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

inline double squared_norm(std::span<const double> v) noexcept {
    double s = 0.0;
    for (double x : v) s += x * x;
    return s;
}

inline double squared_distance(std::span<const double> a, std::span<const double> b) noexcept {
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        const double diff = a[k] - b[k];
        s += diff * diff;
    }
    return s;
}

inline double norm(std::span<const double> v) noexcept { return std::sqrt(squared_norm(v)); }

}  // namespace cbo
