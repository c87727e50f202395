#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace loras {

/// Dense row-major matrix of doubles. Rows are handed out as spans.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
    Matrix(std::initializer_list<std::initializer_list<double>> init);

    static Matrix from_rows(const std::vector<std::vector<double>>& rows);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    bool empty() const noexcept { return rows_ == 0; }

    double& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * cols_ + c]; }

    std::span<double> row(std::size_t r) noexcept { return {data_.data() + r * cols_, cols_}; }
    std::span<const double> row(std::size_t r) const noexcept {
        return {data_.data() + r * cols_, cols_};
    }

    std::span<const double> values() const noexcept { return data_; }
    std::span<double> values() noexcept { return data_; }

    void append_row(std::span<const double> values);
    /// Gathers the listed rows into a new matrix, in list order.
    Matrix select_rows(std::span<const std::size_t> idx) const;

    bool operator==(const Matrix&) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

/// Stacks b under a; column counts must agree (an empty operand is ignored).
Matrix vstack(const Matrix& a, const Matrix& b);

}  // namespace loras
