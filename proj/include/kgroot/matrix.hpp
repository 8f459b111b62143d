#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace kgroot {

// Dense row-major matrix of doubles.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
    Matrix(std::initializer_list<std::initializer_list<double>> rows);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    std::size_t size() const noexcept { return data_.size(); }
    bool empty() const noexcept { return data_.empty(); }

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
    std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

    std::span<double> values() noexcept { return data_; }
    std::span<const double> values() const noexcept { return data_; }

    void fill(double v);

    bool operator==(const Matrix&) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

// out += a * b
void matmul_acc(const Matrix& a, const Matrix& b, Matrix& out);
// out += a^T * b
void matmul_tn_acc(const Matrix& a, const Matrix& b, Matrix& out);
// out += a * b^T
void matmul_nt_acc(const Matrix& a, const Matrix& b, Matrix& out);

// y += x * w for a single row vector x (length w.rows()).
void vecmat_acc(std::span<const double> x, const Matrix& w, std::span<double> y);

}  // namespace kgroot
