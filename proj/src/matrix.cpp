#include "kgroot/matrix.hpp"

#include <algorithm>

#include "kgroot/error.hpp"
#include "kgroot/simd.hpp"

namespace kgroot {

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows) {
    rows_ = rows.size();
    cols_ = rows_ == 0 ? 0 : rows.begin()->size();
    data_.reserve(rows_ * cols_);
    for (const auto& r : rows) {
        if (r.size() != cols_) throw ShapeMismatch("Matrix: ragged initializer");
        data_.insert(data_.end(), r.begin(), r.end());
    }
}

void Matrix::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

void matmul_acc(const Matrix& a, const Matrix& b, Matrix& out) {
    if (a.cols() != b.rows() || out.rows() != a.rows() || out.cols() != b.cols()) {
        throw ShapeMismatch("matmul_acc: incompatible shapes");
    }
    const auto& k = simd::kernels(simd::active_isa());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        double* dst = out.row(i).data();
        for (std::size_t p = 0; p < a.cols(); ++p) {
            const double s = a(i, p);
            if (s != 0.0) k.axpy(s, b.row(p).data(), dst, b.cols());
        }
    }
}

void matmul_tn_acc(const Matrix& a, const Matrix& b, Matrix& out) {
    if (a.rows() != b.rows() || out.rows() != a.cols() || out.cols() != b.cols()) {
        throw ShapeMismatch("matmul_tn_acc: incompatible shapes");
    }
    const auto& k = simd::kernels(simd::active_isa());
    for (std::size_t r = 0; r < a.rows(); ++r) {
        const double* src = b.row(r).data();
        for (std::size_t i = 0; i < a.cols(); ++i) {
            const double s = a(r, i);
            if (s != 0.0) k.axpy(s, src, out.row(i).data(), b.cols());
        }
    }
}

void matmul_nt_acc(const Matrix& a, const Matrix& b, Matrix& out) {
    if (a.cols() != b.cols() || out.rows() != a.rows() || out.cols() != b.rows()) {
        throw ShapeMismatch("matmul_nt_acc: incompatible shapes");
    }
    const auto& k = simd::kernels(simd::active_isa());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t j = 0; j < b.rows(); ++j) {
            out(i, j) += k.dot(a.row(i).data(), b.row(j).data(), a.cols());
        }
    }
}

void vecmat_acc(std::span<const double> x, const Matrix& w, std::span<double> y) {
    if (x.size() != w.rows() || y.size() != w.cols()) {
        throw ShapeMismatch("vecmat_acc: incompatible shapes");
    }
    const auto& k = simd::kernels(simd::active_isa());
    for (std::size_t p = 0; p < x.size(); ++p) {
        if (x[p] != 0.0) k.axpy(x[p], w.row(p).data(), y.data(), y.size());
    }
}

}  // namespace kgroot
