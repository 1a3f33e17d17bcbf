#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

namespace treid {

// Dense column-major matrix of doubles: entry (r, c) lives at r + rows*c.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols)
        : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}
    Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);

    static Matrix identity(std::size_t n);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    double& operator()(std::size_t r, std::size_t c) { return data_[r + rows_ * c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r + rows_ * c]; }

    std::span<const double> data() const { return data_; }
    std::span<double> data() { return data_; }
    std::span<const double> column(std::size_t c) const {
        return std::span<const double>(data_).subspan(rows_ * c, rows_);
    }

    Matrix transposed() const;
    double frobenius() const;

    friend bool operator==(const Matrix&, const Matrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

Matrix operator*(const Matrix& a, const Matrix& b);
Matrix operator+(const Matrix& a, const Matrix& b);
Matrix operator-(const Matrix& a, const Matrix& b);
Matrix operator*(double s, const Matrix& a);

// a^T * b without forming the transpose.
Matrix transpose_times(const Matrix& a, const Matrix& b);
// a * b^T without forming the transpose.
Matrix times_transpose(const Matrix& a, const Matrix& b);

// Mode dimensions (I1, I2, I3) of an order-3 tensor.
using Dims3 = std::array<std::size_t, 3>;

// Dense third-order tensor. Layout contract (frozen, see the file format
// docs): mode-1 index varies fastest, then mode-2, then mode-3, i.e. entry
// (i1, i2, i3) lives at i1 + I1*(i2 + I2*i3).
class Tensor3 {
public:
    Tensor3() = default;
    explicit Tensor3(Dims3 dims)
        : dims_(dims), data_(dims[0] * dims[1] * dims[2], 0.0) {}
    Tensor3(Dims3 dims, std::vector<double> data);

    Dims3 dims() const { return dims_; }
    std::size_t dim(std::size_t mode) const { return dims_[mode - 1]; }
    std::size_t size() const { return data_.size(); }

    double& operator()(std::size_t i1, std::size_t i2, std::size_t i3) {
        return data_[i1 + dims_[0] * (i2 + dims_[1] * i3)];
    }
    double operator()(std::size_t i1, std::size_t i2, std::size_t i3) const {
        return data_[i1 + dims_[0] * (i2 + dims_[1] * i3)];
    }

    std::span<const double> data() const { return data_; }
    std::span<double> data() { return data_; }

    // Mode-3 slice i as an I1 x I2 matrix (a contiguous copy).
    Matrix slice(std::size_t i3) const;
    // Tensor holding the given mode-3 slices, in the given order.
    Tensor3 select_slices(std::span<const std::size_t> indices) const;
    void set_slice(std::size_t i3, const Matrix& m);

    friend bool operator==(const Tensor3&, const Tensor3&) = default;

private:
    Dims3 dims_ = {0, 0, 0};
    std::vector<double> data_;
};

// --- The six basic multidimensional operations ---------------------------
//
// Unfolding column-order contract: for mode k the remaining modes are
// enumerated ascending with the lower-numbered remaining mode varying
// fastest. fold() is the exact inverse under the same contract.

Matrix unfold(const Tensor3& t, int mode);
Tensor3 fold(const Matrix& m, int mode, Dims3 dims);

// t x_k u: replaces I_k with u.rows(); unfold(result, k) == u * unfold(t, k).
Tensor3 mode_product(const Tensor3& t, const Matrix& u, int mode);

// Tensor-to-tensor projection t x_1 u1^T x_2 u2^T. Mode 3 (samples) is
// never projected.
Tensor3 project(const Tensor3& t, const Matrix& u1, const Matrix& u2);

std::vector<double> vectorize(const Tensor3& t);
double frobenius(const Tensor3& t);
double inner(const Tensor3& a, const Tensor3& b);

}  // namespace treid
