#include "treid/tensor.hpp"

#include <cmath>
#include <string>

#include "treid/error.hpp"

namespace treid {

namespace {

void check_mode(int mode) {
    if (mode < 1 || mode > 3) {
        throw ArgumentError("mode index must be 1, 2 or 3, got " + std::to_string(mode));
    }
}

}  // namespace

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != rows_ * cols_) {
        throw ArgumentError("matrix data length " + std::to_string(data_.size()) +
                            " does not match " + std::to_string(rows_) + "x" +
                            std::to_string(cols_));
    }
}

Matrix Matrix::identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

Matrix Matrix::transposed() const {
    Matrix t(cols_, rows_);
    for (std::size_t c = 0; c < cols_; ++c)
        for (std::size_t r = 0; r < rows_; ++r) t(c, r) = (*this)(r, c);
    return t;
}

double Matrix::frobenius() const {
    double s = 0.0;
    for (double v : data_) s += v * v;
    return std::sqrt(s);
}

Matrix operator*(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows()) {
        throw ArgumentError("matrix product shape mismatch: " + std::to_string(a.rows()) +
                            "x" + std::to_string(a.cols()) + " * " + std::to_string(b.rows()) +
                            "x" + std::to_string(b.cols()));
    }
    Matrix c(a.rows(), b.cols());
    // Column-major friendly order: c(:,j) += b(k,j) * a(:,k).
    for (std::size_t j = 0; j < b.cols(); ++j) {
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const double bkj = b(k, j);
            if (bkj == 0.0) continue;
            for (std::size_t i = 0; i < a.rows(); ++i) c(i, j) += a(i, k) * bkj;
        }
    }
    return c;
}

Matrix operator+(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        throw ArgumentError("matrix sum shape mismatch");
    }
    Matrix c = a;
    for (std::size_t i = 0; i < c.data().size(); ++i) c.data()[i] += b.data()[i];
    return c;
}

Matrix operator-(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        throw ArgumentError("matrix difference shape mismatch");
    }
    Matrix c = a;
    for (std::size_t i = 0; i < c.data().size(); ++i) c.data()[i] -= b.data()[i];
    return c;
}

Matrix operator*(double s, const Matrix& a) {
    Matrix c = a;
    for (double& v : c.data()) v *= s;
    return c;
}

Matrix transpose_times(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows()) {
        throw ArgumentError("transpose_times shape mismatch");
    }
    Matrix c(a.cols(), b.cols());
    for (std::size_t j = 0; j < b.cols(); ++j) {
        for (std::size_t i = 0; i < a.cols(); ++i) {
            double s = 0.0;
            for (std::size_t k = 0; k < a.rows(); ++k) s += a(k, i) * b(k, j);
            c(i, j) = s;
        }
    }
    return c;
}

Matrix times_transpose(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.cols()) {
        throw ArgumentError("times_transpose shape mismatch");
    }
    Matrix c(a.rows(), b.rows());
    for (std::size_t k = 0; k < a.cols(); ++k) {
        for (std::size_t j = 0; j < b.rows(); ++j) {
            const double bjk = b(j, k);
            if (bjk == 0.0) continue;
            for (std::size_t i = 0; i < a.rows(); ++i) c(i, j) += a(i, k) * bjk;
        }
    }
    return c;
}

Tensor3::Tensor3(Dims3 dims, std::vector<double> data)
    : dims_(dims), data_(std::move(data)) {
    if (data_.size() != dims_[0] * dims_[1] * dims_[2]) {
        throw ArgumentError("tensor data length " + std::to_string(data_.size()) +
                            " does not match dims " + std::to_string(dims_[0]) + "x" +
                            std::to_string(dims_[1]) + "x" + std::to_string(dims_[2]));
    }
}

Matrix Tensor3::slice(std::size_t i3) const {
    Matrix m(dims_[0], dims_[1]);
    const std::size_t base = dims_[0] * dims_[1] * i3;
    for (std::size_t i = 0; i < dims_[0] * dims_[1]; ++i) m.data()[i] = data_[base + i];
    return m;
}

Tensor3 Tensor3::select_slices(std::span<const std::size_t> indices) const {
    Tensor3 out({dims_[0], dims_[1], indices.size()});
    const std::size_t slab = dims_[0] * dims_[1];
    for (std::size_t j = 0; j < indices.size(); ++j) {
        if (indices[j] >= dims_[2]) {
            throw ArgumentError("slice index " + std::to_string(indices[j]) +
                                " out of range for mode-3 size " + std::to_string(dims_[2]));
        }
        const std::size_t src = slab * indices[j];
        for (std::size_t i = 0; i < slab; ++i) out.data()[slab * j + i] = data_[src + i];
    }
    return out;
}

void Tensor3::set_slice(std::size_t i3, const Matrix& m) {
    if (m.rows() != dims_[0] || m.cols() != dims_[1]) {
        throw ArgumentError("slice shape mismatch");
    }
    const std::size_t base = dims_[0] * dims_[1] * i3;
    for (std::size_t i = 0; i < dims_[0] * dims_[1]; ++i) data_[base + i] = m.data()[i];
}

Matrix unfold(const Tensor3& t, int mode) {
    check_mode(mode);
    const auto [n1, n2, n3] = t.dims();
    switch (mode) {
        case 1: {
            // column c = i2 + I2*i3
            Matrix m(n1, n2 * n3);
            for (std::size_t i3 = 0; i3 < n3; ++i3)
                for (std::size_t i2 = 0; i2 < n2; ++i2)
                    for (std::size_t i1 = 0; i1 < n1; ++i1)
                        m(i1, i2 + n2 * i3) = t(i1, i2, i3);
            return m;
        }
        case 2: {
            // column c = i1 + I1*i3
            Matrix m(n2, n1 * n3);
            for (std::size_t i3 = 0; i3 < n3; ++i3)
                for (std::size_t i2 = 0; i2 < n2; ++i2)
                    for (std::size_t i1 = 0; i1 < n1; ++i1)
                        m(i2, i1 + n1 * i3) = t(i1, i2, i3);
            return m;
        }
        default: {
            // column c = i1 + I1*i2
            Matrix m(n3, n1 * n2);
            for (std::size_t i3 = 0; i3 < n3; ++i3)
                for (std::size_t i2 = 0; i2 < n2; ++i2)
                    for (std::size_t i1 = 0; i1 < n1; ++i1)
                        m(i3, i1 + n1 * i2) = t(i1, i2, i3);
            return m;
        }
    }
}

Tensor3 fold(const Matrix& m, int mode, Dims3 dims) {
    check_mode(mode);
    std::size_t rest = 1;
    for (std::size_t i = 0; i < 3; ++i)
        if (i != static_cast<std::size_t>(mode) - 1) rest *= dims[i];
    if (m.rows() != dims[static_cast<std::size_t>(mode) - 1] || m.cols() != rest) {
        throw ArgumentError("fold shape mismatch: matrix " + std::to_string(m.rows()) + "x" +
                            std::to_string(m.cols()) + " vs dims " + std::to_string(dims[0]) +
                            "x" + std::to_string(dims[1]) + "x" + std::to_string(dims[2]) +
                            " on mode " + std::to_string(mode));
    }
    const auto [n1, n2, n3] = dims;
    Tensor3 t(dims);
    switch (mode) {
        case 1:
            for (std::size_t i3 = 0; i3 < n3; ++i3)
                for (std::size_t i2 = 0; i2 < n2; ++i2)
                    for (std::size_t i1 = 0; i1 < n1; ++i1)
                        t(i1, i2, i3) = m(i1, i2 + n2 * i3);
            break;
        case 2:
            for (std::size_t i3 = 0; i3 < n3; ++i3)
                for (std::size_t i2 = 0; i2 < n2; ++i2)
                    for (std::size_t i1 = 0; i1 < n1; ++i1)
                        t(i1, i2, i3) = m(i2, i1 + n1 * i3);
            break;
        default:
            for (std::size_t i3 = 0; i3 < n3; ++i3)
                for (std::size_t i2 = 0; i2 < n2; ++i2)
                    for (std::size_t i1 = 0; i1 < n1; ++i1)
                        t(i1, i2, i3) = m(i3, i1 + n1 * i2);
            break;
    }
    return t;
}

Tensor3 mode_product(const Tensor3& t, const Matrix& u, int mode) {
    check_mode(mode);
    const std::size_t ik = t.dims()[static_cast<std::size_t>(mode) - 1];
    if (u.cols() != ik) {
        throw ArgumentError("mode-" + std::to_string(mode) + " product mismatch: matrix has " +
                            std::to_string(u.cols()) + " columns, tensor mode size is " +
                            std::to_string(ik));
    }
    Dims3 out = t.dims();
    out[static_cast<std::size_t>(mode) - 1] = u.rows();
    return fold(u * unfold(t, mode), mode, out);
}

Tensor3 project(const Tensor3& t, const Matrix& u1, const Matrix& u2) {
    if (u1.rows() != t.dim(1) || u2.rows() != t.dim(2)) {
        throw ArgumentError("projection mismatch: u1 has " + std::to_string(u1.rows()) +
                            " rows (need " + std::to_string(t.dim(1)) + "), u2 has " +
                            std::to_string(u2.rows()) + " rows (need " +
                            std::to_string(t.dim(2)) + ")");
    }
    return mode_product(mode_product(t, u1.transposed(), 1), u2.transposed(), 2);
}

std::vector<double> vectorize(const Tensor3& t) {
    return std::vector<double>(t.data().begin(), t.data().end());
}

double frobenius(const Tensor3& t) {
    double s = 0.0;
    for (double v : t.data()) s += v * v;
    return std::sqrt(s);
}

double inner(const Tensor3& a, const Tensor3& b) {
    if (a.dims() != b.dims()) {
        throw ArgumentError("inner product dims mismatch");
    }
    double s = 0.0;
    for (std::size_t i = 0; i < a.data().size(); ++i) s += a.data()[i] * b.data()[i];
    return s;
}

}  // namespace treid
