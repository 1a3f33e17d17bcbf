#include "treid/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "treid/error.hpp"

namespace treid {

namespace {

constexpr int kMaxSweeps = 100;
constexpr double kOffDiagTol = 1e-12;

Matrix symmetrize(const Matrix& a) {
    Matrix s(a.rows(), a.cols());
    for (std::size_t c = 0; c < a.cols(); ++c)
        for (std::size_t r = 0; r < a.rows(); ++r) s(r, c) = 0.5 * (a(r, c) + a(c, r));
    return s;
}

double offdiag_norm(const Matrix& a) {
    double s = 0.0;
    for (std::size_t q = 0; q < a.cols(); ++q)
        for (std::size_t p = 0; p < q; ++p) s += 2.0 * a(p, q) * a(p, q);
    return std::sqrt(s);
}

// Reorders columns so eigenvalues come out non-increasing. std::stable_sort
// preserves the Jacobi output order among ties, which pins the result.
EigenPairs sorted_pairs(std::vector<double> values, Matrix vectors) {
    const std::size_t n = values.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return values[a] > values[b]; });
    EigenPairs out;
    out.values.resize(n);
    out.vectors = Matrix(vectors.rows(), n);
    for (std::size_t j = 0; j < n; ++j) {
        out.values[j] = values[order[j]];
        for (std::size_t r = 0; r < vectors.rows(); ++r)
            out.vectors(r, j) = vectors(r, order[j]);
    }
    return out;
}

// Forward substitution: solves L x = b for each column of b.
Matrix solve_lower(const Matrix& l, const Matrix& b) {
    Matrix x = b;
    const std::size_t n = l.rows();
    for (std::size_t c = 0; c < b.cols(); ++c) {
        for (std::size_t i = 0; i < n; ++i) {
            double s = x(i, c);
            for (std::size_t k = 0; k < i; ++k) s -= l(i, k) * x(k, c);
            x(i, c) = s / l(i, i);
        }
    }
    return x;
}

// Back substitution: solves L^T x = b for each column of b.
Matrix solve_lower_transposed(const Matrix& l, const Matrix& b) {
    Matrix x = b;
    const std::size_t n = l.rows();
    for (std::size_t c = 0; c < b.cols(); ++c) {
        for (std::size_t i = n; i-- > 0;) {
            double s = x(i, c);
            for (std::size_t k = i + 1; k < n; ++k) s -= l(k, i) * x(k, c);
            x(i, c) = s / l(i, i);
        }
    }
    return x;
}

}  // namespace

EigenPairs sym_eig(const Matrix& input) {
    if (input.rows() != input.cols()) {
        throw ArgumentError("sym_eig requires a square matrix, got " +
                            std::to_string(input.rows()) + "x" + std::to_string(input.cols()));
    }
    Matrix a = symmetrize(input);
    const std::size_t n = a.rows();
    Matrix v = Matrix::identity(n);
    const double norm = a.frobenius();
    const double threshold = kOffDiagTol * norm;

    if (n <= 1 || norm == 0.0) {
        std::vector<double> values(n);
        for (std::size_t i = 0; i < n; ++i) values[i] = a(i, i);
        return sorted_pairs(std::move(values), std::move(v));
    }

    int sweep = 0;
    for (; sweep < kMaxSweeps; ++sweep) {
        if (offdiag_norm(a) <= threshold) break;
        for (std::size_t p = 0; p < n - 1; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (std::abs(apq) <= kOffDiagTol * norm / static_cast<double>(n * n)) continue;
                const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
                const double sign = theta >= 0.0 ? 1.0 : -1.0;
                const double t = sign / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                const double tau = s / (1.0 + c);

                a(p, p) -= t * apq;
                a(q, q) += t * apq;
                a(p, q) = 0.0;
                a(q, p) = 0.0;
                for (std::size_t r = 0; r < n; ++r) {
                    if (r != p && r != q) {
                        const double arp = a(r, p);
                        const double arq = a(r, q);
                        a(r, p) = arp - s * (arq + tau * arp);
                        a(p, r) = a(r, p);
                        a(r, q) = arq + s * (arp - tau * arq);
                        a(q, r) = a(r, q);
                    }
                    const double vrp = v(r, p);
                    const double vrq = v(r, q);
                    v(r, p) = vrp - s * (vrq + tau * vrp);
                    v(r, q) = vrq + s * (vrp - tau * vrq);
                }
            }
        }
    }
    if (offdiag_norm(a) > threshold) {
        throw NumericError("Jacobi eigensolve did not converge within " +
                               std::to_string(kMaxSweeps) + " sweeps",
                           kMaxSweeps);
    }

    std::vector<double> values(n);
    for (std::size_t i = 0; i < n; ++i) values[i] = a(i, i);
    return sorted_pairs(std::move(values), std::move(v));
}

Matrix cholesky(const Matrix& a) {
    if (a.rows() != a.cols()) {
        throw ArgumentError("cholesky requires a square matrix");
    }
    const std::size_t n = a.rows();
    Matrix l(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        double d = a(j, j);
        for (std::size_t k = 0; k < j; ++k) d -= l(j, k) * l(j, k);
        if (!(d > 0.0) || !std::isfinite(d)) {
            throw NumericError(
                "matrix is not positive-definite (pivot " + std::to_string(j) +
                "); raise the regularizer lambda");
        }
        l(j, j) = std::sqrt(d);
        for (std::size_t i = j + 1; i < n; ++i) {
            double s = a(i, j);
            for (std::size_t k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
            l(i, j) = s / l(j, j);
        }
    }
    return l;
}

EigenPairs gen_eig(const Matrix& e, const Matrix& i) {
    if (e.rows() != e.cols() || i.rows() != i.cols() || e.rows() != i.rows()) {
        throw ArgumentError("gen_eig requires square matrices of equal size");
    }
    const Matrix l = cholesky(symmetrize(i));
    // w = L^-1 e L^-T, kept symmetric explicitly before the Jacobi solve.
    const Matrix x = solve_lower(l, symmetrize(e));
    const Matrix w = solve_lower(l, x.transposed());
    EigenPairs pairs = sym_eig(w);
    pairs.vectors = solve_lower_transposed(l, pairs.vectors);
    return pairs;
}

}  // namespace treid
