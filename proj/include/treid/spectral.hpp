#pragma once

#include <vector>

#include "treid/tensor.hpp"

namespace treid {

// Eigendecomposition result. values are sorted non-increasing; column j of
// vectors pairs with values[j]. For sym_eig the columns are orthonormal,
// for gen_eig they are B-orthonormal in the right-hand-side matrix.
struct EigenPairs {
    std::vector<double> values;
    Matrix vectors;
};

// Full-spectrum symmetric eigensolve by cyclic Jacobi rotations. The input
// is symmetrized as (a + a^T)/2 first. Sweeps stop once the off-diagonal
// Frobenius mass drops below 1e-12 * ||a||_F; more than 100 sweeps raises
// NumericError carrying the sweep count. Ties keep the pre-sort order.
EigenPairs sym_eig(const Matrix& a);

// Generalized symmetric-definite eigensolve e v = lambda i v. Whitens with
// the Cholesky factor i = L L^T, solves the symmetric problem
// L^-1 e L^-T, and maps vectors back by v = L^-T w, so v^T i v = I.
// Factorization failure raises NumericError telling the caller to raise
// its regularizer.
EigenPairs gen_eig(const Matrix& e, const Matrix& i);

// Lower-triangular Cholesky factor of an SPD matrix; NumericError when a
// pivot is not strictly positive.
Matrix cholesky(const Matrix& a);

}  // namespace treid
