#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "treid/tensor.hpp"

namespace treid {

// One modality's feature vectors: m samples, each of identical length d.
struct FeatureBlock {
    std::vector<std::vector<double>> vectors;
    std::string source_tag;

    std::size_t samples() const { return vectors.size(); }
    std::size_t dim() const { return vectors.empty() ? 0 : vectors.front().size(); }
};

enum class Normalize { none, l2_per_vector };

struct FusionConfig {
    std::size_t n_parts = 4;
    // Heterogeneous sources fuse with unbalanced magnitudes otherwise, so
    // per-vector L2 normalization is the default; switch to none to keep
    // raw scales.
    Normalize normalize = Normalize::l2_per_vector;
};

// Splits a length-d vector into n equal parts laid out as the columns of a
// (d/n) x n matrix. n must divide d; concatenating columns recovers x.
Matrix split_to_sample_matrix(std::span<const double> x, std::size_t n);

// Inverse of split_to_sample_matrix: concatenates columns back into one
// flat vector.
std::vector<double> sample_matrix_to_vector(const Matrix& m);

// Lifts a block of m vectors to a (d/n, n, m) tensor whose mode-3 slice i
// is split_to_sample_matrix(vectors[i], n).
Tensor3 build_view_tensor(const FeatureBlock& block, std::size_t n);

// Concatenates two view tensors along mode 1, a then b.
Tensor3 fuse(const Tensor3& a, const Tensor3& b);

// The mode-1 slab [row_offset, row_offset+rows) as its own tensor; exact
// inverse of fuse when applied at the recorded block offsets.
Tensor3 extract_mode1_slab(const Tensor3& t, std::size_t row_offset, std::size_t rows);

// Full fusion pipeline over k >= 1 blocks, folding fuse left-to-right.
// With normalize=l2_per_vector every vector is scaled to unit Euclidean
// norm first (zero vectors pass through unchanged).
Tensor3 hdff_pipeline(std::span<const FeatureBlock> blocks, const FusionConfig& cfg);

// Recovers block `index`'s vector for a given sample from a fused tensor,
// bitwise when the pipeline ran with normalize=none.
std::vector<double> recover_vector(const Tensor3& fused, std::span<const std::size_t> block_dims,
                                   std::size_t n, std::size_t block_index, std::size_t sample);

}  // namespace treid
