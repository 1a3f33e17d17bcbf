#include "treid/hdff.hpp"

#include <cmath>
#include <string>

#include "treid/error.hpp"

namespace treid {

namespace {

void check_divides(std::size_t d, std::size_t n) {
    if (n == 0 || d == 0 || d % n != 0) {
        throw ArgumentError("n_parts " + std::to_string(n) +
                            " does not divide feature length " + std::to_string(d));
    }
}

std::vector<double> l2_normalized(const std::vector<double>& x) {
    double s = 0.0;
    for (double v : x) s += v * v;
    if (s == 0.0) return x;  // zero vectors pass through, no NaN
    const double inv = 1.0 / std::sqrt(s);
    std::vector<double> out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] * inv;
    return out;
}

}  // namespace

Matrix split_to_sample_matrix(std::span<const double> x, std::size_t n) {
    check_divides(x.size(), n);
    const std::size_t chunk = x.size() / n;
    Matrix m(chunk, n);
    for (std::size_t p = 0; p < n; ++p)
        for (std::size_t r = 0; r < chunk; ++r) m(r, p) = x[p * chunk + r];
    return m;
}

std::vector<double> sample_matrix_to_vector(const Matrix& m) {
    return std::vector<double>(m.data().begin(), m.data().end());
}

Tensor3 build_view_tensor(const FeatureBlock& block, std::size_t n) {
    if (block.samples() == 0) {
        throw ArgumentError("feature block '" + block.source_tag + "' is empty");
    }
    const std::size_t d = block.dim();
    check_divides(d, n);
    for (const auto& v : block.vectors) {
        if (v.size() != d) {
            throw ArgumentError("feature block '" + block.source_tag +
                                "' has vectors of differing lengths");
        }
    }
    Tensor3 t({d / n, n, block.samples()});
    for (std::size_t i = 0; i < block.samples(); ++i) {
        t.set_slice(i, split_to_sample_matrix(block.vectors[i], n));
    }
    return t;
}

Tensor3 fuse(const Tensor3& a, const Tensor3& b) {
    if (a.dim(2) != b.dim(2)) {
        throw ArgumentError("fuse: mode-2 mismatch (" + std::to_string(a.dim(2)) + " vs " +
                            std::to_string(b.dim(2)) + ")");
    }
    if (a.dim(3) != b.dim(3)) {
        throw ArgumentError("fuse: mode-3 mismatch (" + std::to_string(a.dim(3)) + " vs " +
                            std::to_string(b.dim(3)) + ")");
    }
    const std::size_t sa = a.dim(1);
    const std::size_t s = sa + b.dim(1);
    Tensor3 c({s, a.dim(2), a.dim(3)});
    for (std::size_t i3 = 0; i3 < c.dim(3); ++i3)
        for (std::size_t i2 = 0; i2 < c.dim(2); ++i2) {
            for (std::size_t i1 = 0; i1 < sa; ++i1) c(i1, i2, i3) = a(i1, i2, i3);
            for (std::size_t i1 = sa; i1 < s; ++i1) c(i1, i2, i3) = b(i1 - sa, i2, i3);
        }
    return c;
}

Tensor3 extract_mode1_slab(const Tensor3& t, std::size_t row_offset, std::size_t rows) {
    if (row_offset + rows > t.dim(1)) {
        throw ArgumentError("mode-1 slab out of range");
    }
    Tensor3 out({rows, t.dim(2), t.dim(3)});
    for (std::size_t i3 = 0; i3 < t.dim(3); ++i3)
        for (std::size_t i2 = 0; i2 < t.dim(2); ++i2)
            for (std::size_t i1 = 0; i1 < rows; ++i1)
                out(i1, i2, i3) = t(row_offset + i1, i2, i3);
    return out;
}

Tensor3 hdff_pipeline(std::span<const FeatureBlock> blocks, const FusionConfig& cfg) {
    if (blocks.empty()) {
        throw ArgumentError("hdff_pipeline needs at least one feature block");
    }
    const std::size_t m = blocks.front().samples();
    for (const auto& b : blocks) {
        if (b.samples() != m) {
            throw ArgumentError("feature blocks disagree on sample count: '" +
                                blocks.front().source_tag + "' has " + std::to_string(m) +
                                ", '" + b.source_tag + "' has " + std::to_string(b.samples()));
        }
    }

    Tensor3 fused;
    for (std::size_t bi = 0; bi < blocks.size(); ++bi) {
        FeatureBlock prepared;
        if (cfg.normalize == Normalize::l2_per_vector) {
            prepared.source_tag = blocks[bi].source_tag;
            prepared.vectors.reserve(m);
            for (const auto& v : blocks[bi].vectors) prepared.vectors.push_back(l2_normalized(v));
        }
        const FeatureBlock& use = cfg.normalize == Normalize::l2_per_vector ? prepared : blocks[bi];
        Tensor3 view = build_view_tensor(use, cfg.n_parts);
        fused = bi == 0 ? std::move(view) : fuse(fused, view);
    }
    return fused;
}

std::vector<double> recover_vector(const Tensor3& fused, std::span<const std::size_t> block_dims,
                                   std::size_t n, std::size_t block_index, std::size_t sample) {
    if (block_index >= block_dims.size()) {
        throw ArgumentError("block index out of range");
    }
    std::size_t offset = 0;
    for (std::size_t b = 0; b < block_index; ++b) {
        check_divides(block_dims[b], n);
        offset += block_dims[b] / n;
    }
    check_divides(block_dims[block_index], n);
    const std::size_t rows = block_dims[block_index] / n;
    const Tensor3 slab = extract_mode1_slab(fused, offset, rows);
    return sample_matrix_to_vector(slab.slice(sample));
}

}  // namespace treid
