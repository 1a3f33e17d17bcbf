#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "treid/tensor.hpp"

namespace treid {

// Cosine similarity x^T y / (||x|| ||y||), clamped to [-1, 1]. A zero-norm
// input yields 0 (a degenerate sample cannot win a ranking but must not
// abort batch evaluation); when that happens *degenerate is set.
double cosine(std::span<const double> x, std::span<const double> y,
              bool* degenerate = nullptr);

// Per-probe gallery ordering, best match first.
struct RankingResult {
    // order[p][r] = gallery sample index at rank r for probe p.
    std::vector<std::vector<std::size_t>> order;
    // scores[p][r] = similarity at that rank (non-increasing along r).
    std::vector<std::vector<double>> scores;
    std::vector<std::string> probe_person_ids;
    std::vector<std::string> gallery_person_ids;
    // Number of zero-norm vectors encountered while scoring.
    std::size_t degenerate_count = 0;
};

// Scores every probe slice against every gallery slice with cosine
// similarity over the vectorized slices, sorting descending with ties
// broken by ascending gallery index. Parallel over probes when
// threads > 1; output is schedule independent.
RankingResult score_and_rank(const Tensor3& gallery,
                             std::span<const std::string> gallery_person_ids,
                             const Tensor3& probes,
                             std::span<const std::string> probe_person_ids,
                             std::size_t threads = 1);

// Cumulative match characteristic. values[r] = P(correct identity within
// the top r+1 ranks), non-decreasing, in [0, 1].
struct CmcCurve {
    std::vector<double> values;
};

// Closed-set CMC over the first correctly matching gallery entry per
// probe. Probes whose identity is absent from the gallery raise DataError
// listing the offenders. k_max must not exceed the gallery size.
CmcCurve cmc(const RankingResult& r, std::size_t k_max);

// CMC values at the requested ranks (1-based) as percentages.
std::vector<double> rank_k(const CmcCurve& c, std::span<const int> ks);

// Two-decimal percentage strings for table cells, e.g. "53.16".
std::vector<std::string> format_rank_row(const CmcCurve& c, std::span<const int> ks);

}  // namespace treid
