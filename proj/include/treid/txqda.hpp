#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "treid/tensor.hpp"

namespace treid {

// Labeled training data for cross-view learning: an s x n x m tensor whose
// mode-3 slices are samples, with per-sample person and camera labels.
// Exactly two distinct camera labels are allowed; view a is the gallery
// camera (by default the camera of the first sample).
struct CrossViewSet {
    Tensor3 tensor;
    std::vector<std::string> person_ids;
    std::vector<std::string> camera_ids;
    std::optional<std::string> view_a_camera;

    std::size_t samples() const { return person_ids.size(); }
};

// Validation outcome: persons lacking a sample in one of the two views can
// not contribute cross-view pairs. They are reported here and excluded
// from the pair statistics (with a warning), never silently dropped.
struct CrossViewReport {
    std::vector<std::string> unpaired_persons;
    std::string view_a;
    std::string view_b;
    std::size_t paired_persons = 0;
};

// Checks the CrossViewSet invariants (label lengths, exactly two cameras,
// both views nonempty, >= 2 persons) and reports unpaired persons.
CrossViewReport validate_cross_view(const CrossViewSet& set);

struct TxqdaConfig {
    // Reduced sizes (s', n'); unset means the automatic rule: keep all
    // eigenvalues > 1, at least one column.
    std::optional<std::pair<std::size_t, std::size_t>> target_dims;
    // Scatter regularizer; unset means the scale-aware default
    // 1e-3 * trace(V_I) / dim, fixed per mode at the first iteration.
    std::optional<double> lambda;
    std::size_t max_iters = 5;
    double tol = 1e-6;
};

enum class StopReason { converged, max_iters, no_improvement };

// Learned per-mode projections with their diagnostics.
struct ProjectionSet {
    Matrix u1;  // s x s'
    Matrix u2;  // n x n'
    std::vector<double> spectrum1;  // full descending spectra of the final solves
    std::vector<double> spectrum2;
    std::vector<double> objective1;  // recorded trace ratio per iteration
    std::vector<double> objective2;
    StopReason stop_reason = StopReason::max_iters;
    std::size_t iterations = 0;
    double lambda1 = 0.0;
    double lambda2 = 0.0;
    std::vector<std::string> warnings;
};

// Intrinsic/extrinsic cross-view pair scatters for mode k in {1, 2}, with
// every sample slice projected on the opposite mode only. Uses the
// class-sum expansion (per-class slice-product and slice sums assembled
// algebraically) instead of enumerating the O(m^2) pairs; the result
// equals explicit pair enumeration.
struct ScatterPair {
    Matrix extrinsic;  // V_E^k
    Matrix intrinsic;  // V_I^k
    std::size_t intrinsic_pairs = 0;
    std::size_t extrinsic_pairs = 0;
};

ScatterPair scatter_pair(const CrossViewSet& set, const Matrix& u_other, int mode);

// Top eigenvectors of gen_eig(v_e, v_i + lambda I). Explicit target keeps
// that many columns; nullopt applies the keep-eigenvalues-above-one rule.
// Returns the projection and the full descending spectrum.
std::pair<Matrix, std::vector<double>> solve_mode(const Matrix& v_e, const Matrix& v_i,
                                                  double lambda,
                                                  std::optional<std::size_t> target);

// Alternating per-mode optimization of the cross-view trace ratio.
// Each iteration updates u1 from scatters built with the current u2, then
// u2 from scatters built with the new u1. Stops early when the projector
// change max_k ||u_k u_k^T - prev u_k u_k^T||_F falls below tol, or when
// an iteration fails to improve either recorded objective.
ProjectionSet fit(const CrossViewSet& set, const TxqdaConfig& cfg);

// Applies the learned projections: project(t, u1, u2).
Tensor3 transform(const ProjectionSet& p, const Tensor3& t);

}  // namespace treid
