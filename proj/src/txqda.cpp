#include "treid/txqda.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "treid/error.hpp"
#include "treid/spectral.hpp"

namespace treid {

namespace {

double trace(const Matrix& a) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i) s += a(i, i);
    return s;
}

// Tr(u^T e u) / Tr(u^T (i + lambda I) u), the recorded per-mode objective.
double trace_ratio(const Matrix& u, const Matrix& e, const Matrix& i, double lambda) {
    const Matrix eu = e * u;
    const Matrix iu = i * u;
    double num = 0.0;
    double den = 0.0;
    for (std::size_t c = 0; c < u.cols(); ++c)
        for (std::size_t r = 0; r < u.rows(); ++r) {
            num += u(r, c) * eu(r, c);
            den += u(r, c) * (iu(r, c) + lambda * u(r, c));
        }
    return num / den;
}

// ||a a^T - b b^T||_F; column-sign and rotation invariant convergence gauge.
double projector_delta(const Matrix& a, const Matrix& b) {
    return (times_transpose(a, a) - times_transpose(b, b)).frobenius();
}

struct Grouping {
    // Per pairable class, sample indices in each view (sample order kept).
    std::vector<std::vector<std::size_t>> view_a;
    std::vector<std::vector<std::size_t>> view_b;
};

// Groups samples of pairable persons by class, in first-occurrence order.
Grouping group_pairable(const CrossViewSet& set, const CrossViewReport& report) {
    std::unordered_map<std::string, std::size_t> class_of;
    std::vector<std::vector<std::size_t>> a_lists, b_lists;
    for (std::size_t i = 0; i < set.samples(); ++i) {
        auto [it, inserted] = class_of.try_emplace(set.person_ids[i], a_lists.size());
        if (inserted) {
            a_lists.emplace_back();
            b_lists.emplace_back();
        }
        if (set.camera_ids[i] == report.view_a)
            a_lists[it->second].push_back(i);
        else
            b_lists[it->second].push_back(i);
    }
    Grouping g;
    for (std::size_t c = 0; c < a_lists.size(); ++c) {
        if (!a_lists[c].empty() && !b_lists[c].empty()) {
            g.view_a.push_back(std::move(a_lists[c]));
            g.view_b.push_back(std::move(b_lists[c]));
        }
    }
    return g;
}

}  // namespace

CrossViewReport validate_cross_view(const CrossViewSet& set) {
    const std::size_t m = set.tensor.dim(3);
    if (set.person_ids.size() != m || set.camera_ids.size() != m) {
        throw ArgumentError("label arrays must match the tensor's mode-3 size " +
                            std::to_string(m));
    }
    if (m == 0) throw DataError("cross-view set is empty");

    std::vector<std::string> cameras;
    for (const auto& c : set.camera_ids)
        if (std::find(cameras.begin(), cameras.end(), c) == cameras.end()) cameras.push_back(c);
    if (cameras.size() != 2) {
        throw DataError("cross-view set needs exactly two camera labels, found " +
                        std::to_string(cameras.size()));
    }

    CrossViewReport report;
    if (set.view_a_camera) {
        if (*set.view_a_camera != cameras[0] && *set.view_a_camera != cameras[1]) {
            throw ArgumentError("view_a camera '" + *set.view_a_camera +
                                "' does not occur in the data");
        }
        report.view_a = *set.view_a_camera;
    } else {
        report.view_a = cameras[0];
    }
    report.view_b = report.view_a == cameras[0] ? cameras[1] : cameras[0];

    // Pairability per person, in first-occurrence order.
    std::unordered_map<std::string, std::pair<bool, bool>> seen;
    std::vector<std::string> order;
    for (std::size_t i = 0; i < set.samples(); ++i) {
        auto [it, inserted] = seen.try_emplace(set.person_ids[i], false, false);
        if (inserted) order.push_back(set.person_ids[i]);
        (set.camera_ids[i] == report.view_a ? it->second.first : it->second.second) = true;
    }
    if (order.size() < 2) {
        throw DataError("cross-view set needs at least two distinct persons");
    }
    for (const auto& p : order) {
        const auto& [in_a, in_b] = seen[p];
        if (in_a && in_b)
            ++report.paired_persons;
        else
            report.unpaired_persons.push_back(p);
    }
    return report;
}

ScatterPair scatter_pair(const CrossViewSet& set, const Matrix& u_other, int mode) {
    if (mode != 1 && mode != 2) {
        throw ArgumentError("scatter mode must be 1 or 2, got " + std::to_string(mode));
    }
    const CrossViewReport report = validate_cross_view(set);
    const Grouping groups = group_pairable(set, report);

    const std::size_t dim = mode == 1 ? set.tensor.dim(1) : set.tensor.dim(2);
    const std::size_t other_rows = mode == 1 ? set.tensor.dim(2) : set.tensor.dim(1);
    if (u_other.rows() != other_rows) {
        throw ArgumentError("opposite-mode projection has " + std::to_string(u_other.rows()) +
                            " rows, expected " + std::to_string(other_rows));
    }

    // Projected slice whose mode-`mode` unfolding rows we correlate.
    auto projected = [&](std::size_t i) {
        const Matrix s = set.tensor.slice(i);
        return mode == 1 ? s * u_other : transpose_times(u_other, s);
    };
    // outer(x, y) = x_(k) y_(k)^T for the slice matrices.
    auto outer = [&](const Matrix& x, const Matrix& y) {
        return mode == 1 ? times_transpose(x, y) : transpose_times(x, y);
    };
    auto accumulate = [](Matrix& into, const Matrix& inc, double w = 1.0) {
        for (std::size_t i = 0; i < into.data().size(); ++i)
            into.data()[i] += w * inc.data()[i];
    };

    const std::size_t pcols = mode == 1 ? u_other.cols() : set.tensor.dim(2);
    const std::size_t prows = mode == 1 ? set.tensor.dim(1) : u_other.cols();

    // Class-sum expansion. For each pairable class c with view sets A_c, B_c:
    //   sum over intrinsic pairs of outer(P_i - P_j, P_i - P_j)
    //     = |B_c| G_c^A + |A_c| G_c^B - outer(S_c^A, S_c^B) - outer(S_c^B, S_c^A)
    // with G the per-view sums of outer(P_i, P_i) and S the slice sums.
    // The all-cross-view-pairs total has the same shape over the global
    // sums; extrinsic = total - intrinsic.
    Matrix sum_i(dim, dim);
    Matrix g_a(dim, dim), g_b(dim, dim);
    Matrix s_a(prows, pcols), s_b(prows, pcols);
    std::size_t count_a = 0, count_b = 0, n_i = 0;

    for (std::size_t c = 0; c < groups.view_a.size(); ++c) {
        Matrix gc_a(dim, dim), gc_b(dim, dim);
        Matrix sc_a(prows, pcols), sc_b(prows, pcols);
        for (std::size_t i : groups.view_a[c]) {
            const Matrix p = projected(i);
            accumulate(gc_a, outer(p, p));
            accumulate(sc_a, p);
        }
        for (std::size_t i : groups.view_b[c]) {
            const Matrix p = projected(i);
            accumulate(gc_b, outer(p, p));
            accumulate(sc_b, p);
        }
        const double na = static_cast<double>(groups.view_a[c].size());
        const double nb = static_cast<double>(groups.view_b[c].size());
        accumulate(sum_i, gc_a, nb);
        accumulate(sum_i, gc_b, na);
        accumulate(sum_i, outer(sc_a, sc_b), -1.0);
        accumulate(sum_i, outer(sc_b, sc_a), -1.0);
        accumulate(g_a, gc_a);
        accumulate(g_b, gc_b);
        accumulate(s_a, sc_a);
        accumulate(s_b, sc_b);
        count_a += groups.view_a[c].size();
        count_b += groups.view_b[c].size();
        n_i += groups.view_a[c].size() * groups.view_b[c].size();
    }

    const std::size_t n_all = count_a * count_b;
    const std::size_t n_e = n_all - n_i;
    if (n_i == 0 || n_e == 0) {
        throw DataError("cross-view pair statistics are empty (intrinsic pairs: " +
                        std::to_string(n_i) + ", extrinsic pairs: " + std::to_string(n_e) + ")");
    }

    Matrix sum_all(dim, dim);
    accumulate(sum_all, g_a, static_cast<double>(count_b));
    accumulate(sum_all, g_b, static_cast<double>(count_a));
    accumulate(sum_all, outer(s_a, s_b), -1.0);
    accumulate(sum_all, outer(s_b, s_a), -1.0);

    ScatterPair out;
    out.intrinsic_pairs = n_i;
    out.extrinsic_pairs = n_e;
    out.intrinsic = (1.0 / static_cast<double>(n_i)) * sum_i;
    out.extrinsic = (1.0 / static_cast<double>(n_e)) * (sum_all - sum_i);
    return out;
}

std::pair<Matrix, std::vector<double>> solve_mode(const Matrix& v_e, const Matrix& v_i,
                                                  double lambda,
                                                  std::optional<std::size_t> target) {
    if (v_e.rows() != v_e.cols() || v_i.rows() != v_i.cols() || v_e.rows() != v_i.rows()) {
        throw ArgumentError("solve_mode requires square scatters of equal size");
    }
    const std::size_t dim = v_e.rows();
    Matrix regularized = v_i;
    for (std::size_t i = 0; i < dim; ++i) regularized(i, i) += lambda;

    const EigenPairs pairs = gen_eig(v_e, regularized);

    std::size_t keep;
    if (target) {
        if (*target == 0 || *target > dim) {
            throw ArgumentError("target dimension " + std::to_string(*target) +
                                " out of range for mode size " + std::to_string(dim));
        }
        keep = *target;
    } else {
        // Keep eigenvalues above one, with a relative slack so that a
        // spectrum sitting exactly at one (v_e = v_i) is not kept on
        // rounding noise.
        const double threshold =
            1.0 + 1e-9 * std::max(1.0, pairs.values.empty() ? 0.0 : std::abs(pairs.values[0]));
        keep = 0;
        for (double v : pairs.values)
            if (v > threshold) ++keep;
        keep = std::max<std::size_t>(keep, 1);
    }

    Matrix u(dim, keep);
    for (std::size_t c = 0; c < keep; ++c)
        for (std::size_t r = 0; r < dim; ++r) u(r, c) = pairs.vectors(r, c);
    return {std::move(u), pairs.values};
}

ProjectionSet fit(const CrossViewSet& set, const TxqdaConfig& cfg) {
    if (cfg.max_iters < 1) throw ArgumentError("max_iters must be >= 1");
    if (cfg.tol < 0.0) throw ArgumentError("tol must be >= 0");
    if (cfg.lambda && *cfg.lambda < 0.0) throw ArgumentError("lambda must be >= 0");

    const std::size_t s = set.tensor.dim(1);
    const std::size_t n = set.tensor.dim(2);
    std::optional<std::size_t> target1, target2;
    if (cfg.target_dims) {
        if (cfg.target_dims->first > s || cfg.target_dims->second > n) {
            throw ArgumentError("target dims exceed tensor mode sizes");
        }
        target1 = cfg.target_dims->first;
        target2 = cfg.target_dims->second;
    }

    const CrossViewReport report = validate_cross_view(set);

    ProjectionSet result;
    for (const auto& p : report.unpaired_persons) {
        result.warnings.push_back("person '" + p +
                                  "' has samples in only one view; excluded from pair statistics");
    }

    result.u1 = Matrix::identity(s);
    result.u2 = Matrix::identity(n);
    result.stop_reason = StopReason::max_iters;

    for (std::size_t iter = 1; iter <= cfg.max_iters; ++iter) {
        const ScatterPair sp1 = scatter_pair(set, result.u2, 1);
        if (iter == 1) {
            result.lambda1 =
                cfg.lambda.value_or(1e-3 * trace(sp1.intrinsic) / static_cast<double>(s));
        }
        auto [u1_new, spec1] = solve_mode(sp1.extrinsic, sp1.intrinsic, result.lambda1, target1);
        const double obj1 = trace_ratio(u1_new, sp1.extrinsic, sp1.intrinsic, result.lambda1);

        const ScatterPair sp2 = scatter_pair(set, u1_new, 2);
        if (iter == 1) {
            result.lambda2 =
                cfg.lambda.value_or(1e-3 * trace(sp2.intrinsic) / static_cast<double>(n));
        }
        auto [u2_new, spec2] = solve_mode(sp2.extrinsic, sp2.intrinsic, result.lambda2, target2);
        const double obj2 = trace_ratio(u2_new, sp2.extrinsic, sp2.intrinsic, result.lambda2);

        // Alternation halts once the surrogate stops improving; the
        // non-improving candidates are discarded so the recorded objective
        // stays non-decreasing.
        if (iter > 1) {
            const double slack1 = 1e-12 * std::max(1.0, std::abs(result.objective1.back()));
            const double slack2 = 1e-12 * std::max(1.0, std::abs(result.objective2.back()));
            if (obj1 < result.objective1.back() - slack1 ||
                obj2 < result.objective2.back() - slack2) {
                result.stop_reason = StopReason::no_improvement;
                break;
            }
        }

        const double delta =
            std::max(projector_delta(u1_new, result.u1), projector_delta(u2_new, result.u2));
        result.u1 = std::move(u1_new);
        result.u2 = std::move(u2_new);
        result.spectrum1 = std::move(spec1);
        result.spectrum2 = std::move(spec2);
        result.objective1.push_back(obj1);
        result.objective2.push_back(obj2);
        result.iterations = iter;

        if (delta <= cfg.tol) {
            result.stop_reason = StopReason::converged;
            break;
        }
    }
    return result;
}

Tensor3 transform(const ProjectionSet& p, const Tensor3& t) {
    return project(t, p.u1, p.u2);
}

}  // namespace treid
