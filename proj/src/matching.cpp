#include "treid/matching.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "treid/error.hpp"
#include "treid/parallel.hpp"

namespace treid {

double cosine(std::span<const double> x, std::span<const double> y, bool* degenerate) {
    if (x.size() != y.size()) {
        throw ArgumentError("cosine requires equal lengths, got " + std::to_string(x.size()) +
                            " and " + std::to_string(y.size()));
    }
    double dot = 0.0, nx = 0.0, ny = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        dot += x[i] * y[i];
        nx += x[i] * x[i];
        ny += y[i] * y[i];
    }
    if (nx == 0.0 || ny == 0.0) {
        if (degenerate) *degenerate = true;
        return 0.0;
    }
    return std::clamp(dot / (std::sqrt(nx) * std::sqrt(ny)), -1.0, 1.0);
}

RankingResult score_and_rank(const Tensor3& gallery,
                             std::span<const std::string> gallery_person_ids,
                             const Tensor3& probes,
                             std::span<const std::string> probe_person_ids,
                             std::size_t threads) {
    if (gallery.dim(1) != probes.dim(1) || gallery.dim(2) != probes.dim(2)) {
        throw ArgumentError("gallery and probe tensors disagree on slice shape");
    }
    if (gallery_person_ids.size() != gallery.dim(3) || probe_person_ids.size() != probes.dim(3)) {
        throw ArgumentError("person id arrays must match the tensors' mode-3 sizes");
    }
    const std::size_t gal = gallery.dim(3);
    const std::size_t slab = gallery.dim(1) * gallery.dim(2);

    RankingResult result;
    result.gallery_person_ids.assign(gallery_person_ids.begin(), gallery_person_ids.end());
    result.probe_person_ids.assign(probe_person_ids.begin(), probe_person_ids.end());
    result.order.resize(probes.dim(3));
    result.scores.resize(probes.dim(3));

    std::atomic<std::size_t> degenerate{0};
    parallel_for(probes.dim(3), threads, [&](std::size_t p) {
        const std::span<const double> pv = probes.data().subspan(slab * p, slab);
        std::vector<double> sims(gal);
        for (std::size_t g = 0; g < gal; ++g) {
            bool flag = false;
            sims[g] = cosine(pv, gallery.data().subspan(slab * g, slab), &flag);
            if (flag) degenerate.fetch_add(1, std::memory_order_relaxed);
        }
        std::vector<std::size_t> order(gal);
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            if (sims[a] != sims[b]) return sims[a] > sims[b];
            return a < b;  // deterministic tie-break by gallery index
        });
        std::vector<double> sorted(gal);
        for (std::size_t r = 0; r < gal; ++r) sorted[r] = sims[order[r]];
        result.order[p] = std::move(order);
        result.scores[p] = std::move(sorted);
    });
    result.degenerate_count = degenerate.load();
    return result;
}

CmcCurve cmc(const RankingResult& r, std::size_t k_max) {
    const std::size_t gal = r.gallery_person_ids.size();
    if (k_max == 0 || k_max > gal) {
        throw ArgumentError("k_max " + std::to_string(k_max) +
                            " out of range for gallery size " + std::to_string(gal));
    }
    std::vector<std::string> open_set;
    for (const auto& pid : r.probe_person_ids) {
        if (std::find(r.gallery_person_ids.begin(), r.gallery_person_ids.end(), pid) ==
            r.gallery_person_ids.end()) {
            open_set.push_back(pid);
        }
    }
    if (!open_set.empty()) {
        std::string msg = "probe identities missing from the gallery:";
        for (const auto& p : open_set) msg += " '" + p + "'";
        throw DataError(msg);
    }

    CmcCurve curve;
    curve.values.assign(k_max, 0.0);
    const std::size_t probes = r.probe_person_ids.size();
    for (std::size_t p = 0; p < probes; ++p) {
        for (std::size_t rank = 0; rank < gal; ++rank) {
            if (r.gallery_person_ids[r.order[p][rank]] == r.probe_person_ids[p]) {
                if (rank < k_max) {
                    for (std::size_t k = rank; k < k_max; ++k) curve.values[k] += 1.0;
                }
                break;  // first correct match only
            }
        }
    }
    for (double& v : curve.values) v /= static_cast<double>(probes);
    return curve;
}

std::vector<double> rank_k(const CmcCurve& c, std::span<const int> ks) {
    std::vector<double> out;
    out.reserve(ks.size());
    for (int k : ks) {
        if (k < 1 || static_cast<std::size_t>(k) > c.values.size()) {
            throw ArgumentError("rank " + std::to_string(k) + " out of range for curve length " +
                                std::to_string(c.values.size()));
        }
        out.push_back(100.0 * c.values[static_cast<std::size_t>(k) - 1]);
    }
    return out;
}

std::vector<std::string> format_rank_row(const CmcCurve& c, std::span<const int> ks) {
    std::vector<std::string> cells;
    for (double v : rank_k(c, ks)) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.2f", v);
        cells.emplace_back(buf);
    }
    return cells;
}

}  // namespace treid
