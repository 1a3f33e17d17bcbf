#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "treid/hdff.hpp"
#include "treid/labels.hpp"
#include "treid/matching.hpp"
#include "treid/txqda.hpp"

namespace treid {

// One entry of the dimension sweep: explicit (s', n') or auto selection.
using DimsChoice = std::optional<std::pair<std::size_t, std::size_t>>;

struct ExperimentConfig {
    std::size_t trials = 10;
    // Identity-level split: train_count wins when set, otherwise
    // round(train_fraction * #identities).
    double train_fraction = 0.5;
    std::optional<std::size_t> train_count;
    std::uint64_t rng_seed = 42;
    std::vector<DimsChoice> dims_sweep = {std::nullopt};
    TxqdaConfig txqda;
    FusionConfig fusion;
    std::vector<int> ranks = {1, 5, 10, 15, 20};
    // Camera whose samples form the test gallery; default is the first
    // camera in label order. Probes come from the other camera.
    std::optional<std::string> gallery_camera;
    // false runs the raw-cosine baseline: no TXQDA, identity projections.
    bool learning = true;
    std::size_t threads = 1;
};

struct TrialResult {
    CmcCurve curve;
    std::size_t chosen_s = 0;
    std::size_t chosen_n = 0;
    std::vector<double> objective1;
    std::vector<double> objective2;
    double fit_seconds = 0.0;
    double match_seconds = 0.0;
};

struct SweepResult {
    std::string dims_label;  // "auto" or e.g. "100x4"
    std::vector<TrialResult> trials;
    // Mean curve across trials, truncated to the shortest per-trial
    // gallery, plus the per-rank population standard deviation.
    CmcCurve mean_curve;
    std::vector<double> stddev;
};

struct ExperimentReport {
    std::vector<SweepResult> sweeps;
    std::vector<std::string> warnings;
    std::size_t samples = 0;
    std::size_t identities = 0;
    std::string gallery_camera;
    std::string probe_camera;
    double total_seconds = 0.0;
};

// Synthetic cross-view data model: per identity a Gaussian class mean over
// both blocks, a fixed per-view offset, isotropic per-sample noise. All
// draws are deterministic in the seed.
struct SyntheticSpec {
    std::size_t identities = 20;
    std::size_t samples_per_identity_per_view = 2;
    std::size_t dim_a = 64;
    std::size_t dim_b = 32;
    double class_signal = 1.0;
    double view_offset = 5.0;
    double noise = 0.5;
    std::uint64_t seed = 7;
};

// Disjoint identity-level train/test split, reproducible from
// (cfg.rng_seed, trial_index).
std::pair<std::vector<std::string>, std::vector<std::string>> split_trial(
    const std::vector<std::string>& identities, const ExperimentConfig& cfg,
    std::size_t trial_index);

// Full protocol: fuse once over all samples, then per (sweep dims, trial)
// fit TXQDA on the training identities only, project gallery and probes,
// rank and compute the CMC, and aggregate means and standard deviations.
ExperimentReport run_experiment(std::span<const FeatureBlock> blocks, const SampleLabels& labels,
                                const ExperimentConfig& cfg);

std::pair<std::vector<FeatureBlock>, SampleLabels> generate_synthetic(const SyntheticSpec& spec);

// Table-2-shaped Markdown grid: one row per sweep entry, columns Dim. and
// Rank-k percentages with two decimals.
std::string markdown_table(const ExperimentReport& report, const ExperimentConfig& cfg,
                           const std::string& config_name);

// Deterministic JSON summary (means, standard deviations, chosen dims,
// seeds). Wall-clock timings are included only when with_timings is set,
// keeping the default output reproducible bit-for-bit.
std::string summary_json_text(const ExperimentReport& report, const ExperimentConfig& cfg,
                              const std::string& config_name, bool with_timings = false);

}  // namespace treid
