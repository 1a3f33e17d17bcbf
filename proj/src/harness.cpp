#include "treid/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "treid/error.hpp"
#include "treid/parallel.hpp"
#include "treid/rng.hpp"

namespace treid {

namespace {

using ordered_json = nlohmann::ordered_json;

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string dims_label(const DimsChoice& d) {
    if (!d) return "auto";
    return std::to_string(d->first) + "x" + std::to_string(d->second);
}

ProjectionSet identity_projections(std::size_t s, std::size_t n) {
    ProjectionSet p;
    p.u1 = Matrix::identity(s);
    p.u2 = Matrix::identity(n);
    p.stop_reason = StopReason::converged;
    return p;
}

}  // namespace

std::pair<std::vector<std::string>, std::vector<std::string>> split_trial(
    const std::vector<std::string>& identities, const ExperimentConfig& cfg,
    std::size_t trial_index) {
    if (identities.size() < 2) {
        throw DataError("need at least two identities to split, found " +
                        std::to_string(identities.size()));
    }
    std::size_t train_count =
        cfg.train_count ? *cfg.train_count
                        : static_cast<std::size_t>(std::llround(
                              cfg.train_fraction * static_cast<double>(identities.size())));
    if (train_count < 2 || train_count >= identities.size()) {
        throw DataError("train split of " + std::to_string(train_count) + " out of " +
                        std::to_string(identities.size()) +
                        " identities leaves no usable train or test set");
    }
    std::vector<std::string> pool = identities;
    Xoshiro256pp rng = Xoshiro256pp::for_stream(cfg.rng_seed, trial_index);
    shuffle(pool, rng);
    std::vector<std::string> train(pool.begin(), pool.begin() + static_cast<long>(train_count));
    std::vector<std::string> test(pool.begin() + static_cast<long>(train_count), pool.end());
    return {std::move(train), std::move(test)};
}

ExperimentReport run_experiment(std::span<const FeatureBlock> blocks, const SampleLabels& labels,
                                const ExperimentConfig& cfg) {
    const auto t_start = std::chrono::steady_clock::now();
    if (cfg.trials < 1) throw ArgumentError("trials must be >= 1");
    if (!blocks.empty() && blocks.front().samples() != labels.size()) {
        throw DataError("label file has " + std::to_string(labels.size()) +
                        " rows but features have " + std::to_string(blocks.front().samples()) +
                        " samples");
    }

    const std::vector<std::string> cameras = labels.cameras();
    if (cameras.size() != 2) {
        throw DataError("evaluation needs exactly two cameras, found " +
                        std::to_string(cameras.size()));
    }
    ExperimentReport report;
    report.gallery_camera = cfg.gallery_camera.value_or(cameras[0]);
    if (report.gallery_camera != cameras[0] && report.gallery_camera != cameras[1]) {
        throw DataError("gallery camera '" + report.gallery_camera +
                        "' does not occur in the labels");
    }
    report.probe_camera = report.gallery_camera == cameras[0] ? cameras[1] : cameras[0];

    // Fusion is unsupervised and per-sample, so it runs once over all
    // samples; TXQDA only ever sees training identities.
    const Tensor3 fused = hdff_pipeline(blocks, cfg.fusion);
    const std::vector<std::string> identities = labels.persons();
    report.samples = labels.size();
    report.identities = identities.size();

    std::vector<std::string> warnings;
    const std::size_t trial_threads = std::min(cfg.threads, cfg.trials);
    const std::size_t match_threads = cfg.trials == 1 ? std::max<std::size_t>(cfg.threads, 1) : 1;

    for (const DimsChoice& dims : cfg.dims_sweep) {
        SweepResult sweep;
        sweep.dims_label = dims_label(dims);
        sweep.trials.resize(cfg.trials);

        parallel_for(cfg.trials, trial_threads, [&](std::size_t trial) {
            auto [train_ids, test_ids] = split_trial(identities, cfg, trial);
            const std::unordered_set<std::string> train_set(train_ids.begin(), train_ids.end());
            const std::unordered_set<std::string> test_set(test_ids.begin(), test_ids.end());

            std::vector<std::size_t> train_idx, gallery_idx, probe_idx;
            for (std::size_t i = 0; i < labels.size(); ++i) {
                if (train_set.count(labels.person_ids[i])) {
                    train_idx.push_back(i);
                } else if (test_set.count(labels.person_ids[i])) {
                    (labels.camera_ids[i] == report.gallery_camera ? gallery_idx : probe_idx)
                        .push_back(i);
                }
            }
            if (gallery_idx.empty() || probe_idx.empty()) {
                throw DataError("trial " + std::to_string(trial) +
                                ": empty gallery or probe set");
            }

            TrialResult& out = sweep.trials[trial];
            const auto t_fit = std::chrono::steady_clock::now();
            ProjectionSet model;
            if (cfg.learning) {
                CrossViewSet train;
                train.tensor = fused.select_slices(train_idx);
                train.person_ids = labels.select(train_idx).person_ids;
                train.camera_ids = labels.select(train_idx).camera_ids;
                train.view_a_camera = report.gallery_camera;
                TxqdaConfig txqda_cfg = cfg.txqda;
                txqda_cfg.target_dims = dims ? dims : cfg.txqda.target_dims;
                model = fit(train, txqda_cfg);
            } else {
                model = identity_projections(fused.dim(1), fused.dim(2));
            }
            out.fit_seconds = seconds_since(t_fit);
            out.chosen_s = model.u1.cols();
            out.chosen_n = model.u2.cols();
            out.objective1 = model.objective1;
            out.objective2 = model.objective2;

            const auto t_match = std::chrono::steady_clock::now();
            const Tensor3 gallery = transform(model, fused.select_slices(gallery_idx));
            const Tensor3 probes = transform(model, fused.select_slices(probe_idx));
            const SampleLabels gal_labels = labels.select(gallery_idx);
            const SampleLabels probe_labels = labels.select(probe_idx);
            const RankingResult ranking =
                score_and_rank(gallery, gal_labels.person_ids, probes, probe_labels.person_ids,
                               match_threads);
            out.curve = cmc(ranking, gallery_idx.size());
            out.match_seconds = seconds_since(t_match);

            if (trial == 0) {
                for (const auto& w : model.warnings) warnings.push_back(w);
            }
        });

        // Aggregate over trials: truncate to the shortest curve, then mean
        // and population standard deviation per rank.
        std::size_t min_len = sweep.trials.front().curve.values.size();
        for (const auto& t : sweep.trials)
            min_len = std::min(min_len, t.curve.values.size());
        sweep.mean_curve.values.assign(min_len, 0.0);
        sweep.stddev.assign(min_len, 0.0);
        for (const auto& t : sweep.trials)
            for (std::size_t r = 0; r < min_len; ++r)
                sweep.mean_curve.values[r] += t.curve.values[r];
        for (double& v : sweep.mean_curve.values) v /= static_cast<double>(cfg.trials);
        for (const auto& t : sweep.trials)
            for (std::size_t r = 0; r < min_len; ++r) {
                const double d = t.curve.values[r] - sweep.mean_curve.values[r];
                sweep.stddev[r] += d * d;
            }
        for (double& v : sweep.stddev) v = std::sqrt(v / static_cast<double>(cfg.trials));

        report.sweeps.push_back(std::move(sweep));
    }

    for (const auto& w : warnings) {
        if (std::find(report.warnings.begin(), report.warnings.end(), w) ==
            report.warnings.end()) {
            report.warnings.push_back(w);
        }
    }
    report.total_seconds = seconds_since(t_start);
    return report;
}

std::pair<std::vector<FeatureBlock>, SampleLabels> generate_synthetic(const SyntheticSpec& spec) {
    if (spec.identities == 0 || spec.samples_per_identity_per_view == 0 || spec.dim_a == 0 ||
        spec.dim_b == 0) {
        throw ArgumentError("synthetic spec counts must be positive");
    }
    if (spec.class_signal < 0.0 || spec.view_offset < 0.0 || spec.noise < 0.0) {
        throw ArgumentError("synthetic spec strengths must be >= 0");
    }
    const std::size_t total = spec.dim_a + spec.dim_b;

    GaussianStream means(Xoshiro256pp::for_stream(spec.seed, 1));
    GaussianStream offsets(Xoshiro256pp::for_stream(spec.seed, 2));
    GaussianStream noise(Xoshiro256pp::for_stream(spec.seed, 3));

    std::vector<std::vector<double>> class_mean(spec.identities, std::vector<double>(total));
    for (auto& mu : class_mean)
        for (double& v : mu) v = spec.class_signal * means.next();
    std::vector<std::vector<double>> view_offset(2, std::vector<double>(total));
    for (auto& off : view_offset)
        for (double& v : off) v = spec.view_offset * offsets.next();

    std::vector<FeatureBlock> blocks(2);
    blocks[0].source_tag = "synthA";
    blocks[1].source_tag = "synthB";
    SampleLabels labels;

    std::size_t sample_index = 0;
    char buf[32];
    for (std::size_t p = 0; p < spec.identities; ++p) {
        for (std::size_t view = 0; view < 2; ++view) {
            for (std::size_t s = 0; s < spec.samples_per_identity_per_view; ++s) {
                std::vector<double> x(total);
                for (std::size_t i = 0; i < total; ++i) {
                    x[i] = class_mean[p][i] + view_offset[view][i] + spec.noise * noise.next();
                }
                blocks[0].vectors.emplace_back(x.begin(), x.begin() + static_cast<long>(spec.dim_a));
                blocks[1].vectors.emplace_back(x.begin() + static_cast<long>(spec.dim_a), x.end());
                std::snprintf(buf, sizeof(buf), "s%04zu", sample_index++);
                labels.sample_ids.emplace_back(buf);
                std::snprintf(buf, sizeof(buf), "p%03zu", p);
                labels.person_ids.emplace_back(buf);
                labels.camera_ids.emplace_back(view == 0 ? "cam1" : "cam2");
            }
        }
    }
    return {std::move(blocks), std::move(labels)};
}

std::string markdown_table(const ExperimentReport& report, const ExperimentConfig& cfg,
                           const std::string& config_name) {
    std::string out = "## CMC scores (%) - " + config_name + "\n\n";
    std::vector<int> usable_ranks;
    std::size_t min_len = report.sweeps.empty() ? 0 : report.sweeps.front().mean_curve.values.size();
    for (const auto& s : report.sweeps) min_len = std::min(min_len, s.mean_curve.values.size());
    for (int k : cfg.ranks)
        if (k >= 1 && static_cast<std::size_t>(k) <= min_len) usable_ranks.push_back(k);

    out += "| Dim. |";
    for (int k : usable_ranks) out += " Rank-" + std::to_string(k) + " |";
    out += "\n|---|";
    for (std::size_t i = 0; i < usable_ranks.size(); ++i) out += "---|";
    out += "\n";
    for (const auto& sweep : report.sweeps) {
        out += "| " + sweep.dims_label + " |";
        for (const auto& cell : format_rank_row(sweep.mean_curve, usable_ranks)) {
            out += " " + cell + " |";
        }
        out += "\n";
    }
    return out;
}

std::string summary_json_text(const ExperimentReport& report, const ExperimentConfig& cfg,
                              const std::string& config_name, bool with_timings) {
    ordered_json j;
    j["configuration"] = config_name;
    j["trials"] = cfg.trials;
    j["seed"] = cfg.rng_seed;
    j["samples"] = report.samples;
    j["identities"] = report.identities;
    j["gallery_camera"] = report.gallery_camera;
    j["probe_camera"] = report.probe_camera;
    j["ranks"] = cfg.ranks;

    ordered_json sweeps = ordered_json::array();
    for (const auto& sweep : report.sweeps) {
        ordered_json s;
        s["dims"] = sweep.dims_label;
        ordered_json chosen = ordered_json::array();
        for (const auto& t : sweep.trials) chosen.push_back({t.chosen_s, t.chosen_n});
        s["chosen_dims"] = chosen;
        ordered_json by_rank = ordered_json::object();
        for (int k : cfg.ranks) {
            if (k < 1 || static_cast<std::size_t>(k) > sweep.mean_curve.values.size()) continue;
            ordered_json cell;
            cell["mean_percent"] = 100.0 * sweep.mean_curve.values[static_cast<std::size_t>(k) - 1];
            cell["stddev_percent"] = 100.0 * sweep.stddev[static_cast<std::size_t>(k) - 1];
            by_rank["rank-" + std::to_string(k)] = cell;
        }
        s["scores"] = by_rank;
        s["cmc_mean"] = sweep.mean_curve.values;
        s["cmc_stddev"] = sweep.stddev;
        ordered_json trial_rank1 = ordered_json::array();
        for (const auto& t : sweep.trials)
            trial_rank1.push_back(t.curve.values.empty() ? 0.0 : 100.0 * t.curve.values[0]);
        s["per_trial_rank1_percent"] = trial_rank1;
        if (with_timings) {
            ordered_json fit_s = ordered_json::array(), match_s = ordered_json::array();
            for (const auto& t : sweep.trials) {
                fit_s.push_back(t.fit_seconds);
                match_s.push_back(t.match_seconds);
            }
            s["fit_seconds"] = fit_s;
            s["match_seconds"] = match_s;
        }
        sweeps.push_back(s);
    }
    j["results"] = sweeps;
    j["warnings"] = report.warnings;
    if (with_timings) j["total_seconds"] = report.total_seconds;
    return j.dump(2) + "\n";
}

}  // namespace treid
