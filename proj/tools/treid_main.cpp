// treid - tensor feature fusion, cross-view subspace learning and
// re-identification evaluation, end to end from the command line.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "treid/config.hpp"
#include "treid/error.hpp"
#include "treid/harness.hpp"
#include "treid/io.hpp"
#include "treid/parallel.hpp"
#include "treid/version.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

struct CommonOpts {
    std::size_t threads = treid::default_threads();
    bool verbose = false;
};

void log_warnings(const std::vector<std::string>& warnings) {
    for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
}

treid::DimsChoice parse_dims_token(const std::string& token) {
    if (token == "auto") return std::nullopt;
    const std::size_t x = token.find('x');
    if (x == std::string::npos) {
        throw treid::ArgumentError("dims must be 'auto' or '<s>x<n>', got '" + token + "'");
    }
    try {
        return std::make_pair(std::stoull(token.substr(0, x)), std::stoull(token.substr(x + 1)));
    } catch (const std::exception&) {
        throw treid::ArgumentError("dims must be 'auto' or '<s>x<n>', got '" + token + "'");
    }
}

std::vector<treid::DimsChoice> parse_dims_list(const std::string& list) {
    std::vector<treid::DimsChoice> out;
    std::size_t start = 0;
    while (start <= list.size()) {
        std::size_t comma = list.find(',', start);
        if (comma == std::string::npos) comma = list.size();
        const std::string token = list.substr(start, comma - start);
        if (!token.empty()) out.push_back(parse_dims_token(token));
        start = comma + 1;
    }
    if (out.empty()) throw treid::ArgumentError("empty dims list");
    return out;
}

treid::Normalize parse_normalize(const std::string& mode) {
    if (mode == "none") return treid::Normalize::none;
    if (mode == "l2" || mode == "l2_per_vector") return treid::Normalize::l2_per_vector;
    throw treid::ArgumentError("normalize must be 'l2' or 'none', got '" + mode + "'");
}

std::vector<treid::FeatureBlock> load_blocks(const std::vector<std::string>& paths) {
    std::vector<treid::FeatureBlock> blocks;
    blocks.reserve(paths.size());
    for (const auto& p : paths) blocks.push_back(treid::read_features(p));
    return blocks;
}

std::string blocks_name(const std::vector<treid::FeatureBlock>& blocks) {
    std::string name;
    for (const auto& b : blocks) {
        if (!name.empty()) name += "+";
        name += b.source_tag;
    }
    return name;
}

// --- fuse ------------------------------------------------------------------

struct FuseOpts {
    std::vector<std::string> features;
    std::string labels;
    std::string out;
    std::size_t n_parts = 4;
    std::string normalize = "l2";
};

int cmd_fuse(const FuseOpts& opt) {
    const auto blocks = load_blocks(opt.features);
    const treid::SampleLabels labels = treid::read_labels(opt.labels);
    if (!blocks.empty() && blocks.front().samples() != labels.size()) {
        throw treid::DataError("label file has " + std::to_string(labels.size()) +
                               " rows but features have " +
                               std::to_string(blocks.front().samples()) + " samples");
    }
    treid::FusionConfig cfg;
    cfg.n_parts = opt.n_parts;
    cfg.normalize = parse_normalize(opt.normalize);
    const treid::Tensor3 fused = treid::hdff_pipeline(blocks, cfg);
    treid::write_tensor(opt.out, fused);

    ordered_json sidecar;
    sidecar["format"] = "hdff-sidecar";
    sidecar["version"] = 1;
    sidecar["n_parts"] = cfg.n_parts;
    sidecar["normalize"] = cfg.normalize == treid::Normalize::none ? "none" : "l2_per_vector";
    ordered_json blocks_meta = ordered_json::array();
    for (const auto& b : blocks) blocks_meta.push_back({{"tag", b.source_tag}, {"dim", b.dim()}});
    sidecar["blocks"] = blocks_meta;
    sidecar["samples"] = fused.dim(3);
    sidecar["fused_dims"] = {fused.dim(1), fused.dim(2), fused.dim(3)};
    treid::atomic_write_text(opt.out + ".json", sidecar.dump(2) + "\n");

    std::cerr << "fused " << blocks.size() << " block(s) into " << fused.dim(1) << "x"
              << fused.dim(2) << "x" << fused.dim(3) << " -> " << opt.out << "\n";
    return 0;
}

// --- train -----------------------------------------------------------------

struct TrainOpts {
    std::string tensor;
    std::string labels;
    std::string out;
    std::string dims = "auto";
    std::string lambda = "auto";
    std::size_t max_iters = 5;
    double tol = 1e-6;
    std::string gallery_camera;
};

int cmd_train(const TrainOpts& opt, const CommonOpts& common) {
    treid::CrossViewSet set;
    set.tensor = treid::read_tensor(opt.tensor);
    const treid::SampleLabels labels = treid::read_labels(opt.labels);
    if (labels.size() != set.tensor.dim(3)) {
        throw treid::DataError("label file has " + std::to_string(labels.size()) +
                               " rows but tensor has " + std::to_string(set.tensor.dim(3)) +
                               " samples");
    }
    set.person_ids = labels.person_ids;
    set.camera_ids = labels.camera_ids;
    if (!opt.gallery_camera.empty()) set.view_a_camera = opt.gallery_camera;

    treid::TxqdaModel model;
    model.config.target_dims = parse_dims_token(opt.dims);
    if (opt.lambda != "auto") model.config.lambda = std::stod(opt.lambda);
    model.config.max_iters = opt.max_iters;
    model.config.tol = opt.tol;

    model.projections = treid::fit(set, model.config);
    log_warnings(model.projections.warnings);
    treid::write_model(opt.out, model);

    const auto& p = model.projections;
    std::cerr << "trained projections " << p.u1.rows() << "->" << p.u1.cols() << " (mode 1), "
              << p.u2.rows() << "->" << p.u2.cols() << " (mode 2) in " << p.iterations
              << " iteration(s) -> " << opt.out << "\n";
    if (common.verbose) {
        for (std::size_t i = 0; i < p.objective1.size(); ++i) {
            std::cerr << "  iter " << i + 1 << ": objective mode1=" << p.objective1[i]
                      << " mode2=" << p.objective2[i] << "\n";
        }
    }
    return 0;
}

// --- transform ---------------------------------------------------------------

struct TransformOpts {
    std::string tensor;
    std::string model;
    std::string out;
};

int cmd_transform(const TransformOpts& opt) {
    const treid::Tensor3 t = treid::read_tensor(opt.tensor);
    const treid::TxqdaModel model = treid::read_model(opt.model);
    const treid::Tensor3 reduced = treid::transform(model.projections, t);
    treid::write_tensor(opt.out, reduced);
    std::cerr << "projected " << t.dim(1) << "x" << t.dim(2) << "x" << t.dim(3) << " -> "
              << reduced.dim(1) << "x" << reduced.dim(2) << "x" << reduced.dim(3) << " -> "
              << opt.out << "\n";
    return 0;
}

// --- rank --------------------------------------------------------------------

struct RankOpts {
    std::string gallery;
    std::string gallery_labels;
    std::string probes;
    std::string probe_labels;
    std::string out_ranking;
    std::string out_cmc;
    std::size_t k_max = 0;  // 0 = gallery size
};

int cmd_rank(const RankOpts& opt, const CommonOpts& common) {
    const treid::Tensor3 gallery = treid::read_tensor(opt.gallery);
    const treid::Tensor3 probes = treid::read_tensor(opt.probes);
    const treid::SampleLabels gal_labels = treid::read_labels(opt.gallery_labels);
    const treid::SampleLabels probe_labels = treid::read_labels(opt.probe_labels);
    if (gal_labels.size() != gallery.dim(3) || probe_labels.size() != probes.dim(3)) {
        throw treid::DataError("label rows do not match tensor sample counts");
    }
    const treid::RankingResult ranking = treid::score_and_rank(
        gallery, gal_labels.person_ids, probes, probe_labels.person_ids, common.threads);
    if (ranking.degenerate_count > 0) {
        std::cerr << "warning: " << ranking.degenerate_count
                  << " zero-norm vector(s) scored as 0\n";
    }
    const std::size_t k_max = opt.k_max == 0 ? gallery.dim(3) : opt.k_max;
    const treid::CmcCurve curve = treid::cmc(ranking, k_max);
    treid::write_ranking_csv(opt.out_ranking, ranking, probe_labels.sample_ids,
                             gal_labels.sample_ids);
    treid::write_cmc_csv(opt.out_cmc, curve);
    std::cerr << "ranked " << probes.dim(3) << " probes against " << gallery.dim(3)
              << " gallery samples; rank-1 = " << 100.0 * curve.values.front() << "%\n";
    return 0;
}

// --- evaluate ----------------------------------------------------------------

struct EvaluateOpts {
    std::vector<std::string> features;
    std::string labels;
    std::string config;
    std::string out_dir;
    std::optional<std::size_t> trials;
    std::optional<std::uint64_t> seed;
    std::optional<double> train_fraction;
    std::optional<std::size_t> train_count;
    std::string dims;
    std::string ranks;
    std::optional<std::size_t> n_parts;
    std::string normalize;
    std::string lambda;
    std::optional<std::size_t> max_iters;
    std::optional<double> tol;
    std::string gallery_camera;
    bool no_learning = false;
    bool emit_plot_data = false;
    bool emit_timings = false;
};

std::vector<int> parse_rank_list(const std::string& list) {
    std::vector<int> out;
    std::size_t start = 0;
    while (start <= list.size()) {
        std::size_t comma = list.find(',', start);
        if (comma == std::string::npos) comma = list.size();
        const std::string token = list.substr(start, comma - start);
        if (!token.empty()) out.push_back(std::stoi(token));
        start = comma + 1;
    }
    if (out.empty()) throw treid::ArgumentError("empty rank list");
    return out;
}

int cmd_evaluate(const EvaluateOpts& opt, const CommonOpts& common) {
    treid::ExperimentConfig cfg;
    if (!opt.config.empty()) cfg = treid::load_experiment_config(opt.config);

    // Command-line overrides win over the config file.
    if (opt.trials) cfg.trials = *opt.trials;
    if (opt.seed) cfg.rng_seed = *opt.seed;
    if (opt.train_fraction) cfg.train_fraction = *opt.train_fraction;
    if (opt.train_count) cfg.train_count = *opt.train_count;
    if (!opt.dims.empty()) cfg.dims_sweep = parse_dims_list(opt.dims);
    if (!opt.ranks.empty()) cfg.ranks = parse_rank_list(opt.ranks);
    if (opt.n_parts) cfg.fusion.n_parts = *opt.n_parts;
    if (!opt.normalize.empty()) cfg.fusion.normalize = parse_normalize(opt.normalize);
    if (!opt.lambda.empty() && opt.lambda != "auto") cfg.txqda.lambda = std::stod(opt.lambda);
    if (opt.max_iters) cfg.txqda.max_iters = *opt.max_iters;
    if (opt.tol) cfg.txqda.tol = *opt.tol;
    if (!opt.gallery_camera.empty()) cfg.gallery_camera = opt.gallery_camera;
    if (opt.no_learning) cfg.learning = false;
    cfg.threads = common.threads;

    const auto blocks = load_blocks(opt.features);
    const treid::SampleLabels labels = treid::read_labels(opt.labels);
    const std::string name = blocks_name(blocks);

    const treid::ExperimentReport report = treid::run_experiment(blocks, labels, cfg);
    log_warnings(report.warnings);

    fs::create_directories(opt.out_dir);
    const fs::path dir(opt.out_dir);

    for (const auto& sweep : report.sweeps) {
        std::string agg = "rank,mean_probability,stddev_probability\n";
        for (std::size_t r = 0; r < sweep.mean_curve.values.size(); ++r) {
            agg += std::to_string(r + 1) + ',' + treid::format_double(sweep.mean_curve.values[r]) +
                   ',' + treid::format_double(sweep.stddev[r]) + '\n';
        }
        treid::atomic_write_text(dir / ("cmc_" + sweep.dims_label + ".csv"), agg);
        for (std::size_t t = 0; t < sweep.trials.size(); ++t) {
            treid::write_cmc_csv(
                dir / ("trial_" + sweep.dims_label + "_" + std::to_string(t) + ".csv"),
                sweep.trials[t].curve);
        }
        if (opt.emit_plot_data) {
            std::string plot = "rank,probability\n";
            for (std::size_t r = 0; r < sweep.mean_curve.values.size(); ++r) {
                plot += std::to_string(r + 1) + ',' +
                        treid::format_double(sweep.mean_curve.values[r]) + '\n';
            }
            treid::atomic_write_text(dir / ("plot_" + sweep.dims_label + ".csv"), plot);
        }
    }
    treid::atomic_write_text(dir / "results.md", treid::markdown_table(report, cfg, name));
    treid::atomic_write_text(dir / "summary.json",
                             treid::summary_json_text(report, cfg, name, opt.emit_timings));

    std::cerr << "evaluated '" << name << "': " << cfg.trials << " trial(s), "
              << report.identities << " identities, " << report.samples << " samples";
    if (common.verbose || opt.emit_timings) std::cerr << ", " << report.total_seconds << "s";
    std::cerr << "\n";
    std::cout << treid::markdown_table(report, cfg, name);
    return 0;
}

// --- synth -------------------------------------------------------------------

struct SynthOpts {
    std::size_t ids = 20;
    std::size_t samples_per_view = 2;
    std::size_t dim_a = 64;
    std::size_t dim_b = 32;
    double signal = 1.0;
    double view_offset = 5.0;
    double noise = 0.5;
    std::uint64_t seed = 7;
    std::string out_prefix;
};

int cmd_synth(const SynthOpts& opt) {
    treid::SyntheticSpec spec;
    spec.identities = opt.ids;
    spec.samples_per_identity_per_view = opt.samples_per_view;
    spec.dim_a = opt.dim_a;
    spec.dim_b = opt.dim_b;
    spec.class_signal = opt.signal;
    spec.view_offset = opt.view_offset;
    spec.noise = opt.noise;
    spec.seed = opt.seed;

    const auto [blocks, labels] = treid::generate_synthetic(spec);
    treid::write_features(opt.out_prefix + "_a.feat", blocks[0]);
    treid::write_features(opt.out_prefix + "_b.feat", blocks[1]);
    treid::write_labels(opt.out_prefix + ".labels", labels);
    std::cerr << "wrote " << labels.size() << " samples (" << spec.identities
              << " identities) to " << opt.out_prefix << "_{a,b}.feat and " << opt.out_prefix
              << ".labels\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"tensor feature fusion + cross-view subspace learning for re-identification"};
    app.set_version_flag("--version", std::string("treid ") + treid::kVersion);
    app.require_subcommand(1);

    CommonOpts common;
    app.add_option("--threads", common.threads, "worker threads (default: all cores)");
    app.add_flag("-v,--verbose", common.verbose, "verbose progress on stderr");

    FuseOpts fuse_opts;
    auto* fuse = app.add_subcommand("fuse", "fuse feature files into a third-order tensor");
    fuse->add_option("--features", fuse_opts.features, "feature file(s), fused in order")
        ->required()
        ->expected(-1);
    fuse->add_option("--labels", fuse_opts.labels, "label file (sample,person,camera)")->required();
    fuse->add_option("--out", fuse_opts.out, "output tensor path")->required();
    fuse->add_option("--n-parts", fuse_opts.n_parts, "parts per feature vector (default 4)");
    fuse->add_option("--normalize", fuse_opts.normalize, "l2 (default) or none");

    TrainOpts train_opts;
    auto* train = app.add_subcommand("train", "fit TXQDA projections on a fused tensor");
    train->add_option("--tensor", train_opts.tensor, "fused training tensor")->required();
    train->add_option("--labels", train_opts.labels, "label file")->required();
    train->add_option("--out", train_opts.out, "output model path")->required();
    train->add_option("--dims", train_opts.dims, "'auto' or '<s>x<n>' target dims");
    train->add_option("--lambda", train_opts.lambda, "regularizer value or 'auto'");
    train->add_option("--max-iters", train_opts.max_iters, "alternation cap (default 5)");
    train->add_option("--tol", train_opts.tol, "projector convergence threshold");
    train->add_option("--gallery-camera", train_opts.gallery_camera,
                      "camera label treated as view a");

    TransformOpts transform_opts;
    auto* transform = app.add_subcommand("transform", "apply a trained model to a tensor");
    transform->add_option("--tensor", transform_opts.tensor, "input tensor")->required();
    transform->add_option("--model", transform_opts.model, "trained model")->required();
    transform->add_option("--out", transform_opts.out, "output tensor path")->required();

    RankOpts rank_opts;
    auto* rank = app.add_subcommand("rank", "rank probes against a gallery and compute the CMC");
    rank->add_option("--gallery", rank_opts.gallery, "projected gallery tensor")->required();
    rank->add_option("--gallery-labels", rank_opts.gallery_labels, "gallery labels")->required();
    rank->add_option("--probes", rank_opts.probes, "projected probe tensor")->required();
    rank->add_option("--probe-labels", rank_opts.probe_labels, "probe labels")->required();
    rank->add_option("--out-ranking", rank_opts.out_ranking, "ranking CSV path")->required();
    rank->add_option("--out-cmc", rank_opts.out_cmc, "CMC CSV path")->required();
    rank->add_option("--k-max", rank_opts.k_max, "curve length (default: gallery size)");

    EvaluateOpts eval_opts;
    auto* evaluate = app.add_subcommand("evaluate", "run the repeated-trial experiment protocol");
    evaluate->add_option("--features", eval_opts.features, "feature file(s)")
        ->required()
        ->expected(-1);
    evaluate->add_option("--labels", eval_opts.labels, "label file")->required();
    evaluate->add_option("--config", eval_opts.config, "TOML or JSON experiment config");
    evaluate->add_option("--out-dir", eval_opts.out_dir, "output directory")->required();
    evaluate->add_option("--trials", eval_opts.trials, "number of random trials");
    evaluate->add_option("--seed", eval_opts.seed, "RNG seed");
    evaluate->add_option("--train-fraction", eval_opts.train_fraction,
                         "identity fraction used for training");
    evaluate->add_option("--train-count", eval_opts.train_count,
                         "training identity count (overrides fraction)");
    evaluate->add_option("--dims", eval_opts.dims, "sweep, e.g. 'auto' or '50x4,100x4'");
    evaluate->add_option("--ranks", eval_opts.ranks, "report ranks, e.g. '1,5,10,15,20'");
    evaluate->add_option("--n-parts", eval_opts.n_parts, "parts per feature vector");
    evaluate->add_option("--normalize", eval_opts.normalize, "l2 or none");
    evaluate->add_option("--lambda", eval_opts.lambda, "TXQDA regularizer value or 'auto'");
    evaluate->add_option("--max-iters", eval_opts.max_iters, "TXQDA alternation cap");
    evaluate->add_option("--tol", eval_opts.tol, "TXQDA convergence threshold");
    evaluate->add_option("--gallery-camera", eval_opts.gallery_camera,
                         "camera label used as the gallery");
    evaluate->add_flag("--no-learning", eval_opts.no_learning,
                       "raw-cosine baseline without TXQDA");
    evaluate->add_flag("--emit-plot-data", eval_opts.emit_plot_data,
                       "also write rank/probability pairs per sweep entry");
    evaluate->add_flag("--emit-timings", eval_opts.emit_timings,
                       "include wall-clock timings in summary.json (non-reproducible)");

    SynthOpts synth_opts;
    auto* synth = app.add_subcommand("synth", "generate synthetic cross-view feature files");
    synth->add_option("--ids", synth_opts.ids, "identity count (default 20)");
    synth->add_option("--samples-per-view", synth_opts.samples_per_view,
                      "samples per identity per view (default 2)");
    synth->add_option("--dim-a", synth_opts.dim_a, "block A dimensionality (default 64)");
    synth->add_option("--dim-b", synth_opts.dim_b, "block B dimensionality (default 32)");
    synth->add_option("--signal", synth_opts.signal, "class signal strength (default 1.0)");
    synth->add_option("--view-offset", synth_opts.view_offset,
                      "fixed per-view offset strength (default 5.0)");
    synth->add_option("--noise", synth_opts.noise, "per-sample noise level (default 0.5)");
    synth->add_option("--seed", synth_opts.seed, "RNG seed (default 7)");
    synth->add_option("--out-prefix", synth_opts.out_prefix, "output path prefix")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;  // usage errors -> 1; --help/--version -> 0
    }

    try {
        if (fuse->parsed()) return cmd_fuse(fuse_opts);
        if (train->parsed()) return cmd_train(train_opts, common);
        if (transform->parsed()) return cmd_transform(transform_opts);
        if (rank->parsed()) return cmd_rank(rank_opts, common);
        if (evaluate->parsed()) return cmd_evaluate(eval_opts, common);
        if (synth->parsed()) return cmd_synth(synth_opts);
    } catch (const treid::NumericError& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return 3;
    } catch (const treid::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
