#include "eduvsum/pipeline/commands.hpp"

#include <atomic>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include <spdlog/fmt/fmt.h>
#include <spdlog/spdlog.h>

#include "eduvsum/core/errors.hpp"
#include "eduvsum/core/manifest.hpp"
#include "eduvsum/core/rng.hpp"
#include "eduvsum/core/segments.hpp"
#include "eduvsum/core/split.hpp"
#include "eduvsum/eval/plot.hpp"
#include "eduvsum/features/cache.hpp"
#include "eduvsum/features/extractor.hpp"
#include "eduvsum/model/archive.hpp"

// After Eigen: <resolv.h>, pulled in here, defines a _res macro.
#include <httplib.h>

namespace eduvsum::pipeline {

using nlohmann::json;

namespace {

constexpr const char* kModelFile = "model.eduvsum";

void write_json(const std::filesystem::path& path, const json& j) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::trunc);
    if (!out) fail(ErrorKind::Io, "cannot write " + path.string());
    out << j.dump(2) << '\n';
    if (!out) fail(ErrorKind::Io, "short write to " + path.string());
}

std::string hex64(std::uint64_t v) { return fmt::format("{:016x}", v); }

std::string file_digest(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    const std::string data = buf.str();
    return fmt::format("{:08x}", features::crc32_of(data.data(), data.size()));
}

std::filesystem::path model_path_or_default(const RunConfig& config, const std::filesystem::path& path) {
    return path.empty() ? config.out / kModelFile : path;
}

std::array<int, 3> feature_dims(const RunConfig& config) {
    const auto fc = config.feature_config();
    return {fc.visual.output_dim, fc.audio.output_dim, fc.text.output_dim};
}

bool has_modalities(const features::FeatureBundle& bundle, const features::ModalitySet& wanted) {
    return bundle.present.includes(wanted);
}

struct LoadedVideo {
    features::FeatureBundle bundle;
    const AnnotationSet* annotation = nullptr;
};

// Features and labels for the given ids, leaving out videos that lack an
// enabled modality.
std::vector<LoadedVideo> load_annotated(const RunConfig& config, const DatasetManifest& manifest,
                                        const std::vector<std::string>& ids, const char* purpose) {
    const auto wanted = features::ModalitySet::parse(config.modalities);
    std::vector<LoadedVideo> out;
    for (const auto& id : ids) {
        LoadedVideo v{load_features(config, id), manifest.find_annotation(id)};
        if (!v.annotation) continue;
        if (!has_modalities(v.bundle, wanted)) {
            spdlog::warn("{}: has modalities {} but {} needs {}; skipped", id, v.bundle.present.to_string(), purpose,
                         wanted.to_string());
            continue;
        }
        out.push_back(std::move(v));
    }
    if (out.empty()) fail(ErrorKind::InvalidInput, std::string("no usable videos for ") + purpose);
    return out;
}

}  // namespace

int exit_code_for(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::Io:
        case ErrorKind::Decode:
        case ErrorKind::BackendLoad:
        case ErrorKind::ModelLoad:
        case ErrorKind::Checksum: return 2;
        case ErrorKind::TrainingDivergence: return 3;
        default: return 1;
    }
}

IngestSummary cmd_ingest(const RunConfig& config) {
    config.validate();
    const auto manifest = load_manifest(config.dataset);
    IngestSummary summary;
    if (manifest.videos.empty()) {
        spdlog::info("manifest has no videos; nothing to ingest");
        return summary;
    }
    features::ExtractorOptions opts;
    opts.config = config.feature_config();
    opts.weights_dir = config.weights_dir;
    opts.text_model_dir = config.text_model_dir;
    if (config.save_frames) opts.frame_cache_root = config.cache;
    const features::FeatureExtractor extractor(opts);
    const auto fp = opts.config.fingerprint();
    const auto media_root = config.resolved_media_root();

    std::mutex mutex;
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t i; (i = next++) < manifest.videos.size();) {
            const auto& video = manifest.videos[i];
            try {
                if (features::load_cached(video.video_id, fp, config.cache)) {
                    std::lock_guard lock(mutex);
                    ++summary.cache_hits;
                    continue;
                }
                const auto bundle = extractor.extract(video, media_root);
                features::cache_features(bundle, fp, config.cache);
                std::lock_guard lock(mutex);
                ++summary.extracted;
                spdlog::info("{}: {} frames, modalities {}", video.video_id, bundle.frame_count(),
                             bundle.present.to_string());
            } catch (const std::exception& e) {
                std::lock_guard lock(mutex);
                spdlog::error("{}: {}", video.video_id, e.what());
                summary.failures.push_back(video.video_id + ": " + e.what());
            }
        }
    };
    const int workers = std::max(1, std::min<int>(config.jobs, static_cast<int>(manifest.videos.size())));
    std::vector<std::thread> pool;
    for (int w = 1; w < workers; ++w) pool.emplace_back(work);
    work();
    for (auto& t : pool) t.join();
    std::sort(summary.failures.begin(), summary.failures.end());
    spdlog::info("ingest: {} extracted, {} cached, {} failed", summary.extracted, summary.cache_hits,
                 summary.failures.size());
    return summary;
}

features::FeatureBundle load_features(const RunConfig& config, const std::string& video_id) {
    const auto fc = config.feature_config();
    auto bundle = features::load_cached(video_id, fc.fingerprint(), config.cache);
    if (!bundle) {
        fail(ErrorKind::Io, "no cached features for " + video_id + " with backbone " + config.visual_backend + " in " +
                                config.cache.string() + "; run `eduvsum ingest` with the same settings first");
    }
    return std::move(*bundle);
}

SplitSpec make_split(const RunConfig& config, const DatasetManifest& manifest) {
    DatasetManifest annotated;
    for (const auto& v : manifest.videos)
        if (manifest.find_annotation(v.video_id)) annotated.videos.push_back(v);
    if (annotated.videos.empty()) fail(ErrorKind::InvalidInput, "manifest has no annotated videos");
    return split_dataset(annotated, config.train_fraction, config.seed);
}

TrainSummary cmd_train(const RunConfig& config) {
    config.validate();
    const auto manifest = load_manifest(config.dataset);
    const auto split = make_split(config, manifest);
    auto videos = load_annotated(config, manifest, split.train_ids, "training");

    std::vector<model::LabeledVideo> labeled;
    for (const auto& v : videos) labeled.push_back({&v.bundle, model::frame_labels(v.bundle, v.annotation->scores)});
    const auto mc = config.model_config(feature_dims(config));
    spdlog::info("training on {} videos, modalities {}, h={}, {} parameters", labeled.size(),
                 mc.modalities.to_string(), mc.history, model::expected_parameter_count(mc));
    auto result = model::train(mc, labeled, {}, [&](int epoch, double loss) {
        spdlog::info("epoch {}/{} loss {:.5f}", epoch + 1, mc.epochs, loss);
    });

    TrainSummary summary{config.out / kModelFile, std::move(result)};
    model::save_model(summary.result.model, summary.model_path);
    write_json(config.out / "loss.json", {{"initial_loss", summary.result.initial_loss},
                                          {"epoch_loss", summary.result.epoch_loss},
                                          {"model", mc.to_json()},
                                          {"config", config.to_json()}});
    write_json(config.out / "split.json", to_json(split));
    return summary;
}

eval::EvaluationReport cmd_eval(const RunConfig& config, const std::filesystem::path& model_path, bool plots) {
    config.validate();
    const auto path = model_path_or_default(config, model_path);
    if (!std::filesystem::exists(path)) {
        fail(ErrorKind::Io, "no model at " + path.string() + "; run `eduvsum train` first");
    }
    const auto model = model::load_model(path);
    RunConfig effective = config;
    effective.modalities = model.config().modalities.to_string();
    const auto manifest = load_manifest(config.dataset);
    const auto split = make_split(config, manifest);
    const auto videos = load_annotated(effective, manifest, split.test_ids, "evaluation");

    std::vector<eval::EvaluationInput> inputs;
    for (const auto& v : videos) inputs.push_back({&v.bundle, v.annotation});
    eval::EvaluateOptions opts;
    opts.model_id = file_digest(path);
    opts.split_id = hex64(fnv1a64(to_json(split).dump()));
    opts.round_segments = config.round_segments;
    opts.jobs = config.jobs;
    opts.config = effective.to_json();
    opts.config["model"] = model.config().to_json();
    std::vector<eval::VideoPrediction> predictions;
    auto report = eval::evaluate(model, inputs, opts, &predictions);
    eval::write_report(report, config.out / "report.json");
    if (plots) {
        for (std::size_t i = 0; i < predictions.size(); ++i) {
            const auto& p = predictions[i];
            eval::plot_prediction_curves(inputs[i].annotation->scores, p.segments.values,
                                         fmt::format("{}  top-1 {:.0f}%", p.video_id, p.top1),
                                         config.out / "curves" / (p.video_id + ".png"));
        }
    }
    spdlog::info("top-1 {:.2f}  top-2 {:.2f}  top-3 {:.2f}  avg_fra {:.3f}  avg_seg {:.3f}", report.top1, report.top2,
                 report.top3, report.mae_fra, report.mae_seg);
    return report;
}

std::filesystem::path cmd_predict(const RunConfig& config, const std::string& video_id,
                                  const std::filesystem::path& model_path) {
    config.validate();
    const auto manifest = load_manifest(config.dataset);
    const auto* video = manifest.find_video(video_id);
    if (!video) fail(ErrorKind::NotFound, "video " + video_id + " is not in " + config.dataset.string());
    const auto path = model_path_or_default(config, model_path);
    if (!std::filesystem::exists(path)) {
        fail(ErrorKind::Io, "no model at " + path.string() + "; run `eduvsum train` first");
    }
    const auto model = model::load_model(path);
    const auto bundle = load_features(config, video_id);
    const auto frames = model::predict_video(model, bundle);

    std::vector<int> scores;
    for (const auto& d : frames) scores.push_back(d.predicted_score);
    const int n_segments = segment_count(video->duration, config.segment_length);
    auto segments = eval::aggregate_segment_scores(scores, bundle.segment_index, n_segments);
    if (config.round_segments)
        for (double& v : segments.values) v = std::round(v);

    json frame_json = json::array();
    for (std::size_t t = 0; t < frames.size(); ++t) {
        frame_json.push_back({{"timestamp", bundle.timestamps[t]},
                              {"segment_index", bundle.segment_index[t]},
                              {"score", frames[t].predicted_score},
                              {"probs", frames[t].probs}});
    }
    const auto out = config.out / "predictions" / (video_id + ".json");
    write_json(out, {{"video_id", video_id},
                     {"segment_scores", segments.values},
                     {"inherited_segments", segments.inherited},
                     {"frames", frame_json},
                     {"model_id", file_digest(path)},
                     {"config", config.to_json()}});
    if (const auto* ann = manifest.find_annotation(video_id)) {
        std::vector<int> labels;
        for (int seg : bundle.segment_index) labels.push_back(ann->scores.at(seg) - 1);
        const double top1 = eval::top_k_accuracy(frames, labels, 1);
        eval::plot_prediction_curves(ann->scores, segments.values, fmt::format("{}  top-1 {:.0f}%", video_id, top1),
                                     config.out / "curves" / (video_id + ".png"));
    } else {
        spdlog::info("{} has no annotation; skipping the curve plot", video_id);
    }
    return out;
}

eval::AblationTable cmd_ablate(const RunConfig& config, const AblationGrid& grid) {
    if (grid.backbones.empty() || grid.histories.empty() || grid.modality_sets.empty()) {
        fail(ErrorKind::InvalidConfig, "ablation grid has an empty axis");
    }
    const auto manifest = load_manifest(config.dataset);
    const auto split = make_split(config, manifest);
    // Fail before any training if a backbone was never ingested.
    for (const auto& b : grid.backbones) {
        RunConfig probe = config;
        probe.visual_backend = b;
        load_features(probe, split.train_ids.front());
    }
    std::vector<eval::EvaluationReport> reports;
    for (const auto& backbone : grid.backbones) {
        for (int h : grid.histories) {
            for (const auto& mods : grid.modality_sets) {
                RunConfig run = config;
                run.visual_backend = backbone;
                run.history = h;
                run.modalities = features::ModalitySet::parse(mods).to_string();
                std::string tag = run.modalities;
                std::erase(tag, ',');
                run.out = config.out / "ablation" / fmt::format("{}_h{}_{}", backbone, h, tag);
                spdlog::info("ablation: {} h={} {}", backbone, h, run.modalities);
                cmd_train(run);
                reports.push_back(cmd_eval(run, {}, false));
            }
        }
    }
    auto table = eval::build_ablation_table(reports);
    eval::write_ablation(table, config.out / "ablation.csv", config.out / "ablation.txt");
    return table;
}

ExportSummary cmd_export(const std::string& source, bool allow_partial, const std::filesystem::path& out_path) {
    ExportSummary summary;
    if (source.rfind("http://", 0) == 0 || source.rfind("https://", 0) == 0) {
        httplib::Client client(source);
        client.set_connection_timeout(10);
        auto res = client.Get("/export?partial=true");
        if (!res) fail(ErrorKind::Io, "cannot reach " + source + ": " + httplib::to_string(res.error()));
        if (res->status != 200) fail(ErrorKind::Io, source + "/export answered " + std::to_string(res->status));
        summary.manifest = parse_manifest(res->body, source + "/export");
        for (const auto& id : summary.manifest.partial_video_ids) summary.incomplete.push_back(id + ": partially scored");
        if (!allow_partial && !summary.manifest.partial_video_ids.empty()) {
            auto& m = summary.manifest;
            std::erase_if(m.videos, [&](const VideoRecord& v) {
                return std::find(m.partial_video_ids.begin(), m.partial_video_ids.end(), v.video_id) !=
                       m.partial_video_ids.end();
            });
            m.partial_video_ids.clear();
        }
    } else {
        if (!std::filesystem::exists(source)) fail(ErrorKind::Io, "annotation store " + source + " does not exist");
        service::AnnotationStore store(source);
        auto result = store.export_manifest(allow_partial);
        summary.manifest = std::move(result.manifest);
        summary.incomplete = std::move(result.incomplete);
    }
    for (const auto& line : summary.incomplete) {
        if (allow_partial) spdlog::warn("exported as partial: {}", line);
        else spdlog::warn("excluded, incomplete: {}", line);
    }
    if (summary.manifest.videos.empty()) spdlog::warn("export is empty: no fully annotated videos");
    save_manifest(summary.manifest, out_path);
    return summary;
}

void cmd_serve(const ServeOptions& options) {
    service::AnnotationStore store(options.db);
    if (options.dataset) {
        const auto manifest = load_manifest(*options.dataset);
        store.import_videos(manifest.videos);
        spdlog::info("imported {} videos from {}", manifest.videos.size(), options.dataset->string());
    }
    service::AnnotationServer server(store, options.server);
    server.listen();
}

}  // namespace eduvsum::pipeline
