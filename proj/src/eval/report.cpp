#include "eduvsum/eval/report.hpp"

#include <atomic>
#include <cmath>
#include <fstream>
#include <thread>

#include <spdlog/spdlog.h>

#include "eduvsum/core/errors.hpp"
#include "eduvsum/model/trainer.hpp"

namespace eduvsum::eval {

using nlohmann::json;

namespace {

VideoPrediction predict_one(const model::FusionModel& model, const EvaluationInput& in, bool round_segments) {
    const auto& bundle = *in.bundle;
    VideoPrediction out;
    out.video_id = bundle.video_id;
    out.frames = model::predict_video(model, bundle);
    std::vector<int> scores;
    for (const auto& d : out.frames) scores.push_back(d.predicted_score);
    out.segments = aggregate_segment_scores(scores, bundle.segment_index, static_cast<int>(in.annotation->scores.size()));
    if (round_segments) {
        for (double& v : out.segments.values) v = std::round(v);
    }
    return out;
}

}  // namespace

json EvaluationReport::to_json() const {
    json videos = json::array();
    for (const auto& v : per_video) {
        videos.push_back({{"video_id", v.video_id},
                          {"top1", v.top1},
                          {"mae_fra", v.mae_fra},
                          {"mae_seg", v.mae_seg},
                          {"inherited_segments", v.inherited_segments}});
    }
    return json{{"model_id", model_id},
                {"split_id", split_id},
                {"top1", top1},
                {"top2", top2},
                {"top3", top3},
                {"mae_fra", mae_fra},
                {"mae_seg", mae_seg},
                {"backbone", backbone},
                {"history", history},
                {"modalities", modalities},
                {"per_video", videos},
                {"config", config}};
}

EvaluationReport EvaluationReport::from_json(const json& j) {
    EvaluationReport r;
    try {
        r.model_id = j.at("model_id").get<std::string>();
        r.split_id = j.at("split_id").get<std::string>();
        r.top1 = j.at("top1").get<double>();
        r.top2 = j.at("top2").get<double>();
        r.top3 = j.at("top3").get<double>();
        r.mae_fra = j.at("mae_fra").get<double>();
        r.mae_seg = j.at("mae_seg").get<double>();
        r.backbone = j.at("backbone").get<std::string>();
        r.history = j.at("history").get<int>();
        r.modalities = j.at("modalities").get<std::string>();
        for (const auto& v : j.at("per_video")) {
            r.per_video.push_back({v.at("video_id").get<std::string>(), v.at("top1").get<double>(),
                                   v.at("mae_fra").get<double>(), v.at("mae_seg").get<double>(),
                                   v.value("inherited_segments", std::vector<int>{})});
        }
        r.config = j.value("config", json::object());
    } catch (const json::exception& e) {
        fail(ErrorKind::Parse, std::string("evaluation report: ") + e.what());
    }
    return r;
}

EvaluationReport evaluate(const model::FusionModel& model, std::span<const EvaluationInput> videos,
                          const EvaluateOptions& options, std::vector<VideoPrediction>* predictions) {
    if (videos.empty()) fail(ErrorKind::InvalidInput, "nothing to evaluate");
    for (const auto& v : videos) {
        if (!v.bundle || !v.annotation) fail(ErrorKind::InvalidInput, "evaluation input without features or labels");
        if (v.bundle->video_id != v.annotation->video_id) {
            fail(ErrorKind::InvalidInput, "features of " + v.bundle->video_id + " paired with labels of " +
                                              v.annotation->video_id);
        }
    }

    // Videos are independent; results land in input order whatever the worker count.
    std::vector<VideoPrediction> results(videos.size());
    const int workers = std::max(1, std::min<int>(options.jobs, static_cast<int>(videos.size())));
    if (workers == 1) {
        for (std::size_t i = 0; i < videos.size(); ++i) results[i] = predict_one(model, videos[i], options.round_segments);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::exception_ptr> errors(workers);
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w) {
            pool.emplace_back([&, w] {
                try {
                    for (std::size_t i; (i = next++) < videos.size();) {
                        results[i] = predict_one(model, videos[i], options.round_segments);
                    }
                } catch (...) {
                    errors[w] = std::current_exception();
                }
            });
        }
        for (auto& t : pool) t.join();
        for (auto& e : errors)
            if (e) std::rethrow_exception(e);
    }

    EvaluationReport report;
    report.model_id = options.model_id;
    report.split_id = options.split_id;
    report.backbone = model.config().visual_backend;
    report.history = model.config().history;
    report.modalities = model.config().modalities.to_string();
    report.config = options.config;

    std::vector<PredictionDistribution> all_frames;
    std::vector<int> all_labels, all_scores, all_truth;
    std::vector<double> all_segments;
    std::vector<int> all_segment_truth;
    for (std::size_t i = 0; i < videos.size(); ++i) {
        const auto& in = videos[i];
        auto& pred = results[i];
        const auto& ann = *in.annotation;
        std::vector<int> labels, scores, truth;
        for (std::size_t t = 0; t < pred.frames.size(); ++t) {
            const int gt = ann.scores.at(in.bundle->segment_index[t]);
            labels.push_back(gt - 1);
            truth.push_back(gt);
            scores.push_back(pred.frames[t].predicted_score);
        }
        VideoResult vr;
        vr.video_id = pred.video_id;
        vr.top1 = top_k_accuracy(pred.frames, labels, 1);
        vr.mae_fra = mae_frame(scores, ann, in.bundle->segment_index);
        vr.mae_seg = mae_segment(pred.segments.values, ann.scores);
        vr.inherited_segments = pred.segments.inherited;
        if (!vr.inherited_segments.empty()) {
            spdlog::warn("{}: {} segment(s) had no sampled frames and inherit a neighbour's prediction", vr.video_id,
                         vr.inherited_segments.size());
        }
        pred.top1 = vr.top1;
        report.per_video.push_back(vr);

        all_frames.insert(all_frames.end(), pred.frames.begin(), pred.frames.end());
        all_labels.insert(all_labels.end(), labels.begin(), labels.end());
        all_scores.insert(all_scores.end(), scores.begin(), scores.end());
        all_truth.insert(all_truth.end(), truth.begin(), truth.end());
        all_segments.insert(all_segments.end(), pred.segments.values.begin(), pred.segments.values.end());
        all_segment_truth.insert(all_segment_truth.end(), ann.scores.begin(), ann.scores.end());
    }
    report.top1 = top_k_accuracy(all_frames, all_labels, 1);
    report.top2 = top_k_accuracy(all_frames, all_labels, 2);
    report.top3 = top_k_accuracy(all_frames, all_labels, 3);
    long long abs_sum = 0;
    for (std::size_t n = 0; n < all_scores.size(); ++n) abs_sum += std::abs(all_scores[n] - all_truth[n]);
    report.mae_fra = static_cast<double>(abs_sum) / static_cast<double>(all_scores.size());
    report.mae_seg = mae_segment(all_segments, all_segment_truth);
    if (predictions) *predictions = std::move(results);
    return report;
}

void write_report(const EvaluationReport& report, const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::trunc);
    if (!out) fail(ErrorKind::Io, "cannot write " + path.string());
    out << report.to_json().dump(2) << '\n';
    if (!out) fail(ErrorKind::Io, "short write to " + path.string());
}

}  // namespace eduvsum::eval
