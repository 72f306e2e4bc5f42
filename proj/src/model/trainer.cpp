#include "eduvsum/model/trainer.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

#include <spdlog/spdlog.h>

#include "eduvsum/core/errors.hpp"

namespace eduvsum::model {

namespace {

constexpr int kInferenceChunk = 256;

std::vector<const features::FeatureBundle*> bundle_list(std::span<const LabeledVideo> videos) {
    std::vector<const features::FeatureBundle*> out;
    for (const auto& v : videos) out.push_back(v.bundle);
    return out;
}

void check_modalities(const ModelConfig& config, const features::FeatureBundle& bundle) {
    for (Modality m : {Modality::Visual, Modality::Audio, Modality::Text}) {
        if (!config.modalities.contains(m)) continue;
        if (!bundle.present.contains(m)) {
            fail(ErrorKind::Contract, bundle.video_id + ": enabled modality " + features::to_string(m) +
                                          " is missing from its features");
        }
        if (bundle.matrix(m).cols() != config.input_dim(m)) {
            fail(ErrorKind::Contract, bundle.video_id + ": " + features::to_string(m) + " features have width " +
                                          std::to_string(bundle.matrix(m).cols()) + ", model expects " +
                                          std::to_string(config.input_dim(m)));
        }
    }
}

}  // namespace

Batch gather_batch(const ModelConfig& config, std::span<const features::FeatureBundle* const> bundles,
                   std::span<const FrameRef> refs) {
    Batch batch;
    const int steps = config.history + 1;
    const auto rows = static_cast<Eigen::Index>(refs.size());
    for (Modality m : {Modality::Visual, Modality::Audio, Modality::Text}) {
        if (!config.modalities.contains(m)) continue;
        auto& seq = batch.inputs[static_cast<int>(m)];
        seq.assign(steps, Mat(rows, config.input_dim(m)));
        for (Eigen::Index b = 0; b < rows; ++b) {
            const auto& src = bundles[refs[b].video]->matrix(m);
            const auto idx = window_frames(refs[b].frame, config.history);
            for (int k = 0; k < steps; ++k) seq[k].row(b) = src.row(idx[k]).cast<double>();
        }
    }
    return batch;
}

double evaluate_loss(const FusionModel& model, std::span<const LabeledVideo> videos) {
    const auto bundles = bundle_list(videos);
    double total = 0.0;
    long long count = 0;
    for (int v = 0; v < static_cast<int>(videos.size()); ++v) {
        const int frames = videos[v].bundle->frame_count();
        for (int start = 0; start < frames; start += kInferenceChunk) {
            const int end = std::min(frames, start + kInferenceChunk);
            std::vector<FrameRef> refs;
            for (int t = start; t < end; ++t) refs.push_back({v, t});
            const auto batch = gather_batch(model.config(), bundles, refs);
            std::span<const int> labels(videos[v].labels.data() + start, end - start);
            total += model.loss(batch, labels) * (end - start);
            count += end - start;
        }
    }
    return count > 0 ? total / count : 0.0;
}

TrainResult train(const ModelConfig& config, std::span<const LabeledVideo> videos, const AdamOptions& adam,
                  const EpochCallback& on_epoch) {
    config.validate();
    if (videos.empty()) fail(ErrorKind::InvalidInput, "training needs at least one video");
    std::vector<FrameRef> refs;
    for (int v = 0; v < static_cast<int>(videos.size()); ++v) {
        const auto& video = videos[v];
        check_modalities(config, *video.bundle);
        if (static_cast<int>(video.labels.size()) != video.bundle->frame_count()) {
            fail(ErrorKind::InvalidInput, video.bundle->video_id + ": label count differs from frame count");
        }
        for (int t = 0; t < video.bundle->frame_count(); ++t) {
            if (video.labels[t] < 0 || video.labels[t] >= config.classes) {
                fail(ErrorKind::InvalidInput, video.bundle->video_id + ": label out of range");
            }
            refs.push_back({v, t});
        }
    }
    if (refs.empty()) fail(ErrorKind::InvalidInput, "training videos have no frames");
    const auto bundles = bundle_list(videos);

    TrainResult result{FusionModel(config), 0.0, {}};
    FusionModel& model = result.model;
    result.initial_loss = evaluate_loss(model, videos);

    // Separate streams so the data order does not depend on dropout draws.
    Rng order_rng(splitmix64(config.seed ^ 0x6f72646572ULL));
    Rng dropout_rng(splitmix64(config.seed ^ 0x64726f70ULL));
    auto& params = model.parameters();
    std::vector<Mat> m1, m2, grads;
    for (const auto& t : params) {
        m1.push_back(Mat::Zero(t.value.rows(), t.value.cols()));
        m2.push_back(Mat::Zero(t.value.rows(), t.value.cols()));
    }
    long long step = 0;
    std::vector<int> labels;
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        order_rng.shuffle(std::span<FrameRef>(refs));
        double epoch_total = 0.0;
        int batch_index = 0;
        for (std::size_t start = 0; start < refs.size(); start += config.batch_size, ++batch_index) {
            const std::size_t end = std::min(refs.size(), start + static_cast<std::size_t>(config.batch_size));
            std::span<const FrameRef> chunk(refs.data() + start, end - start);
            labels.clear();
            for (const auto& r : chunk) labels.push_back(videos[r.video].labels[r.frame]);
            const auto batch = gather_batch(config, bundles, chunk);
            const double loss = model.loss(batch, labels, &grads, config.dropout > 0.0 ? &dropout_rng : nullptr);
            if (!std::isfinite(loss)) {
                std::ostringstream msg;
                msg << "loss became " << loss << " at epoch " << epoch << ", batch " << batch_index
                    << " (learning rate " << config.learning_rate << ")";
                fail(ErrorKind::TrainingDivergence, msg.str());
            }
            epoch_total += loss * static_cast<double>(chunk.size());

            ++step;
            const double corr = std::sqrt(1.0 - std::pow(adam.beta2, step)) / (1.0 - std::pow(adam.beta1, step));
            const double lr = config.learning_rate * corr;
            for (std::size_t k = 0; k < params.size(); ++k) {
                m1[k] = adam.beta1 * m1[k] + (1.0 - adam.beta1) * grads[k];
                m2[k] = adam.beta2 * m2[k] + (1.0 - adam.beta2) * grads[k].cwiseProduct(grads[k]);
                params[k].value.array() -= lr * m1[k].array() / (m2[k].array().sqrt() + adam.epsilon);
            }
        }
        const double mean = epoch_total / static_cast<double>(refs.size());
        result.epoch_loss.push_back(mean);
        spdlog::debug("epoch {} loss {:.6f}", epoch + 1, mean);
        if (on_epoch) on_epoch(epoch, mean);
    }
    return result;
}

std::vector<PredictionDistribution> predict_video(const FusionModel& model, const features::FeatureBundle& bundle) {
    check_modalities(model.config(), bundle);
    const features::FeatureBundle* one[] = {&bundle};
    std::vector<PredictionDistribution> out;
    const int frames = bundle.frame_count();
    out.reserve(frames);
    for (int start = 0; start < frames; start += kInferenceChunk) {
        const int end = std::min(frames, start + kInferenceChunk);
        std::vector<FrameRef> refs;
        for (int t = start; t < end; ++t) refs.push_back({0, t});
        const Mat probs = model.predict_proba(gather_batch(model.config(), one, refs));
        for (Eigen::Index b = 0; b < probs.rows(); ++b) {
            PredictionDistribution d;
            for (int k = 0; k < kClasses; ++k) d.probs[k] = probs(b, k);
            d.predicted_score = predicted_score(d.probs);
            out.push_back(d);
        }
    }
    return out;
}

}  // namespace eduvsum::model
