#pragma once

#include <functional>
#include <span>
#include <vector>

#include "eduvsum/features/bundle.hpp"
#include "eduvsum/model/fusion_model.hpp"

namespace eduvsum::model {

struct LabeledVideo {
    const features::FeatureBundle* bundle = nullptr;
    std::vector<int> labels;  // one class per frame
};

struct FrameRef {
    int video = 0;
    int frame = 0;
};

// Windows for the given frames, gathered straight from the bundles.
Batch gather_batch(const ModelConfig& config, std::span<const features::FeatureBundle* const> bundles,
                   std::span<const FrameRef> refs);

struct TrainResult {
    FusionModel model;
    double initial_loss = 0.0;       // full training set, before the first update, dropout off
    std::vector<double> epoch_loss;  // mean training loss of each epoch, dropout on
};

struct AdamOptions {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-7;
};

using EpochCallback = std::function<void(int epoch, double loss)>;

// Throws TrainingDivergence on a non-finite loss, naming the learning rate,
// epoch and batch.
TrainResult train(const ModelConfig& config, std::span<const LabeledVideo> videos, const AdamOptions& adam = {},
                  const EpochCallback& on_epoch = {});

// One distribution per frame; the bundle must carry every enabled modality.
std::vector<PredictionDistribution> predict_video(const FusionModel& model, const features::FeatureBundle& bundle);

// Mean loss over all frames in inference mode.
double evaluate_loss(const FusionModel& model, std::span<const LabeledVideo> videos);

}  // namespace eduvsum::model
