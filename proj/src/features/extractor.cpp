#include "eduvsum/features/extractor.hpp"

#include <cmath>

#include <spdlog/spdlog.h>

#include "eduvsum/core/errors.hpp"
#include "eduvsum/core/rng.hpp"
#include "eduvsum/features/alignment.hpp"
#include "eduvsum/features/audio_features.hpp"
#include "eduvsum/ingest/frame_cache.hpp"
#include "eduvsum/ingest/media.hpp"
#include "eduvsum/ingest/subtitles.hpp"

namespace eduvsum::features {

std::filesystem::path resolve_media(const std::filesystem::path& media_root, const std::string& path) {
    std::filesystem::path p(path);
    if (p.is_absolute() || media_root.empty()) return p;
    return media_root / p;
}

FeatureMatrix stub_audio_features(const ingest::AudioTrack& track, double window, double step, int dim,
                                  std::uint64_t seed) {
    const int win = static_cast<int>(std::lround(window * track.sample_rate));
    const int hop = static_cast<int>(std::lround(step * track.sample_rate));
    const int rows = short_term_window_count(track.samples.size(), win, hop);
    FeatureMatrix out(rows, dim);
    for (int r = 0; r < rows; ++r) {
        const auto* begin = reinterpret_cast<const std::uint8_t*>(track.samples.data() + static_cast<std::size_t>(r) * hop);
        const std::uint64_t key = fnv1a64(std::span<const std::uint8_t>(begin, win * sizeof(float)), splitmix64(seed));
        out.row(r) = hashed_vector(key, dim).transpose();
    }
    return out;
}

FeatureExtractor::FeatureExtractor(ExtractorOptions options) : options_(std::move(options)) {
    const FeatureConfig& c = options_.config;
    if (c.visual.modality != Modality::Visual || c.audio.modality != Modality::Audio ||
        c.text.modality != Modality::Text) {
        fail(ErrorKind::InvalidConfig, "backend modalities do not match their slots");
    }
    visual_ = make_visual_encoder(c.visual, {options_.weights_dir, c.stub_seed});
    text_ = make_text_encoder(c.text, {options_.text_model_dir, c.stub_seed});
}

FeatureExtractor::~FeatureExtractor() = default;

FeatureBundle FeatureExtractor::extract(const VideoRecord& video, const std::filesystem::path& media_root) const {
    const FeatureConfig& c = options_.config;
    const auto media = resolve_media(media_root, video.media_path);
    if (!std::filesystem::exists(media)) fail(ErrorKind::Io, "media file not found: " + media.string());

    FeatureBundle bundle;
    bundle.video_id = video.video_id;

    // Frames are encoded as they are decoded; only the embeddings are kept.
    ingest::FrameSampler sampler(media, c.sample_rate, c.segment_length);
    std::vector<Eigen::VectorXf> rows;
    std::vector<ingest::SampledFrame> png_batch;
    while (auto frame = sampler.next()) {
        bundle.timestamps.push_back(frame->timestamp);
        bundle.segment_index.push_back(frame->segment_index);
        rows.push_back(visual_->encode(frame->image));
        if (options_.frame_cache_root) {
            png_batch.push_back(std::move(*frame));
            ingest::write_frame_cache(*options_.frame_cache_root, video.video_id, png_batch);
            png_batch.clear();
        }
    }
    if (rows.empty()) fail(ErrorKind::Decode, media.string() + " yielded no frames");
    const auto frames = static_cast<Eigen::Index>(rows.size());
    bundle.visual.resize(frames, c.visual.output_dim);
    for (Eigen::Index t = 0; t < frames; ++t) bundle.visual.row(t) = rows[t].transpose();
    bundle.present.visual = true;

    bundle.audio = FeatureMatrix::Zero(frames, c.audio.output_dim);
    if (auto track = ingest::extract_audio(media, c.audio_rate)) {
        std::optional<FeatureMatrix> short_term;
        if (c.audio.is_stub()) {
            FeatureMatrix m = stub_audio_features(*track, c.audio_window, c.audio_step, c.audio.output_dim, c.stub_seed);
            if (m.rows() > 0) short_term = std::move(m);
        } else {
            short_term = extract_audio_features(*track, c.audio_window, c.audio_step);
        }
        if (short_term) {
            if (auto aligned = align_audio_to_frames(*short_term, c.audio_window, c.audio_step, bundle.timestamps)) {
                bundle.audio = std::move(*aligned);
                bundle.present.audio = true;
            }
        } else {
            spdlog::warn("{}: audio shorter than one analysis window", video.video_id);
        }
    }

    bundle.text = FeatureMatrix::Zero(frames, c.text.output_dim);
    if (video.subtitle_path) {
        const auto cues = ingest::parse_subtitles(resolve_media(media_root, *video.subtitle_path));
        const auto words = extract_text(cues, *text_);
        bundle.text = align_text_to_frames(words, bundle.timestamps, c.text.output_dim);
        bundle.present.text = true;
    }

    bundle.validate();
    return bundle;
}

}  // namespace eduvsum::features
