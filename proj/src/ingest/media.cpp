#include "eduvsum/ingest/media.hpp"

#include <cmath>
#include <sstream>

#include <spdlog/spdlog.h>

extern "C" {
#include <libavcodec/avcodec.h>
#include <libavformat/avformat.h>
#include <libavutil/channel_layout.h>
#include <libavutil/imgutils.h>
#include <libavutil/opt.h>
#include <libswresample/swresample.h>
#include <libswscale/swscale.h>
}

#include "eduvsum/core/errors.hpp"
#include "eduvsum/core/segments.hpp"

namespace eduvsum::ingest {

namespace {

std::string av_error(int code) {
    char buf[AV_ERROR_MAX_STRING_SIZE] = {0};
    av_strerror(code, buf, sizeof buf);
    return buf;
}

struct FormatCloser {
    void operator()(AVFormatContext* ctx) const { avformat_close_input(&ctx); }
};
struct CodecCloser {
    void operator()(AVCodecContext* ctx) const { avcodec_free_context(&ctx); }
};
struct FrameFree {
    void operator()(AVFrame* f) const { av_frame_free(&f); }
};
struct PacketFree {
    void operator()(AVPacket* p) const { av_packet_free(&p); }
};
struct SwsFree {
    void operator()(SwsContext* s) const { sws_freeContext(s); }
};
struct SwrFree {
    void operator()(SwrContext* s) const { swr_free(&s); }
};

using FormatPtr = std::unique_ptr<AVFormatContext, FormatCloser>;
using CodecPtr = std::unique_ptr<AVCodecContext, CodecCloser>;
using FramePtr = std::unique_ptr<AVFrame, FrameFree>;
using PacketPtr = std::unique_ptr<AVPacket, PacketFree>;
using SwsPtr = std::unique_ptr<SwsContext, SwsFree>;
using SwrPtr = std::unique_ptr<SwrContext, SwrFree>;

FramePtr make_frame() {
    FramePtr f(av_frame_alloc());
    if (!f) fail(ErrorKind::Decode, "out of memory allocating frame");
    return f;
}

PacketPtr make_packet() {
    PacketPtr p(av_packet_alloc());
    if (!p) fail(ErrorKind::Decode, "out of memory allocating packet");
    return p;
}

FormatPtr open_container(const std::filesystem::path& path) {
    AVFormatContext* raw = nullptr;
    const int rc = avformat_open_input(&raw, path.c_str(), nullptr, nullptr);
    if (rc < 0) fail(ErrorKind::Decode, "cannot open " + path.string() + ": " + av_error(rc));
    FormatPtr ctx(raw);
    // The catch-all text demuxer accepts arbitrary text files.
    if (ctx->iformat && std::string(ctx->iformat->name) == "tty") {
        fail(ErrorKind::Decode, path.string() + " is not a media container");
    }
    const int info = avformat_find_stream_info(ctx.get(), nullptr);
    if (info < 0) fail(ErrorKind::Decode, "cannot read stream info of " + path.string() + ": " + av_error(info));
    return ctx;
}

int find_video_stream(AVFormatContext* ctx, const std::filesystem::path& path) {
    const int idx = av_find_best_stream(ctx, AVMEDIA_TYPE_VIDEO, -1, -1, nullptr, 0);
    if (idx < 0) fail(ErrorKind::Decode, path.string() + " has no video stream");
    const AVCodecID id = ctx->streams[idx]->codecpar->codec_id;
    if (id == AV_CODEC_ID_ANSI || id == AV_CODEC_ID_NONE) {
        fail(ErrorKind::Decode, path.string() + " has no decodable video stream");
    }
    return idx;
}

CodecPtr open_decoder(AVStream* stream, const std::filesystem::path& path) {
    const AVCodec* codec = avcodec_find_decoder(stream->codecpar->codec_id);
    if (codec == nullptr) fail(ErrorKind::Decode, "no decoder for stream in " + path.string());
    CodecPtr ctx(avcodec_alloc_context3(codec));
    if (!ctx) fail(ErrorKind::Decode, "out of memory allocating decoder");
    if (avcodec_parameters_to_context(ctx.get(), stream->codecpar) < 0) {
        fail(ErrorKind::Decode, "bad codec parameters in " + path.string());
    }
    ctx->thread_count = 1;
    const int rc = avcodec_open2(ctx.get(), codec, nullptr);
    if (rc < 0) fail(ErrorKind::Decode, "cannot open decoder for " + path.string() + ": " + av_error(rc));
    return ctx;
}

double stream_fps(const AVStream* stream) {
    AVRational r = stream->avg_frame_rate;
    if (r.num <= 0 || r.den <= 0) r = stream->r_frame_rate;
    if (r.num <= 0 || r.den <= 0) return 0.0;
    return av_q2d(r);
}

double container_duration(const AVFormatContext* ctx, const AVStream* stream) {
    if (ctx->duration != AV_NOPTS_VALUE && ctx->duration > 0) {
        return static_cast<double>(ctx->duration) / AV_TIME_BASE;
    }
    if (stream->duration != AV_NOPTS_VALUE && stream->duration > 0) {
        return stream->duration * av_q2d(stream->time_base);
    }
    return 0.0;
}

MediaInfo describe(AVFormatContext* ctx, int video_idx) {
    const AVStream* vs = ctx->streams[video_idx];
    MediaInfo info;
    info.native_fps = stream_fps(vs);
    info.duration = container_duration(ctx, vs);
    info.has_audio = av_find_best_stream(ctx, AVMEDIA_TYPE_AUDIO, -1, -1, nullptr, 0) >= 0;
    info.width = vs->codecpar->width;
    info.height = vs->codecpar->height;
    return info;
}

}  // namespace

MediaInfo probe_video(const std::filesystem::path& media_path) {
    FormatPtr ctx = open_container(media_path);
    const int video_idx = find_video_stream(ctx.get(), media_path);
    MediaInfo info = describe(ctx.get(), video_idx);
    if (info.native_fps <= 0.0 || info.duration <= 0.0) {
        fail(ErrorKind::Decode, media_path.string() + " reports no usable frame rate or duration");
    }
    return info;
}

struct FrameSampler::Impl {
    std::filesystem::path path;
    double sample_rate = 0.0;
    MediaInfo info;
    std::vector<Segment> segments;

    FormatPtr format;
    CodecPtr decoder;
    int video_idx = -1;
    double time_base = 0.0;
    double start_time = 0.0;
    SwsPtr sws;

    PacketPtr packet = make_packet();
    FramePtr current = make_frame();
    FramePtr previous = make_frame();
    bool have_previous = false;
    double previous_t = 0.0;
    std::int64_t last_emitted_pts = AV_NOPTS_VALUE;

    bool input_drained = false;
    bool decoder_drained = false;
    std::int64_t next_k = 0;
    int emitted = 0;

    double ideal_time(std::int64_t k) const { return static_cast<double>(k) / sample_rate; }
    bool pending() const { return ideal_time(next_k) < info.duration; }

    double frame_seconds(const AVFrame* f) const {
        std::int64_t pts = f->best_effort_timestamp;
        if (pts == AV_NOPTS_VALUE) pts = f->pts;
        if (pts == AV_NOPTS_VALUE) return previous_t + 1.0 / info.native_fps;
        return pts * time_base - start_time;
    }

    // Returns false once the decoder is exhausted.
    bool decode_one() {
        while (true) {
            const int rc = avcodec_receive_frame(decoder.get(), current.get());
            if (rc == 0) return true;
            if (rc == AVERROR_EOF) {
                decoder_drained = true;
                return false;
            }
            if (rc != AVERROR(EAGAIN)) fail(ErrorKind::Decode, "decode failed: " + av_error(rc));
            if (input_drained) {
                avcodec_send_packet(decoder.get(), nullptr);
                continue;
            }
            const int rr = av_read_frame(format.get(), packet.get());
            if (rr < 0) {
                input_drained = true;
                avcodec_send_packet(decoder.get(), nullptr);
                continue;
            }
            if (packet->stream_index == video_idx) {
                const int sr = avcodec_send_packet(decoder.get(), packet.get());
                if (sr < 0 && sr != AVERROR(EAGAIN)) {
                    av_packet_unref(packet.get());
                    fail(ErrorKind::Decode, "corrupt packet in " + path.string() + ": " + av_error(sr));
                }
            }
            av_packet_unref(packet.get());
        }
    }

    SampledFrame convert(const AVFrame* f, double t) {
        SampledFrame out;
        out.frame_index = emitted;
        out.timestamp = t;
        out.image.width = f->width;
        out.image.height = f->height;
        out.image.pixels.resize(static_cast<std::size_t>(f->width) * f->height * 3);
        sws.reset(sws_getCachedContext(sws.release(), f->width, f->height,
                                       static_cast<AVPixelFormat>(f->format), f->width, f->height,
                                       AV_PIX_FMT_RGB24, SWS_BILINEAR, nullptr, nullptr, nullptr));
        if (!sws) fail(ErrorKind::Decode, "cannot convert pixel format of " + path.string());
        std::uint8_t* dst[4] = {out.image.pixels.data(), nullptr, nullptr, nullptr};
        int dst_stride[4] = {f->width * 3, 0, 0, 0};
        sws_scale(sws.get(), f->data, f->linesize, 0, f->height, dst, dst_stride);
        const double clamped = std::min(t, segments.back().end - 1e-9);
        out.segment_index = frame_to_segment(std::max(0.0, clamped), segments);
        return out;
    }

    std::optional<SampledFrame> emit(AVFrame* f, double t) {
        const std::int64_t pts = f->best_effort_timestamp;
        ++next_k;
        if (pts != AV_NOPTS_VALUE && pts == last_emitted_pts) return std::nullopt;
        last_emitted_pts = pts;
        SampledFrame frame = convert(f, t);
        ++emitted;
        return frame;
    }
};

FrameSampler::FrameSampler(const std::filesystem::path& media_path, double sample_rate, double segment_length)
    : impl_(std::make_unique<Impl>()) {
    impl_->path = media_path;
    impl_->format = open_container(media_path);
    impl_->video_idx = find_video_stream(impl_->format.get(), media_path);
    impl_->info = describe(impl_->format.get(), impl_->video_idx);
    if (impl_->info.native_fps <= 0.0 || impl_->info.duration <= 0.0) {
        fail(ErrorKind::Decode, media_path.string() + " reports no usable frame rate or duration");
    }
    if (!(sample_rate > 0.0) || sample_rate > impl_->info.native_fps + 1e-9) {
        std::ostringstream os;
        os << "sample rate " << sample_rate << " must be in (0, native fps " << impl_->info.native_fps << "]";
        fail(ErrorKind::InvalidConfig, os.str());
    }
    impl_->sample_rate = sample_rate;
    impl_->segments = segmentize(impl_->info.duration, segment_length);
    AVStream* stream = impl_->format->streams[impl_->video_idx];
    impl_->time_base = av_q2d(stream->time_base);
    impl_->start_time = stream->start_time != AV_NOPTS_VALUE ? stream->start_time * impl_->time_base : 0.0;
    impl_->decoder = open_decoder(stream, media_path);
}

FrameSampler::~FrameSampler() = default;
FrameSampler::FrameSampler(FrameSampler&&) noexcept = default;
FrameSampler& FrameSampler::operator=(FrameSampler&&) noexcept = default;

const MediaInfo& FrameSampler::info() const { return impl_->info; }

std::optional<SampledFrame> FrameSampler::next() {
    Impl& s = *impl_;
    while (s.pending()) {
        const double target = s.ideal_time(s.next_k);
        if (s.have_previous && s.previous_t >= target) {
            // Previous frame already lies past the target; it is the nearest candidate.
            if (auto f = s.emit(s.previous.get(), s.previous_t)) return f;
            continue;
        }
        if (s.decoder_drained || !s.decode_one()) {
            // End of stream: the last frame serves remaining targets within its display time.
            if (s.have_previous && target < s.previous_t + 1.0 / s.info.native_fps) {
                if (auto f = s.emit(s.previous.get(), s.previous_t)) return f;
                continue;
            }
            s.next_k = std::numeric_limits<std::int64_t>::max() / 2;
            return std::nullopt;
        }
        const double t = s.frame_seconds(s.current.get());
        if (t < target) {
            av_frame_unref(s.previous.get());
            av_frame_move_ref(s.previous.get(), s.current.get());
            s.previous_t = t;
            s.have_previous = true;
            continue;
        }
        // previous < target <= t: choose the nearer, ties toward the earlier frame.
        const bool take_previous = s.have_previous && (target - s.previous_t) <= (t - target);
        std::optional<SampledFrame> out;
        if (take_previous) out = s.emit(s.previous.get(), s.previous_t);
        av_frame_unref(s.previous.get());
        av_frame_move_ref(s.previous.get(), s.current.get());
        s.previous_t = t;
        s.have_previous = true;
        if (!take_previous) out = s.emit(s.previous.get(), s.previous_t);
        if (out) return out;
    }
    return std::nullopt;
}

std::vector<SampledFrame> sample_frames(const std::filesystem::path& media_path, double sample_rate,
                                        double segment_length) {
    FrameSampler sampler(media_path, sample_rate, segment_length);
    std::vector<SampledFrame> frames;
    while (auto f = sampler.next()) frames.push_back(std::move(*f));
    return frames;
}

std::optional<AudioTrack> extract_audio(const std::filesystem::path& media_path, int target_rate) {
    if (target_rate <= 0) fail(ErrorKind::InvalidConfig, "audio sample rate must be positive");
    FormatPtr format = open_container(media_path);
    const int audio_idx = av_find_best_stream(format.get(), AVMEDIA_TYPE_AUDIO, -1, -1, nullptr, 0);
    if (audio_idx < 0) {
        spdlog::info("{}: no audio stream", media_path.string());
        return std::nullopt;
    }
    AVStream* stream = format->streams[audio_idx];
    CodecPtr decoder = open_decoder(stream, media_path);

    const int channels = decoder->channels > 0 ? decoder->channels : 1;
    std::int64_t in_layout = static_cast<std::int64_t>(decoder->channel_layout);
    if (in_layout == 0) in_layout = av_get_default_channel_layout(channels);

    // Resample with the channel layout unchanged, then average channels ourselves.
    SwrPtr swr(swr_alloc_set_opts(nullptr, in_layout, AV_SAMPLE_FMT_FLT, target_rate, in_layout,
                                  decoder->sample_fmt, decoder->sample_rate, 0, nullptr));
    if (!swr || swr_init(swr.get()) < 0) fail(ErrorKind::Decode, "cannot set up audio resampler");

    AudioTrack track;
    track.sample_rate = target_rate;
    std::vector<float> interleaved;

    auto drain_resampler = [&](const AVFrame* frame) {
        const int in_samples = frame ? frame->nb_samples : 0;
        const int cap = swr_get_out_samples(swr.get(), in_samples) + 32;
        interleaved.resize(static_cast<std::size_t>(cap) * channels);
        std::uint8_t* out[1] = {reinterpret_cast<std::uint8_t*>(interleaved.data())};
        const int got = swr_convert(swr.get(), out, cap,
                                    frame ? const_cast<const std::uint8_t**>(frame->extended_data) : nullptr,
                                    in_samples);
        if (got < 0) fail(ErrorKind::Decode, "audio resampling failed");
        for (int i = 0; i < got; ++i) {
            float sum = 0.0f;
            for (int c = 0; c < channels; ++c) sum += interleaved[static_cast<std::size_t>(i) * channels + c];
            track.samples.push_back(sum / static_cast<float>(channels));
        }
    };

    PacketPtr packet = make_packet();
    FramePtr frame = make_frame();
    auto receive_all = [&] {
        while (true) {
            const int rc = avcodec_receive_frame(decoder.get(), frame.get());
            if (rc == AVERROR(EAGAIN) || rc == AVERROR_EOF) return;
            if (rc < 0) fail(ErrorKind::Decode, "audio decode failed: " + av_error(rc));
            drain_resampler(frame.get());
            av_frame_unref(frame.get());
        }
    };
    while (av_read_frame(format.get(), packet.get()) >= 0) {
        if (packet->stream_index == audio_idx) {
            const int sr = avcodec_send_packet(decoder.get(), packet.get());
            if (sr < 0 && sr != AVERROR(EAGAIN)) {
                av_packet_unref(packet.get());
                fail(ErrorKind::Decode, "corrupt audio packet: " + av_error(sr));
            }
            receive_all();
        }
        av_packet_unref(packet.get());
    }
    avcodec_send_packet(decoder.get(), nullptr);
    receive_all();
    drain_resampler(nullptr);
    return track;
}

}  // namespace eduvsum::ingest
