#include "fixtures.hpp"

#include <atomic>
#include <cmath>
#include <fstream>
#include <memory>
#include <sstream>
#include <stdexcept>

#include <unistd.h>

extern "C" {
#include <libavcodec/avcodec.h>
#include <libavformat/avformat.h>
#include <libavutil/channel_layout.h>
}

#include "eduvsum/core/manifest.hpp"
#include "eduvsum/core/segments.hpp"
#include "eduvsum/ingest/subtitles.hpp"

namespace eduvsum::fixtures {

namespace {

void check(int rc, const char* what) {
    if (rc < 0) {
        char buf[AV_ERROR_MAX_STRING_SIZE] = {0};
        av_strerror(rc, buf, sizeof buf);
        throw std::runtime_error(std::string(what) + ": " + buf);
    }
}

struct Stream {
    AVStream* stream = nullptr;
    AVCodecContext* codec = nullptr;
};

Stream add_stream(AVFormatContext* oc, AVCodecID id) {
    const AVCodec* codec = avcodec_find_encoder(id);
    if (!codec) throw std::runtime_error("encoder missing");
    Stream s;
    s.stream = avformat_new_stream(oc, nullptr);
    s.codec = avcodec_alloc_context3(codec);
    return s;
}

void drain(AVFormatContext* oc, Stream& s, AVFrame* frame) {
    check(avcodec_send_frame(s.codec, frame), "send frame");
    AVPacket* pkt = av_packet_alloc();
    while (true) {
        const int rc = avcodec_receive_packet(s.codec, pkt);
        if (rc == AVERROR(EAGAIN) || rc == AVERROR_EOF) break;
        check(rc, "receive packet");
        av_packet_rescale_ts(pkt, s.codec->time_base, s.stream->time_base);
        pkt->stream_index = s.stream->index;
        check(av_interleaved_write_frame(oc, pkt), "write packet");
    }
    av_packet_free(&pkt);
}

}  // namespace

Painter frame_index_painter() {
    return [](int index, std::uint8_t* bgr, int w, int h) {
        for (int p = 0; p < w * h; ++p) {
            bgr[3 * p + 0] = 0;
            bgr[3 * p + 1] = static_cast<std::uint8_t>(index >> 8);
            bgr[3 * p + 2] = static_cast<std::uint8_t>(index & 255);
        }
    };
}

int decode_frame_index(const std::uint8_t* rgb) { return rgb[0] | (rgb[1] << 8); }

void write_avi(const std::filesystem::path& path, const SyntheticVideo& spec) {
    std::filesystem::create_directories(path.parent_path());
    AVFormatContext* oc = nullptr;
    check(avformat_alloc_output_context2(&oc, nullptr, "avi", path.c_str()), "output context");

    Stream video = add_stream(oc, AV_CODEC_ID_RAWVIDEO);
    video.codec->width = spec.width;
    video.codec->height = spec.height;
    video.codec->pix_fmt = AV_PIX_FMT_BGR24;
    video.codec->time_base = AVRational{1, spec.fps};
    video.stream->time_base = video.codec->time_base;
    check(avcodec_open2(video.codec, video.codec->codec, nullptr), "open video encoder");
    check(avcodec_parameters_from_context(video.stream->codecpar, video.codec), "video params");

    Stream audio;
    if (spec.audio) {
        audio = add_stream(oc, AV_CODEC_ID_PCM_S16LE);
        audio.codec->sample_fmt = AV_SAMPLE_FMT_S16;
        audio.codec->sample_rate = spec.audio_rate;
        audio.codec->channel_layout = AV_CH_LAYOUT_MONO;
        audio.codec->channels = 1;
        audio.codec->time_base = AVRational{1, spec.audio_rate};
        audio.stream->time_base = audio.codec->time_base;
        check(avcodec_open2(audio.codec, audio.codec->codec, nullptr), "open audio encoder");
        check(avcodec_parameters_from_context(audio.stream->codecpar, audio.codec), "audio params");
    }
    check(avio_open(&oc->pb, path.c_str(), AVIO_FLAG_WRITE), "open file");
    check(avformat_write_header(oc, nullptr), "write header");

    const Painter paint = spec.paint ? spec.paint : frame_index_painter();
    AVFrame* vf = av_frame_alloc();
    vf->format = AV_PIX_FMT_BGR24;
    vf->width = spec.width;
    vf->height = spec.height;
    check(av_frame_get_buffer(vf, 1), "video buffer");

    const double audio_seconds = spec.audio_seconds >= 0 ? spec.audio_seconds : double(spec.frames) / spec.fps;
    const long long total_samples = std::llround(audio_seconds * spec.audio_rate);
    const int chunk = 1024;
    long long written = 0;
    AVFrame* af = nullptr;
    if (spec.audio) {
        af = av_frame_alloc();
        af->format = AV_SAMPLE_FMT_S16;
        af->channel_layout = AV_CH_LAYOUT_MONO;
        af->channels = 1;
        af->sample_rate = spec.audio_rate;
        af->nb_samples = chunk;
        check(av_frame_get_buffer(af, 0), "audio buffer");
    }
    auto write_audio_until = [&](double t_end) {
        if (!spec.audio) return;
        const long long target = std::min(total_samples, std::llround(t_end * spec.audio_rate));
        while (written < target) {
            const int n = static_cast<int>(std::min<long long>(chunk, total_samples - written));
            check(av_frame_make_writable(af), "audio writable");
            af->nb_samples = n;
            auto* out = reinterpret_cast<std::int16_t*>(af->data[0]);
            for (int k = 0; k < n; ++k) {
                const double t = double(written + k) / spec.audio_rate;
                const double v = spec.signal ? spec.signal(t) : 0.0;
                out[k] = static_cast<std::int16_t>(std::lround(std::clamp(v, -1.0, 1.0) * 32767.0));
            }
            af->pts = written;
            drain(oc, audio, af);
            written += n;
        }
    };

    std::vector<std::uint8_t> bgr(static_cast<std::size_t>(spec.width) * spec.height * 3);
    for (int i = 0; i < spec.frames; ++i) {
        paint(i, bgr.data(), spec.width, spec.height);
        check(av_frame_make_writable(vf), "video writable");
        for (int y = 0; y < spec.height; ++y) {
            std::memcpy(vf->data[0] + y * vf->linesize[0], bgr.data() + y * spec.width * 3, spec.width * 3);
        }
        vf->pts = i;
        drain(oc, video, vf);
        write_audio_until(double(i + 1) / spec.fps);
    }
    write_audio_until(audio_seconds);
    drain(oc, video, nullptr);
    if (spec.audio) drain(oc, audio, nullptr);
    check(av_write_trailer(oc), "trailer");

    av_frame_free(&vf);
    av_frame_free(&af);
    avcodec_free_context(&video.codec);
    if (spec.audio) avcodec_free_context(&audio.codec);
    avio_closep(&oc->pb);
    avformat_free_context(oc);
}

std::filesystem::path fresh_dir(const std::string& name) {
    static std::atomic<int> counter{0};
    auto dir = std::filesystem::temp_directory_path() /
               ("eduvsum-" + name + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << text;
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

int toy_score(int video, int segment) { return (video * 7 + segment * 3) % 10 + 1; }

DatasetManifest write_toy_dataset(const std::filesystem::path& dir, int videos, double seconds) {
    DatasetManifest m;
    const int fps = 30;
    const int segments = segment_count(seconds);
    for (int v = 0; v < videos; ++v) {
        auto score_at = [v](double t) { return toy_score(v, static_cast<int>(t / kSegmentSeconds)); };
        SyntheticVideo spec;
        spec.fps = fps;
        spec.frames = static_cast<int>(std::lround(seconds * fps));
        spec.paint = [score_at, fps](int i, std::uint8_t* bgr, int w, int h) {
            const int s = score_at(double(i) / fps);
            for (int p = 0; p < w * h; ++p) {
                bgr[3 * p + 0] = static_cast<std::uint8_t>(25 * s);
                bgr[3 * p + 1] = static_cast<std::uint8_t>(255 - 20 * s);
                bgr[3 * p + 2] = static_cast<std::uint8_t>((s * 77) % 256);
            }
        };
        spec.signal = [score_at](double t) { return 0.05 * score_at(t) - 0.25; };
        const std::string id = "toy" + std::to_string(v);
        write_avi(dir / "media" / (id + ".avi"), spec);

        std::vector<ingest::SubtitleCue> cues;
        for (int s = 0; s < segments; ++s) {
            const int score = toy_score(v, s);
            cues.push_back({s * kSegmentSeconds + 0.2, s * kSegmentSeconds + 4.8,
                            "segment topic level " + std::to_string(score)});
        }
        write_file(dir / "subs" / (id + ".srt"), ingest::serialize_srt(cues));

        VideoRecord rec;
        rec.video_id = id;
        rec.media_path = "media/" + id + ".avi";
        rec.duration = seconds;
        rec.native_fps = fps;
        rec.subtitle_path = "subs/" + id + ".srt";
        rec.topic = v < (videos + 1) / 2 ? "algebra" : "biology";
        rec.source = "synthetic";
        m.videos.push_back(rec);

        AnnotationSet ann;
        ann.video_id = id;
        ann.annotator_id = "fixture";
        for (int s = 0; s < segments; ++s) ann.scores.push_back(toy_score(v, s));
        ann.created_at = "2020-01-01T00:00:00Z";
        m.annotations.push_back(ann);
    }
    save_manifest(m, dir / "dataset.json");
    return m;
}

std::vector<eval::EvaluationReport> reference_reports() {
    std::ifstream in(std::filesystem::path(EDUVSUM_FIXTURES_DIR) / "ablation_rows.csv");
    if (!in) throw std::runtime_error("ablation_rows.csv missing");
    std::string line;
    std::getline(in, line);
    std::vector<eval::EvaluationReport> out;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        // backbone,history,"mods",top1,top2,top3,mae_fra,mae_seg
        const auto q1 = line.find('"'), q2 = line.find('"', q1 + 1);
        eval::EvaluationReport r;
        std::istringstream head(line.substr(0, q1));
        std::getline(head, r.backbone, ',');
        std::string h;
        std::getline(head, h, ',');
        r.history = std::stoi(h);
        r.modalities = line.substr(q1 + 1, q2 - q1 - 1);
        std::istringstream tail(line.substr(q2 + 2));
        char comma;
        tail >> r.top1 >> comma >> r.top2 >> comma >> r.top3 >> comma >> r.mae_fra >> comma >> r.mae_seg;
        r.model_id = r.backbone + "-h" + h + "-" + r.modalities;
        out.push_back(r);
    }
    return out;
}

}  // namespace eduvsum::fixtures
