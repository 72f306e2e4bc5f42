#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "eduvsum/core/errors.hpp"
#include "eduvsum/core/segments.hpp"
#include "eduvsum/ingest/frame_cache.hpp"
#include "eduvsum/ingest/media.hpp"
#include "eduvsum/ingest/subtitles.hpp"
#include "support/fixtures.hpp"

using namespace eduvsum;
using namespace eduvsum::ingest;
namespace fx = eduvsum::fixtures;

namespace {

ErrorKind kind_of(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.kind();
    }
    ADD_FAILURE() << "no eduvsum::Error thrown";
    return ErrorKind::InvalidInput;
}

// Native index nearest to k / rate, ties to the earlier frame.
int nearest_native(std::int64_t k, double rate, int fps) {
    const double x = static_cast<double>(k) * fps / rate;
    return static_cast<int>(std::ceil(x - 0.5 - 1e-12));
}

}  // namespace

TEST(Probe, ReportsStreamProperties) {
    const auto dir = fx::fresh_dir("probe");
    fx::write_avi(dir / "a.avi", {.width = 40, .height = 30, .fps = 25, .frames = 100});
    const MediaInfo info = probe_video(dir / "a.avi");
    EXPECT_EQ(info.width, 40);
    EXPECT_EQ(info.height, 30);
    EXPECT_NEAR(info.native_fps, 25.0, 1e-9);
    EXPECT_NEAR(info.duration, 4.0, 0.05);
    EXPECT_TRUE(info.has_audio);
}

TEST(Probe, RejectsNonMedia) {
    const auto dir = fx::fresh_dir("probe_bad");
    fx::write_file(dir / "notes.avi", "this is not a video\njust some text\n");
    EXPECT_EQ(kind_of([&] { probe_video(dir / "notes.avi"); }), ErrorKind::Decode);
    EXPECT_EQ(kind_of([&] { sample_frames(dir / "notes.avi", 1.0); }), ErrorKind::Decode);
    EXPECT_EQ(kind_of([&] { probe_video(dir / "absent.avi"); }), ErrorKind::Decode);
}

class SamplerRates : public ::testing::TestWithParam<double> {};

TEST_P(SamplerRates, PicksNearestNativeFrame) {
    const double rate = GetParam();
    const int fps = 30, frames = 200;
    const auto dir = fx::fresh_dir("sampler");
    fx::write_avi(dir / "v.avi", {.fps = fps, .frames = frames});
    const auto sampled = sample_frames(dir / "v.avi", rate);
    const double duration = static_cast<double>(frames) / fps;
    const auto segments = segmentize(duration);

    std::vector<int> expected;
    for (std::int64_t k = 0; static_cast<double>(k) / rate < duration; ++k) {
        const int j = std::min(nearest_native(k, rate, fps), frames - 1);
        if (expected.empty() || expected.back() != j) expected.push_back(j);
    }
    ASSERT_EQ(sampled.size(), expected.size());
    for (std::size_t i = 0; i < sampled.size(); ++i) {
        const auto& f = sampled[i];
        EXPECT_EQ(f.frame_index, static_cast<int>(i));
        EXPECT_EQ(fx::decode_frame_index(f.image.pixels.data()), expected[i]) << "sample " << i;
        EXPECT_NEAR(f.timestamp, static_cast<double>(expected[i]) / fps, 1e-6);
        EXPECT_EQ(f.segment_index, frame_to_segment(f.timestamp, segments));
        EXPECT_EQ(f.image.width, 32);
        EXPECT_EQ(f.image.height, 24);
    }
}

INSTANTIATE_TEST_SUITE_P(Rates, SamplerRates, ::testing::Values(1.0, 3.0, 7.0, 12.5, 29.0, 30.0));

TEST(Sampler, RateAboveNativeFpsIsConfigError) {
    const auto dir = fx::fresh_dir("sampler_fast");
    fx::write_avi(dir / "v.avi", {.fps = 10, .frames = 20});
    EXPECT_EQ(kind_of([&] { FrameSampler(dir / "v.avi", 10.5); }), ErrorKind::InvalidConfig);
    EXPECT_EQ(kind_of([&] { FrameSampler(dir / "v.avi", 0.0); }), ErrorKind::InvalidConfig);
    EXPECT_NO_THROW(FrameSampler(dir / "v.avi", 10.0));
}

TEST(Sampler, StreamingMatchesBatch) {
    const auto dir = fx::fresh_dir("sampler_stream");
    fx::write_avi(dir / "v.avi", {.fps = 24, .frames = 130});
    const auto batch = sample_frames(dir / "v.avi", 5.0);
    FrameSampler sampler(dir / "v.avi", 5.0);
    std::size_t i = 0;
    while (auto f = sampler.next()) {
        ASSERT_LT(i, batch.size());
        EXPECT_EQ(f->image.pixels, batch[i].image.pixels);
        EXPECT_EQ(f->timestamp, batch[i].timestamp);
        ++i;
    }
    EXPECT_EQ(i, batch.size());
    EXPECT_FALSE(sampler.next().has_value());
}

TEST(Audio, MatchesWrittenSignal) {
    const auto dir = fx::fresh_dir("audio");
    const double freq = 440.0;
    auto sine = [&](double t) { return 0.5 * std::sin(2.0 * std::numbers::pi * freq * t); };
    fx::write_avi(dir / "v.avi", {.fps = 10, .frames = 30, .signal = sine});
    const auto track = extract_audio(dir / "v.avi", 16000);
    ASSERT_TRUE(track.has_value());
    EXPECT_EQ(track->sample_rate, 16000);
    EXPECT_NEAR(track->duration(), 3.0, 0.07);
    // Same rate: samples come back up to 16-bit quantisation.
    const std::size_t n = std::min<std::size_t>(track->samples.size(), 16000);
    double worst = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        worst = std::max(worst, std::abs(track->samples[i] - sine(static_cast<double>(i) / 16000.0)));
    }
    EXPECT_LT(worst, 2.0 / 32768.0);
}

TEST(Audio, ResamplesToTargetRate) {
    const auto dir = fx::fresh_dir("audio_rs");
    fx::write_avi(dir / "v.avi", {.fps = 10, .frames = 20, .audio_rate = 44100,
                                  .signal = [](double t) { return 0.3 * std::sin(2.0 * std::numbers::pi * 200.0 * t); }});
    const auto track = extract_audio(dir / "v.avi", 8000);
    ASSERT_TRUE(track.has_value());
    EXPECT_EQ(track->sample_rate, 8000);
    EXPECT_NEAR(track->duration(), 2.0, 0.07);
    float peak = 0.0f;
    for (float s : track->samples) peak = std::max(peak, std::abs(s));
    EXPECT_NEAR(peak, 0.3, 0.02);
}

TEST(Audio, NoAudioStreamGivesNullopt) {
    const auto dir = fx::fresh_dir("audio_none");
    fx::write_avi(dir / "v.avi", {.fps = 10, .frames = 20, .audio = false});
    EXPECT_FALSE(extract_audio(dir / "v.avi").has_value());
    EXPECT_FALSE(probe_video(dir / "v.avi").has_audio);
}

TEST(Subtitles, ParsesSrt) {
    const std::string srt =
        "1\n00:00:01,000 --> 00:00:03,500\nHello <i>world</i>\nsecond line\n\n"
        "2\r\n00:01:02,250 --> 00:01:04,000\r\nTom &amp; Jerry {\\an8}\r\n\r\n";
    const auto cues = parse_subtitles_text(srt);
    ASSERT_EQ(cues.size(), 2u);
    EXPECT_EQ(cues[0], (SubtitleCue{1.0, 3.5, "Hello world second line"}));
    EXPECT_EQ(cues[1], (SubtitleCue{62.25, 64.0, "Tom & Jerry"}));
}

TEST(Subtitles, ParsesVttWithoutHoursAndWithSettings) {
    const std::string vtt =
        "WEBVTT\n\nNOTE a comment\n\ncue-a\n00:05.000 --> 00:07.100 align:start position:10%\n<v Speaker>Later cue</v>\n\n"
        "01:00:00.000 --> 01:00:01.000\nHour mark\n\n"
        "00:01.000 --> 00:02.000\nEarlier cue\n";
    const auto cues = parse_subtitles_text(vtt);
    ASSERT_EQ(cues.size(), 3u);
    EXPECT_EQ(cues[0].text, "Earlier cue");
    EXPECT_DOUBLE_EQ(cues[1].start, 5.0);
    EXPECT_DOUBLE_EQ(cues[1].end, 7.1);
    EXPECT_EQ(cues[1].text, "Later cue");
    EXPECT_DOUBLE_EQ(cues[2].start, 3600.0);
}

TEST(Subtitles, DropsCuesEmptyAfterStripping) {
    const auto cues = parse_subtitles_text("1\n00:00:01,000 --> 00:00:02,000\n<b></b>\n\n2\n00:00:02,000 --> 00:00:03,000\nkept\n");
    ASSERT_EQ(cues.size(), 1u);
    EXPECT_EQ(cues[0].text, "kept");
}

TEST(Subtitles, BadTimingNamesLine) {
    const std::string bad = "1\n00:00:01,000 --> 00:00:02,000\nok\n\n2\n00:00:xx,000 --> 00:00:03,000\nbroken\n";
    try {
        parse_subtitles_text(bad, "talk.srt");
        FAIL() << "expected a parse error";
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::Parse);
        EXPECT_NE(std::string(e.what()).find("talk.srt:6"), std::string::npos) << e.what();
    }
    EXPECT_EQ(kind_of([] { parse_subtitles_text("00:00:03,000 --> 00:00:02,000\nbackwards\n"); }), ErrorKind::Parse);
}

TEST(Subtitles, StripMarkup) {
    EXPECT_EQ(strip_markup("<font color=\"red\">a</font> &lt;b&gt; &quot;c&quot;"), "a <b> \"c\"");
    EXPECT_EQ(strip_markup("{\\i1}x{\\i0}"), "x");
}

TEST(Subtitles, SerializeRoundTrip) {
    const std::vector<SubtitleCue> cues{{0.0, 1.5, "one"}, {3661.25, 3662.0, "two words"}};
    EXPECT_EQ(format_srt_time(3661.007), "01:01:01,007");
    EXPECT_EQ(format_srt_time(59.9996), "00:01:00,000");
    EXPECT_EQ(parse_subtitles_text(serialize_srt(cues)), cues);
}

TEST(Subtitles, MissingFileIsIo) {
    EXPECT_EQ(kind_of([] { parse_subtitles("/nonexistent/eduvsum/x.srt"); }), ErrorKind::Io);
}

TEST(FrameCache, PngRoundTripIsLossless) {
    const auto dir = fx::fresh_dir("frame_cache");
    fx::write_avi(dir / "v.avi", {.fps = 10, .frames = 30,
                                  .paint = [](int i, std::uint8_t* bgr, int w, int h) {
                                      for (int p = 0; p < w * h * 3; ++p) bgr[p] = static_cast<std::uint8_t>(p * 7 + i * 13);
                                  }});
    const auto frames = sample_frames(dir / "v.avi", 2.0);
    ASSERT_FALSE(frames.empty());
    write_frame_cache(dir / "cache", "vid", frames);
    for (const auto& f : frames) {
        const RgbImage back = read_cached_frame(dir / "cache", "vid", f.frame_index);
        EXPECT_EQ(back.width, f.image.width);
        EXPECT_EQ(back.pixels, f.image.pixels);
    }
    EXPECT_EQ(kind_of([&] { read_cached_frame(dir / "cache", "vid", 999); }), ErrorKind::Io);
}
