#include <algorithm>
#include <cstring>
#include <functional>
#include <cmath>
#include <map>
#include <set>

#include <gtest/gtest.h>

#include "eduvsum/core/errors.hpp"
#include "eduvsum/core/manifest.hpp"
#include "eduvsum/core/rng.hpp"
#include "eduvsum/core/segments.hpp"
#include "eduvsum/core/split.hpp"
#include "fixtures.hpp"

using namespace eduvsum;

namespace {

ErrorKind kind_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.kind();
    }
    ADD_FAILURE() << "no eduvsum::Error thrown";
    return ErrorKind::InvalidInput;
}

VideoRecord video(const std::string& id, double duration, const std::string& topic = "math") {
    return VideoRecord{id, "media/" + id + ".mp4", duration, 30.0, std::nullopt, topic, "youtube"};
}

DatasetManifest topics_manifest(const std::vector<std::pair<std::string, int>>& topics) {
    DatasetManifest m;
    for (const auto& [topic, n] : topics)
        for (int i = 0; i < n; ++i) m.videos.push_back(video(topic + std::to_string(i), 30.0, topic));
    return m;
}

}  // namespace

TEST(Segmentize, ExactMultiple) {
    const auto s = segmentize(10.0);
    ASSERT_EQ(s.size(), 2u);
    EXPECT_EQ(s[0], (Segment{0, 0.0, 5.0}));
    EXPECT_EQ(s[1], (Segment{1, 5.0, 10.0}));
}

TEST(Segmentize, ShortTail) {
    const auto s = segmentize(23.0);
    ASSERT_EQ(s.size(), 5u);
    EXPECT_EQ(s.back(), (Segment{4, 20.0, 23.0}));
    EXPECT_EQ(segment_count(23.0), 5);
}

TEST(Segmentize, SingleShortSegment) {
    const auto s = segmentize(4.0);
    ASSERT_EQ(s.size(), 1u);
    EXPECT_EQ(s[0], (Segment{0, 0.0, 4.0}));
}

TEST(Segmentize, RejectsNonPositive) {
    EXPECT_EQ(kind_of([] { segmentize(0.0); }), ErrorKind::InvalidInput);
    EXPECT_EQ(kind_of([] { segmentize(-3.0); }), ErrorKind::InvalidInput);
    EXPECT_EQ(kind_of([] { segmentize(NAN); }), ErrorKind::InvalidInput);
}

TEST(SegmentizeProperty, TilesTheInterval) {
    Rng rng(11);
    for (int trial = 0; trial < 2000; ++trial) {
        const double duration = trial < 50 ? 5.0 * (trial + 1) : rng.uniform(0.01, 600.0);
        const auto segs = segmentize(duration);
        // Independent count: smallest n with 5n >= duration.
        int n = 0;
        while (5.0 * n < duration) ++n;
        ASSERT_EQ(static_cast<int>(segs.size()), n) << duration;
        ASSERT_EQ(segs.front().start, 0.0);
        ASSERT_EQ(segs.back().end, duration);
        for (std::size_t i = 0; i < segs.size(); ++i) {
            ASSERT_EQ(segs[i].segment_index, static_cast<int>(i));
            ASSERT_GT(segs[i].end, segs[i].start);
            ASSERT_LE(segs[i].length(), 5.0 + 1e-12);
            if (i + 1 < segs.size()) {
                ASSERT_EQ(segs[i].end, segs[i + 1].start);
                ASSERT_DOUBLE_EQ(segs[i].length(), 5.0);
            }
        }
    }
}

TEST(FrameToSegment, Examples) {
    const auto ten = segmentize(10.0);
    EXPECT_EQ(frame_to_segment(0.0, ten), 0);
    EXPECT_EQ(frame_to_segment(5.0, ten), 1);
    EXPECT_EQ(frame_to_segment(22.9, segmentize(23.0)), 4);
    EXPECT_EQ(kind_of([&] { frame_to_segment(10.0, ten); }), ErrorKind::InvalidInput);
    EXPECT_EQ(kind_of([&] { frame_to_segment(-0.1, ten); }), ErrorKind::InvalidInput);
}

TEST(FrameToSegmentProperty, MatchesLinearScan) {
    Rng rng(5);
    const auto segs = segmentize(123.4);
    for (int i = 0; i < 10000; ++i) {
        const double t = rng.uniform(0.0, 123.4);
        int expected = -1;
        for (const auto& s : segs)
            if (s.start <= t && t < s.end) expected = s.segment_index;
        ASSERT_EQ(frame_to_segment(t, segs), expected) << t;
    }
}

TEST(Rng, DeterministicAndBounded) {
    Rng a(42), b(42);
    for (int i = 0; i < 1000; ++i) {
        ASSERT_EQ(a.next_u64(), b.next_u64());
        const auto k = a.uniform_index(7);
        b.uniform_index(7);
        ASSERT_LT(k, 7u);
        const double u = a.uniform();
        b.uniform();
        ASSERT_GE(u, 0.0);
        ASSERT_LT(u, 1.0);
    }
}

TEST(Rng, NormalMoments) {
    Rng rng(1);
    double sum = 0, sq = 0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        const double x = rng.normal();
        sum += x;
        sq += x * x;
    }
    EXPECT_NEAR(sum / n, 0.0, 0.01);
    EXPECT_NEAR(sq / n, 1.0, 0.02);
}

TEST(Split, NinetyEightVideos) {
    // 98 videos spread over 7 topics of 14.
    const auto m = topics_manifest({{"a", 14}, {"b", 14}, {"c", 14}, {"d", 14}, {"e", 14}, {"f", 14}, {"g", 14}});
    const auto s = split_dataset(m, 0.847, 1);
    EXPECT_EQ(s.train_ids.size(), 83u);
    EXPECT_EQ(s.test_ids.size(), 15u);
}

TEST(Split, Deterministic) {
    const auto m = topics_manifest({{"only", 10}});
    EXPECT_EQ(split_dataset(m, 0.8, 7), split_dataset(m, 0.8, 7));
    EXPECT_EQ(split_dataset(m, 0.8, 7).seed, 7u);
}

TEST(Split, TwoTopicsOfFive) {
    const auto m = topics_manifest({{"x", 5}, {"y", 5}});
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto s = split_dataset(m, 0.8, seed);
        std::map<char, int> train, test;
        for (const auto& id : s.train_ids) ++train[id[0]];
        for (const auto& id : s.test_ids) ++test[id[0]];
        EXPECT_EQ(train['x'], 4);
        EXPECT_EQ(train['y'], 4);
        EXPECT_EQ(test['x'], 1);
        EXPECT_EQ(test['y'], 1);
    }
}

TEST(Split, TopicTooSmall) {
    const auto m = topics_manifest({{"big", 5}, {"lonely", 1}});
    try {
        split_dataset(m, 0.8, 0);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::Stratification);
        EXPECT_NE(std::string(e.what()).find("lonely"), std::string::npos);
    }
}

TEST(Split, BadFraction) {
    const auto m = topics_manifest({{"a", 4}});
    EXPECT_EQ(kind_of([&] { split_dataset(m, 0.0, 0); }), ErrorKind::InvalidInput);
    EXPECT_EQ(kind_of([&] { split_dataset(m, 1.0, 0); }), ErrorKind::InvalidInput);
}

TEST(SplitProperty, PartitionAndStratification) {
    Rng rng(99);
    for (int trial = 0; trial < 300; ++trial) {
        std::vector<std::pair<std::string, int>> topics;
        const int n_topics = 1 + static_cast<int>(rng.uniform_index(6));
        for (int t = 0; t < n_topics; ++t) topics.emplace_back("t" + std::to_string(t) + "_", 2 + static_cast<int>(rng.uniform_index(20)));
        const auto m = topics_manifest(topics);
        const double f = rng.uniform(0.05, 0.95);
        const auto s = split_dataset(m, f, rng.next_u64());

        std::set<std::string> train(s.train_ids.begin(), s.train_ids.end());
        std::set<std::string> test(s.test_ids.begin(), s.test_ids.end());
        ASSERT_EQ(train.size(), s.train_ids.size());
        ASSERT_EQ(train.size() + test.size(), m.videos.size());
        for (const auto& v : m.videos) ASSERT_NE(train.count(v.video_id) + test.count(v.video_id), 0u);
        for (const auto& id : train) ASSERT_EQ(test.count(id), 0u);

        for (const auto& [topic, n] : topics) {
            int k = 0;
            for (const auto& id : train) k += id.rfind(topic, 0) == 0;
            ASSERT_LE(std::abs(k - n * f), 1.0 + 1e-9) << topic << " n=" << n << " f=" << f;
            ASSERT_GE(k, 1);
            ASSERT_LE(k, n - 1);
        }
    }
}

TEST(Manifest, RoundTripIsExact) {
    Rng rng(3);
    DatasetManifest m;
    for (int i = 0; i < 20; ++i) {
        VideoRecord v = video("v" + std::to_string(i), rng.uniform(0.1, 900.0));
        v.native_fps = rng.uniform(1.0, 120.0);
        if (i % 3 == 0) v.subtitle_path = "subs/v" + std::to_string(i) + ".vtt";
        m.videos.push_back(v);
        if (i % 4 != 3) {
            AnnotationSet a{v.video_id, "ann", {}, "2021-03-04T05:06:07Z"};
            for (int s = 0; s < segment_count(v.duration); ++s) a.scores.push_back(1 + static_cast<int>(rng.uniform_index(10)));
            m.annotations.push_back(a);
        }
    }
    m.partial_video_ids = {"v3"};
    const auto dir = fixtures::fresh_dir("manifest");
    save_manifest(m, dir / "dataset.json");
    const auto back = load_manifest(dir / "dataset.json");
    EXPECT_EQ(back, m);
    for (std::size_t i = 0; i < m.videos.size(); ++i) {
        EXPECT_EQ(std::memcmp(&back.videos[i].duration, &m.videos[i].duration, sizeof(double)), 0);
    }
}

TEST(Manifest, ScoreOutOfRange) {
    DatasetManifest m;
    m.videos.push_back(video("a", 10.0));
    m.annotations.push_back({"a", "x", {5, 11}, ""});
    EXPECT_EQ(kind_of([&] { validate_manifest(m); }), ErrorKind::Validation);
    m.annotations[0].scores = {0, 3};
    EXPECT_EQ(kind_of([&] { validate_manifest(m); }), ErrorKind::Validation);
}

TEST(Manifest, SegmentCountMismatch) {
    DatasetManifest m;
    m.videos.push_back(video("a", 23.0));
    m.annotations.push_back({"a", "x", {5, 5, 5, 5}, ""});
    EXPECT_EQ(kind_of([&] { validate_manifest(m); }), ErrorKind::Validation);
}

TEST(Manifest, DanglingAnnotation) {
    DatasetManifest m;
    m.videos.push_back(video("a", 10.0));
    m.annotations.push_back({"ghost", "x", {5, 5}, ""});
    EXPECT_EQ(kind_of([&] { validate_manifest(m); }), ErrorKind::Referential);
}

TEST(Manifest, DuplicateIdsAndBadDuration) {
    DatasetManifest m;
    m.videos.push_back(video("a", 10.0));
    m.videos.push_back(video("a", 12.0));
    EXPECT_EQ(kind_of([&] { validate_manifest(m); }), ErrorKind::Validation);
    m.videos.pop_back();
    m.videos[0].duration = 0.0;
    EXPECT_EQ(kind_of([&] { validate_manifest(m); }), ErrorKind::Validation);
    m.videos[0].duration = 10.0;
    m.videos[0].native_fps = -1.0;
    EXPECT_EQ(kind_of([&] { validate_manifest(m); }), ErrorKind::Validation);
}

TEST(Manifest, UnknownSchemaRejected) {
    DatasetManifest m;
    m.schema_version = "7";
    auto text = to_json(m).dump();
    EXPECT_EQ(kind_of([&] { parse_manifest(text); }), ErrorKind::Validation);
}

TEST(Manifest, MalformedJsonNamesLine) {
    const std::string text = "{\n  \"schema_version\": \"1\",\n  \"videos\": [,]\n}";
    try {
        parse_manifest(text, "broken.json");
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::Parse);
        EXPECT_NE(std::string(e.what()).find("broken.json:3"), std::string::npos) << e.what();
    }
}

TEST(Manifest, FieldErrorNamesPath) {
    const std::string text =
        R"({"schema_version":"1","videos":[{"video_id":"a","media_path":"a.mp4","duration":"long",)"
        R"("native_fps":30,"topic":"t","source":"s"}],"annotations":[]})";
    try {
        parse_manifest(text);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::Parse);
        EXPECT_NE(std::string(e.what()).find("$.videos[0].duration"), std::string::npos) << e.what();
    }
}

TEST(Manifest, MissingFile) {
    EXPECT_EQ(kind_of([] { load_manifest("/nonexistent/dataset.json"); }), ErrorKind::Io);
}
