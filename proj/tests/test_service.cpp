#include <gtest/gtest.h>

#include <random>
#include <thread>

#include <json.hpp>

#include "eduvsum/core/errors.hpp"
#include "eduvsum/core/manifest.hpp"
#include "eduvsum/core/segments.hpp"
#include "eduvsum/service/server.hpp"
#include "eduvsum/service/store.hpp"
#include "support/fixtures.hpp"

#include <httplib.h>

using namespace eduvsum;
using namespace eduvsum::service;
using nlohmann::json;
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

VideoRecord record(const std::string& id, double duration) {
    return {id, id + ".bin", duration, 30.0, std::nullopt, "math", "fixture"};
}

// Store and server on a free port, torn down in order.
class Live : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = fx::fresh_dir("service");
        std::string bytes;
        for (int i = 0; i < 5000; ++i) bytes.push_back(static_cast<char>(i % 251));
        fx::write_file(dir_ / "lecture.bin", bytes);
        media_ = bytes;
        store_ = std::make_unique<AnnotationStore>(dir_ / "a.db");
        store_->import_videos({record("lecture", 23.0), record("short", 4.0)});
        ServerOptions o;
        o.port = 0;
        o.media_root = dir_;
        std::filesystem::create_directories(dir_ / "ui");
        fx::write_file(dir_ / "ui" / "index.html", "<html>ui</html>");
        o.ui_root = dir_ / "ui";
        server_ = std::make_unique<AnnotationServer>(*store_, o);
        port_ = server_->bind();
        thread_ = std::thread([this] { server_->listen(); });
        client_ = std::make_unique<httplib::Client>("127.0.0.1", port_);
        for (int i = 0; i < 100 && !client_->Get("/videos"); ++i) std::this_thread::sleep_for(std::chrono::milliseconds(10));
    }
    void TearDown() override {
        server_->stop();
        thread_.join();
    }

    httplib::Result put(const std::string& id, int index, const std::string& body, const std::string& who = "") {
        std::string path = "/videos/" + id + "/segments/" + std::to_string(index) + "/score";
        if (!who.empty()) path += "?annotator=" + who;
        return client_->Put(path.c_str(), body, "application/json");
    }

    std::filesystem::path dir_;
    std::string media_;
    std::unique_ptr<AnnotationStore> store_;
    std::unique_ptr<AnnotationServer> server_;
    std::unique_ptr<httplib::Client> client_;
    std::thread thread_;
    int port_ = 0;
};

}  // namespace

TEST(Store, TasksAndSegmentLayout) {
    AnnotationStore store(":memory:");
    store.import_videos({record("b", 23.0), record("a", 10.0)});
    const auto tasks = store.tasks();
    ASSERT_EQ(tasks.size(), 2u);
    EXPECT_EQ(tasks[0].video_id, "a");
    EXPECT_EQ(tasks[0].total_segments, 2);
    EXPECT_EQ(tasks[1].total_segments, 5);
    EXPECT_EQ(tasks[1].status, TaskStatus::New);
    EXPECT_EQ(store.scores("b").size(), 5u);
    EXPECT_EQ(kind_of([&] { store.scores("zzz"); }), ErrorKind::NotFound);
}

TEST(Store, StatusProgression) {
    AnnotationStore store(":memory:");
    store.import_videos({record("v", 12.0)});
    EXPECT_EQ(store.put_score("v", 0, 4).status, TaskStatus::InProgress);
    EXPECT_EQ(store.put_score("v", 0, 5).completed_segments, 1);  // overwrite, not a second row
    EXPECT_EQ(store.put_score("v", 1, 6).status, TaskStatus::InProgress);
    const auto t = store.put_score("v", 2, 7);
    EXPECT_EQ(t.status, TaskStatus::Done);
    EXPECT_EQ(t.completed_segments, 3);
    EXPECT_EQ(store.scores("v"), (std::vector<std::optional<int>>{5, 6, 7}));
    // Another annotator starts from scratch.
    EXPECT_EQ(store.task("v", "second")->status, TaskStatus::New);
}

TEST(Store, RejectsBadWrites) {
    AnnotationStore store(":memory:");
    store.import_videos({record("v", 12.0)});
    EXPECT_EQ(kind_of([&] { store.put_score("v", 0, 11); }), ErrorKind::Validation);
    EXPECT_EQ(kind_of([&] { store.put_score("v", 0, 0); }), ErrorKind::Validation);
    EXPECT_EQ(kind_of([&] { store.put_score("v", 3, 5); }), ErrorKind::NotFound);
    EXPECT_EQ(kind_of([&] { store.put_score("v", -1, 5); }), ErrorKind::NotFound);
    EXPECT_EQ(kind_of([&] { store.put_score("w", 0, 5); }), ErrorKind::NotFound);
    EXPECT_EQ(store.task("v")->completed_segments, 0);
}

TEST(Store, ExportDefaultAndPartial) {
    AnnotationStore store(":memory:");
    EXPECT_TRUE(store.export_manifest().manifest.videos.empty());
    store.import_videos({record("done", 10.0), record("half", 10.0), record("new", 10.0)});
    store.put_score("done", 0, 3);
    store.put_score("done", 1, 8);
    store.put_score("half", 0, 2);

    const auto full = store.export_manifest();
    ASSERT_EQ(full.manifest.videos.size(), 1u);
    EXPECT_EQ(full.manifest.videos[0].video_id, "done");
    ASSERT_EQ(full.manifest.annotations.size(), 1u);
    EXPECT_EQ(full.manifest.annotations[0].scores, (std::vector<int>{3, 8}));
    EXPECT_EQ(full.incomplete, std::vector<std::string>{"half: 1/2 segments scored"});

    const auto partial = store.export_manifest(true);
    EXPECT_EQ(partial.manifest.videos.size(), 2u);
    EXPECT_EQ(partial.manifest.partial_video_ids, std::vector<std::string>{"half"});
    EXPECT_EQ(partial.manifest.annotations.size(), 1u);
    EXPECT_NO_THROW(validate_manifest(partial.manifest));
}

TEST(Store, PersistsAcrossReopen) {
    const auto dir = fx::fresh_dir("store_reopen");
    {
        AnnotationStore store(dir / "a.db");
        store.import_videos({record("v", 7.0)});
        store.put_score("v", 1, 9);
    }
    AnnotationStore again(dir / "a.db");
    EXPECT_EQ(again.scores("v"), (std::vector<std::optional<int>>{std::nullopt, 9}));
    // Re-import keeps scores; a shorter duration drops the stranded ones.
    again.import_videos({record("v", 7.0)});
    EXPECT_EQ(again.scores("v")[1], 9);
    again.import_videos({record("v", 4.0)});
    EXPECT_EQ(again.scores("v").size(), 1u);
    EXPECT_EQ(again.task("v")->completed_segments, 0);
}

TEST(Store, ConcurrentWritesAllLand) {
    const auto dir = fx::fresh_dir("store_concurrent");
    AnnotationStore store(dir / "a.db");
    store.import_videos({record("v", 200.0)});  // 40 segments
    std::vector<std::thread> workers;
    for (int w = 0; w < 8; ++w) {
        workers.emplace_back([&, w] {
            for (int s = w; s < 40; s += 8) store.put_score("v", s, s % 10 + 1);
        });
    }
    for (auto& t : workers) t.join();
    const auto scores = store.scores("v");
    for (int s = 0; s < 40; ++s) EXPECT_EQ(scores[s], s % 10 + 1);
    EXPECT_EQ(store.task("v")->status, TaskStatus::Done);
}

TEST(Store, FuzzedWritesKeepExportValid) {
    std::mt19937_64 rng(11);
    auto uni = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
    for (int trial = 0; trial < 20; ++trial) {
        AnnotationStore store(":memory:");
        std::vector<VideoRecord> videos;
        for (int v = 0; v < 4; ++v) videos.push_back(record("v" + std::to_string(v), uni(1, 40) + 0.5));
        store.import_videos(videos);
        for (int op = 0; op < 60; ++op) {
            const auto& v = videos[uni(0, 3)];
            const int index = uni(-1, segment_count(v.duration));
            const int score = uni(-1, 12);
            try {
                store.put_score(v.video_id, index, score);
            } catch (const Error& e) {
                EXPECT_TRUE(e.kind() == ErrorKind::NotFound || e.kind() == ErrorKind::Validation);
            }
        }
        for (bool partial : {false, true}) {
            const auto out = store.export_manifest(partial);
            EXPECT_NO_THROW(validate_manifest(out.manifest));
            for (const auto& a : out.manifest.annotations) {
                EXPECT_EQ(static_cast<int>(a.scores.size()),
                          segment_count(out.manifest.find_video(a.video_id)->duration));
            }
        }
    }
}

TEST_F(Live, ListsAndDescribesVideos) {
    auto res = client_->Get("/videos");
    ASSERT_TRUE(res);
    EXPECT_EQ(res->status, 200);
    const auto list = json::parse(res->body);
    ASSERT_EQ(list.size(), 2u);
    EXPECT_EQ(list[0]["video_id"], "lecture");
    EXPECT_EQ(list[0]["total_segments"], 5);
    EXPECT_EQ(list[0]["status"], "NEW");

    res = client_->Get("/videos/lecture");
    ASSERT_TRUE(res);
    const auto body = json::parse(res->body);
    ASSERT_EQ(body["segments"].size(), 5u);
    EXPECT_EQ(body["segments"][4]["start"], 20.0);
    EXPECT_EQ(body["segments"][4]["end"], 23.0);
    EXPECT_TRUE(body["scores"][0].is_null());

    res = client_->Get("/videos/nope");
    ASSERT_TRUE(res);
    EXPECT_EQ(res->status, 404);
}

TEST_F(Live, ServesMediaWithRanges) {
    auto res = client_->Get("/videos/lecture/media");
    ASSERT_TRUE(res);
    EXPECT_EQ(res->status, 200);
    EXPECT_EQ(res->body, media_);
    res = client_->Get("/videos/lecture/media", {{"Range", "bytes=100-199"}});
    ASSERT_TRUE(res);
    EXPECT_EQ(res->status, 206);
    EXPECT_EQ(res->body, media_.substr(100, 100));
    EXPECT_EQ(res->get_header_value("Content-Range"), "bytes 100-199/5000");
    res = client_->Get("/videos/short/media");  // no file on disk
    ASSERT_TRUE(res);
    EXPECT_EQ(res->status, 404);
}

TEST_F(Live, PutScoreRoundTrip) {
    auto res = put("lecture", 2, R"({"score": 7})");
    ASSERT_TRUE(res);
    EXPECT_EQ(res->status, 200);
    EXPECT_EQ(json::parse(res->body)["task"]["status"], "IN_PROGRESS");
    const auto body = json::parse(client_->Get("/videos/lecture")->body);
    EXPECT_EQ(body["scores"][2], 7);

    for (const char* bad : {R"({"score": 11})", R"({"score": 0})", R"({"score": 5.5})", R"({"score": "7"})", "{}", "junk"}) {
        res = put("lecture", 2, bad);
        ASSERT_TRUE(res);
        EXPECT_EQ(res->status, 422) << bad;
        EXPECT_EQ(json::parse(res->body)["field"], "score") << bad;
    }
    EXPECT_EQ(store_->scores("lecture")[2], 7);
    EXPECT_EQ(put("lecture", 5, R"({"score": 3})")->status, 404);
    EXPECT_EQ(put("missing", 0, R"({"score": 3})")->status, 404);
}

TEST_F(Live, LastSegmentCompletesTask) {
    for (int s = 0; s < 4; ++s) ASSERT_EQ(put("lecture", s, R"({"score": 5})")->status, 200);
    auto res = put("lecture", 4, R"({"score": 9})");
    ASSERT_TRUE(res);
    EXPECT_EQ(json::parse(res->body)["task"]["status"], "DONE");
    // Annotators are kept apart.
    EXPECT_EQ(json::parse(put("lecture", 0, R"({"score": 1})", "bob")->body)["task"]["status"], "IN_PROGRESS");
    EXPECT_EQ(json::parse(client_->Get("/videos/lecture")->body)["scores"][0], 5);

    const auto manifest = manifest_from_json(json::parse(client_->Get("/export")->body));
    ASSERT_EQ(manifest.annotations.size(), 1u);
    EXPECT_EQ(manifest.annotations[0].scores, (std::vector<int>{5, 5, 5, 5, 9}));
    EXPECT_NO_THROW(validate_manifest(manifest));
}

TEST_F(Live, ExportPartialOverHttp) {
    put("lecture", 0, R"({"score": 4})");
    auto m = manifest_from_json(json::parse(client_->Get("/export")->body));
    EXPECT_TRUE(m.videos.empty());
    m = manifest_from_json(json::parse(client_->Get("/export?partial=true")->body));
    EXPECT_EQ(m.partial_video_ids, std::vector<std::string>{"lecture"});
}

TEST_F(Live, ConcurrentPuts) {
    std::vector<std::thread> workers;
    for (int w = 0; w < 5; ++w) {
        workers.emplace_back([this, w] {
            httplib::Client c("127.0.0.1", port_);
            const auto res = c.Put(("/videos/lecture/segments/" + std::to_string(w) + "/score").c_str(),
                                   json{{"score", w + 2}}.dump(), "application/json");
            EXPECT_TRUE(res && res->status == 200);
        });
    }
    for (auto& t : workers) t.join();
    EXPECT_EQ(store_->task("lecture")->status, TaskStatus::Done);
    EXPECT_EQ(store_->scores("lecture")[3], 5);
}

TEST_F(Live, CorsAndStaticFiles) {
    auto res = client_->Get("/videos");
    ASSERT_TRUE(res);
    EXPECT_EQ(res->get_header_value("Access-Control-Allow-Origin"), "*");
    res = client_->Options("/videos/lecture/segments/0/score");
    ASSERT_TRUE(res);
    EXPECT_EQ(res->status, 204);
    EXPECT_NE(res->get_header_value("Access-Control-Allow-Methods").find("PUT"), std::string::npos);
    res = client_->Get("/index.html");
    ASSERT_TRUE(res);
    EXPECT_EQ(res->status, 200);
    EXPECT_EQ(res->body, "<html>ui</html>");
}
