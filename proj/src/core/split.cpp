#include "eduvsum/core/split.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "eduvsum/core/errors.hpp"
#include "eduvsum/core/rng.hpp"

namespace eduvsum {

namespace {

struct TopicQuota {
    std::string topic;
    std::vector<std::string> ids;
    double ideal = 0.0;  // n * fraction
    int train = 0;
};

}  // namespace

SplitSpec split_dataset(const DatasetManifest& manifest, double train_fraction, std::uint64_t seed) {
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
        fail(ErrorKind::InvalidInput, "train_fraction must lie in (0, 1)");
    }
    std::map<std::string, std::vector<std::string>> by_topic;
    for (const auto& v : manifest.videos) by_topic[v.topic].push_back(v.video_id);

    std::vector<TopicQuota> quotas;
    int total = 0;
    for (auto& [topic, ids] : by_topic) {
        if (ids.size() < 2) {
            fail(ErrorKind::Stratification,
                 "topic \"" + topic + "\" has " + std::to_string(ids.size()) + " video(s); at least 2 are required");
        }
        std::sort(ids.begin(), ids.end());
        TopicQuota q{topic, ids, ids.size() * train_fraction, 0};
        const int n = static_cast<int>(ids.size());
        q.train = std::clamp(static_cast<int>(std::floor(q.ideal)), 1, n - 1);
        total += n;
        quotas.push_back(std::move(q));
    }

    // Largest-remainder adjustment toward the global target.
    const int target = static_cast<int>(std::lround(total * train_fraction));
    auto assigned = [&] {
        int s = 0;
        for (const auto& q : quotas) s += q.train;
        return s;
    };
    int current = assigned();
    while (current < target) {
        TopicQuota* best = nullptr;
        for (auto& q : quotas) {
            const int n = static_cast<int>(q.ids.size());
            const int cap = std::min(n - 1, static_cast<int>(std::ceil(q.ideal)));
            if (q.train >= cap) continue;
            if (best == nullptr || (q.ideal - q.train) > (best->ideal - best->train)) best = &q;
        }
        if (best == nullptr) break;
        ++best->train;
        ++current;
    }
    while (current > target) {
        TopicQuota* best = nullptr;
        for (auto& q : quotas) {
            const int floor_quota = std::max(1, static_cast<int>(std::floor(q.ideal)));
            if (q.train <= floor_quota) continue;
            if (best == nullptr || (q.ideal - q.train) < (best->ideal - best->train)) best = &q;
        }
        if (best == nullptr) break;
        --best->train;
        --current;
    }

    SplitSpec split;
    split.seed = seed;
    Rng rng(seed);
    for (auto& q : quotas) {
        rng.shuffle(std::span<std::string>(q.ids));
        split.train_ids.insert(split.train_ids.end(), q.ids.begin(), q.ids.begin() + q.train);
        split.test_ids.insert(split.test_ids.end(), q.ids.begin() + q.train, q.ids.end());
    }
    std::sort(split.train_ids.begin(), split.train_ids.end());
    std::sort(split.test_ids.begin(), split.test_ids.end());
    return split;
}

}  // namespace eduvsum
