#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "doctest.h"
#include "stylerag/error.hpp"
#include "stylerag/index/style_index.hpp"
#include "stylerag/ops.hpp"

using namespace stylerag;
using index::IndexMode;
using index::RetrievalHit;
using index::SearchRequest;
using index::StyleIndex;

namespace {

double u01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

KnowledgeRecord rec(std::string id, Vec v) {
    KnowledgeRecord r;
    r.clip.clip_id = std::move(id);
    r.clip.audio_uri = "synth://" + r.clip.clip_id;
    r.clip.duration_s = 6.0;
    r.clip.speaker_id = "spk";
    r.clip.transcript = "t";
    r.clip.quality_score = 0.9;
    r.embedding.values = std::move(v);
    return r;
}

std::vector<KnowledgeRecord> random_records(std::mt19937_64& rng, std::size_t n,
                                            std::size_t dim) {
    std::vector<KnowledgeRecord> records;
    records.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        Vec v(dim);
        for (float& x : v) x = static_cast<float>(u01(rng) * 2.0 - 1.0);
        char id[32];
        std::snprintf(id, sizeof(id), "r%05zu", i);
        records.push_back(rec(id, std::move(v)));
    }
    return records;
}

// Independent scorer: no shared code with StyleIndex internals.
std::vector<RetrievalHit> brute_force(const std::vector<KnowledgeRecord>& records, const Vec& q,
                                      std::uint32_t k) {
    std::vector<RetrievalHit> hits;
    for (const auto& r : records) {
        hits.push_back({r.clip.clip_id, inner_product(r.embedding.values, q), 0});
    }
    std::stable_sort(hits.begin(), hits.end(), [](const RetrievalHit& a, const RetrievalHit& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.clip_id < b.clip_id;
    });
    if (hits.size() > k) hits.resize(k);
    for (std::size_t i = 0; i < hits.size(); ++i) hits[i].rank = static_cast<std::uint32_t>(i + 1);
    return hits;
}

void check_equal(const std::vector<RetrievalHit>& got, const std::vector<RetrievalHit>& want) {
    REQUIRE(got.size() == want.size());
    for (std::size_t i = 0; i < got.size(); ++i) {
        CAPTURE(i);
        CHECK(got[i].clip_id == want[i].clip_id);
        CHECK(got[i].score == want[i].score);
        CHECK(got[i].rank == want[i].rank);
    }
}

}  // namespace

TEST_CASE("exact search on the documented three-vector fixture") {
    const std::vector<KnowledgeRecord> records = {
        rec("a", {1.0f, 0.0f}), rec("b", {0.0f, 1.0f}), rec("c", {1.0f, 1.0f})};
    const StyleIndex idx = StyleIndex::build_exact(records);
    const auto hits = idx.search({{2.0f, 1.0f}, 2, 0});
    REQUIRE(hits.size() == 2);
    CHECK(hits[0].clip_id == "c");
    CHECK(hits[0].score == 3.0);
    CHECK(hits[0].rank == 1);
    CHECK(hits[1].clip_id == "a");
    CHECK(hits[1].score == 2.0);
    CHECK(hits[1].rank == 2);
}

TEST_CASE("ties break by ascending clip_id") {
    const std::vector<KnowledgeRecord> records = {
        rec("z", {1.0f, 0.0f}), rec("m", {1.0f, 0.0f}), rec("a", {1.0f, 0.0f})};
    const StyleIndex idx = StyleIndex::build_exact(records);
    const auto hits = idx.search({{1.0f, 0.0f}, 3, 0});
    REQUIRE(hits.size() == 3);
    CHECK(hits[0].clip_id == "a");
    CHECK(hits[1].clip_id == "m");
    CHECK(hits[2].clip_id == "z");
}

TEST_CASE("k larger than the database returns everything") {
    const std::vector<KnowledgeRecord> records = {rec("a", {1.0f}), rec("b", {2.0f})};
    const StyleIndex idx = StyleIndex::build_exact(records);
    CHECK(idx.search({{1.0f}, 10, 0}).size() == 2);
}

TEST_CASE("exact search equals the brute-force oracle on random instances") {
    std::mt19937_64 rng(500);
    for (int trial = 0; trial < 25; ++trial) {
        const auto records = random_records(rng, 60, 8);
        const StyleIndex idx = StyleIndex::build_exact(records);
        for (int q = 0; q < 10; ++q) {
            Vec query(8);
            for (float& x : query) x = static_cast<float>(u01(rng) * 2.0 - 1.0);
            check_equal(idx.search({query, 5, 0}), brute_force(records, query, 5));
        }
    }
}

TEST_CASE("build rejects bad input") {
    CHECK_THROWS_AS(StyleIndex::build_exact({}), Error);

    const std::vector<KnowledgeRecord> dup = {rec("a", {1.0f}), rec("a", {2.0f})};
    try {
        StyleIndex::build_exact(dup);
        FAIL("expected DuplicateClipId");
    } catch (const Error& err) {
        CHECK(err.code() == ErrorCode::DuplicateClipId);
    }

    const std::vector<KnowledgeRecord> ragged = {rec("a", {1.0f}), rec("b", {1.0f, 2.0f})};
    CHECK_THROWS_AS(StyleIndex::build_exact(ragged), Error);

    std::mt19937_64 rng(1);
    const auto records = random_records(rng, 10, 4);
    try {
        StyleIndex::build_clustered(records, 11, 7);
        FAIL("expected TooManyClusters");
    } catch (const Error& err) {
        CHECK(err.code() == ErrorCode::TooManyClusters);
    }
    CHECK_THROWS_AS(StyleIndex::build_clustered(records, 0, 7), Error);
}

TEST_CASE("search rejects bad requests") {
    const StyleIndex idx = StyleIndex::build_exact({rec("a", {1.0f, 0.0f})});
    CHECK_THROWS_AS(idx.search({{1.0f}, 1, 0}), Error);       // dim mismatch
    CHECK_THROWS_AS(idx.search({{1.0f, 0.0f}, 0, 0}), Error); // k < 1
}

TEST_CASE("clustered build: same seed same clusters, different seed may differ") {
    std::mt19937_64 rng(42);
    const auto records = random_records(rng, 200, 12);
    const StyleIndex a = StyleIndex::build_clustered(records, 8, 123);
    const StyleIndex b = StyleIndex::build_clustered(records, 8, 123);
    REQUIRE(a.clusters().size() == b.clusters().size());
    for (std::size_t c = 0; c < a.clusters().size(); ++c) {
        CHECK(a.clusters()[c].centroid == b.clusters()[c].centroid);
        CHECK(a.clusters()[c].members == b.clusters()[c].members);
    }
    CHECK(a.build_seed() == 123);
}

TEST_CASE("clustered structure invariants") {
    std::mt19937_64 rng(43);
    const auto records = random_records(rng, 300, 10);
    const StyleIndex idx = StyleIndex::build_clustered(records, 12, 9);
    REQUIRE(idx.clusters().size() == 12);

    std::vector<int> seen(idx.size(), 0);
    for (const auto& cluster : idx.clusters()) {
        CHECK_FALSE(cluster.members.empty());  // repair leaves no empty cluster
        CHECK(std::is_sorted(cluster.members.begin(), cluster.members.end()));
        double norm = 0.0;
        for (float x : cluster.centroid) norm += static_cast<double>(x) * x;
        CHECK(std::abs(std::sqrt(norm) - 1.0) < 1e-4);
        for (auto m : cluster.members) {
            REQUIRE(m < idx.size());
            seen[m]++;
        }
    }
    for (int count : seen) CHECK(count == 1);  // partition: every row exactly once
}

TEST_CASE("probes >= cluster count equals exact search") {
    std::mt19937_64 rng(44);
    const auto records = random_records(rng, 240, 10);
    const StyleIndex exact = StyleIndex::build_exact(records);
    const StyleIndex clustered = StyleIndex::build_clustered(records, 15, 5);
    for (int q = 0; q < 30; ++q) {
        Vec query(10);
        for (float& x : query) x = static_cast<float>(u01(rng) * 2.0 - 1.0);
        check_equal(clustered.search({query, 7, 15}), exact.search({query, 7, 0}));
        check_equal(clustered.search({query, 7, 100}), exact.search({query, 7, 0}));
    }
}

TEST_CASE("probes=0 uses the ceil(sqrt(C)) default") {
    std::mt19937_64 rng(45);
    const auto records = random_records(rng, 100, 6);
    const StyleIndex idx = StyleIndex::build_clustered(records, 9, 5);
    CHECK(idx.default_probes() == 3);

    const StyleIndex idx10 = StyleIndex::build_clustered(records, 10, 5);
    CHECK(idx10.default_probes() == 4);  // ceil(sqrt(10))
}

TEST_CASE("probed search results always come from probed clusters") {
    std::mt19937_64 rng(46);
    const auto records = random_records(rng, 150, 8);
    const StyleIndex idx = StyleIndex::build_clustered(records, 10, 3);
    Vec query(8);
    for (float& x : query) x = static_cast<float>(u01(rng) * 2.0 - 1.0);

    // With one probe the hits must lie inside a single cluster.
    const auto hits = idx.search({query, 5, 1});
    REQUIRE_FALSE(hits.empty());
    std::size_t home = idx.clusters().size();
    for (std::size_t c = 0; c < idx.clusters().size(); ++c) {
        const auto& m = idx.clusters()[c].members;
        for (auto row : m) {
            if (idx.ids()[row] == hits[0].clip_id) home = c;
        }
    }
    REQUIRE(home < idx.clusters().size());
    for (const auto& hit : hits) {
        bool in_home = false;
        for (auto row : idx.clusters()[home].members) {
            if (idx.ids()[row] == hit.clip_id) in_home = true;
        }
        CHECK(in_home);
    }
}

TEST_CASE("self-retrieval on an orthogonal fixture") {
    std::vector<KnowledgeRecord> records;
    for (int i = 0; i < 6; ++i) {
        Vec v(6, 0.0f);
        v[static_cast<std::size_t>(i)] = 2.0f + static_cast<float>(i);
        records.push_back(rec("o" + std::to_string(i), std::move(v)));
    }
    const StyleIndex idx = StyleIndex::build_exact(records);
    for (const auto& r : records) {
        const auto hits = idx.search({r.embedding.values, 1, 0});
        REQUIRE(hits.size() == 1);
        CHECK(hits[0].clip_id == r.clip.clip_id);
        CHECK(hits[0].score ==
              inner_product(r.embedding.values, r.embedding.values));
    }
}

TEST_CASE("insert and remove maintain search correctness") {
    std::mt19937_64 rng(47);
    auto records = random_records(rng, 50, 8);

    for (auto mode_clustered : {false, true}) {
        CAPTURE(mode_clustered);
        StyleIndex idx = mode_clustered ? StyleIndex::build_clustered(records, 5, 11)
                                        : StyleIndex::build_exact(records);

        auto inserted = rec("zzz-new", Vec(8, 0.9f));
        idx.insert(inserted);
        CHECK(idx.size() == 51);
        CHECK(idx.contains("zzz-new"));

        auto with = records;
        with.push_back(inserted);
        Vec query(8, 1.0f);
        const auto want = brute_force(with, query, 4);
        check_equal(idx.search({query, 4, 1000}), want);

        idx.remove("zzz-new");
        CHECK(idx.size() == 50);
        CHECK_FALSE(idx.contains("zzz-new"));
        check_equal(idx.search({query, 4, 1000}), brute_force(records, query, 4));

        CHECK_THROWS_AS(idx.remove("zzz-new"), Error);
        idx.insert(inserted);
        CHECK_THROWS_AS(idx.insert(inserted), Error);  // duplicate
    }
}

TEST_CASE("normalized index stores unit vectors") {
    const std::vector<KnowledgeRecord> records = {rec("a", {3.0f, 4.0f}),
                                                  rec("b", {0.0f, 2.0f})};
    const StyleIndex idx = StyleIndex::build_exact(records, true);
    CHECK(idx.normalized());
    const auto row = idx.vector_at(0);  // "a"
    CHECK(row[0] == doctest::Approx(0.6).epsilon(1e-6));
    CHECK(row[1] == doctest::Approx(0.8).epsilon(1e-6));
}

TEST_CASE("search_calls counts every search") {
    const StyleIndex idx = StyleIndex::build_exact({rec("a", {1.0f})});
    CHECK(idx.search_calls() == 0);
    idx.search({{1.0f}, 1, 0});
    idx.search({{2.0f}, 1, 0});
    CHECK(idx.search_calls() == 2);
}
