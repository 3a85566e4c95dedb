#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>

#include "doctest.h"
#include "stylerag/error.hpp"
#include "stylerag/index/index_io.hpp"
#include "stylerag/index/style_index.hpp"

using namespace stylerag;
using index::StyleIndex;
namespace fs = std::filesystem;

namespace {

double u01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

std::vector<KnowledgeRecord> fixture_records(std::size_t n, std::size_t dim,
                                             std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<KnowledgeRecord> records;
    for (std::size_t i = 0; i < n; ++i) {
        KnowledgeRecord r;
        char id[32];
        std::snprintf(id, sizeof(id), "clip%04zu", i);
        r.clip.clip_id = id;
        r.clip.audio_uri = std::string("synth://") + id;
        r.clip.duration_s = 6.0;
        r.clip.speaker_id = "spk";
        r.clip.transcript = "t";
        r.clip.quality_score = 0.8;
        r.embedding.values.resize(dim);
        for (float& x : r.embedding.values) x = static_cast<float>(u01(rng) * 2.0 - 1.0);
        records.push_back(std::move(r));
    }
    return records;
}

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("stylerag_io_" + std::to_string(std::random_device{}()));
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void spit(const fs::path& p, const std::string& bytes) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

void expect_code(const fs::path& p, ErrorCode code) {
    try {
        index::load_index(p.string());
        FAIL("expected a load failure for ", p.filename().string());
    } catch (const Error& err) {
        CHECK(err.code() == code);
    }
}

}  // namespace

TEST_CASE("save/load round-trip: exact and clustered, plain and normalized") {
    TempDir tmp;
    const auto records = fixture_records(64, 12, 99);

    for (int variant = 0; variant < 4; ++variant) {
        CAPTURE(variant);
        const bool clustered = (variant & 1) != 0;
        const bool normalize = (variant & 2) != 0;
        const StyleIndex built = clustered
                                     ? StyleIndex::build_clustered(records, 6, 77, 25, normalize)
                                     : StyleIndex::build_exact(records, normalize);
        const fs::path file = tmp.path / ("idx" + std::to_string(variant) + ".bin");
        index::save_index(built, file.string());
        const StyleIndex loaded = index::load_index(file.string());

        CHECK(loaded.dim() == built.dim());
        CHECK(loaded.size() == built.size());
        CHECK(loaded.mode() == built.mode());
        CHECK(loaded.normalized() == built.normalized());
        CHECK(loaded.build_seed() == built.build_seed());
        CHECK(loaded.ids() == built.ids());
        REQUIRE(loaded.clusters().size() == built.clusters().size());
        for (std::size_t c = 0; c < built.clusters().size(); ++c) {
            CHECK(loaded.clusters()[c].centroid == built.clusters()[c].centroid);
            CHECK(loaded.clusters()[c].members == built.clusters()[c].members);
        }
        for (std::size_t row = 0; row < built.size(); ++row) {
            const auto a = built.vector_at(row);
            const auto b = loaded.vector_at(row);
            REQUIRE(a.size() == b.size());
            for (std::size_t i = 0; i < a.size(); ++i) {
                CHECK(a[i] == b[i]);  // bitwise
            }
        }

        // Saving the loaded index reproduces the file byte for byte.
        const fs::path file2 = tmp.path / ("idx" + std::to_string(variant) + "_resave.bin");
        index::save_index(loaded, file2.string());
        CHECK(slurp(file) == slurp(file2));
    }
}

TEST_CASE("load failure matrix") {
    TempDir tmp;
    const auto records = fixture_records(20, 6, 5);
    const StyleIndex idx = StyleIndex::build_clustered(records, 4, 3);
    const fs::path good = tmp.path / "good.bin";
    index::save_index(idx, good.string());
    const std::string bytes = slurp(good);
    REQUIRE(bytes.size() > 32);

    SUBCASE("missing file is IoError") {
        expect_code(tmp.path / "absent.bin", ErrorCode::IoError);
    }
    SUBCASE("bad magic") {
        std::string b = bytes;
        b[0] = 'Z';
        spit(tmp.path / "magic.bin", b);
        expect_code(tmp.path / "magic.bin", ErrorCode::CorruptFile);
    }
    SUBCASE("future version") {
        std::string b = bytes;
        b[4] = 9;  // version little-endian low byte
        // Trailer has to be valid again or the CRC check fires first.
        // Recompute by saving through the public API is impossible here, so
        // expect either outcome: both reject the file.
        spit(tmp.path / "ver.bin", b);
        try {
            index::load_index((tmp.path / "ver.bin").string());
            FAIL("expected failure");
        } catch (const Error& err) {
            CHECK((err.code() == ErrorCode::UnsupportedVersion ||
                   err.code() == ErrorCode::CorruptFile));
        }
    }
    SUBCASE("single flipped payload byte trips the checksum") {
        std::string b = bytes;
        b[bytes.size() / 2] = static_cast<char>(b[bytes.size() / 2] ^ 0x40);
        spit(tmp.path / "flip.bin", b);
        expect_code(tmp.path / "flip.bin", ErrorCode::CorruptFile);
    }
    SUBCASE("truncation") {
        for (std::size_t keep : {std::size_t{3}, std::size_t{11}, bytes.size() / 2,
                                 bytes.size() - 1}) {
            spit(tmp.path / "trunc.bin", bytes.substr(0, keep));
            expect_code(tmp.path / "trunc.bin", ErrorCode::CorruptFile);
        }
    }
    SUBCASE("trailing garbage") {
        spit(tmp.path / "tail.bin", bytes + "junk");
        expect_code(tmp.path / "tail.bin", ErrorCode::CorruptFile);
    }
    SUBCASE("empty file") {
        spit(tmp.path / "empty.bin", "");
        expect_code(tmp.path / "empty.bin", ErrorCode::CorruptFile);
    }
}

TEST_CASE("save replaces an existing snapshot atomically") {
    TempDir tmp;
    const fs::path file = tmp.path / "idx.bin";
    const auto a = fixture_records(10, 4, 1);
    const auto b = fixture_records(30, 4, 2);
    index::save_index(StyleIndex::build_exact(a), file.string());
    index::save_index(StyleIndex::build_exact(b), file.string());
    const StyleIndex loaded = index::load_index(file.string());
    CHECK(loaded.size() == 30);
    // No temp residue left behind.
    std::size_t files = 0;
    for (const auto& entry : fs::directory_iterator(tmp.path)) {
        (void)entry;
        files++;
    }
    CHECK(files == 1);
}

TEST_CASE("loaded index serves identical searches") {
    TempDir tmp;
    const auto records = fixture_records(150, 10, 21);
    const StyleIndex built = StyleIndex::build_clustered(records, 10, 13);
    const fs::path file = tmp.path / "idx.bin";
    index::save_index(built, file.string());
    const StyleIndex loaded = index::load_index(file.string());

    std::mt19937_64 rng(77);
    for (int q = 0; q < 50; ++q) {
        Vec query(10);
        for (float& x : query) x = static_cast<float>(u01(rng) * 2.0 - 1.0);
        const auto h1 = built.search({query, 5, 3});
        const auto h2 = loaded.search({query, 5, 3});
        REQUIRE(h1.size() == h2.size());
        for (std::size_t i = 0; i < h1.size(); ++i) {
            CHECK(h1[i].clip_id == h2[i].clip_id);
            CHECK(h1[i].score == h2[i].score);
        }
    }
}
