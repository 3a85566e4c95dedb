#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "doctest.h"
#include "stylerag/app/config.hpp"
#include "stylerag/error.hpp"

using namespace stylerag;
using app::AppConfig;
namespace fs = std::filesystem;

namespace {

struct EnvGuard {
    std::vector<std::string> keys;
    explicit EnvGuard(std::vector<std::string> names) : keys(std::move(names)) {}
    ~EnvGuard() {
        for (const auto& k : keys) unsetenv(k.c_str());
    }
};

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("stylerag_cfg_" + std::to_string(std::random_device{}()));
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
};

}  // namespace

TEST_CASE("defaults resolve with zero services") {
    const AppConfig c = app::base_config(std::nullopt);
    CHECK(c.db_dir == "db");
    CHECK(c.dim == 256);
    CHECK(c.index_mode == "clustered");
    CHECK(c.n_clusters == 0);
    CHECK_FALSE(c.probes.has_value());
    CHECK(c.quality_threshold == 0.6);
    CHECK(c.k == 3);
    CHECK_FALSE(c.normalize);
    CHECK(c.profile_embedder == "reference");
    CHECK(c.emotion_embedder == "reference");
    CHECK(c.user_embedder == "reference");
    CHECK(c.synthesizer == "mock");
}

TEST_CASE("apply_kv parses every documented key") {
    AppConfig c;
    app::apply_kv(c, "db_dir", "/data/styles");
    app::apply_kv(c, "dim", "128");
    app::apply_kv(c, "index_mode", "exact");
    app::apply_kv(c, "n_clusters", "12");
    app::apply_kv(c, "probes", "4");
    app::apply_kv(c, "seed", "99");
    app::apply_kv(c, "embedder_seed", "7");
    app::apply_kv(c, "quality_threshold", "0.75");
    app::apply_kv(c, "k", "5");
    app::apply_kv(c, "normalize", "true");
    app::apply_kv(c, "listen", "0.0.0.0:9999");
    app::apply_kv(c, "scripts_dir", "/data/scripts");
    app::apply_kv(c, "profile_embedder", "http://127.0.0.1:7001");
    app::apply_kv(c, "emotion_embedder", "http://127.0.0.1:7002");
    app::apply_kv(c, "user_embedder", "http://127.0.0.1:7003");
    app::apply_kv(c, "synthesizer", "http://127.0.0.1:7004");

    CHECK(c.db_dir == "/data/styles");
    CHECK(c.dim == 128);
    CHECK(c.index_mode == "exact");
    CHECK(c.n_clusters == 12);
    CHECK(c.probes == std::optional<std::uint32_t>(4));
    CHECK(c.seed == 99);
    CHECK(c.embedder_seed == 7);
    CHECK(c.quality_threshold == 0.75);
    CHECK(c.k == 5);
    CHECK(c.normalize);
    CHECK(c.listen == "0.0.0.0:9999");
    CHECK(c.scripts_dir == "/data/scripts");
    CHECK(c.profile_embedder == "http://127.0.0.1:7001");
    CHECK(c.synthesizer == "http://127.0.0.1:7004");

    app::apply_kv(c, "probes", "exhaustive");
    CHECK_FALSE(c.probes.has_value());
    app::apply_kv(c, "normalize", "false");
    CHECK_FALSE(c.normalize);
}

TEST_CASE("apply_kv rejects unknown keys and bad values") {
    AppConfig c;
    CHECK_THROWS_AS(app::apply_kv(c, "dimension", "64"), Error);
    CHECK_THROWS_AS(app::apply_kv(c, "dim", "sixty-four"), Error);
    CHECK_THROWS_AS(app::apply_kv(c, "dim", "64x"), Error);
    CHECK_THROWS_AS(app::apply_kv(c, "quality_threshold", "high"), Error);
    CHECK_THROWS_AS(app::apply_kv(c, "normalize", "maybe"), Error);
    CHECK_THROWS_AS(app::apply_kv(c, "index_mode", "fuzzy"), Error);
    CHECK_THROWS_AS(app::apply_kv(c, "probes", "-2"), Error);
}

TEST_CASE("config file: comments, blanks, whitespace") {
    TempDir tmp;
    const std::string path = (tmp.path / "app.conf").string();
    {
        std::ofstream out(path);
        out << "# style database location\n"
            << "db_dir = /var/db/styles\n"
            << "\n"
            << "  dim=64   \n"
            << "k = 4  # trailing comments too\n";
    }
    AppConfig c;
    app::apply_config_file(c, path);
    CHECK(c.db_dir == "/var/db/styles");
    CHECK(c.dim == 64);
    CHECK(c.k == 4);
}

TEST_CASE("config file errors") {
    TempDir tmp;
    AppConfig c;
    CHECK_THROWS_AS(app::apply_config_file(c, (tmp.path / "missing.conf").string()), Error);

    const std::string bad = (tmp.path / "bad.conf").string();
    {
        std::ofstream out(bad);
        out << "no equals sign here\n";
    }
    CHECK_THROWS_AS(app::apply_config_file(c, bad), Error);
}

TEST_CASE("environment layer") {
    EnvGuard guard({"STYLERAG_DIM", "STYLERAG_PROBES", "STYLERAG_NORMALIZE"});
    setenv("STYLERAG_DIM", "32", 1);
    setenv("STYLERAG_PROBES", "exhaustive", 1);
    setenv("STYLERAG_NORMALIZE", "true", 1);
    AppConfig c;
    app::apply_env(c);
    CHECK(c.dim == 32);
    CHECK_FALSE(c.probes.has_value());
    CHECK(c.normalize);
}

TEST_CASE("three-layer precedence: env over file over defaults") {
    TempDir tmp;
    const std::string path = (tmp.path / "app.conf").string();
    {
        std::ofstream out(path);
        // The file sets three keys; env overrides one of them and adds one.
        out << "dim = 64\nk = 7\nquality_threshold = 0.5\n";
    }
    EnvGuard guard({"STYLERAG_K", "STYLERAG_SEED"});
    setenv("STYLERAG_K", "9", 1);
    setenv("STYLERAG_SEED", "1234", 1);

    const AppConfig c = app::base_config(path);
    CHECK(c.dim == 64);                  // file layer
    CHECK(c.quality_threshold == 0.5);   // file layer
    CHECK(c.k == 9);                     // env beats file
    CHECK(c.seed == 1234);               // env beats default
    CHECK(c.db_dir == "db");             // untouched default
    // Flag-over-env is exercised end to end in the CLI tests.
}

TEST_CASE("env parse failures carry the variable name") {
    EnvGuard guard({"STYLERAG_DIM"});
    setenv("STYLERAG_DIM", "huge", 1);
    AppConfig c;
    try {
        app::apply_env(c);
        FAIL("expected InvalidArgument");
    } catch (const Error& err) {
        CHECK(std::string(err.what()).find("dim") != std::string::npos);
    }
}
