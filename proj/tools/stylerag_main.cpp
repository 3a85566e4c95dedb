#include <iostream>
#include <optional>
#include <string>
#include <string_view>

#include "CLI11.hpp"
#include "json.hpp"
#include "stylerag/app/commands.hpp"
#include "stylerag/app/config.hpp"
#include "stylerag/error.hpp"

namespace {

// The config file has to be known before flag binding so that flags land on
// top of the file/env layers. A cheap pre-scan keeps CLI11 single-pass.
std::optional<std::string> scan_config_path(int argc, char** argv) {
    std::optional<std::string> path;
    for (int i = 1; i < argc; ++i) {
        const std::string_view arg(argv[i]);
        if (arg == "--config" && i + 1 < argc) {
            path = argv[i + 1];
        } else if (arg.rfind("--config=", 0) == 0) {
            path = std::string(arg.substr(9));
        }
    }
    return path;
}

}  // namespace

int main(int argc, char** argv) {
    using namespace stylerag;

    app::AppConfig config;
    try {
        config = app::base_config(scan_config_path(argc, argv));
    } catch (const Error& err) {
        std::cerr << nlohmann::json{{"error", to_string(err.code())},
                                    {"message", err.what()}}
                         .dump()
                  << "\n";
        return 1;
    }

    CLI::App cli{"Retrieval-augmented style selection for expressive TTS"};
    cli.require_subcommand(1);
    // Global flags remain usable after the subcommand name.
    cli.fallthrough();

    std::string config_path_opt;
    cli.add_option("--config", config_path_opt, "Key=value config file (lowest precedence)");
    cli.add_option("--db-dir", config.db_dir, "Database directory");
    cli.add_option("--dim", config.dim, "Embedding dimension");
    cli.add_option("--index-mode", config.index_mode, "exact | clustered");
    cli.add_option("--n-clusters,--k-clusters", config.n_clusters,
                   "Cluster count (0 = ceil(sqrt(N)))");
    std::string probes_flag;
    cli.add_option("--probes", probes_flag, "Clusters probed per query, or \"exhaustive\"");
    cli.add_option("--seed", config.seed, "Clustering seed");
    cli.add_option("--embedder-seed", config.embedder_seed, "Reference embedder seed");
    cli.add_option("--quality-threshold,--threshold", config.quality_threshold,
                   "Strict lower bound on clip quality");
    cli.add_option("--k", config.k, "Default prompts per query");
    cli.add_flag("--normalize,!--no-normalize", config.normalize,
                 "L2-normalize stored vectors");
    cli.add_option("--listen", config.listen, "host:port for serve mode");
    cli.add_option("--scripts-dir", config.scripts_dir,
                   "Script directory for serve mode (default <db-dir>/scripts)");
    cli.add_option("--profile-embedder", config.profile_embedder, "\"reference\" or http URL");
    cli.add_option("--emotion-embedder", config.emotion_embedder, "\"reference\" or http URL");
    cli.add_option("--user-embedder", config.user_embedder, "\"reference\" or http URL");
    cli.add_option("--synthesizer", config.synthesizer, "\"mock\" or http URL");

    std::string manifest_path;
    CLI::App* build = cli.add_subcommand("build-db", "Ingest a corpus manifest and build the database");
    build->add_option("--manifest", manifest_path, "Corpus manifest JSON")->required();
    build->add_option("--out", config.db_dir, "Output database directory");

    app::QueryArgs qargs;
    CLI::App* query = cli.add_subcommand("query", "Retrieve a style-prompt bundle");
    query->add_option("--index", config.db_dir, "Database directory");
    query->add_option("--script", qargs.script_path, "Script JSON")->required();
    query->add_option("--position", qargs.position, "Utterance position in the script");
    query->add_option("--text", qargs.text, "Query text (default: the script line)");
    query->add_option("--k", qargs.k, "Prompts to return (0 = database default)");
    query->add_option("--mode", qargs.mode, "profile+emotion | only_profile | only_emotion");
    query->add_option("--pref-file", qargs.pref_file, "User preference JSON");
    query->add_option("--explicit-clip", qargs.explicit_clip, "Bypass retrieval with this clip id");
    query->add_option("--probes", qargs.probes, "Clusters probed, or \"exhaustive\"");

    CLI::App* serve = cli.add_subcommand("serve", "Run the HTTP retrieval service");

    app::EvalArgs eargs;
    CLI::App* eval = cli.add_subcommand("eval-recall", "Recall@k of probed search vs exact");
    eval->add_option("--queries", eargs.queries_file, "JSONL query vectors (default: generated)");
    eval->add_option("--k", eargs.k, "Hits per query");
    eval->add_option("--probes", eargs.probe_sweep, "Probe sweep (default 1,2,4,... plus C)");
    eval->add_option("--n-queries", eargs.n_queries, "Generated query count");
    eval->add_option("--query-seed", eargs.query_seed, "Generator seed");

    CLI::App* rebuild = cli.add_subcommand("rebuild-index", "Rebuild the index from records.jsonl");

    app::GenArgs gargs;
    CLI::App* gen = cli.add_subcommand("gen-corpus", "Emit a deterministic synthetic corpus manifest");
    gen->add_option("--out", gargs.out_manifest, "Manifest output path")->required();
    gen->add_option("--script-out", gargs.out_script, "Optional demo script output path");
    gen->add_option("--speakers", gargs.speakers, "Speaker count");
    gen->add_option("--segments", gargs.segments, "Raw segment count");
    gen->add_option("--seed", gargs.seed, "Generator seed");

    try {
        cli.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = cli.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (!probes_flag.empty()) app::apply_kv(config, "probes", probes_flag);
        if (build->parsed()) return app::cmd_build_db(config, manifest_path);
        if (query->parsed()) return app::cmd_query(config, qargs);
        if (serve->parsed()) return app::cmd_serve(config);
        if (eval->parsed()) return app::cmd_eval_recall(config, eargs);
        if (rebuild->parsed()) return app::cmd_rebuild_index(config);
        if (gen->parsed()) return app::cmd_gen_corpus(gargs);
    } catch (const Error& err) {
        std::cerr << nlohmann::json{{"error", to_string(err.code())},
                                    {"message", err.what()}}
                         .dump()
                  << "\n";
        return 1;
    } catch (const std::exception& err) {
        std::cerr << nlohmann::json{{"error", "Internal"}, {"message", err.what()}}.dump()
                  << "\n";
        return 1;
    }
    return 2;
}
