#include "stylerag/app/commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <csignal>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <mutex>
#include <random>
#include <sstream>

#include "httplib.h"
#include "json.hpp"
#include "stylerag/app/jsonlog.hpp"
#include "stylerag/embedders/endpoint.hpp"
#include "stylerag/error.hpp"
#include "stylerag/index/index_io.hpp"
#include "stylerag/index/style_index.hpp"
#include "stylerag/ingestion/pipeline.hpp"
#include "stylerag/ops.hpp"
#include "stylerag/retrieval/retrieval.hpp"
#include "stylerag/store/jsonl.hpp"

namespace stylerag::app {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Database {
    store::DbConfig cfg;
    index::StyleIndex idx;
    store::RecordStore records;
};

Database load_database(const AppConfig& config) {
    const fs::path dir(config.db_dir);
    Database db;
    db.cfg = store::read_db_config((dir / "db.json").string());
    db.idx = index::load_index((dir / "index.bin").string());
    db.records = store::RecordStore::load((dir / "records.jsonl").string());
    return db;
}

embed::EmbedderSet embedders_for(const AppConfig& config, std::size_t dim, std::uint64_t seed) {
    embed::EmbedderSet set = embed::reference_embedders(dim, seed);
    auto wire = [](embed::EmbedderEndpoint& endpoint, const std::string& locator) {
        if (locator != "reference") {
            endpoint.transport = embed::Transport::http_client;
            endpoint.address = locator;
        }
    };
    wire(set.profile, config.profile_embedder);
    wire(set.emotion, config.emotion_embedder);
    wire(set.user, config.user_embedder);
    return set;
}

std::optional<std::uint32_t> resolve_probes(const std::string& flag,
                                            const std::optional<std::uint32_t>& fallback) {
    if (flag.empty()) return fallback;
    if (flag == "exhaustive") return std::nullopt;
    try {
        std::size_t used = 0;
        const unsigned long v = std::stoul(flag, &used);
        if (used != flag.size() || v == 0) throw std::invalid_argument(flag);
        return static_cast<std::uint32_t>(v);
    } catch (const std::exception&) {
        throw Error(ErrorCode::InvalidArgument,
                    "probes wants \"exhaustive\" or a positive integer, got \"" + flag + "\"");
    }
}

std::uint32_t auto_clusters(std::size_t record_count, std::uint32_t requested) {
    std::uint32_t n = requested != 0
                          ? requested
                          : static_cast<std::uint32_t>(
                                std::ceil(std::sqrt(static_cast<double>(record_count))));
    return std::min<std::uint32_t>(n, static_cast<std::uint32_t>(record_count));
}

json report_to_json(const ingest::IngestionReport& report) {
    std::map<std::string, std::size_t> reasons;
    for (const ingest::RejectedDraft& r : report.rejected) {
        reasons[to_string(r.reason)]++;
    }
    json by_reason = json::object();
    for (const auto& [reason, count] : reasons) by_reason[reason] = count;
    return json{{"accepted", report.accepted.size()},
                {"rejected", report.rejected.size()},
                {"by_reason", std::move(by_reason)},
                {"entry_errors", report.entry_errors},
                {"quality_threshold", report.quality_threshold},
                {"segments", report.segments.size()},
                {"clips", report.clips.size()}};
}

void write_json_file(const fs::path& path, const json& j) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::IoError, "cannot open " + path.string() + " for writing");
    out << j.dump(2) << '\n';
    if (!out.flush()) throw Error(ErrorCode::IoError, "short write to " + path.string());
}

int http_status_for(ErrorCode code) {
    switch (code) {
        case ErrorCode::UnknownClipId: return 404;
        case ErrorCode::EmptyDatabase:
        case ErrorCode::EmptyBundle: return 409;
        case ErrorCode::EndpointUnavailable: return 502;
        case ErrorCode::UnsupportedVersion:
        case ErrorCode::CorruptFile:
        case ErrorCode::IoError: return 500;
        default: return 400;
    }
}

double u01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace

int cmd_build_db(const AppConfig& config, const std::string& manifest_path) {
    const auto t0 = std::chrono::steady_clock::now();
    const ingest::CorpusManifest manifest = store::read_manifest(manifest_path);

    ingest::ChunkPolicy policy;
    policy.quality_threshold = config.quality_threshold;
    const embed::EmbedderSet embedders =
        embedders_for(config, config.dim, config.embedder_seed);

    ingest::IngestionReport report =
        ingest::run_pipeline(manifest, policy, embedders, config.dim);

    const fs::path dir(config.db_dir);
    fs::create_directories(dir);
    store::write_segments((dir / "segments.jsonl").string(), report.segments);
    store::write_clips((dir / "clips.jsonl").string(), report.clips);

    json summary = report_to_json(report);
    summary["dim"] = config.dim;
    summary["embedder_seed"] = config.embedder_seed;

    if (report.accepted.empty()) {
        write_json_file(dir / "report.json", summary);
        log_event("build_db_failed", {{"manifest", manifest_path}, {"reason", "no records accepted"}});
        std::cout << summary.dump() << "\n";
        return 1;
    }

    std::vector<KnowledgeRecord> records = report.accepted;
    std::sort(records.begin(), records.end(), [](const auto& a, const auto& b) {
        return a.clip.clip_id < b.clip.clip_id;
    });
    store::write_records((dir / "records.jsonl").string(), records);

    store::DbConfig dbcfg;
    dbcfg.dim = config.dim;
    dbcfg.embedder_seed = config.embedder_seed;
    dbcfg.normalize = config.normalize;
    dbcfg.quality_threshold = config.quality_threshold;
    dbcfg.index_mode = config.index_mode;
    dbcfg.build_seed = config.seed;
    dbcfg.default_k = config.k;

    index::StyleIndex idx;
    if (config.index_mode == "exact") {
        dbcfg.n_clusters = 0;
        idx = index::StyleIndex::build_exact(records, config.normalize);
    } else {
        dbcfg.n_clusters = auto_clusters(records.size(), config.n_clusters);
        idx = index::StyleIndex::build_clustered(records, dbcfg.n_clusters, config.seed, 25,
                                                 config.normalize);
    }
    index::save_index(idx, (dir / "index.bin").string());
    store::write_db_config((dir / "db.json").string(), dbcfg);

    const auto elapsed_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                                std::chrono::steady_clock::now() - t0)
                                .count();
    summary["index"] = {{"mode", dbcfg.index_mode},
                        {"n_clusters", dbcfg.n_clusters},
                        {"build_seed", dbcfg.build_seed}};
    summary["elapsed_ms"] = elapsed_ms;
    write_json_file(dir / "report.json", summary);
    log_event("build_db_done", {{"manifest", manifest_path},
                                {"accepted", report.accepted.size()},
                                {"rejected", report.rejected.size()},
                                {"elapsed_ms", elapsed_ms}});
    std::cout << summary.dump() << "\n";
    return 0;
}

namespace {

retrieval::StylePromptBundle run_query(const Database& db, const AppConfig& config,
                                       const Script& script, const StyleQuery& query,
                                       const retrieval::RetrievalConfig& rc) {
    const embed::EmbedderSet embedders =
        embedders_for(config, db.cfg.dim, db.cfg.embedder_seed);
    const std::string qid = new_query_id();
    log_event("query", {{"id", qid},
                        {"script_id", query.script_id},
                        {"position", query.position},
                        {"gated", !retrieval::needs_retrieval(query)},
                        {"mode", retrieval::to_string(rc.embedding_mode)},
                        {"k", rc.k},
                        {"probes", rc.probes ? json(*rc.probes) : json("exhaustive")}});
    const auto t0 = std::chrono::steady_clock::now();
    retrieval::StylePromptBundle bundle =
        retrieval::retrieve(query, rc, db.idx, embedders, script, db.records);
    const auto us = std::chrono::duration_cast<std::chrono::microseconds>(
                        std::chrono::steady_clock::now() - t0)
                        .count();
    log_event("query_done",
              {{"id", qid}, {"latency_us", us}, {"prompts", bundle.prompts.size()}});
    return bundle;
}

}  // namespace

int cmd_query(const AppConfig& config, const QueryArgs& args) {
    const Database db = load_database(config);
    const Script script = store::read_script(args.script_path);

    StyleQuery query;
    query.script_id = script.script_id;
    query.position = args.position;
    query.utterance_text = args.text;
    query.k = args.k != 0 ? args.k : db.cfg.default_k;
    if (!args.pref_file.empty()) query.user_pref = store::read_pref_file(args.pref_file);
    if (!args.explicit_clip.empty()) {
        query.explicit_style_clip = db.records.get(args.explicit_clip).clip;
    }

    retrieval::RetrievalConfig rc;
    rc.k = query.k;
    rc.embedding_mode = retrieval::parse_embedding_mode(args.mode);
    rc.probes = resolve_probes(args.probes, config.probes);

    const retrieval::StylePromptBundle bundle = run_query(db, config, script, query, rc);
    std::cout << retrieval::bundle_to_json(bundle).dump() << "\n";
    return 0;
}

namespace {

httplib::Server* g_server = nullptr;

void stop_server(int) {
    if (g_server != nullptr) g_server->stop();
}

struct ServeState {
    std::mutex mu;
    std::shared_ptr<const Database> db;
    std::shared_ptr<const std::map<std::string, Script>> scripts;
};

std::map<std::string, Script> load_scripts(const AppConfig& config) {
    std::map<std::string, Script> scripts;
    const fs::path dir =
        config.scripts_dir.empty() ? fs::path(config.db_dir) / "scripts" : fs::path(config.scripts_dir);
    if (!fs::is_directory(dir)) return scripts;
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.path().extension() == ".json") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    for (const fs::path& file : files) {
        Script script = store::read_script(file.string());
        scripts[script.script_id] = std::move(script);
    }
    return scripts;
}

void respond_error(httplib::Response& res, ErrorCode code, const std::string& message) {
    res.status = http_status_for(code);
    res.set_content(json{{"error", to_string(code)}, {"message", message}}.dump(),
                    "application/json");
}

}  // namespace

int cmd_serve(const AppConfig& config) {
    auto state = std::make_shared<ServeState>();
    state->db = std::make_shared<const Database>(load_database(config));
    state->scripts = std::make_shared<const std::map<std::string, Script>>(load_scripts(config));

    httplib::Server server;

    server.Get("/health", [state](const httplib::Request&, httplib::Response& res) {
        std::shared_ptr<const Database> db;
        {
            std::lock_guard<std::mutex> lock(state->mu);
            db = state->db;
        }
        res.set_content(
            json{{"status", "ok"}, {"record_count", db->records.size()}}.dump(),
            "application/json");
    });

    server.Post("/v1/retrieve", [state, config](const httplib::Request& req,
                                                httplib::Response& res) {
        std::shared_ptr<const Database> db;
        std::shared_ptr<const std::map<std::string, Script>> scripts;
        {
            std::lock_guard<std::mutex> lock(state->mu);
            db = state->db;
            scripts = state->scripts;
        }
        try {
            const json body = json::parse(req.body, nullptr, false);
            if (body.is_discarded() || !body.is_object()) {
                respond_error(res, ErrorCode::InvalidArgument, "body is not a JSON object");
                return;
            }
            Script script;
            if (body.contains("script")) {
                script = store::script_from_json(body["script"]);
            } else {
                const std::string script_id = body.value("script_id", "");
                auto it = scripts->find(script_id);
                if (it == scripts->end()) {
                    respond_error(res, ErrorCode::InvalidArgument,
                                  "unknown script_id \"" + script_id + "\"");
                    return;
                }
                script = it->second;
            }

            StyleQuery query;
            query.script_id = script.script_id;
            query.position = body.value("position", 0U);
            query.utterance_text = body.value("text", "");
            query.k = body.value("k", db->cfg.default_k);
            if (body.contains("pref")) query.user_pref = store::pref_from_json(body["pref"]);
            if (body.contains("explicit_clip")) {
                query.explicit_style_clip =
                    db->records.get(body["explicit_clip"].get<std::string>()).clip;
            }

            retrieval::RetrievalConfig rc;
            rc.k = query.k;
            rc.embedding_mode =
                retrieval::parse_embedding_mode(body.value("mode", "profile+emotion"));
            if (body.contains("probes") && body["probes"].is_number_unsigned()) {
                rc.probes = body["probes"].get<std::uint32_t>();
            } else {
                rc.probes = config.probes;
            }

            const retrieval::StylePromptBundle bundle =
                run_query(*db, config, script, query, rc);
            res.set_content(retrieval::bundle_to_json(bundle).dump(), "application/json");
        } catch (const Error& err) {
            respond_error(res, err.code(), err.what());
        } catch (const json::exception& err) {
            respond_error(res, ErrorCode::InvalidArgument, err.what());
        }
    });

    server.Post("/admin/reload", [state, config](const httplib::Request&, httplib::Response& res) {
        try {
            auto db = std::make_shared<const Database>(load_database(config));
            auto scripts =
                std::make_shared<const std::map<std::string, Script>>(load_scripts(config));
            std::size_t count = db->records.size();
            {
                std::lock_guard<std::mutex> lock(state->mu);
                state->db = std::move(db);
                state->scripts = std::move(scripts);
            }
            log_event("reload", {{"record_count", count}});
            res.set_content(json{{"status", "reloaded"}, {"record_count", count}}.dump(),
                            "application/json");
        } catch (const Error& err) {
            respond_error(res, err.code(), err.what());
        }
    });

    const std::size_t colon = config.listen.rfind(':');
    if (colon == std::string::npos) {
        throw Error(ErrorCode::InvalidArgument, "listen wants host:port, got " + config.listen);
    }
    const std::string host = config.listen.substr(0, colon);
    int port = 0;
    try {
        port = std::stoi(config.listen.substr(colon + 1));
    } catch (const std::exception&) {
        throw Error(ErrorCode::InvalidArgument, "bad listen port in " + config.listen);
    }

    g_server = &server;
    std::signal(SIGINT, stop_server);
    std::signal(SIGTERM, stop_server);

    log_event("serve_start", {{"listen", config.listen},
                              {"record_count", state->db->records.size()}});
    const bool ok = server.listen(host, port);
    g_server = nullptr;
    log_event("serve_stop", {{"clean", ok}});
    return ok ? 0 : 1;
}

int cmd_eval_recall(const AppConfig& config, const EvalArgs& args) {
    const Database db = load_database(config);
    if (db.idx.mode() != index::IndexMode::clustered) {
        throw Error(ErrorCode::InvalidArgument, "eval-recall needs a clustered index");
    }
    const auto cluster_count = static_cast<std::uint32_t>(db.idx.clusters().size());

    std::vector<Vec> queries;
    if (!args.queries_file.empty()) {
        for (const json& line : store::read_jsonl(args.queries_file)) {
            const json& v = line.is_array() ? line : line.at("vector");
            queries.push_back(v.get<Vec>());
        }
    } else {
        std::mt19937_64 rng(args.query_seed);
        queries.reserve(args.n_queries);
        for (std::uint32_t i = 0; i < args.n_queries; ++i) {
            Vec q(db.idx.dim());
            for (float& x : q) x = static_cast<float>(u01(rng) * 2.0 - 1.0);
            queries.push_back(std::move(q));
        }
    }
    if (queries.empty()) {
        throw Error(ErrorCode::EmptyInput, "no queries to evaluate");
    }

    std::vector<std::uint32_t> sweep = args.probe_sweep;
    if (sweep.empty()) {
        for (std::uint32_t p = 1; p < cluster_count; p *= 2) sweep.push_back(p);
        sweep.push_back(cluster_count);
    }

    // Exhaustive probing equals the exact scan, so it serves as the oracle.
    std::vector<std::vector<std::string>> oracle;
    oracle.reserve(queries.size());
    for (const Vec& q : queries) {
        std::vector<std::string> ids;
        for (const auto& hit : db.idx.search({q, args.k, cluster_count})) {
            ids.push_back(hit.clip_id);
        }
        oracle.push_back(std::move(ids));
    }

    std::ostringstream csv;
    csv << "probes,k,recall,mean_latency_us\n";
    for (std::uint32_t probes : sweep) {
        double recall_sum = 0.0;
        std::int64_t latency_sum_us = 0;
        for (std::size_t i = 0; i < queries.size(); ++i) {
            const auto t0 = std::chrono::steady_clock::now();
            const auto hits = db.idx.search({queries[i], args.k, probes});
            latency_sum_us += std::chrono::duration_cast<std::chrono::microseconds>(
                                  std::chrono::steady_clock::now() - t0)
                                  .count();
            std::size_t found = 0;
            for (const auto& hit : hits) {
                for (const std::string& id : oracle[i]) {
                    if (id == hit.clip_id) {
                        ++found;
                        break;
                    }
                }
            }
            recall_sum += oracle[i].empty()
                              ? 1.0
                              : static_cast<double>(found) / static_cast<double>(oracle[i].size());
        }
        char row[128];
        std::snprintf(row, sizeof(row), "%u,%u,%.6f,%.1f\n", probes, args.k,
                      recall_sum / static_cast<double>(queries.size()),
                      static_cast<double>(latency_sum_us) /
                          static_cast<double>(queries.size()));
        csv << row;
    }
    std::cout << csv.str();
    return 0;
}

int cmd_rebuild_index(const AppConfig& config) {
    const fs::path dir(config.db_dir);
    store::DbConfig dbcfg = store::read_db_config((dir / "db.json").string());
    const std::vector<KnowledgeRecord> records =
        store::read_records((dir / "records.jsonl").string());
    if (records.empty()) {
        throw Error(ErrorCode::EmptyInput, "records.jsonl holds no records");
    }

    index::StyleIndex idx;
    dbcfg.index_mode = config.index_mode;
    dbcfg.build_seed = config.seed;
    if (config.index_mode == "exact") {
        dbcfg.n_clusters = 0;
        idx = index::StyleIndex::build_exact(records, dbcfg.normalize);
    } else {
        dbcfg.n_clusters = auto_clusters(records.size(), config.n_clusters);
        idx = index::StyleIndex::build_clustered(records, dbcfg.n_clusters, config.seed, 25,
                                                 dbcfg.normalize);
    }
    index::save_index(idx, (dir / "index.bin").string());
    store::write_db_config((dir / "db.json").string(), dbcfg);
    log_event("rebuild_index", {{"mode", dbcfg.index_mode},
                                {"n_clusters", dbcfg.n_clusters},
                                {"records", records.size()}});
    std::cout << json{{"rebuilt", records.size()},
                      {"mode", dbcfg.index_mode},
                      {"n_clusters", dbcfg.n_clusters}}
                     .dump()
              << "\n";
    return 0;
}

int cmd_gen_corpus(const GenArgs& args) {
    static const char* kWords[] = {
        "river",   "lantern", "quiet",  "thunder", "morning", "ember",   "garden",  "winter",
        "promise", "shadow",  "honey",  "velvet",  "copper",  "meadow",  "harbor",  "willow",
        "candle",  "storm",   "summer", "whisper", "march",   "golden",  "silver",  "hollow",
        "bright",  "weary",   "gentle", "fierce",  "distant", "secret",  "broken",  "mended",
        "paper",   "stone",   "glass",  "iron",    "wool",    "linen",   "cedar",   "maple",
        "north",   "south",   "east",   "west",    "dawn",    "dusk",    "noon",    "night",
        "laugh",   "weep",    "shout",  "murmur",  "wander",  "linger",  "hasten",  "rest",
        "old",     "young",   "first",  "last",    "near",    "far",     "warm",    "cold",
    };
    constexpr std::size_t kWordCount = sizeof(kWords) / sizeof(kWords[0]);

    std::mt19937_64 rng(args.seed);
    auto sentence = [&](std::size_t min_words, std::size_t max_words) {
        const std::size_t n = min_words + static_cast<std::size_t>(
                                              rng() % (max_words - min_words + 1));
        std::string text;
        for (std::size_t i = 0; i < n; ++i) {
            if (i > 0) text += ' ';
            text += kWords[rng() % kWordCount];
        }
        return text;
    };

    std::vector<std::string> speakers;
    speakers.reserve(args.speakers);
    for (std::uint32_t s = 0; s < args.speakers; ++s) {
        char buf[16];
        std::snprintf(buf, sizeof(buf), "spk%02u", s);
        speakers.push_back(buf);
    }

    constexpr std::uint32_t kSegmentsPerSource = 40;
    const std::uint32_t n_sources = (args.segments + kSegmentsPerSource - 1) / kSegmentsPerSource;

    ingest::CorpusManifest manifest;
    std::uint32_t emitted = 0;
    for (std::uint32_t src = 0; src < n_sources && emitted < args.segments; ++src) {
        ingest::ManifestEntry entry;
        char uri[64];
        std::snprintf(uri, sizeof(uri), "synth://corpus/src%03u.wav", src);
        entry.audio_uri = uri;
        entry.language = "en";
        entry.tags = {"synthetic"};

        // Two to four voices per dialogue, rotating so every speaker occurs.
        const std::uint32_t cast_size = 2 + static_cast<std::uint32_t>(rng() % 3);
        std::vector<std::string> cast;
        for (std::uint32_t c = 0; c < cast_size; ++c) {
            cast.push_back(speakers[(src * 3 + c * 7) % speakers.size()]);
        }

        double t = 1.0 + u01(rng);
        for (std::uint32_t i = 0; i < kSegmentsPerSource && emitted < args.segments; ++i) {
            ingest::RawSegment seg;
            seg.source_uri = entry.audio_uri;
            seg.speaker_id = cast[rng() % cast.size()];

            const double shape = u01(rng);
            double dur = 0.0;
            if (shape < 0.70) {
                dur = 5.2 + u01(rng) * 4.3;  // in range
            } else if (shape < 0.85) {
                dur = 2.0 + u01(rng) * 2.5;  // short: merge or drop
            } else {
                dur = 10.5 + u01(rng) * 11.5;  // long: split
            }
            seg.start_s = t;
            seg.end_s = t + dur;
            t = seg.end_s + 0.2 + u01(rng) * 0.6;

            seg.vad_score = u01(rng) < 0.85 ? 0.62 + u01(rng) * 0.37 : 0.30 + u01(rng) * 0.30;
            seg.transcript = sentence(4, 10);
            if (dur > 10.0) {
                const std::uint32_t marks = 1 + static_cast<std::uint32_t>(rng() % 3);
                for (std::uint32_t m = 0; m < marks; ++m) {
                    seg.silence_s.push_back(seg.start_s + 1.0 + u01(rng) * (dur - 2.0));
                }
                std::sort(seg.silence_s.begin(), seg.silence_s.end());
            }
            entry.segments.push_back(std::move(seg));
            ++emitted;
        }
        manifest.entries.push_back(std::move(entry));
    }

    store::write_manifest(args.out_manifest, manifest);

    if (!args.out_script.empty()) {
        Script script;
        script.script_id = "demo-script";
        const ingest::ManifestEntry& first = manifest.entries.front();
        for (const ingest::RawSegment& seg : first.segments) {
            script.utterances.push_back({seg.speaker_id, *seg.transcript});
        }
        store::write_script(args.out_script, script);
    }

    std::cout << json{{"entries", manifest.entries.size()},
                      {"segments", emitted},
                      {"speakers", speakers.size()}}
                     .dump()
              << "\n";
    return 0;
}

}  // namespace stylerag::app
