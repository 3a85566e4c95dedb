#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "stylerag/embedders/endpoint.hpp"
#include "stylerag/index/style_index.hpp"
#include "stylerag/store/jsonl.hpp"
#include "stylerag/types.hpp"

namespace stylerag::retrieval {

// The ablation switch: which components enter the style sum. Omitted
// components are zero vectors, so the sum always has all three terms.
enum class EmbeddingMode { profile_plus_emotion, only_profile, only_emotion };

const char* to_string(EmbeddingMode mode);
EmbeddingMode parse_embedding_mode(const std::string& name);

struct RetrievalConfig {
    std::uint32_t k = kDefaultTopK;
    EmbeddingMode embedding_mode = EmbeddingMode::profile_plus_emotion;
    // nullopt probes every cluster (exhaustive, equals exact-mode results);
    // a value trades recall for latency.
    std::optional<std::uint32_t> probes;
    // Applied only when the query carries a preference.
    bool include_user = true;
};

// What goes to the synthesizer: clips with their scores, highest first, and
// the concatenation order. Deliberately free of configuration echoes so two
// routes to the same hits serialize to the same bytes.
struct StylePromptBundle {
    std::vector<std::pair<SpeechClip, double>> prompts;
    std::vector<std::string> concatenation_manifest;  // clip_ids, prompts order
    double total_duration_s = 0.0;
    bool gated = false;  // explicit clip bypassed the search
};

// False iff the user supplied a style clip directly.
bool needs_retrieval(const StyleQuery& query);

// Deterministic template expansion, documented field order:
//   <text> [profile] <profile_text> [user] age=.. gender=.. region=.. note=..
// The [user] block and absent fields are omitted. The original text is
// always a prefix.
std::string rewrite_query(const StyleQuery& query, const embed::CharacterProfile& profile);

// Resolves hits against the record store in hit order. Throws EmptyBundle
// on an empty hit list, UnknownClipId when a hit has no record.
StylePromptBundle assemble_prompts(const std::vector<index::RetrievalHit>& hits,
                                   const store::RecordStore& records);

// The full query path: retrieval gate -> query rewrite -> context window ->
// per-mode component embeddings -> style sum -> top-k search -> bundle.
// When the gate short-circuits, the bundle holds exactly the explicit clip
// with score 0 and the index is never touched.
// Throws EmptyDatabase on an empty index, PositionOutOfRange when the query
// position is outside the script, EndpointUnavailable from http embedders.
StylePromptBundle retrieve(const StyleQuery& query, const RetrievalConfig& config,
                           const index::StyleIndex& idx, const embed::EmbedderSet& embedders,
                           const Script& script, const store::RecordStore& records);

nlohmann::json bundle_to_json(const StylePromptBundle& bundle);

}  // namespace stylerag::retrieval
