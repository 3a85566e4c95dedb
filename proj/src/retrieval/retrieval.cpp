#include "stylerag/retrieval/retrieval.hpp"

#include <algorithm>

#include "stylerag/embedders/context.hpp"
#include "stylerag/error.hpp"
#include "stylerag/ops.hpp"

namespace stylerag::retrieval {

using nlohmann::json;

const char* to_string(EmbeddingMode mode) {
    switch (mode) {
        case EmbeddingMode::profile_plus_emotion: return "profile+emotion";
        case EmbeddingMode::only_profile: return "only_profile";
        case EmbeddingMode::only_emotion: return "only_emotion";
    }
    return "unknown";
}

EmbeddingMode parse_embedding_mode(const std::string& name) {
    if (name == "profile+emotion" || name == "profile_plus_emotion") {
        return EmbeddingMode::profile_plus_emotion;
    }
    if (name == "only_profile" || name == "only-profile") return EmbeddingMode::only_profile;
    if (name == "only_emotion" || name == "only-emotion") return EmbeddingMode::only_emotion;
    throw Error(ErrorCode::InvalidArgument, "unknown embedding mode: " + name);
}

bool needs_retrieval(const StyleQuery& query) {
    return !query.explicit_style_clip.has_value();
}

std::string rewrite_query(const StyleQuery& query, const embed::CharacterProfile& profile) {
    std::string out = query.utterance_text;
    out += " [profile] ";
    out += profile.profile_text;
    if (query.user_pref && !query.user_pref->empty()) {
        const UserPreference& pref = *query.user_pref;
        out += " [user]";
        if (pref.age_band) out += std::string(" age=") + to_string(*pref.age_band);
        if (pref.gender) out += std::string(" gender=") + to_string(*pref.gender);
        if (pref.region) out += " region=" + *pref.region;
        if (pref.free_text) out += " note=" + *pref.free_text;
    }
    return out;
}

StylePromptBundle assemble_prompts(const std::vector<index::RetrievalHit>& hits,
                                   const store::RecordStore& records) {
    if (hits.empty()) {
        throw Error(ErrorCode::EmptyBundle, "no hits to assemble");
    }
    StylePromptBundle bundle;
    bundle.prompts.reserve(hits.size());
    for (const index::RetrievalHit& hit : hits) {
        const KnowledgeRecord& record = records.get(hit.clip_id);
        bundle.prompts.emplace_back(record.clip, hit.score);
        bundle.concatenation_manifest.push_back(hit.clip_id);
        bundle.total_duration_s += record.clip.duration_s;
    }
    return bundle;
}

StylePromptBundle retrieve(const StyleQuery& query, const RetrievalConfig& config,
                           const index::StyleIndex& idx, const embed::EmbedderSet& embedders,
                           const Script& script, const store::RecordStore& records) {
    if (config.k < 1) {
        throw Error(ErrorCode::InvalidArgument, "k must be >= 1");
    }
    if (!needs_retrieval(query)) {
        StylePromptBundle bundle;
        bundle.gated = true;
        bundle.prompts.emplace_back(*query.explicit_style_clip, 0.0);
        bundle.concatenation_manifest.push_back(query.explicit_style_clip->clip_id);
        bundle.total_duration_s = query.explicit_style_clip->duration_s;
        return bundle;
    }
    if (idx.size() == 0) {
        throw Error(ErrorCode::EmptyDatabase, "index holds no records");
    }
    if (query.position >= script.utterances.size()) {
        throw Error(ErrorCode::PositionOutOfRange,
                    "position " + std::to_string(query.position) + " in a script of " +
                        std::to_string(script.utterances.size()) + " utterances");
    }

    const Utterance& current = script.utterances[query.position];
    StyleQuery q = query;
    if (q.utterance_text.empty()) q.utterance_text = current.text;

    const embed::CharacterProfile profile = embed::reference_profile(script, current.speaker_id);
    const std::string rewritten = rewrite_query(q, profile);
    const embed::ContextWindow context =
        embed::build_context_window(script, q.position, embed::kDefaultContextWindow);

    const Vec zero(idx.dim(), 0.0f);
    const Vec p = config.embedding_mode == EmbeddingMode::only_emotion
                      ? zero
                      : embed::embed_profile(embedders.profile, embed::full_script_text(script),
                                             current.speaker_id);
    const Vec e = config.embedding_mode == EmbeddingMode::only_profile
                      ? zero
                      : embed::embed_emotion(embedders.emotion, rewritten, profile, context);
    const Vec u = config.include_user && q.user_pref
                      ? embed::embed_user(embedders.user, *q.user_pref)
                      : zero;
    const StyleEmbedding style = compose_style_embedding(p, e, u);

    index::SearchRequest request;
    request.query = style.values;
    request.k = config.k;
    request.probes =
        config.probes ? *config.probes
                      : static_cast<std::uint32_t>(std::max<std::size_t>(idx.clusters().size(), 1));
    return assemble_prompts(idx.search(request), records);
}

json bundle_to_json(const StylePromptBundle& bundle) {
    json prompts = json::array();
    std::uint32_t rank = 1;
    for (const auto& [clip, score] : bundle.prompts) {
        json p = store::clip_to_json(clip);
        p["score"] = score;
        p["rank"] = rank++;
        prompts.push_back(std::move(p));
    }
    return json{{"prompts", std::move(prompts)},
                {"concatenation_manifest", bundle.concatenation_manifest},
                {"total_duration_s", bundle.total_duration_s},
                {"gated", bundle.gated}};
}

}  // namespace stylerag::retrieval
