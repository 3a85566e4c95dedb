#include "stylerag/ingestion/types.hpp"

#include <cstdio>

#include "stylerag/embedders/reference.hpp"
#include "stylerag/error.hpp"

namespace stylerag::ingest {

namespace {

std::string fixed(double v, const char* spec) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), spec, v);
    return buf;
}

}  // namespace

const char* to_string(ShortSegmentRule rule) {
    switch (rule) {
        case ShortSegmentRule::merge_same_speaker: return "merge_same_speaker";
        case ShortSegmentRule::drop: return "drop";
    }
    return "unknown";
}

ShortSegmentRule parse_short_segment_rule(const std::string& name) {
    if (name == "merge_same_speaker") return ShortSegmentRule::merge_same_speaker;
    if (name == "drop") return ShortSegmentRule::drop;
    throw Error(ErrorCode::InvalidArgument, "unknown short_segment_rule: " + name);
}

std::string make_clip_id(const std::string& source_uri, double start_s, double end_s) {
    std::string key = source_uri;
    key += embed::kFieldSep;
    key += fixed(start_s, "%.6f");
    key += embed::kFieldSep;
    key += fixed(end_s, "%.6f");
    const std::uint64_t h = embed::fnv1a64(key);
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string make_clip_uri(const std::string& source_uri, double start_s, double end_s) {
    return source_uri + "#t=" + fixed(start_s, "%.3f") + "," + fixed(end_s, "%.3f");
}

}  // namespace stylerag::ingest
