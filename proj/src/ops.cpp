#include "stylerag/ops.hpp"

#include <algorithm>
#include <cmath>

namespace stylerag {

const char* to_string(AgeBand band) {
    switch (band) {
        case AgeBand::child: return "child";
        case AgeBand::young: return "young";
        case AgeBand::adult: return "adult";
        case AgeBand::senior: return "senior";
    }
    return "unknown";
}

const char* to_string(Gender gender) {
    switch (gender) {
        case Gender::female: return "female";
        case Gender::male: return "male";
        case Gender::nonbinary: return "nonbinary";
    }
    return "unknown";
}

AgeBand parse_age_band(const std::string& name) {
    if (name == "child") return AgeBand::child;
    if (name == "young") return AgeBand::young;
    if (name == "adult") return AgeBand::adult;
    if (name == "senior") return AgeBand::senior;
    throw Error(ErrorCode::InvalidArgument, "unknown age band '" + name + "'");
}

Gender parse_gender(const std::string& name) {
    if (name == "female") return Gender::female;
    if (name == "male") return Gender::male;
    if (name == "nonbinary") return Gender::nonbinary;
    throw Error(ErrorCode::InvalidArgument, "unknown gender '" + name + "'");
}

const char* to_string(RejectReason reason) {
    switch (reason) {
        case RejectReason::DurationOutOfRange: return "DurationOutOfRange";
        case RejectReason::QualityBelowThreshold: return "QualityBelowThreshold";
        case RejectReason::DimensionMismatch: return "DimensionMismatch";
        case RejectReason::EmptyClipId: return "EmptyClipId";
        case RejectReason::EmptyTranscript: return "EmptyTranscript";
        case RejectReason::ShortSegmentDropped: return "ShortSegmentDropped";
        case RejectReason::EndpointFailure: return "EndpointFailure";
    }
    return "Unknown";
}

namespace {

// Canonical order: ascending by value. Two double additions after one sort,
// then a single rounding to float, so argument order cannot change the
// result.
float sum3_canonical(float a, float b, float c) {
    double x = a;
    double y = b;
    double z = c;
    if (x > y) std::swap(x, y);
    if (y > z) std::swap(y, z);
    if (x > y) std::swap(x, y);
    return static_cast<float>((x + y) + z);
}

bool all_finite(const Vec& v) {
    return std::all_of(v.begin(), v.end(), [](float x) { return std::isfinite(x); });
}

}  // namespace

StyleEmbedding compose_style_embedding(const Vec& profile, const Vec& emotion, const Vec& user) {
    if (profile.size() != emotion.size() || profile.size() != user.size()) {
        throw Error(ErrorCode::DimensionMismatch,
                    "component lengths " + std::to_string(profile.size()) + "/" +
                        std::to_string(emotion.size()) + "/" + std::to_string(user.size()));
    }
    if (profile.empty()) {
        throw Error(ErrorCode::EmptyInput, "zero-length component vectors");
    }
    if (!all_finite(profile) || !all_finite(emotion) || !all_finite(user)) {
        throw Error(ErrorCode::NonFiniteInput, "component vector contains NaN or Inf");
    }

    StyleEmbedding out;
    out.values.resize(profile.size());
    for (std::size_t i = 0; i < profile.size(); ++i) {
        out.values[i] = sum3_canonical(profile[i], emotion[i], user[i]);
        if (!std::isfinite(out.values[i])) {
            throw Error(ErrorCode::NonFiniteInput,
                        "coordinate sum overflows storage precision at index " + std::to_string(i));
        }
    }
    out.components = StyleEmbedding::Components{profile, emotion, user};
    return out;
}

double inner_product(std::span<const float> a, std::span<const float> b) {
    if (a.size() != b.size()) {
        throw Error(ErrorCode::DimensionMismatch, "inner product of lengths " +
                                                      std::to_string(a.size()) + " and " +
                                                      std::to_string(b.size()));
    }
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        acc += static_cast<double>(a[i]) * static_cast<double>(b[i]);
    }
    return acc;
}

ValidationResult validate_record(const KnowledgeRecord& record, std::size_t db_dim,
                                 double quality_threshold, double min_s, double max_s) {
    constexpr double kBoundSlack = 1e-9;  // absorbs split-point float noise
    const SpeechClip& clip = record.clip;
    if (clip.duration_s < min_s - kBoundSlack || clip.duration_s > max_s + kBoundSlack) {
        return ValidationResult::reject(
            RejectReason::DurationOutOfRange,
            "duration " + std::to_string(clip.duration_s) + "s outside [" +
                std::to_string(min_s) + ", " + std::to_string(max_s) + "]");
    }
    if (!(clip.quality_score > quality_threshold)) {
        return ValidationResult::reject(RejectReason::QualityBelowThreshold,
                                        "score " + std::to_string(clip.quality_score) +
                                            " not above threshold " +
                                            std::to_string(quality_threshold));
    }
    if (record.embedding.dim() != db_dim) {
        return ValidationResult::reject(RejectReason::DimensionMismatch,
                                        "embedding dim " + std::to_string(record.embedding.dim()) +
                                            " != database dim " + std::to_string(db_dim));
    }
    if (clip.clip_id.empty()) {
        return ValidationResult::reject(RejectReason::EmptyClipId, "clip_id is empty");
    }
    if (clip.transcript.empty()) {
        return ValidationResult::reject(RejectReason::EmptyTranscript,
                                        "clip " + clip.clip_id + " has no transcript");
    }
    return ValidationResult::ok();
}

}  // namespace stylerag
