#pragma once

#include <cstddef>
#include <span>
#include <string>

#include "stylerag/error.hpp"
#include "stylerag/types.hpp"

namespace stylerag {

// Elementwise three-way sum of the component vectors, no normalization.
// Each coordinate is accumulated in double in value-sorted order and
// rounded once to storage precision, so the result is invariant under any
// permutation of the three arguments.
// Throws DimensionMismatch on unequal lengths, EmptyInput on zero-length
// inputs, NonFiniteInput if any entry (or any coordinate sum) is NaN/Inf.
StyleEmbedding compose_style_embedding(const Vec& profile, const Vec& emotion, const Vec& user);

// Sum of a[i]*b[i] in ascending index order with a double accumulator.
// Throws DimensionMismatch on unequal lengths. Entries are assumed finite.
double inner_product(std::span<const float> a, std::span<const float> b);

enum class RejectReason {
    DurationOutOfRange,
    QualityBelowThreshold,
    DimensionMismatch,
    EmptyClipId,
    EmptyTranscript,
    ShortSegmentDropped,
    EndpointFailure,
};

const char* to_string(RejectReason reason);

struct ValidationResult {
    bool accepted = false;
    RejectReason reason = RejectReason::DurationOutOfRange;  // meaningful when !accepted
    std::string detail;

    static ValidationResult ok() { return {true, RejectReason::DurationOutOfRange, ""}; }
    static ValidationResult reject(RejectReason r, std::string d) {
        return {false, r, std::move(d)};
    }
};

// Admission rules for one record against the database configuration. Pure:
// reports the first failed rule instead of throwing. The quality check is
// strict (score must exceed the threshold). Duration bounds default to the
// 5-10 s chunking contract; a tiny slack absorbs split-point rounding.
ValidationResult validate_record(const KnowledgeRecord& record, std::size_t db_dim,
                                 double quality_threshold, double min_s = kMinClipSeconds,
                                 double max_s = kMaxClipSeconds);

}  // namespace stylerag
