#pragma once

#include <atomic>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "stylerag/types.hpp"

namespace stylerag::index {

inline constexpr std::uint16_t kFormatVersion = 1;

enum class IndexMode : std::uint8_t { exact = 0, clustered = 1 };

struct SearchRequest {
    Vec query;
    std::uint32_t k = kDefaultTopK;
    // Clusters visited in clustered mode; 0 means the default
    // ceil(sqrt(cluster count)). Ignored in exact mode.
    std::uint32_t probes = 0;
};

// Hits are sorted by score descending, ties broken by ascending clip_id,
// ranks consecutive from 1.
struct RetrievalHit {
    std::string clip_id;
    double score = 0.0;
    std::uint32_t rank = 0;
};

struct Cluster {
    Vec centroid;                        // unit Euclidean norm
    std::vector<std::uint32_t> members;  // row indices, ascending
};

// Max-inner-product index over record embeddings. Exact mode scans every
// vector; clustered mode runs spherical k-means over direction-normalized
// copies and probes the best clusters, scoring with the raw vectors.
//
// Rows are kept in ascending clip_id order, which fixes the storage layout,
// the tie-break order, and the saved byte stream.
class StyleIndex {
public:
    StyleIndex() = default;

    StyleIndex(const StyleIndex& other);
    StyleIndex& operator=(const StyleIndex& other);
    StyleIndex(StyleIndex&& other) noexcept;
    StyleIndex& operator=(StyleIndex&& other) noexcept;

    static StyleIndex build_exact(const std::vector<KnowledgeRecord>& records,
                                  bool normalize = false);
    static StyleIndex build_clustered(const std::vector<KnowledgeRecord>& records,
                                      std::uint32_t n_clusters, std::uint64_t seed,
                                      std::uint32_t max_iters = 25, bool normalize = false);

    std::vector<RetrievalHit> search(const SearchRequest& request) const;

    // Incremental maintenance. Clustered inserts join their max-cosine
    // cluster without a rebuild; removals may leave a cluster empty.
    void insert(const KnowledgeRecord& record);
    void remove(const std::string& clip_id);

    std::size_t dim() const { return dim_; }
    std::size_t size() const { return ids_.size(); }
    IndexMode mode() const { return mode_; }
    bool normalized() const { return normalize_; }
    std::uint64_t build_seed() const { return build_seed_; }
    const std::vector<std::string>& ids() const { return ids_; }
    const std::vector<Cluster>& clusters() const { return clusters_; }
    std::span<const float> vector_at(std::size_t row) const;
    bool contains(const std::string& clip_id) const;

    // Number of search() calls served; lets callers audit that gated
    // queries never touch the index.
    std::uint64_t search_calls() const { return search_calls_.load(std::memory_order_relaxed); }

    std::uint32_t default_probes() const;

private:
    friend void save_index(const StyleIndex& index, const std::string& path);
    friend StyleIndex load_index(const std::string& path);

    std::size_t row_of(const std::string& clip_id) const;  // npos when absent
    std::vector<RetrievalHit> top_k(const std::vector<std::uint32_t>& candidates, const Vec& query,
                                    std::uint32_t k) const;

    std::size_t dim_ = 0;
    IndexMode mode_ = IndexMode::exact;
    bool normalize_ = false;
    std::uint64_t build_seed_ = 0;
    std::vector<std::string> ids_;  // ascending
    std::vector<float> vectors_;    // row-major, ids_.size() x dim_
    std::vector<Cluster> clusters_;
    mutable std::atomic<std::uint64_t> search_calls_{0};
};

}  // namespace stylerag::index
