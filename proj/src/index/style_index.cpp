#include "stylerag/index/style_index.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "stylerag/error.hpp"
#include "stylerag/ops.hpp"

namespace stylerag::index {

namespace {

constexpr std::size_t kNoRow = std::numeric_limits<std::size_t>::max();

// Uniform double in [0, 1) from the engine's raw 64-bit output. The standard
// distributions are implementation-defined, so they are avoided everywhere a
// build must be reproducible byte for byte.
double u01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

double dot(std::span<const float> a, std::span<const float> b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        acc += static_cast<double>(a[i]) * static_cast<double>(b[i]);
    }
    return acc;
}

void normalize_in_place(std::span<float> v) {
    double norm_sq = dot(v, v);
    if (norm_sq <= 0.0) return;  // zero vectors keep their direction-free form
    const double inv = 1.0 / std::sqrt(norm_sq);
    for (float& x : v) x = static_cast<float>(x * inv);
}

// Direction-only copies used for clustering; magnitudes stay in the stored
// vectors so inner-product scores are untouched.
std::vector<float> normalized_copy(const std::vector<float>& vectors, std::size_t n,
                                   std::size_t dim) {
    std::vector<float> out = vectors;
    for (std::size_t row = 0; row < n; ++row) {
        normalize_in_place(std::span<float>(out.data() + row * dim, dim));
    }
    return out;
}

std::span<const float> row_span(const std::vector<float>& vectors, std::size_t dim,
                                std::size_t row) {
    return {vectors.data() + row * dim, dim};
}

// Seeded k-means++ over unit vectors: first pick uniform, then proportional
// to squared chordal distance from the nearest chosen centroid. Duplicate
// points exhaust the weight mass; the fallback picks the lowest unchosen row.
std::vector<Vec> kmeanspp_init(const std::vector<float>& norms, std::size_t n, std::size_t dim,
                               std::uint32_t k, std::mt19937_64& rng) {
    std::vector<std::size_t> chosen;
    std::vector<char> is_chosen(n, 0);
    std::vector<double> d2(n, std::numeric_limits<double>::max());

    auto take = [&](std::size_t row) {
        chosen.push_back(row);
        is_chosen[row] = 1;
        for (std::size_t i = 0; i < n; ++i) {
            if (is_chosen[i]) {
                d2[i] = 0.0;
                continue;
            }
            double c = 2.0 - 2.0 * dot(row_span(norms, dim, i), row_span(norms, dim, row));
            d2[i] = std::min(d2[i], std::max(0.0, c));
        }
    };

    take(static_cast<std::size_t>(rng() % n));
    while (chosen.size() < k) {
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) total += d2[i];
        std::size_t pick = kNoRow;
        if (total > 0.0) {
            double r = u01(rng) * total;
            double cum = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                if (is_chosen[i]) continue;
                cum += d2[i];
                if (cum > r) {
                    pick = i;
                    break;
                }
            }
        }
        if (pick == kNoRow) {
            for (std::size_t i = 0; i < n; ++i) {
                if (!is_chosen[i]) {
                    pick = i;
                    break;
                }
            }
        }
        take(pick);
    }

    std::vector<Vec> centroids;
    centroids.reserve(k);
    for (std::size_t row : chosen) {
        auto s = row_span(norms, dim, row);
        centroids.emplace_back(s.begin(), s.end());
    }
    return centroids;
}

std::uint32_t best_cluster(std::span<const float> point, const std::vector<Vec>& centroids) {
    std::uint32_t best = 0;
    double best_score = -std::numeric_limits<double>::max();
    for (std::uint32_t c = 0; c < centroids.size(); ++c) {
        double s = dot(point, centroids[c]);
        if (s > best_score) {  // ties keep the lowest cluster index
            best_score = s;
            best = c;
        }
    }
    return best;
}

// An empty cluster steals the farthest member of the largest cluster; the
// cluster count stays fixed and every choice is tie-broken by index.
void repair_empty_clusters(std::vector<std::uint32_t>& assign, const std::vector<float>& norms,
                           std::size_t dim, const std::vector<Vec>& centroids) {
    const std::uint32_t k = static_cast<std::uint32_t>(centroids.size());
    std::vector<std::size_t> sizes(k, 0);
    for (std::uint32_t a : assign) sizes[a]++;

    for (std::uint32_t empty = 0; empty < k; ++empty) {
        if (sizes[empty] != 0) continue;
        std::uint32_t donor = 0;
        std::size_t donor_size = 0;
        for (std::uint32_t c = 0; c < k; ++c) {
            if (sizes[c] > donor_size) {
                donor = c;
                donor_size = sizes[c];
            }
        }
        std::size_t farthest = kNoRow;
        double worst = std::numeric_limits<double>::max();
        for (std::size_t row = 0; row < assign.size(); ++row) {
            if (assign[row] != donor) continue;
            double s = dot(row_span(norms, dim, row), centroids[donor]);
            if (s < worst) {
                worst = s;
                farthest = row;
            }
        }
        assign[static_cast<std::size_t>(farthest)] = empty;
        sizes[donor]--;
        sizes[empty]++;
    }
}

}  // namespace

StyleIndex::StyleIndex(const StyleIndex& other)
    : dim_(other.dim_),
      mode_(other.mode_),
      normalize_(other.normalize_),
      build_seed_(other.build_seed_),
      ids_(other.ids_),
      vectors_(other.vectors_),
      clusters_(other.clusters_),
      search_calls_(other.search_calls_.load(std::memory_order_relaxed)) {}

StyleIndex& StyleIndex::operator=(const StyleIndex& other) {
    if (this != &other) {
        dim_ = other.dim_;
        mode_ = other.mode_;
        normalize_ = other.normalize_;
        build_seed_ = other.build_seed_;
        ids_ = other.ids_;
        vectors_ = other.vectors_;
        clusters_ = other.clusters_;
        search_calls_.store(other.search_calls_.load(std::memory_order_relaxed),
                            std::memory_order_relaxed);
    }
    return *this;
}

StyleIndex::StyleIndex(StyleIndex&& other) noexcept
    : dim_(other.dim_),
      mode_(other.mode_),
      normalize_(other.normalize_),
      build_seed_(other.build_seed_),
      ids_(std::move(other.ids_)),
      vectors_(std::move(other.vectors_)),
      clusters_(std::move(other.clusters_)),
      search_calls_(other.search_calls_.load(std::memory_order_relaxed)) {}

StyleIndex& StyleIndex::operator=(StyleIndex&& other) noexcept {
    if (this != &other) {
        dim_ = other.dim_;
        mode_ = other.mode_;
        normalize_ = other.normalize_;
        build_seed_ = other.build_seed_;
        ids_ = std::move(other.ids_);
        vectors_ = std::move(other.vectors_);
        clusters_ = std::move(other.clusters_);
        search_calls_.store(other.search_calls_.load(std::memory_order_relaxed),
                            std::memory_order_relaxed);
    }
    return *this;
}

std::span<const float> StyleIndex::vector_at(std::size_t row) const {
    return {vectors_.data() + row * dim_, dim_};
}

bool StyleIndex::contains(const std::string& clip_id) const {
    return row_of(clip_id) != kNoRow;
}

std::size_t StyleIndex::row_of(const std::string& clip_id) const {
    auto it = std::lower_bound(ids_.begin(), ids_.end(), clip_id);
    if (it == ids_.end() || *it != clip_id) return kNoRow;
    return static_cast<std::size_t>(it - ids_.begin());
}

std::uint32_t StyleIndex::default_probes() const {
    if (clusters_.empty()) return 0;
    return static_cast<std::uint32_t>(
        std::ceil(std::sqrt(static_cast<double>(clusters_.size()))));
}

namespace {

// Shared build prologue: validates the batch and lays rows out in ascending
// clip_id order.
void fill_rows(std::vector<std::string>& ids, std::vector<float>& vectors,
               const std::vector<KnowledgeRecord>& records, bool normalize) {
    if (records.empty()) {
        throw Error(ErrorCode::EmptyInput, "cannot build an index from zero records");
    }
    const std::size_t dim = records.front().embedding.dim();
    if (dim == 0) {
        throw Error(ErrorCode::EmptyInput, "record embeddings have zero dimension");
    }

    std::vector<std::size_t> order(records.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return records[a].clip.clip_id < records[b].clip.clip_id;
    });

    ids.reserve(records.size());
    vectors.reserve(records.size() * dim);
    for (std::size_t pos = 0; pos < order.size(); ++pos) {
        const KnowledgeRecord& rec = records[order[pos]];
        if (rec.embedding.dim() != dim) {
            throw Error(ErrorCode::DimensionMismatch,
                        "record " + rec.clip.clip_id + " has dim " +
                            std::to_string(rec.embedding.dim()) + ", expected " +
                            std::to_string(dim));
        }
        if (!ids.empty() && ids.back() == rec.clip.clip_id) {
            throw Error(ErrorCode::DuplicateClipId, rec.clip.clip_id);
        }
        ids.push_back(rec.clip.clip_id);
        vectors.insert(vectors.end(), rec.embedding.values.begin(), rec.embedding.values.end());
        if (normalize) {
            normalize_in_place(std::span<float>(vectors.data() + pos * dim, dim));
        }
    }
}

}  // namespace

StyleIndex StyleIndex::build_exact(const std::vector<KnowledgeRecord>& records, bool normalize) {
    StyleIndex index;
    fill_rows(index.ids_, index.vectors_, records, normalize);
    index.dim_ = records.front().embedding.dim();
    index.mode_ = IndexMode::exact;
    index.normalize_ = normalize;
    return index;
}

StyleIndex StyleIndex::build_clustered(const std::vector<KnowledgeRecord>& records,
                                       std::uint32_t n_clusters, std::uint64_t seed,
                                       std::uint32_t max_iters, bool normalize) {
    if (n_clusters < 1) {
        throw Error(ErrorCode::InvalidArgument, "n_clusters must be >= 1");
    }
    if (n_clusters > records.size()) {
        throw Error(ErrorCode::TooManyClusters,
                    std::to_string(n_clusters) + " clusters for " +
                        std::to_string(records.size()) + " records");
    }

    StyleIndex index;
    fill_rows(index.ids_, index.vectors_, records, normalize);
    const std::size_t n = index.ids_.size();
    const std::size_t dim = records.front().embedding.dim();
    index.dim_ = dim;
    index.mode_ = IndexMode::clustered;
    index.normalize_ = normalize;
    index.build_seed_ = seed;

    const std::vector<float> norms = normalized_copy(index.vectors_, n, dim);
    std::mt19937_64 rng(seed);
    std::vector<Vec> centroids = kmeanspp_init(norms, n, dim, n_clusters, rng);

    std::vector<std::uint32_t> assign(n, 0);
    std::vector<std::uint32_t> prev;
    for (std::uint32_t iter = 0; iter < max_iters; ++iter) {
        for (std::size_t row = 0; row < n; ++row) {
            assign[row] = best_cluster(row_span(norms, dim, row), centroids);
        }
        repair_empty_clusters(assign, norms, dim, centroids);
        if (assign == prev) break;
        prev = assign;

        // Mean of member directions, renormalized. A cancelled-out mean
        // keeps the previous centroid.
        std::vector<std::vector<double>> sums(n_clusters, std::vector<double>(dim, 0.0));
        std::vector<std::size_t> counts(n_clusters, 0);
        for (std::size_t row = 0; row < n; ++row) {
            auto s = row_span(norms, dim, row);
            auto& acc = sums[assign[row]];
            for (std::size_t j = 0; j < dim; ++j) acc[j] += s[j];
            counts[assign[row]]++;
        }
        for (std::uint32_t c = 0; c < n_clusters; ++c) {
            double norm_sq = 0.0;
            for (double x : sums[c]) norm_sq += x * x;
            if (counts[c] == 0 || norm_sq <= 0.0) continue;
            const double inv = 1.0 / std::sqrt(norm_sq);
            for (std::size_t j = 0; j < dim; ++j) {
                centroids[c][j] = static_cast<float>(sums[c][j] * inv);
            }
            normalize_in_place(centroids[c]);  // squeeze out f32 rounding drift
        }
    }

    index.clusters_.resize(n_clusters);
    for (std::uint32_t c = 0; c < n_clusters; ++c) {
        index.clusters_[c].centroid = centroids[c];
    }
    for (std::size_t row = 0; row < n; ++row) {
        index.clusters_[assign[row]].members.push_back(static_cast<std::uint32_t>(row));
    }
    return index;
}

std::vector<RetrievalHit> StyleIndex::top_k(const std::vector<std::uint32_t>& candidates,
                                            const Vec& query, std::uint32_t k) const {
    std::vector<std::pair<double, std::uint32_t>> scored;
    scored.reserve(candidates.size());
    for (std::uint32_t row : candidates) {
        scored.emplace_back(dot(vector_at(row), query), row);
    }
    const std::size_t k_eff = std::min<std::size_t>(k, scored.size());
    auto better = [this](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return ids_[a.second] < ids_[b.second];
    };
    std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(k_eff),
                      scored.end(), better);

    std::vector<RetrievalHit> hits;
    hits.reserve(k_eff);
    for (std::size_t i = 0; i < k_eff; ++i) {
        hits.push_back({ids_[scored[i].second], scored[i].first,
                        static_cast<std::uint32_t>(i + 1)});
    }
    return hits;
}

std::vector<RetrievalHit> StyleIndex::search(const SearchRequest& request) const {
    if (request.query.size() != dim_) {
        throw Error(ErrorCode::DimensionMismatch,
                    "query dim " + std::to_string(request.query.size()) + " != index dim " +
                        std::to_string(dim_));
    }
    if (request.k < 1) {
        throw Error(ErrorCode::InvalidArgument, "k must be >= 1");
    }
    search_calls_.fetch_add(1, std::memory_order_relaxed);

    std::vector<std::uint32_t> candidates;
    if (mode_ == IndexMode::exact) {
        candidates.resize(ids_.size());
        std::iota(candidates.begin(), candidates.end(), 0);
    } else {
        std::uint32_t probes = request.probes == 0 ? default_probes() : request.probes;
        probes = std::min<std::uint32_t>(probes, static_cast<std::uint32_t>(clusters_.size()));

        std::vector<std::pair<double, std::uint32_t>> ranked;
        ranked.reserve(clusters_.size());
        for (std::uint32_t c = 0; c < clusters_.size(); ++c) {
            ranked.emplace_back(dot(clusters_[c].centroid, request.query), c);
        }
        std::partial_sort(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(probes),
                          ranked.end(),
                          [](const auto& a, const auto& b) {
                              if (a.first != b.first) return a.first > b.first;
                              return a.second < b.second;
                          });
        for (std::uint32_t p = 0; p < probes; ++p) {
            const auto& members = clusters_[ranked[p].second].members;
            candidates.insert(candidates.end(), members.begin(), members.end());
        }
    }
    return top_k(candidates, request.query, request.k);
}

void StyleIndex::insert(const KnowledgeRecord& record) {
    if (record.embedding.dim() != dim_) {
        throw Error(ErrorCode::DimensionMismatch,
                    "record dim " + std::to_string(record.embedding.dim()) + " != index dim " +
                        std::to_string(dim_));
    }
    const std::string& id = record.clip.clip_id;
    if (contains(id)) {
        throw Error(ErrorCode::DuplicateClipId, id);
    }

    auto it = std::lower_bound(ids_.begin(), ids_.end(), id);
    const std::uint32_t pos = static_cast<std::uint32_t>(it - ids_.begin());
    ids_.insert(it, id);
    vectors_.insert(vectors_.begin() + static_cast<std::ptrdiff_t>(pos) *
                                           static_cast<std::ptrdiff_t>(dim_),
                    record.embedding.values.begin(), record.embedding.values.end());
    if (normalize_) {
        normalize_in_place(std::span<float>(vectors_.data() + pos * dim_, dim_));
    }

    if (mode_ == IndexMode::clustered) {
        for (Cluster& cluster : clusters_) {
            for (std::uint32_t& m : cluster.members) {
                if (m >= pos) ++m;
            }
        }
        Vec direction(vector_at(pos).begin(), vector_at(pos).end());
        normalize_in_place(direction);
        std::uint32_t best = 0;
        double best_score = -std::numeric_limits<double>::max();
        for (std::uint32_t c = 0; c < clusters_.size(); ++c) {
            double s = dot(direction, clusters_[c].centroid);
            if (s > best_score) {
                best_score = s;
                best = c;
            }
        }
        auto& members = clusters_[best].members;
        members.insert(std::lower_bound(members.begin(), members.end(), pos), pos);
    }
}

void StyleIndex::remove(const std::string& clip_id) {
    const std::size_t row = row_of(clip_id);
    if (row == kNoRow) {
        throw Error(ErrorCode::UnknownClipId, clip_id);
    }
    ids_.erase(ids_.begin() + static_cast<std::ptrdiff_t>(row));
    vectors_.erase(vectors_.begin() + static_cast<std::ptrdiff_t>(row * dim_),
                   vectors_.begin() + static_cast<std::ptrdiff_t>((row + 1) * dim_));
    if (mode_ == IndexMode::clustered) {
        for (Cluster& cluster : clusters_) {
            auto& members = cluster.members;
            members.erase(std::remove(members.begin(), members.end(),
                                      static_cast<std::uint32_t>(row)),
                          members.end());
            for (std::uint32_t& m : members) {
                if (m > row) --m;
            }
        }
    }
}

}  // namespace stylerag::index
