#include "stylerag/index/index_io.hpp"

#include <zlib.h>

#include <bit>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <string>

#include "stylerag/error.hpp"

namespace stylerag::index {

namespace {

constexpr char kMagic[4] = {'A', 'S', 'R', 'X'};

void put_u16(std::string& out, std::uint16_t v) {
    out.push_back(static_cast<char>(v & 0xff));
    out.push_back(static_cast<char>((v >> 8) & 0xff));
}

void put_u32(std::string& out, std::uint32_t v) {
    for (int shift = 0; shift < 32; shift += 8) {
        out.push_back(static_cast<char>((v >> shift) & 0xff));
    }
}

void put_u64(std::string& out, std::uint64_t v) {
    for (int shift = 0; shift < 64; shift += 8) {
        out.push_back(static_cast<char>((v >> shift) & 0xff));
    }
}

void put_f32(std::string& out, float v) {
    put_u32(out, std::bit_cast<std::uint32_t>(v));
}

std::uint32_t checksum(const char* data, std::size_t n) {
    return static_cast<std::uint32_t>(crc32_z(0UL, reinterpret_cast<const Bytef*>(data), n));
}

class Reader {
public:
    Reader(const std::string& bytes, std::size_t begin, std::size_t end)
        : bytes_(bytes), pos_(begin), end_(end) {}

    std::size_t pos() const { return pos_; }
    std::size_t remaining() const { return end_ - pos_; }

    void require(std::size_t n) const {
        if (remaining() < n) {
            throw Error(ErrorCode::CorruptFile, "index file truncated");
        }
    }

    std::uint8_t u8() {
        require(1);
        return static_cast<std::uint8_t>(bytes_[pos_++]);
    }

    std::uint16_t u16() {
        require(2);
        std::uint16_t v = 0;
        for (int shift = 0; shift < 16; shift += 8) {
            v = static_cast<std::uint16_t>(
                v | static_cast<std::uint16_t>(static_cast<std::uint8_t>(bytes_[pos_++]))
                        << shift);
        }
        return v;
    }

    std::uint32_t u32() {
        require(4);
        std::uint32_t v = 0;
        for (int shift = 0; shift < 32; shift += 8) {
            v |= static_cast<std::uint32_t>(static_cast<std::uint8_t>(bytes_[pos_++])) << shift;
        }
        return v;
    }

    std::uint64_t u64() {
        require(8);
        std::uint64_t v = 0;
        for (int shift = 0; shift < 64; shift += 8) {
            v |= static_cast<std::uint64_t>(static_cast<std::uint8_t>(bytes_[pos_++])) << shift;
        }
        return v;
    }

    float f32() { return std::bit_cast<float>(u32()); }

    std::string str(std::size_t n) {
        require(n);
        std::string s = bytes_.substr(pos_, n);
        pos_ += n;
        return s;
    }

private:
    const std::string& bytes_;
    std::size_t pos_;
    std::size_t end_;
};

[[noreturn]] void corrupt(const std::string& what) {
    throw Error(ErrorCode::CorruptFile, what);
}

}  // namespace

void save_index(const StyleIndex& index, const std::string& path) {
    std::string body;
    body.append(kMagic, sizeof(kMagic));
    put_u16(body, kFormatVersion);
    body.push_back(static_cast<char>(index.mode_));
    body.push_back(static_cast<char>(index.normalize_ ? 1 : 0));
    put_u32(body, static_cast<std::uint32_t>(index.dim_));
    put_u64(body, index.ids_.size());
    put_u64(body, index.build_seed_);

    std::string ids;
    for (const std::string& id : index.ids_) {
        put_u32(ids, static_cast<std::uint32_t>(id.size()));
        ids.append(id);
    }
    put_u64(body, ids.size());
    body.append(ids);

    std::string vectors;
    vectors.reserve(index.vectors_.size() * 4);
    for (float v : index.vectors_) put_f32(vectors, v);
    put_u64(body, vectors.size());
    body.append(vectors);

    std::string clusters;
    put_u32(clusters, static_cast<std::uint32_t>(index.clusters_.size()));
    for (const Cluster& cluster : index.clusters_) {
        for (float v : cluster.centroid) put_f32(clusters, v);
        put_u64(clusters, cluster.members.size());
        for (std::uint32_t m : cluster.members) put_u32(clusters, m);
    }
    put_u64(body, clusters.size());
    body.append(clusters);

    put_u32(body, checksum(body.data(), body.size()));

    const std::filesystem::path target(path);
    const std::filesystem::path tmp = target.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw Error(ErrorCode::IoError, "cannot open " + tmp.string() + " for writing");
        }
        out.write(body.data(), static_cast<std::streamsize>(body.size()));
        out.flush();
        if (!out) {
            throw Error(ErrorCode::IoError, "short write to " + tmp.string());
        }
    }
    std::error_code ec;
    std::filesystem::rename(tmp, target, ec);
    if (ec) {
        std::filesystem::remove(tmp, ec);
        throw Error(ErrorCode::IoError, "cannot move snapshot into " + path);
    }
}

StyleIndex load_index(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(ErrorCode::IoError, "cannot open " + path);
    }
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (in.bad()) {
        throw Error(ErrorCode::IoError, "cannot read " + path);
    }

    constexpr std::size_t kHeaderSize = 4 + 2 + 1 + 1 + 4 + 8 + 8;
    if (bytes.size() < kHeaderSize + 4) corrupt("index file too small");

    Reader trailer(bytes, bytes.size() - 4, bytes.size());
    if (trailer.u32() != checksum(bytes.data(), bytes.size() - 4)) corrupt("checksum mismatch");

    Reader r(bytes, 0, bytes.size() - 4);
    if (r.str(4) != std::string(kMagic, sizeof(kMagic))) corrupt("bad magic");
    const std::uint16_t version = r.u16();
    if (version != kFormatVersion) {
        throw Error(ErrorCode::UnsupportedVersion,
                    "index format version " + std::to_string(version));
    }
    const std::uint8_t mode_byte = r.u8();
    if (mode_byte > 1) corrupt("unknown index mode");
    const std::uint8_t normalize_byte = r.u8();
    if (normalize_byte > 1) corrupt("bad normalize flag");

    StyleIndex index;
    index.mode_ = static_cast<IndexMode>(mode_byte);
    index.normalize_ = normalize_byte == 1;
    index.dim_ = r.u32();
    const std::uint64_t count = r.u64();
    index.build_seed_ = r.u64();
    if (index.dim_ == 0 || count == 0) corrupt("empty index payload");
    // Every row needs dim*4 vector bytes and every id a 4-byte length
    // prefix, so counts beyond the file size are lies; rejecting them here
    // also keeps later size products far away from overflow.
    if (count > bytes.size() || index.dim_ > bytes.size()) {
        corrupt("declared sizes exceed file size");
    }
    if (index.dim_ > (std::numeric_limits<std::uint64_t>::max() / 4) / count) {
        corrupt("vector payload overflows");
    }

    const std::uint64_t ids_len = r.u64();
    if (ids_len > r.remaining()) corrupt("ids section overruns file");
    const std::size_t ids_end = r.pos() + ids_len;
    index.ids_.reserve(count);
    for (std::uint64_t i = 0; i < count; ++i) {
        const std::uint32_t len = r.u32();
        if (r.pos() + len > ids_end) corrupt("clip id overruns ids section");
        std::string id = r.str(len);
        if (id.empty()) corrupt("empty clip id");
        if (!index.ids_.empty() && !(index.ids_.back() < id)) {
            corrupt("clip ids not strictly ascending");
        }
        index.ids_.push_back(std::move(id));
    }
    if (r.pos() != ids_end) corrupt("ids section length mismatch");

    const std::uint64_t vec_len = r.u64();
    if (vec_len > r.remaining()) corrupt("vectors section overruns file");
    if (vec_len != count * index.dim_ * 4) corrupt("vectors section length mismatch");
    const std::uint64_t n_floats = vec_len / 4;
    index.vectors_.reserve(n_floats);
    for (std::uint64_t i = 0; i < n_floats; ++i) {
        index.vectors_.push_back(r.f32());
    }

    const std::uint64_t cluster_len = r.u64();
    if (cluster_len > r.remaining()) corrupt("clusters section overruns file");
    const std::size_t cluster_end = r.pos() + cluster_len;
    const std::uint32_t n_clusters = r.u32();
    if (index.mode_ == IndexMode::exact && n_clusters != 0) {
        corrupt("exact index carries clusters");
    }
    if (index.mode_ == IndexMode::clustered && (n_clusters == 0 || n_clusters > count)) {
        corrupt("implausible cluster count");
    }
    std::vector<char> covered(count, 0);
    index.clusters_.resize(n_clusters);
    for (std::uint32_t c = 0; c < n_clusters; ++c) {
        Cluster& cluster = index.clusters_[c];
        cluster.centroid.reserve(index.dim_);
        for (std::size_t j = 0; j < index.dim_; ++j) cluster.centroid.push_back(r.f32());
        const std::uint64_t n_members = r.u64();
        if (n_members > count) corrupt("cluster member count exceeds index size");
        cluster.members.reserve(n_members);
        std::uint32_t prev = 0;
        for (std::uint64_t m = 0; m < n_members; ++m) {
            const std::uint32_t row = r.u32();
            if (row >= count) corrupt("cluster member out of range");
            if (m > 0 && row <= prev) corrupt("cluster members not strictly ascending");
            if (covered[row]) corrupt("row assigned to two clusters");
            covered[row] = 1;
            cluster.members.push_back(row);
            prev = row;
        }
    }
    if (r.pos() != cluster_end) corrupt("clusters section length mismatch");
    if (index.mode_ == IndexMode::clustered) {
        for (std::uint64_t row = 0; row < count; ++row) {
            if (!covered[row]) corrupt("row missing from every cluster");
        }
    }
    if (r.remaining() != 0) corrupt("trailing bytes after clusters section");
    return index;
}

}  // namespace stylerag::index
